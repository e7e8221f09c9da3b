"""Command line entry point: ``lapdual run|list|validate``.

Exit codes: 0 when every gate passes, 2 on a statistical or numerical
failure, 1 on a config or validation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from .config import ConfigError, ExperimentConfig, apply_overrides, read_raw
from .errors import ContractError, ValidationError

__all__ = ["main", "catalog", "resolve_config"]

EXIT_PASS, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2
log = logging.getLogger("lapdual")


def catalog() -> dict[str, Path]:
    """Built-in configs keyed by name."""
    root = resources.files("lapdual") / "catalog"
    return {Path(p.name).stem: Path(str(p)) for p in sorted(root.iterdir(), key=lambda q: q.name)
            if p.name.endswith(".yaml")}


def resolve_config(ref: str) -> Path:
    p = Path(ref)
    if p.exists():
        return p
    cat = catalog()
    if ref in cat:
        return cat[ref]
    raise ConfigError("", f"no config file or catalog entry named {ref!r}")


def _load(ref: str, overrides: list[str]) -> ExperimentConfig:
    return ExperimentConfig.from_dict(apply_overrides(read_raw(resolve_config(ref)), overrides))


def cmd_run(args: argparse.Namespace) -> int:
    from .experiments import run_experiment

    cfg = _load(args.config, args.set or [])
    prefix = Path(cfg.output)
    if args.out_dir:
        prefix = Path(args.out_dir) / prefix.name
    prefix.parent.mkdir(parents=True, exist_ok=True)
    log.info("running %s (%s)", cfg.name, cfg.experiment)
    try:
        res = run_experiment(cfg)
    except (ValidationError, ContractError) as exc:
        raise ConfigError("", str(exc)) from None
    res.write_csv(f"{prefix}_report.csv")
    Path(f"{prefix}_summary.txt").write_text(res.summary_text())
    if args.plot and res.plot is not None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig = plt.figure(figsize=(8, 4))
        res.plot(fig)
        fig.savefig(f"{prefix}_plot.png", dpi=120, bbox_inches="tight")
        plt.close(fig)
    print(res.summary_text(), end="")
    return EXIT_PASS if res.passed else EXIT_FAIL


def cmd_list(args: argparse.Namespace) -> int:
    for name, path in catalog().items():
        raw = read_raw(path)
        print(f"{name:28s} {raw.get('experiment', ''):16s} {raw.get('description', '')}")
    return EXIT_PASS


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _load(args.config, args.set or [])
    again = ExperimentConfig.from_dict(cfg.to_dict())
    if again.to_dict() != cfg.to_dict():
        raise ConfigError("", "config does not survive a serialization round trip")
    print(f"{cfg.name}: valid {cfg.experiment} config")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lapdual", description="Laplace duality verification experiments.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a config file or catalog entry")
    run.add_argument("config")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a dotted config key")
    run.add_argument("--plot", action="store_true", help="also write <prefix>_plot.png")
    run.add_argument("--out-dir", help="directory for outputs, replacing the prefix directory")
    run.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list the built-in acceptance configs")
    ls.set_defaults(func=cmd_list)
    val = sub.add_parser("validate", help="parse and validate a config")
    val.add_argument("config")
    val.add_argument("--set", action="append", metavar="KEY=VALUE")
    val.set_defaults(func=cmd_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValidationError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
