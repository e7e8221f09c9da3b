from __future__ import annotations

import subprocess
import sys

import pytest
import yaml

from lapdual.cli import catalog, main
from lapdual.config import EXPERIMENTS, ConfigError, ExperimentConfig, apply_overrides, load_config, read_raw

FAST = ["sim.paths=2000", "sim.step=0.25"]


def write_cfg(tmp_path, raw: dict, name: str = "c.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(raw, sort_keys=False))
    return p


def small_duality() -> dict:
    raw = read_raw(catalog()["subordinator_duality"])
    return apply_overrides(raw, FAST + ["grid.x=[0.0, 1.0]", "grid.y=[1.0]"])


class TestCatalog:
    def test_count_and_names(self):
        cat = catalog()
        assert len(cat) == 12
        assert {"cb_feller_duality", "cbre_duality"} <= set(cat)

    @pytest.mark.parametrize("name", sorted(catalog()))
    def test_round_trip(self, name):
        cfg = ExperimentConfig.from_dict(read_raw(catalog()[name]))
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg and again.to_dict() == cfg.to_dict()
        assert ExperimentConfig.from_dict(yaml.safe_load(cfg.to_yaml())) == cfg
        assert cfg.experiment in EXPERIMENTS and cfg.name == name

    def test_list_output(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert len(out) == 12 and any(line.startswith("cbre_duality") for line in out)


class TestValidation:
    def test_atom_at_zero(self, tmp_path, capsys):
        raw = small_duality()
        raw["process"]["phi"]["atoms"] = [[0.0, 0.5]]
        assert main(["run", str(write_cfg(tmp_path, raw)), "--out-dir", str(tmp_path)]) == 1
        err = capsys.readouterr().err
        assert "atom location must be nonzero" in err and "process.phi" in err

    def test_unknown_class(self, tmp_path, capsys):
        raw = small_duality()
        raw["process"]["phi"]["class"] = "bogus"
        assert main(["validate", str(write_cfg(tmp_path, raw))]) == 1
        assert "unknown mechanism class" in capsys.readouterr().err

    def test_seed_required(self, tmp_path):
        raw = small_duality()
        del raw["sim"]["seed"]
        with pytest.raises(ConfigError, match="seed"):
            load_config(write_cfg(tmp_path, raw))

    def test_bad_convention(self):
        raw = small_duality()
        raw["convention"] = ["0+inf", "0inf-"]
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(raw)

    def test_not_a_dual_pair(self):
        raw = small_duality()
        raw["dual"] = {"kind": "cb", "psi": {"class": "splp", "a": 1.0}}
        with pytest.raises(ConfigError, match="dual"):
            ExperimentConfig.from_dict(raw)

    def test_empty_grid(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(apply_overrides(small_duality(), ["grid.x=[]"]))

    def test_unknown_reference(self, capsys):
        assert main(["run", "no_such_config"]) == 1
        assert "no_such_config" in capsys.readouterr().err

    def test_override_parsing(self):
        raw = apply_overrides({"sim": {"seed": 1}}, ["sim.seed=7", "gates.z_max=2.5", "name=x"])
        assert raw == {"sim": {"seed": 7}, "gates": {"z_max": 2.5}, "name": "x"}
        with pytest.raises(ConfigError):
            apply_overrides({}, ["missing_equals"])

    def test_validate_catalog(self, capsys):
        assert main(["validate", "cbc_duality"]) == 0
        assert "valid duality config" in capsys.readouterr().out


class TestRun:
    def test_pass_writes_outputs(self, tmp_path):
        p = write_cfg(tmp_path, small_duality())
        assert main(["run", str(p), "--out-dir", str(tmp_path)]) == 0
        report = (tmp_path / "subordinator_duality_report.csv").read_text().splitlines()
        assert report[0].split(",")[-1] == "z" and len(report) == 1 + 2 * 1 * 2
        summary = (tmp_path / "subordinator_duality_summary.txt").read_text()
        assert "worst_abs_z=" in summary and summary.rstrip().endswith("result=pass")

    def test_statistical_failure_exit_code(self, tmp_path):
        p = write_cfg(tmp_path, small_duality())
        assert main(["run", str(p), "--out-dir", str(tmp_path), "--set", "gates.z_max=0.0"]) == 2
        assert (tmp_path / "subordinator_duality_summary.txt").read_text().rstrip().endswith("result=fail")

    def test_override_equals_edit(self, tmp_path):
        raw = small_duality()
        base = write_cfg(tmp_path, raw, "base.yaml")
        edited = dict(raw, sim=dict(raw["sim"], seed=7))
        edited_path = write_cfg(tmp_path, edited, "edited.yaml")
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", str(base), "--set", "sim.seed=7", "--out-dir", str(a)]) == 0
        assert main(["run", str(edited_path), "--out-dir", str(b)]) == 0
        for suffix in ("_report.csv", "_summary.txt"):
            f = "subordinator_duality" + suffix
            assert (a / f).read_bytes() == (b / f).read_bytes()
        # a different seed gives different numbers
        c = tmp_path / "c"
        main(["run", str(base), "--out-dir", str(c)])
        assert (c / "subordinator_duality_report.csv").read_bytes() != (a / "subordinator_duality_report.csv").read_bytes()

    def test_cm_catalog_entry(self, tmp_path):
        rc = main(["run", "cb_complete_monotonicity", "--out-dir", str(tmp_path),
                   "--set", "sim.paths=5000", "--set", "sim.step=0.01"])
        assert rc == 0
        summary = (tmp_path / "cb_complete_monotonicity_summary.txt").read_text()
        assert "result=pass" in summary

    def test_plot(self, tmp_path):
        pytest.importorskip("matplotlib")
        p = write_cfg(tmp_path, small_duality())
        assert main(["run", str(p), "--out-dir", str(tmp_path), "--plot"]) == 0
        assert (tmp_path / "subordinator_duality_plot.png").stat().st_size > 0

    def test_module_entry_point(self, tmp_path):
        out = subprocess.run([sys.executable, "-m", "lapdual", "validate", "flow_semigroup"],
                             capture_output=True, text=True, check=False)
        assert out.returncode == 0 and "flow_semigroup" in out.stdout
