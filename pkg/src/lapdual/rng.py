"""Counter-based random numbers keyed by ``(seed, path, step, slot, k)``.

Every uniform is a pure function of its coordinates, so any path can be
replayed without touching the others and both kernels draw the same values.
The mixer is the splitmix64 finalizer.

``slot`` identifies the consumer inside one step: 0 for the Gaussian pair,
1 for the killing threshold (step 0 only), ``2 + 2c`` for the Poisson count
of jump channel ``c`` and ``3 + 2c`` for its jump sizes. ``k`` indexes draws
within a slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MASK64",
    "mix64",
    "path_key",
    "path_keys",
    "uniform",
    "uniforms",
    "side_seed",
    "PathRng",
]

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_PATH_MUL = 0x632BE59BD9B4E019
_STEP_MUL = 0xD1B54A32D192ED03
_SLOT_MUL = 0xABC98388FB8FAC03
_K_MUL = 0x8CB92BA72F3D8DD7
_TO_UNIT = 2.0**-53


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def path_key(seed: int, path: int) -> int:
    """Key of the substream for one path."""
    return mix64(mix64(seed ^ _GOLDEN) ^ ((path * _PATH_MUL + _GOLDEN) & MASK64))


def uniform(key: int, step: int, slot: int, k: int) -> float:
    """One uniform in (0, 1)."""
    c = (step * _STEP_MUL + slot * _SLOT_MUL + k * _K_MUL + 1) & MASK64
    z = mix64(key ^ mix64(c))
    return ((z >> 11) + 0.5) * _TO_UNIT


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def path_keys(seed: int, paths: np.ndarray) -> np.ndarray:
    """Vector form of :func:`path_key`."""
    base = np.uint64(mix64(seed ^ _GOLDEN))
    p = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_np(base ^ (p * np.uint64(_PATH_MUL) + np.uint64(_GOLDEN)))


def uniforms(keys: np.ndarray, step, slot: int, k) -> np.ndarray:
    """Vector form of :func:`uniform`; ``step`` and ``k`` broadcast against ``keys``."""
    with np.errstate(over="ignore"):
        c = (
            np.asarray(step, dtype=np.uint64) * np.uint64(_STEP_MUL)
            + np.uint64((slot * _SLOT_MUL) & MASK64)
            + np.asarray(k, dtype=np.uint64) * np.uint64(_K_MUL)
            + np.uint64(1)
        )
        z = _mix64_np(keys ^ _mix64_np(c))
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _TO_UNIT


def side_seed(seed: int, tag: str) -> int:
    """Independent seed for a named side of an experiment (``"left"``, ``"right"``)."""
    h = 0
    for ch in tag.encode():
        h = mix64(h ^ ch)
    return mix64((seed & MASK64) ^ h)


@dataclass
class PathRng:
    """Stream position of a single path, used by the one-step API.

    Attributes
    ----------
    seed, path : int
        Substream coordinates.
    step : int
        Index of the next step; advanced by each stepper call.
    """

    seed: int
    path: int = 0
    step: int = 0

    @property
    def key(self) -> int:
        return path_key(self.seed & MASK64, self.path)

    def exp1(self) -> float:
        """The Exp(1) killing threshold of this path."""
        return -math.log(uniform(self.key, 0, 1, 0))
