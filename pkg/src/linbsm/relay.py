"""Success probability of entanglement-swapping chains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

Mode = Literal["memoryless", "memory"]

# label -> BSM success probability (theory and experiment, standard and enhanced)
PRESETS: dict[str, float] = {
    "standard_theory": 0.5,
    "enhanced_theory": 0.625,
    "standard_experiment": 0.481,
    "enhanced_experiment": 0.579,
}


def _check(p_c: float, n: int) -> None:
    if n < 1:
        raise ValueError(f"a chain needs at least one segment, got n={n}")
    if not 0.0 <= p_c <= 1.0:
        raise ValueError(f"p_c must lie in [0, 1], got {p_c}")


def relay_success(p_c: float, n: int) -> float:
    """p_c^(n-1): an n-segment relay needs n-1 successful swaps."""
    _check(p_c, n)
    return p_c ** (n - 1)


def repeater_success(p_c: float, n: int) -> float:
    """p_c^log2(n), the scaling quoted for memory-assisted repeaters in favourable regimes."""
    _check(p_c, n)
    return p_c ** math.log2(n)


@dataclass(frozen=True)
class RelayCurve:
    p_c: float
    points: tuple[tuple[int, float], ...]
    label: str = ""
    mode: Mode = "memoryless"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "p_c": self.p_c,
            "mode": self.mode,
            "points": [{"n": n, "success": s} for n, s in self.points],
        }


def curve(p_c: float, n_max: int, label: str = "", mode: Mode = "memoryless") -> RelayCurve:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    fn = {"memoryless": relay_success, "memory": repeater_success}[mode]
    return RelayCurve(p_c, tuple((n, fn(p_c, n)) for n in range(1, n_max + 1)), label, mode)


def preset_curves(n_max: int, mode: Mode = "memoryless") -> list[RelayCurve]:
    return [curve(p, n_max, label, mode) for label, p in PRESETS.items()]
