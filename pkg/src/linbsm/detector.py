"""Pseudo-photon-number-resolving detection.

Every detection mode is split uniformly onto ``k`` binary (click/no-click)
detectors. The count for that mode is the number of detectors that fire.
Photons that share a detector are undercounted, so the shot fails
post-selection on the total photon number. A pattern with occupations n_i
survives with probability prod_i P(n_i, k), where

    P(n, k) = k! / ((k - n)! k^n).

Dividing raw counts by that product removes the bias.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .fock import Occupation

BLOCK_SIZE = 1 << 16


def p_resolve(n: int, k: int) -> float:
    """Probability that ``n`` photons spread uniformly over ``k`` detectors hit distinct detectors."""
    if n < 0 or k < 1:
        raise ValueError(f"need n >= 0 and k >= 1, got n={n}, k={k}")
    if n > k:
        return 0.0
    return math.perm(k, n) / k**n


def ppnr_factor(pattern: Sequence[int], k: int) -> float:
    return math.prod(p_resolve(int(n), k) for n in pattern)


@dataclass(frozen=True)
class PnrConfig:
    k: int = 8
    eta: float = 0.886
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")


@dataclass(frozen=True)
class CountRecord:
    raw: dict[Occupation, int]
    shots: int
    post_selected: int
    config: PnrConfig = field(default_factory=PnrConfig)
    photon_number: Optional[int] = None

    def __post_init__(self):
        if sum(self.raw.values()) != self.post_selected or self.post_selected > self.shots:
            raise ValueError("inconsistent count record")


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # counter-style stream per (seed, block): independent of how blocks are scheduled
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _observed_counts(occ: np.ndarray, eta: float, k: int, rng: np.random.Generator) -> np.ndarray:
    survivors = rng.binomial(occ, eta) if eta < 1 else occ
    nmax = int(occ.max(initial=0))
    if nmax <= 1:
        return survivors
    hits = rng.integers(0, k, size=occ.shape + (nmax,))
    hits = np.where(np.arange(nmax) < survivors[..., None], hits, -1)
    hits.sort(axis=-1)
    fresh = hits >= 0
    fresh[..., 1:] &= hits[..., 1:] != hits[..., :-1]
    return fresh.sum(axis=-1)


def _sample_block(patterns: np.ndarray, probs: np.ndarray, cfg: PnrConfig, photon_number: int, block: int, size: int):
    rng = _block_rng(cfg.seed, block)
    occ = patterns[rng.choice(len(patterns), size=size, p=probs)]
    observed = _observed_counts(occ, cfg.eta, cfg.k, rng)
    kept = observed[observed.sum(axis=1) == photon_number]
    if len(kept) == 0:
        return {}
    rows, counts = np.unique(kept, axis=0, return_counts=True)
    return {tuple(int(x) for x in r): int(c) for r, c in zip(rows, counts)}


def sample(
    ideal: Mapping[Occupation, float],
    cfg: PnrConfig,
    shots: int,
    photon_number: Optional[int] = None,
    workers: int = 1,
) -> CountRecord:
    """Monte Carlo detection of ``shots`` draws from ``ideal``.

    Each photon survives with probability ``cfg.eta`` and lands on one of
    ``cfg.k`` detectors uniformly. A shot is kept only if the observed total
    equals ``photon_number``, which defaults to the photon number of the
    ideal patterns. Shots are processed in fixed blocks with their own
    random streams, so results do not depend on ``workers``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    items = [(p, v) for p, v in ideal.items() if v > 0]
    if not items:
        raise ValueError("empty distribution")
    patterns = np.array([p for p, _ in items], dtype=np.int64)
    probs = np.array([v for _, v in items], dtype=float)
    probs /= probs.sum()
    if photon_number is None:
        totals = set(patterns.sum(axis=1).tolist())
        if len(totals) != 1:
            raise ValueError(f"ideal patterns have mixed photon numbers {sorted(totals)}; pass photon_number")
        photon_number = totals.pop()

    sizes = [min(BLOCK_SIZE, shots - start) for start in range(0, shots, BLOCK_SIZE)]

    def run(block: int):
        return _sample_block(patterns, probs, cfg, photon_number, block, sizes[block])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    raw: dict[Occupation, int] = {}
    for part in parts:
        for p, c in part.items():
            raw[p] = raw.get(p, 0) + c
    raw = dict(sorted(raw.items()))
    return CountRecord(raw, shots, sum(raw.values()), cfg, photon_number)


def correct_counts(rec: CountRecord, k: Optional[int] = None) -> dict[Occupation, float]:
    """Divide each raw count by its pseudo-PNR survival factor and renormalise."""
    k = rec.config.k if k is None else k
    weights = {}
    for pattern, count in rec.raw.items():
        factor = ppnr_factor(pattern, k)
        if factor == 0:
            if count:
                raise ValueError(f"pattern {pattern} observed {count} times but cannot be resolved with k={k}")
            continue
        weights[pattern] = count / factor
    total = sum(weights.values())
    if total == 0:
        raise ValueError("no post-selected counts to correct")
    return {p: w / total for p, w in weights.items()}


def corrected_std(freqs: Mapping[Occupation, float], k: int, n: int) -> dict[Occupation, float]:
    """Delta-method standard errors of the corrected frequencies.

    Args:
        freqs: post-selected raw pattern frequencies (multinomial cell probabilities).
        k: detectors per mode.
        n: number of post-selected shots.
    """
    keys = list(freqs)
    r = np.array([freqs[p] for p in keys])
    factors = np.array([ppnr_factor(p, k) for p in keys])
    s = np.sum(r / factors)
    g = r / factors / s
    jac = (np.eye(len(keys)) - g[:, None]) / (s * factors[None, :])
    cov = (np.diag(r) - np.outer(r, r)) / n
    var = np.einsum("ij,jk,ik->i", jac, cov, jac)
    return {p: float(math.sqrt(max(v, 0.0))) for p, v in zip(keys, var)}


def expected_raw(ideal: Mapping[Occupation, float], k: int) -> dict[Occupation, float]:
    """Post-selected raw pattern distribution for ``ideal`` under a k-way splitter.

    Loss drops out: every pattern with the full photon number survives with the
    same probability eta^N.
    """
    w = {p: v * ppnr_factor(p, k) for p, v in ideal.items() if v > 0}
    total = sum(w.values())
    return {p: v / total for p, v in w.items()}
