"""Sparse Fock-space states over labelled optical modes.

A basis state is an occupation tuple aligned with a :class:`ModeRegistry`.
Amplitudes refer to normalised Fock states, i.e. a term ``(n_1, ..., n_m)``
with amplitude ``alpha`` stands for

    alpha * prod_i (a_i^dagger)^{n_i} / sqrt(n_i!) |vac>.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

PRUNE_THRESHOLD = 1e-14
NORM_TOL = 1e-10

H = "H"
V = "V"
POLARIZATIONS = (H, V)


class RegistryError(ValueError):
    """Raised for unknown, duplicate or conflicting mode labels."""


class ValidationError(ValueError):
    """Raised when a state or unitary violates its invariants."""


class Mode(NamedTuple):
    spatial: str
    pol: str

    def __str__(self) -> str:
        return f"{self.spatial}{self.pol}"


Occupation = tuple[int, ...]


class ModeRegistry:
    """Ordered, immutable collection of unique mode labels."""

    __slots__ = ("_modes", "_index")

    def __init__(self, modes: Iterable[Mode | tuple[str, str]]):
        modes = tuple(Mode(*m) for m in modes)
        for m in modes:
            if m.pol not in POLARIZATIONS:
                raise RegistryError(f"unknown polarization {m.pol!r} in {m}")
        if len(set(modes)) != len(modes):
            raise RegistryError(f"duplicate mode labels in {modes}")
        self._modes = modes
        self._index = {m: i for i, m in enumerate(modes)}

    @classmethod
    def polarized(cls, *spatials: str) -> "ModeRegistry":
        """Registry with an H and a V mode for every spatial id, in order."""
        return cls(Mode(s, p) for s in spatials for p in POLARIZATIONS)

    @property
    def modes(self) -> tuple[Mode, ...]:
        return self._modes

    @property
    def spatials(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(m.spatial for m in self._modes))

    def index(self, mode: Mode | tuple[str, str]) -> int:
        try:
            return self._index[Mode(*mode)]
        except KeyError:
            raise RegistryError(f"mode {mode} not in registry {self.labels()}") from None

    def indices(self, modes: Sequence[Mode | tuple[str, str]]) -> list[int]:
        return [self.index(m) for m in modes]

    def labels(self) -> list[str]:
        return [str(m) for m in self._modes]

    def concat(self, other: "ModeRegistry") -> "ModeRegistry":
        clash = set(self.spatials) & set(other.spatials)
        if clash:
            raise RegistryError(f"registry conflict on spatial ids {sorted(clash)}")
        return ModeRegistry(self._modes + other._modes)

    def relabel(self, mapping: Mapping[Mode, Mode]) -> "ModeRegistry":
        return ModeRegistry(mapping.get(m, m) for m in self._modes)

    def __len__(self) -> int:
        return len(self._modes)

    def __iter__(self):
        return iter(self._modes)

    def __contains__(self, mode) -> bool:
        return Mode(*mode) in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, ModeRegistry) and self._modes == other._modes

    def __hash__(self) -> int:
        return hash(self._modes)

    def __repr__(self) -> str:
        return f"ModeRegistry({self.labels()})"


def _clean(terms: Mapping[Occupation, complex]) -> dict[Occupation, complex]:
    return {k: complex(v) for k, v in sorted(terms.items()) if abs(v) >= PRUNE_THRESHOLD}


@dataclass(frozen=True)
class PureState:
    """Normalised superposition of Fock basis states.

    Args:
        registry: the modes the occupation tuples refer to.
        terms: mapping from occupation tuple to complex amplitude.
        normalize: rescale to unit norm instead of validating it.
    """

    registry: ModeRegistry
    terms: dict[Occupation, complex] = field(default_factory=dict)

    def __init__(self, registry: ModeRegistry, terms: Mapping[Sequence[int], complex], normalize: bool = False):
        size = len(registry)
        clean: dict[Occupation, complex] = {}
        for occ, amp in terms.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != size:
                raise ValidationError(f"occupation {occ} does not match registry of size {size}")
            if min(occ, default=0) < 0:
                raise ValidationError(f"negative occupation in {occ}")
            clean[occ] = clean.get(occ, 0) + amp
        clean = _clean(clean)
        norm2 = sum(abs(a) ** 2 for a in clean.values())
        if normalize:
            if norm2 == 0:
                raise ValidationError("cannot normalise the zero vector")
            scale = 1 / math.sqrt(norm2)
            clean = {k: a * scale for k, a in clean.items()}
        elif abs(norm2 - 1) > NORM_TOL:
            raise ValidationError(f"state norm^2 = {norm2!r}, expected 1")
        object.__setattr__(self, "registry", registry)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def basis(cls, registry: ModeRegistry, occupations: Mapping[Mode | tuple[str, str], int] | None = None) -> "PureState":
        occ = [0] * len(registry)
        for mode, n in (occupations or {}).items():
            occ[registry.index(mode)] += n
        return cls(registry, {tuple(occ): 1.0})

    @classmethod
    def vacuum(cls, registry: ModeRegistry | None = None) -> "PureState":
        registry = registry or ModeRegistry(())
        return cls(registry, {(0,) * len(registry): 1.0})

    @property
    def photon_numbers(self) -> set[int]:
        return {sum(k) for k in self.terms}

    def norm2(self) -> float:
        return sum(abs(a) ** 2 for a in self.terms.values())

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return self.terms.get(tuple(occupation), 0j)

    def inner(self, other: "PureState") -> complex:
        """<self|other>."""
        if self.registry != other.registry:
            raise RegistryError("inner product between states on different registries")
        return sum(a.conjugate() * other.terms.get(k, 0) for k, a in self.terms.items())

    def relabel(self, mapping: Mapping[Mode, Mode]) -> "PureState":
        return PureState(self.registry.relabel(mapping), self.terms)

    def allclose(self, other: "PureState", atol: float = NORM_TOL) -> bool:
        if self.registry != other.registry:
            return False
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= atol for k in keys)


@dataclass(frozen=True)
class MixedState:
    """Convex mixture of pure states on a shared registry."""

    components: tuple[tuple[float, PureState], ...]

    def __init__(self, components: Iterable[tuple[float, PureState]]):
        given = [(float(w), s) for w, s in components]
        if any(w < 0 for w, _ in given):
            raise ValidationError("negative mixture weight")
        comps = tuple((w, s) for w, s in given if w > 0)
        if not comps:
            raise ValidationError("mixed state needs at least one component with positive weight")
        total = sum(w for w, _ in comps)
        if abs(total - 1) > NORM_TOL:
            raise ValidationError(f"mixture weights sum to {total!r}, expected 1")
        reg = comps[0][1].registry
        if any(s.registry != reg for _, s in comps):
            raise RegistryError("mixture components live on different registries")
        object.__setattr__(self, "components", comps)

    @property
    def registry(self) -> ModeRegistry:
        return self.components[0][1].registry

    def relabel(self, mapping: Mapping[Mode, Mode]) -> "MixedState":
        return MixedState((w, s.relabel(mapping)) for w, s in self.components)


State = Union[PureState, MixedState]


@dataclass(frozen=True)
class ModeUnitary:
    """Unitary acting on an ordered subset of modes.

    ``matrix[j, i]`` is the coefficient of output mode ``targets[j]`` in the
    image of input creation operator ``targets[i]``.
    """

    matrix: np.ndarray
    targets: tuple[Mode, ...]

    def __init__(self, matrix, targets: Sequence[Mode | tuple[str, str]], atol: float = NORM_TOL):
        m = np.array(matrix, dtype=complex)
        targets = tuple(Mode(*t) for t in targets)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"unitary must be square, got shape {m.shape}")
        if m.shape[0] != len(targets):
            raise ValidationError(f"{m.shape[0]}x{m.shape[0]} matrix for {len(targets)} target modes")
        if len(set(targets)) != len(targets):
            raise RegistryError(f"duplicate target modes {targets}")
        err = np.abs(m.conj().T @ m - np.eye(len(m))).max(initial=0.0)
        if err > atol:
            raise ValidationError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "targets", targets)

    def then(self, other: "ModeUnitary") -> "ModeUnitary":
        """Unitary equal to applying ``self`` first and ``other`` second."""
        targets = list(self.targets) + [t for t in other.targets if t not in self.targets]
        return ModeUnitary(other.embed(targets) @ self.embed(targets), targets)

    def embed(self, targets: Sequence[Mode]) -> np.ndarray:
        """Matrix of this unitary extended by the identity onto ``targets``."""
        idx = {Mode(*t): i for i, t in enumerate(targets)}
        full = np.eye(len(targets), dtype=complex)
        pos = [idx[t] for t in self.targets]
        full[np.ix_(pos, pos)] = self.matrix
        return full


def _expand_monomial(photon_modes: list[int], columns: Mapping[int, list[tuple[int, complex]]]) -> dict[tuple[int, ...], complex]:
    """Multiply out prod_p (sum_j U[j, i_p] b_j^dagger) into monomials.

    Monomials are keyed by the sorted tuple of output mode indices.
    """
    poly: dict[tuple[int, ...], complex] = {(): 1.0 + 0j}
    for i in photon_modes:
        nxt: dict[tuple[int, ...], complex] = defaultdict(complex)
        for mono, c in poly.items():
            for j, u in columns[i]:
                nxt[tuple(sorted(mono + (j,)))] += c * u
        poly = nxt
    return poly


def _sqrt_fact(occ: Iterable[int]) -> float:
    return math.sqrt(math.prod(math.factorial(n) for n in occ))


def apply_unitary(state: State, u: ModeUnitary) -> State:
    """Transform ``state`` by substituting a_i^dagger -> sum_j U_ji b_j^dagger.

    Modes outside ``u.targets`` are left untouched.
    """
    if isinstance(state, MixedState):
        return MixedState((w, apply_unitary(s, u)) for w, s in state.components)
    reg = state.registry
    pos = reg.indices(u.targets)
    columns = {
        i: [(pos[j], u.matrix[j, col]) for j in range(len(pos)) if u.matrix[j, col] != 0]
        for col, i in enumerate(pos)
    }
    target_set = set(pos)
    cache: dict[tuple[int, ...], dict[tuple[int, ...], complex]] = {}
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in state.terms.items():
        photons = tuple(i for i in pos for _ in range(occ[i]))
        if photons not in cache:
            cache[photons] = _expand_monomial(list(photons), columns)
        inv_norm = 1 / _sqrt_fact(occ[i] for i in pos)
        base = [0 if i in target_set else n for i, n in enumerate(occ)]
        for mono, c in cache[photons].items():
            new = base.copy()
            for j in mono:
                new[j] += 1
            out[tuple(new)] += amp * c * inv_norm * _sqrt_fact(new[j] for j in pos)
    return PureState(reg, out)


def tensor(left: PureState, right: PureState) -> PureState:
    """Product state on the concatenated registry."""
    reg = left.registry.concat(right.registry)
    terms = {a + b: x * y for a, x in left.terms.items() for b, y in right.terms.items()}
    return PureState(reg, terms)


def tensor_mixed(left: State, right: State) -> State:
    if isinstance(left, PureState) and isinstance(right, PureState):
        return tensor(left, right)
    lc = left.components if isinstance(left, MixedState) else ((1.0, left),)
    rc = right.components if isinstance(right, MixedState) else ((1.0, right),)
    return MixedState((wl * wr, tensor(sl, sr)) for wl, sl in lc for wr, sr in rc)


def probability_distribution(state: State, subset: Sequence[Mode | tuple[str, str]] | None = None) -> dict[Occupation, float]:
    """Photon-number pattern probabilities on ``subset`` (all modes by default).

    Unlisted modes are summed over. Keys come back in sorted order.
    """
    components = state.components if isinstance(state, MixedState) else ((1.0, state),)
    reg = components[0][1].registry
    idx = list(range(len(reg))) if subset is None else reg.indices(subset)
    probs: dict[Occupation, float] = defaultdict(float)
    for w, s in components:
        for occ, amp in s.terms.items():
            probs[tuple(occ[i] for i in idx)] += w * abs(amp) ** 2
    return {k: probs[k] for k in sorted(probs)}
