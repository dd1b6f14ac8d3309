"""Bipartite entanglement of pure states across arbitrary factor cuts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .hilbert import DensityMatrix, StateVector

__all__ = [
    "SCHMIDT_ZERO",
    "Bipartition",
    "EntanglementReport",
    "schmidt",
    "eoe",
    "all_cuts",
    "all_cuts_report",
    "entropy_bits",
    "von_neumann_entropy",
]

SCHMIDT_ZERO = 1e-12


@dataclass(frozen=True)
class Bipartition:
    side_a: frozenset
    side_b: frozenset

    def __post_init__(self):
        a, b = frozenset(self.side_a), frozenset(self.side_b)
        if not a or not b:
            raise ValueError("both sides of a cut must be non-empty")
        if a & b:
            raise ValueError(f"sides overlap: {sorted(a & b)}")
        object.__setattr__(self, "side_a", a)
        object.__setattr__(self, "side_b", b)

    @classmethod
    def of(cls, state: StateVector, side_a: Iterable[str]) -> "Bipartition":
        """Cut ``side_a`` against every other factor of ``state``."""
        side_a = frozenset(side_a)
        return cls(side_a, frozenset(state.names) - side_a)

    def swapped(self) -> "Bipartition":
        return Bipartition(self.side_b, self.side_a)


@dataclass(frozen=True)
class EntanglementReport:
    entropy: float
    schmidt_values: tuple
    bipartition: Bipartition

    def to_json(self, names_order: Iterable[str] | None = None) -> dict:
        side = sorted(self.bipartition.side_a)
        if names_order is not None:
            order = list(names_order)
            side = sorted(self.bipartition.side_a, key=order.index)
        return {
            "cut": side,
            "entropy_bits": self.entropy,
            "schmidt": list(self.schmidt_values),
        }


def entropy_bits(weights) -> float:
    """Shannon entropy in bits; weights under ``SCHMIDT_ZERO`` count as 0."""
    w = np.asarray(weights, dtype=float)
    w = w[w >= SCHMIDT_ZERO]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return entropy_bits(rho.eigenvalues())


def _validate_cut(state: StateVector, cut: Bipartition) -> None:
    names = set(state.names)
    if cut.side_a | cut.side_b != names:
        raise ValueError(
            f"cut {sorted(cut.side_a)}|{sorted(cut.side_b)} does not cover factors {sorted(names)}"
        )


def schmidt(state: StateVector, cut: Bipartition) -> EntanglementReport:
    """Schmidt spectrum (squared singular values, descending) and entropy."""
    _validate_cut(state, cut)
    names = state.names
    a = [i for i, n in enumerate(names) if n in cut.side_a]
    b = [i for i, n in enumerate(names) if n in cut.side_b]
    dims = state.dims
    da = int(np.prod([dims[i] for i in a]))
    mat = state.tensor().transpose(a + b).reshape(da, -1)
    sv = np.linalg.svd(mat, compute_uv=False)
    lam = sv**2
    lam = lam[lam >= SCHMIDT_ZERO]
    return EntanglementReport(entropy_bits(lam), tuple(float(x) for x in lam), cut)


def eoe(state: StateVector, cut: Bipartition | Iterable[str]) -> float:
    """Entropy of entanglement in bits. ``cut`` may also be given as the
    names on one side."""
    if not isinstance(cut, Bipartition):
        cut = Bipartition.of(state, cut)
    return schmidt(state, cut).entropy


def all_cuts(names) -> list[Bipartition]:
    """Every distinct bipartition, with complements identified. The side
    holding the first factor is reported as ``side_a``."""
    names = list(names)
    if len(names) < 2:
        raise ValueError("need at least two factors to form a bipartition")
    first, rest = names[0], names[1:]
    cuts = []
    for r in range(len(rest)):
        for combo in itertools.combinations(rest, r):
            side_a = frozenset((first, *combo))
            cuts.append(Bipartition(side_a, frozenset(names) - side_a))
    return cuts


def all_cuts_report(state: StateVector) -> list[EntanglementReport]:
    return [schmidt(state, cut) for cut in all_cuts(state.names)]
