"""Labeled tensor-product spaces, pure states and density matrices.

Amplitudes are flattened row-major in factor order: the last factor's index
varies fastest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .angular import BasisMap, HalfInt, projections

__all__ = [
    "NORM_TOL",
    "Factor",
    "StateVector",
    "DensityMatrix",
    "spin_factor",
    "basis_state",
    "product",
    "partial_trace",
    "apply_basis_map",
    "fidelity_up_to_phase",
    "state_to_json",
    "state_from_json",
]

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
NEGATIVE_EIG_TOL = 1e-10


@dataclass(frozen=True)
class Factor:
    """One tensor factor: a name and an ordered list of basis labels."""

    name: str
    labels: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise ValueError(f"factor {self.name!r} has no basis labels")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)


def spin_factor(name: str, j) -> Factor:
    """Spin factor with labels ``(m,)``, ``m`` descending."""
    return Factor(name, tuple((m,) for m in projections(j)))


def _check_space(factors: Sequence[Factor]) -> tuple[Factor, ...]:
    factors = tuple(factors)
    if not factors:
        raise ValueError("a space needs at least one factor")
    names = [f.name for f in factors]
    if len(set(names)) != len(names):
        raise ValueError(f"factor names must be unique, got {names}")
    return factors


def _dims(factors) -> tuple[int, ...]:
    return tuple(f.dim for f in factors)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on a labeled tensor-product space.

    Construction rejects vectors whose norm is off by more than ``NORM_TOL``;
    nothing is renormalized silently.
    """

    factors: tuple
    amps: np.ndarray

    def __post_init__(self):
        factors = _check_space(self.factors)
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != int(np.prod(_dims(factors))):
            raise ValueError(
                f"{amps.size} amplitudes do not fit factor dims {_dims(factors)}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi| = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, factors, amps) -> "StateVector":
        """Explicitly normalize ``amps`` before construction."""
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        return cls(factors, amps / np.linalg.norm(amps))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.factors)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def factor(self, name: str) -> Factor:
        for f in self.factors:
            if f.name == name:
                return f
        raise KeyError(f"no factor named {name!r}; have {list(self.names)}")

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.factors, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    factors: tuple
    mat: np.ndarray

    def __post_init__(self):
        factors = _check_space(self.factors)
        mat = np.array(self.mat, dtype=complex)
        d = int(np.prod(_dims(factors)))
        if mat.shape != (d, d):
            raise ValueError(f"density matrix shape {mat.shape} does not match dim {d}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat) - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {np.trace(mat)!r}, not 1")
        mat.setflags(write=False)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "mat", mat)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.factors)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order; values in ``[-1e-10, 0)`` are
        clipped to zero, anything more negative raises."""
        w = np.linalg.eigvalsh(self.mat)[::-1]
        if w[-1] < -NEGATIVE_EIG_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {w[-1]!r}")
        return np.clip(w, 0.0, None)


def basis_state(factors: Sequence[Factor], labels: Sequence) -> StateVector:
    """Computational basis vector picking ``labels[i]`` in factor ``i``."""
    factors = _check_space(factors)
    amps = np.zeros(_dims(factors), dtype=complex)
    amps[tuple(f.index(lab) for f, lab in zip(factors, labels, strict=True))] = 1.0
    return StateVector(factors, amps)


def product(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product ``a (x) b``; factor lists are concatenated."""
    return StateVector(a.factors + b.factors, np.kron(a.amps, b.amps))


def partial_trace(state: StateVector | DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix on the factors named in ``keep``.

    Kept factors appear in their original order. ``keep`` must be a non-empty
    proper subset of the factor names.
    """
    keep = set(keep)
    names = state.names
    unknown = keep - set(names)
    if unknown:
        raise ValueError(f"unknown factor(s) {sorted(unknown)}; have {list(names)}")
    if not keep or keep == set(names):
        raise ValueError("keep must be a non-empty proper subset of the factors")
    kept = [i for i, n in enumerate(names) if n in keep]
    traced = [i for i, n in enumerate(names) if n not in keep]
    dims = state.dims
    dk = int(np.prod([dims[i] for i in kept]))
    dt = int(np.prod([dims[i] for i in traced]))
    factors = tuple(state.factors[i] for i in kept)

    if isinstance(state, StateVector):
        psi = state.tensor().transpose(kept + traced).reshape(dk, dt)
        return DensityMatrix(factors, psi @ psi.conj().T)

    n = len(dims)
    rho = state.mat.reshape(dims + dims)
    perm = kept + traced
    rho = rho.transpose(perm + [n + i for i in perm]).reshape(dk, dt, dk, dt)
    return DensityMatrix(factors, np.einsum("ajbj->ab", rho))


def apply_basis_map(
    state: StateVector,
    transform: BasisMap | np.ndarray,
    name: str = "coupled",
) -> StateVector:
    """Apply a change of basis or unitary to the full amplitude vector.

    A :class:`BasisMap` yields a single-factor state labeled by the map's rows
    (the coupled basis is not a tensor product). A plain matrix keeps the
    original factor structure. Raises ``ValueError`` on a shape mismatch.
    """
    if isinstance(transform, BasisMap):
        mat = transform.to_array()
        factors = (Factor(name, transform.rows),)
    else:
        mat = np.asarray(transform)
        factors = state.factors
    d = state.amps.size
    if mat.shape != (d, d):
        raise ValueError(f"map of shape {mat.shape} cannot act on dimension {d}")
    return StateVector(factors, mat @ state.amps)


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|``: 1 when the states agree up to a global phase."""
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    return float(min(1.0, abs(np.vdot(a.amps, b.amps))))


def _label_to_json(label) -> list[str]:
    return [str(x) for x in label]


def state_to_json(state: StateVector) -> dict:
    return {
        "factors": [
            {"name": f.name, "dim": f.dim, "labels": [_label_to_json(lab) for lab in f.labels]}
            for f in state.factors
        ],
        "amps": [[float(z.real), float(z.imag)] for z in state.amps],
    }


def _label_from_json(label):
    out = []
    for x in label:
        try:
            out.append(HalfInt.of(x))
        except (ValueError, TypeError):
            out.append(x)
    return tuple(out)


def state_from_json(data: dict | str) -> StateVector:
    """Inverse of :func:`state_to_json`. ``labels`` may be omitted, in which
    case factor labels are the integers ``0 .. dim-1``."""
    if isinstance(data, str):
        data = json.loads(data)
    factors = []
    for entry in data["factors"]:
        if "labels" in entry:
            labels = tuple(_label_from_json(lab) for lab in entry["labels"])
            if "dim" in entry and entry["dim"] != len(labels):
                raise ValueError(f"factor {entry['name']!r}: dim disagrees with labels")
        else:
            labels = tuple((i,) for i in range(int(entry["dim"])))
        factors.append(Factor(entry["name"], labels))
    amps = [complex(re, im) for re, im in data["amps"]]
    return StateVector(tuple(factors), amps)
