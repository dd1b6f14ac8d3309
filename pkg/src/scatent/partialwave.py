"""Two spinning particles on one fixed-energy shell with truncated partial waves.

The product space is ``orbital (x) spin_A (x) spin_B`` where the orbital factor
carries ``|l l3>`` for ``l = 0 .. l_max`` (``l`` ascending, ``l3`` descending).
Continuum kinematics are factored out by working at zero total momentum and a
single total energy ``W``; ``W`` and the particle metadata only label the data.

The coupled basis used for S-matrix blocks is ``|j j3 [l s]>``: ``j``
ascending, ``j3`` descending, then the ``(l, s)`` degeneracy pairs in
ascending order. In this ordering the S-operator of a ``j`` block is
``kron(I_{2j+1}, B_j)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .angular import HalfInt, cg, couple, projections, spin_matrices, triangle_range
from .hilbert import Factor, spin_factor
from .spinmodel import ChannelPhases, reduce_phase

__all__ = [
    "UNITARY_TOL",
    "NonUnitaryBlockError",
    "ChannelSpaceSpec",
    "CentralPhases",
    "ReducedSMatrix",
    "CouplingChain",
    "build_space",
    "channel_pairs",
    "coupling_chain",
    "s_operator_general",
    "s_operator_central",
    "central_to_reduced",
    "low_energy_reduce",
    "total_j_components",
    "ls_diagnostics",
    "load_channel_config",
]

UNITARY_TOL = 1e-10


class NonUnitaryBlockError(ValueError):
    """A reduced S-matrix block fails ``|B^dag B - I| <= UNITARY_TOL``."""


@dataclass(frozen=True)
class ChannelSpaceSpec:
    l_max: int = 2
    sA: HalfInt = HalfInt(1)
    sB: HalfInt = HalfInt(1)
    W: float = 0.0
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if int(self.l_max) != self.l_max or self.l_max < 0:
            raise ValueError(f"l_max must be a non-negative integer, got {self.l_max!r}")
        object.__setattr__(self, "l_max", int(self.l_max))
        for name in ("sA", "sB"):
            s = HalfInt.of(getattr(self, name))
            if s.doubled < 0:
                raise ValueError(f"{name} must be >= 0")
            object.__setattr__(self, name, s)

    @property
    def ls(self) -> range:
        return range(self.l_max + 1)

    @property
    def total_spins(self) -> list[HalfInt]:
        return triangle_range(self.sA, self.sB)

    @property
    def dim(self) -> int:
        return (self.l_max + 1) ** 2 * (self.sA.doubled + 1) * (self.sB.doubled + 1)

    def __hash__(self):
        return hash((self.l_max, self.sA, self.sB, self.W))


def build_space(spec: ChannelSpaceSpec) -> tuple[Factor, Factor, Factor]:
    orbital = Factor(
        "orbital",
        tuple((HalfInt.of(l), l3) for l, l3 in _orbital_labels(spec)),
    )
    return orbital, spin_factor("spin_A", spec.sA), spin_factor("spin_B", spec.sB)


def channel_pairs(spec: ChannelSpaceSpec) -> dict[HalfInt, list[tuple[int, HalfInt]]]:
    """Allowed degeneracy pairs ``(l, s)`` for each total ``j`` (triangle rule)."""
    out: dict[HalfInt, list] = {}
    for l in spec.ls:
        for s in spec.total_spins:
            for j in triangle_range(l, s):
                out.setdefault(j, []).append((l, s))
    return {j: sorted(out[j]) for j in sorted(out)}


class CentralPhases(Mapping):
    """Phase shift ``delta_{ls}`` for each orbital ``l`` and total spin ``s``."""

    def __init__(self, phases: Mapping):
        self._d = {}
        for key, v in phases.items():
            if isinstance(key, str):
                key = key.split(",")
            l, s = key
            self._d[(int(l), HalfInt.of(s))] = reduce_phase(float(v))

    def __getitem__(self, key):
        l, s = key
        return self._d[(int(l), HalfInt.of(s))]

    def __iter__(self):
        return iter(sorted(self._d))

    def __len__(self):
        return len(self._d)

    def check_complete(self, spec: ChannelSpaceSpec) -> None:
        missing = [(l, s) for l in spec.ls for s in spec.total_spins if (l, s) not in self._d]
        if missing:
            raise KeyError(f"missing central phase(s) for (l, s) = {[(l, str(s)) for l, s in missing]}")

    @classmethod
    def random(cls, spec: ChannelSpaceSpec, rng: np.random.Generator) -> "CentralPhases":
        return cls({(l, s): rng.uniform(0, math.pi) for l in spec.ls for s in spec.total_spins})


@dataclass(frozen=True)
class ReducedSMatrix:
    """Unitary block per total ``j`` on the ``(l, s)`` degeneracy space, at energy ``W``."""

    blocks: Mapping
    W: float = 0.0

    def __post_init__(self):
        blocks = {}
        for j, b in self.blocks.items():
            b = np.array(b, dtype=complex)
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ValueError(f"block for j = {j} is not square")
            b.setflags(write=False)
            blocks[HalfInt.of(j)] = b
        object.__setattr__(self, "blocks", blocks)

    def check(self, spec: ChannelSpaceSpec) -> None:
        pairs = channel_pairs(spec)
        for j, ls_pairs in pairs.items():
            if j not in self.blocks:
                raise KeyError(f"missing reduced S-matrix block for j = {j}")
            b = self.blocks[j]
            if b.shape != (len(ls_pairs), len(ls_pairs)):
                raise ValueError(
                    f"block j = {j} has shape {b.shape}, expected {len(ls_pairs)} for pairs {ls_pairs}"
                )
            err = np.max(np.abs(b.conj().T @ b - np.eye(len(b))))
            if err > UNITARY_TOL:
                raise NonUnitaryBlockError(f"block j = {j} is not unitary (|B^dag B - I| = {err:.3g})")
        extra = set(self.blocks) - set(pairs)
        if extra:
            raise ValueError(f"blocks for j = {sorted(str(j) for j in extra)} are not allowed here")


@dataclass(frozen=True, eq=False)
class CouplingChain:
    """Composite orthogonal maps from the product basis.

    ``to_ls`` sends ``|l l3>|mA>|mB>`` to ``|l l3>|s s3>`` and ``to_coupled``
    sends it on to ``|j j3 [l s]>``; both act on product amplitudes.
    """

    ls_labels: tuple
    coupled_labels: tuple
    to_ls: np.ndarray
    to_coupled: np.ndarray


def _orbital_labels(spec):
    return [(l, l3) for l in spec.ls for l3 in projections(l)]


def coupling_chain(spec: ChannelSpaceSpec) -> CouplingChain:
    """Couple ``sA (x) sB -> s`` and then ``l (x) s -> j``."""
    return _coupling_chain(spec.l_max, spec.sA.doubled, spec.sB.doubled)


@lru_cache(maxsize=32)
def _coupling_chain(l_max: int, two_sa: int, two_sb: int) -> CouplingChain:
    spec = ChannelSpaceSpec(l_max, HalfInt(two_sa), HalfInt(two_sb))
    spin_map = couple(spec.sA, spec.sB)
    orb = _orbital_labels(spec)
    to_ls = np.kron(np.eye(len(orb)), spin_map.to_array())
    ls_labels = tuple((l, l3, s, s3) for l, l3 in orb for s, s3 in spin_map.rows)

    coupled_labels = tuple(
        (j, j3, l, s)
        for j, pairs in channel_pairs(spec).items()
        for j3 in projections(j)
        for l, s in pairs
    )
    ls_index = {lab: i for i, lab in enumerate(ls_labels)}
    second = np.zeros((len(coupled_labels), len(ls_labels)))
    for row, (j, j3, l, s) in enumerate(coupled_labels):
        for l3 in projections(l):
            s3 = j3 - l3
            if abs(s3.doubled) > s.doubled:
                continue
            second[row, ls_index[(l, l3, s, s3)]] = cg(l, l3, s, s3, j, j3).value
    chain = CouplingChain(ls_labels, coupled_labels, to_ls, second @ to_ls)
    for arr in (chain.to_ls, chain.to_coupled):
        arr.setflags(write=False)
    return chain


def s_operator_general(spec: ChannelSpaceSpec, red: ReducedSMatrix) -> np.ndarray:
    """S-operator on the product basis from reduced ``(l, s)``-mixing blocks.

    Raises ``KeyError`` for a missing block and :class:`NonUnitaryBlockError`
    for a block that is not unitary.
    """
    red.check(spec)
    chain = coupling_chain(spec)
    pairs = channel_pairs(spec)
    d = spec.dim
    s_coupled = np.zeros((d, d), dtype=complex)
    offset = 0
    for j, ls_pairs in pairs.items():
        size = (j.doubled + 1) * len(ls_pairs)
        s_coupled[offset:offset + size, offset:offset + size] = np.kron(
            np.eye(j.doubled + 1), red.blocks[j]
        )
        offset += size
    c = chain.to_coupled
    return c.T @ s_coupled @ c


def s_operator_central(spec: ChannelSpaceSpec, phases: CentralPhases) -> np.ndarray:
    """S-operator for a central interaction: ``exp(2i delta_{ls})`` on each ``|l l3 s s3>``."""
    if not isinstance(phases, CentralPhases):
        phases = CentralPhases(phases)
    phases.check_complete(spec)
    chain = coupling_chain(spec)
    diag = np.array([np.exp(2j * phases[(l, s)]) for l, _, s, _ in chain.ls_labels])
    c = chain.to_ls
    return c.T @ (diag[:, None] * c)


def central_to_reduced(spec: ChannelSpaceSpec, phases: CentralPhases) -> ReducedSMatrix:
    """Diagonal reduced blocks equivalent to a central interaction."""
    if not isinstance(phases, CentralPhases):
        phases = CentralPhases(phases)
    phases.check_complete(spec)
    blocks = {
        j: np.diag([np.exp(2j * phases[(l, s)]) for l, s in pairs])
        for j, pairs in channel_pairs(spec).items()
    }
    return ReducedSMatrix(blocks, W=spec.W)


def low_energy_reduce(phases: CentralPhases, l: int, spec: ChannelSpaceSpec | None = None) -> ChannelPhases:
    """Spin-model phases ``delta_s = delta_{ls}`` for a single partial wave ``l``."""
    if not isinstance(phases, CentralPhases):
        phases = CentralPhases(phases)
    if int(l) != l or l < 0:
        raise ValueError(f"invalid partial wave l = {l!r}")
    if spec is not None and l > spec.l_max:
        raise ValueError(f"l = {l} exceeds l_max = {spec.l_max}")
    out = {s: v for (ll, s), v in ((k, phases[k]) for k in phases) if ll == l}
    if not out:
        raise ValueError(f"no phase shifts for partial wave l = {l}")
    return ChannelPhases(out)


def _orbital_components(spec):
    mats = [np.zeros((0, 0), dtype=complex)] * 3
    for l in spec.ls:
        for i, m in enumerate(spin_matrices(l)):
            mats[i] = np.block([
                [mats[i], np.zeros((mats[i].shape[0], m.shape[1]))],
                [np.zeros((m.shape[0], mats[i].shape[1])), m],
            ])
    return mats


def total_j_components(spec: ChannelSpaceSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``J_i = L_i + S_i^A + S_i^B`` on the product basis."""
    lo = _orbital_components(spec)
    sa, sb = spin_matrices(spec.sA), spin_matrices(spec.sB)
    n_orb = lo[0].shape[0]
    ia, ib, io = np.eye(sa[0].shape[0]), np.eye(sb[0].shape[0]), np.eye(n_orb)
    return tuple(
        np.kron(np.kron(lo[i], ia), ib) + np.kron(np.kron(io, sa[i]), ib) + np.kron(np.kron(io, ia), sb[i])
        for i in range(3)
    )


def ls_diagnostics(spec: ChannelSpaceSpec) -> dict[str, np.ndarray]:
    """Operators conserved by a central interaction, on the product basis:
    ``L^2``, ``L3``, total spin ``S^2`` and ``S3``."""
    lo = _orbital_components(spec)
    sa, sb = spin_matrices(spec.sA), spin_matrices(spec.sB)
    ia, ib = np.eye(sa[0].shape[0]), np.eye(sb[0].shape[0])
    io = np.eye(lo[0].shape[0])
    spin_tot = [np.kron(a, ib) + np.kron(ia, b) for a, b in zip(sa, sb)]
    l2 = sum(m @ m for m in lo)
    s2 = sum(m @ m for m in spin_tot)
    ispin = np.eye(spin_tot[0].shape[0])
    return {
        "L2": np.kron(l2, ispin),
        "L3": np.kron(lo[2], ispin),
        "S2": np.kron(io, s2),
        "S3": np.kron(io, spin_tot[2]),
    }


def _parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        re, im = x
        return complex(re, im)
    return complex(x)


def load_channel_config(data: Mapping | str):
    """Parse a channel configuration.

    Schema: ``{l_max, sA, sB, W, central: {"l,s": delta}, blocks: {"j": [[...]]}}``
    with ``central`` and ``blocks`` mutually exclusive. Block entries are
    numbers or ``[re, im]`` pairs. Returns ``(spec, interaction)`` where the
    interaction is a :class:`CentralPhases` or a :class:`ReducedSMatrix`.
    """
    if isinstance(data, str):
        data = json.loads(data)
    try:
        has_central, has_blocks = "central" in data, "blocks" in data
        if has_central == has_blocks:
            raise ValueError("config needs exactly one of 'central' or 'blocks'")
        meta = {k: v for k, v in data.items() if k not in {"l_max", "sA", "sB", "W", "central", "blocks"}}
        spec = ChannelSpaceSpec(
            l_max=data["l_max"],
            sA=HalfInt.of(data["sA"]),
            sB=HalfInt.of(data["sB"]),
            W=float(data.get("W", 0.0)),
            metadata=meta,
        )
        if has_central:
            phases = CentralPhases(data["central"])
            phases.check_complete(spec)
            return spec, phases
        blocks = {
            HalfInt.of(j): [[_parse_complex(x) for x in row] for row in mat]
            for j, mat in data["blocks"].items()
        }
        return spec, ReducedSMatrix(blocks, W=spec.W)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed channel config: {exc}") from exc
