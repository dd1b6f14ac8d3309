"""Scattering of two spins under a rotationally invariant S-operator.

Particle A starts in ``|+>`` and particle B in
``cos(theta/2)|+> + exp(i phi/2) sin(theta/2)|->``. The S-operator is diagonal
in total spin ``s`` with eigenvalue ``exp(2i delta_s)`` on every ``|s s3>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .angular import HalfInt, couple, projections, spin_matrices, triangle_range
from .hilbert import StateVector, product, spin_factor

__all__ = [
    "InStateParams",
    "ChannelPhases",
    "reduce_phase",
    "delta_delta",
    "canonical_delta_delta",
    "spin_space",
    "in_state",
    "s_operator",
    "out_state",
    "apply_s_operator",
    "x_param",
    "eoe_closed_form",
    "schmidt_weights_closed_form",
    "total_spin_components",
]

HALF = HalfInt(1)


@dataclass(frozen=True)
class InStateParams:
    """Bloch angles of particle B: ``theta`` in [0, pi], ``phi`` in [0, 4pi]."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not (0.0 <= self.phi <= 4 * math.pi):
            raise ValueError(f"phi must lie in [0, 4pi], got {self.phi!r}")


def reduce_phase(delta: float) -> float:
    """Phase shift reduced into [0, pi)."""
    r = math.fmod(delta, math.pi)
    if r < 0:
        r += math.pi
    return 0.0 if r >= math.pi else r


def delta_delta(value: float) -> float:
    """Reduce a phase-shift difference into (-pi, pi).

    Only ``exp(2i dd)`` is physical, so +-pi is the same as 0.
    """
    r = math.remainder(value, 2 * math.pi)
    return 0.0 if abs(r) >= math.pi else r


def canonical_delta_delta(value: float) -> float:
    """Representative of ``value`` modulo pi in (-pi/2, pi/2].

    Phase-shift differences that agree modulo pi give S-operators equal up to a
    global phase, so this labels physically distinct dynamics.
    """
    r = math.remainder(value, math.pi)
    return math.pi / 2 if r <= -math.pi / 2 else r + 0.0


class ChannelPhases(Mapping):
    """Phase shift per total-spin channel ``s``, reduced mod pi."""

    def __init__(self, phases: Mapping):
        self._d = {HalfInt.of(s): reduce_phase(float(v)) for s, v in phases.items()}

    @classmethod
    def spin_half(cls, delta0: float, delta1: float) -> "ChannelPhases":
        return cls({0: delta0, 1: delta1})

    def __getitem__(self, s):
        return self._d[HalfInt.of(s)]

    def __iter__(self):
        return iter(sorted(self._d))

    def __len__(self):
        return len(self._d)

    def __repr__(self):
        inner = ", ".join(f"{s}: {v!r}" for s, v in sorted(self._d.items()))
        return f"ChannelPhases({{{inner}}})"

    @property
    def delta_delta(self) -> float:
        """``delta_0 - delta_1`` for the spin-1/2 pair."""
        return delta_delta(self[0] - self[1])

    def check_complete(self, ja, jb) -> None:
        missing = [s for s in triangle_range(ja, jb) if s not in self._d]
        if missing:
            raise KeyError(f"missing phase shift for channel(s) s = {[str(s) for s in missing]}")


def spin_space(ja=HALF, jb=HALF):
    return (spin_factor("spin_A", ja), spin_factor("spin_B", jb))


def in_state(p: InStateParams) -> StateVector:
    fa, fb = spin_space()
    a = StateVector((fa,), [1.0, 0.0])
    b = StateVector(
        (fb,),
        [math.cos(p.theta / 2), np.exp(0.5j * p.phi) * math.sin(p.theta / 2)],
    )
    return product(a, b)


def s_operator(phases: ChannelPhases, ja=HALF, jb=HALF) -> np.ndarray:
    """S-operator on the product basis: ``C^T diag(exp(2i delta_s)) C``."""
    if not isinstance(phases, ChannelPhases):
        phases = ChannelPhases(phases)
    phases.check_complete(ja, jb)
    cmap = couple(ja, jb)
    c = cmap.to_array()
    diag = np.array([np.exp(2j * phases[s]) for s, _ in cmap.rows])
    return c.T @ (diag[:, None] * c)


def apply_s_operator(state: StateVector, phases: ChannelPhases) -> StateVector:
    """Scatter an arbitrary two-spin state; spins are read off the factors."""
    ja = HalfInt(state.factors[0].dim - 1)
    jb = HalfInt(state.factors[1].dim - 1)
    return StateVector(state.factors, s_operator(phases, ja, jb) @ state.amps)


def out_state(p: InStateParams, phases: ChannelPhases) -> StateVector:
    if not isinstance(phases, ChannelPhases):
        phases = ChannelPhases(phases)
    return apply_s_operator(in_state(p), phases)


def _mixing(theta: float, dd: float) -> float:
    # sin^4(theta/2) sin^2(2 dd) = 1 - x^2
    return math.sin(theta / 2) ** 4 * math.sin(2 * dd) ** 2


def x_param(theta: float, dd: float) -> float:
    """``sqrt(1 - sin^4(theta/2) sin^2(2 dd))``."""
    return math.sqrt(max(0.0, 1.0 - _mixing(theta, dd)))


def schmidt_weights_closed_form(theta: float, dd: float) -> tuple[float, float]:
    """Schmidt weights ``((1+x)/2, (1-x)/2)`` of the out-state."""
    eps = _mixing(theta, dd)
    x = math.sqrt(max(0.0, 1.0 - eps))
    # (1 - x) / 2 written to avoid cancellation when x ~ 1
    small = eps / (2.0 * (1.0 + x))
    return 1.0 - small, small


def eoe_closed_form(theta: float, dd: float) -> float:
    """Entropy of entanglement (bits) of the spin-1/2 out-state.

    Binary entropy of the weights ``(1 +- x)/2``, i.e.
    ``1 - log2[(1+x)^((1+x)/2) (1-x)^((1-x)/2)]``.
    """
    hi, lo = schmidt_weights_closed_form(theta, dd)
    total = 0.0
    for w in (hi, lo):
        if w > 0.0:
            total -= w * math.log2(w)
    return min(1.0, max(0.0, total))


def total_spin_components(ja=HALF, jb=HALF) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``S_i = S_i^A (x) I + I (x) S_i^B`` on the product basis."""
    sa, sb = spin_matrices(ja), spin_matrices(jb)
    ia = np.eye(len(projections(ja)))
    ib = np.eye(len(projections(jb)))
    return tuple(np.kron(a, ib) + np.kron(ia, b) for a, b in zip(sa, sb))
