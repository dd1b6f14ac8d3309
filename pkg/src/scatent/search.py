"""Entanglement landscape of the spin model: grid scans, perfect-entangler
detection, maximally-entangleable in-states and 1-D maximization."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .entanglement import eoe
from .spinmodel import (
    ChannelPhases,
    InStateParams,
    canonical_delta_delta,
    delta_delta,
    eoe_closed_form,
    out_state,
)

__all__ = [
    "DEFAULT_TOL",
    "ScanGrid",
    "ScanRecord",
    "EntanglerVerdict",
    "distinct_perfect",
    "dd_grid",
    "theta_grid",
    "phi_grid",
    "scan",
    "records_to_csv",
    "records_to_json",
    "scan_summary",
    "find_perfect_entanglers",
    "entangleable_interval",
    "max_entangleable_instates",
    "maximize_eoe",
    "golden_section_max",
]

DEFAULT_TOL = 1e-6
_INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ScanGrid:
    """Uniform lattice over (theta, phi, delta_delta).

    theta spans [0, pi] and delta_delta spans [-pi, pi] with both endpoints;
    phi spans [0, 4pi) without the right endpoint. An axis with a single step
    is pinned to its ``*_value`` instead.
    """

    theta_steps: int = 181
    phi_steps: int = 1
    dd_steps: int = 361
    theta_value: float = 0.0
    phi_value: float = 0.0
    dd_value: float = 0.0

    def __post_init__(self):
        for name in ("theta_steps", "phi_steps", "dd_steps"):
            n = getattr(self, name)
            if int(n) != n or n < 1:
                raise ValueError(f"{name} must be a positive integer, got {n!r}")
        InStateParams(self.theta_value, self.phi_value)

    @property
    def size(self) -> int:
        return self.theta_steps * self.phi_steps * self.dd_steps

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            theta_grid(self.theta_steps, self.theta_value),
            phi_grid(self.phi_steps, self.phi_value),
            dd_grid(self.dd_steps, self.dd_value),
        )


def theta_grid(steps: int, value: float = 0.0) -> np.ndarray:
    if steps == 1:
        return np.array([value])
    g = np.linspace(0.0, math.pi, steps)
    g[-1] = math.pi
    return g


def phi_grid(steps: int, value: float = 0.0) -> np.ndarray:
    if steps == 1:
        return np.array([value])
    return 4 * math.pi * np.arange(steps) / steps


def dd_grid(steps: int, value: float = 0.0) -> np.ndarray:
    """Symmetric grid over [-pi, pi]; exactly antisymmetric so that +-pi/4
    land on mirrored points when ``steps - 1`` is a multiple of 8."""
    if steps == 1:
        return np.array([value])
    k = np.arange(steps) - (steps - 1) / 2
    return k * (2 * math.pi / (steps - 1))


@dataclass(frozen=True)
class ScanRecord:
    theta: float
    phi: float
    delta_delta: float
    eoe: float


@dataclass(frozen=True)
class EntanglerVerdict:
    """Verdict at one grid value of delta_delta.

    ``canonical`` is the representative modulo pi; grid points sharing it
    describe the same S-operator up to a global phase.
    """

    delta_delta: float
    max_eoe_over_instates: float
    is_perfect: bool
    argmax_theta: float = math.pi
    canonical: float = 0.0


def distinct_perfect(verdicts) -> list[float]:
    """Sorted canonical delta_delta values of the perfect verdicts."""
    return sorted({v.canonical for v in verdicts if v.is_perfect})


def _eoe_rows(thetas, phis, dds) -> list[ScanRecord]:
    out = []
    for t in thetas:
        for p in phis:
            for d in dds:
                out.append(ScanRecord(float(t), float(p), float(d), eoe_closed_form(t, delta_delta(d))))
    return out


def scan(grid: ScanGrid, workers: int = 1) -> list[ScanRecord]:
    """EoE on every grid point, ordered lexicographically by (theta, phi, dd).

    Work is split by theta rows; the merge is in row order, so the output does
    not depend on ``workers``.
    """
    thetas, phis, dds = grid.axes()
    if workers <= 1 or len(thetas) == 1:
        return _eoe_rows(thetas, phis, dds)
    chunks = np.array_split(thetas, min(workers, len(thetas)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda ch: _eoe_rows(ch, phis, dds), chunks))
    return [rec for part in parts for rec in part]


CSV_COLUMNS = ("theta_rad", "phi_rad", "delta_delta_rad", "eoe_bits")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([f"{v:.6g}" for v in (r.theta, r.phi, r.delta_delta, r.eoe)])
    return buf.getvalue()


def records_to_json(records) -> str:
    rows = [dict(zip(CSV_COLUMNS, (r.theta, r.phi, r.delta_delta, r.eoe))) for r in records]
    return json.dumps(rows) + "\n"


def scan_summary(records, tol: float = 1e-9) -> dict:
    """Maximum EoE, every record within ``tol`` of it, and the distinct
    (theta, delta_delta mod pi) locations among those records."""
    best = max(r.eoe for r in records)
    argmax = [r for r in records if r.eoe >= best - tol]
    distinct = sorted({(r.theta, round(canonical_delta_delta(r.delta_delta), 12)) for r in argmax})
    return {"max_eoe": best, "argmax": [asdict(r) for r in argmax], "argmax_distinct": distinct}


def golden_section_max(f, lo: float, hi: float, xtol: float = 1e-10) -> tuple[float, float]:
    """Maximize ``f`` on [lo, hi] by golden-section search.

    The bracket endpoints are compared with the interior optimum at the end,
    so monotone functions return the better endpoint exactly. Ties go to the
    right endpoint.
    """
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
    candidates = [(f(hi), hi), (f(lo), lo), (fc, c), (fd, d)]
    best = max(v for v, _ in candidates)
    for v, x in candidates:
        if v == best:
            return x, v
    raise AssertionError("unreachable")


def maximize_eoe(phases: ChannelPhases) -> tuple[InStateParams, float]:
    """Best in-state for given phases. phi never matters, so only theta is
    searched; the result has ``phi = 0``."""
    if not isinstance(phases, ChannelPhases):
        phases = ChannelPhases(phases)
    dd = phases.delta_delta
    theta, value = golden_section_max(lambda t: eoe_closed_form(t, dd), 0.0, math.pi)
    return InStateParams(theta, 0.0), value


def _verify_perfect(dd: float, theta: float, tol: float) -> bool:
    phases = ChannelPhases.spin_half(max(dd, 0.0), max(-dd, 0.0))
    state = out_state(InStateParams(theta, 0.0), phases)
    return eoe(state, {"spin_A"}) >= 1.0 - tol


def find_perfect_entanglers(dd_resolution: int = 361, tol: float = DEFAULT_TOL) -> list[EntanglerVerdict]:
    """Verdict for every delta_delta on a ``dd_resolution``-point grid over [-pi, pi].

    Perfect verdicts from the closed form are re-checked by building the
    out-state and taking its Schmidt entropy.
    """
    if not (0.0 < tol <= 0.1):
        raise ValueError(f"tol must lie in (0, 0.1], got {tol!r}")
    verdicts = []
    for dd in dd_grid(dd_resolution):
        dd = float(dd)
        reduced = delta_delta(dd)
        theta, best = golden_section_max(lambda t: eoe_closed_form(t, reduced), 0.0, math.pi)
        perfect = best >= 1.0 - tol and _verify_perfect(reduced, theta, tol)
        verdicts.append(EntanglerVerdict(dd, best, perfect, theta, canonical_delta_delta(dd)))
    return verdicts


def entangleable_interval(phases: ChannelPhases, tol: float = DEFAULT_TOL) -> tuple[float, float] | None:
    """Closed theta-interval on which the out-state EoE is at least ``1 - tol``.

    EoE is non-decreasing in theta on [0, pi], so the set is ``[theta_low, pi]``
    (or empty); ``theta_low`` is found by bisection.
    """
    if not isinstance(phases, ChannelPhases):
        phases = ChannelPhases(phases)
    dd = phases.delta_delta
    target = 1.0 - tol
    if eoe_closed_form(math.pi, dd) < target:
        return None
    lo, hi = 0.0, math.pi
    if eoe_closed_form(lo, dd) >= target:
        return 0.0, math.pi
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if eoe_closed_form(mid, dd) >= target:
            hi = mid
        else:
            lo = mid
    return hi, math.pi


def max_entangleable_instates(
    phases: ChannelPhases,
    tol: float = DEFAULT_TOL,
    theta_steps: int = 1801,
) -> list[InStateParams]:
    """Grid in-states whose out-state reaches EoE ``>= 1 - tol``.

    phi is unconstrained; every returned entry has ``phi = 0``.
    """
    if not isinstance(phases, ChannelPhases):
        phases = ChannelPhases(phases)
    dd = phases.delta_delta
    return [
        InStateParams(float(t), 0.0)
        for t in theta_grid(theta_steps)
        if eoe_closed_form(float(t), dd) >= 1.0 - tol
    ]
