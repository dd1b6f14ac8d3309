"""Exact angular-momentum arithmetic.

Half-integer labels are stored doubled, Clebsch-Gordan coefficients are kept
as ``sign * sqrt(p/q)`` with an exact rational square, and coupling maps
between product and total-angular-momentum bases are built from them.

Basis orderings are fixed:

* product basis ``|j1 m1>|j2 m2>``: ``m1`` descending, then ``m2`` descending
  (row-major, so for two spin-1/2 this is ``|++>, |+->, |-+>, |-->``);
* coupled basis ``|J M>``: ``J`` descending, ``M`` descending within a block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering

import numpy as np

__all__ = [
    "HalfInt",
    "CGCoefficient",
    "RootSum",
    "BasisMap",
    "cg",
    "couple",
    "triangle_range",
    "projections",
    "spin_matrices",
]


@total_ordering
@dataclass(frozen=True, eq=False)
class HalfInt:
    """An integer or half-integer, stored as twice its value."""

    doubled: int

    def __post_init__(self):
        if not isinstance(self.doubled, (int, np.integer)) or isinstance(self.doubled, bool):
            raise TypeError(f"doubled must be an int, got {self.doubled!r}")
        object.__setattr__(self, "doubled", int(self.doubled))

    @classmethod
    def of(cls, value) -> "HalfInt":
        """Build from an int, a float/Fraction multiple of 1/2, another
        ``HalfInt`` or a string such as ``"3/2"`` or ``"-1"``."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            value = Fraction(value.strip())
        twice = Fraction(value) * 2
        if twice.denominator != 1:
            raise ValueError(f"{value!r} is not a multiple of 1/2")
        return cls(int(twice))

    @property
    def is_integer(self) -> bool:
        return self.doubled % 2 == 0

    def __add__(self, other):
        return HalfInt(self.doubled + HalfInt.of(other).doubled)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt(self.doubled - HalfInt.of(other).doubled)

    def __rsub__(self, other):
        return HalfInt(HalfInt.of(other).doubled - self.doubled)

    def __neg__(self):
        return HalfInt(-self.doubled)

    def __abs__(self):
        return HalfInt(abs(self.doubled))

    def __eq__(self, other):
        try:
            return self.doubled == HalfInt.of(other).doubled
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self.doubled < HalfInt.of(other).doubled

    def __hash__(self):
        return hash(("HalfInt", self.doubled))

    def __float__(self):
        return self.doubled / 2

    def __str__(self):
        if self.is_integer:
            return str(self.doubled // 2)
        return f"{self.doubled}/2"

    def __repr__(self):
        return f"HalfInt({self})"


def _as_magnitude(j) -> HalfInt:
    j = HalfInt.of(j)
    if j.doubled < 0:
        raise ValueError(f"angular momentum magnitude must be >= 0, got {j}")
    return j


def _check_projection(j: HalfInt, m: HalfInt) -> None:
    if abs(m.doubled) > j.doubled or (j.doubled - m.doubled) % 2:
        raise ValueError(f"projection {m} is not valid for j = {j}")


def projections(j) -> list[HalfInt]:
    """Projections ``j, j-1, ..., -j`` (descending)."""
    j = _as_magnitude(j)
    return [HalfInt(d) for d in range(j.doubled, -j.doubled - 1, -2)]


def triangle_range(j1, j2) -> list[HalfInt]:
    """Allowed total angular momenta ``|j1-j2|, ..., j1+j2`` (ascending)."""
    j1, j2 = _as_magnitude(j1), _as_magnitude(j2)
    lo = abs(j1.doubled - j2.doubled)
    return [HalfInt(d) for d in range(lo, j1.doubled + j2.doubled + 1, 2)]


def _squarefree(n: int) -> tuple[int, int]:
    """Split ``n > 0`` as ``outer**2 * inner`` with ``inner`` square-free."""
    outer, inner = 1, 1
    d = 2
    while d * d <= n:
        count = 0
        while n % d == 0:
            n //= d
            count += 1
        outer *= d ** (count // 2)
        if count % 2:
            inner *= d
        d += 1
    return outer, inner * n


class RootSum:
    """Exact sum ``sum_k c_k sqrt(n_k)`` with rational ``c_k`` and distinct
    square-free ``n_k``.

    Square roots of distinct square-free integers are linearly independent over
    the rationals, so equality tests here are exact.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[int, Fraction] = {}
        for radicand, coeff in (terms or {}).items():
            if coeff:
                self.terms[radicand] = Fraction(coeff)

    @classmethod
    def sqrt_of(cls, square: Fraction, sign: int = 1) -> "RootSum":
        square = Fraction(square)
        if square < 0:
            raise ValueError("negative radicand")
        if square == 0 or sign == 0:
            return cls()
        # sqrt(p/q) = sqrt(p*q)/q
        outer, inner = _squarefree(square.numerator * square.denominator)
        return cls({inner: Fraction(sign * outer, square.denominator)})

    def __add__(self, other: "RootSum") -> "RootSum":
        out = dict(self.terms)
        for radicand, coeff in other.terms.items():
            out[radicand] = out.get(radicand, 0) + coeff
        return RootSum(out)

    def __mul__(self, other: "RootSum") -> "RootSum":
        out = RootSum()
        for r1, c1 in self.terms.items():
            for r2, c2 in other.terms.items():
                g = math.gcd(r1, r2)
                # sqrt(r1 r2) = g sqrt(r1 r2 / g^2), r1 r2 / g^2 square-free
                out = out + RootSum({(r1 // g) * (r2 // g): c1 * c2 * g})
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RootSum({1: other})
        if not isinstance(other, RootSum):
            return NotImplemented
        return self.terms == other.terms

    def __float__(self):
        return float(sum(float(c) * math.sqrt(r) for r, c in self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "RootSum(0)"
        parts = [f"{c}*sqrt({r})" for r, c in sorted(self.terms.items())]
        return "RootSum(" + " + ".join(parts) + ")"


@dataclass(frozen=True)
class CGCoefficient:
    """Exact ``sign * sqrt(square)``; ``sign`` is 0 exactly when the value is 0."""

    sign: int
    square: Fraction

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        if self.square < 0 or (self.sign == 0) != (self.square == 0):
            raise ValueError("inconsistent sign/square")

    @property
    def value(self) -> float:
        return self.sign * math.sqrt(self.square)

    def __float__(self):
        return self.value

    def as_rootsum(self) -> RootSum:
        return RootSum.sqrt_of(self.square, self.sign)

    def __str__(self):
        if self.sign == 0:
            return "0"
        s = "-" if self.sign < 0 else ""
        if self.square == 1:
            return f"{s}1"
        return f"{s}sqrt({self.square})"


_ZERO = CGCoefficient(0, Fraction(0))


@lru_cache(maxsize=None)
def _cg_doubled(tj1, tm1, tj2, tm2, tJ, tM) -> CGCoefficient:
    if tm1 + tm2 != tM or not (abs(tj1 - tj2) <= tJ <= tj1 + tj2):
        return _ZERO
    if (tj1 + tj2 + tJ) % 2:
        return _ZERO
    # every combination below is an integer once the labels are valid
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tJ - tj2 + tm1) // 2
    e = (tJ - tj1 - tm2) // 2
    f = math.factorial
    pref = Fraction(
        (tJ + 1)
        * f(a)
        * f((tj1 - tj2 + tJ) // 2)
        * f((-tj1 + tj2 + tJ) // 2),
        f((tj1 + tj2 + tJ) // 2 + 1),
    )
    pref *= (
        f((tj1 + tm1) // 2) * f(b)
        * f((tj2 + tm2) // 2) * f((tj2 - tm2) // 2)
        * f((tJ + tM) // 2) * f((tJ - tM) // 2)
    )
    total = Fraction(0)
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        total += Fraction(
            (-1) ** k,
            f(k) * f(a - k) * f(b - k) * f(c - k) * f(d + k) * f(e + k),
        )
    if total == 0:
        return _ZERO
    return CGCoefficient(1 if total > 0 else -1, pref * total * total)


def cg(j1, m1, j2, m2, J, M) -> CGCoefficient:
    """Clebsch-Gordan coefficient ``<j1 m1; j2 m2 | J M>`` (Condon-Shortley).

    Computed exactly from Racah's closed-form sum. Labels may be anything
    :meth:`HalfInt.of` accepts. Returns an exact zero when a selection rule
    fails; raises ``ValueError`` if a projection is out of range for its
    magnitude.
    """
    j1, j2, J = _as_magnitude(j1), _as_magnitude(j2), _as_magnitude(J)
    m1, m2, M = HalfInt.of(m1), HalfInt.of(m2), HalfInt.of(M)
    _check_projection(j1, m1)
    _check_projection(j2, m2)
    _check_projection(J, M)
    return _cg_doubled(j1.doubled, m1.doubled, j2.doubled, m2.doubled, J.doubled, M.doubled)


@dataclass(frozen=True)
class BasisMap:
    """Real orthogonal change of basis, ``coupled = M @ product``.

    ``rows`` label the target basis, ``cols`` the source basis, ``entries`` is a
    tuple of rows of exact coefficients.
    """

    rows: tuple
    cols: tuple
    entries: tuple

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def to_array(self) -> np.ndarray:
        return np.array([[e.value for e in row] for row in self.entries], dtype=float)

    def gram_exact(self) -> list[list[RootSum]]:
        """``M^T M`` evaluated in exact root arithmetic."""
        n_rows, n_cols = self.shape
        cols = [[self.entries[r][c].as_rootsum() for r in range(n_rows)] for c in range(n_cols)]
        gram = []
        for a in range(n_cols):
            line = []
            for b in range(n_cols):
                acc = RootSum()
                for r in range(n_rows):
                    if cols[a][r].terms and cols[b][r].terms:
                        acc = acc + cols[a][r] * cols[b][r]
                line.append(acc)
            gram.append(line)
        return gram

    def is_orthogonal_exact(self) -> bool:
        if self.shape[0] != self.shape[1]:
            return False
        gram = self.gram_exact()
        n = len(gram)
        return all(gram[a][b] == (1 if a == b else 0) for a in range(n) for b in range(n))


@lru_cache(maxsize=None)
def _couple_doubled(tj1: int, tj2: int) -> BasisMap:
    j1, j2 = HalfInt(tj1), HalfInt(tj2)
    cols = tuple((m1, m2) for m1 in projections(j1) for m2 in projections(j2))
    rows = tuple((J, M) for J in reversed(triangle_range(j1, j2)) for M in projections(J))
    entries = tuple(
        tuple(
            _cg_doubled(tj1, m1.doubled, tj2, m2.doubled, J.doubled, M.doubled)
            for m1, m2 in cols
        )
        for J, M in rows
    )
    return BasisMap(rows, cols, entries)


def couple(j1, j2) -> BasisMap:
    """Coupling map from ``|j1 m1>|j2 m2>`` to ``(+)_J |J M>``.

    Rows are ``(J, M)`` with ``J`` descending and ``M`` descending; columns are
    ``(m1, m2)`` in row-major descending order.
    """
    j1, j2 = _as_magnitude(j1), _as_magnitude(j2)
    return _couple_doubled(j1.doubled, j2.doubled)


def spin_matrices(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angular-momentum components ``(Jx, Jy, Jz)`` for spin ``j`` (hbar = 1),
    in the descending-``m`` basis."""
    ms = np.array([float(m) for m in projections(j)])
    jj = float(_as_magnitude(j))
    # <m+1| J+ |m> sits just above the diagonal in descending order
    raise_ = np.diag(np.sqrt(jj * (jj + 1) - ms[1:] * (ms[1:] + 1)), k=1).astype(complex)
    lower = raise_.conj().T
    jx = (raise_ + lower) / 2
    jy = (raise_ - lower) / 2j
    jz = np.diag(ms).astype(complex)
    return jx, jy, jz
