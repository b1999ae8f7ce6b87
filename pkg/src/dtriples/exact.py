"""Exact integer helpers and certified real arithmetic.

Real quantities are carried as :class:`RealApprox`, a thin wrapper around an
Arb ball (midpoint plus rigorous radius).  Every arithmetic operation is
outward rounded by Arb, so the radius is always a valid absolute error bound.
Comparisons are only answered when the balls are disjoint; otherwise
:class:`Undecidable` is raised and the caller is expected to retry at a
higher precision (see :func:`with_precision`).
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction
from typing import Callable, Iterator, TypeVar, Union

from flint import arb, ctx, fmpq, fmpz

__all__ = [
    "InsufficientPrecision",
    "Undecidable",
    "RealApprox",
    "isqrt",
    "is_square",
    "log_ra",
    "sqrt_ra",
    "exp_ra",
    "const_ra",
    "cf_convergents",
    "iter_convergents",
    "nearest_dist",
    "with_precision",
    "DEFAULT_PREC",
]

DEFAULT_PREC = 180
_GUARD_DIGITS = 10

T = TypeVar("T")


class InsufficientPrecision(ArithmeticError):
    """The working precision is too low to certify the requested result."""


class Undecidable(InsufficientPrecision):
    """A comparison could not be decided at the current precision."""


def isqrt(n: int) -> tuple[int, bool]:
    """Return ``(root, exact)`` with ``root**2 <= n < (root+1)**2``."""
    if n < 0:
        raise ValueError(f"isqrt of negative number {n}")
    root = math.isqrt(n)
    return root, root * root == n


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


@contextmanager
def _working(prec: int) -> Iterator[None]:
    old = ctx.prec
    ctx.prec = int(prec * 3.3219280948873626) + 4 * _GUARD_DIGITS
    try:
        yield
    finally:
        ctx.prec = old


def _arb_to_fraction(x: arb) -> Fraction:
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    if exp >= 0:
        return Fraction(man << exp)
    return Fraction(man, 1 << -exp)


Number = Union["RealApprox", int, Fraction]


def _to_arb(x: Number) -> arb:
    if isinstance(x, RealApprox):
        return x.ball
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return arb(fmpz(x))
    if isinstance(x, Fraction):
        return arb(fmpq(x.numerator, x.denominator))
    raise TypeError(f"cannot convert {type(x).__name__} to RealApprox")


class RealApprox:
    """A real number known to lie in ``[value - err, value + err]``.

    ``prec`` is the working precision in decimal digits used for operations
    that take this value as input.  Binary operations run at the larger of
    the two operand precisions.
    """

    __slots__ = ("ball", "prec")

    def __init__(self, ball: arb, prec: int = DEFAULT_PREC):
        if not isinstance(ball, arb):
            raise TypeError("RealApprox wraps an arb ball")
        if not ball.is_finite():
            raise InsufficientPrecision("non-finite enclosure")
        object.__setattr__(self, "ball", ball)
        object.__setattr__(self, "prec", int(prec))

    def __setattr__(self, name, value):
        raise AttributeError("RealApprox is immutable")

    @classmethod
    def exact(cls, x: int | Fraction, prec: int = DEFAULT_PREC) -> "RealApprox":
        with _working(prec):
            return cls(_to_arb(x), prec)

    @classmethod
    def from_string(cls, s: str, prec: int = DEFAULT_PREC) -> "RealApprox":
        """Parse a decimal literal (e.g. ``"1.338"``) into a tight enclosure."""
        return cls.exact(Fraction(s), prec)

    # -- views -----------------------------------------------------------
    @property
    def value(self) -> Fraction:
        """Midpoint of the enclosure, exactly."""
        return _arb_to_fraction(self.ball.mid())

    @property
    def err(self) -> Fraction:
        """Absolute error bound (radius of the enclosure), exactly."""
        return _arb_to_fraction(self.ball.rad())

    def endpoints(self) -> tuple[Fraction, Fraction]:
        mid, rad = self.value, self.err
        return mid - rad, mid + rad

    def __float__(self) -> float:
        return float(self.ball.mid())

    def __repr__(self) -> str:
        return f"RealApprox({self.ball.str(20, radius=True)}, prec={self.prec})"

    # -- arithmetic ------------------------------------------------------
    def _binop(self, other: Number, op: Callable[[arb, arb], arb]) -> "RealApprox":
        p = max(self.prec, other.prec) if isinstance(other, RealApprox) else self.prec
        with _working(p):
            return RealApprox(op(self.ball, _to_arb(other)), p)

    def _rbinop(self, other: Number, op: Callable[[arb, arb], arb]) -> "RealApprox":
        with _working(self.prec):
            return RealApprox(op(_to_arb(other), self.ball), self.prec)

    def __add__(self, o):
        return self._binop(o, lambda x, y: x + y)

    def __radd__(self, o):
        return self._rbinop(o, lambda x, y: x + y)

    def __sub__(self, o):
        return self._binop(o, lambda x, y: x - y)

    def __rsub__(self, o):
        return self._rbinop(o, lambda x, y: x - y)

    def __mul__(self, o):
        return self._binop(o, lambda x, y: x * y)

    def __rmul__(self, o):
        return self._rbinop(o, lambda x, y: x * y)

    def __truediv__(self, o):
        return self._binop(o, lambda x, y: x / y)

    def __rtruediv__(self, o):
        return self._rbinop(o, lambda x, y: x / y)

    def __pow__(self, o):
        return self._binop(o, lambda x, y: x**y)

    def __neg__(self):
        return RealApprox(-self.ball, self.prec)

    def __abs__(self):
        with _working(self.prec):
            return RealApprox(abs(self.ball), self.prec)

    # -- certified comparisons --------------------------------------------
    def cmp(self, other: Number) -> int | None:
        """Return -1, 0 or 1 when certified, ``None`` when undecidable.

        Zero is only reported when both sides are exact and equal.
        """
        diff = self.ball - _to_arb(other)
        if diff > 0:
            return 1
        if diff < 0:
            return -1
        if diff.is_exact() and diff.is_zero():
            return 0
        return None

    def _decide(self, other: Number) -> int:
        c = self.cmp(other)
        if c is None:
            raise Undecidable(f"cannot order {self!r} and {other!r} at prec {self.prec}")
        return c

    def __lt__(self, o):
        return self._decide(o) < 0

    def __le__(self, o):
        return self._decide(o) <= 0

    def __gt__(self, o):
        return self._decide(o) > 0

    def __ge__(self, o):
        return self._decide(o) >= 0

    def sign(self) -> int | None:
        return self.cmp(0)

    def floor(self) -> int:
        """Certified floor; raises if the enclosure straddles an integer."""
        lo = self.ball.lower().floor().unique_fmpz()
        hi = self.ball.upper().floor().unique_fmpz()
        if lo is None or hi is None or lo != hi:
            raise InsufficientPrecision(f"floor undecidable for {self!r}")
        return int(lo)

    def max(self, other: Number) -> "RealApprox":
        return self._binop(other, lambda x, y: x.max(y))


def const_ra(name: str, prec: int = DEFAULT_PREC) -> RealApprox:
    """Mathematical constants ``"e"``, ``"pi"``, ``"log2"``."""
    with _working(prec):
        ball = {"e": arb.const_e, "pi": arb.pi, "log2": arb.const_log2}[name]()
    return RealApprox(ball, prec)


def _lift(x: Number, prec: int) -> RealApprox:
    if isinstance(x, RealApprox):
        return x
    return RealApprox.exact(x, prec)


def log_ra(x: Number, prec: int = DEFAULT_PREC) -> RealApprox:
    """Natural logarithm with certified error."""
    xr = _lift(x, prec)
    if xr.sign() != 1:
        raise ValueError(f"log of a non-positive or sign-undecidable argument {xr!r}")
    p = max(prec, xr.prec)
    with _working(p):
        return RealApprox(xr.ball.log(), p)


def sqrt_ra(x: Number, prec: int = DEFAULT_PREC) -> RealApprox:
    xr = _lift(x, prec)
    if xr.sign() == -1:
        raise ValueError(f"sqrt of negative argument {xr!r}")
    p = max(prec, xr.prec)
    with _working(p):
        return RealApprox(xr.ball.sqrt(), p)


def exp_ra(x: Number, prec: int = DEFAULT_PREC) -> RealApprox:
    xr = _lift(x, prec)
    p = max(prec, xr.prec)
    with _working(p):
        return RealApprox(xr.ball.exp(), p)


def _enclosure(x: RealApprox | Fraction | int) -> tuple[Fraction, Fraction]:
    if isinstance(x, RealApprox):
        return x.endpoints()
    q = Fraction(x)
    return q, q


def iter_convergents(x: RealApprox | Fraction | int) -> Iterator[tuple[int, int]]:
    """Yield continued-fraction convergents ``(P, Q)`` of ``x`` one by one.

    Partial quotients are taken from a rational enclosure of ``x`` and only
    emitted when both endpoints agree on them; once they disagree
    :class:`InsufficientPrecision` is raised.  An exact rational input simply
    stops at its last convergent.
    """
    lo, hi = _enclosure(x)
    p_prev, q_prev, p, q = 0, 1, 1, 0
    n = 0
    while True:
        a = math.floor(lo)
        if math.floor(hi) != a:
            raise InsufficientPrecision(
                f"continued fraction undetermined after {n} terms (Q={q})"
            )
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        n += 1
        yield p, q
        flo, fhi = lo - a, hi - a
        if flo == fhi == 0:
            return
        if flo == 0:
            raise InsufficientPrecision("enclosure touches a convergent exactly")
        lo, hi = 1 / fhi, 1 / flo


def cf_convergents(x: RealApprox | Fraction | int, q_min: int) -> list[tuple[int, int]]:
    """Convergents of ``x`` up to the first ``Q > q_min``.

    An exact rational input stops at its last convergent even if ``q_min``
    was not reached.
    """
    out: list[tuple[int, int]] = []
    for pq in iter_convergents(x):
        out.append(pq)
        if pq[1] > q_min:
            break
    return out


def nearest_dist(x: RealApprox) -> RealApprox:
    """Distance from ``x`` to the nearest integer, with propagated error."""
    if x.err >= Fraction(1, 4):
        raise InsufficientPrecision(f"error too large to locate nearest integer: {x!r}")
    n = round(x.value)
    with _working(x.prec):
        d = abs(x.ball - fmpz(n))
        d = d.intersection(arb(fmpq(1, 4), fmpq(1, 4)))
    return RealApprox(d, x.prec)


def with_precision(
    fn: Callable[[int], T], prec: int = DEFAULT_PREC, ceiling: int | None = None
) -> T:
    """Run ``fn(prec)``, doubling the precision on :class:`InsufficientPrecision`.

    The default ceiling is four times the starting precision.
    """
    ceiling = 4 * prec if ceiling is None else ceiling
    p = prec
    while True:
        try:
            return fn(p)
        except InsufficientPrecision:
            if 2 * p > ceiling:
                raise
            p *= 2
