"""D(n)-tuples, the two-parameter families and the quintuple candidate sieves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .exact import isqrt

__all__ = [
    "DTuple",
    "Triple",
    "FamilyTriple",
    "SieveStatus",
    "SieveVerdict",
    "verify_dtuple",
    "make_triple",
    "family_triple",
    "d_plus",
    "d_minus",
    "d_plus_closed",
    "dual_map",
    "corollary_decompose",
    "corollary_form",
    "brute_force_extensions",
    "quintuple_scan_regular",
    "quintuple_scan_b4a",
    "appfin_bound",
    "appsup_bound",
    "prop_delta_triple",
    "prop_delta_d_plus",
]

EPSILONS = (-2, -1, 1, 2)


@dataclass(frozen=True)
class DTuple:
    elems: tuple[int, ...]
    n: int
    witnesses: dict[tuple[int, int], int] = field(default_factory=dict)
    failing_pair: tuple[int, int] | None = None

    @property
    def valid(self) -> bool:
        return self.failing_pair is None


def verify_dtuple(elems: Iterable[int], n: int) -> DTuple:
    """Check that ``u*v + n`` is a square for every pair of ``elems``.

    On failure the result carries the lexicographically first failing pair
    and no witnesses.
    """
    xs = list(elems)
    if any(x <= 0 for x in xs):
        raise ValueError("D(n)-tuple entries must be positive")
    if len(set(xs)) != len(xs):
        raise ValueError("D(n)-tuple entries must be distinct")
    xs.sort()
    witnesses = {}
    for u, v in combinations(xs, 2):
        w, exact = isqrt(u * v + n) if u * v + n >= 0 else (0, False)
        if not exact:
            return DTuple(tuple(xs), n, {}, (u, v))
        witnesses[(u, v)] = w
    return DTuple(tuple(xs), n, witnesses)


@dataclass(frozen=True)
class Triple:
    """A D(sigma)-triple ``a < b < c`` with ``ab+sigma=r^2`` etc."""

    a: int
    b: int
    c: int
    sigma: int
    r: int
    s: int
    t: int

    @property
    def elems(self) -> tuple[int, int, int]:
        return self.a, self.b, self.c

    @property
    def is_regular(self) -> bool:
        return self.c == self.a + self.b + 2 * self.r


def make_triple(a: int, b: int, c: int, sigma: int) -> Triple:
    """Build a :class:`Triple`, verifying the square conditions."""
    if not 0 < a < b < c:
        raise ValueError(f"need 0 < a < b < c, got {(a, b, c)}")
    roots = []
    for u, v in ((a, b), (a, c), (b, c)):
        w, exact = isqrt(u * v + sigma)
        if not exact:
            raise ValueError(f"{u}*{v}+{sigma} is not a square")
        roots.append(w)
    return Triple(a, b, c, sigma, *roots)


@dataclass(frozen=True)
class FamilyTriple(Triple):
    A: int = 0
    K: int = 0
    eps: int = 0

    @property
    def key(self) -> tuple[int, int, int]:
        return self.A, self.K, self.eps


def family_triple(A: int, K: int, eps: int) -> FamilyTriple:
    """The triple ``{K, A^2 K + 2 eps A, (A+1)^2 K + 2 eps (A+1)}``."""
    if eps not in EPSILONS:
        raise ValueError(f"eps must be one of {EPSILONS}, got {eps}")
    if A < 1 or K < 1:
        raise ValueError("A and K must be positive")
    a = K
    b = A * A * K + 2 * eps * A
    c = (A + 1) ** 2 * K + 2 * eps * (A + 1)
    if not 0 < a < b < c:
        raise ValueError(f"degenerate parameters (A,K,eps)={(A, K, eps)}: {(a, b, c)}")
    r = A * K + eps
    s = (A + 1) * K + eps
    t = A * (A + 1) * K + (2 * A + 1) * eps
    sigma = eps * eps
    if (a * b + sigma, a * c + sigma, b * c + sigma) != (r * r, s * s, t * t):
        raise AssertionError("closed forms for r, s, t do not match")
    if c != a + b + 2 * r:
        raise AssertionError("family triple is not regular")
    return FamilyTriple(a, b, c, sigma, r, s, t, A, K, eps)


def _extension(tr: Triple, sign: int) -> int:
    if tr.sigma not in (1, 4):
        raise ValueError(f"sigma must be 1 or 4, got {tr.sigma}")
    num = 2 * (tr.a * tr.b * tr.c + sign * tr.r * tr.s * tr.t)
    q, rem = divmod(num, tr.sigma)
    if rem:
        raise ArithmeticError(f"sigma={tr.sigma} does not divide {num}")
    return tr.a + tr.b + tr.c + q


def d_plus(tr: Triple) -> int:
    """Regular extension ``a+b+c+(2/sigma)(abc+rst)``."""
    return _extension(tr, 1)


def d_minus(tr: Triple) -> int:
    """Companion ``a+b+c+(2/sigma)(abc-rst)``; zero for regular triples."""
    return _extension(tr, -1)


def d_plus_closed(A: int, K: int, eps: int) -> int:
    family_triple(A, K, eps)
    e = Fraction(eps)
    d = (
        (2 * A * A + 2 * A) ** 2 * K**3 / e**2
        + (16 * A**3 + 24 * A * A + 8 * A) * K * K / e
        + (20 * A * A + 20 * A + 4) * K
        + e * (8 * A + 4)
    )
    if d.denominator != 1:
        raise ArithmeticError(f"closed form is not integral at {(A, K, eps)}: {d}")
    return int(d)


def dual_map(A: int, K: int) -> int:
    """``B = A - 4/K`` mapping the eps=-2 family onto the eps=+2 family."""
    if K <= 0 or 4 % K:
        raise ValueError(f"K must divide 4, got {K}")
    B = A - 4 // K
    if B <= 0:
        raise ValueError(f"need A > 4/K, got A={A}, K={K}")
    return B


def corollary_decompose(a: int, b: int, c: int, eps: int) -> tuple[int, int, int] | None:
    """Family coordinates ``(A, K, eps')`` of a regular triple, if ``r = ±eps (mod a)``.

    Returns ``None`` when neither congruence holds (or the quotient is not a
    positive integer), i.e. the triple is not covered by the family result.
    """
    tr = make_triple(a, b, c, eps * eps)
    if not tr.is_regular:
        raise ValueError("triple is not regular (c != a+b+2r)")
    for e in (eps, -eps):
        k, rem = divmod(tr.r - e, a)
        if rem == 0 and k >= 1:
            ft = family_triple(k, a, e)
            if ft.elems != tr.elems:
                raise AssertionError("decomposition does not reproduce the triple")
            return k, a, e
    return None


def _prime_power_base(n: int) -> int | None:
    if n < 2:
        return None
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return p if n == 1 else None
    return n


def corollary_form(a: int, eps: int) -> bool:
    """True when ``a`` is ``4|eps|``, ``p^e`` or ``2 p^e`` with ``p`` an odd prime, ``e >= 0``."""
    if a == 4 * abs(eps):
        return True
    if a % 4 == 0:
        return False
    odd = a // 2 if a % 2 == 0 else a
    return odd == 1 or _prime_power_base(odd) is not None


def _sqrt_residues(c: int, sigma: int) -> list[int]:
    """All ``z`` in ``[0, c)`` with ``z^2 = sigma (mod c)``, for ``sigma = eps^2``."""
    eps = math.isqrt(sigma)
    n, parts = c, []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            parts.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        parts.append((n, 1))
    residues, mod = [0], 1
    for p, e in parts:
        q = p**e
        if p == 2 or eps % p == 0:
            local = [z for z in range(q) if (z * z - sigma) % q == 0]
        else:
            local = sorted({eps % q, -eps % q})
        inv = pow(mod, -1, q)
        residues = [r + mod * ((l - r) * inv % q) for r in residues for l in local]
        mod *= q
    return sorted(residues)


def brute_force_extensions(tr: Triple, d_max: int) -> list[int]:
    """All ``d <= d_max`` (not in the triple) with ``{a,b,c,d}`` a D(sigma)-quadruple.

    Exhaustive: every ``d`` with ``cd+sigma`` a square is visited, by walking
    the residue classes of ``sqrt(sigma) mod c``.
    """
    a, b, c, sg = tr.a, tr.b, tr.c, tr.sigma
    z_max = math.isqrt(c * d_max + sg)
    found = []
    for z0 in _sqrt_residues(c, sg):
        for z in range(z0, z_max + 1, c):
            d = (z * z - sg) // c
            if d < 1 or d in (a, b, c):
                continue
            if isqrt(a * d + sg)[1] and isqrt(b * d + sg)[1]:
                found.append(d)
    return sorted(set(found))


# -- quintuple sieves ---------------------------------------------------------


class SieveStatus(str, Enum):
    ELIMINATED_GCD = "eliminated-gcd"
    ELIMINATED_PARITY = "eliminated-parity"
    ELIMINATED_COROLLARY = "eliminated-corollary"
    ELIMINATED_BOUND = "eliminated-bound"
    SURVIVOR = "survivor"


@dataclass(frozen=True)
class SieveVerdict:
    a: int
    delta: int
    b: int
    c: int
    status: SieveStatus
    reason: str

    @property
    def triple(self) -> tuple[int, int, int]:
        return self.a, self.b, self.c


def _v2(n: int) -> int:
    return (n & -n).bit_length() - 1


def _divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _common_filters(a: int, b: int, c: int, d2: int, b_limit: int) -> tuple[SieveStatus, str]:
    if b >= b_limit:
        return SieveStatus.ELIMINATED_BOUND, f"b={b} >= {b_limit}"
    g = math.gcd(b, c)
    if g != 1:
        return SieveStatus.ELIMINATED_GCD, f"gcd(b,c)={g}, quintuple needs gcd(b,c)=1"
    if a % 2 == 0 and _v2(a) != _v2(d2):
        return (
            SieveStatus.ELIMINATED_PARITY,
            f"2-adic valuations differ: v2(a)={_v2(a)}, v2({d2})={_v2(d2)}",
        )
    return SieveStatus.SURVIVOR, ""


def quintuple_scan_regular(
    a_range: tuple[int, int] = (16, 10**4), Delta_max: int = 10, a_min_cutoff: int = 20
) -> list[SieveVerdict]:
    """Candidates ``(a, b, c)`` with ``r = a^2 - Delta`` for a D(1)-quintuple.

    ``a`` runs over divisors of ``Delta^2 - 1`` inside ``a_range`` (inclusive).
    Each verdict records the first failing filter only.
    """
    lo, hi = a_range
    if not (16 <= lo <= hi <= 10**4) or Delta_max > 200:
        raise ValueError("a_range must lie within [16, 10^4] and Delta_max <= 200")
    out = []
    for D in range(5, Delta_max + 1):
        d2 = D * D - 1
        for a in _divisors(d2):
            if not lo <= a <= hi:
                continue
            r = a * a - D
            b = a**3 - 2 * a * D + d2 // a
            c = a + b + 2 * r
            status, reason = _common_filters(a, b, c, d2, a**3)
            if status is SieveStatus.SURVIVOR and a < a_min_cutoff:
                status, reason = SieveStatus.ELIMINATED_BOUND, f"a={a} < {a_min_cutoff}"
            if status is SieveStatus.SURVIVOR and (corollary_form(a, 1) or (r - 1) % a == 0 or (r + 1) % a == 0):
                status, reason = SieveStatus.ELIMINATED_COROLLARY, f"a={a}: unique extension by the family theorem"
            out.append(SieveVerdict(a, D, b, c, status, reason))
    return out


def quintuple_scan_b4a(
    a_range: tuple[int, int] = (16, 10**4), delta_max: int = 50, b_min: int = 130000
) -> list[SieveVerdict]:
    """Candidates with ``b < 4a``, i.e. ``r = 2a - delta``.

    ``delta`` must be odd: if both ``a`` and ``b`` were odd one would need
    ``b > 40a/9`` (taken as an axiom from the literature), so ``a`` and ``b``
    cannot both be odd, which forces ``delta`` odd.
    """
    lo, hi = a_range
    if not (1 <= lo <= hi <= 10**4) or delta_max > 200:
        raise ValueError("a_range must lie within [1, 10^4] and delta_max <= 200")
    out = []
    for dl in range(1, delta_max + 1):
        d2 = dl * dl - 1
        cands = range(lo, hi + 1) if d2 == 0 else [a for a in _divisors(d2) if lo <= a <= hi]
        for a in cands:
            r = 2 * a - dl
            b = 4 * a - 4 * dl + d2 // a
            if r <= 0 or b <= a:
                continue
            c = a + b + 2 * r
            if dl == 1:
                status, reason = SieveStatus.ELIMINATED_COROLLARY, "delta=1 is the family case (unique extension)"
            elif dl % 2 == 0:
                status, reason = SieveStatus.ELIMINATED_PARITY, "delta must be odd (axiom: a, b odd implies b > 40a/9)"
            elif a == d2:
                status, reason = SieveStatus.ELIMINATED_COROLLARY, "a = delta^2-1 triple does not extend to a quintuple"
            else:
                status, reason = _common_filters(a, b, c, d2, 4 * a)
                if status is SieveStatus.SURVIVOR and b <= b_min:
                    status, reason = SieveStatus.ELIMINATED_BOUND, f"b={b} <= {b_min}"
                if status is SieveStatus.SURVIVOR and corollary_form(a, 1):
                    status, reason = SieveStatus.ELIMINATED_COROLLARY, f"a={a}: unique extension by the family theorem"
            out.append(SieveVerdict(a, dl, b, c, status, reason))
    return out


def _ceil_sqrt(n: int) -> int:
    r, exact = isqrt(n)
    return r if exact else r + 1


def appfin_bound(a: int) -> int:
    if a < 1:
        raise ValueError("a must be positive")
    return a**3 - 2 * a * _ceil_sqrt(3 * a + 1) + 3


def appsup_bound(a: int) -> int:
    if a < 1:
        raise ValueError("a must be positive")
    return 4 * a - 4 * _ceil_sqrt(3 * a + 1) + 3


def prop_delta_d_plus(D: int) -> int:
    coeffs = {14: 4, 12: -20, 11: -16, 10: 40, 9: 56, 8: -16, 7: -72, 6: -32, 5: 24, 4: 32, 3: 8, 2: -4, 1: -4}
    return sum(k * D**e for e, k in coeffs.items())


def prop_delta_triple(D: int) -> tuple[int, int, int, int, int, int, int]:
    """The D(1)-triple with ``a = Delta^2 - 1`` and its regular extension.

    Returns ``(a, b, c, r, s, t, d_plus)``.
    """
    if D < 6:
        raise ValueError(f"Delta must be >= 6, got {D}")
    a = D * D - 1
    b = D**6 - 3 * D**4 - 2 * D**3 + 3 * D * D + 2 * D
    c = D**6 - D**4 - 2 * D**3 + 1
    r = D**4 - 2 * D * D - D + 1
    s = D**4 - D * D - D
    t = D**6 - 2 * D**4 - 2 * D**3 + D * D + D + 1
    tr = make_triple(a, b, c, 1)
    if (tr.r, tr.s, tr.t) != (r, s, t):
        raise AssertionError("closed forms for r, s, t do not match")
    dp = prop_delta_d_plus(D)
    if dp != d_plus(tr):
        raise AssertionError("closed form of d_plus does not match")
    return a, b, c, r, s, t, dp
