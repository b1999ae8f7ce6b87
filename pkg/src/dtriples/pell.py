"""Pell systems attached to a D(sigma)-triple and their binary recurrences.

For a triple ``{a, b, c}`` and an extension ``d`` put ``ad+sigma = x^2``,
``bd+sigma = y^2``, ``cd+sigma = z^2``.  Eliminating ``d`` gives

    a z^2 - c x^2 = sigma (a - c)
    b z^2 - c y^2 = sigma (b - c)
    a y^2 - b x^2 = sigma (a - b)

Every solution of one equation lies on the orbit of a solution inside a
small window under the automorphism ``(z, x) -> ((s z + c x)/2, (a z + s x)/2)``
(for sigma = 4; sigma = 1 drops the halving).  Following the orbit from a
window solution produces the recurrences built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

import numpy as np

from .exact import RealApprox, isqrt
from .tuples import Triple

__all__ = [
    "PellEq",
    "PellSystem",
    "FundSol",
    "FundClass",
    "RecurrenceSeq",
    "ClassificationReport",
    "pell_system",
    "pell_window",
    "fundamental_solutions",
    "classify_fundamentals",
    "seq_generate",
    "intersect",
    "solution_to_d",
    "seq_mod_pattern",
    "seq_mod_period",
    "v_seq",
    "w_seq",
    "u_prime_seq",
    "u_dprime_seq",
    "W_seq",
    "V_seq",
    "mixed_parity_witnesses",
    "pell_extensions",
]


@dataclass(frozen=True)
class PellEq:
    """``p*u^2 - q*v^2 = rhs``; ``u`` is the "z-like" unknown."""

    p: int
    q: int
    rhs: int


@dataclass(frozen=True)
class PellSystem:
    triple: Triple

    @property
    def eq1(self) -> PellEq:
        t = self.triple
        return PellEq(t.a, t.c, t.sigma * (t.a - t.c))

    @property
    def eq2(self) -> PellEq:
        t = self.triple
        return PellEq(t.b, t.c, t.sigma * (t.b - t.c))

    @property
    def eq3(self) -> PellEq:
        t = self.triple
        return PellEq(t.a, t.b, t.sigma * (t.a - t.b))


def pell_system(tr: Triple) -> PellSystem:
    if tr.sigma not in (1, 4):
        raise ValueError(f"sigma must be 1 or 4, got {tr.sigma}")
    return PellSystem(tr)


class FundClass(str, Enum):
    """Which of the special values a window solution's ``|z0|`` takes."""

    TRIVIAL = "trivial"  # |z0| = sqrt(sigma)
    CR_ST = "cr-st"  # |z0| = (cr - st)/2, when that differs from 2
    T = "t"
    S = "s"
    SMALL = "small"  # below the 1.608 a^(-5/14) c^(9/14) threshold
    OTHER = "other"


@dataclass(frozen=True)
class FundSol:
    z0: int
    x0: int
    fundamental: bool | None
    cls: FundClass = FundClass.OTHER


@dataclass(frozen=True)
class RecurrenceSeq:
    """``u_{k+2} = coeff * u_{k+1} - u_k``."""

    init0: int
    init1: int
    coeff: int


def pell_window(p: int, q: int) -> int:
    """Largest ``z >= 0`` with ``z < p^(-1/4) q^(3/4)``, i.e. ``p z^4 < q^3``."""
    z = int(round((q**3 / p) ** 0.25)) + 2
    while p * z**4 >= q**3:
        z -= 1
    return z


def _automorphism(eq: PellEq) -> tuple[int, int] | None:
    """``(sigma, s)`` with ``s^2 = pq + sigma`` if ``rhs = sigma (p - q)``."""
    if eq.p == eq.q or eq.rhs % (eq.p - eq.q):
        return None
    sigma = eq.rhs // (eq.p - eq.q)
    if sigma not in (1, 4):
        return None
    s, exact = isqrt(eq.p * eq.q + sigma)
    return (sigma, s) if exact else None


def _step(eq: PellEq, sigma: int, s: int, z: int, x: int, sign: int) -> tuple[int, int]:
    """Apply the orbit automorphism forwards (sign=1) or backwards (sign=-1)."""
    z2 = s * z + sign * eq.q * x
    x2 = sign * eq.p * z + s * x
    if sigma == 4:
        return z2 // 2, x2 // 2
    return z2, x2


def _divisible_xs(p: int, q: int, rhs: int, x_max: int) -> Iterable[int]:
    """``x`` in ``[1, x_max]`` with ``q x^2 + rhs >= 0`` divisible by ``p``."""
    if p < 2**31:
        pu, qu, ru = np.uint64(p), np.uint64(q % p), np.uint64(rhs % p)
        hits = []
        for lo in range(1, x_max + 1, 1 << 22):
            xs = np.arange(lo, min(lo + (1 << 22), x_max + 1), dtype=np.uint64)
            sq = (xs % pu) ** 2 % pu
            hits.append(xs[(sq * qu + ru) % pu == 0])
        cand = (int(x) for h in hits for x in h)
    else:
        cand = (x for x in range(1, x_max + 1) if (q * x * x + rhs) % p == 0)
    return [x for x in cand if q * x * x + rhs >= 0]


def fundamental_solutions(p: int, q: int, rhs: int, z_bound: int) -> list[FundSol]:
    """All ``(z0, x0)`` with ``|z0| <= z_bound``, ``x0 >= 1`` and ``p z0^2 - q x0^2 = rhs``.

    A solution is flagged fundamental when one backward step of the orbit
    leaves the window or makes ``x`` non-positive.  The flag is ``None``
    when ``rhs`` is not of the form ``sigma (p - q)`` with ``pq + sigma`` a
    square, since then no automorphism is known.
    """
    if p <= 0 or q <= 0 or z_bound < 0:
        raise ValueError("need p, q > 0 and z_bound >= 0")
    eq = PellEq(p, q, rhs)
    auto = _automorphism(eq)
    out = []
    # x is about sqrt(p/q) |z|, so walking x is much shorter than walking z
    x_max = math.isqrt(max(p * z_bound * z_bound - rhs, 0) // q)
    pairs = []
    for x in _divisible_xs(p, q, rhs, x_max):
        z, exact = isqrt((q * x * x + rhs) // p)
        if exact and z <= z_bound:
            pairs += [(-z, x), (z, x)] if z else [(0, x)]
    for z, x in sorted(pairs):
        fund = None
        if auto is not None:
            sigma, s = auto
            if sigma == 4 and (s * z + q * x) % 2:
                fund = None
            else:
                zb, xb = _step(eq, sigma, s, z, x, -1)
                fund = abs(zb) > z_bound or xb < 1
        out.append(FundSol(z, x, fund))
    return out


# -- recurrences --------------------------------------------------------------


def _half(n: int, what: str) -> int:
    if n % 2:
        raise ValueError(f"{what} = {n} is odd; initial term would not be an integer")
    return n // 2


def v_seq(tr: Triple, z0: int, x0: int) -> RecurrenceSeq:
    """``z``-values on the orbit of ``(z0, x0)`` for ``a z^2 - c x^2``."""
    if tr.sigma == 4:
        return RecurrenceSeq(z0, _half(tr.s * z0 + tr.c * x0, "s*z0 + c*x0"), tr.s)
    return RecurrenceSeq(z0, tr.s * z0 + tr.c * x0, 2 * tr.s)


def w_seq(tr: Triple, z1: int, y1: int) -> RecurrenceSeq:
    """``z``-values on the orbit of ``(z1, y1)`` for ``b z^2 - c y^2``."""
    if tr.sigma == 4:
        return RecurrenceSeq(z1, _half(tr.t * z1 + tr.c * y1, "t*z1 + c*y1"), tr.t)
    return RecurrenceSeq(z1, tr.t * z1 + tr.c * y1, 2 * tr.t)


def u_prime_seq(tr: Triple, sign: int) -> RecurrenceSeq:
    """``y``-values from the ``z1 = sign*2, y1 = 2`` branch (sigma = 4)."""
    return RecurrenceSeq(2, tr.t + sign * tr.b, tr.t)


def u_dprime_seq(tr: Triple, y2: int, x2: int) -> RecurrenceSeq:
    """``y``-values on the orbit of ``(y2, x2)`` for ``a y^2 - b x^2`` (sigma = 4)."""
    return RecurrenceSeq(y2, _half(tr.r * y2 + tr.b * x2, "r*y2 + b*x2"), tr.r)


def W_seq(tr: Triple, sign: int) -> RecurrenceSeq:
    """``x``-values through ``x = 2`` (or 1) for ``a z^2 - c x^2``."""
    if tr.sigma == 4:
        return RecurrenceSeq(2, tr.s + sign * tr.a, tr.s)
    return RecurrenceSeq(1, tr.s + sign * tr.a, 2 * tr.s)


def V_seq(tr: Triple) -> RecurrenceSeq:
    """``x``-values through ``x = 2`` (or 1) for ``a y^2 - b x^2``."""
    if tr.sigma == 4:
        return RecurrenceSeq(2, tr.r + tr.a, tr.r)
    return RecurrenceSeq(1, tr.r + tr.a, 2 * tr.r)


def seq_generate(seq: RecurrenceSeq, count: int) -> list[int]:
    if count < 1:
        raise ValueError("count must be >= 1")
    out = [seq.init0, seq.init1]
    while len(out) < count:
        out.append(seq.coeff * out[-1] - out[-2])
    return out[:count]


def _terms_upto(seq: RecurrenceSeq, cap: int) -> list[int]:
    """Terms until the sequence is increasing and has passed ``cap``."""
    if seq.coeff < 3:
        raise ValueError("recurrence does not grow (coeff < 3)")
    out = [seq.init0, seq.init1]
    while not (out[-1] > cap and out[-1] > abs(out[-2])):
        out.append(seq.coeff * out[-1] - out[-2])
    return out


def intersect(vseq: RecurrenceSeq, wseq: RecurrenceSeq, z_cap: int) -> list[tuple[int, int, int]]:
    """All ``(m, n, z)`` with ``v_m = w_n = z`` and ``0 < z <= z_cap``."""
    if z_cap < 1:
        raise ValueError("z_cap must be >= 1")
    vs = sorted((z, m) for m, z in enumerate(_terms_upto(vseq, z_cap)) if 0 < z <= z_cap)
    ws = sorted((z, n) for n, z in enumerate(_terms_upto(wseq, z_cap)) if 0 < z <= z_cap)
    out = []
    i = j = 0
    while i < len(vs) and j < len(ws):
        if vs[i][0] < ws[j][0]:
            i += 1
        elif vs[i][0] > ws[j][0]:
            j += 1
        else:
            z = vs[i][0]
            i2 = i
            while i2 < len(vs) and vs[i2][0] == z:
                j2 = j
                while j2 < len(ws) and ws[j2][0] == z:
                    out.append((vs[i2][1], ws[j2][1], z))
                    j2 += 1
                i2 += 1
            i = i2
            while j < len(ws) and ws[j][0] == z:
                j += 1
    return sorted(out)


def solution_to_d(z: int, c: int, sigma: int) -> int | None:
    if z < 0:
        raise ValueError("z must be non-negative")
    num = z * z - sigma
    if num <= 0 or num % c:
        return None
    return num // c


def seq_mod_pattern(seq: RecurrenceSeq, M: int, count: int) -> list[int]:
    if M < 2:
        raise ValueError("modulus must be >= 2")
    u0, u1 = seq.init0 % M, seq.init1 % M
    out = []
    for _ in range(count):
        out.append(u0)
        u0, u1 = u1, (seq.coeff * u1 - u0) % M
    return out


def seq_mod_period(seq: RecurrenceSeq, M: int) -> tuple[int, int]:
    """``(preperiod, period)`` of the residues mod ``M``.

    The state ``(u_k, u_{k+1}) mod M`` lives in a set of size ``M^2``, so a
    repeat is found after at most ``M^2`` steps.
    """
    if M < 2:
        raise ValueError("modulus must be >= 2")
    seen: dict[tuple[int, int], int] = {}
    state = (seq.init0 % M, seq.init1 % M)
    k = 0
    while state not in seen:
        seen[state] = k
        state = (state[1], (seq.coeff * state[1] - state[0]) % M)
        k += 1
    return seen[state], k - seen[state]


# -- classification of window solutions -------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    cr_st_half: int
    threshold: float
    case_bd_excluded: bool
    case_c_excluded: bool
    small_excluded: bool
    z0_solutions: tuple[FundSol, ...]
    z1_solutions: tuple[FundSol, ...]
    possible_cases: tuple[str, ...]
    conclusion: str

    @property
    def only_trivial(self) -> bool:
        return self.conclusion == "case (a) with |z0|=2 only"

    def _allowed(self, which: str) -> set[FundClass]:
        ok = {FundClass.TRIVIAL}
        if self.cr_st_half != 2:
            ok.add(FundClass.CR_ST)
        if not self.small_excluded:
            ok.add(FundClass.SMALL)
        if which == "z0" and not self.case_bd_excluded:
            ok.add(FundClass.T)
        if which == "z1" and not self.case_c_excluded:
            ok.add(FundClass.S)
        return ok

    @property
    def admissible_z0(self) -> tuple[FundSol, ...]:
        """Window solutions of the first equation that can start an intersecting orbit."""
        ok = self._allowed("z0")
        return tuple(f for f in self.z0_solutions if f.cls in ok)

    @property
    def admissible_z1(self) -> tuple[FundSol, ...]:
        ok = self._allowed("z1")
        return tuple(f for f in self.z1_solutions if f.cls in ok)


def _small_bound_excluded(a: int, b: int, c: int) -> bool:
    """``c <= min(0.173 b^6.5 a^5.5, 0.087 b^3.5 a^2.5)``, compared via squares."""
    k1, k2 = Fraction(173, 1000), Fraction(87, 1000)
    first = c * c <= k1 * k1 * b**13 * a**11
    second = c * c <= k2 * k2 * b**7 * a**5
    return first and second


def _label(z: int, tr: Triple, half: int, thr: RealApprox) -> FundClass:
    z = abs(z)
    if z * z == tr.sigma:
        return FundClass.TRIVIAL
    if z == half:
        return FundClass.CR_ST
    if z == tr.t:
        return FundClass.T
    if z == tr.s:
        return FundClass.S
    if thr.cmp(z) == 1:
        return FundClass.SMALL
    return FundClass.OTHER


def classify_fundamentals(tr: Triple) -> ClassificationReport:
    """Decide which parity cases for ``v_m = w_n`` survive for a D(4)-triple.

    Cases (b) and (d) need ``|z0| = t`` inside the window, impossible when
    ``t^4 a >= c^3``; case (c) needs ``|z1| = s`` inside its window,
    impossible when ``s^4 b >= c^3``.  The remaining small-``|z0|`` option
    of case (a) is ruled out by the gap bound of a known quadruple result
    whenever ``c`` is below both of its thresholds.
    """
    if tr.sigma != 4:
        raise ValueError("classification applies to D(4)-triples only")
    a, b, c = tr.elems
    diff = c * tr.r - tr.s * tr.t
    if diff % 2:
        raise AssertionError("cr - st is odd for a D(4)-triple")
    half = abs(diff) // 2
    thr = RealApprox.from_string("1.608", 30) * RealApprox.exact(Fraction(c**9, a**5), 30) ** (
        RealApprox.exact(Fraction(1, 14), 30)
    )
    bd_out = tr.t**4 * a >= c**3
    c_out = tr.s**4 * b >= c**3
    small_out = _small_bound_excluded(a, b, c)
    sys = pell_system(tr)
    zs = tuple(
        FundSol(f.z0, f.x0, f.fundamental, _label(f.z0, tr, half, thr))
        for f in fundamental_solutions(a, c, sys.eq1.rhs, pell_window(a, c))
    )
    ws = tuple(
        FundSol(f.z0, f.x0, f.fundamental, _label(f.z0, tr, half, thr))
        for f in fundamental_solutions(b, c, sys.eq2.rhs, pell_window(b, c))
    )
    cases = ["a"]
    if not bd_out:
        cases += ["b", "d"]
    if not c_out:
        cases.append("c")
    cases.sort()
    if cases == ["a"] and small_out and half == 2:
        conclusion = "case (a) with |z0|=2 only"
    else:
        open_opts = [f"case ({x})" for x in cases]
        if not small_out:
            open_opts.append("small |z0|")
        if half != 2:
            open_opts.append(f"|z0|={half}")
        conclusion = "open: " + ", ".join(open_opts)
    return ClassificationReport(
        half, float(thr), bd_out, c_out, small_out, zs, ws, tuple(cases), conclusion
    )


def mixed_parity_witnesses(tr: Triple) -> list[tuple[int, int]]:
    """Window solutions ``(y2, x2)`` of ``a y^2 - b x^2 = 4(a-b)`` with ``b x2 - r|y2| = 4``.

    An empty list means an even-index ``u'`` term can never equal an
    odd-index ``u''`` term.  The window is ``a y2^4 < b^3`` and ``1 <= x2 < sqrt(b)``.
    """
    if tr.sigma != 4:
        raise ValueError("mixed-parity check is for D(4)-triples")
    a, b, r = tr.a, tr.b, tr.r
    out = []
    for x2 in range(1, math.isqrt(b - 1) + 1):
        num = 4 * (a - b) + b * x2 * x2
        if num < 0 or num % a:
            continue
        y2, exact = isqrt(num // a)
        if not exact or a * y2**4 >= b**3:
            continue
        if b * x2 - r * y2 == 4:
            out.append((y2, x2))
            if y2:
                out.append((-y2, x2))
    return out


def pell_extensions(tr: Triple, d_max: int) -> list[int]:
    """Extensions ``d <= d_max`` recovered by intersecting every pair of window orbits.

    All window solutions are used, not only fundamental ones, so nothing
    depends on the backward-step test.  Duplicated orbits only repeat work.
    """
    sys = pell_system(tr)
    z_cap = math.isqrt(tr.c * d_max + tr.sigma)
    if z_cap < 1:
        return []
    vs = [
        v_seq(tr, f.z0, f.x0)
        for f in fundamental_solutions(tr.a, tr.c, sys.eq1.rhs, pell_window(tr.a, tr.c))
        if tr.sigma == 1 or (tr.s * f.z0 + tr.c * f.x0) % 2 == 0
    ]
    ws = [
        w_seq(tr, f.z0, f.x0)
        for f in fundamental_solutions(tr.b, tr.c, sys.eq2.rhs, pell_window(tr.b, tr.c))
        if tr.sigma == 1 or (tr.t * f.z0 + tr.c * f.x0) % 2 == 0
    ]
    found = set()
    for v in vs:
        for w in ws:
            for _, _, z in intersect(v, w, z_cap):
                d = solution_to_d(z, tr.c, tr.sigma)
                if d is not None and d <= d_max and d not in tr.elems:
                    found.add(d)
    return sorted(found)


def orbit_terms(seqs: Iterable[RecurrenceSeq], index: int) -> int:
    """Largest ``|u_index|`` over the given sequences."""
    return max(abs(seq_generate(s, index + 1)[-1]) for s in seqs)
