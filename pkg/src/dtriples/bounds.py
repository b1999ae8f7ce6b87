"""Certified evaluation of the approximation bounds used to exclude extensions.

Everything here works on :class:`~dtriples.exact.RealApprox` values.  An
inequality counts as established only when the enclosures separate; an
undecided comparison raises :class:`~dtriples.exact.Undecidable`, which
:func:`~dtriples.exact.with_precision` turns into a retry at higher precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exact import (
    DEFAULT_PREC,
    RealApprox,
    Undecidable,
    const_ra,
    exp_ra,
    log_ra,
    sqrt_ra,
    with_precision,
)
from .tuples import FamilyTriple, Triple, family_triple

__all__ = [
    "HypergeometricInapplicable",
    "AlgCtx",
    "RickertResult",
    "LaurentBlock",
    "InequalityCheck",
    "precision_for",
    "alg_ctx",
    "rickert_applicable",
    "rickert",
    "rickert_refined",
    "hg_K_check",
    "heights",
    "laurent_A_bound",
    "laurent_block",
    "laurent_rhs",
    "laurent_exclusion_ratio",
    "matveev_C1",
    "matveev_m_bound",
    "nu_test",
    "nu_floor",
    "aux_lemma_suite",
    "approximation_gap",
    "STAGED_NU_FLOORS",
]

# (A0, nu0): for A <= A0 every index gap below nu0 is excluded.
STAGED_NU_FLOORS = ((900, 12), (360, 14), (40, 25))


class HypergeometricInapplicable(ValueError):
    pass


def _d(s: str, prec: int) -> RealApprox:
    return RealApprox.from_string(s, prec)


def _q(x: int | Fraction, prec: int) -> RealApprox:
    return RealApprox.exact(x, prec)


def precision_for(A: int) -> int:
    """Working precision in digits for a family with parameter ``A``."""
    return max(DEFAULT_PREC, 10 * -(-A // 100))


# -- algebraic context ------------------------------------------------------


@dataclass(frozen=True)
class AlgCtx:
    """Units attached to a triple.

    For sigma = 4, ``alpha = (s + sqrt(ac))/2`` and similarly ``beta``
    (from ``r, ab``) and ``gamma`` (from ``t, bc``); for sigma = 1 the
    halving is dropped.  ``chi`` and ``mu`` come in two sign branches.
    """

    triple: Triple
    prec: int
    sqrt_ab: RealApprox
    sqrt_ac: RealApprox
    sqrt_bc: RealApprox
    sqrt_a: RealApprox
    sqrt_b: RealApprox
    sqrt_c: RealApprox
    alpha: RealApprox
    beta: RealApprox
    gamma: RealApprox

    @property
    def N(self) -> int | None:
        tr = self.triple
        if not isinstance(tr, FamilyTriple):
            return None
        return (tr.A * tr.A + tr.A) * tr.K // 2 + tr.eps * tr.A

    def chi(self, sign: int) -> RealApprox:
        return (self.sqrt_bc + self.sqrt_ac) / (self.sqrt_bc + sign * self.sqrt_ab)

    def mu(self, sign: int) -> RealApprox:
        num = self.sqrt_b * (self.sqrt_c + sign * self.sqrt_a)
        return num / (self.sqrt_a * (self.sqrt_c + sign * self.sqrt_b))

    def chi_conjugate_product(self) -> Fraction:
        """``chi * chi'''`` (the same for both branches)."""
        a, b, c = self.triple.elems
        return Fraction(b * c - a * c, b * c - a * b)

    @property
    def log_alpha(self) -> RealApprox:
        return log_ra(self.alpha)

    @property
    def log_beta(self) -> RealApprox:
        return log_ra(self.beta)


def alg_ctx(tr: Triple, prec: int | None = None) -> AlgCtx:
    if prec is None:
        prec = precision_for(tr.A) if isinstance(tr, FamilyTriple) else DEFAULT_PREC
    a, b, c = tr.elems
    sq = lambda n: sqrt_ra(n, prec)  # noqa: E731
    sab, sac, sbc = sq(a * b), sq(a * c), sq(b * c)
    half = Fraction(1, 2) if tr.sigma == 4 else Fraction(1)
    if tr.sigma not in (1, 4):
        raise ValueError("sigma must be 1 or 4")
    return AlgCtx(
        tr,
        prec,
        sab,
        sac,
        sbc,
        sq(a),
        sq(b),
        sq(c),
        (sac + tr.s) * half,
        (sab + tr.r) * half,
        (sbc + tr.t) * half,
    )


# -- hypergeometric method ------------------------------------------------------


@dataclass(frozen=True)
class RickertResult:
    N: int
    lam: RealApprox
    C_inv: RealApprox
    refined: bool = False


def _N(A: int, K: int, eps: int) -> int:
    return (A * A + A) * K // 2 + eps * A


def rickert_applicable(A: int, K: int, eps: int) -> bool:
    e = abs(eps)
    return 100 * K >= 3003 * e**3 * (A + 1) and (A >= 3 or A == e == 2)


def rickert(A: int, K: int, eps: int, prec: int = DEFAULT_PREC) -> RickertResult:
    """Exponent and constant of the simultaneous approximation measure.

    Valid for ``K >= 30.03 |eps|^3 (A+1)`` with ``A >= 3`` or ``A = |eps| = 2``.
    """
    if eps not in (-2, -1, 1, 2):
        raise ValueError(f"eps must be in (-2,-1,1,2), got {eps}")
    if not rickert_applicable(A, K, eps):
        raise HypergeometricInapplicable(
            f"hypergeometric method inapplicable at (A,K,eps)={(A, K, eps)}"
        )
    e3 = abs(eps) ** 3
    N = _N(A, K, eps)
    lam = 1 + log_ra(20 * (A + 1) * N, prec) / log_ra(
        _d("1.338", prec) * Fraction(N * N, e3 * A * (A + 1)), prec
    )
    C_inv = _d("2.838e28", prec) * ((A + 1) * N)
    if not lam < 2:
        raise AssertionError(f"lambda >= 2 at {(A, K, eps)}")
    return RickertResult(N, lam, C_inv)


def rickert_refined(A: int, K: int, eps: int, prec: int = DEFAULT_PREC) -> RickertResult:
    """Same measure from the unrounded constants ``p, P, l, L``.

    Sharper than :func:`rickert` and used below its ``K`` threshold.  ``P``
    carries the factor ``1 + 3|eps|/(2N)`` of the coefficient bound.
    """
    e = abs(eps)
    N = _N(A, K, eps)
    if A < 1 or N <= A:
        raise HypergeometricInapplicable(f"N={N} too small at {(A, K, eps)}")
    c13 = _d("2.045e13", prec)
    p = c13 * sqrt_ra(1 + Fraction(e, 2 * (N + e)), prec)
    P = _q(Fraction(40 * A * (A + 1) * N, 2 * A + 1) * (1 + Fraction(3 * e, 2 * N)), prec)
    l_ = c13 * Fraction(27, 64) / (1 - Fraction(A, N))
    L = _d("1.35", prec) * (Fraction(1, e**3 * A * (A + 1)) * (1 - Fraction(A, N)) ** 2 * N * N)
    if not L > 1:
        raise HypergeometricInapplicable(f"L <= 1 at {(A, K, eps)}")
    lam = 1 + log_ra(P) / log_ra(L)
    if not lam < 2:
        raise HypergeometricInapplicable(f"lambda >= 2 at {(A, K, eps)}")
    two_l = 2 * l_
    base = two_l if two_l > 1 else _q(1, prec)
    C_inv = 4 * p * P * exp_ra(log_ra(base) * (lam - 1))
    return RickertResult(N, lam, C_inv, refined=True)


def hg_K_check(
    A: int, K: int, eps: int, nu: int, constants: str = "auto", prec: int = DEFAULT_PREC
) -> bool:
    """True when a non-regular extension with index gap ``nu`` is still possible.

    Compares the lower bound ``m > (A-1) nu log beta`` (``A nu log beta`` for
    eps = 2) with the upper bound on ``m`` from the approximation measure.
    ``constants`` is ``"theorem"``, ``"refined"`` or ``"auto"`` (theorem when
    its hypotheses hold, refined otherwise).
    """
    if eps not in (-2, 2):
        raise ValueError("the K-bound is stated for eps = -2 or 2")
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if constants == "auto":
        constants = "theorem" if rickert_applicable(A, K, eps) else "refined"
    res = rickert(A, K, eps, prec) if constants == "theorem" else rickert_refined(A, K, eps, prec)
    tr = family_triple(A, K, eps)
    beta = alg_ctx(tr, prec).beta
    lhs = ((A - 1) if eps == -2 else A) * nu * log_ra(beta)
    arg = 2 * res.C_inv * (A * A * (A + 1)) * (A + 1 + Fraction(2, K))
    rhs = log_ra(arg) / (2 * (2 - res.lam) * log_ra((A + 1) * K + eps - 2, prec))
    return lhs < rhs


# -- heights and the two-logarithm bound -----------------------------------------


def heights(ctx: AlgCtx) -> tuple[RealApprox, RealApprox]:
    """Upper bound for the height of ``chi`` and the exact height of ``alpha/beta``."""
    a, b, c = ctx.triple.elems
    return log_ra(b * c * c * (c - a), ctx.prec) / 4, log_ra(ctx.alpha) / 2


_E_4_24675 = "4.24675"


def laurent_A_bound(eps: int, nu: int) -> int:
    """Largest ``A`` compatible with both branches of the two-logarithm argument."""
    if eps not in (-2, 2):
        raise ValueError("eps must be -2 or 2")
    if nu < 1:
        raise ValueError("nu must be >= 1")
    prec = 50
    growth = exp_ra(_d(_E_4_24675, prec))
    if eps == -2:
        k = 40 + Fraction(58, 1000 * nu)
        small_h = growth * k + 1
        large_h = _d("69.799", prec) * k + 1
    else:
        k = 40 + Fraction(80225, 10000 * nu)
        small_h = growth * k
        large_h = _d("70.073", prec) * k
    bound = small_h.max(large_h)
    # A < bound, so the answer is ceil(bound) - 1
    lo, hi = bound.endpoints()
    if math.ceil(lo) != math.ceil(hi):
        raise Undecidable("A-bound straddles an integer")
    return math.ceil(hi) - 1


@dataclass(frozen=True)
class LaurentBlock:
    rho: Fraction
    mu_par: Fraction
    a1: RealApprox
    a2: RealApprox
    h: RealApprox
    sigma_L: RealApprox
    lambda_L: RealApprox
    H: RealApprox
    omega: RealApprox
    theta: RealApprox
    C: RealApprox
    C_prime: RealApprox


def laurent_block(
    rho: Fraction | int, mu_par: Fraction | int, a1: RealApprox, a2: RealApprox, h: RealApprox
) -> LaurentBlock:
    prec = max(a1.prec, a2.prec, h.prec)
    rho, mu = Fraction(rho), Fraction(mu_par)
    sig = _q((1 + 2 * mu - mu * mu) / 2, prec)
    lam = sig * log_ra(rho, prec)
    H = h / lam + 1 / sig
    root = sqrt_ra(1 + 1 / (4 * H * H))
    omega = 2 * (1 + root)
    theta = root + 1 / (2 * H)
    quarter = _q(Fraction(1, 4), prec)
    inner = (
        omega * omega / 9
        + 8 * lam * omega ** _q(Fraction(5, 4), prec) * theta**quarter
        / (3 * sqrt_ra(a1 * a2) * sqrt_ra(H))
        + Fraction(4, 3) * (1 / a1 + 1 / a2) * lam * omega / H
    )
    outer = omega / 6 + sqrt_ra(inner) / 2
    C = mu / (lam**3 * sig) * outer * outer
    C_prime = sqrt_ra(C * sig * omega * theta / (lam**3 * mu))
    return LaurentBlock(rho, mu, a1, a2, h, sig, lam, H, omega, theta, C, C_prime)


def laurent_rhs(block: LaurentBlock, m: int, alpha: RealApprox) -> RealApprox:
    """Upper bound for ``(4m-1) log alpha`` implied by the two-logarithm estimate.

    The height parameter must dominate ``4(log(b1/a2 + b2/a1) + log lambda
    + 1.75) + 0.06``, ``lambda`` and ``2 log 2`` with ``b1 = 2m``, ``b2 = 1``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    prec = block.h.prec
    lam = block.lambda_L
    need = 4 * (log_ra(2 * m / block.a2 + 1 / block.a1) + log_ra(lam) + Fraction(7, 4)) + Fraction(
        6, 100
    )
    for floor in (need, lam, 2 * const_ra("log2", prec)):
        if block.h.cmp(floor) != 1:
            raise ValueError("height parameter h below the required minimum")
    g = block.h + lam / block.sigma_L
    prod = block.a1 * block.a2
    return (
        block.C * g * g * prod
        + sqrt_ra(block.omega * block.theta) * g
        + log_ra(block.C_prime * g * g * prod)
    )


_Q2_PRIME = {-2: Fraction(116, 1000), 2: Fraction(16045, 1000)}


def _illustration_block(log_alpha: RealApprox, log_beta: RealApprox, eps: int, nu: int, m: int):
    prec = log_alpha.prec
    q = _Q2_PRIME[eps]
    a1 = _d("4.0017", prec) * log_alpha
    a2 = (80 * nu + q) * log_beta
    h = 4 * log_ra((m + 10 * nu + q / 8) / ((40 * nu + q / 2) * log_beta)) + _d("11.913", prec)
    # for small m the formula drops below the other admissible floors
    mu = Fraction(63, 100)
    lam = log_ra(_q(37, prec)) * ((1 + 2 * mu - mu * mu) / 2)
    h = h.max(lam).max(2 * const_ra("log2", prec)) + Fraction(1, 10**6)
    return laurent_block(37, mu, a1, a2, h)


def _bisect_last_true(pred, lo: int, hi: int) -> int:
    """Largest ``n`` in ``[lo, hi)`` with ``pred(n)``, given ``pred(lo)`` and not ``pred(hi)``."""
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def laurent_exclusion_ratio(A: int, K: int, eps: int, nu: int, prec: int = 60) -> RealApprox:
    """``m*/((40 nu + q'/2) log beta)`` where ``m*`` is the largest ``m`` not excluded.

    Uses ``rho = 37``, ``mu = 0.63``, ``a1 = 4.0017 log alpha`` and
    ``a2 = (80 nu + q') log beta``; an undecided comparison counts as
    "not excluded", so ``m*`` is an upper bound.
    """
    ctx = alg_ctx(family_triple(A, K, eps), prec)
    la, lb = ctx.log_alpha, ctx.log_beta

    def alive(m: int) -> bool:
        block = _illustration_block(la, lb, eps, nu, m)
        return ((4 * m - 1) * la).cmp(laurent_rhs(block, m, ctx.alpha)) != 1

    hi = 2
    while alive(hi):
        hi *= 2
    m_star = _bisect_last_true(alive, 1, hi) if alive(1) else 0
    return m_star / ((40 * nu + _Q2_PRIME[eps] / 2) * lb)


# -- three logarithms -------------------------------------------------------------


def matveev_C1(D: int, chi_deg: int, prec: int = 50) -> RealApprox:
    e = const_ra("e", prec)
    lead = _q(Fraction(5 * 16**5, 6 * chi_deg) * (7 + 2 * chi_deg), prec)
    growth = exp_ra(log_ra(3 * e / 2) * chi_deg)
    tail = _d("20.2", prec) + log_ra(
        exp_ra(log_ra(_q(3, prec)) * Fraction(11, 2)) * (D * D) * log_ra(e * D)
    )
    return lead * e**3 * growth * tail


def matveev_m_bound(ctx: AlgCtx, nu_min: int = 1, D: int = 4) -> int:
    """Largest ``m`` whose three-logarithm lower bound is compatible with ``Lambda < alpha^(1-4m)``.

    ``A1 = log(b c^2 (c-a))`` bounds ``D h(chi)``, ``A2 = 2 log beta`` and
    ``A3 = 2 log alpha``; ``B`` is the largest of ``1``, ``2m A3/A1`` and
    ``2 nu_min A2/A1``.
    """
    prec = 50
    a, b, c = ctx.triple.elems
    la = log_ra(ctx.alpha, prec)
    lb = log_ra(ctx.beta, prec)
    A1 = log_ra(b * c * c * (c - a), prec)
    for sign in (1, -1):
        A1 = A1.max(abs(log_ra(ctx.chi(sign))))
    A1 = A1.max(_d("0.16", prec))
    A2, A3 = 2 * lb, 2 * la
    C1 = matveev_C1(D, 1, prec)
    e = const_ra("e", prec)
    log_eD = log_ra(e * D)
    scale = C1 * (D * D) * A1 * A2 * A3

    def alive(m: int) -> bool:
        B = (2 * m * A3 / A1).max(2 * nu_min * A2 / A1).max(_q(1, prec))
        rhs = scale * log_ra(_d("1.5", prec) * e * D * B * log_eD)
        return ((4 * m - 1) * la).cmp(rhs) != 1

    hi = 2
    while alive(hi):
        hi *= 2
    return _bisect_last_true(alive, 1, hi)


# -- index-gap floor ----------------------------------------------------------------


def nu_test(ctx: AlgCtx, nu: int) -> list[tuple[int, int, RealApprox, bool]]:
    """For each branch ``sign``: ``(sign, m, Lambda, excluded)`` at gap ``nu``.

    ``m`` is forced to be ``floor((nu log beta + log(chi)/2) / log(alpha/beta))``;
    the gap is excluded on a branch when ``m < 1``, ``Lambda <= 0`` or
    ``Lambda > alpha^(1-4m)``.
    """
    la, lb = ctx.log_alpha, ctx.log_beta
    step = la - lb
    out = []
    for sign in (1, -1):
        lchi = log_ra(ctx.chi(sign))
        m = ((nu * lb + lchi / 2) / step).floor()
        if m < 1:
            out.append((sign, m, _q(0, ctx.prec), True))
            continue
        lam = 2 * nu * lb + lchi - 2 * m * step
        sgn = lam.sign()
        if sgn is None:
            raise Undecidable(f"sign of Lambda undecided at nu={nu}")
        if sgn <= 0:
            out.append((sign, m, lam, True))
            continue
        excluded = log_ra(lam) > (1 - 4 * m) * la
        out.append((sign, m, lam, excluded))
    return out


def nu_floor(A: int, K: int, eps: int, nu_max: int, prec: int | None = None) -> int:
    """Smallest index gap ``nu <= nu_max`` not excluded; ``nu_max + 1`` if all are."""
    if nu_max < 1:
        raise ValueError("nu_max must be >= 1")
    tr = family_triple(A, K, eps)
    p0 = precision_for(A) if prec is None else prec

    def run(p: int) -> int:
        ctx = alg_ctx(tr, p)
        for nu in range(1, nu_max + 1):
            if not all(ex for *_, ex in nu_test(ctx, nu)):
                return nu
        return nu_max + 1

    return with_precision(run, p0)


# -- auxiliary inequalities ---------------------------------------------------------


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    status: str  # "pass", "fail" or "skipped"
    detail: str = ""


def _chi_case_applies(A: int, K: int) -> bool:
    return (
        (K == 3 and A >= 6)
        or (K == 5 and A >= 5)
        or (6 <= K <= 11 and A >= 4)
        or (K >= 12 and A >= 3)
    )


def _height_product_rhs(
    A0: int, K0: int, rho: int, beta: RealApprox, grow: Fraction
) -> RealApprox:
    inner = (Fraction(1, K0) + Fraction(1, 2 * rho + 2)) ** 4
    return beta**8 * ((1 + grow) * inner / Fraction(992, 1000))


def _suite(tr: FamilyTriple, prec: int) -> list[InequalityCheck]:
    A, K, eps = tr.A, tr.K, tr.eps
    a, b, c, r, s, t = tr.a, tr.b, tr.c, tr.r, tr.s, tr.t
    ctx = alg_ctx(tr, prec)
    al, be = ctx.alpha, ctx.beta
    lr = log_ra(al) - log_ra(be)
    out: list[InequalityCheck] = []

    def add(name: str, ok: bool, detail: str = "") -> None:
        out.append(InequalityCheck(name, "pass" if ok else "fail", detail))

    def skip(name: str, why: str) -> None:
        out.append(InequalityCheck(name, "skipped", why))

    add("alpha_minus_beta_gt_K", al - be > K)
    sqrt_ac_rat = sqrt_ra(Fraction(a, c), prec)
    sqrt_ab_rat = sqrt_ra(Fraction(a, b), prec)
    if eps == -2:
        if A < 2:
            skip("log_ratio_bracket", "needs A >= 2")
        else:
            add(
                "log_ratio_bracket",
                sqrt_ac_rat > Fraction(1, A + 1)
                and lr > sqrt_ac_rat
                and sqrt_ab_rat > lr
                and Fraction(1, A - 1) > sqrt_ab_rat,
            )
        if A * K >= 34:
            add("beta_close_to_r", be > _d("0.999", prec) * r)
        else:
            skip("beta_close_to_r", "needs AK >= 34")
        rho = (A * K - 4) // 2
        if rho >= 1:
            add("c_minus_a_bound", Fraction(c - a) <= b + Fraction((2 * rho + 2) * b, rho * A))
        else:
            skip("c_minus_a_bound", "needs AK >= 6")
        if rho >= 14 and A >= 2 and K >= 3:
            bound = _height_product_rhs(A, K, rho, be, Fraction(2 * rho + 2, rho * A))
            add("height_product_bound", bound > b * c * c * (c - a), f"rho={rho}")
        else:
            skip("height_product_bound", "needs A >= 2, K >= 3, AK >= 32")
        if _chi_case_applies(A, K):
            add("chi_bound", 1 + Fraction(5, 2 * A) > ctx.chi(-1))
        else:
            skip("chi_bound", "outside the (K, A) case list")
    else:
        alpha_always = al > _d("0.998", prec) * s and be > _d("0.998", prec) * r
        add("alpha_beta_close_to_s_r", alpha_always, "0.998 clause")
        if A * K >= 30:
            add(
                "alpha_beta_close_to_s_r_strong",
                al > _d("0.999", prec) * s and be > _d("0.999", prec) * r,
            )
        else:
            skip("alpha_beta_close_to_s_r_strong", "needs AK >= 30")
        k999 = _d("0.999", prec)
        if A * K >= 43:
            add(
                "roots_close",
                ctx.sqrt_ab > k999 * r
                and ctx.sqrt_ac > k999 * s
                and k999 * (ctx.sqrt_ac - ctx.sqrt_ab) < K,
            )
        else:
            skip("roots_close", "needs AK >= 43")
        if A >= 23:
            add("root_bc_close", ctx.sqrt_bc > k999 * t)
        else:
            skip("root_bc_close", "needs A >= 23")
        add("log_ratio_bracket", Fraction(1, A) > lr and lr > 1 / (A + 1 + Fraction(2, K)))
        add("c_minus_a_bound", c - a < (1 + Fraction(2, A)) * b)
        rho = (A * K) // 2
        if rho >= 15:
            bound = _height_product_rhs(A, K, rho, be, Fraction(2, A))
            add("height_product_bound", bound > b * c * c * (c - a), f"rho={rho}")
        else:
            skip("height_product_bound", "needs AK >= 30")
        add("chi_bound", 1 + Fraction(5, 2 * A) > ctx.chi(-1))
    # log chi > alpha^(1-4m) for every m >= 1, i.e. already at m = 1
    floor = al ** _q(-3, prec)
    add("log_chi_dominates", all(log_ra(ctx.chi(sg)) > floor for sg in (1, -1)))
    return out


def aux_lemma_suite(A: int, K: int, eps: int, prec: int = DEFAULT_PREC) -> list[InequalityCheck]:
    """Evaluate the auxiliary inequalities for the family triple ``(A, K, eps)``.

    Inequalities whose hypotheses fail are reported as skipped.
    """
    if eps not in (-2, 2):
        raise ValueError("auxiliary inequalities are stated for eps = -2 or 2")
    tr = family_triple(A, K, eps)
    return with_precision(lambda p: _suite(tr, p), prec)


def approximation_gap(tr: FamilyTriple, x: int, y: int, z: int, prec: int = DEFAULT_PREC) -> bool:
    """Whether ``(x, y, z)`` meets the simultaneous approximation bound.

    Checks ``max |theta_i - p_i/q| < 2(A+1)(A+1+2/K) z^-2`` with
    ``theta_1 = sqrt(1 - eps A/N)``, ``theta_2 = sqrt(1 + eps/N)``.
    """
    A, K, eps = tr.A, tr.K, tr.eps
    N = _N(A, K, eps)
    th1 = sqrt_ra(1 - Fraction(eps * A, N), prec)
    th2 = sqrt_ra(1 + Fraction(eps, N), prec)
    d1 = abs(th1 - Fraction((A + 1) * x, z))
    d2 = abs(th2 - Fraction((A + 1) * y, A * z))
    bound = Fraction(2 * (A + 1), z * z) * (A + 1 + Fraction(2, K))
    return d1.max(d2) < bound
