"""Baker-Davenport reduction and the uniqueness checks built on it.

An instance ``(kappa, xi, E, B, M)`` encodes the inequality
``0 < m kappa - n + xi < E B^(-m)`` for ``m < M``.  With a convergent
``P/Q`` of ``kappa`` such that ``Q > 6M`` and
``eta = ||xi Q|| - M ||kappa Q|| > 0``, no solution has
``log(EQ/eta)/log B <= m < M``.  The reduced bound is fed back as the new
``M`` until it stops shrinking; the few exponents left are checked by exact
sequence arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .bounds import alg_ctx, matveev_m_bound, precision_for
from .exact import (
    RealApprox,
    iter_convergents,
    const_ra,
    log_ra,
    nearest_dist,
    with_precision,
)
from .pell import V_seq, classify_fundamentals, seq_generate, v_seq
from .tuples import Triple, d_plus, family_triple, make_triple, prop_delta_triple

__all__ = [
    "Provenance",
    "ReductionInstance",
    "ReductionOutcome",
    "Verdict",
    "bd_reduce",
    "bd_reduce_iterated",
    "build_omega_instance",
    "build_lambda_instance",
    "verify_pair",
    "verify_prop_delta",
    "GLOBAL_M",
]

GLOBAL_M = 34 * 10**15
MAX_CONVERGENTS = 10
# A branch that carries the regular extension itself has xi within a tiny
# distance of an integer combination 1 - kappa; eta only turns positive once
# Q^2 exceeds roughly M over that distance, which can take a few dozen terms.
EXTENDED_CONVERGENTS = 200
CONVERGENT_SCHEDULE = (MAX_CONVERGENTS, EXTENDED_CONVERGENTS)


class Provenance(str, Enum):
    OMEGA = "omega-form"
    LAMBDA = "lambda-form"
    PROP_DELTA = "prop-delta"


@dataclass(frozen=True)
class ReductionInstance:
    kappa: RealApprox
    xi: RealApprox
    E: RealApprox
    B: RealApprox
    M: int
    provenance: Provenance
    prec: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not (self.E > 1 and self.B > 1):
            raise ValueError("need E > 1 and B > 1")

    def with_M(self, M: int) -> "ReductionInstance":
        return ReductionInstance(
            self.kappa, self.xi, self.E, self.B, M, self.provenance, self.prec
        )


@dataclass(frozen=True)
class ReductionOutcome:
    M: int
    Q: int | None
    eta: RealApprox | None
    new_bound: int | None
    tried: int

    @property
    def reduced(self) -> bool:
        return self.new_bound is not None


def _candidates(kappa: RealApprox, q_min: int, limit: int):
    """The first convergent with ``Q > q_min`` and up to ``limit - 1`` successors."""
    taken = 0
    for pq in iter_convergents(kappa):
        if pq[1] <= q_min:
            continue
        yield pq
        taken += 1
        if taken == limit:
            return


def bd_reduce(inst: ReductionInstance, max_convergents: int = MAX_CONVERGENTS) -> ReductionOutcome:
    """One reduction round; ``new_bound is None`` when no convergent gave ``eta > 0``."""
    tried = 0
    for _, Q in _candidates(inst.kappa, 6 * inst.M, max_convergents):
        tried += 1
        eta = nearest_dist(inst.xi * Q) - inst.M * nearest_dist(inst.kappa * Q)
        if eta.sign() != 1:
            continue
        x = log_ra(inst.E * Q / eta) / log_ra(inst.B)
        new_bound = max(0, math.ceil(x.endpoints()[1]))
        return ReductionOutcome(inst.M, Q, eta, new_bound, tried)
    return ReductionOutcome(inst.M, None, None, None, tried)


def bd_reduce_iterated(
    inst: ReductionInstance,
    target: int = 2,
    max_rounds: int = 8,
    max_convergents: int = MAX_CONVERGENTS,
) -> list[ReductionOutcome]:
    """Repeat :func:`bd_reduce` with ``M`` set to the last bound while it shrinks."""
    history = []
    cur = inst
    for _ in range(max_rounds):
        out = bd_reduce(cur, max_convergents)
        history.append(out)
        if not out.reduced or out.new_bound <= target or out.new_bound >= cur.M:
            break
        cur = cur.with_M(out.new_bound)
    return history


def final_bound(history: list[ReductionOutcome]) -> int | None:
    """Smallest bound reached, or ``None`` if the first round failed."""
    bounds = [h.new_bound for h in history if h.reduced]
    return min(bounds) if bounds else None


# -- instance builders ------------------------------------------------------------


def build_omega_instance(
    A: int, K: int, eps: int, branch: int, M: int = GLOBAL_M, prec: int | None = None
) -> ReductionInstance:
    """``0 < m kappa - n + xi < E B^-m`` from ``z = v_2m = w_2n`` on a D(4) family triple.

    ``kappa = log alpha / log gamma``, ``xi = log mu / (2 log gamma)``,
    ``E = ac / log gamma`` and ``B = alpha^4``.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    tr = family_triple(A, K, eps)
    if tr.sigma != 4:
        raise ValueError("the omega form is built on D(4) triples; double a D(1) triple first")
    prec = precision_for(A) if prec is None else prec
    ctx = alg_ctx(tr, prec)
    lg = log_ra(ctx.gamma)
    return ReductionInstance(
        kappa=log_ra(ctx.alpha) / lg,
        xi=log_ra(ctx.mu(branch)) / (2 * lg),
        E=RealApprox.exact(tr.a * tr.c, prec) / lg,
        B=ctx.alpha**RealApprox.exact(4, prec),
        M=M,
        provenance=Provenance.OMEGA,
        prec=prec,
    )


def build_lambda_instance(
    tr: Triple, branch: int, M: int, prec: int, provenance: Provenance = Provenance.LAMBDA
) -> ReductionInstance:
    """``0 < l kappa - m + xi < E B^-l`` from ``x = W_2m = V_2l``.

    ``kappa = log beta / log alpha``, ``xi = log chi / (2 log alpha)``,
    ``E = e^2 alpha / (2 chi^2 log alpha)`` and ``B = beta^4``.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    ctx = alg_ctx(tr, prec)
    la = log_ra(ctx.alpha)
    chi = ctx.chi(branch)
    e2 = const_ra("e", prec) ** RealApprox.exact(2, prec)
    return ReductionInstance(
        kappa=log_ra(ctx.beta) / la,
        xi=log_ra(chi) / (2 * la),
        E=e2 * ctx.alpha / (2 * chi * chi * la),
        B=ctx.beta ** RealApprox.exact(4, prec),
        M=M,
        provenance=provenance,
        prec=prec,
    )


# -- verification ---------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    task: str
    verdict: str  # "unique-extension" or "needs-attention"
    d_plus: int
    M: int
    new_bound: int | None
    residual: tuple[int, ...]
    prec: int
    rounds: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict == "unique-extension"


def _extensions_from_terms(tr: Triple, terms, divisor: int) -> set[int]:
    """``d = (u^2 - sigma)/divisor`` for each term, kept when ``{a,b,c,d}`` is a quadruple."""
    found = set()
    for u in terms:
        num = u * u - tr.sigma
        if u <= 0 or num <= 0 or num % divisor:
            continue
        d = num // divisor
        if all(math.isqrt(e * d + tr.sigma) ** 2 == e * d + tr.sigma for e in tr.elems):
            found.add(d)
    return found


def _reduce_branches(builder, prec: int, schedule=CONVERGENT_SCHEDULE) -> tuple[dict, int | None, int]:
    """Run iterated reduction on both branches, raising precision on failure.

    Each entry of ``schedule`` is a convergent budget; a branch moves to the
    next budget only when the previous one ended without a reduction.
    """
    rounds, bounds = {}, []
    used = prec
    for branch in (1, -1):
        for limit in schedule:

            def run(p, branch=branch, limit=limit):
                return p, bd_reduce_iterated(builder(branch, p), max_convergents=limit)

            used_b, hist = with_precision(run, prec)
            used = max(used, used_b)
            if final_bound(hist) is not None:
                break
        rounds[branch] = hist
        bounds.append(final_bound(hist))
    if any(b is None for b in bounds):
        return rounds, None, used
    return rounds, max(bounds), used


def verify_pair(
    A: int,
    K: int,
    eps: int,
    M: int | None = None,
    prec: int | None = None,
    schedule: tuple[int, ...] = CONVERGENT_SCHEDULE,
) -> Verdict:
    """Check that ``d_+`` is the only extension of the family triple ``(A, K, eps)``.

    D(1) triples (``eps = +-1``) are doubled to the D(4) triple ``(A, 2K, 2eps)``.
    ``M`` defaults to the three-logarithm bound of this triple.
    """
    task = f"{eps}:{A}:{K}"
    tr = family_triple(A, K, eps)
    scale = 1
    if abs(eps) == 1:
        A4, K4, e4, scale = A, 2 * K, 2 * eps, 2
    else:
        A4, K4, e4 = A, K, eps
    tr4 = family_triple(A4, K4, e4)
    dp = d_plus(tr)
    p0 = precision_for(A4) if prec is None else prec
    rep = classify_fundamentals(tr4)
    starts = {(f.z0, f.x0) for f in rep.admissible_z0}
    if starts != {(2, 2), (-2, 2)}:
        return Verdict(task, "needs-attention", dp, 0, None, (), p0,
                       detail=f"window solutions not reduced to z0=+-2: {rep.conclusion}")
    if M is None:
        M = max(2, matveev_m_bound(alg_ctx(tr4, 50)))
    rounds, nb, used = _reduce_branches(
        lambda br, p: build_omega_instance(A4, K4, e4, br, M=M, prec=p), p0, schedule
    )
    if nb is None:
        return Verdict(task, "needs-attention", dp, M, None, (), used, rounds,
                       detail="no convergent gave eta > 0")
    terms = []
    for z0 in (2, -2):
        terms += seq_generate(v_seq(tr4, z0, 2), 2 * nb + 2)
    found = _extensions_from_terms(tr4, terms, tr4.c)
    residual = tuple(sorted(d // scale for d in found if d % scale == 0))
    ok = set(residual) <= {dp}
    return Verdict(task, "unique-extension" if ok else "needs-attention", dp, M, nb,
                   residual, used, rounds,
                   detail="" if ok else f"unexpected extensions {residual}")


def verify_prop_delta(
    Delta: int,
    prec: int = 200,
    M: int | None = None,
    schedule: tuple[int, ...] = CONVERGENT_SCHEDULE,
) -> Verdict:
    """Uniqueness of ``d_+`` for the D(1) triple attached to ``Delta`` (6 <= Delta <= 60)."""
    if not 6 <= Delta <= 60:
        raise ValueError("Delta must lie in [6, 60]")
    a, b, c, *_, dp = prop_delta_triple(Delta)
    tr = make_triple(a, b, c, 1)
    if M is None:
        # l = m + nu < 2m, so twice the bound on m caps l
        M = 2 * matveev_m_bound(alg_ctx(tr, 50)) + 1
    rounds, nb, used = _reduce_branches(
        lambda br, p: build_lambda_instance(tr, br, M, p, Provenance.PROP_DELTA), prec, schedule
    )
    task = f"delta:{Delta}"
    if nb is None:
        return Verdict(task, "needs-attention", dp, M, None, (), used, rounds,
                       detail="no convergent gave eta > 0")
    found = _extensions_from_terms(tr, seq_generate(V_seq(tr), 2 * nb + 2), tr.a)
    residual = tuple(sorted(found))
    ok = set(residual) <= {dp}
    return Verdict(task, "unique-extension" if ok else "needs-attention", dp, M, nb,
                   residual, used, rounds,
                   detail="" if ok else f"unexpected extensions {residual}")
