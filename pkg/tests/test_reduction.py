from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from dtriples.exact import RealApprox, iter_convergents, sqrt_ra
from dtriples.reduction import (
    GLOBAL_M,
    Provenance,
    ReductionInstance,
    bd_reduce,
    bd_reduce_iterated,
    build_lambda_instance,
    build_omega_instance,
    final_bound,
    verify_pair,
    verify_prop_delta,
)
from dtriples.tuples import (
    brute_force_extensions,
    d_plus,
    family_triple,
    make_triple,
    prop_delta_triple,
)

from oracles import brute_extensions


def golden(prec=60):
    return (sqrt_ra(5, prec) + 1) / 2


def exact(x, prec=60):
    return RealApprox.exact(x, prec)


# -- the reduction step -------------------------------------------------------------


def test_xi_zero_never_reduces():
    inst = ReductionInstance(golden(), exact(0), exact(10), exact(4), 100, Provenance.OMEGA, 60)
    out = bd_reduce(inst)
    assert not out.reduced and out.Q is None and out.tried == 10


def test_instance_invariants():
    with pytest.raises(ValueError):
        ReductionInstance(golden(), exact(0), exact(1), exact(4), 100, Provenance.OMEGA, 60)
    with pytest.raises(ValueError):
        ReductionInstance(golden(), exact(0), exact(10), exact(1), 100, Provenance.OMEGA, 60)
    with pytest.raises(ValueError):
        ReductionInstance(golden(), exact(0), exact(10), exact(4), 0, Provenance.OMEGA, 60)


def test_reduced_bound_formula():
    xi = exact(Fraction(1, 3))
    inst = ReductionInstance(golden(), xi, exact(10), exact(4), 100, Provenance.OMEGA, 60)
    out = bd_reduce(inst)
    assert out.reduced and out.Q > 600
    assert out.eta > 0
    # B^new_bound >= E Q / eta, and the bound is the least such integer
    assert exact(4) ** exact(out.new_bound) >= exact(10) * out.Q / out.eta
    assert exact(4) ** exact(out.new_bound - 1) < exact(10) * out.Q / out.eta


def test_omega_instance_shape():
    inst = build_omega_instance(3, 3, -2, -1)
    assert inst.M == GLOBAL_M and inst.prec == 180 and inst.provenance is Provenance.OMEGA
    # kappa = log alpha / log gamma with alpha ~ 9.899, gamma ~ 21.954
    assert abs(float(inst.kappa) - 0.742134672780667) < 1e-12
    assert abs(float(inst.B) - 9.898979485566356**4) < 1e-6
    assert build_omega_instance(250, 300, -2, 1).prec == 180
    assert build_omega_instance(2, 6, -2, 1).kappa.cmp(Fraction(1)) == -1
    with pytest.raises(ValueError):
        build_omega_instance(3, 3, -2, 0)
    with pytest.raises(ValueError):
        build_omega_instance(3, 3, 1, 1)


def test_omega_reduction_from_the_large_bound():
    out = bd_reduce(build_omega_instance(3, 3, -2, 1))
    assert out.reduced and out.Q > 6 * GLOBAL_M and out.new_bound == 6
    hist = bd_reduce_iterated(build_omega_instance(3, 3, -2, 1))
    assert final_bound(hist) <= 2


def test_final_bound_of_failure():
    assert final_bound([]) is None


def test_lambda_instance_shape():
    a, b, c, *_ = prop_delta_triple(6)
    inst = build_lambda_instance(make_triple(a, b, c, 1), 1, 10**17, 200)
    assert inst.provenance is Provenance.LAMBDA and inst.M == 10**17
    assert 0 < float(inst.kappa) < 1


def test_determinism():
    inst = build_omega_instance(5, 7, 2, -1)
    a, b = bd_reduce(inst), bd_reduce(inst)
    assert (a.Q, a.new_bound) == (b.Q, b.new_bound)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 500), st.integers(3, 5000), st.sampled_from([-2, 2]), st.sampled_from([1, -1]))
def test_eta_sign_stable_across_precision(A, K, eps, branch):
    try:
        lo = build_omega_instance(A, K, eps, branch, prec=180)
    except ValueError:
        assume(False)
    hi = build_omega_instance(A, K, eps, branch, prec=360)
    a, b = bd_reduce(lo, 200), bd_reduce(hi, 200)
    if a.reduced and b.reduced:
        assert a.Q == b.Q
        assert a.eta.sign() == b.eta.sign() == 1


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 200), st.integers(3, 2000), st.sampled_from([-2, 2]), st.integers(10**6, 10**12))
def test_bound_monotone_in_M(A, K, eps, M):
    try:
        inst = build_omega_instance(A, K, eps, 1, M=M)
    except ValueError:
        assume(False)
    out = bd_reduce(inst, 200)
    assume(out.reduced)
    # the same convergent stays the first candidate for any M' with 6M' in [prev Q, Q)
    prev = 0
    for _, q in iter_convergents(inst.kappa):
        if q >= out.Q:
            break
        prev = q
    smaller = max(1, prev // 6 + 1)
    assume(smaller < M)
    other = bd_reduce(inst.with_M(smaller), 200)
    if other.Q == out.Q:
        assert other.new_bound <= out.new_bound


# -- verification drivers ------------------------------------------------------------


@pytest.mark.parametrize(
    "A,K,eps", [(3, 3, -2), (2, 6, -2), (2, 12, -2), (5, 7, 2), (3, 5, 1), (4, 9, -1)]
)
def test_verify_pair_examples(A, K, eps):
    v = verify_pair(A, K, eps)
    assert v.ok and v.new_bound is not None and v.new_bound <= 2
    assert set(v.residual) <= {d_plus(family_triple(A, K, eps))}


def test_verify_pair_with_global_bound():
    v = verify_pair(3, 3, -2, M=GLOBAL_M)
    assert v.ok and v.d_plus == 1540 and v.M == GLOBAL_M


@pytest.mark.parametrize("Delta", [6, 7])
def test_verify_prop_delta_examples(Delta):
    v = verify_prop_delta(Delta)
    assert v.ok and v.prec >= 200
    a, b, c, *_ = prop_delta_triple(Delta)
    assert brute_extensions(a, b, c, 1, 10**6) == []
    assert verify_prop_delta(Delta, M=10**17).ok


def test_verify_prop_delta_domain():
    with pytest.raises(ValueError):
        verify_prop_delta(5)
    with pytest.raises(ValueError):
        verify_prop_delta(61)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 60), st.integers(3, 60), st.sampled_from([-2, 2]))
def test_soundness_against_brute_force(A, K, eps):
    try:
        tr = family_triple(A, K, eps)
    except ValueError:
        assume(False)
    assume(tr.c <= 2 * 10**5)
    v = verify_pair(A, K, eps)
    if v.ok:
        dp = d_plus(tr)
        assert brute_force_extensions(tr, 10 * dp) == [dp]
