import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from dtriples.tuples import (
    SieveStatus,
    appfin_bound,
    appsup_bound,
    brute_force_extensions,
    corollary_decompose,
    corollary_form,
    d_minus,
    d_plus,
    d_plus_closed,
    dual_map,
    family_triple,
    make_triple,
    prop_delta_d_plus,
    prop_delta_triple,
    quintuple_scan_b4a,
    quintuple_scan_regular,
    verify_dtuple,
)

from oracles import brute_extensions

eps_st = st.sampled_from([-2, -1, 1, 2])


def family_or_skip(A, K, eps):
    try:
        return family_triple(A, K, eps)
    except ValueError:
        assume(False)


# -- verify_dtuple ---------------------------------------------------------------


def test_verify_dtuple_examples():
    t = verify_dtuple([1, 8, 15], 1)
    assert t.valid and sorted(t.witnesses.values()) == [3, 4, 11]
    t = verify_dtuple([32, 3, 15], 4)
    assert t.valid and t.elems == (3, 15, 32)
    assert sorted(t.witnesses.values()) == [7, 10, 22]
    bad = verify_dtuple([1, 2, 3], 1)
    assert not bad.valid and bad.failing_pair == (1, 2) and bad.witnesses == {}


def test_verify_dtuple_rejects_bad_input():
    with pytest.raises(ValueError):
        verify_dtuple([1, 1, 3], 1)
    with pytest.raises(ValueError):
        verify_dtuple([0, 3], 1)


def test_verify_dtuple_negative_shift():
    assert verify_dtuple([1, 2, 5], -1).valid
    assert not verify_dtuple([1, 2], -3).valid


# -- families ---------------------------------------------------------------------


def test_family_examples():
    t = family_triple(2, 1, 1)
    assert (t.elems, t.r, t.s, t.t) == ((1, 8, 15), 3, 4, 11)
    t = family_triple(3, 3, -2)
    assert (t.elems, t.r, t.s, t.t, t.sigma) == ((3, 15, 32), 7, 10, 22, 4)
    assert t.is_regular and t.key == (3, 3, -2)


def test_family_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        family_triple(1, 3, -1)
    with pytest.raises(ValueError):
        family_triple(2, 2, 3)
    with pytest.raises(ValueError):
        family_triple(0, 2, 1)


def test_make_triple_checks_squares():
    assert make_triple(1, 3, 8, 1).t == 5
    with pytest.raises(ValueError):
        make_triple(1, 3, 7, 1)
    with pytest.raises(ValueError):
        make_triple(3, 1, 8, 1)


def test_d_plus_examples():
    assert d_plus(make_triple(1, 8, 15, 1)) == 528
    assert d_plus(make_triple(3, 15, 32, 4)) == 1540
    a, b, c, *_, dp = prop_delta_triple(6)
    assert d_plus(make_triple(a, b, c, 1)) == dp == prop_delta_d_plus(6)


def test_d_plus_closed_examples():
    assert d_plus_closed(2, 1, 1) == 528
    assert d_plus_closed(3, 3, -2) == 1540
    # (1,1,1) is the triple (1,3,8); both formulas give 120
    assert family_triple(1, 1, 1).elems == (1, 3, 8)
    assert d_plus_closed(1, 1, 1) == d_plus(family_triple(1, 1, 1)) == 120


def test_d_minus_examples():
    assert d_minus(make_triple(3, 15, 32, 4)) == 0
    assert d_minus(make_triple(1, 8, 15, 1)) == 0


@given(st.integers(1, 200), st.integers(1, 200), eps_st)
def test_closed_form_matches_structural(A, K, eps):
    tr = family_or_skip(A, K, eps)
    dp = d_plus(tr)
    assert d_plus_closed(A, K, eps) == dp
    assert verify_dtuple([*tr.elems, dp], tr.sigma).valid
    assert d_minus(tr) == 0


@given(st.integers(1, 10**6), st.sampled_from([1, 2, 4]))
def test_duality(A, K):
    assume(A > 4 // K)
    B = dual_map(A, K)
    m = family_triple(A, K, -2).elems if A * A * K - 4 * A > K else None
    assume(m is not None)
    assert m == family_triple(B, K, 2).elems


def test_duality_examples_and_errors():
    assert dual_map(3, 4) == 2 and family_triple(3, 4, -2).elems == (4, 24, 48) == family_triple(2, 4, 2).elems
    assert dual_map(5, 2) == 3
    assert dual_map(5, 1) == 1
    with pytest.raises(ValueError):
        dual_map(5, 3)
    with pytest.raises(ValueError):
        dual_map(4, 1)


def test_corollary_examples():
    assert corollary_decompose(7, 32, 69, 1) == (2, 7, 1)
    assert corollary_decompose(3, 15, 32, -2) == (3, 3, -2)
    assert corollary_decompose(3, 15, 32, 2) == (3, 3, -2)
    with pytest.raises(ValueError):
        corollary_decompose(1, 8, 120, 1)


@given(st.integers(1, 300), st.integers(1, 300), eps_st)
def test_corollary_round_trip(A, K, eps):
    tr = family_or_skip(A, K, eps)
    got = corollary_decompose(*tr.elems, eps)
    assert got is not None
    assert family_triple(*got).elems == tr.elems
    if K > 2 * abs(eps):
        # r = A K + eps reduces to eps, not -eps, so the constructed sign comes back
        assert got == (A, K, eps)


@settings(max_examples=60)
@given(st.integers(1, 2000), eps_st)
def test_corollary_form_implies_decomposition(a, eps):
    assume(corollary_form(a, eps))
    # any regular triple with this a has r = +-eps (mod a)
    for r in range(1, 4 * a):
        if (r * r - eps * eps) % a == 0:
            assert (r - eps) % a == 0 or (r + eps) % a == 0


def test_corollary_form_examples():
    assert corollary_form(8, 2) and corollary_form(4, 1)
    assert corollary_form(9, 1) and corollary_form(18, 1) and corollary_form(1, 1)
    assert not corollary_form(15, 1) and not corollary_form(12, 1)


# -- extensions --------------------------------------------------------------------


def test_brute_force_examples():
    assert brute_force_extensions(make_triple(3, 15, 32, 4), 10**5) == [1540]
    assert brute_force_extensions(make_triple(1, 8, 15, 1), 10**4) == [528]
    assert brute_force_extensions(make_triple(1, 8, 15, 1), 100) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), eps_st)
def test_brute_force_matches_naive_scan(A, K, eps):
    tr = family_or_skip(A, K, eps)
    cap = min(2 * d_plus(tr), 3 * 10**5)
    assert brute_force_extensions(tr, cap) == brute_extensions(*tr.elems, tr.sigma, cap)


def test_brute_force_non_regular_triple():
    tr = make_triple(1, 3, 120, 1)
    assert not tr.is_regular
    got = brute_force_extensions(tr, 10**4)
    assert got == brute_extensions(1, 3, 120, 1, 10**4)
    assert 8 in got and d_plus(tr) in got


# -- sieves -------------------------------------------------------------------------


SURVIVORS = {
    (35, 42456, 44929),
    (48, 109921, 114563),
    (21, 8928, 9815),
    (80, 510561, 523423),
    (99, 968320, 988001),
}


def test_regular_sieve_examples():
    res = quintuple_scan_regular((16, 10**4), 10)
    by = {(v.delta, v.a): v for v in res}
    assert [v.a for v in res if v.delta == 5] == [24]
    v5 = by[(5, 24)]
    assert v5.b == 13585 and v5.status is SieveStatus.ELIMINATED_GCD and "11" in v5.reason
    v7 = by[(7, 24)]
    assert v7.b == 13490 and v7.status is SieveStatus.ELIMINATED_GCD and "=2" in v7.reason
    assert {v.triple for v in res if v.status is SieveStatus.SURVIVOR} == SURVIVORS


def test_regular_sieve_is_deterministic_and_consistent():
    a = quintuple_scan_regular((16, 2000), 40)
    assert a == quintuple_scan_regular((16, 2000), 40)
    for v in a:
        tr = make_triple(v.a, v.b, v.c, 1)
        assert tr.is_regular
        if v.status is SieveStatus.SURVIVOR:
            assert math.gcd(v.b, v.c) == 1 and v.b < v.a**3 and v.a >= 20


def test_regular_sieve_preconditions():
    with pytest.raises(ValueError):
        quintuple_scan_regular((10, 100), 10)
    with pytest.raises(ValueError):
        quintuple_scan_regular((16, 100), 201)


def test_b4a_sieve_examples():
    res = quintuple_scan_b4a((1, 10**4), 30)
    assert res == quintuple_scan_b4a((1, 10**4), 30)
    for v in res:
        if v.delta == 1:
            assert v.status is SieveStatus.ELIMINATED_COROLLARY
        elif v.delta % 2 == 0:
            assert v.status is SieveStatus.ELIMINATED_PARITY
        elif v.a == v.delta**2 - 1:
            assert v.status is SieveStatus.ELIMINATED_COROLLARY
            assert (v.b, v.c) == (4 * v.delta**2 - 4 * v.delta - 3, 9 * v.delta**2 - 6 * v.delta - 8)
        if v.status is SieveStatus.SURVIVOR:
            assert v.b > 130000 and v.b < 4 * v.a


def test_bounds_examples():
    assert appfin_bound(32) == 32131
    assert appfin_bound(1) == 0
    assert appsup_bound(32815) == 4 * 32815 - 4 * 314 + 3
    with pytest.raises(ValueError):
        appfin_bound(0)


def test_prop_delta_triple():
    a, b, c, r, s, t, dp = prop_delta_triple(6)
    assert (a, b, c, r) == (35, 42456, 44929, 1219)
    assert r * r == a * b + 1 and s * s == a * c + 1 and t * t == b * c + 1
    assert prop_delta_triple(7)[:3] == (48, 109921, 114563)
    with pytest.raises(ValueError):
        prop_delta_triple(5)


@given(st.integers(6, 500))
def test_prop_delta_polynomial_matches_d_plus(D):
    a, b, c, r, s, t, dp = prop_delta_triple(D)
    assert dp == d_plus(make_triple(a, b, c, 1))
    assert c == a + b + 2 * r
