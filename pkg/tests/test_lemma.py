import pytest
from hypothesis import given, settings, strategies as st

from treewidth.errors import DomainError
from treewidth.lemma import LemmaQuery, power_gap_min, verify_lemma, witness_value


def brute(p, N, m, hi):
    # plain enumeration of multisets of signed terms
    from itertools import combinations_with_replacement
    target = (p**N - 1) // (p - 1)
    terms = [s * p**h for h in range(hi + 1) for s in (1, -1)]
    return min(abs(target - sum(c)) for c in combinations_with_replacement(terms, m))


def test_small_cases():
    r = power_gap_min(LemmaQuery(3, 2, 1))
    assert r.min_value == 1 and r.witness == ((1, 1),)
    r = power_gap_min(LemmaQuery(3, 3, 1))
    assert r.min_value == 4 and r.witness == ((1, 2),)


@pytest.mark.parametrize("p,N,m", [(3, 4, 2), (3, 5, 3), (4, 4, 2), (5, 4, 3), (3, 6, 2)])
def test_matches_brute_force(p, N, m):
    assert power_gap_min(LemmaQuery(p, N, m)).min_value == brute(p, N, m, N + 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 6), st.integers(2, 9), st.data())
def test_telescoping_witness(p, N, data):
    m = data.draw(st.integers(1, N - 1))
    q = LemmaQuery(p, N, m)
    tele = tuple((1, N - i) for i in range(1, m + 1))
    assert witness_value(q, tele) == q.bound
    r = power_gap_min(q)
    assert witness_value(q, r.witness) == r.min_value
    assert r.holds and r.attained


def test_sweeps():
    assert verify_lemma(3, 10, 5).all_attained
    assert verify_lemma(4, 8).all_hold


def test_p2_rejected():
    with pytest.raises(DomainError):
        verify_lemma(2, 5)
    with pytest.raises(DomainError):
        LemmaQuery(2, 3, 1)


def test_bad_m():
    with pytest.raises(DomainError):
        LemmaQuery(3, 3, 3)
    with pytest.raises(DomainError):
        LemmaQuery(3, 3, 0)


def test_window_stability():
    for N in range(2, 8):
        for m in range(1, N):
            a = power_gap_min(LemmaQuery(3, N, m)).min_value
            b = power_gap_min(LemmaQuery(3, N, m, h_bound=N + 3)).min_value
            assert a == b


def test_positive_exponents_mode():
    sweep = verify_lemma(3, 7, positive_exponents=True)
    assert sweep.all_hold
    assert all(h >= 1 for r in sweep.results for _, h in r.witness)
