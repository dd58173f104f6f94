import pytest
from hypothesis import given
from hypothesis import strategies as st

from hasse_forge.errors import BudgetExhausted, PreconditionError
from hasse_forge.modparams import (
    LevelPair,
    admissible_pair,
    eigenvalue_condition,
    hasse_term,
    level_residue_classes,
    residue_condition,
    search_levels,
)
from hasse_forge.ntheory import fundamental_discriminant_of_imaginary

from oracles import brute_class_number, roots_of_t2_plus_N, sieve_primes

ODD_PRIMES = sieve_primes(200)[1:]


def test_admissible_pair_examples():
    a = admissible_pair(5, 19)
    assert a.congruence_ok and a.eigenvalue_ok and a.residue_ok and a.h_minus_N == 1
    assert not admissible_pair(5, 11).congruence_ok
    b = admissible_pair(5, 29, 3)
    assert b.all_ok and b.h_minus_N == 6
    with pytest.raises(PreconditionError):
        admissible_pair(5, 5)
    with pytest.raises(PreconditionError):
        admissible_pair(5, 21)
    with pytest.raises(PreconditionError):
        admissible_pair(5, 19, 19)
    with pytest.raises(PreconditionError):
        admissible_pair(2, 19)


def test_level_pair_rejects_inconsistent_flags():
    with pytest.raises(ValueError):
        LevelPair(5, 19, 1, 1, False, False, True)
    with pytest.raises(ValueError):
        LevelPair(5, 19, 1, 1, True, False, True)


def test_eigenvalue_iff_congruence_scan():
    for M in ODD_PRIMES:
        for N in ODD_PRIMES:
            if M == N:
                continue
            eig = eigenvalue_condition(M, N)
            assert eig == ((N + 1) % M == 0)
            # independent root enumeration: t^2 + N = (t - 1)(t + 1) iff its roots are exactly +-1
            assert eig == (roots_of_t2_plus_N(N, M) == {1, M - 1})


def test_residue_condition():
    assert residue_condition(29, 3)
    assert not residue_condition(19, 3)
    assert residue_condition(79, 2) and not residue_condition(19, 2)
    assert residue_condition(7, 1)


def test_level_residue_classes():
    assert level_residue_classes(5, 2) == ([39], 40)
    assert level_residue_classes(5, 3) == ([14], 15)
    assert level_residue_classes(5, 1) == ([4], 5)


def test_search_levels_examples():
    assert search_levels(5, 3)[0].N == 29
    assert search_levels(5, 2)[0].N == 79
    first = search_levels(5, 1, class_bound=3)[0]
    # expected value from the reduced-form oracle: first prime N = 4 mod 5 with h > 3
    expected = next(
        N for N in sieve_primes(10_000) if N % 5 == 4 and brute_class_number(fundamental_discriminant_of_imaginary(N)) > 3
    )
    assert first.N == expected == 29
    with pytest.raises(PreconditionError):
        search_levels(9)
    with pytest.raises(PreconditionError):
        search_levels(5, 5)


def test_search_levels_budget(monkeypatch):
    monkeypatch.setenv("HASSE_FORGE_BUDGET", "3")
    with pytest.raises(BudgetExhausted):
        search_levels(5, 2, count=10)


@pytest.mark.parametrize("M,p,d", [(3, 1, 0), (5, 2, 0), (5, 3, 2), (7, 5, 1), (11, 1, 4), (13, 2, 3)])
def test_search_results_are_admissible_and_ascending(M, p, d):
    res = search_levels(M, p, class_bound=d, count=6)
    Ns = [r.N for r in res]
    assert Ns == sorted(Ns) and len(set(Ns)) == len(Ns)
    for r in res:
        again = admissible_pair(M, r.N, p)
        assert again == r and again.all_ok and r.h_minus_N > d
    # no admissible level was skipped below the last one returned
    skipped = [
        N
        for N in sieve_primes(Ns[-1])
        if N not in (2, M, p) and N not in Ns and admissible_pair(M, N, p).all_ok and admissible_pair(M, N, p).h_minus_N > d
    ]
    assert skipped == []


def test_hasse_term_examples():
    assert hasse_term(2, 1) == 4097**2 == 16785409
    assert hasse_term(3, 1) == 531442**2 == 282430599364
    assert hasse_term(2, 2) == (2**24 + 1) ** 2
    with pytest.raises(PreconditionError):
        hasse_term(4, 1)
    with pytest.raises(PreconditionError):
        hasse_term(2, 0)


@given(st.sampled_from(ODD_PRIMES[:10] + [2]), st.integers(1, 6))
def test_hasse_term_formula(p, d):
    assert hasse_term(p, d) == (pow(p, 12 * d) + 1) ** 2
