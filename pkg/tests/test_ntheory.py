from fractions import Fraction
from math import prod

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hasse_forge.errors import BudgetExhausted, FactorizationError, PreconditionError
from hasse_forge.ntheory import (
    FactoredInteger,
    SquareClass,
    class_number,
    factor,
    fundamental_discriminant_of_imaginary,
    is_prime,
    kronecker,
    primes_below,
    primes_in_progression,
    reduced_forms,
    squarefree_part,
    valuation,
)

from oracles import brute_class_number, legendre_euler, residue_set, sieve_primes, trial_factor, trial_primality


def test_factor_examples():
    assert factor(1).factors == ()
    assert factor(60).factors == ((2, 2), (3, 1), (5, 1))
    f = factor(-97)
    assert f.factors == ((97, 1),) and f.value == -97
    with pytest.raises(PreconditionError):
        factor(0)


def test_factor_large_semiprime_uses_rho():
    p, q = 1_000_003, 1_000_033
    assert factor(p * q).factors == ((p, 1), (q, 1))
    assert factor(p**2 * 12).factors == ((2, 2), (3, 1), (p, 2))


def test_factor_reports_failure_instead_of_guessing():
    p, q = 2**31 - 1, 2**61 - 1
    with pytest.raises(FactorizationError):
        factor(p * q, max_steps=10)


def test_factored_integer_validates():
    with pytest.raises(ValueError):
        FactoredInteger(12, ((2, 1), (3, 1)))
    with pytest.raises(ValueError):
        FactoredInteger(6, ((3, 1), (2, 1)))


@given(st.integers(min_value=-10**7, max_value=10**7).filter(bool))
def test_factor_recomposes_with_certified_primes(n):
    f = factor(n)
    assert prod(p**e for p, e in f.factors) == abs(n)
    assert all(trial_primality(p) for p in f.primes)
    assert list(f.factors) == trial_factor(n)


def test_squarefree_part_examples():
    assert squarefree_part(18).representative == 2
    assert squarefree_part(Fraction(4, 9)).representative == 1
    assert squarefree_part(-8).representative == -2
    with pytest.raises(PreconditionError):
        squarefree_part(0)
    with pytest.raises(PreconditionError):
        SquareClass(12)


nonzero_q = st.fractions(max_denominator=1000).filter(lambda r: r != 0 and abs(r) < 10**6)


@given(nonzero_q)
def test_squarefree_part_quotient_is_square(r):
    c = squarefree_part(r).representative
    q = Fraction(r) / c
    assert q > 0
    assert all(e % 2 == 0 for _, e in trial_factor(q.numerator)) and all(e % 2 == 0 for _, e in trial_factor(q.denominator))


@given(nonzero_q, nonzero_q)
def test_squarefree_part_multiplicative(r, s):
    assert squarefree_part(r) * squarefree_part(s) == squarefree_part(r * s)


def test_kronecker_examples():
    assert kronecker(1, 7) == 1
    assert kronecker(3, 7) == -1
    assert kronecker(6, 5) == 1
    assert kronecker(5, 0) == 0 and kronecker(-1, 0) == 1
    assert kronecker(3, 8) == -1 and kronecker(7, 8) == 1 and kronecker(2, 6) == 0


@pytest.mark.parametrize("p", sieve_primes(500)[1:])
def test_kronecker_matches_residue_enumeration(p):
    residues = residue_set(p)
    for a in range(-3 * p, 3 * p, max(1, p // 17)):
        expected = 0 if a % p == 0 else (1 if a % p in residues else -1)
        assert kronecker(a, p) == expected == legendre_euler(a, p)


odd_n = st.integers(min_value=1, max_value=999).map(lambda k: 2 * k + 1)


@given(st.integers(-500, 500), st.integers(-500, 500), odd_n)
def test_kronecker_multiplicative(a, b, n):
    assert kronecker(a * b, n) == kronecker(a, n) * kronecker(b, n)


@settings(max_examples=300)
@given(odd_n, odd_n)
def test_quadratic_reciprocity(m, n):
    from math import gcd

    if gcd(m, n) != 1 or m == 1 or n == 1:
        return
    sign = -1 if (m % 4 == 3 and n % 4 == 3) else 1
    assert kronecker(m, n) * kronecker(n, m) == sign


def test_class_number_examples():
    assert class_number(-4) == 1
    assert class_number(-23) == 3
    assert class_number(-20) == 2
    assert reduced_forms(-20) == [(1, 0, 5), (2, 2, 3)]
    with pytest.raises(PreconditionError):
        class_number(-5)
    with pytest.raises(PreconditionError):
        class_number(8)


@given(st.integers(min_value=3, max_value=20000).filter(lambda n: (-n) % 4 in (0, 1)))
def test_class_number_matches_bruteforce(n):
    assert class_number(-n) == brute_class_number(-n)


def test_fundamental_discriminant():
    assert fundamental_discriminant_of_imaginary(19) == -19
    assert fundamental_discriminant_of_imaginary(29) == -116
    assert fundamental_discriminant_of_imaginary(12) == -3


def test_primes_in_progression_examples():
    assert primes_in_progression(1, 4, None, 3) == [5, 13, 17]
    assert primes_in_progression(4, 5, None, 3) == [19, 29, 59]
    assert primes_in_progression(1, 2, None, 1) == [3]
    with pytest.raises(PreconditionError):
        primes_in_progression(0, 2, None, 1)
    with pytest.raises(BudgetExhausted):
        primes_in_progression(1, 4, lambda p: False, 1, budget=100)


def test_budget_env_caps_searches(monkeypatch):
    monkeypatch.setenv("HASSE_FORGE_BUDGET", "3")
    with pytest.raises(BudgetExhausted):
        primes_in_progression(1, 4, None, 5)


def test_primes_below_matches_sieve():
    assert primes_below(2000) == sieve_primes(2000)
    assert [n for n in range(2000) if is_prime(n)] == sieve_primes(2000)


def test_valuation():
    assert valuation(Fraction(12, 5), 2) == 2
    assert valuation(Fraction(12, 25), 5) == -2
    with pytest.raises(PreconditionError):
        valuation(0, 3)
