"""Exact integer arithmetic: primality, factoring, square classes, symbols, class numbers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Callable, Iterator

from sympy import isprime as _sympy_isprime
from sympy import jacobi_symbol
from sympy.ntheory import factorint, pollard_rho

from .budget import search_budget
from .errors import BudgetExhausted, FactorizationError, PreconditionError

DETERMINISTIC_LIMIT = 2**64
TRIAL_LIMIT = 10**6
RHO_SEED = 1234


def is_prime(n: int) -> bool:
    # sympy's test is deterministic (Miller-Rabin + strong Lucas) below 2^64.
    return n >= 2 and bool(_sympy_isprime(n))


def is_certified_prime(n: int) -> bool:
    return n < DETERMINISTIC_LIMIT and is_prime(n)


@dataclass(frozen=True)
class FactoredInteger:
    value: int
    factors: tuple[tuple[int, int], ...]
    certified: bool = True

    def __post_init__(self):
        if self.value == 0:
            raise PreconditionError("FactoredInteger requires a nonzero value")
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factor list {self.factors}")
            last = p
            prod *= p**e
        if prod != abs(self.value):
            raise ValueError(f"factors {self.factors} do not multiply to |{self.value}|")

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def exponent(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def __iter__(self):
        return iter(self.factors)


def _split_composite(n: int, max_steps: int) -> list[int]:
    """Fully split ``n`` (no prime factors below TRIAL_LIMIT) into primes using Pollard rho."""
    if n == 1:
        return []
    if is_prime(n):
        return [n]
    r = isqrt(n)
    if r * r == n:
        return _split_composite(r, max_steps) * 2
    seed = RHO_SEED
    for attempt in range(8):
        d = pollard_rho(n, seed=seed + attempt, retries=3, max_steps=max_steps)
        if d and 1 < d < n:
            return _split_composite(d, max_steps) + _split_composite(n // d, max_steps)
    raise FactorizationError(f"Pollard rho could not split {n} within {max_steps} steps")


def factor(n: int, max_steps: int = 10**6) -> FactoredInteger:
    """Factor a nonzero integer.

    Trial division runs up to 10**6, then Pollard rho with a fixed seed. A
    cofactor that cannot be split within ``max_steps`` raises
    :class:`FactorizationError` instead of returning a wrong answer.
    """
    if n == 0:
        raise PreconditionError("cannot factor 0")
    m = abs(n)
    small = factorint(m, limit=TRIAL_LIMIT, use_rho=False, use_pm1=False, use_ecm=False)
    counts: dict[int, int] = {}
    rest = 1
    for p, e in small.items():
        if p < TRIAL_LIMIT or is_prime(p):
            counts[p] = counts.get(p, 0) + e
        else:
            rest *= p**e
    for p in _split_composite(rest, search_budget(max_steps)):
        counts[p] = counts.get(p, 0) + 1
    factors = tuple(sorted(counts.items()))
    certified = all(p < DETERMINISTIC_LIMIT for p, _ in factors)
    return FactoredInteger(n, factors, certified)


def valuation(r, p: int) -> int:
    """p-adic valuation of a nonzero rational (or integer)."""
    r = Fraction(r)
    if r == 0:
        raise PreconditionError("valuation of 0 is infinite")
    v = 0
    num, den = r.numerator, r.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def int_valuation(n: int, p: int) -> int:
    """Valuation of a nonzero integer; cheaper than :func:`valuation`."""
    if n == 0:
        raise PreconditionError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for _, e in factor(n))


@dataclass(frozen=True)
class SquareClass:
    """Class of a nonzero rational in Q^x / Q^x2, stored by its squarefree representative."""

    representative: int

    def __post_init__(self):
        if not is_squarefree(self.representative):
            raise PreconditionError(f"{self.representative} is not a squarefree nonzero integer")

    @property
    def is_trivial(self) -> bool:
        return self.representative == 1

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return squarefree_part(self.representative * other.representative)

    def __int__(self):
        return self.representative

    def __str__(self):
        return str(self.representative)


def squarefree_part(r) -> SquareClass:
    """Squarefree integer c with r / c a rational square."""
    r = Fraction(r)
    if r == 0:
        raise PreconditionError("0 has no square class")
    n = r.numerator * r.denominator
    core = -1 if n < 0 else 1
    if abs(n) > 1:
        for p, e in factor(n):
            if e % 2:
                core *= p
    return SquareClass(core)


def is_rational_square(r) -> bool:
    r = Fraction(r)
    if r < 0:
        return False
    if r == 0:
        return True
    a, b = r.numerator, r.denominator
    return isqrt(a) ** 2 == a and isqrt(b) ** 2 == b


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a | n) for arbitrary integers a, n."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * int(jacobi_symbol(a % n, n))


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """Reduced primitive positive definite forms (a, b, c) of discriminant D.

    Reduced means |b| <= a <= c, with b >= 0 whenever |b| = a or a = c.
    """
    if D >= 0 or D % 4 not in (0, 1):
        raise PreconditionError(f"{D} is not a negative discriminant")
    forms = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, abs(b)), c) == 1:
                forms.append((a, b, c))
        a += 1
    return forms


def class_number(D: int) -> int:
    """Number of reduced primitive binary quadratic forms of discriminant D < 0."""
    return len(reduced_forms(D))


def fundamental_discriminant_of_imaginary(n: int) -> int:
    """Discriminant of Q(sqrt(-n)) for a positive integer n."""
    if n <= 0:
        raise PreconditionError("n must be positive")
    m = -squarefree_part(n).representative
    return m if m % 4 == 1 else 4 * m


def iter_primes_in_progression(a: int, m: int, start: int = 2) -> Iterator[int]:
    """Ascending primes p >= start with p = a (mod m); does not check gcd(a, m)."""
    n = start + ((a - start) % m)
    while True:
        if is_prime(n):
            yield n
        n += m


def primes_in_progression(
    a: int,
    m: int,
    predicate: Callable[[int], bool] | None = None,
    count: int = 1,
    budget: int = 10**6,
) -> list[int]:
    """First ``count`` primes p = a (mod m) satisfying ``predicate``, ascending.

    ``budget`` bounds the number of terms of the progression inspected.
    """
    if m <= 0 or count <= 0:
        raise PreconditionError("m and count must be positive")
    if gcd(a, m) != 1:
        raise PreconditionError(f"gcd({a}, {m}) != 1: progression holds at most one prime")
    budget = search_budget(budget)
    out: list[int] = []
    n = 2 + ((a - 2) % m)
    for _ in range(budget):
        if is_prime(n) and (predicate is None or predicate(n)):
            out.append(n)
            if len(out) == count:
                return out
        n += m
    raise BudgetExhausted(
        f"found {len(out)} of {count} primes = {a} mod {m} within {budget} terms"
    )


def primes_below(n: int) -> list[int]:
    if n <= 2:
        return []
    sieve = bytearray([1]) * n
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(n - 1) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n, i)))
    return [i for i in range(n) if sieve[i]]


def is_prime_power(q: int) -> bool:
    if q < 2:
        return False
    if is_prime(q):
        return True
    f = factor(q)
    return len(f.factors) == 1


def prime_divisors(n) -> set[int]:
    """Primes dividing the numerator or denominator of a nonzero rational."""
    r = Fraction(n)
    out: set[int] = set()
    for part in (r.numerator, r.denominator):
        if abs(part) > 1:
            out.update(factor(part).primes)
    return out
