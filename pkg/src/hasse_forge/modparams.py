"""Feasibility arithmetic for level pairs (M, N): congruence, Atkin-Lehner eigenvalue, class numbers."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from math import gcd
from typing import Iterator

from .budget import search_budget
from .errors import BudgetExhausted, PreconditionError
from .ntheory import (
    class_number,
    fundamental_discriminant_of_imaginary,
    is_prime,
    iter_primes_in_progression,
    kronecker,
)


@dataclass(frozen=True)
class LevelPair:
    M: int
    N: int
    p: int
    h_minus_N: int
    congruence_ok: bool
    eigenvalue_ok: bool
    residue_ok: bool

    def __post_init__(self):
        if self.congruence_ok != ((self.N + 1) % self.M == 0):
            raise ValueError("congruence flag disagrees with N mod M")
        if self.eigenvalue_ok != self.congruence_ok:
            raise ValueError("eigenvalue and congruence conditions must agree")

    @property
    def all_ok(self) -> bool:
        return self.congruence_ok and self.eigenvalue_ok and self.residue_ok


def _t2_plus_N_roots(N: int, M: int) -> list[int]:
    return [t for t in range(M) if (t * t + N) % M == 0]


def eigenvalue_condition(M: int, N: int) -> bool:
    """t^2 + N = (t - 1)(t + 1) in (Z/M)[t], decided by factoring t^2 + N over Z/M."""
    roots = _t2_plus_N_roots(N, M)
    if not roots:
        return False
    r1 = roots[0]
    r2 = (-r1) % M  # t^2 + N has no t-term, so the roots sum to 0
    # (t - r1)(t - r2) = t^2 - (r1 + r2) t + r1 r2 must reproduce t^2 + N
    if (r1 + r2) % M or (r1 * r2 - N) % M:
        raise AssertionError("factorization of t^2 + N does not recombine")
    return {r1, r2} == {1, M - 1}


def residue_condition(N: int, p: int) -> bool:
    """p = 1: no condition; odd p: -N a nonzero square mod p; p = 2: -N = 1 mod 8."""
    if p == 1:
        return True
    if p == 2:
        return (-N) % 8 == 1
    return kronecker(-N, p) == 1


def _check_p(p: int):
    if p != 1 and not is_prime(p):
        raise PreconditionError(f"p must be 1 or a prime, got {p}")


def admissible_pair(M: int, N: int, p: int = 1) -> LevelPair:
    for name, v in (("M", M), ("N", N)):
        if v == 2 or not is_prime(v):
            raise PreconditionError(f"{name} = {v} is not an odd prime")
    _check_p(p)
    if M == N or gcd(M, p) != 1 or gcd(N, p) != 1:
        raise PreconditionError("M, N and p must be pairwise coprime")
    h = class_number(fundamental_discriminant_of_imaginary(N))
    return LevelPair(
        M, N, p, h, (N + 1) % M == 0, eigenvalue_condition(M, N), residue_condition(N, p)
    )


def level_residue_classes(M: int, p: int) -> tuple[list[int], int]:
    """Classes a mod L (CRT-combined) describing N = -1 mod M plus the residue condition at p."""
    if p == 1:
        return [M - 1], M
    if p == 2:
        mods, classes = 8, [7]
    else:
        mods = p
        classes = sorted({(-(r * r)) % p for r in range(1, p)})
    L = M * mods
    out = []
    for c in classes:
        # N = -1 mod M and N = c mod mods
        for a in range(c, L, mods):
            if (a + 1) % M == 0:
                out.append(a)
                break
    return sorted(out), L


def _merged_primes(M: int, p: int) -> Iterator[int]:
    classes, L = level_residue_classes(M, p)
    streams = [iter_primes_in_progression(a, L, 3) for a in classes if gcd(a, L) == 1]
    return heapq.merge(*streams)


def search_levels(M: int, p: int = 1, class_bound: int = 0, count: int = 1, *, budget: int = 10**6) -> list[LevelPair]:
    """First primes N = -1 mod M, with -N split at p, and h(Q(sqrt(-N))) > class_bound."""
    if M == 2 or not is_prime(M):
        raise PreconditionError(f"M = {M} is not an odd prime")
    _check_p(p)
    if gcd(M, p) != 1:
        raise PreconditionError("M and p must be coprime")
    if count < 1:
        raise PreconditionError("count must be positive")
    budget = search_budget(budget)
    out = []
    for seen, N in enumerate(_merged_primes(M, p), 1):
        if seen > budget:
            raise BudgetExhausted(f"inspected {budget} primes, found {len(out)} of {count} levels")
        if N in (M, p):
            continue
        pair = admissible_pair(M, N, p)
        if pair.all_ok and pair.h_minus_N > class_bound:
            out.append(pair)
            if len(out) == count:
                return out
    raise AssertionError("prime stream ended")


def hasse_term(p: int, d: int) -> int:
    """The explicit Hasse-bound component (p^(12 d) + 1)^2; the full bound also involves opaque constants."""
    if not is_prime(p):
        raise PreconditionError(f"{p} is not prime")
    if d < 1:
        raise PreconditionError("d must be positive")
    return (p ** (12 * d) + 1) ** 2
