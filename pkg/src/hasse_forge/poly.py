"""Small dense univariate polynomial helpers (lowest degree first)."""

from __future__ import annotations

from fractions import Fraction
from math import comb

import sympy


def evaluate(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def derivative(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:]


def multiply(f, g):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return out


def from_roots(roots):
    out = [1]
    for r in roots:
        out = multiply(out, [-r, 1])
    return out


def taylor(coeffs, c):
    """Coefficients b_j of G(c + z) = sum b_j z^j."""
    n = len(coeffs)
    return [sum(coeffs[i] * comb(i, j) * c ** (i - j) for i in range(j, n)) for j in range(n)]


def reverse_padded(coeffs, degree):
    """t^degree * G(1/t) for deg G <= degree."""
    padded = list(coeffs) + [0] * (degree + 1 - len(coeffs))
    return padded[::-1]


def to_sympy(coeffs, var):
    return sum(sympy.Rational(Fraction(c).numerator, Fraction(c).denominator) * var**i for i, c in enumerate(coeffs))


def discriminant(coeffs) -> Fraction:
    x = sympy.Symbol("x")
    d = sympy.discriminant(to_sympy(coeffs, x), x)
    d = sympy.Rational(d)
    return Fraction(int(d.p), int(d.q))


def real_root_intervals(coeffs) -> list[tuple[Fraction, Fraction]]:
    """Rational isolating intervals of the real roots, sorted and pairwise separated by a gap."""
    x = sympy.Symbol("x")
    P = sympy.Poly(to_sympy(coeffs, x), x, domain="QQ")
    if P.degree() <= 0:
        return []
    eps = None
    while True:
        out = sorted(
            (Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q)))
            for (lo, hi), _mult in P.intervals(eps=eps)
        )
        if all(a[1] < b[0] for a, b in zip(out, out[1:])):
            return out
        eps = Fraction(1, 16) if eps is None else eps / 16
