"""Quadratic extensions of F_p(t): residue symbols, Kummer and Artin-Schreier twist selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import count as _count
from itertools import product
from typing import Callable, Iterator

from sympy import mobius

from .budget import search_budget
from .errors import BudgetExhausted, PreconditionError
from .ntheory import is_prime


@dataclass(frozen=True)
class FpPoly:
    """Polynomial over F_p, coefficients lowest degree first, no trailing zeros."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise PreconditionError(f"{self.p} is not prime")
        c = [x % self.p for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def t(cls, p: int) -> "FpPoly":
        return cls(p, (0, 1))

    @classmethod
    def const(cls, p: int, c: int) -> "FpPoly":
        return cls(p, (c,))

    @classmethod
    def parse(cls, p: int, text: str) -> "FpPoly":
        """Parse e.g. ``t^2 + 2t + 1`` or ``t2+t+2`` style input (variable t)."""
        text = text.replace(" ", "").replace("**", "^").replace("*", "")
        if not text:
            raise PreconditionError("empty polynomial")
        text = text.replace("-", "+-")
        coeffs: dict[int, int] = {}
        for term in filter(None, text.split("+")):
            sign = -1 if term.startswith("-") else 1
            term = term.lstrip("-")
            if "t" in term:
                c, _, e = term.partition("t")
                e = e.lstrip("^")
                c = int(c) if c else 1
                e = int(e) if e else 1
            else:
                c, e = int(term), 0
            coeffs[e] = coeffs.get(e, 0) + sign * c
        top = max(coeffs)
        return cls(p, tuple(coeffs.get(i, 0) for i in range(top + 1)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def _new(self, coeffs) -> "FpPoly":
        return FpPoly(self.p, tuple(coeffs))

    def _check(self, other: "FpPoly"):
        if other.p != self.p:
            raise PreconditionError("polynomials over different fields")

    def __add__(self, other: "FpPoly") -> "FpPoly":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return self._new(x + y for x, y in zip(a, b))

    def __neg__(self) -> "FpPoly":
        return self._new(-x for x in self.coeffs)

    def __sub__(self, other: "FpPoly") -> "FpPoly":
        return self + (-other)

    def __mul__(self, other: "FpPoly") -> "FpPoly":
        self._check(other)
        if self.is_zero or other.is_zero:
            return self._new(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return self._new(out)

    def scale(self, c: int) -> "FpPoly":
        return self._new(c * x for x in self.coeffs)

    def __divmod__(self, other: "FpPoly") -> tuple["FpPoly", "FpPoly"]:
        self._check(other)
        if other.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        p = self.p
        inv = pow(other.lead, -1, p)
        rem = list(self.coeffs)
        dq = other.degree
        quo = [0] * max(len(rem) - dq, 1)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] * inv % p
            if c:
                quo[i - dq] = c
                for j, y in enumerate(other.coeffs):
                    rem[i - dq + j] = (rem[i - dq + j] - c * y) % p
        return self._new(quo), self._new(rem[:dq] if dq > 0 else [])

    def __mod__(self, other: "FpPoly") -> "FpPoly":
        return divmod(self, other)[1]

    def __floordiv__(self, other: "FpPoly") -> "FpPoly":
        return divmod(self, other)[0]

    def monic(self) -> "FpPoly":
        if self.is_zero:
            return self
        return self.scale(pow(self.lead, -1, self.p))

    def powmod(self, e: int, modulus: "FpPoly") -> "FpPoly":
        result = self._new((1,)) % modulus if modulus.degree > 0 else self._new(())
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def derivative(self) -> "FpPoly":
        return self._new(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def divides(self, other: "FpPoly") -> bool:
        return (other % self).is_zero

    def sort_key(self) -> tuple:
        """Degree, then (c_{n-1}, ..., c_0) lexicographically."""
        return (self.degree, tuple(reversed(self.coeffs[:-1])))

    def __lt__(self, other: "FpPoly") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self):
        if self.is_zero:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "t" if i == 1 else f"t^{i}"
                terms.append(mono if c == 1 else f"{c}{mono}")
        return " + ".join(terms)


def poly_gcd(a: FpPoly, b: FpPoly) -> FpPoly:
    while not b.is_zero:
        a, b = b, a % b
    return a.monic()


def is_irreducible(q: FpPoly) -> bool:
    """No factor of degree <= deg/2: gcd(t^(p^i) - t, q) = 1 for i <= deg/2."""
    n = q.degree
    if n < 1:
        return False
    if n == 1:
        return True
    t = FpPoly.t(q.p)
    h = t % q
    for _ in range(1, n // 2 + 1):
        h = h.powmod(q.p, q)
        if poly_gcd(h - t, q).degree > 0:
            return False
    return True


def is_squarefree_poly(f: FpPoly) -> bool:
    if f.is_zero:
        return False
    if f.degree < 1:
        return True
    df = f.derivative()
    if df.is_zero:
        return False
    return poly_gcd(f, df).degree == 0


def _monic_of_degree(p: int, n: int) -> Iterator[FpPoly]:
    """Monic degree-n polynomials with (c_{n-1}, ..., c_0) in lexicographic order."""
    for high_first in product(range(p), repeat=n):
        yield FpPoly(p, tuple(reversed(high_first)) + (1,))


def iter_irreducibles(p: int, degree: int) -> Iterator[FpPoly]:
    if degree < 1:
        raise PreconditionError("degree must be at least 1")
    for f in _monic_of_degree(p, degree):
        if is_irreducible(f):
            yield f


def count_irreducibles(p: int, n: int) -> int:
    """Necklace formula (1/n) sum_{d | n} mu(d) p^(n/d)."""
    if n < 1:
        raise PreconditionError("degree must be at least 1")
    return sum(int(mobius(d)) * p ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def irreducibles(p: int, degree: int, count: int | None = None) -> list[FpPoly]:
    """First ``count`` monic irreducibles of the given degree (all of them when count is None)."""
    total = count_irreducibles(p, degree)
    if count is None:
        count = total
    if count > total:
        raise PreconditionError(f"only {total} monic irreducibles of degree {degree} over F_{p}")
    out = []
    for f in iter_irreducibles(p, degree):
        if len(out) == count:
            break
        out.append(f)
    return out


def iter_all_irreducibles(p: int, degrees: Iterator[int] | None = None) -> Iterator[FpPoly]:
    for n in degrees if degrees is not None else _count(1):
        yield from iter_irreducibles(p, n)


def factor_poly(f: FpPoly) -> list[tuple[FpPoly, int]]:
    """Monic irreducible factorization by trial division in degree order (small inputs)."""
    if f.is_zero:
        raise PreconditionError("cannot factor 0")
    rest = f.monic()
    out = []
    n = 1
    while rest.degree >= 1:
        if 2 * n > rest.degree:
            out.append((rest, 1))
            break
        for q in iter_irreducibles(f.p, n):
            e = 0
            while q.divides(rest):
                rest = rest // q
                e += 1
            if e:
                out.append((q, e))
        n += 1
    merged: dict[FpPoly, int] = {}
    for q, e in out:
        merged[q] = merged.get(q, 0) + e
    return sorted(merged.items(), key=lambda qe: qe[0].sort_key())


def poly_kronecker(a: FpPoly, q: FpPoly) -> int:
    """Quadratic residue symbol (a | q) for q irreducible over F_p, p odd."""
    if a.p != q.p:
        raise PreconditionError("polynomials over different fields")
    if q.p == 2:
        raise PreconditionError("residue symbol needs odd characteristic")
    if not is_irreducible(q):
        raise PreconditionError(f"{q} is not irreducible")
    r = a % q
    if r.is_zero:
        return 0
    e = (q.p ** q.degree - 1) // 2
    s = r.powmod(e, q)
    if s.coeffs == (1,):
        return 1
    if s.coeffs == (q.p - 1,):
        return -1
    raise AssertionError("Euler criterion produced neither 1 nor -1")


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    __str__ = __repr__

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


class ExtKind(str, enum.Enum):
    KUMMER = "KUMMER"
    ARTIN_SCHREIER = "ARTIN_SCHREIER"


def _kummer_ramified(d: FpPoly) -> frozenset:
    places = {q for q, _ in factor_poly(d)} if d.degree > 0 else set()
    if d.degree % 2:
        places.add(INFINITY)
    return frozenset(places)


@dataclass(frozen=True)
class QuadExtDescriptor:
    """F_p(t)(sqrt(d)) for p odd, or F_2(t)(X) with X^2 + X = 1/denominator."""

    kind: ExtKind
    poly: FpPoly
    ramified_places: frozenset = frozenset()

    def __post_init__(self):
        if self.kind is ExtKind.KUMMER:
            if self.poly.p == 2:
                raise PreconditionError("Kummer descriptors need odd characteristic")
            if not is_squarefree_poly(self.poly):
                raise PreconditionError(f"{self.poly} is not squarefree")
            expected = _kummer_ramified(self.poly)
        else:
            if self.poly.p != 2:
                raise PreconditionError("Artin-Schreier descriptors need characteristic 2")
            if not is_irreducible(self.poly):
                raise PreconditionError(f"{self.poly} is not irreducible")
            expected = frozenset({self.poly})
        if not self.ramified_places:
            object.__setattr__(self, "ramified_places", expected)
        elif frozenset(self.ramified_places) != expected:
            raise ValueError("ramified set disagrees with the descriptor type")

    @property
    def d(self) -> FpPoly:
        return self.poly

    @property
    def denominator(self) -> FpPoly:
        return self.poly


def ramified_places(desc: QuadExtDescriptor) -> frozenset:
    if desc.kind is ExtKind.KUMMER:
        return _kummer_ramified(desc.poly)
    return frozenset({desc.poly})


def kummer(d: FpPoly) -> QuadExtDescriptor:
    return QuadExtDescriptor(ExtKind.KUMMER, d)


def artin_schreier(denominator: FpPoly) -> QuadExtDescriptor:
    return QuadExtDescriptor(ExtKind.ARTIN_SCHREIER, denominator)


def select_kummer_d(
    p: int, m: FpPoly, count: int = 1, *, mode: str = "even", budget: int = 100_000
) -> list[FpPoly]:
    """Twist parameters d with F_p(t)(sqrt d) unramified at infinity and split in F_p(t)(sqrt m).

    mode "even": single even-degree irreducibles q with (m | q) = 1.
    mode "product": products of consecutive pairs of odd-degree irreducibles with (m | q) = 1.
    """
    if p == 2:
        raise PreconditionError("Kummer selection needs odd p")
    if m.p != p or m.is_zero or not is_squarefree_poly(m):
        raise PreconditionError("m must be a nonzero squarefree polynomial over F_p")
    if count < 1:
        raise PreconditionError("count must be positive")
    budget = search_budget(budget)
    seen = 0
    out: list[FpPoly] = []
    if mode == "even":
        degrees = _count(2, 2)
    elif mode == "product":
        degrees = _count(1, 2)
    else:
        raise PreconditionError(f"unknown Kummer mode {mode!r}")
    pending: FpPoly | None = None
    for q in iter_all_irreducibles(p, degrees):
        seen += 1
        if seen > budget:
            raise BudgetExhausted(f"Kummer selection inspected {budget} irreducibles")
        if poly_kronecker(m, q) != 1:
            continue
        if mode == "even":
            out.append(q)
        elif pending is None:
            pending = q
            continue
        else:
            out.append(pending * q)
            pending = None
        if len(out) == count:
            return out
    raise AssertionError("irreducible stream ended")


def select_artin_schreier(
    split_pred: Callable[[FpPoly], bool], count: int = 1, *, budget: int = 100_000
) -> list[QuadExtDescriptor]:
    """Descriptors X^2 + X = 1/q for the first irreducibles q over F_2 accepted by split_pred."""
    if count < 1:
        raise PreconditionError("count must be positive")
    budget = search_budget(budget)
    out = []
    for seen, q in enumerate(iter_all_irreducibles(2), 1):
        if seen > budget:
            raise BudgetExhausted(f"Artin-Schreier selection inspected {budget} irreducibles")
        if split_pred(q):
            out.append(artin_schreier(q))
            if len(out) == count:
                return out
    raise AssertionError("irreducible stream ended")
