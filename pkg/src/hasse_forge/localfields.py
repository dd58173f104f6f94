"""Solvability of double-cover models and plane quartics over R and Q_p.

Double-cover models are the systems

    y^2 = P(x),    d w^2 = a f(x),    f = prod (x - x_i),

with P monic squarefree of odd degree (the elliptic cubic or a hyperelliptic
quintic and up).  Over Q_p the search runs in a reduced integral model
X = u^2 x, where both right-hand sides become integer polynomials.  Residue
disks of X in Z_p are split until each one is decided by a Hensel-stable
square class; disks with |x| > 1 are handled through t = 1/X, and the tiny
disks around t = 0 collapse to the square class of d a on the fiber over the
point at infinity.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt

import sympy
from sympy.ntheory.residue_ntheory import sqrt_mod

from . import poly
from .budget import search_budget
from .errors import IndeterminateError, PreconditionError
from .ntheory import (
    int_valuation,
    is_prime,
    is_prime_power,
    prime_divisors,
    primes_below,
    squarefree_part,
    valuation,
)


class PlaceKind(str, enum.Enum):
    REAL = "REAL"
    FINITE = "FINITE"


@dataclass(frozen=True)
class Place:
    kind: PlaceKind
    p: int | None = None

    def __post_init__(self):
        if self.kind is PlaceKind.FINITE:
            if self.p is None or not is_prime(self.p):
                raise PreconditionError(f"finite place needs a prime, got {self.p}")
        elif self.p is not None:
            raise PreconditionError("the real place carries no prime")

    @classmethod
    def real(cls) -> "Place":
        return cls(PlaceKind.REAL)

    @classmethod
    def finite(cls, p: int) -> "Place":
        return cls(PlaceKind.FINITE, p)

    @property
    def sort_key(self):
        return (0, 0) if self.kind is PlaceKind.REAL else (1, self.p)

    def __str__(self):
        return "inf" if self.kind is PlaceKind.REAL else str(self.p)


class Method(str, enum.Enum):
    REAL_INTERVAL = "REAL_INTERVAL"
    HENSEL_LIFT = "HENSEL_LIFT"
    COUNT_AND_LIFT = "COUNT_AND_LIFT"
    WEIL_BOUND = "WEIL_BOUND"
    DISK_EXHAUSTION = "DISK_EXHAUSTION"


@dataclass(frozen=True)
class LocalSolvabilityReport:
    place: Place
    solvable: bool
    method: Method
    witness: dict | None = None
    depth_used: int = 0

    def __post_init__(self):
        if self.solvable and self.method is not Method.WEIL_BOUND and self.witness is None:
            raise ValueError("a solvable report needs a witness unless certified by the Weil bound")


# --- square classes -------------------------------------------------------------------


def _unit_is_square(u: int, p: int) -> bool:
    if p == 2:
        return u % 8 == 1
    return pow(u % p, (p - 1) // 2, p) == 1


def is_square_local(r, v: Place) -> bool:
    """True iff the nonzero rational r is a square in R or Q_p."""
    r = Fraction(r)
    if r == 0:
        raise PreconditionError("0 has no square class")
    if v.kind is PlaceKind.REAL:
        return r > 0
    p = v.p
    k = valuation(r, p)
    if k % 2:
        return False
    unit = r / Fraction(p) ** k
    # unit = num/den with both prime to p; num/den is a square iff num*den is
    return _unit_is_square(unit.numerator * unit.denominator, p)


def _int_square_class(n: int, p: int) -> bool:
    """is_square_local for a nonzero integer, without Fraction overhead."""
    k = int_valuation(n, p)
    if k % 2:
        return False
    return _unit_is_square(n // p**k, p)


# --- Weil threshold -------------------------------------------------------------------


@dataclass(frozen=True)
class WeilThreshold:
    genus: int
    M1: int

    def __post_init__(self):
        if not is_prime_power(self.M1):
            raise ValueError(f"{self.M1} is not a prime power")


def weil_positive(q: int, g: int) -> bool:
    """q + 1 - 2 g sqrt(q) > 0, decided exactly as (q + 1)^2 > 4 g^2 q."""
    return (q + 1) ** 2 > 4 * g * g * q


def weil_threshold(g: int) -> WeilThreshold:
    """Least prime power M1 from which every prime power q has q + 1 - 2 g sqrt(q) > 0."""
    if g < 1:
        raise PreconditionError("genus must be at least 1")
    # (q+1)^2 - 4g^2 q is an upward parabola in q whose larger root is below 4 g^2,
    # so every failing q lies below 4 g^2 + 1.
    last_fail = 1
    for q in range(2, 4 * g * g + 2):
        if is_prime_power(q) and not weil_positive(q, g):
            last_fail = q
    q = last_fail + 1
    while not is_prime_power(q):
        q += 1
    return WeilThreshold(g, q)


# --- double cover models -------------------------------------------------------------


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


@dataclass(frozen=True)
class IntegralCover:
    """Reduced integral model of y^2 = P(x), d w^2 = a f(x) under X = u^2 x.

    base: P~(X) = u^(2n) P(X/u^2), monic integral, lowest degree first.
    roots: X_i = u^2 x_i, integers.  D: squarefree part of d*a, with d a = D s^2.
    The second equation becomes W^2 = D f~(X), f~ = prod (X - X_i).
    """

    base: tuple[int, ...]
    roots: tuple[int, ...]
    D: int
    u: int
    s: Fraction
    d: int
    scale: Fraction

    @property
    def n(self) -> int:
        return len(self.base) - 1

    @property
    def m(self) -> int:
        return len(self.roots)

    @property
    def second(self) -> list[int]:
        return [self.D * c for c in poly.from_roots(self.roots)]

    def chart_polys(self) -> tuple[list[int], list[int]]:
        """t-chart versions: t^(n+1) P~(1/t) and D t^e prod(1 - X_i t), e = m mod 2."""
        g1 = poly.reverse_padded(list(self.base), self.n + 1)
        e = self.m % 2
        g2 = poly.reverse_padded(self.second, self.m + e)
        return g1, g2


def integral_cover(model) -> IntegralCover:
    base = [Fraction(c) for c in model.base_coeffs()]
    n = len(base) - 1
    if base[-1] != 1 or n % 2 == 0:
        raise PreconditionError("base polynomial must be monic of odd degree")
    branch = [Fraction(x) for x in model.branch_x]
    u = 1
    primes = set()
    for c in base[:-1] + branch:
        if c:
            primes |= prime_divisors(Fraction(c.denominator))
    for p in primes:
        k = 0
        for j, c in enumerate(base[:-1]):
            if c:
                k = max(k, _ceil_div(-valuation(c, p), 2 * (n - j)))
        for x in branch:
            if x:
                k = max(k, _ceil_div(-valuation(x, p), 2))
        u *= p**k
    u2 = u * u
    P = [c * Fraction(u2) ** (n - j) for j, c in enumerate(base)]
    X = [x * u2 for x in branch]
    assert all(c.denominator == 1 for c in P + X)
    d = int(model.d.representative) if hasattr(model.d, "representative") else int(model.d)
    scale = Fraction(model.scale)
    D = squarefree_part(d * scale).representative
    s2 = d * scale / D
    s = Fraction(isqrt(s2.numerator), isqrt(s2.denominator))
    assert s * s == s2
    return IntegralCover(tuple(int(c) for c in P), tuple(int(x) for x in X), D, u, s, d, scale)


def model_bad_primes(model) -> set[int]:
    """Primes outside which the model reduces to a smooth genus-g double cover."""
    ic = integral_cover(model)
    bad = {2} | prime_divisors(ic.u) | prime_divisors(ic.D)
    bad |= prime_divisors(poly.discriminant(list(ic.base)))
    for X in ic.roots:
        bad |= prime_divisors(poly.evaluate(list(ic.base), X))
    for i, Xi in enumerate(ic.roots):
        for Xj in ic.roots[i + 1 :]:
            bad |= prime_divisors(Xi - Xj)
    return bad


def depth_max(model, p: int) -> int:
    """Precision cap for the residue-disk recursion at p."""
    ic = integral_cover(model)
    v2 = 1 if p == 2 else 0
    disc = poly.discriminant(list(ic.base))
    res = 1
    for X in ic.roots:
        res *= poly.evaluate(list(ic.base), X)
    vand = 1
    for i, Xi in enumerate(ic.roots):
        for Xj in ic.roots[i + 1 :]:
            vand *= Xi - Xj
    return 2 * v2 + valuation(disc, p) + int_valuation(res, p) + int_valuation(vand, p) + int_valuation(ic.D, p) + 3


_STABLE_SQ, _STABLE_NSQ, _UNSTABLE = "sq", "nsq", "unstable"


def _disk_status(G: list[int], c: int, k: int, p: int) -> tuple[str, list[int]]:
    """Square-class status of G on the disk c + p^k Z_p."""
    b = poly.taylor(G, c)
    if b[0] == 0:
        return _UNSTABLE, b
    v0 = int_valuation(b[0], p)
    slack = 3 if p == 2 else 1
    for j in range(1, len(b)):
        if b[j] and int_valuation(b[j], p) + k * j < v0 + slack:
            return _UNSTABLE, b
    return (_STABLE_SQ if _int_square_class(b[0], p) else _STABLE_NSQ), b


def _has_root_in_disk(b: list[int], k: int, p: int) -> bool:
    """Hensel: G(c) = b0, G'(c) = b1 with v(b0) > 2 v(b1) puts a root within p^(v(b0)-v(b1)) of c."""
    if b[0] == 0:
        return True
    if len(b) < 2 or b[1] == 0:
        return False
    v0, v1 = int_valuation(b[0], p), int_valuation(b[1], p)
    return v0 > 2 * v1 and v0 - v1 >= k


def _sqrt_padic(n: int, p: int, prec: int) -> tuple[int, int]:
    """(e, r) with n = p^(2e) * U and r^2 = U mod p^prec; n must be a nonzero p-adic square."""
    k = int_valuation(n, p)
    U = n // p**k
    r = sqrt_mod(U % p**prec, p**prec)
    if r is None:
        raise ValueError(f"{n} is not a square mod {p}^{prec}")
    return k // 2, r


def _witness_precision(p: int) -> int:
    return 5 if p == 2 else 3


def _point_witness(ic: IntegralCover, p: int, X0: Fraction, Y: Fraction, W: Fraction) -> dict:
    n, m = ic.n, ic.m
    N = _witness_precision(p)
    return {
        "kind": "point",
        "x": X0 / (ic.u * ic.u),
        "y": Y / Fraction(ic.u) ** n,
        "w": ic.s * W / (ic.d * Fraction(ic.u) ** m),
        "precision": N,
    }


def _x_chart_witness(ic: IntegralCover, p: int, X0: int) -> dict:
    N = _witness_precision(p)
    e1, r1 = _sqrt_padic(poly.evaluate(list(ic.base), X0), p, N)
    e2, r2 = _sqrt_padic(poly.evaluate(ic.second, X0), p, N)
    return _point_witness(ic, p, Fraction(X0), Fraction(p**e1 * r1), Fraction(p**e2 * r2))


def _t_chart_witness(ic: IntegralCover, p: int, t0: int) -> dict:
    N = _witness_precision(p)
    g1, g2 = ic.chart_polys()
    e1, r1 = _sqrt_padic(poly.evaluate(g1, t0), p, N)
    e2, r2 = _sqrt_padic(poly.evaluate(g2, t0), p, N)
    ee = ic.m % 2
    T = Fraction(t0)
    Y = p**e1 * r1 / T ** ((ic.n + 1) // 2)
    W = p**e2 * r2 / T ** ((ic.m + ee) // 2)
    return _point_witness(ic, p, 1 / T, Y, W)


def _infinity_witness(ic: IntegralCover, p: int) -> dict:
    N = _witness_precision(p)
    _, r = _sqrt_padic(ic.D, p, N)
    return {"kind": "infinity", "w": ic.s * r / ic.d, "precision": N}


class _DiskSearch:
    """Breadth-first residue-disk search for a pair of integer polynomials."""

    def __init__(self, F1, F2, p, allow_roots, ceiling, budget):
        self.F1, self.F2, self.p = F1, F2, p
        self.allow_roots = allow_roots
        self.ceiling = ceiling
        self.budget = budget
        self.depth_used = 0
        self.visited = 0

    def run(self, disks: list[tuple[int, int]]) -> int | None:
        """Return the center of an accepted disk, or None when every disk is refuted."""
        queue = deque(disks)
        while queue:
            c, k = queue.popleft()
            self.visited += 1
            if self.visited > self.budget:
                raise IndeterminateError(f"disk budget {self.budget} exhausted at p={self.p}", depth=k)
            self.depth_used = max(self.depth_used, k)
            s1, b1 = _disk_status(self.F1, c, k, self.p)
            s2, b2 = _disk_status(self.F2, c, k, self.p)
            if _STABLE_NSQ in (s1, s2):
                continue
            if s1 == s2 == _STABLE_SQ:
                return c
            if self.allow_roots and (
                (s1 == _STABLE_SQ and _has_root_in_disk(b2, k, self.p))
                or (s2 == _STABLE_SQ and _has_root_in_disk(b1, k, self.p))
            ):
                # A Q_p point sits on a ramification or 2-torsion fiber in this disk;
                # smooth points accumulate there, so a generic witness exists nearby.
                inner = _DiskSearch(self.F1, self.F2, self.p, False, self.ceiling + 64, self.budget)
                found = inner.run([(c, k)])
                self.depth_used = max(self.depth_used, inner.depth_used)
                if found is None:
                    raise AssertionError("Hensel root disk produced no generic point")
                return found
            if k >= self.ceiling:
                raise IndeterminateError(
                    f"undecided disk {c} + {self.p}^{k} Z_p at depth ceiling", depth=k
                )
            step = self.p**k
            for r in range(self.p):
                queue.append((c + r * step, k + 1))
        return None


def _real_sample_points(F1, F2) -> list[Fraction]:
    prod = poly.multiply(F1, F2)
    ivals = poly.real_root_intervals(prod)
    if not ivals:
        return [Fraction(0)]
    pts = [ivals[0][0] - 1]
    for (lo, hi), (lo2, hi2) in zip(ivals, ivals[1:]):
        pts.append((hi + lo2) / 2)
    pts.append(ivals[-1][1] + 1)
    for x in pts:
        if poly.evaluate(prod, x) == 0:
            raise AssertionError("real sample point landed on a root")
    return pts


def _real_bielliptic(model) -> LocalSolvabilityReport:
    P = [Fraction(c) for c in model.base_coeffs()]
    d = int(model.d.representative) if hasattr(model.d, "representative") else int(model.d)
    F2 = [Fraction(d) * Fraction(model.scale) * c for c in poly.from_roots([Fraction(x) for x in model.branch_x])]
    for x in _real_sample_points(P, F2):
        if poly.evaluate(P, x) > 0 and poly.evaluate(F2, x) > 0:
            return LocalSolvabilityReport(Place.real(), True, Method.REAL_INTERVAL, {"kind": "real", "x": x})
    return LocalSolvabilityReport(Place.real(), False, Method.REAL_INTERVAL)


def local_solvable_bielliptic(model, v: Place, *, disk_budget: int = 500_000) -> LocalSolvabilityReport:
    """Decide whether the (twisted) double-cover model has a point over the completion at v."""
    if v.kind is PlaceKind.REAL:
        return _real_bielliptic(model)
    p = v.p
    ic = integral_cover(model)
    if _int_square_class(ic.D, p):
        return LocalSolvabilityReport(v, True, Method.HENSEL_LIFT, _infinity_witness(ic, p), 0)
    dmax = depth_max(model, p)
    ceiling = 4 * dmax + 16
    budget = search_budget(disk_budget)
    F1, F2 = list(ic.base), ic.second
    search = _DiskSearch(F1, F2, p, True, ceiling, budget)
    try:
        X0 = search.run([(0, 0)])
        if X0 is not None:
            return LocalSolvabilityReport(v, True, Method.HENSEL_LIFT, _x_chart_witness(ic, p, X0), search.depth_used)
        g1, g2 = ic.chart_polys()
        shells = 3 if p == 2 else 1  # t with v(t) >= shells behaves like t = 0
        starts = [(p**j * r, j + 1) for j in range(1, shells) for r in range(1, p)]
        tsearch = _DiskSearch(g1, g2, p, False, ceiling, budget)
        t0 = tsearch.run(starts) if starts else None
    except IndeterminateError as exc:
        exc.place = v
        raise
    depth = max(search.depth_used, tsearch.depth_used)
    if t0 is not None:
        return LocalSolvabilityReport(v, True, Method.HENSEL_LIFT, _t_chart_witness(ic, p, t0), depth)
    return LocalSolvabilityReport(v, False, Method.DISK_EXHAUSTION, None, depth)


def _close_rel(lhs: Fraction, rhs: Fraction, p: int, N: int) -> bool:
    """rhs != 0, lhs != 0 and lhs / rhs = 1 mod p^N."""
    if lhs == 0 or rhs == 0:
        return False
    diff = lhs - rhs
    return diff == 0 or valuation(diff, p) >= valuation(rhs, p) + N


def check_bielliptic_witness(model, report: LocalSolvabilityReport) -> bool:
    """Re-check a solvable report's witness directly against the model's equations."""
    if not report.solvable:
        return report.witness is None
    if report.method is Method.WEIL_BOUND:
        return True
    w = report.witness
    if w is None:
        return False
    P = [Fraction(c) for c in model.base_coeffs()]
    d = Fraction(int(model.d.representative) if hasattr(model.d, "representative") else int(model.d))
    a = Fraction(model.scale)
    branch = [Fraction(x) for x in model.branch_x]
    if report.place.kind is PlaceKind.REAL:
        if w.get("kind") != "real":
            return False
        x = Fraction(w["x"])
        fx = poly.evaluate(poly.from_roots(branch), x)
        return poly.evaluate(P, x) > 0 and d * a * fx > 0
    p = report.place.p
    N = int(w.get("precision", 0))
    if N < (3 if p == 2 else 1):
        return False
    if w.get("kind") == "infinity":
        wv = Fraction(w["w"])
        return _close_rel(d * wv * wv, a, p, N)
    if w.get("kind") == "point":
        x, y, wv = Fraction(w["x"]), Fraction(w["y"]), Fraction(w["w"])
        fx = poly.evaluate(poly.from_roots(branch), x)
        return _close_rel(y * y, poly.evaluate(P, x), p, N) and _close_rel(d * wv * wv, a * fx, p, N)
    return False


# --- plane quartics -------------------------------------------------------------------


@dataclass(frozen=True)
class PlaneQuartic:
    """Homogeneous quartic form: {(i, j, k): coefficient of X^i Y^j Z^k}."""

    coeffs: tuple[tuple[tuple[int, int, int], int], ...]

    def __post_init__(self):
        clean = tuple(sorted((tuple(m), int(c)) for m, c in dict(self.coeffs).items() if c))
        if not clean:
            raise PreconditionError("quartic form is zero")
        for (i, j, k), _ in clean:
            if i + j + k != 4 or min(i, j, k) < 0:
                raise PreconditionError(f"monomial {(i, j, k)} is not of degree 4")
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_dict(cls, coeffs: dict) -> "PlaneQuartic":
        return cls(tuple(coeffs.items()))

    @classmethod
    def diagonal(cls, a: int, b: int, c: int) -> "PlaneQuartic":
        return cls.from_dict({(4, 0, 0): a, (0, 4, 0): b, (0, 0, 4): c})

    @classmethod
    def parse(cls, text: str) -> "PlaneQuartic":
        X, Y, Z = sympy.symbols("X Y Z")
        expr = sympy.sympify(text.replace("^", "**"), locals={"X": X, "Y": Y, "Z": Z})
        P = sympy.Poly(sympy.expand(expr), X, Y, Z)
        out = {}
        for mon, c in P.terms():
            if not c.is_integer:
                raise PreconditionError("quartic coefficients must be integers")
            out[tuple(mon)] = int(c)
        return cls.from_dict(out)

    @property
    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def __call__(self, X, Y, Z):
        return sum(c * X**i * Y**j * Z**k for (i, j, k), c in self.coeffs)

    def partial(self, var: int) -> dict:
        out = {}
        for mon, c in self.coeffs:
            if mon[var]:
                m = list(mon)
                m[var] -= 1
                out[tuple(m)] = out.get(tuple(m), 0) + c * mon[var]
        return out

    def gradient(self, X, Y, Z) -> tuple:
        return tuple(
            sum(c * X**i * Y**j * Z**k for (i, j, k), c in self.partial(v).items()) for v in range(3)
        )

    @property
    def is_diagonal(self) -> bool:
        return all(sorted(m) == [0, 0, 4] for m, _ in self.coeffs) and len(self.coeffs) == 3

    def is_smooth(self) -> bool:
        """No common projective zero of the three partials over Q-bar (char 0 Euler relation)."""
        X, Y, Z = sympy.symbols("X Y Z")
        grads = [sum(c * X**i * Y**j * Z**k for (i, j, k), c in self.partial(v).items()) for v in range(3)]
        for chart, free in ((Z, (X, Y)), (Y, (X, Z)), (X, (Y, Z))):
            eqs = [g.subs(chart, 1) for g in grads]
            G = sympy.groebner(eqs, *free, order="lex")
            if list(G.exprs) != [1]:
                return False
        return True

    def bad_primes(self) -> set[int]:
        """Bad-reduction superset, available for diagonal forms a X^4 + b Y^4 + c Z^4."""
        if not self.is_diagonal:
            raise PreconditionError("bad primes are only computed for diagonal quartics; pass them explicitly")
        out = {2}
        for _, c in self.coeffs:
            out |= prime_divisors(c)
        return out

    def __str__(self):
        names = "XYZ"
        terms = []
        for mon, c in self.coeffs:
            mono = "*".join(f"{names[v]}^{e}" for v, e in enumerate(mon) if e)
            terms.append(f"{c}*{mono}")
        return " + ".join(terms)


def _chart_poly(F: PlaneQuartic, chart: int, p: int) -> dict:
    """Integer polynomial G(s, t) of a chart of P^2(Z_p)."""
    out: dict = {}
    for (i, j, k), c in F.coeffs:
        if chart == 0:  # (s, t, 1)
            key, mult = (i, j), 1
        elif chart == 1:  # (s, 1, p t)
            key, mult = (i, k), p**k
        else:  # (1, p s, p t)
            key, mult = (j, k), p ** (j + k)
        out[key] = out.get(key, 0) + c * mult
    return {k: v for k, v in out.items() if v}


def _chart_point(chart: int, s: int, t: int, p: int) -> tuple[int, int, int]:
    if chart == 0:
        return (s, t, 1)
    if chart == 1:
        return (s, 1, p * t)
    return (1, p * s, p * t)


def _shift2(G: dict, s0: int, t0: int, h: int) -> dict:
    """Coefficients of G(s0 + h S, t0 + h T) in S, T."""
    out: dict = {}
    for (i, j), g in G.items():
        for a in range(i + 1):
            ca = comb(i, a) * s0 ** (i - a)
            for b in range(j + 1):
                val = g * ca * comb(j, b) * t0 ** (j - b) * h ** (a + b)
                if val:
                    out[(a, b)] = out.get((a, b), 0) + val
    return {k: v for k, v in out.items() if v}


def plane_depth_max(F: PlaneQuartic, p: int) -> int:
    return 2 * int_valuation(4, p) + sum(int_valuation(c, p) for _, c in F.coeffs) + 2


def _plane_padic(F: PlaneQuartic, p: int, budget: int) -> LocalSolvabilityReport:
    dmax = plane_depth_max(F, p)
    ceiling = 4 * dmax + 16
    depth_used = 0
    visited = 0
    for chart in range(3):
        G = _chart_poly(F, chart, p)
        queue = deque([(0, 0, 0)])
        while queue:
            s0, t0, k = queue.popleft()
            visited += 1
            if visited > budget:
                raise IndeterminateError(f"plane disk budget exhausted at p={p}", Place.finite(p), k)
            depth_used = max(depth_used, k)
            c = _shift2(G, s0, t0, p**k)
            c00 = c.get((0, 0), 0)
            point = _chart_point(chart, s0, t0, p)
            if c00 == 0:
                return LocalSolvabilityReport(
                    Place.finite(p), True, _plane_method(k), {"kind": "hensel", "point": point}, depth_used
                )
            v00 = int_valuation(c00, p)
            rest = [int_valuation(val, p) for key, val in c.items() if key != (0, 0)]
            if not rest or v00 < min(rest):
                continue
            if _plane_hensel_ok(F, point, p):
                return LocalSolvabilityReport(
                    Place.finite(p), True, _plane_method(k), {"kind": "hensel", "point": point}, depth_used
                )
            if k >= ceiling:
                raise IndeterminateError(f"plane search undecided at depth {k}", Place.finite(p), k)
            step = p**k
            for a in range(p):
                for b in range(p):
                    queue.append((s0 + a * step, t0 + b * step, k + 1))
    return LocalSolvabilityReport(Place.finite(p), False, Method.DISK_EXHAUSTION, None, depth_used)


def _plane_method(k: int) -> Method:
    return Method.COUNT_AND_LIFT if k <= 1 else Method.HENSEL_LIFT


def _plane_hensel_ok(F: PlaneQuartic, point, p: int) -> bool:
    """v(F(P)) > 2 v(dF/dX_j (P)) for some j, at a primitive integral point P."""
    if any(not isinstance(c, int) for c in point) or all(c % p == 0 for c in point):
        return False
    val = F(*point)
    if val == 0:
        return any(g != 0 for g in F.gradient(*point))
    v = int_valuation(val, p)
    return any(g != 0 and v > 2 * int_valuation(g, p) for g in F.gradient(*point))


def _plane_real(F: PlaneQuartic) -> LocalSolvabilityReport:
    place = Place.real()
    pos = neg = None
    rng = range(-3, 4)
    for X in rng:
        for Y in rng:
            for Z in rng:
                if (X, Y, Z) == (0, 0, 0):
                    continue
                val = F(X, Y, Z)
                if val == 0 and any(F.gradient(X, Y, Z)):
                    return LocalSolvabilityReport(place, True, Method.REAL_INTERVAL, {"kind": "zero", "point": (X, Y, Z)})
                if val > 0 and pos is None:
                    pos = (X, Y, Z)
                if val < 0 and neg is None:
                    neg = (X, Y, Z)
    if pos and neg:
        return LocalSolvabilityReport(place, True, Method.REAL_INTERVAL, {"kind": "sign_change", "pos": pos, "neg": neg})
    # Exact fallback: y-values where F(x, y, 1) gains real roots are bounded by
    # roots of its x-discriminant.
    x, y = sympy.symbols("x y")
    expr = sum(c * x**i * y**j for (i, j, k), c in F.coeffs)
    if F.as_dict.get((4, 0, 0), 0) == 0:
        return LocalSolvabilityReport(place, True, Method.REAL_INTERVAL, {"kind": "zero", "point": (1, 0, 0)})
    disc = sympy.Poly(sympy.discriminant(expr, x), y)
    samples = [Fraction(0)]
    cr = []
    if disc.degree() > 0:
        cr = [(Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))) for (lo, hi), _ in disc.intervals()]
        cr.sort()
    if disc.degree() > 0 and cr:
        samples = [cr[0][0] - 1] + [(a[1] + b[0]) / 2 for a, b in zip(cr, cr[1:])] + [cr[-1][1] + 1]
        samples = [t for t in samples if disc.eval(sympy.Rational(t.numerator, t.denominator)) != 0]
    for ys in samples:
        ys_s = sympy.Rational(ys.numerator, ys.denominator)
        px = sympy.Poly(expr.subs(y, ys_s), x)
        for (lo, hi), mult in px.intervals():
            if mult % 2 == 0:
                continue
            lo_f, hi_f = Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))
            if lo_f == hi_f:
                lo_f, hi_f = lo_f - Fraction(1, 10**9), hi_f + Fraction(1, 10**9)
            a_pt = _proj(lo_f, ys, 1)
            b_pt = _proj(hi_f, ys, 1)
            fa, fb = F(*a_pt), F(*b_pt)
            if fa * fb < 0:
                w = {"kind": "sign_change", "pos": a_pt if fa > 0 else b_pt, "neg": b_pt if fa > 0 else a_pt}
                return LocalSolvabilityReport(place, True, Method.REAL_INTERVAL, w)
    return LocalSolvabilityReport(place, False, Method.REAL_INTERVAL)


def _proj(xv: Fraction, yv: Fraction, zv) -> tuple[int, int, int]:
    den = xv.denominator * yv.denominator
    return (int(xv * den), int(yv * den), int(zv * den))


def local_solvable_plane(F: PlaneQuartic, v: Place, *, disk_budget: int = 2_000_000) -> LocalSolvabilityReport:
    """Decide whether the plane quartic F = 0 has a point in P^2 of the completion at v."""
    if v.kind is PlaceKind.REAL:
        return _plane_real(F)
    return _plane_padic(F, v.p, search_budget(disk_budget))


def check_plane_witness(F: PlaneQuartic, report: LocalSolvabilityReport) -> bool:
    if not report.solvable:
        return report.witness is None
    if report.method is Method.WEIL_BOUND:
        return True
    w = report.witness or {}
    kind = w.get("kind")
    if report.place.kind is PlaceKind.REAL:
        if kind == "zero":
            pt = tuple(int(c) for c in w["point"])
            return any(pt) and F(*pt) == 0 and any(F.gradient(*pt))
        if kind == "sign_change":
            return F(*map(int, w["pos"])) > 0 and F(*map(int, w["neg"])) < 0
        return False
    if kind != "hensel":
        return False
    return _plane_hensel_ok(F, tuple(int(c) for c in w["point"]), report.place.p)


# --- everywhere local -------------------------------------------------------------------


@dataclass(frozen=True)
class WeilArgument:
    genus: int
    M1: int
    excluded_primes: tuple[int, ...]
    statement: str


@dataclass(frozen=True)
class EverywhereLocalResult:
    reports: tuple[LocalSolvabilityReport, ...]
    weil: WeilArgument
    solvable: bool = field(default=False)

    @property
    def tested_places(self) -> list[Place]:
        return [r.place for r in self.reports]


def places_to_test(bad: set[int], genus: int, extra: set[int] = frozenset()) -> tuple[list[Place], WeilThreshold]:
    wt = weil_threshold(genus)
    primes = sorted(set(bad) | set(extra) | set(primes_below(wt.M1)))
    return [Place.real()] + [Place.finite(p) for p in primes], wt


def _weil_statement(wt: WeilThreshold, excluded: list[int]) -> str:
    return (
        f"every prime p >= {wt.M1} outside {{{', '.join(map(str, excluded))}}} is a prime of good reduction "
        f"with p + 1 - 2*{wt.genus}*sqrt(p) > 0, so the smooth reduction has an F_p-point that lifts by Hensel"
    )


def everywhere_local(model_or_quartic, genus: int | None = None, *, bad_primes: set[int] | None = None,
                     extra_primes: set[int] = frozenset()) -> EverywhereLocalResult:
    """Test every small place explicitly; certify the rest with the Weil bound.

    Small places: the real place, the model's bad primes (which include every
    prime dividing the twist), and every prime below M1(genus).
    """
    if isinstance(model_or_quartic, PlaneQuartic):
        F = model_or_quartic
        g = 3 if genus is None else genus
        bad = set(bad_primes) if bad_primes is not None else F.bad_primes()
        places, wt = places_to_test(bad, g, extra_primes)
        reports = [local_solvable_plane(F, v) for v in places]
    else:
        model = model_or_quartic
        g = model.genus if genus is None else genus
        bad = set(bad_primes) if bad_primes is not None else model_bad_primes(model)
        places, wt = places_to_test(bad, g, extra_primes)
        reports = [local_solvable_bielliptic(model, v) for v in places]
    excluded = sorted(set(bad) | set(extra_primes))
    weil = WeilArgument(g, wt.M1, tuple(excluded), _weil_statement(wt, excluded))
    reports = tuple(sorted(reports, key=lambda r: r.place.sort_key))
    return EverywhereLocalResult(reports, weil, all(r.solvable for r in reports))


def weil_report(p: int, wt: WeilThreshold, bad: set[int]) -> LocalSolvabilityReport:
    """Report for a single large good prime, certified without search."""
    if p < wt.M1 or p in bad:
        raise PreconditionError(f"{p} is not a large good prime")
    return LocalSolvabilityReport(Place.finite(p), True, Method.WEIL_BOUND, None, 0)
