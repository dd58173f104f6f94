"""Elliptic curves y^2 = x^3 + a x + b over Q: group law, torsion, reduction, Mordell-Weil evidence."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import gcd, isqrt
from pathlib import Path

from .budget import search_budget
from .errors import PreconditionError, RegistryMiss
from .ntheory import factor, kronecker, prime_divisors, valuation


@dataclass(frozen=True)
class EllipticCurveQ:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.disc == 0:
            raise PreconditionError(f"y^2 = x^3 + {self.a}x + {self.b} is singular")

    @property
    def disc(self) -> Fraction:
        return -16 * (4 * self.a**3 + 27 * self.b**2)

    def rhs(self, x) -> Fraction:
        x = Fraction(x)
        return x**3 + self.a * x + self.b

    def cubic(self) -> list[Fraction]:
        """Coefficients of x^3 + a x + b, lowest degree first."""
        return [self.b, self.a, Fraction(0), Fraction(1)]

    def contains(self, P: "EPoint") -> bool:
        return P.is_infinity or P.y**2 == self.rhs(P.x)

    @classmethod
    def from_long_weierstrass(cls, a1=0, a2=0, a3=0, a4=0, a6=0) -> "EllipticCurveQ":
        """Short model of y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 via c4, c6."""
        a1, a2, a3, a4, a6 = map(Fraction, (a1, a2, a3, a4, a6))
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        c4 = b2 * b2 - 24 * b4
        c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
        return cls(-27 * c4, -54 * c6)

    def __str__(self):
        return f"y^2 = x^3 + ({self.a})x + ({self.b})"


@dataclass(frozen=True)
class EPoint:
    x: Fraction | None = None
    y: Fraction | None = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("EPoint needs both coordinates or neither")
        if self.x is not None:
            object.__setattr__(self, "x", Fraction(self.x))
            object.__setattr__(self, "y", Fraction(self.y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self):
        return "O" if self.is_infinity else f"({self.x}, {self.y})"


INFINITY = EPoint()


def _check_on(E: EllipticCurveQ, *points: EPoint) -> None:
    for P in points:
        if not E.contains(P):
            raise PreconditionError(f"{P} is not on {E}")


def neg(E: EllipticCurveQ, P: EPoint) -> EPoint:
    _check_on(E, P)
    return P if P.is_infinity else EPoint(P.x, -P.y)


def add(E: EllipticCurveQ, P: EPoint, Q: EPoint) -> EPoint:
    """Chord-tangent sum in exact rational arithmetic."""
    _check_on(E, P, Q)
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    if P.x == Q.x:
        if P.y == -Q.y:
            return INFINITY
        lam = (3 * P.x * P.x + E.a) / (2 * P.y)
    else:
        lam = (Q.y - P.y) / (Q.x - P.x)
    x3 = lam * lam - P.x - Q.x
    y3 = lam * (P.x - x3) - P.y
    return EPoint(x3, y3)


def mul(E: EllipticCurveQ, P: EPoint, n: int) -> EPoint:
    if n < 0:
        return mul(E, neg(E, P), -n)
    result, base = INFINITY, P
    while n:
        if n & 1:
            result = add(E, result, base)
        base = add(E, base, base)
        n >>= 1
    return result


def integral_model(E: EllipticCurveQ) -> tuple[int, int, Fraction]:
    """Reduced integral model (A, B, u) with A = a u^4, B = b u^6; x' = u^2 x, y' = u^3 y.

    u is chosen so that A, B are integers and no prime p has p^4 | A and p^6 | B.
    """
    u = Fraction(1)
    for p in prime_divisors(E.a) | prime_divisors(E.b):
        needs = []
        if E.a:
            needs.append(-(valuation(E.a, p) // 4))
        if E.b:
            needs.append(-(valuation(E.b, p) // 6))
        u *= Fraction(p) ** max(needs)
    A = E.a * u**4
    B = E.b * u**6
    return int(A), int(B), u


def integral_disc(E: EllipticCurveQ) -> int:
    A, B, _ = integral_model(E)
    return -16 * (4 * A**3 + 27 * B**2)


def bad_primes(E: EllipticCurveQ) -> set[int]:
    """Primes dividing the reduced integral model's discriminant, together with 2."""
    return {2} | prime_divisors(integral_disc(E))


def count_points_mod_p(E: EllipticCurveQ, p: int) -> int:
    """#E(F_p) of the reduced integral model by brute force, including the point at infinity."""
    if p == 2 or integral_disc(E) % p == 0:
        raise PreconditionError(f"{p} is not an odd prime of good reduction for {E}")
    A, B, _ = integral_model(E)
    total = 1
    for x in range(p):
        total += 1 + kronecker((x * x * x + A * x + B) % p, p)
    return total


def _divisors(n: int) -> list[int]:
    n = abs(n)
    divs = [1]
    for p, e in factor(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def _integer_roots(coeffs: list[int]) -> list[int]:
    """Integer roots of a monic integer polynomial given lowest degree first."""
    roots = []
    while len(coeffs) > 1 and coeffs[0] == 0:
        coeffs = coeffs[1:]
        roots.append(0)
    if len(coeffs) > 1:
        for d in _divisors(coeffs[0]):
            for x in (d, -d):
                if sum(c * x**i for i, c in enumerate(coeffs)) == 0:
                    roots.append(x)
    return sorted(set(roots))


def _integral_points_lutz_nagell(A: int, B: int) -> list[tuple[int, int]]:
    """Integral candidates allowed by Lutz-Nagell: y = 0 or y^2 | 4A^3 + 27B^2."""
    delta = 4 * A**3 + 27 * B**2
    cands = []
    for x in _integer_roots([B, A, 0, 1]):
        cands.append((x, 0))
    roots_of_square_divs = [1]
    for p, e in factor(delta):
        roots_of_square_divs = [d * p**k for d in roots_of_square_divs for k in range(e // 2 + 1)]
    for y in sorted(roots_of_square_divs):
        for x in _integer_roots([B - y * y, A, 0, 1]):
            cands.append((x, y))
            cands.append((x, -y))
    return sorted(set(cands))


def torsion_subgroup(E: EllipticCurveQ) -> list[EPoint]:
    """Complete list of rational torsion points (Lutz-Nagell + orbit closure).

    A candidate is torsion iff its multiples stay inside the finite candidate
    set; orbits that leave it belong to points of infinite order.
    """
    A, B, u = integral_model(E)
    Ei = EllipticCurveQ(A, B)
    cand = {EPoint(x, y) for x, y in _integral_points_lutz_nagell(A, B)}
    torsion_int = [INFINITY]
    for P in sorted(cand, key=lambda P: (P.x, P.y)):
        Q, seen_ok = P, True
        for _ in range(len(cand) + 1):
            if Q.is_infinity:
                break
            if Q not in cand:
                seen_ok = False
                break
            Q = add(Ei, Q, P)
        else:
            seen_ok = False
        if seen_ok:
            torsion_int.append(P)
    return [INFINITY] + sorted(
        (EPoint(P.x / u**2, P.y / u**3) for P in torsion_int if not P.is_infinity),
        key=lambda P: (P.x, P.y),
    )


def point_order(E: EllipticCurveQ, P: EPoint, bound: int = 64) -> int | None:
    Q = P
    for n in range(1, bound + 1):
        if Q.is_infinity:
            return n
        Q = add(E, Q, P)
    return None


def naive_point_search(E: EllipticCurveQ, height_bound: int) -> list[EPoint]:
    """Rational points with naive x-height max(|num|, den) <= height_bound.

    x-coordinates of rational points on an integral model have square
    denominators, so only x = m / e^2 is scanned.
    """
    A, B, u = integral_model(E)
    H = search_budget(height_bound)
    found = []
    for e in range(1, isqrt(H) + 1):
        e2, e4, e6 = e * e, e**4, e**6
        for m in range(-H, H + 1):
            if gcd(m, e) != 1:
                continue
            val = m**3 + A * m * e4 + B * e6
            if val < 0:
                continue
            r = isqrt(val)
            if r * r != val:
                continue
            X, Y = Fraction(m, e2), Fraction(r, e**3)
            for yy in {Y, -Y}:
                P = EPoint(X / u**2, yy / u**3)
                if max(abs(P.x.numerator), P.x.denominator) <= height_bound:
                    found.append(P)
    return sorted(set(found), key=lambda P: (P.x, P.y))


class RankZeroStatus(str, enum.Enum):
    REGISTRY = "REGISTRY"
    ASSERTED = "ASSERTED"
    SEARCH_ONLY = "SEARCH_ONLY"


@dataclass(frozen=True)
class MWEvidence:
    curve: EllipticCurveQ
    torsion: tuple[EPoint, ...]
    rank_zero_status: RankZeroStatus
    provenance: str
    height_bound: int | None = None
    nontorsion_found: tuple[EPoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        pts = set(self.torsion)
        if INFINITY not in pts:
            raise ValueError("torsion list must contain the identity")
        for P in self.torsion:
            if neg(self.curve, P) not in pts:
                raise ValueError("torsion list not closed under negation")
            for Q in self.torsion:
                if add(self.curve, P, Q) not in pts:
                    raise ValueError("torsion list not closed under addition")

    @property
    def points_if_rank_zero(self) -> tuple[EPoint, ...]:
        """E(Q) under the rank-zero claim: exactly the torsion subgroup."""
        return self.torsion


REGISTRY_FILE = "rank_zero_registry.txt"


@dataclass(frozen=True)
class RegistryEntry:
    a: int
    b: int
    source: str


def load_registry(path: str | Path | None = None) -> list[RegistryEntry]:
    """Parse ``a,b,source-tag`` lines; ``#`` starts a comment."""
    if path is None:
        text = (resources.files("hasse_forge") / "data" / REGISTRY_FILE).read_text()
    else:
        text = Path(path).read_text()
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [s.strip() for s in line.split(",", 2)]
        if len(parts) != 3:
            raise ValueError(f"registry line {lineno}: expected a,b,source-tag")
        entries.append(RegistryEntry(int(parts[0]), int(parts[1]), parts[2]))
    return entries


def registry_lookup(E: EllipticCurveQ, path: str | Path | None = None) -> RegistryEntry | None:
    A, B, _ = integral_model(E)
    for entry in load_registry(path):
        if integral_model(EllipticCurveQ(entry.a, entry.b))[:2] == (A, B):
            return entry
    return None


def mw_evidence(
    E: EllipticCurveQ,
    policy: str = "registry_lookup",
    *,
    height_bound: int = 10**4,
    provenance: str = "",
    registry_path: str | Path | None = None,
) -> MWEvidence:
    """Graded evidence that E(Q) is finite, with its torsion always computed.

    policy is one of ``registry_lookup``, ``assert`` or ``search``.
    """
    torsion = tuple(torsion_subgroup(E))
    if policy == "registry_lookup":
        entry = registry_lookup(E, registry_path)
        if entry is None:
            raise RegistryMiss(f"{E} is not in the rank-zero registry")
        return MWEvidence(E, torsion, RankZeroStatus.REGISTRY, f"registry:{entry.source}")
    if policy == "assert":
        return MWEvidence(E, torsion, RankZeroStatus.ASSERTED, provenance or "caller assertion")
    if policy == "search":
        tors = set(torsion)
        extra = tuple(P for P in naive_point_search(E, height_bound) if P not in tors)
        note = (
            f"naive search to height {height_bound}: "
            + ("no non-torsion points" if not extra else f"{len(extra)} non-torsion points")
        )
        return MWEvidence(
            E, torsion, RankZeroStatus.SEARCH_ONLY, note, height_bound=height_bound, nontorsion_found=extra
        )
    raise PreconditionError(f"unknown evidence policy {policy!r}")
