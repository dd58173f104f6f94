"""Double covers with an involution, their quadratic twists, and Hasse-principle certificates.

A model is the curve C: y^2 = P(x), w^2 = a f(x) with f = prod (x - x_i), and
the involution w -> -w.  Its quotient is the base curve y^2 = P(x).  The twist
by d replaces the second equation with d w^2 = a f(x).  A rational point on
the twist lies over a rational point Q of the base, and over an affine Q the
fiber is rational iff d a f(x(Q)) is a square (over Q = O iff d a is).  When
the base has finitely many points, checking every fiber decides global
emptiness exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterator

import sympy

from . import poly
from .budget import search_budget
from .elliptic import INFINITY, EllipticCurveQ, EPoint, MWEvidence, RankZeroStatus
from .errors import BudgetExhausted, PreconditionError
from .localfields import (
    EverywhereLocalResult,
    LocalSolvabilityReport,
    WeilArgument,
    everywhere_local,
    is_square_local,
    model_bad_primes,
)
from .ntheory import (
    SquareClass,
    is_prime,
    is_rational_square,
    is_squarefree,
    kronecker,
    prime_divisors,
    squarefree_part,
)

SCHEMA_VERSION = "1.0"


def _as_class(d) -> SquareClass:
    if isinstance(d, SquareClass):
        return d
    return squarefree_part(Fraction(d))


@dataclass(frozen=True)
class BiellipticModel:
    """Genus-g double cover of y^2 = x^3 + a x + b branched over x = x_i."""

    E: EllipticCurveQ
    branch_x: tuple[Fraction, ...]
    scale: Fraction = Fraction(1)
    d: SquareClass = SquareClass(1)
    genus: int = 0

    def __post_init__(self):
        branch = tuple(Fraction(x) for x in self.branch_x)
        object.__setattr__(self, "branch_x", branch)
        object.__setattr__(self, "scale", Fraction(self.scale))
        object.__setattr__(self, "d", _as_class(self.d))
        if self.scale == 0:
            raise PreconditionError("scale must be nonzero")
        if len(set(branch)) != len(branch):
            raise PreconditionError("branch values must be distinct")
        for x in branch:
            if self.E.rhs(x) == 0:
                raise PreconditionError(f"branch value {x} lies under a 2-torsion point")
        g = len(branch) + 1
        if self.genus == 0:
            object.__setattr__(self, "genus", g)
        elif self.genus != g:
            raise PreconditionError(f"genus must be |branch| + 1 = {g}, got {self.genus}")
        if self.genus < 2:
            raise PreconditionError("genus must be at least 2")

    def base_coeffs(self) -> list[Fraction]:
        return self.E.cubic()

    def base_value(self, x) -> Fraction:
        return self.E.rhs(x)

    def f(self, x) -> Fraction:
        out = Fraction(1)
        for xi in self.branch_x:
            out *= Fraction(x) - xi
        return out

    def twist(self, d) -> "BiellipticModel":
        return replace(self, d=_as_class(d))

    @property
    def ramification_count(self) -> int:
        return 2 * len(self.branch_x)

    @property
    def base_genus(self) -> int:
        return 1

    def riemann_hurwitz_ok(self) -> bool:
        # 2g - 2 = 2 (2 g_base - 2) + #ramification points
        return 2 * self.genus - 2 == 2 * (2 * self.base_genus - 2) + self.ramification_count


@dataclass(frozen=True)
class HyperellipticBaseModel:
    """Double cover of y^2 = P(x) (P monic squarefree, degree 2 g0 + 1) branched over x = x_i."""

    P: tuple[Fraction, ...]
    branch_x: tuple[Fraction, ...]
    scale: Fraction = Fraction(1)
    d: SquareClass = SquareClass(1)
    genus: int = 0

    def __post_init__(self):
        P = tuple(Fraction(c) for c in self.P)
        object.__setattr__(self, "P", P)
        branch = tuple(Fraction(x) for x in self.branch_x)
        object.__setattr__(self, "branch_x", branch)
        object.__setattr__(self, "scale", Fraction(self.scale))
        object.__setattr__(self, "d", _as_class(self.d))
        check_base_polynomial(P)
        if self.scale == 0:
            raise PreconditionError("scale must be nonzero")
        if not branch or len(set(branch)) != len(branch):
            raise PreconditionError("branch values must be nonempty and distinct")
        for x in branch:
            if poly.evaluate(list(P), x) == 0:
                raise PreconditionError(f"branch value {x} is a root of P")
        g = 2 * self.base_genus + len(branch) - 1
        if self.genus == 0:
            object.__setattr__(self, "genus", g)
        elif self.genus != g:
            raise PreconditionError(f"genus must be 2 g0 + |branch| - 1 = {g}, got {self.genus}")

    @property
    def base_genus(self) -> int:
        return (len(self.P) - 2) // 2

    def base_coeffs(self) -> list[Fraction]:
        return list(self.P)

    def base_value(self, x) -> Fraction:
        return poly.evaluate(list(self.P), Fraction(x))

    def f(self, x) -> Fraction:
        out = Fraction(1)
        for xi in self.branch_x:
            out *= Fraction(x) - xi
        return out

    def twist(self, d) -> "HyperellipticBaseModel":
        return replace(self, d=_as_class(d))

    @property
    def ramification_count(self) -> int:
        # f has a pole of even order 2 deg f at the point at infinity, so only the x_i ramify
        return 2 * len(self.branch_x)

    def riemann_hurwitz_ok(self) -> bool:
        return 2 * self.genus - 2 == 2 * (2 * self.base_genus - 2) + self.ramification_count


def check_base_polynomial(P) -> None:
    P = [Fraction(c) for c in P]
    n = len(P) - 1
    if n < 5 or n % 2 == 0:
        raise PreconditionError("base polynomial must have odd degree at least 5")
    if P[-1] != 1:
        raise PreconditionError("base polynomial must be monic")
    x = sympy.Symbol("x")
    expr = poly.to_sympy(P, x)
    if sympy.degree(sympy.gcd(expr, sympy.diff(expr, x)), x) > 0:
        raise PreconditionError("base polynomial is not squarefree")


# --- construction -------------------------------------------------------------------


@dataclass(frozen=True)
class ScanStrategy:
    """Branch values are x = start, start + step, ... ; budget bounds the scan length."""

    start: int = 2
    step: int = 1
    budget: int = 10_000


def _scan_branch(value, count: int, strategy: ScanStrategy) -> list[Fraction]:
    taken: set[int] = set()
    chosen: list[Fraction] = []
    x = strategy.start
    for _ in range(search_budget(strategy.budget)):
        v = value(x)
        if v != 0:
            m = squarefree_part(v).representative
            if m != 1 and m not in taken:
                taken.add(m)
                chosen.append(Fraction(x))
                if len(chosen) == count:
                    return chosen
        x += strategy.step
    raise BudgetExhausted(f"found {len(chosen)} of {count} branch values in {strategy.budget} steps")


def construct_bielliptic(E: EllipticCurveQ, g: int, strategy: ScanStrategy = ScanStrategy()) -> BiellipticModel:
    """Pick g-1 branch values whose fibers on E generate distinct quadratic fields."""
    if g < 2:
        raise PreconditionError("genus must be at least 2")
    branch = _scan_branch(E.rhs, g - 1, strategy)
    return BiellipticModel(E, tuple(branch), Fraction(1), SquareClass(1), g)


def construct_hyperelliptic_base(P, d_count: int, strategy: ScanStrategy = ScanStrategy()) -> HyperellipticBaseModel:
    if d_count < 1:
        raise PreconditionError("need at least one branch value")
    P = tuple(Fraction(c) for c in P)
    check_base_polynomial(P)
    branch = _scan_branch(lambda x: poly.evaluate(list(P), Fraction(x)), d_count, strategy)
    return HyperellipticBaseModel(P, tuple(branch))


# --- hypotheses -------------------------------------------------------------------


class HypothesisStatus(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    CONDITIONAL = "CONDITIONAL"


@dataclass(frozen=True)
class HypothesisResult:
    status: HypothesisStatus
    explanation: str
    evidence_ref: str | None = None


@dataclass(frozen=True)
class HypothesisReport:
    h1: HypothesisResult
    h2: HypothesisResult
    h3: HypothesisResult
    h4: HypothesisResult

    @property
    def results(self) -> tuple[HypothesisResult, ...]:
        return (self.h1, self.h2, self.h3, self.h4)

    @property
    def structural_ok(self) -> bool:
        """(i)-(iii) pass; (iv) is graded separately."""
        return all(h.status is HypothesisStatus.PASS for h in (self.h1, self.h2, self.h3))


def fixed_point_fields(model) -> list[SquareClass]:
    """Square classes m_i with the fixed points over x_i defined over Q(sqrt(m_i))."""
    out = []
    for x in model.branch_x:
        v = model.base_value(x)
        if is_rational_square(v):
            raise PreconditionError(f"P({x}) = {v} is a square: the fixed points over it are rational")
        out.append(squarefree_part(v))
    return out


def _check_h3(model) -> HypothesisResult:
    untwisted = model.twist(1)
    if is_rational_square(untwisted.scale):
        return HypothesisResult(
            HypothesisStatus.PASS, "the fiber over the point at infinity splits into two rational points"
        )
    res = everywhere_local(untwisted)
    if res.solvable:
        return HypothesisResult(HypothesisStatus.PASS, "untwisted model is solvable at every place", "everywhere_local")
    bad = [str(r.place) for r in res.reports if not r.solvable]
    return HypothesisResult(HypothesisStatus.FAIL, f"untwisted model has no points at {', '.join(bad)}")


def _check_h4(model, mw: MWEvidence | None) -> HypothesisResult:
    if isinstance(model, HyperellipticBaseModel):
        return HypothesisResult(
            HypothesisStatus.CONDITIONAL,
            "finiteness of the base curve's points is known (genus >= 2) but not effective; fibers are checked over searched points",
            "naive search",
        )
    if mw is None:
        return HypothesisResult(HypothesisStatus.FAIL, "no Mordell-Weil evidence supplied")
    if mw.curve != model.E:
        return HypothesisResult(HypothesisStatus.FAIL, "evidence refers to a different curve")
    if mw.rank_zero_status is RankZeroStatus.REGISTRY:
        return HypothesisResult(HypothesisStatus.PASS, f"rank zero from registry, torsion order {len(mw.torsion)}", mw.provenance)
    if mw.rank_zero_status is RankZeroStatus.SEARCH_ONLY and mw.nontorsion_found:
        return HypothesisResult(HypothesisStatus.FAIL, "a non-torsion point was found: the base has infinitely many points", mw.provenance)
    return HypothesisResult(HypothesisStatus.CONDITIONAL, f"rank zero {mw.rank_zero_status.value.lower()}", mw.provenance)


def check_hypotheses(model, mw: MWEvidence | None = None) -> HypothesisReport:
    nonsq = [x for x in model.branch_x if not is_rational_square(model.base_value(x))]
    if len(nonsq) == len(model.branch_x):
        fields = ", ".join(str(m) for m in fixed_point_fields(model))
        h1 = HypothesisResult(HypothesisStatus.PASS, f"fixed points are defined over Q(sqrt(m)) for m in [{fields}]")
    else:
        bad = [str(x) for x in model.branch_x if x not in nonsq]
        h1 = HypothesisResult(HypothesisStatus.FAIL, f"rational fixed points over x = {', '.join(bad)}")
    if model.branch_x:
        h2 = HypothesisResult(HypothesisStatus.PASS, f"{2 * len(model.branch_x)} geometric fixed points")
    else:
        h2 = HypothesisResult(HypothesisStatus.FAIL, "no branch values: the involution has no fixed points")
    return HypothesisReport(h1, h2, _check_h3(model), _check_h4(model, mw))


# --- twists -------------------------------------------------------------------


def twist_candidates(model, count: int, *, permissive: bool = False, budget: int = 10**6) -> list[int]:
    """Candidate twist parameters, ascending.

    Default: primes q = 1 mod 4 splitting every fixed-point field Q(sqrt(m_i)),
    outside the untwisted model's bad primes.  Permissive mode returns every
    positive squarefree d > 1.
    """
    if count < 1:
        raise PreconditionError("count must be positive")
    ms = [m.representative for m in fixed_point_fields(model)]
    out: list[int] = []
    if permissive:
        n = 2
        for _ in range(search_budget(budget)):
            if is_squarefree(n):
                out.append(n)
                if len(out) == count:
                    return out
            n += 1
        raise BudgetExhausted("twist budget exhausted")
    bad = model_bad_primes(model.twist(1))
    q = 5
    for _ in range(search_budget(budget)):
        if q not in bad and is_prime(q) and all(kronecker(m, q) == 1 for m in ms):
            out.append(q)
            if len(out) == count:
                return out
        q += 4
    raise BudgetExhausted(f"found {len(out)} of {count} twist candidates")


@dataclass(frozen=True)
class FiberCheck:
    point: EPoint
    square_class: SquareClass
    nonsquare: bool


def fiber_class(model, d, Q0: EPoint) -> FiberCheck:
    """Square class governing rationality of the fiber over Q0 on the d-twist."""
    dc = _as_class(d)
    if Q0.is_infinity:
        value = dc.representative * model.scale
    else:
        if model.base_value(Q0.x) != Q0.y**2:
            raise PreconditionError(f"{Q0} is not on the base curve")
        fx = model.f(Q0.x)
        if fx == 0:
            raise PreconditionError(f"{Q0} lies under a branch point")
        value = dc.representative * model.scale * fx
    cls = squarefree_part(value)
    return FiberCheck(Q0, cls, not cls.is_trivial)


# --- certificates -------------------------------------------------------------------


class Verdict(str, enum.Enum):
    CERTIFIED = "CERTIFIED"
    CERTIFIED_CONDITIONAL = "CERTIFIED_CONDITIONAL"
    HEURISTIC = "HEURISTIC"
    FAILED = "FAILED"


@dataclass(frozen=True)
class HPCertificate:
    model: object
    d: SquareClass
    local_reports: tuple[LocalSolvabilityReport, ...]
    weil_argument: WeilArgument
    fiber_checks: tuple[FiberCheck, ...]
    mw_evidence: MWEvidence | None
    verdict: Verdict
    failure: str | None = None
    schema_version: str = SCHEMA_VERSION
    point_source: str = "torsion"

    @property
    def locally_solvable(self) -> bool:
        return all(r.solvable for r in self.local_reports)

    @property
    def globally_empty(self) -> bool:
        return all(fc.nonsquare for fc in self.fiber_checks)


def grade(local_ok: bool, fibers_ok: bool, model, mw: MWEvidence | None) -> Verdict:
    """Verdict from the local suite, the fiber suite and the evidence grade."""
    if not (local_ok and fibers_ok):
        return Verdict.FAILED
    if isinstance(model, HyperellipticBaseModel):
        return Verdict.HEURISTIC
    if mw is None or (mw.rank_zero_status is RankZeroStatus.SEARCH_ONLY and mw.nontorsion_found):
        return Verdict.FAILED
    return {
        RankZeroStatus.REGISTRY: Verdict.CERTIFIED,
        RankZeroStatus.ASSERTED: Verdict.CERTIFIED_CONDITIONAL,
        RankZeroStatus.SEARCH_ONLY: Verdict.HEURISTIC,
    }[mw.rank_zero_status]


def hyperelliptic_points(model: HyperellipticBaseModel, height_bound: int) -> list[EPoint]:
    """Rational points of y^2 = P(x) with x = m / e^2, |m| <= H, e^2 <= H, plus O."""
    found = [INFINITY]
    for e in range(1, isqrt(height_bound) + 1):
        for m in range(-height_bound, height_bound + 1):
            if gcd(m, e) != 1:
                continue
            x = Fraction(m, e * e)
            v = model.base_value(x)
            if is_rational_square(v):
                y = Fraction(isqrt(v.numerator), isqrt(v.denominator))
                found.append(EPoint(x, y))
                if y:
                    found.append(EPoint(x, -y))
    return found


def base_points(model, mw: MWEvidence | None, height_bound: int = 200) -> tuple[tuple[EPoint, ...], str]:
    if isinstance(model, HyperellipticBaseModel):
        return tuple(hyperelliptic_points(model, height_bound)), f"naive search to height {height_bound}"
    pts = list(mw.torsion) + list(mw.nontorsion_found)
    return tuple(pts), "torsion" if not mw.nontorsion_found else "torsion and searched points"


def certify(model, d, mw: MWEvidence | None = None, *, height_bound: int = 200) -> HPCertificate:
    """Check the d-twist for points everywhere locally and no rational points."""
    hyp = check_hypotheses(model, mw)
    if not hyp.structural_ok:
        failed = [f"h{i}: {h.explanation}" for i, h in enumerate(hyp.results[:3], 1) if h.status is not HypothesisStatus.PASS]
        raise PreconditionError("hypotheses fail: " + "; ".join(failed))
    dc = _as_class(d)
    twisted = model.twist(dc)
    res: EverywhereLocalResult = everywhere_local(twisted, extra_primes=prime_divisors(dc.representative))
    pts, source = base_points(model, mw, height_bound)
    fibers = tuple(fiber_class(model, dc, P) for P in pts)
    verdict = grade(res.solvable, all(fc.nonsquare for fc in fibers), model, mw)
    failure = None
    if not res.solvable:
        failure = "no local points at " + ", ".join(str(r.place) for r in res.reports if not r.solvable)
    elif not all(fc.nonsquare for fc in fibers):
        failure = "rational fiber over " + ", ".join(str(fc.point) for fc in fibers if not fc.nonsquare)
    elif verdict is Verdict.FAILED:
        failure = hyp.h4.explanation
    return HPCertificate(twisted, dc, res.reports, res.weil, fibers, mw, verdict, failure, SCHEMA_VERSION, source)


def iter_certificates(model, mw, count: int, *, permissive: bool = False) -> Iterator[HPCertificate]:
    for q in twist_candidates(model, count, permissive=permissive):
        yield certify(model, q, mw)
