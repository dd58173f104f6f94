from fractions import Fraction
from math import gcd, isqrt

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hasse_forge.elliptic import INFINITY, EllipticCurveQ, EPoint, mw_evidence
from hasse_forge.errors import PreconditionError
from hasse_forge.localfields import Place, everywhere_local, local_solvable_bielliptic, model_bad_primes
from hasse_forge.ntheory import SquareClass, is_prime, kronecker, squarefree_part
from hasse_forge.tahp import (
    BiellipticModel,
    HypothesisStatus,
    ScanStrategy,
    Verdict,
    certify,
    check_hypotheses,
    construct_bielliptic,
    construct_hyperelliptic_base,
    fiber_class,
    fixed_point_fields,
    grade,
    twist_candidates,
)

E1 = EllipticCurveQ(-1, 0)
E2 = EllipticCurveQ(0, 1)
E3 = EllipticCurveQ(0, -2)
P5 = (0, -1, 0, 0, 0, 1)  # x^5 - x


def test_construct_examples():
    assert construct_bielliptic(E1, 2).branch_x == (2,)
    assert construct_bielliptic(E1, 3).branch_x == (2, 4)
    assert construct_bielliptic(E2, 2).branch_x == (3,)
    m = construct_bielliptic(E1, 4, ScanStrategy(start=-10, step=1))
    assert len(m.branch_x) == 3 and m.genus == 4
    with pytest.raises(PreconditionError):
        construct_bielliptic(E1, 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(2, 5))
def test_construction_gives_distinct_nonsquare_classes(a, b, g):
    assume(4 * a**3 + 27 * b**2 != 0)
    m = construct_bielliptic(EllipticCurveQ(a, b), g)
    classes = [c.representative for c in fixed_point_fields(m)]
    assert len(set(classes)) == g - 1 and 1 not in classes
    assert m.genus == g and m.riemann_hurwitz_ok()
    assert check_hypotheses(m).h1.status is HypothesisStatus.PASS


def test_hyperelliptic_construction():
    m = construct_hyperelliptic_base(P5, 1)
    assert m.genus == 4 and m.base_genus == 2 and m.riemann_hurwitz_ok()
    m2 = construct_hyperelliptic_base(P5, 2)
    assert m2.genus == 5
    with pytest.raises(PreconditionError):
        construct_hyperelliptic_base((0, 0, 0, 0, 0, 1), 1)  # x^5 is not squarefree
    with pytest.raises(PreconditionError):
        construct_hyperelliptic_base((1, 0, 0, 0, 1), 1)  # even degree


def test_model_validation():
    with pytest.raises(PreconditionError):
        BiellipticModel(E1, (1,))  # under a 2-torsion point
    with pytest.raises(PreconditionError):
        BiellipticModel(E1, (2, 2))
    with pytest.raises(PreconditionError):
        BiellipticModel(E1, (2,), genus=3)
    with pytest.raises(PreconditionError):
        BiellipticModel(E1, ())


def test_hypotheses():
    rep = check_hypotheses(BiellipticModel(E1, (2,)), mw_evidence(E1))
    assert [h.status for h in rep.results] == [HypothesisStatus.PASS] * 4
    # P(2) = 9 on x^3 + 1: the fixed points are rational
    rep = check_hypotheses(BiellipticModel(E2, (2,)))
    assert rep.h1.status is HypothesisStatus.FAIL and not rep.structural_ok
    assert rep.h4.status is HypothesisStatus.FAIL
    rep = check_hypotheses(BiellipticModel(E3, (4,)), mw_evidence(E3, "assert"))
    assert rep.h4.status is HypothesisStatus.CONDITIONAL
    rep = check_hypotheses(BiellipticModel(E3, (4,)), mw_evidence(E3, "search", height_bound=100))
    assert rep.h4.status is HypothesisStatus.FAIL
    rep = check_hypotheses(construct_hyperelliptic_base(P5, 1))
    assert rep.h4.status is HypothesisStatus.CONDITIONAL


def test_h3_with_nonsquare_scale_uses_local_solvability():
    m = BiellipticModel(E1, (2,), scale=3)
    h3 = check_hypotheses(m).h3
    assert (h3.status is HypothesisStatus.PASS) == everywhere_local(m).solvable


def test_fixed_point_fields_example():
    assert [c.representative for c in fixed_point_fields(BiellipticModel(E1, (2, 4)))] == [6, 15]


def test_fiber_examples():
    m = BiellipticModel(E1, (2,))
    got = {P: fiber_class(m, 5, P).square_class.representative for P in (INFINITY, EPoint(-1, 0), EPoint(0, 0), EPoint(1, 0))}
    assert got == {INFINITY: 5, EPoint(-1, 0): -15, EPoint(0, 0): -10, EPoint(1, 0): -5}
    assert not fiber_class(m, 1, INFINITY).nonsquare
    with pytest.raises(PreconditionError):
        fiber_class(m, 5, EPoint(3, 3))


@given(st.integers(-200, 200).filter(bool), st.integers(1, 50))
def test_twist_class_invariance(d, s):
    m = BiellipticModel(E1, (2,))
    for P in (INFINITY, EPoint(0, 0), EPoint(1, 0)):
        assert fiber_class(m, d, P) == fiber_class(m, d * s * s, P)
    assert m.twist(d) == m.twist(Fraction(d, s * s))


@pytest.mark.parametrize("d,s", [(5, 3), (-7, 2), (13, 5)])
def test_local_solvability_depends_on_class_only(d, s):
    m = BiellipticModel(E1, (2,))
    for p in (2, 3, 5, 7, 13):
        a = local_solvable_bielliptic(m.twist(d), Place.finite(p)).solvable
        b = local_solvable_bielliptic(BiellipticModel(E1, (2,), scale=s * s, d=d), Place.finite(p)).solvable
        assert a == b


def test_twist_candidates_examples():
    m = BiellipticModel(E1, (2,))
    assert twist_candidates(m, 4) == [5, 29, 53, 73]
    assert twist_candidates(m, 4, permissive=True) == [2, 3, 5, 6]
    with pytest.raises(PreconditionError):
        twist_candidates(m, 0)


@pytest.mark.parametrize("curve,branch", [((-1, 0), (2,)), ((0, 1), (3,)), ((-1, 0), (2, 4)), ((0, 1), (3, 4))])
def test_twist_candidates_disjoint_from_bad_primes(curve, branch):
    m = BiellipticModel(EllipticCurveQ(*curve), branch)
    ms = [c.representative for c in fixed_point_fields(m)]
    bad = model_bad_primes(m)
    cands = twist_candidates(m, 8)
    assert cands == sorted(cands)
    for q in cands:
        assert is_prime(q) and q % 4 == 1 and q not in bad
        assert all(kronecker(mi, q) == 1 for mi in ms)


@settings(max_examples=30)
@given(st.lists(st.integers(-30, 30), min_size=1, max_size=5, unique=True))
def test_riemann_hurwitz(branch):
    assume(all(E1.rhs(x) != 0 for x in branch))
    m = BiellipticModel(E1, tuple(branch))
    assert m.riemann_hurwitz_ok()
    assert m.ramification_count == 2 * len(branch)


def test_certify_x3_minus_x():
    m = construct_bielliptic(E1, 2)
    c = certify(m, 5, mw_evidence(E1))
    assert c.verdict is Verdict.CERTIFIED and c.failure is None
    assert c.locally_solvable and c.globally_empty
    assert c.model.d == SquareClass(5)
    bad = certify(m, 1, mw_evidence(E1))
    assert bad.verdict is Verdict.FAILED and "rational fiber" in bad.failure


def _naive_points(model, d, H, max_e=30):
    """Rational x = m / e^2 with P(x) and d f(x) both squares."""
    out = []
    for e in range(1, max_e + 1):
        for num in range(-H, H + 1):
            if gcd(num, e) != 1:
                continue
            x = Fraction(num, e * e)
            v = model.base_value(x)
            if v < 0 or isqrt(v.numerator) ** 2 != v.numerator or isqrt(v.denominator) ** 2 != v.denominator:
                continue
            w = d * model.scale * model.f(x)
            if w == 0 or squarefree_part(w).representative == 1:
                out.append(x)
    return out


def test_certified_twist_has_no_small_points():
    m = construct_bielliptic(E1, 2)
    c = certify(m, 5, mw_evidence(E1))
    assert c.verdict is Verdict.CERTIFIED
    assert _naive_points(m, 5, 10**4) == []


def test_certify_grades():
    m = BiellipticModel(E3, (4,))
    c = certify(m, 41, mw_evidence(E3, "search", height_bound=100))
    assert c.locally_solvable and c.verdict is Verdict.FAILED and "non-torsion" in c.failure
    m2 = BiellipticModel(E1, (2,))
    sq = certify(m2, 5, mw_evidence(E1, "assert", provenance="caller"))
    assert sq.verdict is Verdict.CERTIFIED_CONDITIONAL
    assert grade(True, True, m2, None) is Verdict.FAILED
    assert grade(False, True, m2, mw_evidence(E1)) is Verdict.FAILED
    with pytest.raises(PreconditionError):
        certify(BiellipticModel(E2, (2,)), 5, mw_evidence(E2))


def test_certify_hyperelliptic_is_heuristic():
    m = construct_hyperelliptic_base(P5, 1)
    q = next(q for q in twist_candidates(m, 10) if everywhere_local(m.twist(q)).solvable)
    c = certify(m, q)
    assert c.verdict in (Verdict.HEURISTIC, Verdict.FAILED)
    if c.globally_empty:
        assert c.verdict is Verdict.HEURISTIC
    assert "naive search" in c.point_source
