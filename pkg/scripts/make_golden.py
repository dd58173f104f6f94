"""Regenerate tests/golden/*.json.

Each certificate is produced by the pipeline and written only after every
explicitly tested local report has been reproduced by the brute-force residue
oracle in tests/oracles.py and every fiber class has been recomputed by hand
arithmetic below.  Run from the repository root:

    python3 scripts/make_golden.py
"""

from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import local_oracle_escalating, real_oracle  # noqa: E402

from hasse_forge.certs import PipelineConfig, run_pipeline, serialize  # noqa: E402
from hasse_forge.localfields import Method, PlaceKind, depth_max  # noqa: E402

GOLDEN = ROOT / "tests" / "golden"
FIXED_TIMESTAMP = "2026-01-01T00:00:00+00:00"

CONFIGS = {
    "x3_minus_x_genus2.json": PipelineConfig(curve=(Fraction(-1), Fraction(0)), genus=2),
    "x3_plus_1_genus2.json": PipelineConfig(curve=(Fraction(0), Fraction(1)), genus=2),
}


def oracle_check(cert) -> None:
    m = cert.model
    P = [int(c) for c in m.base_coeffs()]
    branch = [int(x) for x in m.branch_x]
    d = m.d.representative
    for r in cert.local_reports:
        if r.method is Method.WEIL_BOUND:
            continue
        if r.place.kind is PlaceKind.REAL:
            got = real_oracle(P, branch, d)
        else:
            got, _ = local_oracle_escalating(P, branch, d, r.place.p, depth_max(m, r.place.p))
        if got != r.solvable:
            raise SystemExit(f"oracle disagrees at {r.place}: oracle {got}, report {r.solvable}")
    for fc in cert.fiber_checks:
        if fc.point.is_infinity:
            value = Fraction(d)
        else:
            value = Fraction(d)
            for x in branch:
                value *= fc.point.x - x
        # nonsquare iff negative or the squarefree class is not 1
        is_sq = value > 0 and all(
            e % 2 == 0 for e in _exponents(value.numerator * value.denominator)
        )
        if is_sq == fc.nonsquare:
            raise SystemExit(f"fiber over {fc.point} disagrees with hand arithmetic")


def _exponents(n: int) -> list[int]:
    out, p = [], 2
    n = abs(n)
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append(e)
        p += 1
    if n > 1:
        out.append(1)
    return out


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, cfg in CONFIGS.items():
        cert = run_pipeline(cfg)
        oracle_check(cert)
        doc = serialize(cert, timestamp=FIXED_TIMESTAMP)
        (GOLDEN / name).write_text(doc.dumps())
        print(f"{name}: twist {cert.d}, verdict {cert.verdict.value}")


if __name__ == "__main__":
    main()
