"""Command-line entry point ``hasse-forge``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .certs import (
    PipelineConfig,
    load_document,
    parse_kv_config,
    run_pipeline,
    serialize,
    verify_certificate,
)
from .elliptic import EllipticCurveQ, mw_evidence
from .errors import BudgetExhausted, HasseForgeError, IndeterminateError, SchemaError
from .ffield import FpPoly, kummer, select_artin_schreier, select_kummer_d
from .localfields import (
    Place,
    PlaneQuartic,
    everywhere_local,
    local_solvable_bielliptic,
    local_solvable_plane,
)
from .modparams import admissible_pair, hasse_term, search_levels
from .tahp import (
    BiellipticModel,
    HyperellipticBaseModel,
    ScanStrategy,
    Verdict,
    certify,
    construct_bielliptic,
    twist_candidates,
)

EXIT_CERTIFIED = 0
EXIT_USAGE = 1
EXIT_CONDITIONAL = 2
EXIT_FAILED = 3
EXIT_INDETERMINATE = 4

VERDICT_EXIT = {
    Verdict.CERTIFIED: EXIT_CERTIFIED,
    Verdict.CERTIFIED_CONDITIONAL: EXIT_CONDITIONAL,
    Verdict.HEURISTIC: EXIT_CONDITIONAL,
    Verdict.FAILED: EXIT_FAILED,
}


# --- model files -------------------------------------------------------------------


def parse_model_text(text: str):
    """Parse a model file.

    Lines: ``curve a b``, ``hyperelliptic c0 c1 ... cn`` (lowest degree first),
    ``branch x1 x2 ...``, ``twist d``, ``scale a``, ``quartic <form in X, Y, Z>``,
    ``bad p1 p2 ...`` (quartics only).  ``#`` starts a comment.
    """
    fields: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key in fields:
            raise HasseForgeError(f"model line {lineno}: duplicate {key!r}")
        fields[key] = rest.split() if key != "quartic" else [rest.strip()]
    known = {"curve", "hyperelliptic", "branch", "twist", "scale", "quartic", "bad"}
    unknown = set(fields) - known
    if unknown:
        raise HasseForgeError(f"unknown model keys: {', '.join(sorted(unknown))}")
    if "quartic" in fields:
        F = PlaneQuartic.parse(fields["quartic"][0])
        bad = {int(p) for p in fields["bad"]} if "bad" in fields else None
        return F, bad
    branch = tuple(Fraction(x) for x in fields.get("branch", []))
    d = int(fields.get("twist", ["1"])[0])
    scale = Fraction(fields.get("scale", ["1"])[0])
    if "curve" in fields:
        a, b = (Fraction(c) for c in fields["curve"])
        return BiellipticModel(EllipticCurveQ(a, b), branch, scale, d)
    if "hyperelliptic" in fields:
        P = tuple(Fraction(c) for c in fields["hyperelliptic"])
        return HyperellipticBaseModel(P, branch, scale, d)
    raise HasseForgeError("model file needs a curve, hyperelliptic or quartic line")


def load_model(path):
    return parse_model_text(Path(path).read_text())


def format_model(m) -> str:
    lines = []
    if isinstance(m, BiellipticModel):
        lines.append(f"curve {m.E.a} {m.E.b}")
    else:
        lines.append("hyperelliptic " + " ".join(str(c) for c in m.P))
    lines.append("branch " + " ".join(str(x) for x in m.branch_x))
    if m.scale != 1:
        lines.append(f"scale {m.scale}")
    if m.d.representative != 1:
        lines.append(f"twist {m.d.representative}")
    return "\n".join(lines) + "\n"


def _parse_place(s: str) -> Place:
    return Place.real() if s in ("inf", "real", "R") else Place.finite(int(s))


def _report_line(r) -> str:
    status = "solvable" if r.solvable else "NOT solvable"
    wit = "" if r.witness is None else " witness " + " ".join(f"{k}={v}" for k, v in r.witness.items())
    return f"{str(r.place):>5}: {status} [{r.method.value}, depth {r.depth_used}]{wit}"


# --- subcommands -------------------------------------------------------------------


def cmd_construct(args) -> int:
    E = EllipticCurveQ(Fraction(args.curve[0]), Fraction(args.curve[1]))
    m = construct_bielliptic(E, args.genus, ScanStrategy(start=args.start))
    text = format_model(m)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_twist_search(args) -> int:
    m = load_model(args.model)
    qs = twist_candidates(m, args.count, permissive=args.permissive)
    print(" ".join(map(str, qs)))
    return 0


def _pipeline_config(args) -> PipelineConfig:
    kv = parse_kv_config(Path(args.config).read_text()) if args.config else {}
    for key in ("genus", "policy", "candidates", "height_bound", "provenance", "start", "registry", "twist"):
        v = getattr(args, key, None)
        if v is not None:
            kv[key] = v
    if args.curve:
        kv["curve"] = " ".join(args.curve)
    if args.permissive:
        kv["permissive"] = "true"
    return PipelineConfig.from_mapping({k: str(v) for k, v in kv.items()})


def cmd_certify(args) -> int:
    if args.model:
        m = load_model(args.model)
        if isinstance(m, tuple):
            raise HasseForgeError("certify needs a double-cover model, not a quartic")
        d = args.twist if args.twist is not None else m.d.representative
        mw = None
        if isinstance(m, BiellipticModel):
            mw = mw_evidence(
                m.E, args.policy or "registry_lookup", height_bound=args.height_bound or 10**3,
                provenance=args.provenance or "", registry_path=args.registry,
            )
        cert = certify(m.twist(1), d, mw)
    else:
        cert = run_pipeline(_pipeline_config(args))
    doc = serialize(cert)
    if args.out:
        Path(args.out).write_text(doc.dumps())
    print(f"model: {format_model(cert.model).strip()}".replace("\n", "; "))
    for r in cert.local_reports:
        print(_report_line(r))
    print(f"Weil: {cert.weil_argument.statement}")
    for f in cert.fiber_checks:
        print(f"fiber over {f.point}: class {f.square_class} {'nonsquare' if f.nonsquare else 'SQUARE'}")
    print(f"verdict: {cert.verdict.value}" + (f" ({cert.failure})" if cert.failure else ""))
    return VERDICT_EXIT[cert.verdict]


def cmd_local_check(args) -> int:
    m = load_model(args.model)
    quartic = isinstance(m, tuple)
    if args.place == "all":
        if quartic:
            F, bad = m
            res = everywhere_local(F, args.genus or 3, bad_primes=bad)
        else:
            res = everywhere_local(m)
        for r in res.reports:
            print(_report_line(r))
        print(f"Weil: {res.weil.statement}")
        print(f"everywhere locally solvable: {res.solvable}")
        return 0 if res.solvable else EXIT_FAILED
    v = _parse_place(args.place)
    r = local_solvable_plane(m[0], v) if quartic else local_solvable_bielliptic(m, v)
    print(_report_line(r))
    return 0 if r.solvable else EXIT_FAILED


def cmd_params(args) -> int:
    if args.hasse_term is not None:
        print(hasse_term(args.p, args.hasse_term))
        return 0
    if args.M is None:
        raise HasseForgeError("params needs --M (or --hasse-term)")
    if args.N is not None:
        pairs = [admissible_pair(args.M, args.N, args.p)]
    else:
        pairs = search_levels(args.M, args.p, args.class_bound, args.count)
    for lp in pairs:
        print(
            f"M={lp.M} N={lp.N} p={lp.p} h(-N)={lp.h_minus_N} congruence={lp.congruence_ok} "
            f"eigenvalue={lp.eigenvalue_ok} residue={lp.residue_ok}"
        )
    return 0


_AS_PREDICATES = {
    "all": lambda q: True,
    "even-degree": lambda q: q.degree % 2 == 0,
    "odd-degree": lambda q: q.degree % 2 == 1,
}


def cmd_ffsel(args) -> int:
    if args.kind == "kummer":
        m = FpPoly.parse(args.p, args.m)
        for d in select_kummer_d(args.p, m, args.count, mode=args.mode):
            places = sorted(str(v) for v in kummer(d).ramified_places)
            print(f"d = {d}   ramified: {{{', '.join(places)}}}")
    else:
        for desc in select_artin_schreier(_AS_PREDICATES[args.pred], args.count):
            print(f"X^2 + X = 1/({desc.denominator})   ramified: {{{desc.denominator}}}")
    return 0


def cmd_verify(args) -> int:
    try:
        doc = load_document(args.certificate)
        ok, rep = verify_certificate(doc)
    except SchemaError as exc:
        print(f"VERIFICATION FAILED: schema: {exc}")
        return EXIT_FAILED
    print(rep)
    print("certificate verified" if ok else "VERIFICATION FAILED: " + "; ".join(rep.failures))
    return 0 if ok else EXIT_FAILED


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hasse-forge", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a bielliptic model over an elliptic curve")
    p.add_argument("--curve", nargs=2, required=True, metavar=("A", "B"))
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--start", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("twist-search", help="list twist candidates for a model file")
    p.add_argument("model")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--permissive", action="store_true")
    p.set_defaults(func=cmd_twist_search)

    p = sub.add_parser("certify", help="certify a twist (model file) or run the full pipeline")
    p.add_argument("model", nargs="?")
    p.add_argument("--config")
    p.add_argument("--curve", nargs=2, metavar=("A", "B"))
    p.add_argument("--genus", type=int)
    p.add_argument("--policy", choices=["registry_lookup", "assert", "search"])
    p.add_argument("--candidates", type=int)
    p.add_argument("--height-bound", dest="height_bound", type=int)
    p.add_argument("--provenance")
    p.add_argument("--permissive", action="store_true")
    p.add_argument("--start", type=int)
    p.add_argument("--registry")
    p.add_argument("--twist", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("local-check", help="local solvability of a bielliptic or plane-quartic model")
    p.add_argument("model")
    p.add_argument("--place", default="all", help="'all', 'inf', or a prime")
    p.add_argument("--genus", type=int, help="genus for quartic Weil threshold (default 3)")
    p.set_defaults(func=cmd_local_check)

    p = sub.add_parser("params", help="level-pair feasibility arithmetic")
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--class-bound", dest="class_bound", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--hasse-term", dest="hasse_term", type=int, metavar="D")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("ffsel", help="function-field twist selection")
    p.add_argument("kind", choices=["kummer", "artin-schreier"])
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--m", default="t")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--mode", choices=["even", "product"], default="even")
    p.add_argument("--pred", choices=sorted(_AS_PREDICATES), default="all")
    p.set_defaults(func=cmd_ffsel)

    p = sub.add_parser("verify", help="re-check a certificate document")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage, which would read as a conditional verdict
        return EXIT_USAGE if exc.code else 0
    try:
        return args.func(args)
    except IndeterminateError as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except (HasseForgeError, BudgetExhausted, SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
