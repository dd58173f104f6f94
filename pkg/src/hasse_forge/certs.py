"""Certificate documents: JSON serialization, the end-to-end pipeline, and independent verification."""

from __future__ import annotations

import copy
import datetime as _dt
import hashlib
import json
import platform
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .elliptic import (
    INFINITY,
    EllipticCurveQ,
    EPoint,
    MWEvidence,
    RankZeroStatus,
    mw_evidence,
    registry_lookup,
    torsion_subgroup,
)
from .errors import HasseForgeError, IndeterminateError, PreconditionError, SchemaError
from .localfields import (
    LocalSolvabilityReport,
    Method,
    Place,
    PlaceKind,
    WeilArgument,
    check_bielliptic_witness,
    local_solvable_bielliptic,
    model_bad_primes,
    places_to_test,
    weil_threshold,
)
from .ntheory import SquareClass, prime_divisors
from .tahp import (
    SCHEMA_VERSION,
    BiellipticModel,
    FiberCheck,
    HPCertificate,
    HyperellipticBaseModel,
    ScanStrategy,
    Verdict,
    base_points,
    certify,
    check_hypotheses,
    construct_bielliptic,
    fiber_class,
    grade,
    twist_candidates,
)

TOOLCHAIN_NAME = "hasse_forge"


# --- scalar codecs -------------------------------------------------------------------


def q_str(r) -> str:
    r = Fraction(r)
    return f"{r.numerator}/{r.denominator}"


def q_parse(s) -> Fraction:
    if not isinstance(s, str):
        raise SchemaError(f"expected a rational string, got {s!r}")
    num, sep, den = s.partition("/")
    try:
        if not sep:
            return Fraction(int(num))
        if int(den) == 0:
            raise SchemaError(f"zero denominator in {s!r}")
        return Fraction(int(num), int(den))
    except ValueError as exc:
        raise SchemaError(f"malformed rational {s!r}") from exc


def i_str(n: int) -> str:
    return str(int(n))


def i_parse(s) -> int:
    if not isinstance(s, str):
        raise SchemaError(f"expected an integer string, got {s!r}")
    try:
        return int(s)
    except ValueError as exc:
        raise SchemaError(f"malformed integer {s!r}") from exc


def _b_parse(v) -> bool:
    if not isinstance(v, bool):
        raise SchemaError(f"expected a boolean, got {v!r}")
    return v


def _get(d: dict, key: str):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"missing field {key!r}")
    return d[key]


# --- structured codecs -------------------------------------------------------------------

_RATIONAL_KEYS = {"x", "y", "w"}
_INT_KEYS = {"precision"}
_TRIPLE_KEYS = {"point", "pos", "neg"}


def witness_to_json(w: dict | None):
    if w is None:
        return None
    out = {}
    for k, v in w.items():
        if k in _RATIONAL_KEYS:
            out[k] = q_str(v)
        elif k in _INT_KEYS:
            out[k] = i_str(v)
        elif k in _TRIPLE_KEYS:
            out[k] = [i_str(c) for c in v]
        else:
            out[k] = str(v)
    return out


def witness_from_json(w):
    if w is None:
        return None
    if not isinstance(w, dict):
        raise SchemaError("witness must be an object")
    out = {}
    for k, v in w.items():
        if k in _RATIONAL_KEYS:
            out[k] = q_parse(v)
        elif k in _INT_KEYS:
            out[k] = i_parse(v)
        elif k in _TRIPLE_KEYS:
            if not isinstance(v, list) or len(v) != 3:
                raise SchemaError(f"witness {k} must be a triple")
            out[k] = tuple(i_parse(c) for c in v)
        else:
            out[k] = v
    return out


def place_to_json(v: Place) -> str:
    return "inf" if v.kind is PlaceKind.REAL else i_str(v.p)


def place_from_json(s) -> Place:
    if s == "inf":
        return Place.real()
    try:
        return Place.finite(i_parse(s))
    except PreconditionError as exc:
        raise SchemaError(str(exc)) from exc


def report_to_json(r: LocalSolvabilityReport) -> dict:
    return {
        "place": place_to_json(r.place),
        "solvable": r.solvable,
        "method": r.method.value,
        "witness": witness_to_json(r.witness),
        "depth_used": i_str(r.depth_used),
    }


def report_from_json(d) -> LocalSolvabilityReport:
    try:
        method = Method(_get(d, "method"))
    except ValueError as exc:
        raise SchemaError(f"unknown method {d.get('method')!r}") from exc
    try:
        return LocalSolvabilityReport(
            place_from_json(_get(d, "place")),
            _b_parse(_get(d, "solvable")),
            method,
            witness_from_json(_get(d, "witness")),
            i_parse(_get(d, "depth_used")),
        )
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def point_to_json(P: EPoint):
    return "O" if P.is_infinity else [q_str(P.x), q_str(P.y)]


def point_from_json(v) -> EPoint:
    if v == "O":
        return INFINITY
    if not isinstance(v, list) or len(v) != 2:
        raise SchemaError(f"malformed point {v!r}")
    return EPoint(q_parse(v[0]), q_parse(v[1]))


def curve_to_json(E: EllipticCurveQ) -> dict:
    return {"a": q_str(E.a), "b": q_str(E.b)}


def curve_from_json(d) -> EllipticCurveQ:
    try:
        return EllipticCurveQ(q_parse(_get(d, "a")), q_parse(_get(d, "b")))
    except PreconditionError as exc:
        raise SchemaError(str(exc)) from exc


def model_to_json(m) -> dict:
    common = {
        "branch_x": [q_str(x) for x in m.branch_x],
        "scale": q_str(m.scale),
        "d": i_str(m.d.representative),
        "genus": i_str(m.genus),
    }
    if isinstance(m, BiellipticModel):
        return {"family": "bielliptic", "curve": curve_to_json(m.E), **common}
    return {"family": "hyperelliptic_base", "P": [q_str(c) for c in m.P], **common}


def model_from_json(d):
    family = _get(d, "family")
    branch = tuple(q_parse(x) for x in _get(d, "branch_x"))
    scale = q_parse(_get(d, "scale"))
    genus = i_parse(_get(d, "genus"))
    try:
        tw = SquareClass(i_parse(_get(d, "d")))
        if family == "bielliptic":
            return BiellipticModel(curve_from_json(_get(d, "curve")), branch, scale, tw, genus)
        if family == "hyperelliptic_base":
            return HyperellipticBaseModel(tuple(q_parse(c) for c in _get(d, "P")), branch, scale, tw, genus)
    except PreconditionError as exc:
        raise SchemaError(f"invalid model: {exc}") from exc
    raise SchemaError(f"unknown model family {family!r}")


def mw_to_json(mw: MWEvidence | None):
    if mw is None:
        return None
    return {
        "curve": curve_to_json(mw.curve),
        "torsion": [point_to_json(P) for P in mw.torsion],
        "rank_zero_status": mw.rank_zero_status.value,
        "provenance": mw.provenance,
        "height_bound": None if mw.height_bound is None else i_str(mw.height_bound),
        "nontorsion_found": [point_to_json(P) for P in mw.nontorsion_found],
    }


def mw_from_json(d):
    if d is None:
        return None
    hb = _get(d, "height_bound")
    try:
        return MWEvidence(
            curve_from_json(_get(d, "curve")),
            tuple(point_from_json(P) for P in _get(d, "torsion")),
            RankZeroStatus(_get(d, "rank_zero_status")),
            str(_get(d, "provenance")),
            None if hb is None else i_parse(hb),
            tuple(point_from_json(P) for P in _get(d, "nontorsion_found")),
        )
    except (ValueError, PreconditionError) as exc:
        raise SchemaError(f"invalid Mordell-Weil evidence: {exc}") from exc


def certificate_to_payload(c: HPCertificate) -> dict:
    return {
        "model": model_to_json(c.model),
        "d": i_str(c.d.representative),
        "local_reports": [report_to_json(r) for r in c.local_reports],
        "weil_argument": {
            "genus": i_str(c.weil_argument.genus),
            "M1": i_str(c.weil_argument.M1),
            "excluded_primes": [i_str(p) for p in c.weil_argument.excluded_primes],
            "statement": c.weil_argument.statement,
        },
        "fiber_checks": [
            {"point": point_to_json(f.point), "square_class": i_str(f.square_class.representative), "nonsquare": f.nonsquare}
            for f in c.fiber_checks
        ],
        "mw_evidence": mw_to_json(c.mw_evidence),
        "verdict": c.verdict.value,
        "failure": c.failure,
        "point_source": c.point_source,
    }


def certificate_from_payload(p: dict, schema_version: str = SCHEMA_VERSION) -> HPCertificate:
    wa = _get(p, "weil_argument")
    try:
        fibers = tuple(
            FiberCheck(point_from_json(_get(f, "point")), SquareClass(i_parse(_get(f, "square_class"))), _b_parse(_get(f, "nonsquare")))
            for f in _get(p, "fiber_checks")
        )
        d = SquareClass(i_parse(_get(p, "d")))
        verdict = Verdict(_get(p, "verdict"))
    except (ValueError, PreconditionError) as exc:
        raise SchemaError(str(exc)) from exc
    return HPCertificate(
        model_from_json(_get(p, "model")),
        d,
        tuple(report_from_json(r) for r in _get(p, "local_reports")),
        WeilArgument(
            i_parse(_get(wa, "genus")),
            i_parse(_get(wa, "M1")),
            tuple(i_parse(q) for q in _get(wa, "excluded_primes")),
            str(_get(wa, "statement")),
        ),
        fibers,
        mw_from_json(_get(p, "mw_evidence")),
        verdict,
        _get(p, "failure"),
        schema_version,
        str(_get(p, "point_source")),
    )


# --- documents -------------------------------------------------------------------


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def compute_digest(doc: dict) -> str:
    body = {k: doc[k] for k in ("schema_version", "payload", "toolchain", "timestamp") if k in doc}
    return hashlib.sha256(_canonical(body).encode()).hexdigest()


@dataclass(frozen=True)
class CertificateDocument:
    schema_version: str
    payload: dict
    toolchain: dict
    timestamp: str
    digest: str = ""

    def to_json_obj(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "payload": self.payload,
            "toolchain": self.toolchain,
            "timestamp": self.timestamp,
            "digest": self.digest,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True) + "\n"

    @property
    def certificate(self) -> HPCertificate:
        return certificate_from_payload(self.payload, self.schema_version)


def toolchain_stamp() -> dict:
    return {"name": TOOLCHAIN_NAME, "version": __version__, "python": platform.python_version()}


def serialize(c: HPCertificate, timestamp: str | None = None) -> CertificateDocument:
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    doc = {
        "schema_version": c.schema_version,
        "payload": certificate_to_payload(c),
        "toolchain": toolchain_stamp(),
        "timestamp": timestamp,
    }
    return CertificateDocument(doc["schema_version"], doc["payload"], doc["toolchain"], timestamp, compute_digest(doc))


def parse_document(obj) -> CertificateDocument:
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("certificate must be a JSON object")
    version = _get(obj, "schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {version!r}")
    payload = _get(obj, "payload")
    toolchain = _get(obj, "toolchain")
    timestamp = _get(obj, "timestamp")
    digest = _get(obj, "digest")
    if not isinstance(payload, dict) or not isinstance(toolchain, dict):
        raise SchemaError("payload and toolchain must be objects")
    if not isinstance(timestamp, str) or not isinstance(digest, str):
        raise SchemaError("timestamp and digest must be strings")
    return CertificateDocument(version, payload, toolchain, timestamp, digest)


def load_document(path) -> CertificateDocument:
    return parse_document(Path(path).read_text())


# --- pipeline -------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    curve: tuple[Fraction, Fraction] = (Fraction(-1), Fraction(0))
    genus: int = 2
    policy: str = "registry_lookup"
    candidates: int = 20
    height_bound: int = 10**3
    provenance: str = ""
    permissive: bool = False
    start: int = 2
    registry: str | None = None
    twist: int | None = None

    @classmethod
    def from_mapping(cls, kv: dict) -> "PipelineConfig":
        known = {
            "curve", "genus", "policy", "candidates", "height_bound", "provenance",
            "permissive", "start", "registry", "twist",
        }
        unknown = set(kv) - known
        if unknown:
            raise PreconditionError(f"unknown config keys: {', '.join(sorted(unknown))}")
        args = {}
        for k, v in kv.items():
            if k == "curve":
                parts = str(v).split()
                if len(parts) != 2:
                    raise PreconditionError("curve needs two coefficients a b")
                args[k] = (Fraction(parts[0]), Fraction(parts[1]))
            elif k in ("genus", "candidates", "height_bound", "start", "twist"):
                args[k] = int(v)
            elif k == "permissive":
                args[k] = str(v).lower() in ("1", "true", "yes", "on")
            else:
                args[k] = str(v)
        if args.get("policy") == "search" and "height_bound" not in args:
            args["height_bound"] = 10**3
        return cls(**args)


def parse_kv_config(text: str) -> dict:
    """``key = value`` lines; ``#`` comments; blank lines ignored."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise PreconditionError(f"config line {lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def run_pipeline(config: PipelineConfig) -> HPCertificate:
    """construct -> check hypotheses -> twist candidates -> certify, first non-FAILED certificate."""
    E = EllipticCurveQ(*config.curve)
    mw = mw_evidence(
        E, config.policy, height_bound=config.height_bound, provenance=config.provenance, registry_path=config.registry
    )
    model = construct_bielliptic(E, config.genus, ScanStrategy(start=config.start))
    hyp = check_hypotheses(model, mw)
    if not hyp.structural_ok:
        raise PreconditionError(f"hypotheses fail for {model}: {hyp}")
    if config.twist is not None:
        return certify(model, config.twist, mw)
    last = None
    for q in twist_candidates(model, config.candidates, permissive=config.permissive):
        last = certify(model, q, mw)
        if last.verdict is not Verdict.FAILED:
            return last
    if last is None:
        raise PreconditionError("no twist candidates")
    return last


# --- verification -------------------------------------------------------------------


@dataclass
class VerificationReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return ok

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    @property
    def failures(self) -> list[str]:
        return [f"{name}: {detail}" if detail else name for name, ok, detail in self.checks if not ok]

    def __str__(self):
        return "\n".join(f"[{'ok' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else "") for name, ok, detail in self.checks)


def _expected_places(model, d: SquareClass):
    bad = model_bad_primes(model)
    extra = prime_divisors(d.representative)
    places, wt = places_to_test(bad, model.genus, extra)
    return places, wt, sorted(bad | extra)


def verify_certificate(doc: CertificateDocument, *, check_digest: bool = True) -> tuple[bool, VerificationReport]:
    """Recompute every recorded check; the document passes iff everything reproduces."""
    rep = VerificationReport()
    if check_digest:
        rep.add("digest", compute_digest(doc.to_json_obj()) == doc.digest, "SHA-256 of the document body")
    c = certificate_from_payload(doc.payload, doc.schema_version)
    model = c.model
    rep.add("twist", model.d == c.d, f"model twist {model.d} vs certificate d {c.d}")
    rep.add("genus bookkeeping", model.riemann_hurwitz_ok(), f"genus {model.genus}")
    try:
        hyp = check_hypotheses(model.twist(1), c.mw_evidence)
        rep.add("hypotheses (i)-(iii)", hyp.structural_ok, "; ".join(h.explanation for h in hyp.results[:3]))
    except HasseForgeError as exc:
        rep.add("hypotheses (i)-(iii)", False, str(exc))

    # places and the Weil argument
    places, wt, excluded = _expected_places(model, c.d)
    recorded = [r.place for r in c.local_reports]
    rep.add("tested places", recorded == places, f"expected {[str(v) for v in places]}, got {[str(v) for v in recorded]}")
    rep.add("Weil threshold", c.weil_argument.M1 == wt.M1 and c.weil_argument.genus == model.genus, f"M1({model.genus}) = {wt.M1}")
    rep.add("bad-prime coverage", list(c.weil_argument.excluded_primes) == excluded, f"expected {excluded}")

    # local reports
    for r in c.local_reports:
        name = f"local report at {r.place}"
        if r.method is Method.WEIL_BOUND:
            rep.add(name, r.place.kind is PlaceKind.FINITE and r.place.p >= wt.M1 and r.place.p not in excluded, "Weil-bound place")
            continue
        wit_ok = check_bielliptic_witness(model, r)
        if r.solvable:
            rep.add(f"{name} witness", wit_ok, str(r.witness))
        try:
            fresh = local_solvable_bielliptic(model, r.place)
            same = (fresh.solvable, fresh.method, fresh.depth_used) == (r.solvable, r.method, r.depth_used)
            rep.add(name, same, f"recomputed solvable={fresh.solvable}, depth {fresh.depth_used}")
            rep.add(f"{name} reproducible witness", fresh.witness == r.witness, "deterministic search")
        except IndeterminateError as exc:
            rep.add(name, False, f"indeterminate on recomputation: {exc}")

    # Mordell-Weil evidence and fiber checks
    mw = c.mw_evidence
    if isinstance(model, BiellipticModel):
        if mw is None:
            rep.add("Mordell-Weil evidence", False, "missing")
        else:
            rep.add("evidence curve", mw.curve == model.E, str(mw.curve))
            tors = set(torsion_subgroup(model.E))
            rep.add("torsion", set(mw.torsion) == tors and len(mw.torsion) == len(tors), f"order {len(tors)}")
            if mw.rank_zero_status is RankZeroStatus.REGISTRY:
                entry = registry_lookup(model.E)
                rep.add("registry entry", entry is not None and mw.provenance == f"registry:{entry.source}", mw.provenance)
    try:
        pts, source = base_points(model, mw)
        rep.add("fiber point set", [f.point for f in c.fiber_checks] == list(pts) and c.point_source == source, source)
    except (AttributeError, TypeError):
        rep.add("fiber point set", False, "cannot enumerate base points")
    for f in c.fiber_checks:
        name = f"fiber over {f.point}"
        try:
            fresh = fiber_class(model, c.d, f.point)
            rep.add(name, fresh == f, f"recomputed class {fresh.square_class}, recorded {f.square_class}")
        except HasseForgeError as exc:
            rep.add(name, False, str(exc))

    # grading
    local_ok = all(r.solvable for r in c.local_reports)
    fibers_ok = all(f.nonsquare for f in c.fiber_checks)
    expected = grade(local_ok, fibers_ok, model, mw)
    rep.add("verdict grading", expected == c.verdict, f"expected {expected.value}, recorded {c.verdict.value}")
    return rep.ok, rep


def verify_document_text(text: str) -> tuple[bool, VerificationReport]:
    """Like verify_certificate, reporting schema problems as a failed check instead of raising."""
    try:
        doc = parse_document(text)
        return verify_certificate(doc)
    except SchemaError as exc:
        rep = VerificationReport()
        rep.add("schema", False, str(exc))
        return False, rep


def mutate_leaf(obj: dict, rng) -> tuple[dict, str]:
    """Copy of a JSON document with one randomly chosen leaf changed; returns (copy, path)."""
    doc = copy.deepcopy(obj)
    leaves = []

    def walk(node, path):
        if isinstance(node, dict):
            for k in sorted(node):
                walk(node[k], path + (k,))
        elif isinstance(node, list):
            for i, v in enumerate(node):
                walk(v, path + (i,))
        else:
            leaves.append(path)

    walk(doc, ())
    path = leaves[rng.randrange(len(leaves))]
    parent = doc
    for key in path[:-1]:
        parent = parent[key]
    old = parent[path[-1]]
    parent[path[-1]] = _mutated(old, rng)
    return doc, "/".join(map(str, path))


def _mutated(v, rng):
    if isinstance(v, bool):
        return not v
    if v is None:
        return "0/1"
    if isinstance(v, str):
        num, sep, den = v.partition("/")
        if num.lstrip("-").isdigit() and (not sep or den.isdigit()):
            delta = rng.choice([1, -1, 2, 7])
            return f"{int(num) + delta}{sep}{den}"
        return v + "~" if v else "x"
    if isinstance(v, (int, float)):
        return v + 1
    raise TypeError(type(v))
