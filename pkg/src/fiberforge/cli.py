"""The ``fiberforge`` command line.

Exit codes: 0 success, 1 a verification or assertion failed, 2 bad input.
Reports go to stdout (or ``--output``) and are deterministic; timing fields
appear only with ``--timing``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .derivation import DerivationScript, check_derivation
from .fibrations import (
    FibrationError,
    LefschetzFibration,
    base_invariants,
    geography_point,
    in_region,
)
from .homology import Configuration, HomologyError, canonical_class, replay_transcript
from .pipeline import (
    DEFAULT_CONFIG,
    StageFailure,
    load_json,
    load_setup,
    load_table,
    policy_bounds,
    resolve_input,
    run_exotic_pipeline,
)
from .plumbing import (
    AbelianPresentation,
    PlumbingError,
    PlumbingGraph,
    abelian_group_from_presentation,
    check_embedding,
    homeomorphism_type,
    k_omega_functional,
    lens_space_of_linear_plumbing,
    meridian_presentation,
    qhb_family_check,
    rational_blowdown_bookkeeping,
)
from .schemas import SchemaError, detect_kind, validate
from .surface import SurfaceError, standard_curve_system, word_action
from .sw import SWConfigError, default_jobs, run_enumeration, summarize
from .words import WordError, parse_word, word_from_json

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class Outcome:
    code: int
    report: dict | None = None
    text: str | None = None
    messages: list[str] = field(default_factory=list)


def _load(path: str, kind: str | None = None) -> dict:
    try:
        doc = load_json(path)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    kind = kind or detect_kind(doc)
    if kind is None:
        raise InputError(f"{path}: cannot tell what kind of document this is")
    try:
        validate(doc, kind)
    except SchemaError as exc:
        raise InputError(f"{path}: schema violation at {exc}") from None
    return doc


def _int_list(values: Sequence[str]) -> list[int]:
    out = []
    for v in values:
        out.extend(int(x) for x in v.replace(",", " ").split())
    return out


def _fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# commands


def cmd_verify(args) -> Outcome:
    doc = _load(args.script, "script")
    try:
        script = DerivationScript.from_json(doc)
        script.system
    except (WordError, SurfaceError, KeyError, ValueError) as exc:
        raise InputError(f"{args.script}: {exc}") from None
    cert = check_derivation(script)
    code = EXIT_OK if cert.valid else EXIT_FAIL
    if args.format == "tsv":
        return Outcome(code, text=cert.to_tsv())
    return Outcome(code, cert.to_json())


def _fibration_from_json(doc: dict) -> LefschetzFibration:
    g = int(doc["genus"])
    curves = doc.get("curves", "standard")
    system = standard_curve_system(g, lanterns=curves == "lanterns")
    word = doc["word"]
    word = parse_word(word, g) if isinstance(word, str) else word_from_json(word, g)
    sigma = doc.get("sigma")
    ann = dict(doc.get("annotations", {}))
    return LefschetzFibration(
        g, word, system,
        hyperelliptic=bool(doc.get("hyperelliptic", False)),
        separating_types=tuple(doc.get("separating_types", ())),
        sections=ann.get("sections"),
        sigma=sigma,
        provenance=("user-supplied",) if sigma is not None else (),
        annotations=ann,
    )


def cmd_invariants(args) -> Outcome:
    doc = _load(args.fibration, "fibration")
    try:
        L = _fibration_from_json(doc)
    except (WordError, SurfaceError, FibrationError) as exc:
        raise InputError(f"{args.fibration}: {exc}") from None
    relation = word_action(L.word, L.system).is_identity()
    rec = base_invariants(L)
    report = {"genus": L.genus, "twist_count": L.twist_count, "monodromy_acts_trivially": relation,
              **rec.to_json(), "annotations": dict(L.annotations)}
    if L.annotations.get("sections") and rec.h1 is not None:
        report["simply_connected"] = rec.h1.trivial
    return Outcome(EXIT_OK if relation else EXIT_FAIL, report)


def _geography_row(a: int, b: int, build: bool) -> dict:
    plan, rec = geography_point(a, b, build=build)
    ok = rec.chi_h == a and rec.c1_squared == b
    return {**plan.to_json(), **rec.to_json(), "matches": ok}


def cmd_geography(args) -> Outcome:
    build = not args.no_build
    if args.sweep:
        top = args.a if args.a is not None else 8
        if top < 3:
            raise InputError(f"--a {top}: the sweep needs a >= 3")
        rows = [_geography_row(a, b, build) for a in range(3, top + 1) for b in range(1, 2 * a + 1)]
        ok = all(r["matches"] for r in rows)
        if args.format == "tsv":
            lines = ["a\tb\tfiber_genus\tchi\tsigma\tchi_h\tc1_squared\th1\tmatches"]
            for r in rows:
                h1 = r.get("h1", {}).get("description", "")
                lines.append("\t".join(str(x) for x in (r["a"], r["b"], r["fiber_genus"], r["chi"], r["sigma"],
                                                        r["chi_h"], r["c1_squared"], h1, r["matches"])))
            return Outcome(EXIT_OK if ok else EXIT_FAIL, text="\n".join(lines) + "\n")
        return Outcome(EXIT_OK if ok else EXIT_FAIL, {"points": rows, "all_match": ok})
    if args.a is None or args.b is None:
        raise InputError("geography needs --a and --b, or --sweep")
    bad = in_region(args.a, args.b)
    if bad:
        raise InputError(f"(a, b) = ({args.a}, {args.b}) lies outside the region: {bad}")
    row = _geography_row(args.a, args.b, build)
    return Outcome(EXIT_OK if row["matches"] else EXIT_FAIL, row)


def _plumbing_from_args(args) -> PlumbingGraph:
    if args.weights:
        if args.file:
            raise InputError("give either a plumbing file or --weights, not both")
        return PlumbingGraph.from_json({"weights": _int_list(args.weights)})
    if not args.file:
        raise InputError("plumbing needs a file or --weights")
    return PlumbingGraph.from_json(_load(args.file, "plumbing"))


def cmd_plumbing(args) -> Outcome:
    try:
        graph = _plumbing_from_args(args)
    except (PlumbingError, ValueError) as exc:
        raise InputError(str(exc)) from None
    report: dict = {
        "weights": list(graph.weights),
        "linear": graph.is_linear,
        "det": graph.det,
        "signature": graph.signature,
        "euler": graph.euler,
        "negative_definite": graph.negative_definite,
        "boundary_h1": abelian_group_from_presentation(meridian_presentation(graph)).to_json(),
    }
    if graph.is_linear and all(w <= -2 for w in graph.weights):
        lens = lens_space_of_linear_plumbing(graph.weights)
        fam = qhb_family_check(lens.p, lens.q)
        report["lens_space"] = lens.to_json()
        report["rational_ball_family"] = {"member": fam.member, "m": fam.m, "k": fam.k, "matched": fam.matched}
    if args.meridians:
        rels = tuple((m,) for m in _int_list(args.meridians))
        report["meridian_quotient"] = abelian_group_from_presentation(AbelianPresentation(1, rels)).to_json()
    if args.ambient:
        chi, sigma = _int_list(args.ambient)[:2]
        new = rational_blowdown_bookkeeping((chi, sigma), graph)
        try:
            homeo = homeomorphism_type(*new, parity=args.parity, simply_connected=True).to_json()
        except PlumbingError as exc:
            homeo = {"error": str(exc)}
        report["rational_blowdown"] = {"ambient": [chi, sigma], "result": list(new), "homeomorphism": homeo}
    return Outcome(EXIT_OK, report)


def _configuration(path: str) -> tuple[Configuration, str]:
    doc = _load(path)
    kind = detect_kind(doc)
    try:
        if kind == "transcript":
            return replay_transcript(doc), kind
        if kind == "table":
            return load_table(doc), kind
    except (HomologyError, ValueError, KeyError) as exc:
        raise InputError(f"{path}: {exc}") from None
    raise InputError(f"{path}: expected a class table or a blowup transcript, found {kind}")


def _plumbing_with_names(path: str) -> tuple[PlumbingGraph, list[str]]:
    doc = _load(path, "plumbing")
    graph = PlumbingGraph.from_json(doc)
    names = doc.get("names") or [f"u{i + 1}" for i in range(graph.size)]
    if len(names) != graph.size:
        raise InputError(f"{path}: {len(names)} names for {graph.size} weights")
    return graph, list(names)


def cmd_homology(args) -> Outcome:
    cfg, kind = _configuration(args.config)
    classes = {name: {"class": str(c), "square": c.square}
               for name, c in sorted(cfg.classes.items(), key=lambda kv: _natural(kv[0]))}
    report: dict = {"kind": kind, "basis": cfg.basis.to_json(), "classes": classes}
    code = EXIT_OK
    if args.compare:
        other, _ = _configuration(args.compare)
        diff = sorted((n for n in other.classes if n not in cfg.classes or cfg[n].coeffs != other[n].coeffs),
                      key=_natural)
        report["compare"] = {"against": Path(args.compare).name, "same_basis": other.basis == cfg.basis,
                             "differing": diff}
        if diff or other.basis != cfg.basis:
            code = EXIT_FAIL
    if args.check_table:
        graph, names = _plumbing_with_names(args.check_table)
        missing = [n for n in names if n not in cfg.classes]
        if missing:
            raise InputError(f"{args.config}: classes {missing} named by the plumbing are missing")
        emb = check_embedding(cfg, names, graph)
        report["embedding"] = emb.to_json()
        report["det"] = graph.det
        if not emb.ok:
            code = EXIT_FAIL
    return Outcome(code, report)


def _natural(name: str):
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head, int(tail) if tail else -1)


def cmd_k_omega(args) -> Outcome:
    cfg, _ = _configuration(args.config)
    graph, names = _plumbing_with_names(args.plumbing)
    try:
        kw = k_omega_functional(cfg, names, graph)
    except (PlumbingError, HomologyError) as exc:
        return Outcome(EXIT_FAIL, {"error": str(exc)})
    report = kw.to_json()
    report["restricted"] = {v: _fraction(kw.coefficient("restricted", v)) for v in kw.variables}
    report["k_omega"] = {v: _fraction(kw.coefficient("total", v)) for v in kw.variables}
    return Outcome(EXIT_OK if kw.positive else EXIT_FAIL, report)


def _jobs(args) -> int:
    if args.jobs is not None:
        if args.jobs < 1:
            raise InputError("--jobs must be at least 1")
        return args.jobs
    try:
        return default_jobs()
    except SWConfigError as exc:
        raise InputError(str(exc)) from None


def _setup(path: str):
    _load(path, "exotic")
    try:
        return load_setup(str(resolve_input(path)))
    except (FileNotFoundError, HomologyError, KeyError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_sw_enumerate(args) -> Outcome:
    jobs = _jobs(args)
    setup = _setup(args.config)
    policy = args.box or setup.config.get("box", {}).get("label", "literal")
    try:
        bounds = policy_bounds(setup, policy, args.sphere_rule)
    except StageFailure as exc:
        raise InputError(str(exc)) from None
    result = run_enumeration(setup.problem, bounds, jobs=jobs)
    others = {name: policy_bounds(setup, name, args.sphere_rule) for name in ("literal", "adjunction")}
    others[policy] = bounds
    report = summarize(setup.problem, result, policy, bounds, others, canonical=canonical_class(setup.table.basis))
    for key, want in setup.config.get("published", {}).items():
        got = report.counts.get(key)
        if got is not None and got != want:
            report.notes.append(f"{key}: {got} here, {want} published")
    ok = report.checks.get("final_is_plus_minus_canonical", False)
    report.verdict = "unique basic class +-K" if ok else "final classes are not exactly +-K"
    doc = report.to_json(timing=args.timing)
    if args.format == "json":
        return Outcome(EXIT_OK if ok else EXIT_FAIL, doc)
    return Outcome(EXIT_OK if ok else EXIT_FAIL, text=_pipeline_text(doc))


def _pipeline_text(doc: dict) -> str:
    lines = [f"box policy: {doc['policy']} bounds {doc['bounds']}"]
    for name, n in doc["box_counts"].items():
        lines.append(f"box[{name}]: {n}")
    for key, n in doc["counts"].items():
        lines.append(f"{key}: {n}")
    lines.append("final classes: " + "; ".join(doc["final_classes"]))
    for note in doc["notes"]:
        lines.append(f"note: {note}")
    for key, secs in doc.get("timing", {}).items():
        lines.append(f"time[{key}]: {secs:.3f}s")
    lines.append(doc["verdict"])
    return "\n".join(lines) + "\n"


def cmd_exotic(args) -> Outcome:
    jobs = _jobs(args)
    path = args.config or DEFAULT_CONFIG
    _load(path, "exotic")
    try:
        report = run_exotic_pipeline(str(resolve_input(path)), policy=args.box, jobs=jobs,
                                     sphere_rule=args.sphere_rule)
    except StageFailure as exc:
        if exc.stage == "configuration":
            raise InputError(str(exc)) from None
        return Outcome(EXIT_FAIL, {"stage": exc.stage, "error": str(exc), "payload": exc.payload})
    doc = report.to_json(timing=args.timing)
    if args.format == "json":
        return Outcome(EXIT_OK, doc)
    checks = doc["checks"]
    head = [
        f"lens space: {checks['table']['lens_space']}",
        f"plumbing det: {checks['table']['det']}",
        f"rational blowdown: {checks['bookkeeping']['ambient']} -> {checks['bookkeeping']['result']}",
        f"K.omega a-coefficient: {checks['k_omega']['a_total']}/{checks['k_omega']['denominator']}",
    ]
    return Outcome(EXIT_OK, text="\n".join(head) + "\n" + _pipeline_text(doc))


# ---------------------------------------------------------------------------
# parser and dispatch


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fiberforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fiberforge {__version__}")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", help="replay a derivation script and certify it")
    s.add_argument("script")
    s.add_argument("--format", choices=("json", "tsv"), default="json")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("invariants", help="euler characteristic, signature and H1 of a fibration")
    s.add_argument("fibration")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("geography", help="build the fibration realizing (chi_h, c1^2) = (a, b)")
    s.add_argument("--a", type=int)
    s.add_argument("--b", type=int)
    s.add_argument("--sweep", action="store_true", help="every point with 3 <= a <= A (default 8), 1 <= b <= 2a")
    s.add_argument("--no-build", action="store_true", help="use substitution deltas without building words")
    s.add_argument("--format", choices=("json", "tsv"), default="json")
    s.set_defaults(func=cmd_geography)

    s = sub.add_parser("plumbing", help="invariants of a plumbing graph")
    s.add_argument("file", nargs="?")
    s.add_argument("--weights", nargs="+", metavar="W")
    s.add_argument("--meridians", nargs="+", metavar="M", help="multiples of a boundary meridian to quotient by")
    s.add_argument("--ambient", nargs="+", metavar="N", help="(chi, sigma) of the ambient manifold")
    s.add_argument("--parity", choices=("odd", "even", "unknown"), default="unknown")
    s.set_defaults(func=cmd_plumbing)

    s = sub.add_parser("homology", help="replay a transcript or load a class table")
    s.add_argument("config")
    s.add_argument("--check-table", metavar="PLUMBING")
    s.add_argument("--compare", metavar="CONFIG")
    s.set_defaults(func=cmd_homology)

    s = sub.add_parser("k-omega", help="K.omega after rationally blowing down the plumbing")
    s.add_argument("config")
    s.add_argument("--plumbing", default="plumbing_p.json")
    s.set_defaults(func=cmd_k_omega)

    for name, func, helptext in (("sw-enumerate", cmd_sw_enumerate, "Seiberg-Witten basic class enumeration"),
                                 ("exotic-cp2-5", cmd_exotic, "the full exotic CP2#5CP2bar pipeline")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", default=DEFAULT_CONFIG if name == "sw-enumerate" else None)
        s.add_argument("--jobs", type=int, help="worker processes (default FIBERFORGE_JOBS or 1)")
        s.add_argument("--box", help="literal, adjunction, or the config's box label")
        s.add_argument("--sphere-rule", choices=("square", "strict"), default="square")
        s.add_argument("--format", choices=("json", "text"), default="text")
        s.add_argument("--timing", action="store_true")
        s.set_defaults(func=func)
    return p


def _emit(out: Outcome, path: str | None) -> None:
    if out.text is not None:
        body = out.text
    elif out.report is not None:
        body = json.dumps(out.report, indent=2) + "\n"
    else:
        body = ""
    if path:
        Path(path).write_text(body)
    else:
        sys.stdout.write(body)


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    func: Callable[..., Outcome] = args.func
    try:
        out = func(args)
    except InputError as exc:
        print(f"fiberforge: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FibrationError, PlumbingError, HomologyError, ArithmeticError, AssertionError) as exc:
        print(f"fiberforge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(out, args.output)
    return out.code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
