"""End-to-end check that the rational blowdown of the 27-sphere plumbing is a minimal exotic manifold."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .homology import Basis, Configuration, H2Class, canonical_class, replay_transcript
from .plumbing import (
    PlumbingGraph,
    check_embedding,
    homeomorphism_type,
    k_omega_functional,
    lens_space_of_linear_plumbing,
    linear_plumbing,
    qhb_family_check,
    rational_blowdown_bookkeeping,
)
from .sw import (
    PipelineReport,
    SWProblem,
    ZBasis,
    ZFilter,
    box_bounds,
    default_jobs,
    run_enumeration,
    summarize,
)

DEFAULT_CONFIG = "exotic_cp2_5.json"


class StageFailure(RuntimeError):
    def __init__(self, stage: str, message: str, payload=None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.payload = payload


def data_path(name: str) -> Path:
    return Path(str(resources.files("fiberforge") / "data" / name))


def resolve_input(path: str | Path) -> Path:
    """An existing path, or a bundled data file of that name."""
    p = Path(path)
    if p.exists():
        return p
    bundled = data_path(p.name)
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"no such file: {path}")


def load_json(path: str | Path) -> dict:
    return json.loads(resolve_input(path).read_text())


def load_table(doc: Mapping) -> Configuration:
    basis = Basis.from_json(doc["basis"])
    cfg = Configuration(basis)
    for name, text in doc["classes"].items():
        cfg.add(name, H2Class.parse(basis, text))
    return cfg


@dataclass
class ExoticSetup:
    config: dict
    table: Configuration
    transcript: Configuration
    names: tuple[str, ...]
    plumbing: PlumbingGraph
    problem: SWProblem
    base_dir: Path


def _sibling(base: Path, name: str) -> Path:
    p = base / name
    return p if p.exists() else resolve_input(name)


def load_setup(config: str | Path | Mapping | None = None) -> ExoticSetup:
    if config is None or isinstance(config, (str, Path)):
        path = resolve_input(config or DEFAULT_CONFIG)
        doc, base = json.loads(path.read_text()), path.parent
    else:
        doc, base = dict(config), data_path(DEFAULT_CONFIG).parent
    table = load_table(json.loads(_sibling(base, doc["table"]).read_text()))
    transcript = replay_transcript(json.loads(_sibling(base, doc["transcript"]).read_text()))
    pdoc = json.loads(_sibling(base, doc["plumbing"]).read_text())
    names = tuple(pdoc["names"])
    plumbing = linear_plumbing(pdoc["weights"])
    basis = table.basis
    zb = ZBasis(
        tuple(z["name"] for z in doc["z_classes"]),
        tuple(H2Class.parse(basis, z["class"]) for z in doc["z_classes"]),
        tuple(int(z["genus"]) for z in doc["z_classes"]),
    )
    wall = doc["wall"]
    order = list(zb.names) + list(names)
    h_coeffs = [0] * len(order)
    for k, v in wall["H"].items():
        h_coeffs[order.index(k)] = int(v)
    flt = ZFilter(**doc.get("filter", {}))
    problem = SWProblem(zb, names, tuple(table[n] for n in names), plumbing, int(doc["p_square"]),
                        tuple(h_coeffs), H2Class.parse(basis, wall.get("reference", "h")), flt)
    return ExoticSetup(doc, table, transcript, names, plumbing, problem, base)


def policy_bounds(setup: ExoticSetup, policy: str, sphere_rule: str = "square") -> tuple[int, ...]:
    zb = setup.problem.zbasis
    box = setup.config.get("box", {})
    if policy in ("literal", "adjunction"):
        return box_bounds(zb, policy, sphere_rule)
    if policy == box.get("label", "reconciled"):
        return box_bounds(zb, "explicit", explicit=box["bounds"])
    raise StageFailure("configuration", f"unknown box policy {policy!r}")


def default_policy(setup: ExoticSetup) -> str:
    box = setup.config.get("box", {})
    return box.get("label", "literal") if box.get("policy") == "explicit" else box.get("policy", "literal")


def verify_table(setup: ExoticSetup) -> dict:
    mism = [n for n in setup.names if setup.table[n].coeffs != setup.transcript[n].coeffs]
    if mism:
        raise StageFailure("table", "transcript classes differ from the table", mism)
    if setup.table.basis != setup.transcript.basis:
        raise StageFailure("table", "transcript basis differs from the table basis")
    emb = check_embedding(setup.table, setup.names, setup.plumbing)
    if not emb.ok:
        raise StageFailure("table", "pairings do not reproduce the plumbing matrix", emb.to_json())
    lens = lens_space_of_linear_plumbing(setup.plumbing.weights)
    fam = qhb_family_check(lens.p, lens.q)
    return {"embedding": True, "det": setup.plumbing.det, "lens_space": lens.to_json(),
            "rational_ball_family": {"member": fam.member, "m": fam.m, "k": fam.k, "matched": fam.matched}}


def ambient_numbers(basis: Basis) -> tuple[int, int]:
    pos = sum(1 for i in range(basis.rank) if basis.gram[i][i] > 0)
    return basis.rank + 2, pos - (basis.rank - pos)


def run_exotic_pipeline(config=None, policy: str | None = None, jobs: int | None = None,
                        sphere_rule: str = "square") -> PipelineReport:
    t0 = time.perf_counter()
    setup = load_setup(config)
    jobs = jobs or default_jobs()
    policy = policy or default_policy(setup)
    bounds = policy_bounds(setup, policy, sphere_rule)

    checks: dict = {}
    checks["table"] = verify_table(setup)

    ambient = ambient_numbers(setup.table.basis)
    chi, sigma = rational_blowdown_bookkeeping(ambient, setup.plumbing)
    homeo = homeomorphism_type(chi, sigma, "unknown", True)
    checks["bookkeeping"] = {"ambient": list(ambient), "result": [chi, sigma], "homeomorphism": homeo.to_json()}

    kw = k_omega_functional(setup.table, setup.names, setup.plumbing)
    if not kw.positive:
        raise StageFailure("k_omega", "positivity certificate failed", kw.to_json())
    checks["k_omega"] = {"denominator": kw.denominator, "a_restricted": kw.restricted[0], "a_total": kw.total[0],
                         "positive": kw.positive}

    result = run_enumeration(setup.problem, bounds, jobs=jobs)
    others = {name: policy_bounds(setup, name) for name in ("literal", "adjunction")}
    others[policy] = bounds
    k = canonical_class(setup.table.basis)
    report = summarize(setup.problem, result, policy, bounds, others, canonical=k)
    report.checks = {**checks, **report.checks}

    published = setup.config.get("published", {})
    for key, want in published.items():
        got = report.counts.get(key)
        if got is not None and got != want:
            report.notes.append(f"{key}: {got} here, {want} published")
    lit = others.get("literal")
    if lit is not None:
        report.notes.append(f"literal bounds {list(lit)} give a box of {report.box_counts['literal']}")
    if report.counts["paired"] != report.counts["dimension_filtered"] * report.counts["p_classes"]:
        raise StageFailure("pairing", "paired count is not the product of the two sides")
    unique = report.checks.get("final_is_plus_minus_canonical", False)
    if not unique:
        raise StageFailure("integrality", "surviving classes are not exactly +-K", report.final_classes)
    report.verdict = (f"homeomorphic to {homeo.name}, not diffeomorphic (K.omega>0), "
                      "minimal (unique basic class +-K)")
    report.timing["total"] = time.perf_counter() - t0
    return report
