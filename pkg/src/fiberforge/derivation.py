"""Derivation scripts, their replay certificates, and positivity audits."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .calculus import (
    InternalInconsistency,
    Move,
    MoveContext,
    MoveRejected,
    RelationRegistry,
    apply_move,
    standard_registry,
)
from .surface import CurveSystem, SurfaceError, standard_curve_system, word_action
from .words import TwistWord, WordError, resolve_vector, word_from_json

SCRIPT_FORMAT = "fiberforge-script/1"


def curve_system_for(surface: Mapping) -> CurveSystem:
    genus = int(surface["genus"])
    boundary = int(surface.get("boundary", 0))
    curves = surface.get("curves", "standard")
    if isinstance(curves, Mapping):
        return CurveSystem.from_json(curves)
    if curves == "standard":
        return standard_curve_system(genus, boundary)
    if curves == "lanterns":
        return standard_curve_system(genus, boundary, lanterns=True)
    raise SurfaceError(f"unknown curve system {curves!r}")


@dataclass
class DerivationScript:
    surface: dict
    source: TwistWord
    target: TwistWord
    moves: list[Move]
    relation_target: str = "identity"
    name: str = ""
    checkpoints: list[tuple[int, TwistWord]] = field(default_factory=list)

    @property
    def system(self) -> CurveSystem:
        return curve_system_for(self.surface)

    def to_json(self) -> dict:
        doc = {
            "format": SCRIPT_FORMAT,
            "name": self.name,
            "surface": self.surface,
            "relation_target": self.relation_target,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "moves": [m.to_json() for m in self.moves],
        }
        if self.checkpoints:
            doc["checkpoints"] = [{"after": k, "word": w.to_json()} for k, w in self.checkpoints]
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "DerivationScript":
        surface = dict(doc["surface"])
        g, b = int(surface["genus"]), int(surface.get("boundary", 0))
        return cls(
            surface=surface,
            source=word_from_json(doc["source"], g, b),
            target=word_from_json(doc["target"], g, b),
            moves=[Move.from_json(m) for m in doc["moves"]],
            relation_target=doc.get("relation_target", "identity"),
            name=doc.get("name", ""),
            checkpoints=[(int(c["after"]), word_from_json(c["word"], g, b)) for c in doc.get("checkpoints", [])],
        )

    @classmethod
    def load(cls, path) -> "DerivationScript":
        return cls.from_json(json.loads(Path(path).read_text()))

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")


def canonical(word: TwistWord) -> TwistWord:
    return word.expanded().merged()


@dataclass
class Certificate:
    name: str
    replay_ok: bool
    failing_move: int | None
    error: str | None
    audit: list[dict]
    twist_conservation_ok: bool
    checkpoints_ok: bool
    oracle_ok: bool
    oracle_identity: bool
    source_twists: int
    target_twists: int
    source_matrix: list[list[int]] | None = None
    target_matrix: list[list[int]] | None = None

    @property
    def valid(self) -> bool:
        return self.replay_ok and self.oracle_ok and self.twist_conservation_ok and self.checkpoints_ok

    @property
    def verdict(self) -> str:
        return "VALID" if self.valid else "INVALID"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "replay_ok": self.replay_ok,
            "failing_move": self.failing_move,
            "error": self.error,
            "moves": len(self.audit),
            "twist_conservation_ok": self.twist_conservation_ok,
            "checkpoints_ok": self.checkpoints_ok,
            "oracle_ok": self.oracle_ok,
            "oracle_identity": self.oracle_identity,
            "source_twists": self.source_twists,
            "target_twists": self.target_twists,
            "source_matrix": self.source_matrix,
            "target_matrix": self.target_matrix,
            "audit": self.audit,
        }

    def to_tsv(self) -> str:
        lines = ["index\tkind\tsite\trelation\tlength\ttwists\tdelta\texpected"]
        for a in self.audit:
            lines.append("\t".join(str(a.get(k, "")) for k in
                                   ("index", "kind", "site", "relation", "length", "twists", "delta", "expected")))
        lines.append(f"# verdict\t{self.verdict}\tfailing_move\t{self.failing_move}\terror\t{self.error or ''}")
        return "\n".join(lines) + "\n"


def expected_twist_delta(before: TwistWord, m: Move, registry: RelationRegistry) -> int:
    if m.kind == "insert_cancelling_pair":
        return 2 * abs(m.exp)
    if m.kind == "cancel_pair":
        return -2 * abs(before[m.site].exp)
    if m.kind == "relation_substitution" and m.scope == "word" and m.relation not in ("commute", "braid"):
        delta = registry[m.relation].twist_delta
        return delta if m.direction == "forward" else -delta
    return 0


def check_derivation(script: DerivationScript, system: CurveSystem | None = None,
                     registry: RelationRegistry | None = None) -> Certificate:
    system = system or script.system
    registry = registry or standard_registry(system)
    central = script.relation_target in ("identity", "boundary_multitwist")
    ctx = MoveContext(system, registry, central_target=central)
    word = script.source
    audit: list[dict] = []
    replay_ok, failing, error = True, None, None
    conservation = True
    checkpoints = dict(script.checkpoints)
    checkpoints_ok = True
    if 0 in checkpoints and canonical(word) != canonical(checkpoints[0]):
        checkpoints_ok = False
    for idx, m in enumerate(script.moves):
        try:
            expected = expected_twist_delta(word, m, registry)
            after = apply_move(word, m, ctx)
        except (MoveRejected, WordError, SurfaceError, InternalInconsistency, IndexError) as exc:
            replay_ok, failing, error = False, idx, f"move {idx} ({m.kind}) rejected: {exc}"
            break
        delta = after.twist_count - word.twist_count
        if delta != expected:
            conservation = False
        audit.append({
            "index": idx,
            "kind": m.kind,
            "site": m.site,
            "relation": m.relation or m.rule or "",
            "length": len(after),
            "twists": after.twist_count,
            "delta": delta,
            "expected": expected,
        })
        word = after
        if idx + 1 in checkpoints and canonical(word) != canonical(checkpoints[idx + 1]):
            checkpoints_ok = False
            if error is None:
                error = f"checkpoint after move {idx} does not match"
    if replay_ok and canonical(word) != canonical(script.target):
        replay_ok = False
        failing = len(script.moves)
        error = _first_difference(canonical(word), canonical(script.target))
    try:
        ms = word_action(script.source, system)
        mt = word_action(script.target, system)
        oracle_ok = ms == mt
        identity = ms.is_identity() and mt.is_identity()
    except (WordError, SurfaceError) as exc:
        ms = mt = None
        oracle_ok, identity = False, False
        error = error or f"oracle failed: {exc}"
    return Certificate(
        name=script.name,
        replay_ok=replay_ok,
        failing_move=failing,
        error=error,
        audit=audit,
        twist_conservation_ok=conservation,
        checkpoints_ok=checkpoints_ok,
        oracle_ok=oracle_ok,
        oracle_identity=identity,
        source_twists=script.source.twist_count,
        target_twists=script.target.twist_count,
        source_matrix=None if (oracle_ok or ms is None) else ms.tolist(),
        target_matrix=None if (oracle_ok or mt is None) else mt.tolist(),
    )


def _first_difference(got: TwistWord, want: TwistWord) -> str:
    for i, (a, b) in enumerate(zip(got.letters, want.letters)):
        if a != b:
            return f"replay ends with letter {i} = {a}, target has {b}"
    return f"replay ends with {len(got)} letters, target has {len(want)}"


@dataclass
class AuditReport:
    positive: bool
    twist_count: int
    max_cluster: int
    clusters: list[tuple[str, int]]
    separating_letters: list[int]

    def to_json(self) -> dict:
        return {
            "positive": self.positive,
            "twist_count": self.twist_count,
            "max_cluster": self.max_cluster,
            "clusters": [{"curve": c, "size": k} for c, k in self.clusters],
            "separating_letters": self.separating_letters,
        }


def positivity_audit(word: TwistWord, system: CurveSystem | None = None) -> AuditReport:
    """Clusters are maximal runs of adjacent letters on identical curve expressions."""
    clusters: list[tuple[str, int]] = []
    prev = None
    for l in word.letters:
        if prev is not None and l.curve == prev and l.exp > 0 and clusters[-1][1] > 0:
            clusters[-1] = (clusters[-1][0], clusters[-1][1] + l.exp)
        else:
            clusters.append((str(l.curve), l.exp if l.exp > 0 else 0))
        prev = l.curve
    separating = []
    if system is not None:
        for i, l in enumerate(word.letters):
            if system[l.curve.base].separating or not any(resolve_vector(l.curve, system)):
                separating.append(i)
    sizes = [k for _, k in clusters]
    return AuditReport(
        positive=word.positive,
        twist_count=word.twist_count,
        max_cluster=max(sizes, default=0),
        clusters=[c for c in clusters if c[1] > 1],
        separating_letters=separating,
    )
