"""Second homology of rational surfaces: classes, configurations, blowups.

A basis is an ordered list of labels with a Gram matrix. The two families used
here are the diagonal form on {h, e_i} (with an explicit list of exceptional
indices, so a basis may skip an index after a blowdown) and the hyperbolic form
on {s, f}.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class HomologyError(ValueError):
    pass


@dataclass(frozen=True)
class Basis:
    labels: tuple[str, ...]
    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise HomologyError("basis labels must be distinct")
        if len(self.gram) != n or any(len(r) != n for r in self.gram):
            raise HomologyError("Gram matrix does not match the labels")
        if any(self.gram[i][j] != self.gram[j][i] for i in range(n) for j in range(n)):
            raise HomologyError("Gram matrix must be symmetric")

    @classmethod
    def rational(cls, indices: Iterable[int] | int) -> "Basis":
        """{h, e_i : i in indices} with pairing diag(1, -1, ..., -1)."""
        if isinstance(indices, int):
            indices = range(1, indices + 1)
        idx = sorted(indices)
        labels = ("h",) + tuple(f"e{i}" for i in idx)
        n = len(labels)
        gram = tuple(tuple((1 if i == 0 else -1) if i == j else 0 for j in range(n)) for i in range(n))
        return cls(labels, gram)

    @classmethod
    def hyperbolic(cls) -> "Basis":
        return cls(("s", "f"), ((0, 1), (1, 0)))

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def is_rational(self) -> bool:
        return bool(self.labels) and self.labels[0] == "h" and all(re.fullmatch(r"e\d+", l) for l in self.labels[1:])

    @property
    def exceptional_indices(self) -> list[int]:
        return [int(l[1:]) for l in self.labels[1:]] if self.is_rational else []

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise HomologyError(f"label {label} is not in the basis") from None

    def pair(self, u: Sequence[int], v: Sequence[int]):
        g = self.gram
        return sum(u[i] * g[i][j] * v[j] for i in range(len(u)) if u[i] for j in range(len(v)) if v[j] and g[i][j])

    def to_json(self) -> dict:
        if self.is_rational:
            idx = self.exceptional_indices
            n = max(idx, default=0)
            return {"positive": 1, "negative": n, "skip": [i for i in range(1, n + 1) if i not in idx]}
        return {"labels": list(self.labels), "gram": [list(r) for r in self.gram]}

    @classmethod
    def from_json(cls, doc: Mapping) -> "Basis":
        if "labels" in doc:
            return cls(tuple(doc["labels"]), tuple(tuple(int(x) for x in r) for r in doc["gram"]))
        if doc.get("kind") == "hyperbolic":
            return cls.hyperbolic()
        if int(doc.get("positive", 1)) != 1:
            raise HomologyError("only one positive generator h is supported")
        skip = set(int(i) for i in doc.get("skip", []))
        return cls.rational([i for i in range(1, int(doc["negative"]) + 1) if i not in skip])


@dataclass(frozen=True)
class H2Class:
    basis: Basis
    coeffs: tuple[int, ...]
    genus: int | None = None

    def __post_init__(self):
        if len(self.coeffs) != self.basis.rank:
            raise HomologyError("coefficient vector does not match the basis")

    @classmethod
    def parse(cls, basis: Basis, text: str, genus: int | None = None) -> "H2Class":
        """Parse expressions like ``4h - 2e1 - e2 + 3e18``."""
        coeffs = [0] * basis.rank
        text = text.replace(" ", "")
        if not text:
            raise HomologyError("empty class expression")
        for sign, num, label in re.findall(r"([+-]?)(\d*)([a-z]\w*)", text):
            c = int(num) if num else 1
            coeffs[basis.index(label)] += -c if sign == "-" else c
        if re.sub(r"([+-]?)(\d*)([a-z]\w*)", "", text):
            raise HomologyError(f"cannot parse class {text!r}")
        return cls(basis, tuple(coeffs), genus)

    @classmethod
    def from_mapping(cls, basis: Basis, terms: Mapping[str, int], genus: int | None = None) -> "H2Class":
        coeffs = [0] * basis.rank
        for label, c in terms.items():
            coeffs[basis.index(label)] += int(c)
        return cls(basis, tuple(coeffs), genus)

    def _check(self, other: "H2Class") -> None:
        if self.basis != other.basis:
            raise HomologyError("classes live in different bases")

    def __add__(self, other: "H2Class") -> "H2Class":
        self._check(other)
        return H2Class(self.basis, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "H2Class") -> "H2Class":
        self._check(other)
        return H2Class(self.basis, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "H2Class":
        return H2Class(self.basis, tuple(-a for a in self.coeffs), self.genus)

    def __mul__(self, k: int) -> "H2Class":
        return H2Class(self.basis, tuple(k * a for a in self.coeffs))

    __rmul__ = __mul__

    def __getitem__(self, label: str) -> int:
        return self.coeffs[self.basis.index(label)]

    @property
    def square(self) -> int:
        return pair(self, self)

    def with_genus(self, genus: int | None) -> "H2Class":
        return H2Class(self.basis, self.coeffs, genus)

    def __str__(self):
        parts = []
        for label, c in zip(self.basis.labels, self.coeffs):
            if not c:
                continue
            mag = "" if abs(c) == 1 else str(abs(c))
            parts.append(("-" if c < 0 else "+") + mag + label)
        s = "".join(parts).lstrip("+")
        return s or "0"

    def to_json(self) -> list[int]:
        return list(self.coeffs)


def pair(u: H2Class, v: H2Class) -> int:
    u._check(v)
    return u.basis.pair(u.coeffs, v.coeffs)


def canonical_class(basis: Basis | int) -> H2Class:
    """-3h + sum e_i on a rational basis, -2s - 2f on the hyperbolic one."""
    if isinstance(basis, int):
        basis = Basis.rational(basis)
    if basis.is_rational:
        return H2Class(basis, (-3,) + (1,) * (basis.rank - 1))
    if basis.labels == ("s", "f"):
        return H2Class(basis, (-2, -2))
    raise HomologyError("no canonical class is known for this basis")


def adjunction_genus(a: H2Class, k: H2Class | None = None) -> int:
    """Genus g with 2 - 2g = <-K, A> - A^2, i.e. 2g - 2 = A^2 + K.A."""
    k = k or canonical_class(a.basis)
    twice = a.square + pair(k, a) + 2
    if twice % 2:
        raise HomologyError(f"class {a} is not represented by the adjunction model")
    return twice // 2


def class_from_constraints(basis: Basis, square: int, genus: int, pairings: Mapping[str, int] | None = None,
                           classes: Mapping[str, H2Class] | None = None, box: int = 5,
                           k: H2Class | None = None) -> list[H2Class]:
    """All classes in the coefficient box [-box, box]^n with the given square, genus and pairings."""
    k = k or canonical_class(basis)
    pairings = dict(pairings or {})
    classes = dict(classes or {})
    out = []
    for coeffs in itertools.product(range(-box, box + 1), repeat=basis.rank):
        c = H2Class(basis, coeffs)
        if c.square != square:
            continue
        if (c.square + pair(k, c)) % 2 or (c.square + pair(k, c)) // 2 + 1 != genus:
            continue
        if all(pair(c, classes[n]) == v for n, v in pairings.items()):
            out.append(c.with_genus(genus))
    return out


@dataclass
class Configuration:
    basis: Basis
    classes: dict[str, H2Class] = field(default_factory=dict)
    intersections: dict[frozenset, int] = field(default_factory=dict)

    def __getitem__(self, name: str) -> H2Class:
        try:
            return self.classes[name]
        except KeyError:
            raise HomologyError(f"unknown class {name}") from None

    def add(self, name: str, c: H2Class) -> None:
        if c.basis != self.basis:
            raise HomologyError("class basis does not match the configuration")
        self.classes[name] = c

    def declare(self, a: str, b: str, count: int) -> None:
        self.intersections[frozenset((a, b))] = count

    def check(self) -> None:
        for key, count in self.intersections.items():
            names = sorted(key)
            a, b = (names[0], names[0]) if len(names) == 1 else names
            if a in self.classes and b in self.classes and pair(self[a], self[b]) != count:
                raise HomologyError(f"declared intersection {a}.{b} = {count} but the pairing is "
                                    f"{pair(self[a], self[b])}")

    def pairing_matrix(self, names: Sequence[str]) -> list[list[int]]:
        return [[pair(self[a], self[b]) for b in names] for a in names]

    def copy(self) -> "Configuration":
        return Configuration(self.basis, dict(self.classes), dict(self.intersections))


def _extend(c: H2Class, basis: Basis, extra: int = 0) -> H2Class:
    return H2Class(basis, c.coeffs + (0,) * extra, c.genus)


def _with_generator(b: Basis, label: str) -> tuple[Basis, int]:
    if b.is_rational and re.fullmatch(r"e\d+", label):
        k = int(label[1:])
        if k in b.exceptional_indices:
            raise HomologyError(f"{label} already exists")
        nb = Basis.rational(b.exceptional_indices + [k])
        return nb, nb.index(label)
    if label in b.labels:
        raise HomologyError(f"{label} already exists")
    n = b.rank
    gram = tuple(r + (0,) for r in b.gram) + (tuple(0 for _ in range(n)) + (-1,),)
    return Basis(b.labels + (label,), gram), n


def blowup(config: Configuration, center: Sequence[tuple[str, int]], name: str | None = None,
           label: str | None = None) -> Configuration:
    """Blow up a point lying on the listed classes with the given multiplicities.

    A new generator of square -1 is added to the basis (``e{k}`` on an
    {h, e_i} basis, otherwise the class name); each listed class loses
    multiplicity times the new generator. The exceptional sphere is added to
    the configuration under `name`.
    """
    b = config.basis
    if label is None:
        if b.is_rational:
            label = f"e{max(b.exceptional_indices, default=0) + 1}"
        elif name is not None:
            label = name
        else:
            raise HomologyError("blowups on a non-rational basis need a name")
    nb, pos = _with_generator(b, label)

    def lift(c: H2Class) -> H2Class:
        coeffs = list(c.coeffs)
        coeffs.insert(pos, 0)
        return H2Class(nb, tuple(coeffs), c.genus)

    out = Configuration(nb, {n: lift(c) for n, c in config.classes.items()}, dict(config.intersections))
    for cname, mult in center:
        if mult < 1:
            raise HomologyError("blowup multiplicities must be positive")
        c = out[cname]
        coeffs = list(c.coeffs)
        coeffs[pos] -= mult
        out.classes[cname] = H2Class(nb, tuple(coeffs), c.genus)
    e = [0] * nb.rank
    e[pos] = 1
    out.classes[name or label] = H2Class(nb, tuple(e), 0)
    return out


def blowdown(config: Configuration, name: str) -> Configuration:
    """Blow down the exceptional class `name`, which must be a basis generator e_k."""
    b = config.basis
    c = config[name]
    gens = [i for i, x in enumerate(c.coeffs) if x]
    if len(gens) != 1 or c.coeffs[gens[0]] != 1:
        raise HomologyError(f"{name} = {c} is not an exceptional generator")
    pos = gens[0]
    if c.square != -1 or (c.genus not in (None, 0)) or any(b.gram[pos][j] for j in range(b.rank) if j != pos):
        raise HomologyError(f"{name} is not an orthogonal (-1)-sphere generator")
    keep = [i for i in range(b.rank) if i != pos]
    nb = Basis(tuple(b.labels[i] for i in keep), tuple(tuple(b.gram[i][j] for j in keep) for i in keep))
    out = Configuration(nb, {}, {key: v for key, v in config.intersections.items() if name not in key})
    for n, cl in config.classes.items():
        if n == name:
            continue
        coeffs = cl.coeffs[:pos] + cl.coeffs[pos + 1:]
        out.classes[n] = H2Class(nb, coeffs, cl.genus)
    return out


def basis_change(config: Configuration, target: Basis, images: Mapping[str, H2Class]) -> Configuration:
    """Rewrite every class through the generator images, which must form an isometry."""
    src = config.basis
    missing = [l for l in src.labels if l not in images]
    if missing:
        raise HomologyError(f"no image for generators {missing}")
    for i, a in enumerate(src.labels):
        for j, b in enumerate(src.labels):
            if pair(images[a], images[b]) != src.gram[i][j]:
                raise HomologyError(f"mapping is not an isometry: {a}.{b} = {src.gram[i][j]} "
                                    f"but images pair to {pair(images[a], images[b])}")
    out = Configuration(target, {}, dict(config.intersections))
    for n, c in config.classes.items():
        coeffs = [0] * target.rank
        for label, x in zip(src.labels, c.coeffs):
            if x:
                for t, y in enumerate(images[label].coeffs):
                    coeffs[t] += x * y
        out.classes[n] = H2Class(target, tuple(coeffs), c.genus)
    for a in config.classes:
        for b in config.classes:
            if pair(config[a], config[b]) != pair(out[a], out[b]):
                raise HomologyError("basis change altered a pairing")
    return out


# ---------------------------------------------------------------------------
# transcripts


def load_transcript(path) -> dict:
    return json.loads(Path(path).read_text())


def replay_transcript(doc: Mapping) -> Configuration:
    """Replay a blowup/blowdown transcript document and return the final configuration.

    Ops: ``blowup`` {center: [[name, mult]], name}, ``blowdown`` {name},
    ``basis_change`` {basis, images}, ``rename`` {names: {old: new}}, ``drop`` {names}.
    """
    basis = Basis.from_json(doc["basis"])
    config = Configuration(basis)
    for name, spec in doc["classes"].items():
        genus = spec.get("genus") if isinstance(spec, Mapping) else None
        expr = spec["class"] if isinstance(spec, Mapping) else spec
        config.add(name, H2Class.parse(basis, expr, genus))
    for step in doc["steps"]:
        op = step["op"]
        if op == "blowup":
            config = blowup(config, [(n, int(m)) for n, m in step["center"]], step.get("name"), step.get("label"))
        elif op == "blowdown":
            config = blowdown(config, step["name"])
        elif op == "basis_change":
            target = Basis.from_json(step["basis"])
            images = {k: H2Class.parse(target, v) for k, v in step["images"].items()}
            config = basis_change(config, target, images)
        elif op == "rename":
            moved = {new: config.classes.pop(old) for old, new in step["names"].items()}
            clash = set(moved) & set(config.classes)
            if clash:
                raise HomologyError(f"rename would overwrite {sorted(clash)}")
            config.classes.update(moved)
        elif op == "drop":
            for n in step["names"]:
                config.classes.pop(n)
        else:
            raise HomologyError(f"unknown transcript op {op!r}")
    return config
