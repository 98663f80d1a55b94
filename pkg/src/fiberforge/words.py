"""Twist words over named curves, with conjugated curve expressions.

A conjugated curve (base, conj) stands for the image of the base curve under the
mapping class conj, where conj is a word of plain twists read as a product
(rightmost letter acts first). Conjugators are always kept freely reduced with
adjacent equal bases merged, which is the only normalization ever performed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .surface import CurveSystem, SurfaceError, Vector, transvect

Conj = tuple[tuple[str, int], ...]


class WordError(ValueError):
    pass


def reduce_conj(seq: Iterable[tuple[str, int]]) -> Conj:
    stack: list[tuple[str, int]] = []
    for base, exp in seq:
        if exp == 0:
            continue
        if stack and stack[-1][0] == base:
            merged = stack[-1][1] + exp
            stack.pop()
            if merged:
                stack.append((base, merged))
        else:
            stack.append((base, exp))
    return tuple(stack)


def invert_conj(seq: Sequence[tuple[str, int]]) -> Conj:
    return tuple((b, -e) for b, e in reversed(seq))


def is_reduced(seq: Sequence[tuple[str, int]]) -> bool:
    return all(e != 0 for _, e in seq) and all(seq[i][0] != seq[i + 1][0] for i in range(len(seq) - 1))


@dataclass(frozen=True, order=True)
class CurveExpr:
    base: str
    conj: Conj = ()

    def __post_init__(self):
        if not is_reduced(self.conj):
            object.__setattr__(self, "conj", reduce_conj(self.conj))

    def conjugated(self, by: Sequence[tuple[str, int]]) -> "CurveExpr":
        """Image under the mapping class `by` (applied after the current conjugator)."""
        return CurveExpr(self.base, reduce_conj(tuple(by) + self.conj))

    def twist_word(self, exp: int = 1) -> Conj:
        """t_self^exp written as a word of plain twists."""
        return reduce_conj(self.conj + ((self.base, exp),) + invert_conj(self.conj))

    @property
    def plain(self) -> bool:
        return not self.conj

    def __str__(self):
        if not self.conj:
            return self.base
        return f"{self.base}{{{format_conj(self.conj)}}}"


@dataclass(frozen=True)
class Letter:
    curve: CurveExpr
    exp: int = 1

    def __post_init__(self):
        if self.exp == 0:
            raise WordError("twist exponents must be nonzero")

    def __str__(self):
        return str(self.curve) if self.exp == 1 else f"{self.curve}^{self.exp}"


@dataclass(frozen=True)
class TwistWord:
    genus: int
    boundary: int
    letters: tuple[Letter, ...] = ()

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    @property
    def twist_count(self) -> int:
        return sum(abs(l.exp) for l in self.letters)

    @property
    def positive(self) -> bool:
        return all(l.exp > 0 for l in self.letters)

    def with_letters(self, letters: Iterable[Letter]) -> "TwistWord":
        return TwistWord(self.genus, self.boundary, tuple(letters))

    def __add__(self, other: "TwistWord") -> "TwistWord":
        if (self.genus, self.boundary) != (other.genus, other.boundary):
            raise WordError("cannot concatenate words on different surfaces")
        return self.with_letters(self.letters + other.letters)

    def __mul__(self, k: int) -> "TwistWord":
        return self.with_letters(self.letters * k)

    def inverse(self) -> "TwistWord":
        return self.with_letters(Letter(l.curve, -l.exp) for l in reversed(self.letters))

    def conjugated(self, by: Sequence[tuple[str, int]]) -> "TwistWord":
        return self.with_letters(Letter(l.curve.conjugated(by), l.exp) for l in self.letters)

    def expanded(self) -> "TwistWord":
        out = []
        for l in self.letters:
            sign = 1 if l.exp > 0 else -1
            out.extend([Letter(l.curve, sign)] * abs(l.exp))
        return self.with_letters(out)

    def merged(self) -> "TwistWord":
        out: list[Letter] = []
        for l in self.letters:
            if out and out[-1].curve == l.curve:
                e = out[-1].exp + l.exp
                out.pop()
                if e:
                    out.append(Letter(l.curve, e))
            else:
                out.append(l)
        return self.with_letters(out)

    def bases(self) -> set[str]:
        names = set()
        for l in self.letters:
            names.add(l.curve.base)
            names.update(b for b, _ in l.curve.conj)
        return names

    def __str__(self):
        return " ".join(str(l) for l in self.letters) or "1"

    def to_json(self) -> list:
        return [letter_to_json(l) for l in self.letters]


def letter_to_json(l: Letter) -> dict:
    return {
        "base": l.curve.base,
        "conjugator": [{"base": b, "conjugator": [], "exp": e} for b, e in l.curve.conj],
        "exp": l.exp,
    }


def conj_from_json(items: Sequence[Mapping]) -> Conj:
    seq: list[tuple[str, int]] = []
    for item in items:
        inner = conj_from_json(item.get("conjugator", []))
        seq.extend(CurveExpr(item["base"], inner).twist_word(int(item.get("exp", 1))))
    return reduce_conj(seq)


def word_from_json(items: Sequence[Mapping], genus: int, boundary: int = 0) -> TwistWord:
    letters = []
    for item in items:
        curve = CurveExpr(item["base"], conj_from_json(item.get("conjugator", [])))
        letters.append(Letter(curve, int(item.get("exp", 1))))
    return TwistWord(genus, boundary, tuple(letters))


def format_conj(conj: Conj) -> str:
    return " ".join(b if e == 1 else f"{b}^{e}" for b, e in conj)


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*)(\{[^{}]*\})?(\^-?\d+)?")


def parse_conj(text: str) -> Conj:
    seq = []
    for letter in parse_letters(text):
        seq.extend(letter.curve.twist_word(letter.exp))
    return reduce_conj(seq)


def parse_letters(text: str) -> list[Letter]:
    letters = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise WordError(f"cannot parse word at {text[pos:]!r}")
        base, conj, exp = m.groups()
        curve = CurveExpr(base, parse_conj(conj[1:-1]) if conj else ())
        letters.append(Letter(curve, int(exp[1:]) if exp else 1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return letters


def parse_word(text: str, genus: int, boundary: int = 0) -> TwistWord:
    """Parse words such as ``c1^3 c3{c2^-1 c5} a``; ``1`` is the empty word."""
    if text.strip() in ("", "1"):
        return TwistWord(genus, boundary, ())
    return TwistWord(genus, boundary, tuple(parse_letters(text)))


@lru_cache(maxsize=200_000)
def _resolve(system: CurveSystem, base: str, conj: Conj) -> Vector:
    v = system.vector(base)
    for b, e in reversed(conj):
        v = transvect(v, system.vector(b), e)
    return v


def resolve_vector(curve: CurveExpr, system: CurveSystem) -> Vector:
    try:
        return _resolve(system, curve.base, curve.conj)
    except SurfaceError as exc:
        raise WordError(f"cannot resolve {curve}: {exc}") from None


def same_up_to_sign(u: Sequence[int], v: Sequence[int]) -> bool:
    return tuple(u) == tuple(v) or tuple(u) == tuple(-x for x in v)
