"""Words in Artin generators, written as whitespace-separated syllables like ``s^2 t^-1 s``."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Tuple

_SYLLABLE = re.compile(r"^([A-Za-z_][A-Za-z0-9_']*)(?:\^(-?\d+))?$")

Syllable = Tuple[str, int]


class WordSyntaxError(ValueError):
    pass


def _merge(syllables: Iterable[Syllable]) -> Tuple[Syllable, ...]:
    out: List[List] = []
    for gen, k in syllables:
        if k == 0:
            continue
        if out and out[-1][0] == gen:
            out[-1][1] += k
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([gen, k])
    return tuple((g, k) for g, k in out)


@dataclass(frozen=True)
class Word:
    """Freely reduced word stored as syllables; adjacent syllables use distinct generators."""

    syllables: Tuple[Syllable, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "syllables", _merge(self.syllables))

    @classmethod
    def parse(cls, text: str) -> "Word":
        sylls = []
        for tok in text.split():
            if tok in ("1", "e"):
                continue
            match = _SYLLABLE.match(tok)
            if not match:
                raise WordSyntaxError(f"bad syllable {tok!r}")
            k = int(match.group(2)) if match.group(2) is not None else 1
            if k == 0:
                raise WordSyntaxError(f"zero exponent in {tok!r}")
            sylls.append((match.group(1), k))
        return cls(tuple(sylls))

    @classmethod
    def from_letters(cls, letters: Iterable[Tuple[str, int]]) -> "Word":
        """Build from (generator, +-1) letters."""
        return cls(tuple(letters))

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        return " ".join(g if k == 1 else f"{g}^{k}" for g, k in self.syllables)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.syllables + other.syllables)

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        return Word(self.syllables * n)

    def inverse(self) -> "Word":
        return Word(tuple((g, -k) for g, k in reversed(self.syllables)))

    def letters(self) -> Iterator[Tuple[str, int]]:
        for g, k in self.syllables:
            sign = 1 if k > 0 else -1
            for _ in range(abs(k)):
                yield g, sign

    def __len__(self) -> int:
        return sum(abs(k) for _, k in self.syllables)

    @property
    def syllable_count(self) -> int:
        return len(self.syllables)

    def generators(self) -> set:
        return {g for g, _ in self.syllables}

    def exponent_sum(self) -> int:
        return sum(k for _, k in self.syllables)


def alternating(first: str, second: str, length: int) -> Word:
    letters = [(first if i % 2 == 0 else second, 1) for i in range(length)]
    return Word.from_letters(letters)


def conjugate(w: Word, x: Word) -> Word:
    """w x w^-1."""
    return w * x * w.inverse()
