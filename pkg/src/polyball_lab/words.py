"""Words over the generator blocks and the graded basis of the truncated model.

A model has k blocks; block i carries n_i free generators indexed 1..n_i.
A Word is a finite string of generator indices from a single block, stored
left to right as written.  A MultiWord holds one Word per block, in block
order, and labels a basis vector of the model space.  Creation operators
prepend a letter on the LEFT of the corresponding part.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


class ConfigError(ValueError):
    """Invalid model parameters: block count, arities, or truncation degree."""


@dataclass(frozen=True)
class Word:
    """A word in the free monoid of one block; empty letters = neutral element."""

    block: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if self.block < 1:
            raise ConfigError(f"block index must be >= 1, got {self.block}")
        if any(s < 1 for s in self.letters):
            raise ConfigError(f"generator indices must be >= 1, got {self.letters}")

    @property
    def degree(self) -> int:
        return len(self.letters)

    @property
    def is_empty(self) -> bool:
        return not self.letters

    def prepend(self, s: int) -> "Word":
        return Word(self.block, (s,) + self.letters)

    def starts_with(self, s: int) -> bool:
        return bool(self.letters) and self.letters[0] == s

    def tail(self) -> "Word":
        if not self.letters:
            raise ConfigError("cannot strip a letter from the empty word")
        return Word(self.block, self.letters[1:])


@dataclass(frozen=True)
class MultiWord:
    """One word per block, in block order; indexes a basis vector."""

    parts: tuple[Word, ...]

    def __post_init__(self):
        for pos, w in enumerate(self.parts, start=1):
            if w.block != pos:
                raise ConfigError(
                    f"part {pos} carries block {w.block}; parts must be in block order"
                )

    @staticmethod
    def empty(k: int) -> "MultiWord":
        return MultiWord(tuple(Word(i) for i in range(1, k + 1)))

    @staticmethod
    def from_letters(letter_tuples: tuple[tuple[int, ...], ...]) -> "MultiWord":
        return MultiWord(
            tuple(Word(i, ls) for i, ls in enumerate(letter_tuples, start=1))
        )

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def degree(self) -> int:
        return sum(w.degree for w in self.parts)

    def part(self, i: int) -> Word:
        return self.parts[i - 1]

    def replace_part(self, i: int, word: Word) -> "MultiWord":
        if word.block != i:
            raise ConfigError(f"word belongs to block {word.block}, expected {i}")
        parts = list(self.parts)
        parts[i - 1] = word
        return MultiWord(tuple(parts))

    def block_degrees(self) -> tuple[int, ...]:
        return tuple(w.degree for w in self.parts)

    def to_text(self) -> str:
        return "|".join(
            ".".join(str(s) for s in w.letters) if w.letters else "e"
            for w in self.parts
        )

    @staticmethod
    def from_text(text: str) -> "MultiWord":
        parts = []
        for i, chunk in enumerate(text.split("|"), start=1):
            chunk = chunk.strip()
            if chunk in ("e", ""):
                parts.append(Word(i))
            else:
                parts.append(Word(i, tuple(int(tok) for tok in chunk.split("."))))
        return MultiWord(tuple(parts))


def basis_sort_key(w: MultiWord):
    """Graded-then-lexicographic key; fixes matrix row/column indices."""
    return (w.degree, tuple(p.letters for p in w.parts))


def enumerate_basis(n, D: int) -> list[MultiWord]:
    """All MultiWords of total degree <= D, in graded-lexicographic order."""
    n = tuple(int(x) for x in n)
    if len(n) < 1:
        raise ConfigError("need at least one block")
    if any(x < 1 for x in n):
        raise ConfigError(f"every arity must be >= 1, got {n}")
    if D < 0:
        raise ConfigError(f"truncation degree must be >= 0, got {D}")

    per_block = []
    for i, arity in enumerate(n, start=1):
        words = [
            Word(i, ls)
            for length in range(D + 1)
            for ls in itertools.product(range(1, arity + 1), repeat=length)
        ]
        per_block.append(words)

    basis = [
        MultiWord(combo)
        for combo in itertools.product(*per_block)
        if sum(w.degree for w in combo) <= D
    ]
    basis.sort(key=basis_sort_key)
    return basis


def prepend_letter(w: MultiWord, i: int, s: int, n=None) -> MultiWord:
    """Concatenate generator s of block i on the left of part i."""
    if not 1 <= i <= w.k:
        raise ConfigError(f"block index {i} out of range 1..{w.k}")
    if s < 1 or (n is not None and s > n[i - 1]):
        raise ConfigError(f"generator index {s} out of range for block {i}")
    return w.replace_part(i, w.part(i).prepend(s))


def strip_leftmost(w: MultiWord, i: int) -> MultiWord:
    """Remove the leftmost letter of part i; inverse of prepend_letter."""
    if not 1 <= i <= w.k:
        raise ConfigError(f"block index {i} out of range 1..{w.k}")
    return w.replace_part(i, w.part(i).tail())
