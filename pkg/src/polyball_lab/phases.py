"""Exact root-of-unity arithmetic for the inter-block twist.

Every twist scalar is exp(2*pi*1j * t / N) stored as the integer t modulo a
global modulus N, so products, conjugates, and aggregation over words are
exact integer operations.  The twist fixes, for each ordered pair of
distinct blocks (i, j) and generator indices (s, t), the scalar picked up
when generator (i, s) moves past generator (j, t); the two directions are
conjugate to each other.  Twists within a single block are not allowed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .words import Word


class TwistError(ValueError):
    """Invalid twist data or invalid use of the twist."""


# exact complex values at quarter-turn resolution keep float matrices exact
_QUARTER = {0: 1.0 + 0.0j, 1: 1.0j, 2: -1.0 + 0.0j, 3: -1.0j}


@dataclass(frozen=True)
class Phase:
    """A root of unity exp(2*pi*1j*turns/modulus)."""

    turns: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise TwistError(f"modulus must be >= 1, got {self.modulus}")
        object.__setattr__(self, "turns", self.turns % self.modulus)

    def __mul__(self, other: "Phase") -> "Phase":
        if self.modulus != other.modulus:
            raise TwistError("cannot multiply phases with different moduli")
        return Phase(self.turns + other.turns, self.modulus)

    def __pow__(self, exponent: int) -> "Phase":
        return Phase(self.turns * exponent, self.modulus)

    def conjugate(self) -> "Phase":
        return Phase(-self.turns, self.modulus)

    @property
    def is_identity(self) -> bool:
        return self.turns == 0

    def to_complex(self) -> complex:
        q, r = divmod(4 * self.turns, self.modulus)
        if r == 0:
            return _QUARTER[q % 4]
        return cmath.exp(2j * math.pi * self.turns / self.modulus)

    def __str__(self):
        q, r = divmod(4 * self.turns, self.modulus)
        if r == 0:
            return {0: "1", 1: "i", 2: "-1", 3: "-i"}[q % 4]
        return f"e({self.turns}/{self.modulus})"


@dataclass(frozen=True, eq=False)
class PhaseMatrix:
    """Complete twist datum: one exact phase per (i, j, s, t) with i != j."""

    k: int
    n: tuple[int, ...]
    modulus: int
    entries: dict = field(repr=False)

    def identity(self) -> Phase:
        return Phase(0, self.modulus)

    def phase(self, i: int, j: int, s: int, t: int) -> Phase:
        if i == j:
            raise TwistError("no twist within a single block")
        self._check(i, s)
        self._check(j, t)
        return Phase(self.entries[(i, j, s, t)], self.modulus)

    def _check(self, i: int, s: int):
        if not 1 <= i <= self.k:
            raise TwistError(f"block index {i} out of range 1..{self.k}")
        if not 1 <= s <= self.n[i - 1]:
            raise TwistError(f"generator index {s} out of range for block {i}")

    def compatible_with(self, other: "PhaseMatrix") -> bool:
        return (
            self.k == other.k
            and self.n == other.n
            and self.modulus == other.modulus
            and self.entries == other.entries
        )


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TwistError(f"turn fractions must be rational, got {value!r}")


def validate_lambda(k: int, n, raw) -> PhaseMatrix:
    """Build the complete twist from sparse (i, j, s, t, turn-fraction) data.

    The modulus is the lcm of all denominators.  A missing direction is
    filled by conjugation; if both directions are given they must be
    conjugate.  Pairs never mentioned default to the trivial twist.
    """
    n = tuple(int(x) for x in n)
    if k < 1 or len(n) != k or any(x < 1 for x in n):
        raise TwistError(f"bad block structure k={k}, n={n}")

    parsed: dict[tuple[int, int, int, int], Fraction] = {}
    order: dict[tuple[int, int, int, int], int] = {}
    for idx, item in enumerate(raw):
        i, j, s, t, frac = item
        frac = _as_fraction(frac)
        err = None
        if i == j:
            err = f"entry {idx}: twist within block {i} is not allowed"
        elif not (1 <= i <= k and 1 <= j <= k):
            err = f"entry {idx}: block pair ({i},{j}) out of range"
        elif not (1 <= s <= n[i - 1] and 1 <= t <= n[j - 1]):
            err = f"entry {idx}: generator pair ({s},{t}) out of range"
        elif (i, j, s, t) in parsed:
            err = f"entry {idx}: ({i},{j},{s},{t}) specified twice"
        if err is not None:
            exc = TwistError(err)
            exc.entry_index = idx
            raise exc
        parsed[(i, j, s, t)] = frac % 1
        order[(i, j, s, t)] = idx

    modulus = 1
    for frac in parsed.values():
        modulus = math.lcm(modulus, frac.denominator)

    entries: dict[tuple[int, int, int, int], int] = {}
    for (i, j, s, t), frac in parsed.items():
        turns = frac.numerator * (modulus // frac.denominator)
        mirror = (j, i, t, s)
        if mirror in parsed:
            other = parsed[mirror]
            if (frac + other) % 1 != 0:
                exc = TwistError(
                    f"twist at (i={i},j={j},s={s},t={t}) is not conjugate to its mirror"
                )
                exc.entry_index = max(order[(i, j, s, t)], order[mirror])
                raise exc
        entries[(i, j, s, t)] = turns % modulus
        entries[mirror] = (-turns) % modulus

    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i == j:
                continue
            for s in range(1, n[i - 1] + 1):
                for t in range(1, n[j - 1] + 1):
                    entries.setdefault((i, j, s, t), 0)

    return PhaseMatrix(k=k, n=n, modulus=modulus, entries=entries)


def aggregate_phase(lam: PhaseMatrix, i: int, s: int, beta: Word) -> Phase:
    """Product of lam(i, beta.block)(s, letter) over the letters of beta."""
    j = beta.block
    if i == j:
        raise TwistError("aggregate phase requires distinct blocks")
    turns = 0
    for t in beta.letters:
        turns += lam.phase(i, j, s, t).turns
    return Phase(turns, lam.modulus)


def aggregate_phase_words(lam: PhaseMatrix, alpha: Word, beta: Word) -> Phase:
    """Double product over the letters of alpha and beta (distinct blocks)."""
    if alpha.block == beta.block:
        raise TwistError("aggregate phase requires distinct blocks")
    turns = 0
    for s in alpha.letters:
        for t in beta.letters:
            turns += lam.phase(alpha.block, beta.block, s, t).turns
    return Phase(turns, lam.modulus)
