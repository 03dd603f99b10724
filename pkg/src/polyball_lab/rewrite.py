"""Normal forms in the *-algebra generated by the twisted shifts.

Generators are letters: one per (block, index) pair, starred or not.  Every
word in the letters rewrites to a scalar multiple of the unique normal form

    S[1,a1]...S[k,ak] * adj(S[1,b1])...adj(S[k,bk])

(creators in ascending block order, then adjoints of block words in
ascending block order), or to zero.  The rules are

  R1  adj(s[i,s]) s[i,t]       ->  delta_st                          (orthogonal ranges)
  R2  adj(s[i,s]) s[j,t]       ->  conj(twist(i,j,s,t)) s[j,t] adj(s[i,s])   i != j
  R3  s[i,s] s[j,t]            ->  twist(i,j,s,t) s[j,t] s[i,s]               i > j
  R4  adj(s[i,s]) adj(s[j,t])  ->  twist(i,j,s,t) adj(s[j,t]) adj(s[i,s])     i > j

R4 is the adjoint of R3: conj(twist(j,i,t,s)) = twist(i,j,s,t).  Creator
pairs inside one block and creator-then-adjoint pairs are irreducible.

Coefficients are stored as an exact root-of-unity phase times a complex
float; rewriting only ever touches the phase, so confluence checks compare
bit-exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .phases import Phase, PhaseMatrix, aggregate_phase
from .words import MultiWord, Word


class AlgebraError(ValueError):
    """Invalid letters or mismatched model parameters."""


@dataclass(frozen=True)
class Letter:
    """One generator occurrence: starred flag, block, generator index."""

    star: bool
    block: int
    index: int

    def adjoint(self) -> "Letter":
        return Letter(not self.star, self.block, self.index)

    def __str__(self):
        core = f"S[{self.block}:{self.index}]"
        return f"adj({core})" if self.star else core


def validate_letters(lam: PhaseMatrix, word) -> tuple[Letter, ...]:
    word = tuple(word)
    for L in word:
        if not 1 <= L.block <= lam.k:
            raise AlgebraError(f"letter block {L.block} out of range 1..{lam.k}")
        if not 1 <= L.index <= lam.n[L.block - 1]:
            raise AlgebraError(
                f"letter index {L.index} out of range for block {L.block}"
            )
    return word


@dataclass(frozen=True)
class NormalMonomial:
    """phase * scale * S_creators * adj(S)_annihilators in normal form."""

    phase: Phase
    scale: complex
    creators: MultiWord
    annihilators: MultiWord

    def coefficient(self) -> complex:
        return self.phase.to_complex() * self.scale


def monomial_letters(creators: MultiWord, annihilators: MultiWord) -> tuple[Letter, ...]:
    """Letter sequence of the normal form.

    Creator letters appear in written order; the adjoint of a block word
    reverses its letters, so annihilator letters appear reversed per block.
    """
    out: list[Letter] = []
    for w in creators.parts:
        out.extend(Letter(False, w.block, s) for s in w.letters)
    for w in annihilators.parts:
        out.extend(Letter(True, w.block, s) for s in reversed(w.letters))
    return tuple(out)


@dataclass
class StarPolynomial:
    """Finite sum of normal-form monomials, keyed by (creators, annihilators)."""

    k: int
    terms: dict = field(default_factory=dict)

    @staticmethod
    def zero(k: int) -> "StarPolynomial":
        return StarPolynomial(k=k)

    @staticmethod
    def identity(lam: PhaseMatrix) -> "StarPolynomial":
        e = MultiWord.empty(lam.k)
        return StarPolynomial(k=lam.k, terms={(e, e): (lam.identity(), 1.0 + 0.0j)})

    @staticmethod
    def monomial(
        lam: PhaseMatrix,
        creators: MultiWord,
        annihilators: MultiWord,
        scale: complex = 1.0,
        phase: Phase | None = None,
    ) -> "StarPolynomial":
        p = StarPolynomial(k=lam.k)
        p.add_term(creators, annihilators, phase or lam.identity(), scale)
        return p

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def add_term(self, creators, annihilators, phase: Phase, scale: complex):
        if scale == 0:
            return
        key = (creators, annihilators)
        if key in self.terms:
            old_phase, old_scale = self.terms[key]
            # fold the phase ratio into the float factor of the incoming term
            ratio = (phase * old_phase.conjugate()).to_complex()
            new_scale = old_scale + ratio * scale
            if new_scale == 0:
                del self.terms[key]
            else:
                self.terms[key] = (old_phase, new_scale)
        else:
            self.terms[key] = (phase, scale)

    def monomials(self):
        for (creators, annihilators), (phase, scale) in sorted(
            self.terms.items(),
            key=lambda kv: (kv[0][1].degree, kv[0][0].degree, str(kv[0])),
        ):
            yield NormalMonomial(phase, scale, creators, annihilators)

    def creator_degree(self) -> int:
        """Max total word length |alpha| + |beta| over the stored terms."""
        if not self.terms:
            return 0
        return max(a.degree + b.degree for (a, b) in self.terms)

    def to_text(self) -> str:
        if self.is_zero:
            return "0"
        return " + ".join(monomial_text(m) for m in self.monomials())


def monomial_text(m: NormalMonomial) -> str:
    creators = "".join(
        f"S[{w.block}:{s}]" for w in m.creators.parts for s in w.letters
    )
    adjoints = "".join(
        f"adj(S[{w.block}:{s}])" for w in m.annihilators.parts for s in w.letters
    )
    if m.scale == 1:
        coeff = f"({m.phase})"
    elif m.phase.is_identity:
        coeff = f"({m.scale})"
    else:
        coeff = f"({m.phase})*({m.scale})"
    body = "*".join(part for part in (creators, adjoints) if part)
    return f"{coeff}*{body}" if body else coeff


def _redex_rule(lam: PhaseMatrix, a: Letter, b: Letter):
    """Return the rule tag applying to the adjacent pair (a, b), or None."""
    if a.star and not b.star:
        return "R1" if a.block == b.block else "R2"
    if not a.star and not b.star and a.block > b.block:
        return "R3"
    if a.star and b.star and a.block > b.block:
        return "R4"
    return None


def reduce_word(lam: PhaseMatrix, word, strategy: str = "leftmost") -> StarPolynomial:
    """Rewrite a letter word to its normal form (one monomial) or to zero.

    The strategy picks which redex fires first; both must give identical
    results (confluence is property-tested, not assumed).
    """
    if strategy not in ("leftmost", "rightmost"):
        raise AlgebraError(f"unknown strategy {strategy!r}")
    letters = list(validate_letters(lam, word))
    turns = 0

    while True:
        positions = range(len(letters) - 1)
        if strategy == "rightmost":
            positions = reversed(positions)
        fired = False
        for p in positions:
            a, b = letters[p], letters[p + 1]
            rule = _redex_rule(lam, a, b)
            if rule is None:
                continue
            if rule == "R1":
                if a.index != b.index:
                    return StarPolynomial.zero(lam.k)
                del letters[p : p + 2]
            elif rule == "R2":
                turns += lam.phase(a.block, b.block, a.index, b.index).conjugate().turns
                letters[p], letters[p + 1] = b, a
            else:  # R3 / R4 share the phase: twist(a.block, b.block, a.index, b.index)
                turns += lam.phase(a.block, b.block, a.index, b.index).turns
                letters[p], letters[p + 1] = b, a
            fired = True
            break
        if not fired:
            break

    creators = [[] for _ in range(lam.k)]
    annihilators = [[] for _ in range(lam.k)]
    for L in letters:
        (annihilators if L.star else creators)[L.block - 1].append(L.index)
    alpha = MultiWord.from_letters(tuple(tuple(ls) for ls in creators))
    # the adjoint of a block word carries its letters reversed
    beta = MultiWord.from_letters(tuple(tuple(reversed(ls)) for ls in annihilators))
    return StarPolynomial.monomial(
        lam, alpha, beta, scale=1.0 + 0.0j, phase=Phase(turns, lam.modulus)
    )


def multiply(lam: PhaseMatrix, p: StarPolynomial, q: StarPolynomial) -> StarPolynomial:
    """Bilinear product; every cross term is renormalized through reduce_word."""
    if p.k != lam.k or q.k != lam.k:
        raise AlgebraError("polynomial block count does not match the twist")
    out = StarPolynomial.zero(lam.k)
    for (pa, pb), (ph_p, sc_p) in p.terms.items():
        word_p = monomial_letters(pa, pb)
        for (qa, qb), (ph_q, sc_q) in q.terms.items():
            reduced = reduce_word(lam, word_p + monomial_letters(qa, qb))
            for (ra, rb), (ph_r, _one) in reduced.terms.items():
                out.add_term(ra, rb, ph_p * ph_q * ph_r, sc_p * sc_q)
    return out


def adjoint(p: StarPolynomial) -> StarPolynomial:
    """Conjugate-linear adjoint; swapping the word parts is already normal."""
    out = StarPolynomial.zero(p.k)
    for (a, b), (phase, scale) in p.terms.items():
        out.add_term(b, a, phase.conjugate(), scale.conjugate())
    return out


def add(p: StarPolynomial, q: StarPolynomial) -> StarPolynomial:
    if p.k != q.k:
        raise AlgebraError("cannot add polynomials over different block counts")
    out = StarPolynomial(k=p.k, terms=dict(p.terms))
    for (a, b), (phase, scale) in q.terms.items():
        out.add_term(a, b, phase, scale)
    return out


def scale(p: StarPolynomial, c: complex) -> StarPolynomial:
    out = StarPolynomial.zero(p.k)
    if c == 0:
        return out
    for (a, b), (phase, sc) in p.terms.items():
        out.add_term(a, b, phase, sc * c)
    return out


def rescale_generators(p: StarPolynomial, z: dict) -> StarPolynomial:
    """Substitute z[i,s]*S[i,s] for S[i,s]; z maps (i, s) to a Phase."""
    out = StarPolynomial.zero(p.k)
    for (a, b), (phase, sc) in p.terms.items():
        extra = phase
        for w in a.parts:
            for s in w.letters:
                extra = extra * z[(w.block, s)]
        for w in b.parts:
            for s in w.letters:
                extra = extra * z[(w.block, s)].conjugate()
        out.add_term(a, b, extra, sc)
    return out


# ---------------------------------------------------------------------------
# Symbolic action on basis labels; the algebraic ground truth for everything
# matrix-valued.


def letter_action(lam: PhaseMatrix, L: Letter, chi: MultiWord):
    """Apply one generator to a basis label.

    An unstarred letter (i, s) prepends s to part i and picks up the
    aggregated twist against the parts of lower blocks.  A starred letter
    strips s from the left of part i with the conjugate twist, or kills the
    vector.  Returns (phase, MultiWord) or None for zero; no truncation.
    """
    i, s = L.block, L.index
    if not 1 <= i <= lam.k or not 1 <= s <= lam.n[i - 1]:
        raise AlgebraError(f"letter {L} out of range for this model")
    turns = 0
    for j in range(1, i):
        turns += aggregate_phase(lam, i, s, chi.part(j)).turns
    if not L.star:
        return Phase(turns, lam.modulus), chi.replace_part(i, chi.part(i).prepend(s))
    if not chi.part(i).starts_with(s):
        return None
    return Phase(-turns, lam.modulus), chi.replace_part(i, chi.part(i).tail())


def word_action(lam: PhaseMatrix, word, chi: MultiWord):
    """Apply a letter word (rightmost letter first) to a basis label."""
    phase = lam.identity()
    current = chi
    for L in reversed(tuple(word)):
        step = letter_action(lam, L, current)
        if step is None:
            return None
        ph, current = step
        phase = phase * ph
    return phase, current


def evaluate_monomial(lam: PhaseMatrix, creators, annihilators, chi: MultiWord):
    """Apply a normal-form monomial to a basis label symbolically."""
    return word_action(lam, monomial_letters(creators, annihilators), chi)


def evaluate_polynomial(lam: PhaseMatrix, p: StarPolynomial, chi: MultiWord) -> dict:
    """Image of a basis label under p, as a map MultiWord -> complex."""
    out: dict[MultiWord, complex] = {}
    for (a, b), (phase, sc) in p.terms.items():
        hit = evaluate_monomial(lam, a, b, chi)
        if hit is None:
            continue
        ph, target = hit
        value = out.get(target, 0.0 + 0.0j) + (phase * ph).to_complex() * sc
        if value == 0:
            out.pop(target, None)
        else:
            out[target] = value
    return out


def min_annihilator_key(p: StarPolynomial):
    """A term key whose annihilator word has minimal total degree."""
    if p.is_zero:
        raise AlgebraError("the zero polynomial has no terms")
    return min(p.terms, key=lambda key: (key[1].degree, basis_key(key[1]), basis_key(key[0])))


def basis_key(w: MultiWord):
    return (w.degree, tuple(part.letters for part in w.parts))


def witnesses_nonzero(lam: PhaseMatrix, p: StarPolynomial) -> bool:
    """Decide p != 0 by evaluating on a minimal-annihilator basis label.

    Every evaluation of the zero polynomial is empty; a polynomial with a
    stored term is certified nonzero by a single well-chosen basis vector.
    """
    if p.is_zero:
        return False
    _, sigma = min_annihilator_key(p)
    image = evaluate_polynomial(lam, p, sigma)
    return any(v != 0 for v in image.values())
