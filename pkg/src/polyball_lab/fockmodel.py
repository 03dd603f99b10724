"""The truncated standard model: symbolic shift action and dense matrix views.

The symbolic action (rewrite.letter_action) is the ground truth; matrices
are degree-capped compressions of it.  Every matrix carries the creator
degree m of the expression that produced it, and operator identities are
asserted only on basis vectors of total degree <= D - m (the interior
contract): truncation error is confined to a boundary layer of known width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rewrite
from .phases import PhaseMatrix
from .rewrite import Letter, StarPolynomial
from .words import ConfigError, MultiWord, enumerate_basis


@dataclass
class OperatorMatrix:
    """Dense compression of an operator expression to the truncated basis."""

    mat: np.ndarray
    tag: str
    creator_degree: int

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


class TruncatedModel:
    """Degree-capped model space with cached shift matrices."""

    def __init__(self, lam: PhaseMatrix, D: int):
        self.lam = lam
        self.D = int(D)
        self.basis = enumerate_basis(lam.n, self.D)
        self.index = {w: p for p, w in enumerate(self.basis)}
        self._letter_cache: dict[Letter, np.ndarray] = {}

    @property
    def k(self) -> int:
        return self.lam.k

    @property
    def n(self) -> tuple[int, ...]:
        return self.lam.n

    @property
    def dim(self) -> int:
        return len(self.basis)

    def degrees(self) -> np.ndarray:
        return np.array([w.degree for w in self.basis])

    def interior_indices(self, m: int) -> np.ndarray:
        return np.nonzero(self.degrees() <= self.D - m)[0]

    def interior_projector(self, m: int) -> np.ndarray:
        mask = (self.degrees() <= self.D - m).astype(float)
        return np.diag(mask).astype(complex)

    # -- symbolic layer ----------------------------------------------------

    def symbolic_apply(self, letter: Letter, chi: MultiWord):
        """Exact action on a basis label; never truncates."""
        return rewrite.letter_action(self.lam, letter, chi)

    # -- matrix layer ------------------------------------------------------

    def letter_matrix(self, letter: Letter) -> np.ndarray:
        """Compression of a single generator; images beyond degree D drop."""
        cached = self._letter_cache.get(letter)
        if cached is not None:
            return cached
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        for col, chi in enumerate(self.basis):
            hit = self.symbolic_apply(letter, chi)
            if hit is None:
                continue
            phase, target = hit
            row = self.index.get(target)
            if row is not None:
                mat[row, col] = phase.to_complex()
        self._letter_cache[letter] = mat
        return mat

    def word_matrix(self, word) -> np.ndarray:
        """Product of per-letter compressions, rightmost letter acting first."""
        out = np.eye(self.dim, dtype=complex)
        for L in word:
            out = out @ self.letter_matrix(L)
        return out

    def creator_matrix(self, mw: MultiWord) -> np.ndarray:
        """Compression of S[1,a1]...S[k,ak] for the given multiword."""
        return self.word_matrix(rewrite.monomial_letters(mw, MultiWord.empty(self.k)))

    def build_matrix(self, p: StarPolynomial) -> OperatorMatrix:
        """Exact compression of a normal-form polynomial, term by term."""
        if p.k != self.k:
            raise ConfigError("polynomial block count does not match the model")
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        for col, chi in enumerate(self.basis):
            for (a, b), (phase, sc) in p.terms.items():
                hit = rewrite.evaluate_monomial(self.lam, a, b, chi)
                if hit is None:
                    continue
                ph, target = hit
                row = self.index.get(target)
                if row is not None:
                    mat[row, col] += (phase * ph).to_complex() * sc
        return OperatorMatrix(mat, tag=f"poly[{len(p.terms)} terms]",
                              creator_degree=p.creator_degree())

    def range_projection(self, i: int, r: float = 1.0) -> np.ndarray:
        """r^2 * sum_s S[i,s] adj(S[i,s]) as compressed matrices."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for s in range(1, self.n[i - 1] + 1):
            create = self.letter_matrix(Letter(False, i, s))
            annihilate = self.letter_matrix(Letter(True, i, s))
            out += create @ annihilate
        return (r * r) * out

    def defect_operator(self, r: float, blocks) -> OperatorMatrix:
        """prod_{i in blocks} (I - r^2 sum_s S[i,s] adj(S[i,s])), compressed.

        Each factor preserves total degree, so the product equals the
        compression of the full-space operator at every degree <= D.
        """
        blocks = tuple(blocks)
        if not blocks:
            raise ConfigError("defect operator needs a nonempty block subset")
        if any(not 1 <= i <= self.k for i in blocks):
            raise ConfigError(f"block subset {blocks} out of range 1..{self.k}")
        out = np.eye(self.dim, dtype=complex)
        eye = np.eye(self.dim, dtype=complex)
        for i in blocks:
            out = out @ (eye - self.range_projection(i, r))
        return OperatorMatrix(out, tag=f"defect[r={r},blocks={blocks}]",
                              creator_degree=2)

    def vacuum_index(self) -> int:
        return self.index[MultiWord.empty(self.k)]

    def coefficient_vector(self, coeffs: dict, max_degree: int) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        for mw, c in coeffs.items():
            if mw.degree > max_degree:
                raise ConfigError(
                    f"coefficient at degree {mw.degree} exceeds the cap {max_degree}"
                )
            vec[self.index[mw]] = c
        return vec

    def rank_one_approx(self, p_coeffs: dict, q_coeffs: dict, m: int) -> OperatorMatrix:
        """q_m(S) P_vac adj(p_m(S)) as a matrix: the outer product q p*.

        Creators applied to the vacuum pick up no twist, so the compression
        is the plain outer product of the coefficient vectors; it converges
        in norm to the rank-one map f -> <f, p> q as m grows.
        """
        if m > self.D:
            raise ConfigError(f"degree cap m={m} exceeds the truncation D={self.D}")
        degrees = self.degrees()
        u = self.coefficient_vector(q_coeffs, self.D)
        v = self.coefficient_vector(p_coeffs, self.D)
        u[degrees > m] = 0.0
        v[degrees > m] = 0.0
        return OperatorMatrix(np.outer(u, v.conj()), tag=f"rank_one[m={m}]",
                              creator_degree=2 * m)


# ---------------------------------------------------------------------------
# Exact interior checks of the defining relations.


def interior_relation_failures(model: TruncatedModel) -> list[str]:
    """Check the twisted commutation relations symbolically on the interior.

    For every basis label of degree <= D - 2 and every generator pair the
    two sides must agree in the exact phase integer and the target label.
    Returns a list of human-readable failures (empty = all relations hold).
    """
    lam = model.lam
    failures: list[str] = []
    interior = [w for w in model.basis if w.degree <= model.D - 2]

    def apply2(first: Letter, second: Letter, chi):
        hit = rewrite.letter_action(lam, first, chi)
        if hit is None:
            return None
        ph, mid = hit
        hit2 = rewrite.letter_action(lam, second, mid)
        if hit2 is None:
            return None
        ph2, out = hit2
        return (ph * ph2).turns, out

    for i in range(1, model.k + 1):
        for j in range(1, model.k + 1):
            if i == j:
                continue
            for s in range(1, model.n[i - 1] + 1):
                for t in range(1, model.n[j - 1] + 1):
                    lam_ij = lam.phase(i, j, s, t)
                    for chi in interior:
                        # creator relation: S[i,s]S[j,t] = twist * S[j,t]S[i,s]
                        lhs = apply2(Letter(False, j, t), Letter(False, i, s), chi)
                        rhs = apply2(Letter(False, i, s), Letter(False, j, t), chi)
                        if not _phase_match(lhs, rhs, lam_ij.turns, lam.modulus):
                            failures.append(
                                f"creator relation failed at (i={i},j={j},s={s},t={t}) on {chi.to_text()}"
                            )
                        # star relation: adj(S[i,s])S[j,t] = conj(twist) * S[j,t]adj(S[i,s])
                        lhs = apply2(Letter(False, j, t), Letter(True, i, s), chi)
                        rhs = apply2(Letter(True, i, s), Letter(False, j, t), chi)
                        if not _phase_match(lhs, rhs, -lam_ij.turns, lam.modulus):
                            failures.append(
                                f"star relation failed at (i={i},j={j},s={s},t={t}) on {chi.to_text()}"
                            )

    for i in range(1, model.k + 1):
        for s in range(1, model.n[i - 1] + 1):
            for t in range(1, model.n[i - 1] + 1):
                for chi in interior:
                    hit = apply2(Letter(False, i, t), Letter(True, i, s), chi)
                    if s == t:
                        ok = hit is not None and hit[0] == 0 and hit[1] == chi
                    else:
                        ok = hit is None
                    if not ok:
                        failures.append(
                            f"orthogonality failed at (i={i},s={s},t={t}) on {chi.to_text()}"
                        )
    return failures


def _phase_match(lhs, rhs, extra_turns: int, modulus: int) -> bool:
    """lhs == twist * rhs with twist = extra_turns; both may be zero."""
    if lhs is None and rhs is None:
        return True
    if lhs is None or rhs is None:
        return False
    lhs_turns, lhs_target = lhs
    rhs_turns, rhs_target = rhs
    return lhs_target == rhs_target and (lhs_turns - rhs_turns - extra_turns) % modulus == 0
