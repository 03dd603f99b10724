"""Invariant and co-invariant subspace machinery on the tensored model.

Subspaces live in (truncated model) tensor (auxiliary space).  Adjoints
lower the degree, so co-invariance is exact at truncation; invariance
raises the degree and is certified only up to a buffer b, with every
derived assertion shrunk to basis degrees <= D - b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .berezin import berezin_kernel
from .fockmodel import TruncatedModel
from .polyball import RowTuple, check_membership, mixed_defect, norm2
from .rewrite import Letter

RANK_TOL = 1e-9
ORTHO_TOL = 1e-12


class SubspaceError(ValueError):
    """Subspace rejected: wrong invariance, buffer, or positivity."""


def _orthonormalize(vectors: np.ndarray, rank_tol: float = RANK_TOL):
    """Column space basis via SVD; returns (Q, conditioning report)."""
    if vectors.ndim != 2 or vectors.shape[1] == 0:
        raise SubspaceError("need at least one spanning vector")
    u, svals, _ = np.linalg.svd(vectors, full_matrices=False)
    scale = svals[0] if svals.size and svals[0] > 0 else 1.0
    keep = svals > rank_tol * scale
    cond = {
        "largest_sv": float(svals[0]) if svals.size else 0.0,
        "smallest_kept_sv": float(svals[keep][-1]) if keep.any() else 0.0,
        "rank": int(keep.sum()),
    }
    return u[:, keep], cond


@dataclass
class SubspaceHandle:
    """Orthonormal frame for a subspace of model tensor aux."""

    model: TruncatedModel
    aux_dim: int
    Q: np.ndarray
    conditioning: dict

    @staticmethod
    def from_vectors(model: TruncatedModel, aux_dim: int, vectors) -> "SubspaceHandle":
        vectors = np.asarray(vectors, dtype=complex)
        if vectors.shape[0] != model.dim * aux_dim:
            raise SubspaceError(
                f"vectors live in dimension {vectors.shape[0]}, "
                f"ambient is {model.dim * aux_dim}"
            )
        Q, cond = _orthonormalize(vectors)
        return SubspaceHandle(model, aux_dim, Q, cond)

    @property
    def ambient_dim(self) -> int:
        return self.model.dim * self.aux_dim

    @property
    def dim(self) -> int:
        return self.Q.shape[1]

    def projector(self) -> np.ndarray:
        return self.Q @ self.Q.conj().T

    def tensor_op(self, letter: Letter) -> np.ndarray:
        return np.kron(self.model.letter_matrix(letter), np.eye(self.aux_dim))

    def generators(self):
        for i in range(1, self.model.k + 1):
            for s in range(1, self.model.n[i - 1] + 1):
                yield i, s

    def coinvariance_residual(self) -> tuple[float, tuple[int, int] | None]:
        """Adjoints lower degree, so this is exact; returns worst (i, s)."""
        comp = np.eye(self.ambient_dim) - self.projector()
        worst, where = 0.0, None
        for i, s in self.generators():
            r = norm2(comp @ self.tensor_op(Letter(True, i, s)) @ self.Q)
            if r > worst:
                worst, where = r, (i, s)
        return worst, where

    def invariance_residual(self, buffer: int) -> float:
        """Failure of shift invariance, measured below degree D - buffer.

        Components above the certified band may have been clipped by the
        truncation, so only the low-degree part of the image is trusted.
        """
        low = np.kron(self.model.interior_projector(buffer), np.eye(self.aux_dim))
        comp = np.eye(self.ambient_dim) - self.projector()
        worst = 0.0
        for i, s in self.generators():
            worst = max(worst, norm2(low @ comp @ self.tensor_op(Letter(False, i, s)) @ self.Q))
        return worst

    def vacuum_slice(self) -> np.ndarray:
        """Components of the frame at the vacuum label: an aux x dim block."""
        v = self.model.vacuum_index()
        return self.Q[v * self.aux_dim : (v + 1) * self.aux_dim, :]

    def low_degree_members(self, buffer: int) -> np.ndarray:
        """Orthonormal basis of the part of M supported below D - buffer."""
        high = np.kron(
            np.eye(self.model.dim) - self.model.interior_projector(buffer),
            np.eye(self.aux_dim),
        )
        block = high @ self.Q
        _, svals, vh = np.linalg.svd(block, full_matrices=True)
        scale = max(1.0, svals[0] if svals.size else 1.0)
        padded = np.concatenate([svals, np.zeros(self.dim - svals.size)])
        null = vh.conj().T[:, padded <= RANK_TOL * scale]
        return self.Q @ null


@dataclass
class SpanVerdict:
    vacuum_dim: int
    span_rank: int
    expected_rank: int
    contained_in_tensor: float  # residual of M inside model (x) vacuum space

    @property
    def holds(self) -> bool:
        return self.span_rank == self.expected_rank


def coinvariant_span(M: SubspaceHandle, tol: float = 1e-10):
    """Creator images of a co-invariant subspace fill model tensor L.

    L is the vacuum slice of M.  Both inclusions are certified exactly at
    truncation: creators shift degrees, so clipping commutes with the span.
    Returns (L frame, verdict); raises for non-co-invariant input.
    """
    resid, where = M.coinvariance_residual()
    if resid > tol:
        raise SubspaceError(
            f"subspace is not co-invariant: adjoint {where} leaks {resid:.2e}"
        )

    Lframe, _ = _orthonormalize(M.vacuum_slice())
    ldim = Lframe.shape[1]

    columns = [M.Q]
    eye_aux = np.eye(M.aux_dim)
    for mw in M.model.basis:
        if mw.degree == 0:
            continue
        columns.append(np.kron(M.model.creator_matrix(mw), eye_aux) @ M.Q)
    stacked = np.hstack(columns)
    svals = np.linalg.svd(stacked, compute_uv=False)
    scale = max(1.0, svals[0] if svals.size else 1.0)
    rank = int((svals > RANK_TOL * scale).sum())

    # containment: every member must have aux components inside L
    proj_L = Lframe @ Lframe.conj().T
    inside = np.kron(np.eye(M.model.dim), proj_L)
    contained = norm2((np.eye(M.ambient_dim) - inside) @ M.Q)

    verdict = SpanVerdict(
        vacuum_dim=ldim,
        span_rank=rank,
        expected_rank=M.model.dim * ldim,
        contained_in_tensor=contained,
    )
    return Lframe, verdict


@dataclass
class BeurlingReport:
    min_defect_eig: float
    doubly_residual: float | None  # None when no interior members exist
    interior_dim: int
    is_beurling: bool


def defect_of_operator(model: TruncatedModel, aux_dim: int, Y: np.ndarray) -> np.ndarray:
    """(id - Phi_1) o ... o (id - Phi_k) applied to an ambient operator."""
    X = np.asarray(Y, dtype=complex)
    for i in range(model.k, 0, -1):
        phi = np.zeros_like(X)
        for s in range(1, model.n[i - 1] + 1):
            V = np.kron(model.letter_matrix(Letter(False, i, s)), np.eye(aux_dim))
            phi += V @ X @ V.conj().T
        X = X - phi
    return X


def beurling_conditions(M: SubspaceHandle, buffer: int = 2,
                        tol: float = 1e-10) -> BeurlingReport:
    """Positivity of the projection defect and starred commutation on M.

    Both conditions characterize ranges of inner intertwining operators;
    they are evaluated on the interior of degree D - buffer only, where the
    truncation is faithful.
    """
    if buffer < 2:
        raise SubspaceError("buffer must be >= 2: the defect has creator degree 2")
    inv = M.invariance_residual(buffer)
    if inv > tol:
        raise SubspaceError(
            f"subspace is not shift-invariant below the buffer ({inv:.2e}); "
            "either the buffer is too small or the subspace is not invariant"
        )

    defect = defect_of_operator(M.model, M.aux_dim, M.projector())
    low_idx = np.nonzero(
        np.repeat(M.model.degrees() <= M.model.D - buffer, M.aux_dim)
    )[0]
    core = defect[np.ix_(low_idx, low_idx)]
    min_eig = float(np.linalg.eigvalsh((core + core.conj().T) / 2).min())

    W = M.low_degree_members(buffer)
    doubly = None
    if W.shape[1]:
        lam = M.model.lam
        P = M.projector()
        worst = 0.0
        for i, s in M.generators():
            for j, t in M.generators():
                if i == j:
                    continue
                A = P @ M.tensor_op(Letter(False, i, s)) @ P
                B = P @ M.tensor_op(Letter(False, j, t)) @ P
                conj_lam = lam.phase(i, j, s, t).conjugate().to_complex()
                worst = max(
                    worst, norm2((A.conj().T @ B - conj_lam * B @ A.conj().T) @ W)
                )
        doubly = worst

    ok = min_eig >= -tol and (doubly is None or doubly <= 10 * tol)
    return BeurlingReport(
        min_defect_eig=min_eig,
        doubly_residual=doubly,
        interior_dim=W.shape[1],
        is_beurling=ok,
    )


@dataclass
class FactorizationResult:
    A: np.ndarray
    domain_model: TruncatedModel
    domain_aux: int
    factor_residual: float  # |Y - A A*| on the interior
    multianalytic_residual: float
    range_dim: int

    def to_json(self) -> dict:
        return {
            "domain_degree": self.domain_model.D,
            "domain_aux": self.domain_aux,
            "factor_residual": self.factor_residual,
            "multianalytic_residual": self.multianalytic_residual,
            "range_dim": self.range_dim,
        }


def beurling_factorize(model: TruncatedModel, aux_dim: int, Y: np.ndarray,
                       tol: float = 1e-8, buffer: int = 2) -> FactorizationResult:
    """Factor Y = A A* with A intertwining the shifts, when the defect allows.

    The construction compresses the adjoint shifts to the range of sqrt(Y),
    producing a jointly nilpotent tuple whose kernel transports Y back as a
    multi-analytic factor.  Rejects inputs whose projection defect has an
    interior eigenvalue below -tol.
    """
    Y = np.asarray(Y, dtype=complex)
    ambient = model.dim * aux_dim
    if Y.shape != (ambient, ambient):
        raise SubspaceError(f"operator must be {ambient}x{ambient}")
    if norm2(Y - Y.conj().T) > tol:
        raise SubspaceError("operator is not Hermitian")

    defect = defect_of_operator(model, aux_dim, Y)
    low_idx = np.nonzero(np.repeat(model.degrees() <= model.D - buffer, aux_dim))[0]
    core = defect[np.ix_(low_idx, low_idx)]
    dmin = float(np.linalg.eigvalsh((core + core.conj().T) / 2).min())
    if dmin < -tol:
        raise SubspaceError(
            f"defect of the operator has interior eigenvalue {dmin:.3e}; "
            "positivity of the defect is necessary for a multi-analytic factorization"
        )

    evals, evecs = np.linalg.eigh((Y + Y.conj().T) / 2)
    if evals.min() < -tol:
        raise SubspaceError(f"operator has eigenvalue {evals.min():.3e} below -{tol:.1e}")
    clamped = np.clip(evals, 0.0, None)
    keep = clamped > RANK_TOL * max(1.0, float(clamped.max(initial=0.0)))
    B = evecs[:, keep]
    lam_half = np.sqrt(clamped[keep])
    g = int(keep.sum())
    if g == 0:
        raise SubspaceError("operator is numerically zero; nothing to factor")

    # compress the adjoint shifts to the range of sqrt(Y)
    T_rows = []
    inv_half = 1.0 / lam_half
    for i in range(1, model.k + 1):
        row = []
        for s in range(1, model.n[i - 1] + 1):
            S_star = np.kron(model.letter_matrix(Letter(True, i, s)), np.eye(aux_dim))
            C = (lam_half[:, None] * (B.conj().T @ S_star @ B)) * inv_half[None, :]
            row.append(C.conj().T)
        T_rows.append(tuple(row))
    T = RowTuple(model.lam, tuple(T_rows))

    kern = berezin_kernel(T, tol=max(tol, 1e-8))
    A = (B * lam_half[None, :]) @ kern.K.conj().T

    low = np.kron(model.interior_projector(buffer), np.eye(aux_dim))
    factor_residual = norm2(low @ (Y - A @ A.conj().T) @ low)

    dom_model, dT = kern.model, kern.defect_dim
    multi = 0.0
    dom_low = np.kron(dom_model.interior_projector(1), np.eye(dT))
    for i in range(1, model.k + 1):
        for s in range(1, model.n[i - 1] + 1):
            S_dom = np.kron(dom_model.letter_matrix(Letter(False, i, s)), np.eye(dT))
            S_amb = np.kron(model.letter_matrix(Letter(False, i, s)), np.eye(aux_dim))
            gap = low @ (A @ S_dom - S_amb @ A) @ dom_low
            multi = max(multi, norm2(gap))

    return FactorizationResult(
        A=A,
        domain_model=dom_model,
        domain_aux=dT,
        factor_residual=factor_residual,
        multianalytic_residual=multi,
        range_dim=g,
    )


@dataclass
class CompressionReport:
    tuple: RowTuple
    membership: object
    defect_rank: int
    vacuum_dim: int

    @property
    def rank_matches(self) -> bool:
        return self.defect_rank == self.vacuum_dim


def compression_model(M: SubspaceHandle, tol: float = 1e-10) -> CompressionReport:
    """Compress the tensored shifts to a co-invariant subspace.

    Co-invariant subspaces of the truncation are co-invariant for the full
    model, so the compression is an honest pure member and its defect rank
    equals the vacuum-slice dimension.
    """
    resid, where = M.coinvariance_residual()
    if resid > tol:
        raise SubspaceError(
            f"subspace is not co-invariant: adjoint {where} leaks {resid:.2e}"
        )
    rows = []
    for i in range(1, M.model.k + 1):
        row = []
        for s in range(1, M.model.n[i - 1] + 1):
            row.append(M.Q.conj().T @ M.tensor_op(Letter(False, i, s)) @ M.Q)
        rows.append(tuple(row))
    T = RowTuple(M.model.lam, tuple(rows))

    report = check_membership(T, tol)
    delta = mixed_defect(T, (1,) * T.k)
    evals = np.linalg.eigvalsh((delta + delta.conj().T) / 2)
    rank = int((evals > RANK_TOL).sum())

    vac, _ = _orthonormalize(M.vacuum_slice())
    vacuum_dim = vac.shape[1]

    return CompressionReport(
        tuple=T, membership=report, defect_rank=rank, vacuum_dim=vacuum_dim
    )


def moment_fingerprint(T: RowTuple, length: int = 4) -> dict:
    """Traces of words of bounded length in the tuple entries and adjoints."""
    alphabet = []
    for i in range(1, T.k + 1):
        for s in range(1, T.n[i - 1] + 1):
            alphabet.append((f"t{i}.{s}", T.op(i, s)))
            alphabet.append((f"T{i}.{s}", T.op(i, s).conj().T))
    out = {"": complex(T.dim)}
    frontier = {"": np.eye(T.dim, dtype=complex)}
    for _ in range(length):
        nxt = {}
        for word, Mx in frontier.items():
            for name, U in alphabet:
                nxt[word + "|" + name] = Mx @ U
        for word, Mx in nxt.items():
            out[word] = complex(np.trace(Mx))
        frontier = nxt
    return out


def compare_compressions(M1: SubspaceHandle, M2: SubspaceHandle,
                         tol: float = 1e-8) -> str:
    """Semi-decision for unitary equivalence of two compressions.

    Distinct fingerprints certify inequivalence; matching fingerprints with
    distinct subspaces are reported as inconclusive, never as equivalence.
    """
    same_space = (
        M1.dim == M2.dim
        and norm2(M1.projector() - M2.projector()) <= tol
    )
    if same_space:
        return "equal_subspaces"
    f1 = moment_fingerprint(compression_model(M1).tuple)
    f2 = moment_fingerprint(compression_model(M2).tuple)
    keys = set(f1) | set(f2)
    gap = max(abs(f1.get(w, 0) - f2.get(w, 0)) for w in keys)
    return "distinct" if gap > tol else "inconclusive"
