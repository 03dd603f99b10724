"""Berezin kernel, transform, von Neumann harness, dilations, and moments.

The kernel of a pure tuple T maps its space isometrically into the
truncated model tensored with the defect space, intertwining adjoints with
the model's adjoints.  For jointly nilpotent tuples every construction here
is a finite sum and therefore exact up to float arithmetic; for merely pure
tuples the kernel is truncated with a reported tail bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rewrite
from .fockmodel import TruncatedModel
from .phases import Phase
from .polyball import (
    ALGEBRA_TOL,
    MembershipReport,
    RowTuple,
    TupleError,
    check_membership,
    mixed_defect,
    norm2,
    phi_map,
)
from .rewrite import Letter, StarPolynomial
from .words import MultiWord, enumerate_basis

RANK_TOL = 1e-9


class KernelError(ValueError):
    """Input rejected by a kernel or dilation construction."""


def creator_product(T: RowTuple, mw: MultiWord) -> np.ndarray:
    """T[1, a_1] ... T[k, a_k] for a multiword (a_1, ..., a_k)."""
    out = np.eye(T.dim, dtype=complex)
    for w in mw.parts:
        out = out @ T.block_word(w.block, w.letters)
    return out


def evaluate_on_tuple(T: RowTuple, p: StarPolynomial) -> np.ndarray:
    """Direct substitution of the tuple into a normal-form polynomial."""
    if p.k != T.k:
        raise TupleError("polynomial block count does not match the tuple")
    out = np.zeros((T.dim, T.dim), dtype=complex)
    for (a, b), (phase, sc) in p.terms.items():
        annih = np.eye(T.dim, dtype=complex)
        for w in b.parts:
            annih = annih @ T.block_word(w.block, w.letters).conj().T
        out += (phase.to_complex() * sc) * creator_product(T, a) @ annih
    return out


def joint_nilpotency_degree(T: RowTuple, cap: int | None = None,
                            tol: float = 1e-12) -> int | None:
    """Smallest d with all degree d+1 creator products (numerically) zero.

    Products of float matrices carry roundoff dust, so zero means every
    entry below tol; row contractions keep genuine products at order one.
    """
    cap = cap if cap is not None else T.k * T.dim
    for q in range(1, cap + 2):
        words = [w for w in enumerate_basis(T.n, q) if w.degree == q]
        if all(np.max(np.abs(creator_product(T, w))) <= tol for w in words):
            return q - 1
    return None


def defect_root(T: RowTuple, tol: float = ALGEBRA_TOL, rank_tol: float = RANK_TOL):
    """Clamped square root of the full defect and a defect-space frame.

    Eigenvalues in [-tol, 0) clamp to zero; anything below -tol rejects the
    tuple.  The frame columns are the eigenvectors above rank_tol, giving a
    reproducible coordinate system on the defect space.
    """
    delta = mixed_defect(T, (1,) * T.k)
    evals, evecs = np.linalg.eigh((delta + delta.conj().T) / 2)
    if evals.min() < -tol:
        raise KernelError(
            f"defect operator has eigenvalue {evals.min():.3e} below -{tol:.1e}"
        )
    clamped = np.clip(evals, 0.0, None)
    root = (evecs * np.sqrt(clamped)) @ evecs.conj().T
    keep = clamped > rank_tol
    frame = evecs[:, keep]
    return root, frame


@dataclass
class BerezinKernel:
    """Isometry into (truncated model) tensor (defect space)."""

    T: RowTuple
    model: TruncatedModel
    root: np.ndarray
    frame: np.ndarray  # H-dim x defect-dim
    K: np.ndarray  # rows indexed multiword-major: (word, defect) x H
    nilpotency_degree: int | None
    tail_bound: float
    isometry_residual: float
    intertwining_residual: float

    @property
    def defect_dim(self) -> int:
        return self.frame.shape[1]

    def padded(self, D: int) -> np.ndarray:
        """Zero-pad the kernel rows to a model of larger degree D.

        The graded basis of the small model is an index-aligned prefix of
        the larger one, so padding is a pure reindexing.
        """
        if D < self.model.D:
            raise KernelError("cannot pad the kernel to a smaller degree")
        big = TruncatedModel(self.T.lam, D)
        dT = self.defect_dim
        out = np.zeros((big.dim * dT, self.K.shape[1]), dtype=complex)
        out[: self.model.dim * dT, :] = self.K
        return out


def berezin_kernel(
    T: RowTuple,
    tol: float = ALGEBRA_TOL,
    truncation: int | None = None,
    report: MembershipReport | None = None,
    assume_pure: bool = False,
) -> BerezinKernel:
    """Build the kernel of a pure member.

    Jointly nilpotent tuples give an exact finite kernel.  Otherwise a
    truncation degree must be supplied and the dropped tail is bounded by
    the largest block power norm at that degree.  assume_pure skips the
    finite purity probe; callers use it for strictly scaled members, which
    are pure though the probe may not certify it at small powers.
    """
    report = report or check_membership(T, tol)
    if not report.is_member:
        raise KernelError(f"tuple is not a polyball member: {report.to_json()}")
    if not report.is_pure and not assume_pure:
        raise KernelError(f"tuple is not pure: power norms {report.to_json()['nilpotency_orders']}")

    d = joint_nilpotency_degree(T)
    tail = 0.0
    if d is None:
        if truncation is None:
            raise KernelError(
                "tuple is pure but not jointly nilpotent; pass a truncation degree"
            )
        d = truncation
        for i in range(1, T.k + 1):
            Xi = np.eye(T.dim, dtype=complex)
            for _ in range(d + 1):
                Xi = phi_map(T, i, Xi)
            tail = max(tail, norm2(Xi))

    model = TruncatedModel(T.lam, d)
    root, frame = defect_root(T, tol)
    dT = frame.shape[1]

    K = np.zeros((model.dim * dT, T.dim), dtype=complex)
    for w_idx, mw in enumerate(model.basis):
        block = frame.conj().T @ root @ creator_product(T, mw).conj().T
        K[w_idx * dT : (w_idx + 1) * dT, :] = block

    iso = norm2(K.conj().T @ K - np.eye(T.dim)) if T.dim else 0.0
    inter = 0.0
    eye_dT = np.eye(dT)
    for i in range(1, T.k + 1):
        for s in range(1, T.n[i - 1] + 1):
            S_star = np.kron(model.letter_matrix(Letter(True, i, s)), eye_dT)
            inter = max(inter, norm2(K @ T.op(i, s).conj().T - S_star @ K))

    return BerezinKernel(
        T=T,
        model=model,
        root=root,
        frame=frame,
        K=K,
        nilpotency_degree=None if tail else d,
        tail_bound=tail,
        isometry_residual=iso,
        intertwining_residual=inter,
    )


@dataclass
class TransformResult:
    value: np.ndarray
    direct_residual: float | None  # against direct substitution (pure case)
    r_values: dict | None  # r -> matrix (non-pure case)
    cauchy_increments: list | None


def berezin_transform(
    T: RowTuple,
    f: StarPolynomial,
    r_sequence=None,
    tol: float = ALGEBRA_TOL,
    truncation: int = 12,
) -> TransformResult:
    """Compress f through the kernel; limit along r for non-pure members."""
    report = check_membership(T, tol)
    if not report.is_member:
        raise KernelError("Berezin transform requires a polyball member")

    def pure_value(S: RowTuple, trunc=None, assume_pure=False) -> np.ndarray:
        kern = berezin_kernel(S, tol, truncation=trunc, assume_pure=assume_pure)
        D_f = kern.model.D + max(
            (a.degree for (a, b) in f.terms), default=0
        )
        big = TruncatedModel(S.lam, D_f)
        K = kern.padded(D_f)
        Mf = big.build_matrix(f).mat
        return K.conj().T @ np.kron(Mf, np.eye(kern.defect_dim)) @ K

    if report.is_pure:
        d = joint_nilpotency_degree(T)
        value = pure_value(T, None if d is not None else truncation)
        residual = norm2(value - evaluate_on_tuple(T, f))
        return TransformResult(value, residual, None, None)

    rs = tuple(r_sequence) if r_sequence is not None else (0.9, 0.95, 0.99)
    values = {r: pure_value(T.scaled(r), truncation, assume_pure=True) for r in rs}
    ordered = [values[r] for r in rs]
    increments = [norm2(b - a) for a, b in zip(ordered, ordered[1:])]
    return TransformResult(ordered[-1], None, values, increments)


def vn_check(
    T: RowTuple,
    f: StarPolynomial,
    D_prime: int | None = None,
    tol: float = 1e-9,
):
    """Von Neumann bound: |f(T)| <= |f(S)| on a sufficiently deep truncation.

    Requires a jointly nilpotent member of some order d; the truncation
    D' >= d + creator degree makes the compression argument exact, so the
    truncated model norm is a certified upper bound.
    """
    report = check_membership(T)
    if not report.is_member:
        raise KernelError("von Neumann check requires a polyball member")
    d = joint_nilpotency_degree(T)
    if d is None:
        raise KernelError(
            "von Neumann check requires a jointly nilpotent tuple; "
            "the truncated bound is not certified otherwise"
        )
    m = f.creator_degree()
    D = max(D_prime if D_prime is not None else 0, d + m)
    model = TruncatedModel(T.lam, D)
    lhs = norm2(evaluate_on_tuple(T, f))
    rhs = norm2(model.build_matrix(f).mat)
    return lhs, rhs, lhs <= rhs + tol


def rescale_tuple(T: RowTuple, z: dict) -> RowTuple:
    """Multiply each generator by a unimodular phase given as exact turns."""
    mats = []
    for i in range(1, T.k + 1):
        row = []
        for s in range(1, T.n[i - 1] + 1):
            zp = z.get((i, s))
            if zp is None:
                raise KernelError(f"missing rescaling phase for generator ({i},{s})")
            if not isinstance(zp, Phase):
                raise KernelError("rescaling phases must be exact Phase values")
            row.append(zp.to_complex() * T.op(i, s))
        mats.append(tuple(row))
    return RowTuple(T.lam, tuple(mats))


def rescale_invariance_residual(T: RowTuple, z: dict, f: StarPolynomial,
                                tol: float = ALGEBRA_TOL) -> float:
    """Residual of transform(T, rescaled f) == transform(rescaled T, f)."""
    lhs = berezin_transform(T, rewrite.rescale_generators(f, z), tol=tol).value
    rhs = berezin_transform(rescale_tuple(T, z), f, tol=tol).value
    return norm2(lhs - rhs)


@dataclass
class DilationRecord:
    model: TruncatedModel
    defect_dim: int
    embedding: np.ndarray  # kernel, padded to the dilation degree
    compression_residual: float  # adj dilation restricted vs adj tuple
    span_rank: int
    span_rank_expected: int
    tail_bound: float

    def isometry_ops(self):
        eye = np.eye(self.defect_dim)
        for i in range(1, self.model.k + 1):
            for s in range(1, self.model.n[i - 1] + 1):
                yield (i, s), np.kron(self.model.letter_matrix(Letter(False, i, s)), eye)

    def to_json(self) -> dict:
        return {
            "degree": self.model.D,
            "defect_dim": self.defect_dim,
            "compression_residual": self.compression_residual,
            "span_rank": self.span_rank,
            "span_rank_expected": self.span_rank_expected,
            "tail_bound": self.tail_bound,
        }


def minimal_dilation(T: RowTuple, tol: float = ALGEBRA_TOL,
                     truncation: int | None = None) -> DilationRecord:
    """Row-isometric dilation of a pure member, realized on the model.

    The dilation is the model shift tensored with the defect space, with the
    original space embedded by the kernel.  The span check certifies that
    shifted images of the embedded space fill the whole truncated space,
    which is the finite form of minimality.
    """
    report = check_membership(T, tol)
    if not report.is_member:
        raise KernelError("dilation requires a polyball member")
    if not report.is_pure:
        raise KernelError(
            "non-pure member: the isometric dilation is not constructed here; "
            "for arity-one tuples use moment_check instead"
        )
    kern = berezin_kernel(T, tol, truncation=truncation, report=report)
    model, dT = kern.model, kern.defect_dim

    resid = kern.intertwining_residual

    # span of creator images of the embedded space fills the truncation
    columns = [kern.K]
    for mw in model.basis:
        if mw.degree == 0:
            continue
        columns.append(np.kron(model.creator_matrix(mw), np.eye(dT)) @ kern.K)
    stacked = np.hstack(columns)
    svals = np.linalg.svd(stacked, compute_uv=False)
    rank = int((svals > RANK_TOL * max(1.0, svals[0] if svals.size else 1.0)).sum())

    return DilationRecord(
        model=model,
        defect_dim=dT,
        embedding=kern.K,
        compression_residual=resid,
        span_rank=rank,
        span_rank_expected=model.dim * dT,
        tail_bound=kern.tail_bound,
    )


@dataclass
class MomentReport:
    residuals: dict  # moment vector -> residual (nilpotent case) or r -> worst
    max_residual: float
    r_trend: list | None

    def to_json(self) -> dict:
        return {
            "residuals": {str(k): v for k, v in self.residuals.items()},
            "max_residual": self.max_residual,
            "r_trend": self.r_trend,
        }


def _moment_vectors(k: int, M: int):
    out = []

    def rec(prefix, budget):
        if len(prefix) == k:
            out.append(tuple(prefix))
            return
        for m in range(-budget, budget + 1):
            rec(prefix + [m], budget - abs(m))

    rec([], M)
    return out


def moment_check(T: RowTuple, M: int, tol: float = ALGEBRA_TOL,
                 r_grid=None, truncation: int = 16) -> MomentReport:
    """Mixed-moment identities between a tuple and its isometric dilation.

    Stated for arity one in every block.  For each integer vector m with
    sum |m_i| <= M the compression of V^{m^-} adj(V)^{m^+} to the embedded
    space must equal T^{m^-} adj(T)^{m^+}, with m^+ = max(m, 0) and
    m^- = max(-m, 0).  Nilpotent members are checked exactly; other members
    through r-scaled approximants with the residual trend reported.
    """
    if any(x != 1 for x in T.n):
        raise KernelError("moment identities are stated for arity one per block")
    report = check_membership(T, tol)
    if not report.is_member:
        raise KernelError("moment check requires a polyball member")

    vectors = _moment_vectors(T.k, M)

    def tuple_moment(S: RowTuple, m) -> np.ndarray:
        out = np.eye(S.dim, dtype=complex)
        for i in range(1, S.k + 1):
            out = out @ np.linalg.matrix_power(S.op(i, 1), max(-m[i - 1], 0))
        for i in range(1, S.k + 1):
            out = out @ np.linalg.matrix_power(S.op(i, 1).conj().T, max(m[i - 1], 0))
        return out

    def run(S: RowTuple, target: RowTuple, trunc):
        d = joint_nilpotency_degree(S)
        kern = berezin_kernel(S, tol, truncation=None if d is not None else trunc,
                              assume_pure=trunc is not None)
        D = kern.model.D + M
        big = TruncatedModel(S.lam, D)
        K = kern.padded(D)
        eye = np.eye(kern.defect_dim)
        V = {i: np.kron(big.letter_matrix(Letter(False, i, 1)), eye)
             for i in range(1, S.k + 1)}
        out = {}
        for m in vectors:
            lhs = K.conj().T.copy()
            for i in range(1, S.k + 1):
                lhs = lhs @ np.linalg.matrix_power(V[i], max(-m[i - 1], 0))
            for i in range(1, S.k + 1):
                lhs = lhs @ np.linalg.matrix_power(V[i].conj().T, max(m[i - 1], 0))
            out[m] = norm2(lhs @ K - tuple_moment(target, m))
        return out

    if joint_nilpotency_degree(T) is not None:
        residuals = run(T, T, None)
        return MomentReport(residuals, max(residuals.values()), None)

    # dilate r-scaled approximants and compare against the unscaled moments
    rs = tuple(r_grid) if r_grid is not None else (0.9, 0.95, 0.99)
    per_r = {r: max(run(T.scaled(r), T, truncation).values()) for r in rs}
    trend = [per_r[r] for r in rs]
    return MomentReport(per_r, max(trend), trend)
