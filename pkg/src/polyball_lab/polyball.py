"""Membership, purity, and structure tests for concrete row tuples.

A RowTuple holds k rows of matrices T[i] = [T[i,1] ... T[i,n_i]] on one
finite-dimensional space.  Membership in the regular twisted polyball is
decided by the finite criterion: twisted commutation plus positivity of all
2^k mixed defects at r = 1; an r-grid evaluation is kept as an advisory
cross-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .phases import PhaseMatrix

ALGEBRA_TOL = 1e-10
EIGEN_TOL = 1e-9
R_GRID = tuple(x / 10 for x in range(1, 10))


class TupleError(ValueError):
    """Dimension or parameter mismatch in a row tuple."""


def norm2(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


def min_eig(h: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((h + h.conj().T) / 2).min())


@dataclass
class RowTuple:
    """k rows of same-size square matrices with a shared twist."""

    lam: PhaseMatrix
    mats: tuple  # mats[i-1][s-1] is T[i,s]

    def __post_init__(self):
        self.mats = tuple(tuple(np.asarray(m, dtype=complex) for m in row)
                          for row in self.mats)
        if len(self.mats) != self.lam.k:
            raise TupleError(f"expected {self.lam.k} rows, got {len(self.mats)}")
        dims = set()
        for i, row in enumerate(self.mats, start=1):
            if len(row) != self.lam.n[i - 1]:
                raise TupleError(
                    f"row {i} has {len(row)} entries, arity is {self.lam.n[i - 1]}"
                )
            for m in row:
                if m.ndim != 2 or m.shape[0] != m.shape[1]:
                    raise TupleError("row entries must be square matrices")
                dims.add(m.shape[0])
        if len(dims) != 1:
            raise TupleError(f"all matrices must share one dimension, got {dims}")
        self._dim = dims.pop()

    @property
    def k(self) -> int:
        return self.lam.k

    @property
    def n(self) -> tuple[int, ...]:
        return self.lam.n

    @property
    def dim(self) -> int:
        return self._dim

    def op(self, i: int, s: int) -> np.ndarray:
        return self.mats[i - 1][s - 1]

    def block_word(self, i: int, letters) -> np.ndarray:
        """T[i, w] = T[i, w_1] ... T[i, w_m], identity for the empty word."""
        out = np.eye(self.dim, dtype=complex)
        for s in letters:
            out = out @ self.op(i, s)
        return out

    def scaled(self, r: float) -> "RowTuple":
        return RowTuple(self.lam, tuple(tuple(r * m for m in row) for row in self.mats))


def phi_map(T: RowTuple, i: int, X: np.ndarray, r: float = 1.0) -> np.ndarray:
    """The completely positive map r^2 sum_s T[i,s] X adj(T[i,s])."""
    X = np.asarray(X, dtype=complex)
    if X.shape != (T.dim, T.dim):
        raise TupleError(f"operator argument must be {T.dim}x{T.dim}")
    out = np.zeros_like(X)
    for s in range(1, T.n[i - 1] + 1):
        A = T.op(i, s)
        out += A @ X @ A.conj().T
    return (r * r) * out


def mixed_defect(T: RowTuple, powers, r: float = 1.0) -> np.ndarray:
    """(id - Phi_1)^{p_1} o ... o (id - Phi_k)^{p_k} applied to the identity."""
    X = np.eye(T.dim, dtype=complex)
    for i in range(T.k, 0, -1):
        for _ in range(powers[i - 1]):
            X = X - phi_map(T, i, X, r)
    return X


def commutation_residual(T: RowTuple) -> float:
    """Worst twisted-commutation defect over all cross-block generator pairs."""
    worst = 0.0
    for i in range(1, T.k + 1):
        for j in range(1, T.k + 1):
            if i == j:
                continue
            for s in range(1, T.n[i - 1] + 1):
                for t in range(1, T.n[j - 1] + 1):
                    lam_ij = T.lam.phase(i, j, s, t).to_complex()
                    gap = T.op(i, s) @ T.op(j, t) - lam_ij * T.op(j, t) @ T.op(i, s)
                    worst = max(worst, norm2(gap))
    return worst


def check_doubly(T: RowTuple, tol: float = ALGEBRA_TOL):
    """Residual of the starred twisted-commutation relation."""
    worst = 0.0
    for i in range(1, T.k + 1):
        for j in range(1, T.k + 1):
            if i == j:
                continue
            for s in range(1, T.n[i - 1] + 1):
                for t in range(1, T.n[j - 1] + 1):
                    conj_lam = T.lam.phase(i, j, s, t).conjugate().to_complex()
                    A, B = T.op(i, s), T.op(j, t)
                    gap = A.conj().T @ B - conj_lam * B @ A.conj().T
                    worst = max(worst, norm2(gap))
    return worst <= tol, worst


@dataclass
class PurityReport:
    is_pure: bool
    power_norms: dict  # block -> norm of Phi^P(I)
    nilpotency_orders: dict  # block -> order p with Phi^p(I) exactly zero, or None


def check_pure(T: RowTuple, tol: float = ALGEBRA_TOL, max_power: int | None = None) -> PurityReport:
    """Decide purity by iterating each block map on the identity."""
    P = max_power if max_power is not None else max(1, T.dim)
    if P < 1:
        raise TupleError("max_power must be >= 1")
    norms: dict[int, float] = {}
    orders: dict[int, int | None] = {}
    for i in range(1, T.k + 1):
        X = np.eye(T.dim, dtype=complex)
        order = None
        for p in range(1, P + 1):
            X = phi_map(T, i, X)
            if order is None and not X.any():
                order = p
        norms[i] = norm2(X)
        orders[i] = order
    return PurityReport(
        is_pure=all(v <= tol for v in norms.values()),
        power_norms=norms,
        nilpotency_orders=orders,
    )


@dataclass
class MembershipReport:
    is_lambda_commuting: bool
    commutation_residual: float
    is_doubly: bool
    doubly_residual: float
    row_norms: dict  # block -> norm of sum_s T T*
    positivity: dict  # powers tuple -> min eigenvalue of the mixed defect
    r_grid: dict  # r -> min eigenvalue of the full defect (advisory)
    is_member: bool
    is_pure: bool
    nilpotency_orders: dict

    def to_json(self) -> dict:
        return {
            "is_lambda_commuting": self.is_lambda_commuting,
            "commutation_residual": self.commutation_residual,
            "is_doubly": self.is_doubly,
            "doubly_residual": self.doubly_residual,
            "row_norms": {str(i): v for i, v in self.row_norms.items()},
            "positivity": {
                "".join(map(str, p)): v for p, v in self.positivity.items()
            },
            "r_grid": {f"{r:.1f}": v for r, v in self.r_grid.items()},
            "is_member": self.is_member,
            "is_pure": self.is_pure,
            "nilpotency_orders": {
                str(i): v for i, v in self.nilpotency_orders.items()
            },
        }


def check_membership(T: RowTuple, tol: float = ALGEBRA_TOL,
                     eig_tol: float = EIGEN_TOL) -> MembershipReport:
    """Row contraction + twisted commutation + all 2^k mixed defects at r=1.

    The finite criterion decides membership; the r-grid values are recorded
    as a consistency cross-check and flagged, never used for the decision.
    """
    comm = commutation_residual(T)
    doubly_ok, doubly_res = check_doubly(T, tol)

    row_norms = {
        i: norm2(phi_map(T, i, np.eye(T.dim, dtype=complex)))
        for i in range(1, T.k + 1)
    }

    positivity = {}
    for powers in itertools.product((0, 1), repeat=T.k):
        positivity[powers] = min_eig(mixed_defect(T, powers))

    r_grid = {
        r: min_eig(mixed_defect(T, (1,) * T.k, r))
        for r in R_GRID
    }

    commuting = comm <= tol
    positive = all(v >= -eig_tol for v in positivity.values())
    member = commuting and positive

    if member and any(v < -eig_tol for v in r_grid.values()):
        raise TupleError(
            "finite membership criterion passed but an r-grid defect is negative; "
            "this contradicts the proved equivalence and indicates a bug"
        )

    purity = check_pure(T, tol)
    return MembershipReport(
        is_lambda_commuting=commuting,
        commutation_residual=comm,
        is_doubly=doubly_ok,
        doubly_residual=doubly_res,
        row_norms=row_norms,
        positivity=positivity,
        r_grid=r_grid,
        is_member=member,
        is_pure=purity.is_pure,
        nilpotency_orders=purity.nilpotency_orders,
    )
