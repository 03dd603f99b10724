"""Assembly of twisted row-isometry tuples and their Wold structure.

Finite dimensions force a dichotomy: a block restricted to a piece is
either a truncated shift (pure direction) or, when its arity is one, a
unitary (surjective direction).  A TupleSpec lists pieces, each carrying a
subset A of pure blocks, a wandering dimension, and one unitary per
complementary block.  The assembled direct sum is the playground on which
the wandering data is recomputed and compared.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .fockmodel import TruncatedModel
from .phases import PhaseMatrix, aggregate_phase
from .polyball import RowTuple, TupleError, norm2
from .rewrite import Letter
from .words import Word

SPEC_TOL = 1e-12


class SpecError(ValueError):
    """Invalid tuple specification."""


@dataclass
class SpecPiece:
    subset: tuple[int, ...]  # sorted blocks acting as pure shifts
    wandering_dim: int
    unitaries: dict = field(default_factory=dict)  # complement block -> unitary

    def __post_init__(self):
        self.subset = tuple(sorted(set(self.subset)))
        self.unitaries = {int(j): np.asarray(U, dtype=complex)
                          for j, U in self.unitaries.items()}


@dataclass
class TupleSpec:
    pieces: list

    @staticmethod
    def from_json(payload: dict) -> "TupleSpec":
        pieces = []
        for raw in payload["pieces"]:
            unitaries = {
                int(j): parse_complex_matrix(U)
                for j, U in raw.get("unitaries", {}).items()
            }
            wdim = raw.get("wandering_dim")
            if wdim is None:
                if not unitaries:
                    raise SpecError("piece needs wandering_dim or unitaries")
                wdim = next(iter(unitaries.values())).shape[0]
            pieces.append(SpecPiece(tuple(raw["A"]), int(wdim), unitaries))
        return TupleSpec(pieces)


def parse_complex_matrix(rows) -> np.ndarray:
    """JSON matrix with [re, im] entry pairs (bare reals also accepted)."""
    def entry(e):
        if isinstance(e, (int, float)):
            return complex(e)
        return complex(e[0], e[1])

    return np.array([[entry(e) for e in row] for row in rows], dtype=complex)


def validate_spec(lam: PhaseMatrix, spec: TupleSpec, tol: float = SPEC_TOL):
    """Realizability and twisted-commutation checks for every piece."""
    for p_idx, piece in enumerate(spec.pieces):
        A = piece.subset
        comp = [j for j in range(1, lam.k + 1) if j not in A]
        if any(not 1 <= i <= lam.k for i in A):
            raise SpecError(f"piece {p_idx}: subset {A} out of range")
        if piece.wandering_dim < 1:
            raise SpecError(f"piece {p_idx}: wandering dimension must be >= 1")
        for j in comp:
            if lam.n[j - 1] != 1:
                raise SpecError(
                    f"piece {p_idx}: block {j} has arity {lam.n[j - 1]} but must be "
                    "surjective on a finite space; no finite surjective row "
                    "isometry with arity >= 2 exists"
                )
            U = piece.unitaries.get(j)
            if U is None:
                raise SpecError(f"piece {p_idx}: missing unitary for block {j}")
            if U.shape != (piece.wandering_dim, piece.wandering_dim):
                raise SpecError(f"piece {p_idx}: unitary for block {j} has wrong size")
            if norm2(U.conj().T @ U - np.eye(U.shape[0])) > tol:
                raise SpecError(f"piece {p_idx}: block {j} operator is not unitary")
        for a, b in itertools.combinations(comp, 2):
            lam_ab = lam.phase(a, b, 1, 1).to_complex()
            Ua, Ub = piece.unitaries[a], piece.unitaries[b]
            if norm2(Ua @ Ub - lam_ab * Ub @ Ua) > tol:
                raise SpecError(
                    f"piece {p_idx}: unitaries for blocks ({a},{b}) do not "
                    "satisfy the twisted commutation"
                )


def restricted_twist(lam: PhaseMatrix, blocks: tuple[int, ...]) -> PhaseMatrix:
    """Relabel the twist to the sub-model over the given blocks (in order)."""
    k_sub = len(blocks)
    n_sub = tuple(lam.n[i - 1] for i in blocks)
    entries = {}
    for a, i in enumerate(blocks, start=1):
        for b, j in enumerate(blocks, start=1):
            if i == j:
                continue
            for s in range(1, lam.n[i - 1] + 1):
                for t in range(1, lam.n[j - 1] + 1):
                    entries[(a, b, s, t)] = lam.entries[(i, j, s, t)]
    return PhaseMatrix(k=k_sub, n=n_sub, modulus=lam.modulus, entries=entries)


@dataclass
class AssembledPiece:
    subset: tuple[int, ...]
    wandering_dim: int
    model: TruncatedModel | None  # None when the subset is empty
    offset: int
    dim: int


@dataclass
class AssembledTuple:
    row: RowTuple
    pieces: list
    D: int

    @property
    def dim(self) -> int:
        return self.row.dim

    def interior_mask(self, buffer: int) -> np.ndarray:
        """Boolean mask of coordinates whose shift degree is <= D - buffer."""
        mask = np.zeros(self.dim, dtype=bool)
        for piece in self.pieces:
            if piece.model is None:
                mask[piece.offset : piece.offset + piece.dim] = True
                continue
            degs = piece.model.degrees()
            local = np.repeat(degs <= self.D - buffer, piece.wandering_dim)
            mask[piece.offset : piece.offset + piece.dim] = local
        return mask


def assemble(lam: PhaseMatrix, spec: TupleSpec, D: int) -> AssembledTuple:
    """Direct sum of the standard pieces at truncation degree D."""
    validate_spec(lam, spec)
    piece_ops: list[dict] = []
    assembled_pieces: list[AssembledPiece] = []
    offset = 0

    for piece in spec.pieces:
        A = piece.subset
        wdim = piece.wandering_dim
        ops: dict[tuple[int, int], np.ndarray] = {}
        if not A:
            dim = wdim
            model = None
            for j in range(1, lam.k + 1):
                ops[(j, 1)] = piece.unitaries[j]
        else:
            sub = restricted_twist(lam, A)
            model = TruncatedModel(sub, D)
            dim = model.dim * wdim
            eye_w = np.eye(wdim)
            for pos, i in enumerate(A, start=1):
                for s in range(1, lam.n[i - 1] + 1):
                    ops[(i, s)] = np.kron(
                        model.letter_matrix(Letter(False, pos, s)), eye_w
                    )
            for j in range(1, lam.k + 1):
                if j in A:
                    continue
                diag = np.array(
                    [
                        np.prod(
                            [
                                aggregate_phase(
                                    lam, j, 1, Word(i, mw.part(pos).letters)
                                ).to_complex()
                                for pos, i in enumerate(A, start=1)
                            ]
                        )
                        for mw in model.basis
                    ],
                    dtype=complex,
                )
                ops[(j, 1)] = np.kron(np.diag(diag), piece.unitaries[j])
        piece_ops.append(ops)
        assembled_pieces.append(
            AssembledPiece(A, wdim, model, offset, dim)
        )
        offset += dim

    total = offset
    mats = []
    for i in range(1, lam.k + 1):
        row = []
        for s in range(1, lam.n[i - 1] + 1):
            M = np.zeros((total, total), dtype=complex)
            for ops, ap in zip(piece_ops, assembled_pieces):
                M[ap.offset : ap.offset + ap.dim, ap.offset : ap.offset + ap.dim] = (
                    ops[(i, s)]
                )
            row.append(M)
        mats.append(tuple(row))
    return AssembledTuple(RowTuple(lam, tuple(mats)), assembled_pieces, D)


# ---------------------------------------------------------------------------
# Wold projections and wandering data.


def block_defect(T: RowTuple, i: int) -> np.ndarray:
    out = np.eye(T.dim, dtype=complex)
    for s in range(1, T.n[i - 1] + 1):
        V = T.op(i, s)
        out -= V @ V.conj().T
    return out


def shift_projection(T: RowTuple, i: int, p: int) -> np.ndarray:
    """E_i(p): accumulated defect images up to creator length p."""
    defect = block_defect(T, i)
    out = np.zeros((T.dim, T.dim), dtype=complex)
    X = defect
    for _ in range(p + 1):
        out += X
        X = _phi(T, i, X)
    return out


def tail_projection(T: RowTuple, i: int, p: int) -> np.ndarray:
    """F_i(p): sum over length-p creator words of V X V*."""
    X = np.eye(T.dim, dtype=complex)
    for _ in range(p):
        X = _phi(T, i, X)
    return X


def _phi(T: RowTuple, i: int, X: np.ndarray) -> np.ndarray:
    out = np.zeros_like(X)
    for s in range(1, T.n[i - 1] + 1):
        V = T.op(i, s)
        out += V @ X @ V.conj().T
    return out


def all_subsets(k: int):
    for size in range(k + 1):
        yield from (tuple(c) for c in itertools.combinations(range(1, k + 1), size))


@dataclass
class WoldProjections:
    P: dict  # subset -> projection matrix
    shift_parts: dict  # block -> P_i shift projection
    tail_parts: dict  # block -> P_i surjective projection
    stabilization: dict  # block -> norm gap between the last two powers
    idempotency: float
    orthogonality: float
    completeness: float
    commutation: float


def wold_projections(asm: AssembledTuple, tol: float = 1e-10) -> WoldProjections:
    """Per-subset projections with exact finite power evaluation.

    The limiting projections stabilize exactly once the power exceeds the
    truncation degree; the gap between the last two powers is reported.
    Identities are asserted everywhere except commutation with the shifts,
    which is restricted to the interior (shifts raise the degree).
    """
    T = asm.row
    ok, res = _interior_doubly(asm)
    if not ok:
        raise TupleError(
            f"assembled tuple fails the starred commutation on the interior ({res:.2e})"
        )

    p_max = asm.D + 1
    shift_parts, tail_parts, stab = {}, {}, {}
    for i in range(1, T.k + 1):
        E_prev = shift_projection(T, i, p_max - 1)
        E_last = shift_projection(T, i, p_max)
        F_prev = tail_projection(T, i, p_max - 1)
        F_last = tail_projection(T, i, p_max)
        shift_parts[i] = E_last
        tail_parts[i] = F_last
        stab[i] = max(norm2(E_last - E_prev), norm2(F_last - F_prev))

    P = {}
    for A in all_subsets(T.k):
        M = np.eye(T.dim, dtype=complex)
        for i in range(1, T.k + 1):
            M = M @ (shift_parts[i] if i in A else tail_parts[i])
        P[A] = M

    idem = max(norm2(M @ M - M) for M in P.values())
    ortho = 0.0
    subsets = list(P)
    for a in range(len(subsets)):
        for b in range(a + 1, len(subsets)):
            ortho = max(ortho, norm2(P[subsets[a]] @ P[subsets[b]]))
    total = sum(P.values())
    complete = norm2(total - np.eye(T.dim))

    mask = asm.interior_mask(1)
    comm = 0.0
    for i in range(1, T.k + 1):
        for s in range(1, T.n[i - 1] + 1):
            V = T.op(i, s)
            for M in P.values():
                gap = (M @ V - V @ M)[:, mask]
                comm = max(comm, norm2(gap))

    return WoldProjections(
        P=P,
        shift_parts=shift_parts,
        tail_parts=tail_parts,
        stabilization=stab,
        idempotency=idem,
        orthogonality=ortho,
        completeness=complete,
        commutation=comm,
    )


def _interior_doubly(asm: AssembledTuple) -> tuple[bool, float]:
    """Starred twisted commutation, tested on interior columns only."""
    T = asm.row
    mask = asm.interior_mask(1)
    worst = 0.0
    for i in range(1, T.k + 1):
        for j in range(1, T.k + 1):
            if i == j:
                continue
            for s in range(1, T.n[i - 1] + 1):
                for t in range(1, T.n[j - 1] + 1):
                    conj_lam = T.lam.phase(i, j, s, t).conjugate().to_complex()
                    A, B = T.op(i, s), T.op(j, t)
                    gap = (A.conj().T @ B - conj_lam * B @ A.conj().T)[:, mask]
                    worst = max(worst, norm2(gap))
    return worst <= 1e-10, worst


@dataclass
class WanderingData:
    lam: PhaseMatrix
    dims: dict  # subset -> wandering dimension
    unitaries: dict  # subset -> {block -> restricted unitary}
    kernel_residual: float  # wandering vectors vs adjoint kernels

    def to_json(self) -> dict:
        return {
            "dims": {"".join(map(str, A)) or "empty": d for A, d in self.dims.items()},
            "kernel_residual": self.kernel_residual,
        }


def wandering_data(asm: AssembledTuple, tol: float = 1e-10,
                   projections: WoldProjections | None = None) -> WanderingData:
    """Recover the per-subset wandering dimensions and restricted unitaries."""
    T = asm.row
    proj = projections or wold_projections(asm, tol)

    dims, unitaries = {}, {}
    kernel_res = 0.0
    for A in all_subsets(T.k):
        M = np.eye(T.dim, dtype=complex)
        for j in range(1, T.k + 1):
            if j not in A:
                M = M @ proj.tail_parts[j]
        for i in A:
            M = M @ block_defect(T, i)
        M = (M + M.conj().T) / 2
        evals, evecs = np.linalg.eigh(M)
        keep = evals > 0.5
        Q = evecs[:, keep]
        dims[A] = int(keep.sum())
        restricted = {}
        for j in range(1, T.k + 1):
            if j in A or dims[A] == 0:
                continue
            if T.n[j - 1] == 1:
                restricted[j] = Q.conj().T @ T.op(j, 1) @ Q
        unitaries[A] = restricted
        # wandering vectors must lie in every adjoint kernel of the A blocks
        for i in A:
            for s in range(1, T.n[i - 1] + 1):
                if dims[A]:
                    kernel_res = max(kernel_res, norm2(T.op(i, s).conj().T @ Q))

    return WanderingData(T.lam, dims, unitaries, kernel_res)


@dataclass
class EquivalenceVerdict:
    status: str  # "equivalent" | "not_equivalent" | "inconclusive"
    reasons: list

    def to_json(self) -> dict:
        return {"status": self.status, "reasons": self.reasons}


def _eig_multiset(U: np.ndarray):
    evals = np.linalg.eigvals(U)
    return np.sort_complex(np.round(evals, 8))


def trace_fingerprint(ops: dict, length: int = 4) -> dict:
    """Traces of words of bounded length in the operators and adjoints."""
    alphabet = []
    for j, U in sorted(ops.items()):
        alphabet.append((f"u{j}", U))
        alphabet.append((f"U{j}", U.conj().T))
    dim = next(iter(ops.values())).shape[0]
    out = {"": complex(dim)}
    frontier = {"": np.eye(dim, dtype=complex)}
    for _ in range(length):
        nxt = {}
        for word, M in frontier.items():
            for name, U in alphabet:
                nxt[word + name] = M @ U
        for word, M in nxt.items():
            out[word] = complex(np.trace(M))
        frontier = nxt
    return out


def equivalence_check(W: WanderingData, W2: WanderingData,
                      tol: float = 1e-8) -> EquivalenceVerdict:
    """Compare wandering data subset by subset.

    Dimensions decide negatively; a single restricted unitary is compared
    exactly through its eigenvalue multiset; several are compared through
    trace fingerprints, which can only certify inequivalence.
    """
    if not W.lam.compatible_with(W2.lam):
        raise TupleError("wandering data over different model parameters")
    reasons = []
    conclusive = True
    for A in all_subsets(W.lam.k):
        d1, d2 = W.dims.get(A, 0), W2.dims.get(A, 0)
        if d1 != d2:
            return EquivalenceVerdict(
                "not_equivalent", [f"subset {A}: dimensions {d1} != {d2}"]
            )
        if d1 == 0:
            continue
        ops1 = W.unitaries.get(A, {})
        ops2 = W2.unitaries.get(A, {})
        if set(ops1) != set(ops2):
            return EquivalenceVerdict(
                "not_equivalent", [f"subset {A}: different restricted blocks"]
            )
        if not ops1:
            continue
        if len(ops1) == 1:
            (j, U1), (_, U2) = next(iter(ops1.items())), next(iter(ops2.items()))
            if np.max(np.abs(_eig_multiset(U1) - _eig_multiset(U2))) > tol:
                return EquivalenceVerdict(
                    "not_equivalent",
                    [f"subset {A}: eigenvalue multisets of block {j} differ"],
                )
        else:
            f1 = trace_fingerprint(ops1)
            f2 = trace_fingerprint(ops2)
            gap = max(abs(f1[w] - f2[w]) for w in f1)
            if gap > tol:
                return EquivalenceVerdict(
                    "not_equivalent",
                    [f"subset {A}: trace fingerprints differ by {gap:.2e}"],
                )
            conclusive = False
            reasons.append(
                f"subset {A}: fingerprints agree but several unitaries are involved"
            )
    if conclusive:
        return EquivalenceVerdict("equivalent", reasons)
    return EquivalenceVerdict("inconclusive", reasons)


def commutant_dimension(ops, tol: float = 1e-9) -> int:
    """Dimension of the joint commutant, by brute-force linear algebra."""
    mats = list(ops)
    d = mats[0].shape[0]
    rows = []
    eye = np.eye(d)
    for U in mats:
        # vec(XU - UX) = (U^T kron I - I kron U) vec(X)
        rows.append(np.kron(U.T, eye) - np.kron(eye, U))
    system = np.vstack(rows)
    svals = np.linalg.svd(system, compute_uv=False)
    scale = max(1.0, svals[0] if svals.size else 1.0)
    return int((svals <= tol * scale).sum())
