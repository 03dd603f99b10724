"""Seeded random generators for tuples, polynomials, specs, and subspaces.

All randomness flows through numpy Generator objects derived from a named
64-bit seed via SeedSequence spawning, so independent checks draw from
independent, platform-stable streams.
"""

from __future__ import annotations

import numpy as np

from .beurling import SubspaceHandle
from .fockmodel import TruncatedModel
from .phases import Phase, PhaseMatrix, validate_lambda
from .polyball import RowTuple
from .rewrite import Letter, StarPolynomial
from .wold import SpecPiece, TupleSpec
from .words import enumerate_basis


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Child generator at a stable spawn path under the named seed."""
    ss = np.random.SeedSequence(seed)
    for step in path:
        ss = ss.spawn(step + 1)[step]
    return np.random.default_rng(ss)


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_letters(lam: PhaseMatrix, rng: np.random.Generator, length: int):
    out = []
    for _ in range(length):
        i = int(rng.integers(1, lam.k + 1))
        s = int(rng.integers(1, lam.n[i - 1] + 1))
        out.append(Letter(bool(rng.integers(0, 2)), i, s))
    return out


def random_polynomial(
    lam: PhaseMatrix,
    rng: np.random.Generator,
    max_word_degree: int = 2,
    n_terms: int = 3,
    integer_coeffs: bool = False,
) -> StarPolynomial:
    """Random normal-form polynomial with bounded per-side word degree."""
    pool = enumerate_basis(lam.n, max_word_degree)
    p = StarPolynomial.zero(lam.k)
    for _ in range(n_terms):
        a = pool[int(rng.integers(len(pool)))]
        b = pool[int(rng.integers(len(pool)))]
        if integer_coeffs:
            c = complex(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        else:
            c = complex(rng.normal(), rng.normal())
        if c != 0:
            p.add_term(a, b, lam.identity(), c)
    return p


def random_coinvariant_frame(
    model: TruncatedModel,
    aux_dim: int,
    rng: np.random.Generator,
    n_seeds: int = 1,
) -> np.ndarray:
    """Smallest subspace containing random seeds and closed under adjoints."""
    ambient = model.dim * aux_dim
    cols = rng.normal(size=(ambient, n_seeds)) + 1j * rng.normal(size=(ambient, n_seeds))
    stars = [
        np.kron(model.letter_matrix(Letter(True, i, s)), np.eye(aux_dim))
        for i in range(1, model.k + 1)
        for s in range(1, model.n[i - 1] + 1)
    ]
    rank = 0
    while True:
        q, svals, _ = np.linalg.svd(cols, full_matrices=False)
        keep = svals > 1e-12 * max(1.0, svals[0] if svals.size else 1.0)
        q = q[:, keep]
        if q.shape[1] == rank:
            return q
        rank = q.shape[1]
        cols = np.hstack([q] + [S @ q for S in stars])


def random_nilpotent_member(
    lam: PhaseMatrix,
    rng: np.random.Generator,
    degree: int = 2,
    aux_dim: int = 1,
    dim_cap: int = 6,
    max_tries: int = 40,
) -> RowTuple:
    """Random jointly nilpotent polyball member of bounded dimension.

    Built as the compression of the standard tuple to a random co-invariant
    subspace, then conjugated by a random unitary.  Compressions to
    co-invariant subspaces satisfy the twisted commutation exactly and are
    nilpotent of order at most the truncation degree.
    """
    model = TruncatedModel(lam, degree)
    for _ in range(max_tries):
        Q = random_coinvariant_frame(model, aux_dim, rng)
        if not 1 <= Q.shape[1] <= dim_cap:
            continue
        d = Q.shape[1]
        U = haar_unitary(rng, d)
        rows = []
        for i in range(1, lam.k + 1):
            row = []
            for s in range(1, lam.n[i - 1] + 1):
                S = np.kron(model.letter_matrix(Letter(False, i, s)), np.eye(aux_dim))
                row.append(U.conj().T @ Q.conj().T @ S @ Q @ U)
            rows.append(tuple(row))
        return RowTuple(lam, tuple(rows))
    raise RuntimeError(
        f"no co-invariant compression of dimension <= {dim_cap} found in {max_tries} tries"
    )


def random_phase(rng: np.random.Generator, modulus: int) -> Phase:
    return Phase(int(rng.integers(modulus)), modulus)


def cfg_a() -> PhaseMatrix:
    """Two blocks of arity one, quarter-turn twist."""
    from fractions import Fraction

    return validate_lambda(2, (1, 1), [(1, 2, 1, 1, Fraction(1, 4))])


def cfg_b() -> PhaseMatrix:
    """Blocks of arity (2, 1); twists i and -1."""
    from fractions import Fraction

    return validate_lambda(
        2, (2, 1), [(1, 2, 1, 1, Fraction(1, 4)), (1, 2, 2, 1, Fraction(1, 2))]
    )


def clock_matrix(N: int, power: int = 1) -> np.ndarray:
    omega = np.exp(2j * np.pi / N)
    return np.diag(omega ** (power * np.arange(N)))


def shift_matrix(N: int) -> np.ndarray:
    X = np.zeros((N, N), dtype=complex)
    for j in range(N):
        X[(j + 1) % N, j] = 1.0
    return X


def torus_pair(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Clock and cyclic shift with clock @ shift = omega * shift @ clock."""
    return clock_matrix(N), shift_matrix(N)


def random_tuple_spec(
    rng: np.random.Generator,
    modulus: int,
    k: int | None = None,
    max_pieces: int = 2,
    max_wandering: int = 3,
):
    """Random twist plus spec with finite-realizable pieces.

    At most one pair of blocks carries a nontrivial twist among blocks that
    can appear together on the surjective side, which keeps twisted unitary
    families realizable within small wandering dimensions.
    """
    k = k if k is not None else int(rng.integers(1, 4))
    n = tuple(1 for _ in range(k))

    twisted_pair = None
    entries = []
    if k >= 2 and rng.random() < 0.8:
        pair = sorted(rng.choice(np.arange(1, k + 1), size=2, replace=False).tolist())
        c = int(rng.integers(1, modulus))
        from fractions import Fraction

        entries.append((pair[0], pair[1], 1, 1, Fraction(c, modulus)))
        twisted_pair = (pair[0], pair[1], c)
    lam = validate_lambda(k, n, entries)

    pieces = []
    for _ in range(int(rng.integers(1, max_pieces + 1))):
        size = int(rng.integers(0, k + 1))
        A = tuple(sorted(rng.choice(np.arange(1, k + 1), size=size, replace=False).tolist()))
        comp = [j for j in range(1, k + 1) if j not in A]
        if not comp:
            pieces.append(SpecPiece(A, int(rng.integers(1, max_wandering + 1)), {}))
            continue
        needs_twist = (
            twisted_pair is not None
            and twisted_pair[0] in comp
            and twisted_pair[1] in comp
        )
        if needs_twist:
            a, b, c = twisted_pair
            base = clock_matrix(modulus, power=c), shift_matrix(modulus)
            extra = int(rng.integers(1, max(2, max_wandering // 2 + 1)))
            unitaries = {}
            for j in comp:
                if j == a:
                    U = np.kron(base[0], _random_diag(rng, extra))
                elif j == b:
                    U = np.kron(base[1], _random_diag(rng, extra))
                else:
                    U = np.kron(np.eye(modulus), _random_diag(rng, extra))
                unitaries[j] = U
            wdim = modulus * extra
        else:
            wdim = int(rng.integers(1, max_wandering + 1))
            unitaries = {j: _random_diag(rng, wdim) for j in comp}
        pieces.append(SpecPiece(A, wdim, unitaries))
    return lam, TupleSpec(pieces)


def _random_diag(rng: np.random.Generator, d: int) -> np.ndarray:
    angles = rng.uniform(0, 2 * np.pi, size=d)
    return np.diag(np.exp(1j * angles))


def random_inner_intertwiner(
    model: TruncatedModel,
    rng: np.random.Generator,
    in_aux: int = 1,
    symbol_degree: int = 1,
    in_degree: int | None = None,
):
    """Random isometric operator intertwining the tensored shifts.

    The symbol sends the vacuum slice into orthogonal copies of the input
    space translated by a finite family of multiwords; shifted columns stay
    orthonormal because blockwise concatenation is cancellative.  Input
    degrees stop at D - symbol_degree so no column is clipped.
    """
    D = model.D
    if in_degree is None:
        in_degree = D - symbol_degree
    if in_degree < 0:
        raise ValueError("model degree too small for the requested symbol degree")

    family = [w for w in enumerate_basis(model.n, symbol_degree)]
    count = int(rng.integers(1, min(3, len(family)) + 1))
    chosen_idx = rng.choice(np.arange(len(family)), size=count, replace=False)
    chosen = [family[int(t)] for t in chosen_idx]
    weights = rng.normal(size=count) + 1j * rng.normal(size=count)
    weights /= np.linalg.norm(weights)

    out_aux = count * in_aux
    in_basis = [w for w in model.basis if w.degree <= in_degree]
    Psi = np.zeros((model.dim * out_aux, len(in_basis) * in_aux), dtype=complex)

    for col_w, w in enumerate(in_basis):
        Sw = model.creator_matrix(w)
        for chunk, (u, c) in enumerate(zip(chosen, weights)):
            target = Sw[:, model.index[u]]
            for row_w in np.nonzero(target)[0]:
                for a in range(in_aux):
                    Psi[row_w * out_aux + chunk * in_aux + a,
                        col_w * in_aux + a] = c * target[row_w]
    return Psi, out_aux, len(in_basis)


def handle_from_intertwiner(model: TruncatedModel, Psi: np.ndarray,
                            out_aux: int) -> SubspaceHandle:
    return SubspaceHandle.from_vectors(model, out_aux, Psi)
