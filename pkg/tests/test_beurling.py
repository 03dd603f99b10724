import numpy as np
import pytest

from polyball_lab.berezin import berezin_kernel, evaluate_on_tuple
from polyball_lab.beurling import (
    SubspaceError,
    SubspaceHandle,
    beurling_conditions,
    beurling_factorize,
    coinvariant_span,
    compare_compressions,
    compression_model,
    defect_of_operator,
    moment_fingerprint,
)
from polyball_lab.fockmodel import TruncatedModel
from polyball_lab.phases import validate_lambda
from polyball_lab.polyball import norm2
from polyball_lab.sampling import (
    handle_from_intertwiner,
    random_coinvariant_frame,
    random_inner_intertwiner,
    random_nilpotent_member,
    rng_for,
)
from polyball_lab.words import MultiWord


def scalar_model(lam, D):
    return TruncatedModel(lam, D)


def basis_vector(model, text, aux=1, slot=0):
    v = np.zeros((model.dim * aux, 1), dtype=complex)
    v[model.index[MultiWord.from_text(text)] * aux + slot, 0] = 1.0
    return v


def test_span_of_vacuum_line(lam_a):
    model = scalar_model(lam_a, 3)
    M = SubspaceHandle.from_vectors(model, 1, basis_vector(model, "e|e"))
    L, verdict = coinvariant_span(M)
    assert L.shape[1] == 1
    assert verdict.holds and verdict.expected_rank == model.dim


def test_span_of_kernel_range(lam_a):
    rng = rng_for(3)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    kern = berezin_kernel(T)
    M = SubspaceHandle.from_vectors(kern.model, kern.defect_dim, kern.K)
    L, verdict = coinvariant_span(M)
    assert L.shape[1] == kern.defect_dim
    assert verdict.holds
    assert verdict.contained_in_tensor <= 1e-12


def test_span_rejects_non_coinvariant(lam_a):
    model = scalar_model(lam_a, 2)
    M = SubspaceHandle.from_vectors(model, 1, basis_vector(model, "1|e"))
    with pytest.raises(SubspaceError):
        coinvariant_span(M)


def test_conditions_full_tensor_is_beurling(lam_a):
    # the whole space tensored against a fixed line of the auxiliary space
    model = scalar_model(lam_a, 4)
    aux = 2
    cols = []
    for w in model.basis:
        v = np.zeros((model.dim * aux, 1), dtype=complex)
        v[model.index[w] * aux + 0, 0] = 1.0
        cols.append(v)
    M = SubspaceHandle.from_vectors(model, aux, np.hstack(cols))
    rep = beurling_conditions(M, buffer=2)
    assert rep.is_beurling
    assert rep.min_defect_eig >= -1e-12
    assert rep.doubly_residual is not None and rep.doubly_residual <= 1e-12


def test_conditions_shift_range_is_beurling():
    lam = validate_lambda(1, (1,), [])
    model = scalar_model(lam, 4)
    cols = [basis_vector(model, text) for text in ("1", "1.1", "1.1.1", "1.1.1.1")]
    M = SubspaceHandle.from_vectors(model, 1, np.hstack(cols))
    rep = beurling_conditions(M, buffer=2)
    assert rep.is_beurling


def test_conditions_positive_degree_cone_is_not_beurling(lam_a):
    model = scalar_model(lam_a, 4)
    cols = [basis_vector(model, w.to_text()) for w in model.basis if w.degree >= 1]
    M = SubspaceHandle.from_vectors(model, 1, np.hstack(cols))
    rep = beurling_conditions(M, buffer=2)
    assert rep.min_defect_eig < -1e-6
    assert not rep.is_beurling
    assert rep.doubly_residual is not None and rep.doubly_residual > 1e-3


def test_conditions_require_buffer(lam_a):
    model = scalar_model(lam_a, 4)
    M = SubspaceHandle.from_vectors(model, 1, basis_vector(model, "e|e"))
    with pytest.raises(SubspaceError):
        beurling_conditions(M, buffer=1)


def test_conditions_reject_non_invariant(lam_a):
    model = scalar_model(lam_a, 4)
    # a co-invariant but not invariant line
    M = SubspaceHandle.from_vectors(model, 1, basis_vector(model, "e|e")
                                    + basis_vector(model, "1|e"))
    with pytest.raises(SubspaceError):
        beurling_conditions(M, buffer=2)


def test_factorize_identity(lam_a):
    model = scalar_model(lam_a, 3)
    res = beurling_factorize(model, 1, np.eye(model.dim))
    assert res.factor_residual <= 1e-10
    assert res.multianalytic_residual <= 1e-10


def test_factorize_shift_range_projection():
    lam = validate_lambda(1, (1,), [])
    model = scalar_model(lam, 4)
    cols = [basis_vector(model, text) for text in ("1", "1.1", "1.1.1", "1.1.1.1")]
    M = SubspaceHandle.from_vectors(model, 1, np.hstack(cols))
    res = beurling_factorize(model, 1, M.projector())
    assert res.factor_residual <= 1e-10
    # the factor is a partial isometry onto M (on the interior)
    low = np.kron(model.interior_projector(2), np.eye(1))
    gap = norm2(low @ (res.A @ res.A.conj().T - M.projector()) @ low)
    assert gap <= 1e-10


def test_factorize_rejects_negative_defect(lam_a):
    model = scalar_model(lam_a, 4)
    cols = [basis_vector(model, w.to_text()) for w in model.basis if w.degree >= 1]
    M = SubspaceHandle.from_vectors(model, 1, np.hstack(cols))
    with pytest.raises(SubspaceError):
        beurling_factorize(model, 1, M.projector())


def test_factorize_rejects_non_hermitian(lam_a):
    model = scalar_model(lam_a, 2)
    Y = np.zeros((model.dim, model.dim), dtype=complex)
    Y[0, 1] = 1.0
    with pytest.raises(SubspaceError):
        beurling_factorize(model, 1, Y)


def test_factorization_soundness_on_planted_ranges(lam_a):
    model = scalar_model(lam_a, 4)
    rng = rng_for(11)
    for _ in range(10):
        Psi, out_aux, _ = random_inner_intertwiner(model, rng, symbol_degree=1)
        Y = Psi @ Psi.conj().T
        res = beurling_factorize(model, out_aux, Y)
        assert res.factor_residual <= 1e-8
        assert res.multianalytic_residual <= 1e-8
        # implication: the defect of A A* stays positive on the interior
        defect = defect_of_operator(model, out_aux, res.A @ res.A.conj().T)
        low_idx = np.nonzero(np.repeat(model.degrees() <= model.D - 2, out_aux))[0]
        core = defect[np.ix_(low_idx, low_idx)]
        assert np.linalg.eigvalsh((core + core.conj().T) / 2).min() >= -1e-9


def test_planted_ranges_satisfy_both_conditions(lam_a):
    model = scalar_model(lam_a, 4)
    rng = rng_for(13)
    for _ in range(50):
        in_aux = int(rng.integers(1, 3))
        Psi, out_aux, _ = random_inner_intertwiner(
            model, rng, in_aux=in_aux, symbol_degree=int(rng.integers(0, 2))
        )
        M = handle_from_intertwiner(model, Psi, out_aux)
        rep = beurling_conditions(M, buffer=2)
        assert rep.min_defect_eig >= -1e-10
        assert rep.doubly_residual is None or rep.doubly_residual <= 1e-9


def test_compression_of_full_space(lam_a):
    model = scalar_model(lam_a, 3)
    cols = np.eye(model.dim, dtype=complex)
    M = SubspaceHandle.from_vectors(model, 1, cols)
    rep = compression_model(M)
    assert rep.membership.is_member and rep.membership.is_pure
    assert rep.defect_rank == 1 and rep.rank_matches


def test_compression_of_vacuum_line(lam_a):
    model = scalar_model(lam_a, 2)
    M = SubspaceHandle.from_vectors(model, 1, basis_vector(model, "e|e"))
    rep = compression_model(M)
    assert rep.defect_rank == 1
    assert not rep.tuple.op(1, 1).any()


def test_compression_roundtrip_reproduces_moments(lam_a):
    rng = rng_for(17)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    kern = berezin_kernel(T)
    M = SubspaceHandle.from_vectors(kern.model, kern.defect_dim, kern.K)
    rep = compression_model(M)
    pool = [w for w in kern.model.basis if w.degree <= 3]
    for a in pool[:8]:
        for b in pool[:8]:
            from polyball_lab.rewrite import StarPolynomial

            f = StarPolynomial.monomial(lam_a, a, b)
            lhs = evaluate_on_tuple(rep.tuple, f)
            rhs = evaluate_on_tuple(T, f)
            assert abs(np.trace(lhs) - np.trace(rhs)) <= 1e-9
            assert abs(norm2(lhs) - norm2(rhs)) <= 1e-9


def test_compression_rejects_non_coinvariant(lam_a):
    model = scalar_model(lam_a, 2)
    M = SubspaceHandle.from_vectors(model, 1, basis_vector(model, "1|e"))
    with pytest.raises(SubspaceError):
        compression_model(M)


def test_distinct_subspaces_have_distinct_fingerprints(lam_a):
    model = scalar_model(lam_a, 3)
    rng = rng_for(19)
    handles = []
    for _ in range(6):
        Q = random_coinvariant_frame(model, 1, rng)
        handles.append(SubspaceHandle.from_vectors(model, 1, Q))
    for x in range(len(handles)):
        for y in range(x + 1, len(handles)):
            verdict = compare_compressions(handles[x], handles[y])
            assert verdict in ("distinct", "inconclusive", "equal_subspaces")
            if verdict == "equal_subspaces":
                continue
            # never claim equivalence from matching fingerprints alone
            assert verdict != "equivalent"
            assert verdict == "distinct"


def test_fingerprint_is_unitarily_invariant(lam_a):
    rng = rng_for(23)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    from polyball_lab.sampling import haar_unitary
    from polyball_lab.polyball import RowTuple

    U = haar_unitary(rng, T.dim)
    T2 = RowTuple(lam_a, tuple(tuple(U.conj().T @ m @ U for m in row)
                               for row in T.mats))
    f1, f2 = moment_fingerprint(T), moment_fingerprint(T2)
    assert max(abs(f1[w] - f2[w]) for w in f1) <= 1e-10
