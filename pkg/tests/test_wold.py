import itertools

import numpy as np
import pytest

from polyball_lab.fockmodel import TruncatedModel
from polyball_lab.phases import validate_lambda
from polyball_lab.polyball import norm2
from polyball_lab.rewrite import Letter
from polyball_lab.sampling import (
    clock_matrix,
    random_tuple_spec,
    rng_for,
    shift_matrix,
    torus_pair,
)
from polyball_lab.wold import (
    SpecError,
    SpecPiece,
    TupleSpec,
    assemble,
    commutant_dimension,
    equivalence_check,
    wandering_data,
    wold_projections,
)


def test_assemble_pure_pair_matches_model_shifts(lam_a):
    spec = TupleSpec([SpecPiece((1, 2), 1, {})])
    asm = assemble(lam_a, spec, 2)
    model = TruncatedModel(lam_a, 2)
    assert asm.dim == 6
    for i in (1, 2):
        assert np.array_equal(asm.row.op(i, 1), model.letter_matrix(Letter(False, i, 1)))


def test_assemble_torus_piece(lam_a, torus4):
    C, X = torus4
    spec = TupleSpec([SpecPiece((), 4, {1: C, 2: X})])
    asm = assemble(lam_a, spec, 3)
    assert asm.dim == 4
    assert np.array_equal(asm.row.op(1, 1), C)
    assert np.array_equal(asm.row.op(2, 1), X)


def test_assemble_half_shift_piece(lam_a):
    # pure block 1 with wandering space carrying the shift unitary for block 2
    X = shift_matrix(4)
    spec = TupleSpec([SpecPiece((1,), 4, {2: X})])
    D = 3
    asm = assemble(lam_a, spec, D)
    assert asm.dim == (D + 1) * 4
    # V2 on chi_m (x) h = twist(2,1)^m chi_m (x) X h
    lam21 = lam_a.phase(2, 1, 1, 1).to_complex()
    V2 = asm.row.op(2, 1)
    for m in range(D + 1):
        block = V2[m * 4 : (m + 1) * 4, m * 4 : (m + 1) * 4]
        assert np.allclose(block, lam21 ** m * X, atol=1e-14)


def test_assemble_rejects_wide_surjective_block(lam_b):
    # block 1 has arity 2; it cannot sit on the surjective side of a piece
    spec = TupleSpec([SpecPiece((2,), 1, {1: np.eye(1)})])
    with pytest.raises(SpecError):
        assemble(lam_b, spec, 2)


def test_spec_validation_checks_twisted_commutation(lam_a):
    C, X = torus_pair(4)
    bad = TupleSpec([SpecPiece((), 4, {1: X, 2: C})])  # wrong order: XC = -i CX
    with pytest.raises(SpecError):
        assemble(lam_a, bad, 2)


def test_projections_pure_piece(lam_a):
    asm = assemble(lam_a, TupleSpec([SpecPiece((1, 2), 1, {})]), 3)
    proj = wold_projections(asm)
    mask = asm.interior_mask(1)
    full = proj.P[(1, 2)]
    assert np.allclose(full[np.ix_(mask, mask)], np.eye(mask.sum()), atol=1e-12)
    for A, P in proj.P.items():
        if A != (1, 2):
            assert norm2(P) <= 1e-12


def test_projections_torus_piece(lam_a, torus4):
    C, X = torus4
    asm = assemble(lam_a, TupleSpec([SpecPiece((), 4, {1: C, 2: X})]), 3)
    proj = wold_projections(asm)
    assert np.allclose(proj.P[()], np.eye(4), atol=1e-13)
    for A, P in proj.P.items():
        if A != ():
            assert norm2(P) <= 1e-13


def test_mixed_spec_ranks(lam_a, torus4):
    C, X = torus4
    spec = TupleSpec([SpecPiece((1, 2), 2, {}), SpecPiece((), 4, {1: C, 2: X})])
    asm = assemble(lam_a, spec, 3)
    proj = wold_projections(asm)
    mask = asm.interior_mask(1)
    interior_rank = int(np.round(np.trace(proj.P[(1, 2)][np.ix_(mask, mask)]).real))
    model_interior = sum(1 for w in TruncatedModel(lam_a, 3).basis if w.degree <= 2)
    assert interior_rank == model_interior * 2
    assert int(np.round(np.trace(proj.P[()]).real)) == 4

    data = wandering_data(asm, projections=proj)
    # full defect rank equals the shift-direction wandering dimension
    assert data.dims[(1, 2)] == 2


def test_wandering_data_recovers_plant(lam_a, torus4):
    C, X = torus4
    spec = TupleSpec([SpecPiece((1,), 4, {2: X})])
    asm = assemble(lam_a, spec, 3)
    data = wandering_data(asm)
    assert data.dims[(1,)] == 4
    recovered = data.unitaries[(1,)][2]
    assert np.allclose(
        np.sort_complex(np.round(np.linalg.eigvals(recovered), 9)),
        np.sort_complex(np.round(np.linalg.eigvals(X), 9)),
        atol=1e-9,
    )
    assert data.kernel_residual <= 1e-12


def test_wandering_standard_pair_is_vacuum_line(lam_a):
    asm = assemble(lam_a, TupleSpec([SpecPiece((1, 2), 1, {})]), 3)
    data = wandering_data(asm)
    assert data.dims[(1, 2)] == 1
    assert all(d == 0 for A, d in data.dims.items() if A != (1, 2))


def test_equivalence_identical_specs(lam_a, torus4):
    C, X = torus4
    spec = TupleSpec([SpecPiece((1,), 4, {2: X}), SpecPiece((1, 2), 2, {})])
    d1 = wandering_data(assemble(lam_a, spec, 3))
    d2 = wandering_data(assemble(lam_a, spec, 3))
    assert equivalence_check(d1, d2).status == "equivalent"


def test_equivalence_dimension_mismatch(lam_a):
    d1 = wandering_data(assemble(lam_a, TupleSpec([SpecPiece((1, 2), 2, {})]), 2))
    d2 = wandering_data(assemble(lam_a, TupleSpec([SpecPiece((1, 2), 3, {})]), 2))
    assert equivalence_check(d1, d2).status == "not_equivalent"


def test_equivalence_clock_vs_shift(lam_a, torus4):
    C, X = torus4
    d1 = wandering_data(assemble(lam_a, TupleSpec([SpecPiece((1,), 4, {2: X})]), 2))
    d2 = wandering_data(assemble(lam_a, TupleSpec([SpecPiece((1,), 4, {2: C})]), 2))
    # same eigenvalue multiset (the fourth roots of unity) so equivalent
    assert equivalence_check(d1, d2).status == "equivalent"


def test_equivalence_multi_unitary_is_semi_decision(lam_a, torus4):
    # a surjective pair compares through fingerprints only: agreement is
    # reported as inconclusive, never promoted to equivalence
    C, X = torus4
    spec = TupleSpec([SpecPiece((), 4, {1: C, 2: X})])
    d1 = wandering_data(assemble(lam_a, spec, 2))
    d2 = wandering_data(assemble(lam_a, spec, 2))
    assert equivalence_check(d1, d2).status == "inconclusive"


def test_equivalence_requires_matching_twist(lam_a):
    lam2 = validate_lambda(2, (1, 1), [])
    d1 = wandering_data(assemble(lam_a, TupleSpec([SpecPiece((1, 2), 1, {})]), 2))
    d2 = wandering_data(assemble(lam2, TupleSpec([SpecPiece((1, 2), 1, {})]), 2))
    with pytest.raises(Exception):
        equivalence_check(d1, d2)


def test_piece_permutation_leaves_dims_invariant(lam_a, torus4):
    C, X = torus4
    pieces = [SpecPiece((1, 2), 2, {}), SpecPiece((), 4, {1: C, 2: X}),
              SpecPiece((1,), 4, {2: X})]
    base = wandering_data(assemble(lam_a, TupleSpec(pieces), 2)).dims
    for perm in itertools.permutations(pieces):
        dims = wandering_data(assemble(lam_a, TupleSpec(list(perm)), 2)).dims
        assert dims == base


def test_piece_membership_under_projections(lam_a, torus4):
    # each planted piece is fixed by the matching projections on the interior
    C, X = torus4
    spec = TupleSpec([SpecPiece((1,), 4, {2: X}), SpecPiece((), 4, {1: C, 2: X})])
    asm = assemble(lam_a, spec, 3)
    proj = wold_projections(asm)
    mask = asm.interior_mask(1)
    for piece, A in zip(asm.pieces, [(1,), ()]):
        sel = np.zeros(asm.dim, dtype=bool)
        sel[piece.offset : piece.offset + piece.dim] = True
        sel &= mask
        P_piece = np.diag(sel.astype(complex))
        for i in range(1, 3):
            target = proj.shift_parts[i] if i in A else proj.tail_parts[i]
            assert norm2(P_piece @ target - P_piece) <= 1e-12


def test_irreducible_single_piece_criterion(lam_a, torus4):
    C, X = torus4
    # the pair (C, X) acts irreducibly: the commutant is trivial
    assert commutant_dimension([C, X]) == 1
    asm = assemble(lam_a, TupleSpec([SpecPiece((1,), 4, {2: X})]), 2)
    data = wandering_data(asm)
    nonzero = [A for A, d in data.dims.items() if d > 0]
    assert nonzero == [(1,)]
    # diagonal unitaries are reducible and the commutant sees it
    assert commutant_dimension([clock_matrix(4)]) > 1


def test_roundtrip_random_specs():
    rng = rng_for(2026)
    for trial in range(30):
        modulus = int(rng.choice((2, 3, 4, 6)))
        lam, spec = random_tuple_spec(rng, modulus)
        D = {1: 4, 2: 3, 3: 2}[lam.k]
        asm = assemble(lam, spec, D)
        proj = wold_projections(asm)
        assert max(proj.idempotency, proj.orthogonality,
                   proj.completeness, proj.commutation) <= 1e-10
        data = wandering_data(asm, projections=proj)
        expected = {}
        for piece in spec.pieces:
            expected[piece.subset] = expected.get(piece.subset, 0) + piece.wandering_dim
        for A, dim in data.dims.items():
            assert dim == expected.get(A, 0)


def test_spec_json_roundtrip(torus4):
    C, X = torus4
    payload = {
        "pieces": [
            {"A": [1, 2], "wandering_dim": 1},
            {"A": [], "unitaries": {
                "1": [[[float(z.real), float(z.imag)] for z in row] for row in C],
                "2": [[[float(z.real), float(z.imag)] for z in row] for row in X],
            }},
        ]
    }
    spec = TupleSpec.from_json(payload)
    assert spec.pieces[0].subset == (1, 2)
    assert spec.pieces[1].wandering_dim == 4
    assert np.allclose(spec.pieces[1].unitaries[1], C)
