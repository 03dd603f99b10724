from fractions import Fraction

import numpy as np
import pytest

from polyball_lab.polyball import (
    RowTuple,
    TupleError,
    check_doubly,
    check_membership,
    check_pure,
    mixed_defect,
    norm2,
    phi_map,
)
from polyball_lab.phases import validate_lambda
from polyball_lab.sampling import random_nilpotent_member, rng_for


def free_lam():
    return validate_lambda(1, (1,), [])


def jordan(d):
    J = np.zeros((d, d), dtype=complex)
    for c in range(1, d):
        J[c - 1, c] = 1.0
    return J


def zero_tuple(lam, dim=1):
    z = np.zeros((dim, dim), dtype=complex)
    return RowTuple(lam, tuple(tuple(z for _ in range(lam.n[i - 1]))
                               for i in range(1, lam.k + 1)))


def test_phi_map_examples(lam_a):
    Z = zero_tuple(lam_a, 3)
    assert not phi_map(Z, 1, np.eye(3)).any()

    U = np.diag(np.exp(1j * np.array([0.3, 1.2, 2.0])))
    T = RowTuple(free_lam(), ((U,),))
    assert np.allclose(phi_map(T, 1, np.eye(3)), np.eye(3), atol=1e-15)

    J = RowTuple(free_lam(), ((jordan(2),),))
    out = phi_map(J, 1, np.eye(2))
    assert np.array_equal(out, np.diag([1.0, 0.0]).astype(complex))


def test_phi_map_dimension_mismatch(lam_a):
    Z = zero_tuple(lam_a, 2)
    with pytest.raises(TupleError):
        phi_map(Z, 1, np.eye(3))


def test_torus_pair_is_member_not_pure(lam_a, torus4):
    C, X = torus4
    report = check_membership(RowTuple(lam_a, ((C,), (X,))))
    assert report.is_member and report.is_doubly and not report.is_pure
    for powers, eig in report.positivity.items():
        if any(powers):
            assert abs(eig) <= 1e-12  # unitary rows: every defect vanishes


def test_wrong_twist_not_member(torus4):
    C, X = torus4
    lam = validate_lambda(2, (1, 1), [(1, 2, 1, 1, Fraction(3, 4))])
    report = check_membership(RowTuple(lam, ((C,), (X,))))
    assert not report.is_member
    assert abs(report.commutation_residual - 2.0) <= 1e-12


def test_zero_tuple_member_pure(lam_a):
    report = check_membership(zero_tuple(lam_a, 2))
    assert report.is_member and report.is_pure and report.is_doubly
    assert np.array_equal(mixed_defect(zero_tuple(lam_a, 2), (1, 1)), np.eye(2))


def test_doubly_examples(lam_a, torus4):
    C, X = torus4
    ok, res = check_doubly(RowTuple(lam_a, ((C,), (X,))))
    assert ok and res <= 1e-12
    ok, _ = check_doubly(zero_tuple(lam_a))
    assert ok


def test_generic_member_is_not_doubly(lam_a):
    rng = rng_for(99)
    hits = 0
    for _ in range(10):
        T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
        ok, _ = check_doubly(T)
        hits += not ok
    assert hits >= 8  # compressions are rarely star-commuting


def test_purity_examples():
    for d in (2, 3, 4):
        rep = check_pure(RowTuple(free_lam(), ((jordan(d),),)))
        assert rep.is_pure and rep.nilpotency_orders[1] == d

    U = np.diag([1.0, 1j]).astype(complex)
    rep = check_pure(RowTuple(free_lam(), ((U,),)), max_power=25)
    assert not rep.is_pure and abs(rep.power_norms[1] - 1.0) <= 1e-12

    rep = check_pure(RowTuple(free_lam(), ((0.5 * np.eye(2, dtype=complex),),)),
                     max_power=20)
    assert rep.is_pure and rep.power_norms[1] <= 0.25 ** 20 + 1e-18


def test_block_maps_commute_for_commuting_tuples(lam_a):
    rng = rng_for(31)
    for _ in range(5):
        T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
        H = rng.normal(size=(T.dim, T.dim)) + 1j * rng.normal(size=(T.dim, T.dim))
        X = (H + H.conj().T) / 2
        gap = phi_map(T, 1, phi_map(T, 2, X)) - phi_map(T, 2, phi_map(T, 1, X))
        assert norm2(gap) <= 10 * 1e-10 * norm2(X)


def test_word_range_projections_commute_for_doubly(lam_a, torus4):
    C, X = torus4
    T = RowTuple(lam_a, ((C,), (X,)))
    rng = rng_for(13)
    for _ in range(5):
        m = int(rng.integers(0, 4))
        W = T.block_word(2, tuple(1 for _ in range(m)))
        P = W @ W.conj().T
        gap = T.op(1, 1) @ P - P @ T.op(1, 1)
        assert norm2(gap) <= 1e-12


def test_doubly_implies_member(lam_a, torus4):
    C, X = torus4
    for r in (1.0, 0.7, 0.3):
        T = RowTuple(lam_a, ((r * C,), (r * X,)))
        ok, _ = check_doubly(T)
        assert ok
        assert check_membership(T).is_member


def test_r_grid_consistency_never_raises(lam_a):
    rng = rng_for(77)
    for _ in range(10):
        T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
        check_membership(T)  # would raise if (iii) passed but the grid failed


def test_membership_report_serializes(lam_a, torus4):
    C, X = torus4
    payload = check_membership(RowTuple(lam_a, ((C,), (X,)))).to_json()
    assert payload["is_member"] is True
    assert payload["is_pure"] is False
    assert "11" in payload["positivity"]


def test_row_tuple_validation(lam_a):
    with pytest.raises(TupleError):
        RowTuple(lam_a, ((np.eye(2),),))  # wrong row count
    with pytest.raises(TupleError):
        RowTuple(lam_a, ((np.eye(2),), (np.eye(3),)))  # mixed dimensions
