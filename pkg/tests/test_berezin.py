import numpy as np
import pytest

from polyball_lab.berezin import (
    KernelError,
    berezin_kernel,
    berezin_transform,
    evaluate_on_tuple,
    joint_nilpotency_degree,
    minimal_dilation,
    moment_check,
    rescale_invariance_residual,
    rescale_tuple,
    vn_check,
)
from polyball_lab.phases import Phase, validate_lambda
from polyball_lab.polyball import RowTuple, norm2
from polyball_lab.rewrite import StarPolynomial, multiply
from polyball_lab.sampling import (
    random_nilpotent_member,
    random_polynomial,
    rng_for,
    torus_pair,
)
from polyball_lab.words import MultiWord


def free_lam():
    return validate_lambda(1, (1,), [])


def jordan2():
    return RowTuple(free_lam(), ((np.array([[0, 1], [0, 0]], dtype=complex),),))


def zero_tuple(lam, dim=1):
    z = np.zeros((dim, dim), dtype=complex)
    return RowTuple(lam, tuple(tuple(z for _ in range(lam.n[i - 1]))
                               for i in range(1, lam.k + 1)))


def test_kernel_of_zero_tuple(lam_a):
    kern = berezin_kernel(zero_tuple(lam_a))
    assert kern.model.D == 0 and kern.defect_dim == 1
    assert kern.K.shape == (1, 1) and abs(abs(kern.K[0, 0]) - 1.0) <= 1e-15
    assert kern.isometry_residual <= 1e-15


def test_kernel_of_jordan_block():
    kern = berezin_kernel(jordan2())
    # defect is the projection onto the second basis vector
    assert kern.defect_dim == 1
    assert np.allclose(kern.root, np.diag([0.0, 1.0]), atol=1e-14)
    K = np.abs(kern.K)
    assert np.allclose(K, np.array([[0, 1], [1, 0]]), atol=1e-14)
    assert kern.isometry_residual <= 1e-14
    assert kern.intertwining_residual <= 1e-14


def test_kernel_rejects_torus(lam_a, torus4):
    C, X = torus4
    with pytest.raises(KernelError):
        berezin_kernel(RowTuple(lam_a, ((C,), (X,))))


def test_transform_of_identity(lam_a):
    rng = rng_for(2)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    out = berezin_transform(T, StarPolynomial.identity(lam_a))
    assert norm2(out.value - np.eye(T.dim)) <= 1e-12
    assert out.direct_residual <= 1e-12


def test_transform_equals_direct_evaluation(lam_a):
    rng = rng_for(4)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    f = random_polynomial(lam_a, rng, 2, 4)
    out = berezin_transform(T, f)
    assert out.direct_residual <= 1e-11
    assert norm2(out.value - evaluate_on_tuple(T, f)) <= 1e-11


def test_transform_on_zero_tuple(lam_a):
    g = MultiWord.from_text("1|e")
    f = StarPolynomial.monomial(lam_a, g, g)
    out = berezin_transform(zero_tuple(lam_a), f)
    assert norm2(out.value) <= 1e-15


def test_transform_multiplicative_on_creator_polynomials(lam_a):
    rng = rng_for(8)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    e = MultiWord.empty(2)
    pool = [w for w in berezin_kernel(T).model.basis]
    f = StarPolynomial.zero(2)
    g = StarPolynomial.zero(2)
    for w in pool[:3]:
        f.add_term(w, e, lam_a.identity(), complex(rng.normal(), rng.normal()))
        g.add_term(w, e, lam_a.identity(), complex(rng.normal(), rng.normal()))
    lhs = berezin_transform(T, multiply(lam_a, f, g)).value
    rhs = berezin_transform(T, f).value @ berezin_transform(T, g).value
    assert norm2(lhs - rhs) <= 1e-10


def test_vn_jordan_example():
    lam = free_lam()
    p = StarPolynomial.zero(1)
    e, g = MultiWord.empty(1), MultiWord.from_text("1")
    p.add_term(g, e, lam.identity(), 1.0)
    p.add_term(e, g, lam.identity(), 1.0)
    lhs, rhs, ok = vn_check(jordan2(), p, D_prime=3)
    assert ok
    assert abs(lhs - 1.0) <= 1e-12
    assert abs(rhs - 2 * np.cos(np.pi / 5)) <= 1e-12


def test_vn_product_of_creators(lam_a):
    rng = rng_for(6)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    f = StarPolynomial.monomial(lam_a, MultiWord.from_text("1|1"), MultiWord.empty(2))
    lhs, rhs, ok = vn_check(T, f)
    assert ok and lhs <= 1.0 + 1e-12 and abs(rhs - 1.0) <= 1e-12


def test_vn_identity_polynomial(lam_a):
    rng = rng_for(7)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    lhs, rhs, ok = vn_check(T, StarPolynomial.identity(lam_a))
    assert ok and abs(lhs - 1.0) <= 1e-12 and abs(rhs - 1.0) <= 1e-12


def test_vn_rejects_non_nilpotent(lam_a, torus4):
    C, X = torus4
    with pytest.raises(KernelError):
        vn_check(RowTuple(lam_a, ((C,), (X,))), StarPolynomial.identity(lam_a))


def test_rescale_identity_and_sign(lam_a):
    rng = rng_for(10)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    z1 = {(1, 1): Phase(0, 4), (2, 1): Phase(0, 4)}
    assert all(
        np.array_equal(rescale_tuple(T, z1).op(i, 1), T.op(i, 1)) for i in (1, 2)
    )
    z2 = {(1, 1): Phase(2, 4), (2, 1): Phase(0, 4)}
    assert np.array_equal(rescale_tuple(T, z2).op(1, 1), -T.op(1, 1))


def test_rescale_invariance(lam_a):
    rng = rng_for(12)
    for _ in range(5):
        T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
        f = random_polynomial(lam_a, rng, 2, 3)
        z = {(1, 1): Phase(int(rng.integers(4)), 4),
             (2, 1): Phase(int(rng.integers(4)), 4)}
        assert rescale_invariance_residual(T, z, f) <= 1e-10


def test_rescale_requires_phase(lam_a):
    T = zero_tuple(lam_a)
    with pytest.raises(KernelError):
        rescale_tuple(T, {(1, 1): 0.5, (2, 1): Phase(0, 4)})


def test_dilation_of_zero_tuple(lam_a):
    rec = minimal_dilation(zero_tuple(lam_a))
    assert rec.model.D == 0 and rec.defect_dim == 1
    assert rec.span_rank == rec.span_rank_expected == 1
    assert rec.compression_residual <= 1e-14


def test_dilation_of_jordan_is_shift():
    rec = minimal_dilation(jordan2())
    assert rec.model.D == 1 and rec.defect_dim == 1
    assert rec.span_rank == rec.span_rank_expected == 2
    ((_, V),) = ((key, mat) for key, mat in rec.isometry_ops())
    assert np.array_equal(V, np.array([[0, 0], [1, 0]], dtype=complex))


def test_dilation_rejects_torus(lam_a, torus4):
    C, X = torus4
    with pytest.raises(KernelError):
        minimal_dilation(RowTuple(lam_a, ((C,), (X,))))


def test_dilation_span_fills_truncation(lam_a):
    rng = rng_for(21)
    for _ in range(5):
        T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
        rec = minimal_dilation(T)
        assert rec.span_rank == rec.span_rank_expected


def test_moment_zero_vector_gives_identity(lam_a):
    rng = rng_for(23)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    rep = moment_check(T, 0)
    assert set(rep.residuals) == {(0, 0)}
    assert rep.max_residual <= 1e-13


def test_moment_single_creator_is_exact():
    lam = validate_lambda(2, (1, 1), [])  # untwisted commuting pair
    rng = rng_for(29)
    T = random_nilpotent_member(lam, rng, degree=2, dim_cap=6)
    rep = moment_check(T, 1)
    assert rep.residuals[(-1, 0)] <= 1e-13  # compression of V1 returns T1


def test_moment_mixed_residual(lam_a):
    rng = rng_for(31)
    T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
    rep = moment_check(T, 3)
    assert rep.max_residual <= 1e-9
    assert (1, -1) in rep.residuals


def test_moment_rejects_higher_arity(lam_b):
    with pytest.raises(KernelError):
        moment_check(zero_tuple(lam_b), 1)


def test_series_identity_for_nilpotent_members(lam_a):
    from polyball_lab.suites import _series_identity_residual

    rng = rng_for(37)
    for _ in range(5):
        T = random_nilpotent_member(lam_a, rng, degree=2, dim_cap=6)
        assert _series_identity_residual(T) <= 1e-10


def test_nilpotency_degree_detection(lam_a):
    assert joint_nilpotency_degree(zero_tuple(lam_a)) == 0
    assert joint_nilpotency_degree(jordan2()) == 1
    C, X = torus_pair(4)
    assert joint_nilpotency_degree(RowTuple(lam_a, ((C,), (X,))), cap=6) is None
