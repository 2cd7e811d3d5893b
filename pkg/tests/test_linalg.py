"""Factorizations, support sets, tangent spaces, composed projector norms."""

import numpy as np
import pytest


from lrd.linalg import (SupportSet, TangentSpace, as_matrix,
                        composed_projector_norm, project_T, project_T_perp,
                        project_omega, schatten_r_sq, svd, svd_r)
from lrd.oracles import composed_norm_dense
from lrd.rng import Rng


def random_lowrank(rng, n1, n2, r):
    return rng.normals((n1, r)) @ rng.normals((r, n2))


# -- as_matrix / svd --------------------------------------------------------

def test_as_matrix_validates():
    with pytest.raises(ValueError):
        as_matrix(np.zeros(3))
    with pytest.raises(ValueError):
        as_matrix(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        as_matrix(np.array([[1.0, np.inf]]))
    out = as_matrix([[1, 2], [3, 4]])
    assert out.dtype == np.float64 and out.shape == (2, 2)


def test_svd_reconstructs_and_ranks():
    rng = Rng(0)
    m = random_lowrank(rng, 8, 6, 3)
    f = svd(m)
    assert np.allclose(f.reconstruct(), m, atol=1e-12)
    assert f.numeric_rank == 3
    assert f.sigma.shape == (6,)
    assert np.all(np.diff(f.sigma) <= 0)


def test_svd_rank_tol_cutoff():
    m = np.diag([1.0, 1e-3, 1e-14])
    assert svd(m).numeric_rank == 2           # default 1e-10 * sigma_1
    assert svd(m, rank_tol=1e-4).numeric_rank == 2
    assert svd(m, rank_tol=1e-2).numeric_rank == 1


def test_condition_number():
    f = svd(np.diag([4.0, 2.0]))
    assert f.condition_number == 2.0
    assert np.isnan(svd(np.zeros((3, 3))).condition_number)


def test_svd_r_is_best_approximation():
    rng = Rng(1)
    m = rng.normals((7, 5))
    for r in (1, 2, 5):
        xr = svd_r(m, r)
        sig = svd(m).sigma
        err = np.linalg.norm(m - xr)
        assert abs(err - np.sqrt(np.sum(sig[r:] ** 2))) < 1e-10
    assert svd_r(m, 5).shape == m.shape
    with pytest.raises(ValueError):
        svd_r(m, 0)
    with pytest.raises(ValueError):
        svd_r(m, 6)


def test_schatten_r_sq_matches_spectrum():
    rng = Rng(2)
    m = rng.normals((6, 9))
    sig = svd(m).sigma
    for r in (1, 3, 6):
        assert abs(schatten_r_sq(m, r) - np.sum(sig[:r] ** 2)) < 1e-12
    assert abs(schatten_r_sq(m, 6) - np.sum(m * m)) < 1e-10


# -- SupportSet --------------------------------------------------------------

def test_support_validation():
    with pytest.raises(ValueError):
        SupportSet(2, 2, np.array([0, 0]), np.array([1, 1]))   # duplicate
    with pytest.raises(ValueError):
        SupportSet(2, 2, np.array([1, 0]), np.array([0, 0]))   # unsorted
    with pytest.raises(ValueError):
        SupportSet(2, 2, np.array([2]), np.array([0]))         # out of range
    with pytest.raises(ValueError):
        SupportSet(0, 2, np.array([], dtype=int), np.array([], dtype=int))


def test_support_constructors_round_trip():
    mask = np.array([[True, False, True], [False, True, False]])
    s = SupportSet.from_mask(mask)
    assert s.m == 3 and s.density == 0.5
    assert np.array_equal(s.mask(), mask)
    assert np.array_equal(s.complement().mask(), ~mask)

    s2 = SupportSet.from_pairs(2, 3, [[1, 1], [0, 0], [0, 2]])
    assert np.array_equal(s2.mask(), mask)
    with pytest.raises(ValueError):
        SupportSet.from_pairs(2, 3, [[0, 0], [0, 0]])

    s3 = SupportSet.from_flat(2, 3, [4, 0, 2, 2])   # duplicates collapse
    assert np.array_equal(s3.mask(), mask)

    assert SupportSet.full(3, 4).m == 12


def test_project_omega():
    mask = np.array([[True, False], [False, True]])
    s = SupportSet.from_mask(mask)
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(project_omega(s, m), [[1.0, 0.0], [0.0, 4.0]])
    assert np.array_equal(project_omega(s, m, complement=True),
                          [[0.0, 2.0], [3.0, 0.0]])
    with pytest.raises(ValueError):
        project_omega(s, np.zeros((3, 3)))


# -- TangentSpace ------------------------------------------------------------

def test_tangent_space_from_matrix():
    rng = Rng(3)
    x = random_lowrank(rng, 9, 7, 2)
    t = TangentSpace.from_matrix(x, 2)
    assert t.r == 2
    assert t.dim == 2 * (9 + 7 - 2)
    assert np.allclose(project_T(t, x), x, atol=1e-10)
    with pytest.raises(ValueError):
        TangentSpace.from_matrix(x, 3)


def test_tangent_projector_identities():
    rng = Rng(4)
    x = random_lowrank(rng, 6, 8, 3)
    t = TangentSpace.from_matrix(x, 3)
    for _ in range(5):
        a = rng.normals((6, 8))
        b = rng.normals((6, 8))
        pa = project_T(t, a)
        # idempotent, self-adjoint, complementary
        assert np.allclose(project_T(t, pa), pa, atol=1e-12)
        assert abs(np.sum(pa * b) - np.sum(a * project_T(t, b))) < 1e-10
        assert np.allclose(pa + project_T_perp(t, a), a, atol=1e-12)
        assert abs(np.sum(pa * project_T_perp(t, a))) < 1e-10


def test_composed_projector_norm_matches_dense():
    rng = Rng(5)
    for trial in range(8):
        n1, n2 = 4 + rng.below(3), 4 + rng.below(3)
        r = 1 + rng.below(2)
        x = random_lowrank(rng.spawn(trial), n1, n2, r)
        t = TangentSpace.from_matrix(x, r)
        keep = rng.bernoulli(n1 * n2, 0.5)
        if not keep.any():
            keep[0] = True
        s = SupportSet.from_flat(n1, n2, np.nonzero(keep)[0])
        for which in ("omega", "omega_perp"):
            exact = composed_norm_dense(t, s, which=which)
            # the rayleigh estimate approaches the norm from below
            est = composed_projector_norm(t, s, which=which)
            assert est <= exact + 1e-9, (trial, which)
            deep = composed_projector_norm(t, s, which=which, iters=3000)
            assert est - 1e-9 <= deep <= exact + 1e-9
            assert abs(deep - exact) < 2e-4, (trial, which)
            if exact < 0.95:   # healthy eigengap regime
                assert abs(deep - exact) < 1e-8, (trial, which)


def test_composed_projector_norm_extremes():
    rng = Rng(6)
    x = random_lowrank(rng, 5, 5, 2)
    t = TangentSpace.from_matrix(x, 2)
    assert abs(composed_projector_norm(t, SupportSet.full(5, 5)) - 1.0) < 1e-8
    assert composed_projector_norm(t, SupportSet.full(5, 5),
                                   which="omega_perp") < 1e-8
    with pytest.raises(ValueError):
        composed_projector_norm(t, SupportSet.full(5, 5), which="nope")
