import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma, kv

from conftest import random_z
from kelvinlie.classes import build_full, check_reduced_form
from kelvinlie.errors import ValidationError
from kelvinlie.field import (
    FieldSpec, Grid1D, MaternCov, interpolate_field, kl_decompose, kl_project, lag_correlation,
    matern_bessel, matern_cov, sample_param_field, sample_random_field, weighted_norm,
)


def test_matern_closed_forms():
    m = MaternCov(0.5, 0.2, 2.0)
    assert m(0.0) == pytest.approx(2.0)
    assert m(0.2) == pytest.approx(2.0 * np.exp(-1))
    h = np.linspace(0, 1, 51)
    for nu in (0.5, 1.5, 2.5):
        mc = MaternCov(nu, 0.3, 1.0)
        a = np.sqrt(2 * nu) * h[1:] / 0.3
        oracle = 2 ** (1 - nu) / gamma(nu) * a ** nu * kv(nu, a)
        assert np.allclose(mc(h[1:]), oracle, atol=1e-12)
        assert np.allclose(mc(h), matern_bessel(h / 0.3, nu), atol=1e-12)
        assert np.all(np.diff(mc(h)) < 0)
    # non half-integer smoothness goes through the Bessel form
    assert MaternCov(1.0, 0.3, 1.0)(0.0) == pytest.approx(1.0)
    assert np.all(np.diff(MaternCov(1.0, 0.3, 1.0)(h)) < 0)


def test_matern_validation():
    with pytest.raises(ValidationError):
        MaternCov(0.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        matern_cov(-1.0, MaternCov(0.5, 1.0, 1.0))


def test_grid_validation():
    g = Grid1D.uniform(5)
    assert g.weights.sum() == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        Grid1D(np.array([0.0]))
    with pytest.raises(ValidationError):
        Grid1D(np.array([0.0, 0.5, 0.4]))
    with pytest.raises(ValidationError):
        Grid1D(np.array([0.0, 1.5]))


def test_kl_rank_one_kernel():
    g = Grid1D.uniform(21)
    kl = kl_decompose(g, lambda h: np.ones_like(h))
    assert kl.eigenvalues[0] == pytest.approx(1.0)
    assert np.allclose(kl.eigenvalues[1:], 0, atol=1e-12)
    assert kl.rank95 == 1


@pytest.mark.parametrize("points", [Grid1D.uniform(41).points,
                                    np.sort(np.r_[0, 1, np.random.default_rng(3).random(30)])])
def test_kl_reconstruction_and_truncation(points):
    g = Grid1D(points)
    m = MaternCov(1.5, 0.2, 1.0)
    kl = kl_decompose(g, m)
    K = m.matrix(g)
    assert np.allclose(kl.reconstruct(), K, atol=1e-10)
    W = g.weights
    assert np.allclose(kl.vectors.T @ (W[:, None] * kl.vectors), np.eye(len(g)), atol=1e-10)
    for r in (1, 3, 8):
        err = weighted_norm(K - kl.reconstruct(r), g)
        assert err == pytest.approx(kl.truncation_error(r), rel=1e-8, abs=1e-12)
    c = np.cumsum(kl.eigenvalues) / kl.eigenvalues.sum()
    assert c[kl.rank95 - 1] >= 0.95 and (kl.rank95 == 1 or c[kl.rank95 - 2] < 0.95)


def test_kl_not_psd():
    g = Grid1D.uniform(3)
    with pytest.raises(ValidationError, match="semidefinite"):
        kl_decompose(g, np.array([[1.0, 2, 0], [2, 1, 0], [0, 0, 1]]))
    with pytest.raises(ValidationError, match="3x3"):
        kl_decompose(g, np.eye(2))


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_kl_project_roundtrip(seed):
    g = Grid1D.uniform(30)
    kl = kl_decompose(g, MaternCov(2.5, 0.3, 1.0))
    r = 5
    zeta = np.random.default_rng(seed).normal(size=r)
    f = 1.5 + kl.vectors[:, :r] @ (kl.scalings[:r] * zeta)
    assert np.allclose(kl_project(f, kl, 1.5, r), zeta, atol=1e-8)


def test_zero_cov_field_is_constant(rng):
    g = Grid1D.uniform(11)
    z0 = random_z(rng, "ortho_3d", 0.4)
    fs = sample_random_field("ortho_3d", z0, FieldSpec(MaternCov(0.5, 0.2, 1.0), 0.0), g, 1, 2)
    C, _ = build_full("ortho_3d", z0)
    for f in fs:
        assert np.allclose(f.matrices, C, atol=1e-14)


def test_interpolate_field(rng):
    g = Grid1D.uniform(9)
    a, b = (build_full("tetra_3d", random_z(rng, "tetra_3d"))[1] for _ in range(2))
    f = interpolate_field(a, b, g, "product")
    assert np.allclose(f.matrices[0], a.matrix()) and np.allclose(f.matrices[-1], b.matrix())
    logdet = np.log(f.det)
    assert np.allclose(np.diff(logdet, 2), 0, atol=1e-9)  # log det is linear in x
    buf = io.StringIO()
    f.to_csv(buf)
    head = buf.getvalue().splitlines()[1].split(",")
    assert head[:3] == ["x", "det", "lam1"] and len(head) == 2 + 6 + 21


def test_field_variance_and_correlation():
    g = Grid1D.uniform(51)
    ell = 0.2
    spec = FieldSpec(MaternCov(0.5, ell, 1.0), np.diag([0.04, 0.01]))
    Z = sample_param_field("iso_3d", [1.0, 0.5], spec, g, seed=5, count=4000)
    assert np.mean(Z[:, :, 0].var(axis=0)) / 0.04 == pytest.approx(1.0, abs=0.05)
    assert np.mean(Z[:, :, 1].var(axis=0)) / 0.01 == pytest.approx(1.0, abs=0.05)
    assert lag_correlation(Z[:, :, 0], g, ell) == pytest.approx(np.exp(-1), abs=0.03)
    with pytest.raises(ValidationError):
        lag_correlation(Z[:, :, 0], g, 0.013)


def test_param_field_batching_is_stable():
    g = Grid1D.uniform(7)
    spec = FieldSpec(MaternCov(1.5, 0.3, 1.0), 0.01, rank=4)
    a = sample_param_field("cubic_3d", np.zeros(6), spec, g, seed=9, count=5)
    b = sample_param_field("cubic_3d", np.zeros(6), spec, g, seed=9, count=2, start=3)
    assert np.array_equal(a[3:], b)
    with pytest.raises(ValidationError, match="rank"):
        sample_param_field("cubic_3d", np.zeros(6), FieldSpec(spec.kernel, 0.01, 99), g, 9, 1)


def test_random_fields_conform(rng):
    g = Grid1D.uniform(15)
    z0 = random_z(rng, "trigonal_3d", 0.3)
    fs = sample_random_field("trigonal_3d", z0, FieldSpec(MaternCov(1.5, 0.3, 1.0), 0.05), g, 4, 3)
    for f in fs:
        for t in f.triples:
            assert np.all(np.linalg.eigvalsh(t.matrix()) > 0)
            assert check_reduced_form(t.reduced(), "trigonal_3d")[0]
