import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from conftest import ALL_CLASSES, random_z
from kelvinlie.classes import build_eigvecs, build_full, check_reduced_form
from kelvinlie.errors import ValidationError
from kelvinlie.lie import log_rotation
from kelvinlie.stochastic import (
    GenConfig, cov_factor, ensemble_mean_symmetry_check, ordered_moduli, point_transform,
    random_kelvin, sample_ordered_moduli, sample_params, standard_normals,
)


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_zero_cov_reproduces_build(cls, rng):
    z0 = random_z(rng, cls, 0.5)
    batch = random_kelvin(GenConfig(cls, z0, 0.0, seed=3), 3)
    C, _ = build_full(cls, z0)
    for M in batch.matrices:
        assert np.array_equal(M, C)


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_members_conform(cls, rng):
    z0 = random_z(rng, cls, 0.5)
    batch = random_kelvin(GenConfig(cls, z0, 0.1 ** 2, seed=11), 20)
    for t in batch.triples:
        assert np.all(np.linalg.eigvalsh(t.matrix()) > 0)
        ok, viol = check_reduced_form(t.reduced(), cls)
        assert ok, viol


def test_iso_eigenvalues():
    b = random_kelvin(GenConfig("iso_3d", [np.log(3), np.log(2)], 0.0), 1)
    assert np.allclose(np.linalg.eigvalsh(b.matrices[0]), [2, 2, 2, 2, 2, 3])


def test_marginals():
    n = 12
    rng = np.random.default_rng(5)
    A = rng.normal(size=(n, n)) * 0.1
    cov = A @ A.T + 0.01 * np.eye(n)
    cfg = GenConfig("ortho_3d", np.zeros(n), cov, seed=99)
    Z = sample_params(cfg, 100_000)
    assert np.max(np.abs(Z.mean(axis=0))) < 0.02
    assert np.max(np.abs(Z.var(axis=0) / np.diag(cov) - 1)) < 0.03
    emp = np.cov(Z.T)
    assert np.max(np.abs(emp - cov)) < 0.05 * np.max(np.abs(cov))


def test_seed_repeatability_and_workers():
    cfg = GenConfig("monoclinic_3d", np.zeros(15), 0.05 ** 2, seed=2024)
    a = random_kelvin(cfg, 600)
    b = random_kelvin(cfg, 600, workers=4)
    assert np.array_equal(a.matrices, b.matrices) and np.array_equal(a.params, b.params)
    c = random_kelvin(GenConfig("monoclinic_3d", np.zeros(15), 0.05 ** 2, seed=2025), 10)
    assert not np.array_equal(a.matrices[:10], c.matrices)


def test_sample_index_independent_of_batching():
    full = standard_normals(7, 0, 700, 4)
    part = standard_normals(7, 300, 350, 4)
    assert np.array_equal(full[300:650], part)


def test_ordered_moduli():
    tau = np.log([1.0, 1.0, 1.0, 1.0])
    assert np.allclose(ordered_moduli(0.0, tau), [5, 4, 3, 2, 1])
    rng = np.random.default_rng(1)
    lam = sample_ordered_moduli(0.0, np.zeros(5), rng.normal(size=(10_000, 6)) * 2)
    assert np.all(np.diff(lam, axis=1) < 0)


def test_ordering_in_generator():
    cfg = GenConfig("ortho_3d", np.zeros(12), 0.5, ordering=True, seed=4)
    for t in random_kelvin(cfg, 200).triples:
        assert np.all(np.diff(t.lam) < 0)


def test_cov_factor_psd_and_invalid():
    cov = np.diag([1.0, 0.0, 4.0])
    L = cov_factor(cov)
    assert np.allclose(L @ L.T, cov)
    with pytest.raises(ValidationError, match="semidefinite"):
        cov_factor(np.diag([1.0, -1.0]))
    with pytest.raises(ValidationError, match="symmetric"):
        GenConfig("iso_3d", [0, 0], [[1, 0.5], [0, 1]])
    with pytest.raises(ValidationError, match="z0"):
        GenConfig("iso_3d", [0, 0, 0], 0.0)


def test_point_transform_lognormal_to_gamma():
    target = stats.gamma(a=4.0, scale=5.0)
    tr = point_transform(target, 0.0, 1.0)
    x = np.random.default_rng(0).normal(size=200_000)
    y = np.exp(tr(x))
    assert y.mean() == pytest.approx(target.mean(), rel=0.01)
    assert y.var() == pytest.approx(target.var(), rel=0.03)
    with pytest.raises(ValidationError):
        point_transform(target, 0.0, 0.0)


def test_config_dict_roundtrip_and_hash():
    d = {"class": "tetra_3d", "z0": {"q": [0.1, 0, 0], "p": [0.2], "mu": [1, 2, 3, 4, 5]},
         "sigma": 0.1, "seed": 8}
    cfg = GenConfig.from_dict(d)
    assert cfg.z0.tolist() == [0.1, 0, 0, 0.2, 1, 2, 3, 4, 5]
    assert np.allclose(cfg.cov, 0.01 * np.eye(9))
    again = GenConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again.hash() == cfg.hash()
    assert GenConfig.from_dict({**d, "seed": 9}).hash() != cfg.hash()
    with pytest.raises(ValidationError, match="class"):
        GenConfig.from_dict({"z0": [0]})
    with pytest.raises(ValidationError, match="z0.p"):
        GenConfig.from_dict({"class": "tetra_3d", "z0": {"p": [1, 2]}})


def test_batch_writers():
    b = random_kelvin(GenConfig("cubic_3d", [0, 0, 0, 1, 2, 3], 0.01, seed=1), 3)
    buf = io.StringIO()
    b.to_jsonl(buf)
    recs = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert [r["index"] for r in recs] == [0, 1, 2]
    assert np.allclose(recs[1]["kelvin"], b.matrices[1])
    buf = io.StringIO()
    b.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# class cubic_3d") and len(lines) == 5


def _tetra_point_in_ortho():
    U = build_eigvecs("tetra_3d", [0.3])[:3, :3]
    S = log_rotation(U)
    p0 = [S[2, 1], S[0, 2], S[1, 0]]
    assert np.allclose(build_eigvecs("ortho_3d", p0)[:3, :3], U)
    return np.concatenate([[0.2, -0.1, 0.3], p0, [3.0, 2.5, 2.0, 1.5, 1.5, 1.0]])


def test_mean_symmetry_residual_shrinks():
    z0 = _tetra_point_in_ortho()
    viol = []
    for count in (100, 1600):
        b = random_kelvin(GenConfig("ortho_3d", z0, 0.05 ** 2, seed=17), count)
        rep = ensemble_mean_symmetry_check(b, "tetra_3d")
        assert rep.passed, rep
        viol.append(rep.mean_violation)
    assert viol[1] < viol[0]


def test_mean_symmetry_hasse_violation():
    b = random_kelvin(GenConfig("tetra_3d", np.zeros(9), 0.01, seed=1), 5)
    with pytest.raises(ValidationError, match="stronger"):
        ensemble_mean_symmetry_check(b, "ortho_3d")


@given(seed=st.integers(0, 2 ** 64 - 1), start=st.integers(0, 1000))
def test_standard_normals_prefix_property(seed, start):
    a = standard_normals(seed, start, 5, 3)
    b = standard_normals(seed, start, 9, 3)
    assert np.array_equal(a, b[:5])
