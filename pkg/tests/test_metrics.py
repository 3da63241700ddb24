import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_rotation, random_spd, random_z
from kelvinlie.classes import LieTriple, build_full
from kelvinlie.errors import BranchError, ValidationError
from kelvinlie.lie import exp_so3, expm_skew, Trep
from kelvinlie.metrics import (
    MetricWeights, dist_euclid, dist_log_euclid, dist_logdiag, dist_product,
    dist_product_canonical, dist_rot, distance, geodesic, interpolate, normalize_kind,
    triple_geodesic,
)

seeds = st.integers(0, 2 ** 32 - 1)


def triple(rng, cls="ortho_3d", scale=0.5):
    return build_full(cls, random_z(rng, cls, scale))[1]


def test_euclid_examples():
    assert dist_euclid(np.eye(6), np.eye(6)) == 0
    assert dist_euclid(np.eye(6), 2 * np.eye(6)) == pytest.approx(np.sqrt(6))
    with pytest.raises(ValidationError, match="dimension"):
        dist_euclid(np.eye(6), np.eye(3))


def test_euclid_triangle(rng):
    for _ in range(200):
        A, B, C = (random_spd(rng, 6) for _ in range(3))
        assert dist_euclid(A, C) <= dist_euclid(A, B) + dist_euclid(B, C) + 1e-12


def test_dist_rot_axis_angle():
    for th in (0.1, 1.0, 3.0):
        assert dist_rot(np.eye(3), exp_so3([0, 0, th])) == pytest.approx(th * np.sqrt(2), rel=1e-12)
    with pytest.raises(BranchError):
        dist_rot(np.eye(3), exp_so3([0, 0, np.pi]))


@given(seed=seeds)
def test_dist_rot_bi_invariant(seed):
    rng = np.random.default_rng(seed)
    Q1, Q2 = expm_skew(rng.normal(size=(6, 6)) * 0.2 * np.triu(np.ones((6, 6)), 1) * 1), np.eye(6)
    Q1 = expm_skew(0.5 * (Q1 - Q1.T))
    Q2 = expm_skew((lambda a: 0.3 * (a - a.T))(rng.normal(size=(6, 6))))
    d = dist_rot(Q1, Q2)
    W = random_rotation(rng, 6)
    assert dist_rot(W @ Q1, W @ Q2) == pytest.approx(d, abs=1e-10)
    assert dist_rot(Q1 @ W, Q2 @ W) == pytest.approx(d, abs=1e-10)


def test_logdiag_examples():
    L = np.array([2.0, 3, 4, 5, 6, 7])
    assert dist_logdiag(L, L) == 0
    assert dist_logdiag(np.ones(6), np.full(6, np.e)) == pytest.approx(np.sqrt(6))
    a = np.ones(6)
    a[0] = 2
    b = np.ones(6)
    b[0] = 8
    assert dist_logdiag(a, b) == pytest.approx(np.log(4))
    assert dist_logdiag(np.diag(a), np.diag(b)) == pytest.approx(np.log(4))
    with pytest.raises(ValidationError):
        dist_logdiag(a, -b)


@given(seed=seeds, alpha=st.floats(0.01, 100.0))
def test_logdiag_scaling_and_inversion(seed, alpha):
    rng = np.random.default_rng(seed)
    a, b = np.exp(rng.normal(size=6)), np.exp(rng.normal(size=6))
    d = dist_logdiag(a, b)
    assert dist_logdiag(alpha * a, alpha * b) == pytest.approx(d, abs=1e-12)
    assert dist_logdiag(1 / a, 1 / b) == pytest.approx(d, abs=1e-12)


def test_product_examples(rng):
    t1 = triple(rng)
    assert dist_product(t1, t1) == 0
    t2 = LieTriple(t1.Q, t1.V, t1.lam * np.exp(rng.normal(size=6)))
    assert dist_product(t1, t2) == pytest.approx(dist_logdiag(t1.lam, t2.lam))
    t3 = LieTriple(exp_so3([0, np.pi / 3, 0]) @ t1.Q, t1.V, t1.lam)
    assert dist_product(t1, t3) == pytest.approx(np.pi / 3 * np.sqrt(2), rel=1e-12)
    w = MetricWeights(4.0, 1.0)
    assert dist_product(t1, t3, w) == pytest.approx(2 * np.pi / 3 * np.sqrt(2), rel=1e-12)


def test_weights_must_be_positive():
    with pytest.raises(ValidationError):
        MetricWeights(0.0, 1.0)


@given(seed=seeds)
def test_product_desiderata(seed):
    rng = np.random.default_rng(seed)
    t1, t2 = triple(rng, "trigonal_3d"), triple(rng, "trigonal_3d")
    d = dist_product(t1, t2)
    assert dist_product(t1.scaled(3.7), t2.scaled(3.7)) == pytest.approx(d, abs=1e-10)
    assert dist_product(t1.inverse(), t2.inverse()) == pytest.approx(d, abs=1e-10)
    W = random_rotation(rng, 3)
    assert dist_product(t1.conjugated(W), t2.conjugated(W)) == pytest.approx(d, abs=1e-10)
    # the conjugated triple represents the conjugated matrix
    T = Trep(W)
    assert np.allclose(t1.conjugated(W).matrix(), T @ t1.matrix() @ T.T)


def test_euclid_fails_inversion_and_scaling():
    A = np.diag([1.0, 1, 1, 1, 1, 1])
    B = np.diag([4.0, 1, 1, 1, 1, 1])
    d = dist_euclid(A, B)
    assert abs(dist_euclid(np.linalg.inv(A), np.linalg.inv(B)) - d) > 1e-3
    assert dist_euclid(2 * A, 2 * B) == pytest.approx(2 * d)
    assert dist_log_euclid(np.linalg.inv(A), np.linalg.inv(B)) == pytest.approx(dist_log_euclid(A, B))


def test_canonical_sign_flip(rng):
    t1 = triple(rng)
    V = t1.V.copy()
    V[:, 0] *= -1
    V[:, 1] *= -1
    assert dist_product_canonical(t1, LieTriple(t1.Q, V, t1.lam)) == pytest.approx(0, abs=1e-12)
    # two flipped columns are a half-turn in V: no unique geodesic without canonicalisation
    with pytest.raises(BranchError):
        dist_product(t1, LieTriple(t1.Q, V, t1.lam))


def test_canonical_degenerate_swap(rng):
    t1 = triple(rng, "iso_3d")
    V = t1.V[:, [0, 2, 1, 3, 4, 5]]
    V[:, 1] *= -1  # keep det +1
    t2 = LieTriple(t1.Q, V, t1.lam)
    assert dist_product(t1, t2) > 1.0
    assert dist_product_canonical(t1, t2) == pytest.approx(0, abs=1e-12)


def test_canonical_brute_force(rng):
    import itertools

    t1, t2 = triple(rng, scale=0.3), triple(rng, scale=0.3)
    best = np.inf
    for signs in itertools.product((1.0, -1.0), repeat=6):
        V = t2.V * np.array(signs)
        if np.linalg.det(V) > 0:
            try:
                best = min(best, dist_product(t1, LieTriple(t2.Q, V, t2.lam)))
            except BranchError:
                pass
    assert dist_product_canonical(t1, t2) == pytest.approx(best, rel=1e-12)


def test_geodesic_endpoints(rng):
    t1, t2 = triple(rng), triple(rng)
    for kind in ("euclid", "product", "log_euclid"):
        assert np.allclose(geodesic(t1, t2, kind, 0.0), t1.matrix(), atol=1e-10)
        assert np.allclose(geodesic(t1, t2, kind, 1.0), t2.matrix(), atol=1e-10)
    with pytest.raises(ValidationError):
        geodesic(t1, t2, "product", 1.5)
    with pytest.raises(ValidationError, match="unknown"):
        geodesic(t1, t2, "affine", 0.5)
    with pytest.raises(ValidationError, match="LieTriple"):
        geodesic(t1.matrix(), t2.matrix(), "product", 0.5)


def test_geodesic_lambda_only(rng):
    t1 = triple(rng)
    t2 = LieTriple(t1.Q, t1.V, t1.lam * np.exp(rng.normal(size=6)))
    mid = triple_geodesic(t1, t2, 0.5)
    assert np.allclose(mid.lam, np.sqrt(t1.lam * t2.lam))


@given(seed=seeds, t=st.floats(0.0, 1.0))
def test_product_geodesic_is_constant_speed(seed, t):
    rng = np.random.default_rng(seed)
    t1, t2 = triple(rng), triple(rng)
    p = triple_geodesic(t1, t2, t)
    assert dist_rot(t1.Q, p.Q) == pytest.approx(t * dist_rot(t1.Q, t2.Q), abs=1e-9)
    assert dist_rot(t1.V, p.V) == pytest.approx(t * dist_rot(t1.V, t2.V), abs=1e-9)
    assert dist_logdiag(t1.lam, p.lam) == pytest.approx(t * dist_logdiag(t1.lam, t2.lam), abs=1e-9)


def test_rotation_only_path_keeps_det(rng):
    t1 = triple(rng)
    t2 = LieTriple(random_rotation(rng, 3) @ exp_so3([0.1, 0.2, 0.3]), t1.V @ expm_skew(
        (lambda a: 0.2 * (a - a.T))(rng.normal(size=(6, 6)))), t1.lam)
    path = interpolate(t1, t2, "product", np.linspace(0, 1, 11))
    d = path.det
    assert np.max(np.abs(d - d[0])) / d[0] < 1e-10
    assert path.spd_ok


def test_interpolation_path_validation(rng):
    t1, t2 = triple(rng), triple(rng)
    with pytest.raises(ValidationError, match="increasing"):
        interpolate(t1, t2, "euclid", [0.0, 0.5, 0.5])
    with pytest.raises(ValidationError):
        interpolate(t1, t2, "euclid", [-0.1, 0.5])


def test_path_csv(rng):
    t1, t2 = triple(rng), triple(rng)
    buf = io.StringIO()
    interpolate(t1, t2, "product", [0.0, 0.5, 1.0]).to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# units")
    assert lines[1].split(",")[:4] == ["t", "det", "C11", "C12"]
    assert len(lines[1].split(",")) == 2 + 21 and len(lines) == 5


def test_kind_aliases():
    assert normalize_kind("Euclidean") == "euclid"
    assert normalize_kind("log_euclidean") == "log_euclid"
    assert distance(np.eye(3), 2 * np.eye(3), "euclidean") == pytest.approx(np.sqrt(3))
