import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ALL_CLASSES, random_rotation, random_z
from kelvinlie.classes import (
    CLASS_SPECS, SC, LieTriple, TRIGONAL_ALPHA0, build_eigvecs, build_full, build_moduli,
    build_reduced, canonical_frame, check_reduced_form, class_spec, hasse_parents, is_weaker_or_equal,
    moduli_params, parse_class, reduced_triple, spatial_params, spatial_rotation, subgroup_classes,
    supergroup_classes, symmetry_generators, triple_from_reduced,
)
from kelvinlie.errors import ValidationError
from kelvinlie.kelvin import check_spd, special_basis
from kelvinlie.lie import Trep, exp_so3

COUNTS = {
    "triclinic_2d": 6, "ortho_2d": 5, "tetra_2d": 4, "iso_2d": 2,
    "triclinic_3d": 21, "monoclinic_3d": 15, "ortho_3d": 12, "trigonal_3d": 9,
    "tetra_3d": 9, "cubic_3d": 6, "trans_iso_3d": 7, "iso_3d": 2,
}
seeds = st.integers(0, 2 ** 32 - 1)


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_parameter_counts(cls):
    s = class_spec(cls)
    assert s.n == COUNTS[cls]
    assert s.m_L == len(set(s.layout))


def test_parse_class_errors():
    assert parse_class(" ISO_3D ") == SC.ISO_3D
    with pytest.raises(ValidationError, match="unknown symmetry class"):
        parse_class("hexagonal")


@pytest.mark.parametrize("cls", ALL_CLASSES)
@given(seed=seeds)
def test_reduced_form_holds(cls, seed):
    rng = np.random.default_rng(seed)
    s = class_spec(cls)
    _, p, mu = s.split(random_z(rng, cls, 0.8))
    C = build_reduced(cls, mu, p)
    ok, viol = check_reduced_form(C, cls)
    assert ok, viol


@pytest.mark.parametrize("cls", ALL_CLASSES)
@given(seed=seeds)
def test_build_full_conjugates_back(cls, seed):
    rng = np.random.default_rng(seed)
    C, t = build_full(cls, random_z(rng, cls, 0.8))
    check_spd(C)
    T = t.Qk
    assert check_reduced_form(T @ C @ T.T, cls)[0]
    assert np.allclose(t.matrix(), C)


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_eigvecs_in_special_orthogonal(cls, rng):
    s = class_spec(cls)
    for _ in range(5):
        V = build_eigvecs(cls, rng.normal(size=s.m_V))
        assert np.allclose(V @ V.T, np.eye(s.k), atol=1e-13)
        assert np.isclose(np.linalg.det(V), 1.0)


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_eigenvalues_are_moduli(cls, rng):
    s = class_spec(cls)
    _, p, mu = s.split(random_z(rng, cls))
    C = build_reduced(cls, mu, p)
    assert np.allclose(np.sort(np.linalg.eigvalsh(C)), np.sort(build_moduli(cls, mu)))


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_symmetry_generators_commute(cls, rng):
    s = class_spec(cls)
    for _ in range(10):
        _, p, mu = s.split(random_z(rng, cls, 0.8))
        C = build_reduced(cls, mu, p)
        for W in symmetry_generators(cls):
            assert np.linalg.norm(C @ W - W @ C) <= 1e-9 * np.linalg.norm(C)


def test_generators_detect_lower_symmetry(rng):
    # a generic orthotropic matrix is not invariant under the tetragonal quarter turn
    C = build_reduced("ortho_3d", [1.0, 0.5, 0.2, 0.1, 0.3, 0.0], [0.2, 0.1, 0.3])
    W = symmetry_generators("tetra_3d")[0]
    assert np.linalg.norm(C @ W - W @ C) > 1e-3 * np.linalg.norm(C)


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_hasse_monotone(cls, rng):
    """A member of a class also belongs to every weaker class."""
    s = class_spec(cls)
    for _ in range(5):
        _, p, mu = s.split(random_z(rng, cls, 0.8))
        C = build_reduced(cls, mu, p)
        for weak in subgroup_classes(cls):
            ok, viol = check_reduced_form(C, weak, reduce=True)
            assert ok, (weak, viol)


def test_hasse_structure():
    assert set(hasse_parents("tetra_3d")) == {SC.CUBIC_3D, SC.TRANS_ISO_3D}
    assert supergroup_classes("triclinic_3d") == {c for c in SC if class_spec(c).dim == 3} - {SC.TRICLINIC_3D}
    assert is_weaker_or_equal("ortho_3d", "iso_3d")
    assert not is_weaker_or_equal("cubic_3d", "trans_iso_3d")
    assert supergroup_classes("iso_2d") == set()


def test_counts_decrease_up_the_hasse_diagram():
    for c in CLASS_SPECS:
        for p in hasse_parents(c):
            assert class_spec(p).n < class_spec(c).n


def test_trigonal_offset_gives_n_and_z():
    n, _, z = special_basis(3)
    V = build_eigvecs("trigonal_3d", [0.0, 0.4])
    assert np.allclose(V[:, 0], n) and np.allclose(V[:, 1], z)
    assert TRIGONAL_ALPHA0 == pytest.approx(np.arctan(1 / np.sqrt(2)))


def test_isotropic_eigenstructure():
    C, _ = build_full("iso_3d", [np.log(3.0), np.log(2.0)])
    assert np.allclose(np.sort(np.linalg.eigvalsh(C)), [2, 2, 2, 2, 2, 3])
    n = special_basis(3)[0]
    assert np.allclose(C @ n, 3 * n)


@pytest.mark.parametrize("cls", ["triclinic_2d", "triclinic_3d", "monoclinic_3d"])
def test_canonical_frame_reduces_rotated_matrix(cls, rng):
    s = class_spec(cls)
    for _ in range(10):
        _, p, mu = s.split(random_z(rng, cls, 0.8))
        C = build_reduced(cls, mu, p)
        if cls == "monoclinic_3d":
            # the monoclinic frame only fixes the rotation about the 1-axis
            W = exp_so3([rng.uniform(-1, 1), 0.0, 0.0])
        else:
            W = random_rotation(rng, s.dim)
        T = Trep(W)
        D = T @ C @ T.T
        R = canonical_frame(D, cls)
        TR = Trep(R)
        assert check_reduced_form(TR @ D @ TR.T, cls)[0]


@pytest.mark.parametrize("cls", [c for c in ALL_CLASSES if class_spec(c).m_Q])
def test_spatial_params_roundtrip(cls, rng):
    q = rng.normal(size=class_spec(cls).m_Q) * 0.5
    assert np.allclose(spatial_params(cls, spatial_rotation(cls, q)), q)


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_moduli_params_roundtrip(cls, rng):
    mu = rng.normal(size=class_spec(cls).m_L)
    assert np.allclose(moduli_params(cls, build_moduli(cls, mu)), mu)


@pytest.mark.parametrize("cls", ALL_CLASSES)
def test_triple_from_reduced_recovers_matrix(cls, rng):
    s = class_spec(cls)
    _, p, mu = s.split(random_z(rng, cls))
    ref = reduced_triple(cls, mu, p)
    t = triple_from_reduced(ref.reduced(), cls, ref)
    assert np.allclose(t.reduced(), ref.reduced())
    assert np.isclose(np.linalg.det(t.V), 1.0)
    assert np.allclose(t.V, ref.V, atol=1e-7)


def test_triple_from_reduced_rejects_wrong_form(rng):
    C, _ = build_full("ortho_3d", rng.normal(size=12))
    with pytest.raises(ValidationError, match="reduced form"):
        triple_from_reduced(C, "iso_3d")


def test_lie_triple_validation():
    with pytest.raises(ValidationError, match="shapes"):
        LieTriple(np.eye(3), np.eye(3), np.ones(3))
    with pytest.raises(ValidationError, match="positive"):
        LieTriple(np.eye(3), np.eye(6), -np.ones(6))
    with pytest.raises(ValidationError, match="orthogonal"):
        LieTriple(np.eye(3), 2 * np.eye(6), np.ones(6))
    t = LieTriple(np.eye(3), np.eye(6), np.ones(6))
    with pytest.raises(ValueError):
        t.lam[0] = 2.0


def test_build_errors():
    with pytest.raises(ValidationError, match="length 12"):
        build_full("ortho_3d", np.zeros(5))
    with pytest.raises(ValidationError):
        build_moduli("iso_3d", [0.0, np.inf])
