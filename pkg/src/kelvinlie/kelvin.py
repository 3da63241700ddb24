"""Kelvin notation for symmetric 2nd order tensors and elasticity tensors.

Component ordering (3D): 11, 22, 33, 23, 13, 12.  Shear components carry a
factor sqrt(2) so that the map t -> vrep(t) is an isometry between symmetric
tensors with the Frobenius product and R^k with the Euclidean product.
The same ordering is used for Voigt matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SQRT2 = np.sqrt(2.0)

# (i, j) index pairs of the Kelvin components
KELVIN_INDEX = {
    2: ((0, 0), (1, 1), (0, 1)),
    3: ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)),
}
KELVIN_DIM = {2: 3, 3: 6}
SPATIAL_DIM = {3: 2, 6: 3}

SYM_TOL = 1e-12
SPD_TOL = 1e-12


def _weights(d: int) -> np.ndarray:
    return np.array([1.0 if i == j else SQRT2 for i, j in KELVIN_INDEX[d]])


def spatial_dim(k: int) -> int:
    """Spatial dimension d belonging to a Kelvin dimension k."""
    try:
        return SPATIAL_DIM[k]
    except KeyError:
        raise ValidationError(f"Kelvin dimension must be 3 or 6, got {k}") from None


def kelvin_dim(d: int) -> int:
    """Kelvin dimension k = d(d+1)/2 for spatial dimension d in {2, 3}."""
    try:
        return KELVIN_DIM[d]
    except KeyError:
        raise ValidationError(f"spatial dimension must be 2 or 3, got {d}") from None


def vrep(t) -> np.ndarray:
    """Kelvin vector of a symmetric 2x2 or 3x3 tensor."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] not in (2, 3):
        raise ValidationError(f"expected a 2x2 or 3x3 tensor, got shape {t.shape}")
    asym = np.max(np.abs(t - t.T))
    if asym > SYM_TOL * max(1.0, np.max(np.abs(t))):
        raise ValidationError(f"tensor is not symmetric (max asymmetry {asym:.3e})")
    d = t.shape[0]
    idx = KELVIN_INDEX[d]
    return _weights(d) * np.array([t[i, j] for i, j in idx])


def vrep_inv(v) -> np.ndarray:
    """Symmetric tensor belonging to a Kelvin vector of length 3 or 6."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size not in (3, 6):
        raise ValidationError(f"Kelvin vector must have length 3 or 6, got shape {v.shape}")
    d = spatial_dim(v.size)
    c = v / _weights(d)
    t = np.zeros((d, d))
    for a, (i, j) in enumerate(KELVIN_INDEX[d]):
        t[i, j] = t[j, i] = c[a]
    return t


def special_basis(dim: int) -> tuple[np.ndarray, ...]:
    """Volumetric direction n and the deviatoric normal strains y (and z in 3D)."""
    if dim == 2:
        n = np.array([1.0, 1.0, 0.0]) / SQRT2
        y = np.array([-1.0, 1.0, 0.0]) / SQRT2
        return n, y
    if dim == 3:
        n = np.array([1.0, 1.0, 1.0, 0, 0, 0]) / np.sqrt(3.0)
        y = np.array([-1.0, 1.0, 0, 0, 0, 0]) / SQRT2
        z = np.array([1.0, 1.0, -2.0, 0, 0, 0]) / np.sqrt(6.0)
        return n, y, z
    raise ValidationError(f"dim must be 2 or 3, got {dim}")


def check_spd(C, name: str = "matrix") -> np.ndarray:
    """Validate a symmetric positive definite Kelvin matrix and return it as a copy.

    The smallest eigenvalue must exceed ``SPD_TOL * ||C||_2``.
    """
    C = np.array(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] not in (3, 6):
        raise ValidationError(f"{name}: expected a 3x3 or 6x6 matrix, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValidationError(f"{name}: non-finite entries")
    scale = np.max(np.abs(C))
    asym = np.max(np.abs(C - C.T))
    if asym > 1e-10 * max(scale, 1e-300):
        raise ValidationError(f"{name}: not symmetric (max asymmetry {asym:.3e})")
    C = 0.5 * (C + C.T)
    w = np.linalg.eigvalsh(C)
    if w[0] <= SPD_TOL * max(abs(w[-1]), abs(w[0])):
        raise ValidationError(
            f"{name}: not positive definite (smallest eigenvalue {w[0]:.6e}, largest {w[-1]:.6e})")
    return C


def kelvin_from_tensor(c) -> np.ndarray:
    """Kelvin matrix of a 4th order tensor c_ijkl with minor and major symmetries."""
    c = np.asarray(c, dtype=float)
    d = c.shape[0]
    idx = KELVIN_INDEX[d]
    w = _weights(d)
    k = len(idx)
    C = np.empty((k, k))
    for a, (i, j) in enumerate(idx):
        for b, (m, n) in enumerate(idx):
            C[a, b] = w[a] * w[b] * c[i, j, m, n]
    return C


def tensor_from_kelvin(C) -> np.ndarray:
    """4th order tensor c_ijkl with full minor symmetry from a Kelvin matrix."""
    C = np.asarray(C, dtype=float)
    d = spatial_dim(C.shape[0])
    idx = KELVIN_INDEX[d]
    w = _weights(d)
    c = np.zeros((d, d, d, d))
    for a, (i, j) in enumerate(idx):
        for b, (m, n) in enumerate(idx):
            val = C[a, b] / (w[a] * w[b])
            for p, q in {(i, j), (j, i)}:
                for r, s in {(m, n), (n, m)}:
                    c[p, q, r, s] = val
    return c


@dataclass(frozen=True)
class OrthotropicConstants:
    """Engineering constants of an orthotropic material (moduli in GPa)."""

    Y1: float
    Y2: float
    Y3: float
    nu21: float
    nu12: float
    nu31: float
    nu13: float
    nu32: float
    nu23: float
    G12: float
    G13: float
    G23: float

    def reciprocity_mismatch(self) -> float:
        """Largest relative deviation from nu_ij / Y_i = nu_ji / Y_j."""
        pairs = [(self.nu21 / self.Y2, self.nu12 / self.Y1),
                 (self.nu31 / self.Y3, self.nu13 / self.Y1),
                 (self.nu32 / self.Y3, self.nu23 / self.Y2)]
        return max(abs(a - b) / max(abs(a), abs(b), 1e-300) for a, b in pairs)


# cortical femoral bone, averaged over 60 specimens (Ashman et al. 1984)
BONE = OrthotropicConstants(
    Y1=12.0, Y2=13.4, Y3=20.0,
    nu21=0.422, nu12=0.376, nu31=0.371, nu13=0.222, nu32=0.35, nu23=0.235,
    G12=4.53, G13=5.61, G23=6.23,
)


def compliance_from_orthotropic(c: OrthotropicConstants, symmetrize: str = "upper") -> np.ndarray:
    """Voigt compliance matrix (GPa^-1) of an orthotropic material.

    Off-diagonal normal terms follow S_ij = -nu_ji / Y_j.  Measured constants
    rarely satisfy reciprocity exactly, so the matrix is made symmetric either
    from the upper triangle (``"upper"``, uses nu21, nu31, nu32) or by
    averaging both placements (``"average"``).
    """
    moduli = (c.Y1, c.Y2, c.Y3, c.G12, c.G13, c.G23)
    if min(moduli) <= 0:
        raise ValidationError(f"moduli must be positive, got {moduli}")
    Y = (c.Y1, c.Y2, c.Y3)
    nu = {(2, 1): c.nu21, (1, 2): c.nu12, (3, 1): c.nu31,
          (1, 3): c.nu13, (3, 2): c.nu32, (2, 3): c.nu23}
    S = np.zeros((6, 6))
    for i in range(3):
        S[i, i] = 1.0 / Y[i]
    for i in range(3):
        for j in range(i + 1, 3):
            upper = -nu[(j + 1, i + 1)] / Y[j]
            if symmetrize == "upper":
                val = upper
            elif symmetrize == "average":
                val = 0.5 * (upper - nu[(i + 1, j + 1)] / Y[i])
            else:
                raise ValidationError(f"unknown symmetrize mode {symmetrize!r}")
            S[i, j] = S[j, i] = val
    S[3, 3] = 1.0 / c.G23
    S[4, 4] = 1.0 / c.G13
    S[5, 5] = 1.0 / c.G12
    w = np.linalg.eigvalsh(S)
    if w[0] <= 0:
        raise ValidationError(f"compliance matrix is not positive definite (eigenvalue {w[0]:.6e})")
    return S


def voigt_to_kelvin(voigt) -> np.ndarray:
    """Kelvin matrix D V D with D = diag(1, 1, 1, sqrt2, sqrt2, sqrt2) (3x3 analog in 2D)."""
    V = np.asarray(voigt, dtype=float)
    if V.shape not in ((3, 3), (6, 6)):
        raise ValidationError(f"expected a 3x3 or 6x6 Voigt matrix, got shape {V.shape}")
    D = _weights(spatial_dim(V.shape[0]))
    return check_spd(D[:, None] * V * D[None, :], "Kelvin matrix")


def kelvin_to_voigt(C) -> np.ndarray:
    """Inverse of :func:`voigt_to_kelvin` for stiffness matrices."""
    C = np.asarray(C, dtype=float)
    D = _weights(spatial_dim(C.shape[0]))
    return C / D[:, None] / D[None, :]


def isotropic_kelvin(K: float, G: float, dim: int = 3) -> np.ndarray:
    """Kelvin matrix of an isotropic material with bulk modulus K and shear modulus G.

    Eigenvalue 3K on the volumetric direction n and 2G on its complement.  In
    2D the volumetric eigenvalue is 2K, K being the planar bulk modulus.
    """
    if dim == 3:
        n = special_basis(3)[0]
        P = np.outer(n, n)
        return 3.0 * K * P + 2.0 * G * (np.eye(6) - P)
    n = special_basis(2)[0]
    P = np.outer(n, n)
    return 2.0 * K * P + 2.0 * G * (np.eye(3) - P)


def direction_from_angles(theta: float, phi: float) -> np.ndarray:
    """Unit vector from polar angle theta (from axis 3) and azimuth phi, radians."""
    st = np.sin(theta)
    return np.array([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def directional_young_modulus(C, d) -> float:
    """Young's modulus (GPa) of Kelvin matrix C along direction d.

    Uses 1/Y(d) = (d x d) : S : (d x d) with S the compliance.  In Kelvin
    notation this is vrep(d d^T) . C^{-1} vrep(d d^T).
    """
    C = check_spd(C)
    if C.shape[0] != 6:
        raise ValidationError("directional Young's modulus needs a 3D (6x6) Kelvin matrix")
    d = np.asarray(d, dtype=float)
    if d.shape != (3,):
        raise ValidationError(f"direction must be a 3-vector, got shape {d.shape}")
    nrm = np.linalg.norm(d)
    if abs(nrm - 1.0) > 1e-12:
        raise ValidationError(f"direction must be a unit vector (norm {nrm!r})")
    e = vrep(np.outer(d, d))
    return 1.0 / float(e @ np.linalg.solve(C, e))


def bone_kelvin(symmetrize: str = "upper") -> np.ndarray:
    """Kelvin matrix of the cortical bone data: compliance -> inverse -> Kelvin."""
    S = compliance_from_orthotropic(BONE, symmetrize)
    voigt = np.linalg.inv(S)
    voigt = 0.5 * (voigt + voigt.T)
    return voigt_to_kelvin(voigt)
