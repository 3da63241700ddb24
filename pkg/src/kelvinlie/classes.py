"""Elasticity symmetry classes and the Lie product construction of Kelvin matrices.

Every class is described by parameter counts (m_Q, m_V, m_L): a spatial
rotation q, eigen-strain distribution parameters p and log Kelvin moduli mu.
A Kelvin matrix is assembled as

    C = Q^T V L V^T Q,   Q = Trep(exp q),  V = V(p),  L = diag#(exp mu),

where V L V^T is the class-specific reduced form with its characteristic zero
pattern.  The distinguished symmetry axis is always the spatial 3-axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq, least_squares

from .errors import ValidationError
from .kelvin import check_spd, special_basis, tensor_from_kelvin
from .lie import (
    Trep, check_rotation, complement_skew, exp_so2, exp_so3, expm_skew, skw4,
    spatial_exp, spatial_log,
)

SQRT2 = np.sqrt(2.0)
# trigonal offset: v1 = n, v2 = z at s1 = 0
TRIGONAL_ALPHA0 = float(np.arctan(1.0 / SQRT2))


class SymmetryClass(str, Enum):
    TRICLINIC_2D = "triclinic_2d"
    ORTHO_2D = "ortho_2d"
    TETRA_2D = "tetra_2d"
    ISO_2D = "iso_2d"
    TRICLINIC_3D = "triclinic_3d"
    MONOCLINIC_3D = "monoclinic_3d"
    ORTHO_3D = "ortho_3d"
    TRIGONAL_3D = "trigonal_3d"
    TETRA_3D = "tetra_3d"
    CUBIC_3D = "cubic_3d"
    TRANS_ISO_3D = "trans_iso_3d"
    ISO_3D = "iso_3d"

    def __str__(self) -> str:
        return self.value


SC = SymmetryClass


def parse_class(name) -> SymmetryClass:
    """Class from its snake-case name (or pass through an enum member)."""
    if isinstance(name, SymmetryClass):
        return name
    try:
        return SymmetryClass(str(name).strip().lower())
    except ValueError:
        valid = ", ".join(c.value for c in SymmetryClass)
        raise ValidationError(f"unknown symmetry class {name!r}; expected one of: {valid}") from None


@dataclass(frozen=True)
class ClassSpec:
    """Parameter counts, moduli layout and reduced-form constraints of a class.

    ``layout[i]`` is the index into mu feeding diagonal slot i.  ``zeros``
    lists upper-triangle entries forced to vanish; each entry of
    ``equalities`` is a linear relation sum(coef * C[i, j]) = 0.
    """

    cls: SymmetryClass
    dim: int
    m_Q: int
    m_V: int
    m_L: int
    layout: tuple[int, ...]
    zeros: tuple[tuple[int, int], ...]
    equalities: tuple[tuple[tuple[float, int, int], ...], ...] = ()

    @property
    def k(self) -> int:
        return len(self.layout)

    @property
    def n(self) -> int:
        return self.m_Q + self.m_V + self.m_L

    @property
    def mask(self) -> np.ndarray:
        """Boolean k x k mask of the forced zeros (symmetric)."""
        M = np.zeros((self.k, self.k), dtype=bool)
        for i, j in self.zeros:
            M[i, j] = M[j, i] = True
        return M

    def split(self, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Split a parameter vector z = (q, p, mu)."""
        z = np.asarray(z, dtype=float).ravel()
        if z.size != self.n:
            raise ValidationError(f"{self.cls}: parameter vector must have length {self.n}, got {z.size}")
        a, b = self.m_Q, self.m_Q + self.m_V
        return z[:a], z[a:b], z[b:]


def _block_zeros(k: int, blocks: list[list[int]]) -> tuple[tuple[int, int], ...]:
    where = {}
    for b, idx in enumerate(blocks):
        for i in idx:
            where[i] = b
    out = []
    for i in range(k):
        for j in range(i + 1, k):
            if where.get(i, -1 - i) != where.get(j, -1 - j):
                out.append((i, j))
    return tuple(out)


def _eq(*terms) -> tuple[tuple[float, int, int], ...]:
    return tuple((float(c), i, j) for c, i, j in terms)


_ORTHO3_ZEROS = _block_zeros(6, [[0, 1, 2], [3], [4], [5]])
_TETRA3_EQ = (_eq((1, 1, 1), (-1, 0, 0)), _eq((1, 1, 2), (-1, 0, 2)), _eq((1, 4, 4), (-1, 3, 3)))
_CUBIC3_EQ = (
    _eq((1, 1, 1), (-1, 0, 0)), _eq((1, 2, 2), (-1, 0, 0)),
    _eq((1, 0, 2), (-1, 0, 1)), _eq((1, 1, 2), (-1, 0, 1)),
    _eq((1, 4, 4), (-1, 3, 3)), _eq((1, 5, 5), (-1, 3, 3)),
)
_C66_EQ = _eq((1, 5, 5), (-1, 0, 0), (1, 0, 1))

CLASS_SPECS: dict[SymmetryClass, ClassSpec] = {
    SC.TRICLINIC_2D: ClassSpec(SC.TRICLINIC_2D, 2, 1, 2, 3, (0, 1, 2), ((0, 2),)),
    SC.ORTHO_2D: ClassSpec(SC.ORTHO_2D, 2, 1, 1, 3, (0, 1, 2), ((0, 2), (1, 2))),
    SC.TETRA_2D: ClassSpec(SC.TETRA_2D, 2, 1, 0, 3, (0, 1, 2), ((0, 2), (1, 2)),
                           (_eq((1, 1, 1), (-1, 0, 0)),)),
    SC.ISO_2D: ClassSpec(SC.ISO_2D, 2, 0, 0, 2, (0, 1, 1), ((0, 2), (1, 2)),
                         (_eq((1, 1, 1), (-1, 0, 0)), _eq((1, 2, 2), (-1, 0, 0), (1, 0, 1)))),
    SC.TRICLINIC_3D: ClassSpec(SC.TRICLINIC_3D, 3, 3, 12, 6, (0, 1, 2, 3, 4, 5),
                               ((0, 3), (0, 4), (0, 5))),
    SC.MONOCLINIC_3D: ClassSpec(SC.MONOCLINIC_3D, 3, 3, 6, 6, (0, 1, 2, 3, 4, 5),
                                _block_zeros(6, [[0, 1, 2, 3], [4], [5]])),
    SC.ORTHO_3D: ClassSpec(SC.ORTHO_3D, 3, 3, 3, 6, (0, 1, 2, 3, 4, 5), _ORTHO3_ZEROS),
    SC.TRIGONAL_3D: ClassSpec(
        SC.TRIGONAL_3D, 3, 3, 2, 4, (0, 1, 2, 2, 3, 3),
        ((0, 4), (0, 5), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5), (3, 4), (3, 5)),
        (_eq((1, 1, 1), (-1, 0, 0)), _eq((1, 1, 2), (-1, 0, 2)), _eq((1, 1, 3), (1, 0, 3)),
         _eq((1, 4, 4), (-1, 3, 3)), _eq((1, 4, 5), (-SQRT2, 0, 3)), _C66_EQ)),
    SC.TETRA_3D: ClassSpec(SC.TETRA_3D, 3, 3, 1, 5, (0, 1, 2, 3, 3, 4), _ORTHO3_ZEROS, _TETRA3_EQ),
    SC.CUBIC_3D: ClassSpec(SC.CUBIC_3D, 3, 3, 0, 3, (0, 1, 1, 2, 2, 2), _ORTHO3_ZEROS, _CUBIC3_EQ),
    SC.TRANS_ISO_3D: ClassSpec(SC.TRANS_ISO_3D, 3, 2, 1, 4, (0, 1, 2, 3, 3, 2), _ORTHO3_ZEROS,
                               _TETRA3_EQ + (_C66_EQ,)),
    SC.ISO_3D: ClassSpec(SC.ISO_3D, 3, 0, 0, 2, (0, 1, 1, 1, 1, 1), _ORTHO3_ZEROS,
                         _CUBIC3_EQ + (_eq((1, 3, 3), (-1, 0, 0), (1, 0, 1)),)),
}

# direct edges of the Hasse diagram: class -> classes with a larger symmetry group
HASSE_PARENTS: dict[SymmetryClass, tuple[SymmetryClass, ...]] = {
    SC.TRICLINIC_2D: (SC.ORTHO_2D,),
    SC.ORTHO_2D: (SC.TETRA_2D,),
    SC.TETRA_2D: (SC.ISO_2D,),
    SC.ISO_2D: (),
    SC.TRICLINIC_3D: (SC.MONOCLINIC_3D,),
    SC.MONOCLINIC_3D: (SC.ORTHO_3D, SC.TRIGONAL_3D),
    SC.ORTHO_3D: (SC.TETRA_3D,),
    SC.TRIGONAL_3D: (SC.TRANS_ISO_3D,),
    SC.TETRA_3D: (SC.CUBIC_3D, SC.TRANS_ISO_3D),
    SC.CUBIC_3D: (SC.ISO_3D,),
    SC.TRANS_ISO_3D: (SC.ISO_3D,),
    SC.ISO_3D: (),
}


def class_spec(c) -> ClassSpec:
    return CLASS_SPECS[parse_class(c)]


def classes_for_dim(dim: int) -> list[SymmetryClass]:
    return [c for c, s in CLASS_SPECS.items() if s.dim == dim]


def hasse_parents(c) -> tuple[SymmetryClass, ...]:
    return HASSE_PARENTS[parse_class(c)]


def supergroup_classes(c) -> set[SymmetryClass]:
    """All classes with a strictly larger symmetry group (transitive closure)."""
    out: set[SymmetryClass] = set()
    stack = list(hasse_parents(c))
    while stack:
        p = stack.pop()
        if p not in out:
            out.add(p)
            stack.extend(HASSE_PARENTS[p])
    return out


def subgroup_classes(c) -> set[SymmetryClass]:
    """All weaker classes, i.e. those a member of ``c`` also belongs to."""
    c = parse_class(c)
    return {a for a in SymmetryClass if c in supergroup_classes(a)}


def is_weaker_or_equal(weak, strong) -> bool:
    weak, strong = parse_class(weak), parse_class(strong)
    return weak == strong or strong in supergroup_classes(weak)


# -- eigen-strain distributors -------------------------------------------------

def _pad(block: np.ndarray, k: int) -> np.ndarray:
    V = np.eye(k)
    m = block.shape[0]
    V[:m, :m] = block
    return V


def _alpha_pair(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    ca, sa = np.cos(alpha), np.sin(alpha)
    v1 = np.array([ca, ca, SQRT2 * sa, 0, 0, 0]) / SQRT2
    v2 = np.array([sa, sa, -SQRT2 * ca, 0, 0, 0]) / SQRT2
    return v1, v2


def build_eigvecs(c, p=()) -> np.ndarray:
    """Orthogonal matrix of eigen-strain distributors (columns) for class ``c``.

    For fixed constructions whose natural column set has determinant -1 the
    last column is negated so that the result lies in SO(k).
    """
    s = class_spec(c)
    p = np.asarray(p, dtype=float).ravel()
    if p.size != s.m_V:
        raise ValidationError(f"{s.cls}: expected {s.m_V} eigenvector parameters, got {p.size}")
    E = np.eye(6)
    cls = s.cls
    if cls == SC.TRICLINIC_2D:
        c1, s1 = np.cos(p[0]), np.sin(p[0])
        Vi = np.array([[1.0, 0, 0], [0, c1, -s1], [0, s1, c1]])
        Vii = np.eye(3)
        Vii[:2, :2] = exp_so2(p[1])
        return Vi @ Vii
    if cls == SC.ORTHO_2D:
        return _pad(exp_so2(p[0]), 3)
    if cls in (SC.TETRA_2D, SC.ISO_2D):
        n, y = special_basis(2)
        return np.column_stack([n, y, [0.0, 0.0, 1.0]])
    if cls == SC.TRICLINIC_3D:
        return expm_skew(complement_skew(p, 3))
    if cls == SC.MONOCLINIC_3D:
        return _pad(expm_skew(skw4(p)), 6)
    if cls == SC.ORTHO_3D:
        return _pad(exp_so3(p), 6)
    if cls == SC.TRIGONAL_3D:
        v1, v2 = _alpha_pair(TRIGONAL_ALPHA0 + p[0])
        c2, s2 = np.cos(p[1]), np.sin(p[1])
        v3 = np.array([c2, -c2, 0, -SQRT2 * s2, 0, 0]) / SQRT2
        v4 = np.array([0, 0, 0, 0, -s2, c2])
        v5 = np.array([s2, -s2, 0, SQRT2 * c2, 0, 0]) / SQRT2
        v6 = -np.array([0, 0, 0, 0, c2, s2])
        return np.column_stack([v1, v2, v3, v4, v5, v6])
    if cls in (SC.TETRA_3D, SC.TRANS_ISO_3D):
        v1, v2 = _alpha_pair(p[0])
        y = special_basis(3)[1]
        return np.column_stack([v1, v2, y, E[3], E[4], E[5]])
    # cubic and isotropic
    n, y, z = special_basis(3)
    return np.column_stack([n, y, z, E[3], E[4], -E[5]])


def build_moduli(c, mu, ref_modulus: float = 1.0) -> np.ndarray:
    """Diagonal of Lambda: slot i holds ref_modulus * exp(mu[layout[i]])."""
    s = class_spec(c)
    mu = np.asarray(mu, dtype=float).ravel()
    if mu.size != s.m_L:
        raise ValidationError(f"{s.cls}: expected {s.m_L} log-moduli, got {mu.size}")
    if not np.all(np.isfinite(mu)):
        raise ValidationError(f"{s.cls}: log-moduli must be finite")
    return ref_modulus * np.exp(mu[list(s.layout)])


def moduli_params(c, lam, ref_modulus: float = 1.0) -> np.ndarray:
    """Inverse of :func:`build_moduli` (first slot of each group is used)."""
    s = class_spec(c)
    lam = np.asarray(lam, dtype=float)
    mu = np.empty(s.m_L)
    for slot, idx in reversed(list(enumerate(s.layout))):
        mu[idx] = np.log(lam[slot] / ref_modulus)
    return mu


# -- triples -------------------------------------------------------------------

@dataclass(frozen=True)
class LieTriple:
    """Product representation (Q, V, Lambda) of a Kelvin matrix.

    ``Q`` is the spatial rotation (d x d), ``V`` the strain-space rotation
    (k x k) and ``lam`` the positive diagonal of Lambda.  The represented
    matrix is Trep(Q)^T V diag(lam) V^T Trep(Q).
    """

    Q: np.ndarray
    V: np.ndarray
    lam: np.ndarray
    cls: SymmetryClass | None = field(default=None, compare=False)

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        V = np.array(self.V, dtype=float)
        lam = np.array(self.lam, dtype=float).ravel()
        k = lam.size
        if k not in (3, 6) or V.shape != (k, k) or Q.shape != ((2, 2) if k == 3 else (3, 3)):
            raise ValidationError(f"inconsistent triple shapes Q{Q.shape} V{V.shape} lam{lam.shape}")
        if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise ValidationError(f"moduli must be finite and positive, got {lam}")
        for name, M in (("Q", Q), ("V", V)):
            err = np.linalg.norm(M @ M.T - np.eye(M.shape[0]))
            if err > 1e-9:
                raise ValidationError(f"triple factor {name} is not orthogonal (error {err:.3e})")
        for a in (Q, V, lam):
            a.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "lam", lam)

    @property
    def k(self) -> int:
        return self.lam.size

    @property
    def Qk(self) -> np.ndarray:
        """Strain-space image Trep(Q)."""
        return Trep(self.Q)

    def reduced(self) -> np.ndarray:
        M = (self.V * self.lam) @ self.V.T
        return 0.5 * (M + M.T)

    def matrix(self) -> np.ndarray:
        T = self.Qk
        M = T.T @ self.reduced() @ T
        return 0.5 * (M + M.T)

    def inverse(self) -> "LieTriple":
        return LieTriple(self.Q, self.V, 1.0 / self.lam, self.cls)

    def scaled(self, alpha: float) -> "LieTriple":
        return LieTriple(self.Q, self.V, alpha * self.lam, self.cls)

    def conjugated(self, W) -> "LieTriple":
        """Triple of Trep(W) C Trep(W)^T for a spatial rotation W."""
        W = check_rotation(W)
        return LieTriple(self.Q @ W.T, self.V, self.lam, self.cls)


# -- residual frame reductions -------------------------------------------------

def _trep2_stack(phi: np.ndarray) -> np.ndarray:
    """Trep(exp_so2(phi)) for an array of angles, shape (N, 3, 3)."""
    c2, s2 = np.cos(2 * phi), np.sin(2 * phi)
    T = np.empty(phi.shape + (3, 3))
    T[..., 0, 0] = T[..., 1, 1] = 0.5 * (1 + c2)
    T[..., 0, 1] = T[..., 1, 0] = 0.5 * (1 - c2)
    T[..., 0, 2] = -s2 / SQRT2
    T[..., 1, 2] = s2 / SQRT2
    T[..., 2, 0] = s2 / SQRT2
    T[..., 2, 1] = -s2 / SQRT2
    T[..., 2, 2] = c2
    return T


def _reduce_triclinic_2d(C: np.ndarray) -> np.ndarray:
    """Spatial rotation R making entry (1,3) of Trep(R) C Trep(R)^T vanish.

    The rotated (1,3) entry is a trigonometric polynomial in the angle with
    zero mean over a half turn, so it always has a root.  The root of
    smallest magnitude is taken, which makes the reduction the identity on
    matrices that are already reduced.
    """
    scale = np.linalg.norm(C)

    def g(phi):
        T = _trep2_stack(np.asarray(phi, dtype=float))
        return np.einsum("...i,ij,...j->...", T[..., 0, :], C, T[..., 2, :])

    if abs(g(0.0)) <= 1e-15 * scale:
        return np.eye(2)
    grid = np.linspace(-np.pi / 2, np.pi / 2, 361)
    vals = g(grid)
    roots = []
    for i in np.nonzero(vals[:-1] * vals[1:] <= 0)[0]:
        a, b = grid[i], grid[i + 1]
        roots.append(a if vals[i] == 0 else brentq(lambda x: float(g(x)), a, b, xtol=1e-15, rtol=1e-15))
    if not roots:
        # only possible when g vanishes identically up to rounding
        return np.eye(2)
    return exp_so2(min(roots, key=abs))


def _longitudinal_newton(c4: np.ndarray, x: np.ndarray, iters: int = 50):
    """Newton iteration for c_ijkl x_j x_k x_l = lam x_i with |x| = 1."""
    x = x / np.linalg.norm(x)
    A = np.einsum("ijkl,k,l->ij", c4, x, x)
    lam = x @ A @ x
    for _ in range(iters):
        A = np.einsum("ijkl,k,l->ij", c4, x, x)
        B = np.einsum("ikjl,k,l->ij", c4, x, x)
        f = A @ x - lam * x
        h = 0.5 * (x @ x - 1.0)
        J = np.zeros((4, 4))
        J[:3, :3] = A + 2 * B - lam * np.eye(3)
        J[:3, 3] = -x
        J[3, :3] = x
        try:
            step = np.linalg.solve(J, -np.concatenate([f, [h]]))
        except np.linalg.LinAlgError:
            return None
        x = x + step[:3]
        lam = lam + step[3]
        if np.linalg.norm(step) < 1e-15:
            break
    x = x / np.linalg.norm(x)
    return x


def _reduce_triclinic_3d(C: np.ndarray) -> np.ndarray:
    """Spatial rotation R making entries (1,4), (1,5), (1,6) of the rotated matrix vanish.

    The new 1-axis is a longitudinal direction d, i.e. c:(d x d) has d as an
    eigenvector; such directions are the stationary points of
    d -> c_ijkl d_i d_j d_k d_l on the sphere and always exist.  The other two
    axes diagonalise c:(d x d) on the plane normal to d.  Newton's method
    started from the current 1-axis is tried first, then random restarts.
    """
    scale = np.linalg.norm(C)
    c4 = tensor_from_kelvin(C)

    def resid(x):
        d = x / np.linalg.norm(x)
        a = np.einsum("ijkl,j,k,l->i", c4, d, d, d)
        return (a - (d @ a) * d) / scale

    e1 = np.array([1.0, 0.0, 0.0])
    tol = 1e-14
    d = None
    if np.max(np.abs(resid(e1))) <= tol:
        d = e1
    else:
        rng = np.random.default_rng(0)
        starts = [e1] + list(rng.normal(size=(32, 3)))
        for x0 in starts:
            cand = _longitudinal_newton(c4, x0)
            if cand is None or np.max(np.abs(resid(cand))) > tol:
                sol = least_squares(lambda x: np.concatenate([resid(x), [np.linalg.norm(x) - 1]]),
                                    x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
                cand = _longitudinal_newton(c4, sol.x)
            if cand is not None and np.max(np.abs(resid(cand))) <= tol:
                d = cand * (np.sign(cand[0]) or 1.0)
                break
        if d is None:
            raise ValidationError("triclinic reduction failed: no longitudinal direction found")
    A = np.einsum("ijkl,k,l->ij", c4, d, d)
    ref = np.column_stack([d, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    U, _ = np.linalg.qr(ref)
    U = U * np.sign(np.diag(U.T @ ref))
    P = U[:, 1:]
    B = P.T @ A @ P
    if abs(B[0, 1]) <= 1e-15 * scale:
        u = P[:, 0]
    else:
        _, E = np.linalg.eigh(B)
        # pick the eigenvector closer to the current 2-axis
        j = int(np.argmax(np.abs(E[0, :])))
        u = P @ (E[:, j] * np.sign(E[0, j]))
    R = np.array([d, u, np.cross(d, u)])
    return R


def _reduce_monoclinic(C: np.ndarray) -> np.ndarray:
    """Rotation about the 1-axis diagonalising the (5,6) block of an axis-1 monoclinic matrix."""
    c55, c56, c66 = C[4, 4], C[4, 5], C[5, 5]
    if abs(c56) <= 1e-15 * np.linalg.norm(C):
        return np.eye(3)
    # the (13, 12) shear pair turns by the spatial angle about axis 1
    psi = 0.5 * np.arctan2(2.0 * c56, c55 - c66)
    for cand in sorted([psi, psi - np.pi / 2, psi + np.pi / 2], key=abs):
        R = exp_so3([cand, 0.0, 0.0])
        T = Trep(R)
        if abs((T @ C @ T.T)[4, 5]) <= 1e-12 * np.linalg.norm(C):
            return R
    raise ValidationError("monoclinic reduction failed")


def canonical_frame(C, c) -> np.ndarray:
    """Spatial rotation R bringing C into the canonical reduced frame of class ``c``.

    Only classes whose reduced form fixes frame freedom beyond their symmetry
    need this: triclinic (2D and 3D) and monoclinic.  Other classes return the
    identity.  The rotation closest to the identity is chosen.
    """
    s = class_spec(c)
    C = np.asarray(C, dtype=float)
    if s.cls == SC.TRICLINIC_2D:
        return _reduce_triclinic_2d(C)
    if s.cls == SC.TRICLINIC_3D:
        return _reduce_triclinic_3d(C)
    if s.cls == SC.MONOCLINIC_3D:
        return _reduce_monoclinic(C)
    return np.eye(s.dim)


# -- assembly -------------------------------------------------------------------

def reduced_triple(c, mu, p, ref_modulus: float = 1.0) -> LieTriple:
    """Triple (I, V, Lambda) of the reduced form; V includes any canonical frame rotation."""
    s = class_spec(c)
    V = build_eigvecs(s.cls, p)
    lam = build_moduli(s.cls, mu, ref_modulus)
    if s.cls in (SC.TRICLINIC_2D, SC.TRICLINIC_3D):
        R = canonical_frame((V * lam) @ V.T, s.cls)
        V = Trep(R) @ V
    return LieTriple(np.eye(s.dim), V, lam, s.cls)


def build_reduced(c, mu, p=(), ref_modulus: float = 1.0) -> np.ndarray:
    """Reduced Kelvin matrix V Lambda V^T of class ``c``."""
    return check_spd(reduced_triple(c, mu, p, ref_modulus).reduced(), "reduced Kelvin matrix")


def build_full(c, z, ref_modulus: float = 1.0) -> tuple[np.ndarray, LieTriple]:
    """Oriented Kelvin matrix and its triple from z = (q, p, mu).

    Classes with m_Q = 2 (transversely isotropic) take q as the first two
    components of a rotation vector with vanishing 3-component, since a
    rotation about the symmetry axis has no effect.
    """
    s = class_spec(c)
    q, p, mu = s.split(z)
    base = reduced_triple(s.cls, mu, p, ref_modulus)
    Q = spatial_rotation(s.cls, q)
    t = LieTriple(Q, base.V, base.lam, s.cls)
    return check_spd(t.matrix(), "Kelvin matrix"), t


def spatial_rotation(c, q) -> np.ndarray:
    s = class_spec(c)
    q = np.asarray(q, dtype=float).ravel()
    if q.size != s.m_Q:
        raise ValidationError(f"{s.cls}: expected {s.m_Q} rotation parameters, got {q.size}")
    if s.m_Q == 0:
        return np.eye(s.dim)
    if s.m_Q == 2:
        return exp_so3([q[0], q[1], 0.0])
    return spatial_exp(q)


def spatial_params(c, Q) -> np.ndarray:
    """Inverse of :func:`spatial_rotation` on the principal branch."""
    s = class_spec(c)
    if s.m_Q == 0:
        return np.zeros(0)
    q = spatial_log(Q)
    return q[:2] if s.m_Q == 2 else q


def check_reduced_form(C, c, tol: float = 1e-9, reduce: bool = False) -> tuple[bool, float]:
    """Check the zero pattern and equality constraints of class ``c``.

    Returns (passed, max_violation) with violations relative to ||C||_F.
    With ``reduce=True`` the matrix is first rotated into the canonical frame
    of the class (see :func:`canonical_frame`); this is how membership in a
    weaker class is tested for matrices given in a stronger class's frame.
    """
    s = class_spec(c)
    C = np.asarray(C, dtype=float)
    if C.shape != (s.k, s.k):
        raise ValidationError(f"{s.cls}: expected a {s.k}x{s.k} matrix, got {C.shape}")
    if reduce:
        T = Trep(canonical_frame(C, s.cls))
        C = T @ C @ T.T
    scale = np.linalg.norm(C)
    if scale == 0:
        return True, 0.0
    viol = np.max(np.abs(C - C.T)) / scale
    for i, j in s.zeros:
        viol = max(viol, abs(C[i, j]) / scale)
    for rel in s.equalities:
        viol = max(viol, abs(sum(a * C[i, j] for a, i, j in rel)) / scale)
    return bool(viol <= tol), float(viol)


def symmetry_generators(c) -> list[np.ndarray]:
    """Strain-space images of generators of the class symmetry group.

    Axis conventions: 3-axis is the distinguished axis; 2-fold axes lie on
    the 1-axis.  Proper rotations in 2D cannot distinguish orthotropic from
    triclinic (Trep of a half turn is the identity), so the orthotropic 2D
    entry is the reflection t12 -> -t12, i.e. diag(1, 1, -1).
    """
    cls = parse_class(c)
    Rx = lambda a: Trep(exp_so3([a, 0.0, 0.0]))  # noqa: E731
    Rz = lambda a: Trep(exp_so3([0.0, 0.0, a]))  # noqa: E731
    R2 = lambda a: Trep(exp_so2(a))  # noqa: E731
    if cls == SC.TRICLINIC_2D:
        return [R2(np.pi)]
    if cls == SC.ORTHO_2D:
        return [np.diag([1.0, 1.0, -1.0])]
    if cls == SC.TETRA_2D:
        return [R2(np.pi / 2), np.diag([1.0, 1.0, -1.0])]
    if cls == SC.ISO_2D:
        return [R2(0.3), R2(1.234), R2(-2.5)]
    if cls == SC.TRICLINIC_3D:
        return [np.eye(6)]
    if cls == SC.MONOCLINIC_3D:
        return [Rx(np.pi)]
    if cls == SC.ORTHO_3D:
        return [Rx(np.pi), Rz(np.pi)]
    if cls == SC.TRIGONAL_3D:
        return [Rz(2 * np.pi / 3), Rx(np.pi)]
    if cls == SC.TETRA_3D:
        return [Rz(np.pi / 2), Rx(np.pi)]
    if cls == SC.CUBIC_3D:
        return [Rz(np.pi / 2), Rx(np.pi / 2)]
    if cls == SC.TRANS_ISO_3D:
        return [Rz(0.3), Rz(1.234), Rx(np.pi)]
    return [Trep(exp_so3(v)) for v in ([0.3, -0.4, 1.1], [1.2, 0.5, 0.2], [0.0, 2.0, -0.7])]


def triple_from_reduced(C, c, reference: LieTriple | None = None) -> LieTriple:
    """Decompose a matrix given in the reduced frame of class ``c`` into (I, V, Lambda).

    Eigenvectors come from a symmetric eigensolve.  When a reference triple is
    given, columns are matched to the reference columns (assignment on the
    absolute overlaps), eigen-spaces of repeated eigenvalues are aligned by
    orthogonal Procrustes, and signs are chosen for positive overlap.  The
    determinant is made +1 by negating the least aligned column.
    """
    from scipy.optimize import linear_sum_assignment

    s = class_spec(c)
    C = check_spd(C)
    ok, viol = check_reduced_form(C, s.cls)
    if not ok:
        raise ValidationError(f"matrix is not in the reduced form of {s.cls} (violation {viol:.3e})")
    w, U = np.linalg.eigh(C)
    order = np.argsort(w)[::-1]
    w, U = w[order], U[:, order]
    if reference is not None:
        Vr = reference.V
        cost = -np.abs(Vr.T @ U)
        rows, cols = linear_sum_assignment(cost)
        perm = cols[np.argsort(rows)]
        w, U = w[perm], U[:, perm]
        # align groups of (nearly) equal eigenvalues
        groups = _eigen_groups(w)
        for g in groups:
            if len(g) > 1:
                M = U[:, g].T @ Vr[:, g]
                a, _, bt = np.linalg.svd(M)
                U[:, g] = U[:, g] @ (a @ bt)
        signs = np.sign(np.sum(U * Vr, axis=0))
        signs[signs == 0] = 1.0
        U = U * signs
        if np.linalg.det(U) < 0:
            j = int(np.argmin(np.abs(np.sum(U * Vr, axis=0))))
            U[:, j] = -U[:, j]
    elif np.linalg.det(U) < 0:
        U[:, -1] = -U[:, -1]
    return LieTriple(np.eye(s.dim), U, w, s.cls)


def _eigen_groups(w, rtol: float = 1e-8) -> list[list[int]]:
    """Index groups of equal eigenvalues (any order of w)."""
    idx = list(np.argsort(w))
    groups: list[list[int]] = []
    for i in idx:
        if groups and abs(w[i] - w[groups[-1][-1]]) <= rtol * max(abs(w[i]), 1e-300):
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


__all__ = [
    "SymmetryClass", "ClassSpec", "CLASS_SPECS", "HASSE_PARENTS", "LieTriple", "parse_class",
    "class_spec", "classes_for_dim", "hasse_parents", "supergroup_classes", "subgroup_classes",
    "is_weaker_or_equal", "build_eigvecs", "build_moduli", "moduli_params", "build_reduced",
    "build_full", "reduced_triple", "spatial_rotation", "spatial_params", "check_reduced_form",
    "canonical_frame", "symmetry_generators", "triple_from_reduced", "TRIGONAL_ALPHA0",
]
