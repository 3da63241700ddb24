"""Rotation groups: skew parametrizations, exp/log maps and the strain-space representation.

Spatial rotations Q in SO(d) act on Kelvin vectors through Trep(Q) in SO(k),
defined by vrep(Q t Q^T) = Trep(Q) vrep(t).  Its derivative at the identity,
trep, maps so(d) into a d-dimensional subalgebra st of so(k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import BranchError, ValidationError
from .kelvin import KELVIN_INDEX, SQRT2, kelvin_dim, spatial_dim

ORTH_TOL = 1e-12
BRANCH_TOL = 1e-10


# -- skew parametrizations ---------------------------------------------------

def skw3(p) -> np.ndarray:
    """Cross-product matrix: skw3(p) @ x == cross(p, x)."""
    p1, p2, p3 = np.asarray(p, dtype=float)
    return np.array([[0.0, -p3, p2], [p3, 0.0, -p1], [-p2, p1, 0.0]])


def vee3(P) -> np.ndarray:
    """Inverse of :func:`skw3`."""
    P = np.asarray(P, dtype=float)
    return np.array([P[2, 1], P[0, 2], P[1, 0]])


def skw2(theta: float) -> np.ndarray:
    return np.array([[0.0, -theta], [theta, 0.0]])


def upper_diagonal_layout(n: int) -> list[tuple[int, int]]:
    """Strict upper triangle positions in parameter order.

    Parameters fill the superdiagonals starting from the corner (0, n-1);
    each superdiagonal is traversed from its bottom entry upwards.  For n = 6
    parameter 1 sits at (1,6), 2 at (2,6), 3 at (1,5), ..., 15 at (1,2)
    (1-based).  For n = 4 the order is (1,4), (2,4), (1,3), (3,4), (2,3), (1,2).
    """
    pos = []
    for off in range(n - 1, 0, -1):
        for i in range(n - off - 1, -1, -1):
            pos.append((i, i + off))
    return pos


_LAYOUT_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _layout_arrays(n: int):
    if n not in _LAYOUT_CACHE:
        pos = upper_diagonal_layout(n)
        _LAYOUT_CACHE[n] = (np.array([i for i, _ in pos]), np.array([j for _, j in pos]))
    return _LAYOUT_CACHE[n]


def skw_upper(p, n: int) -> np.ndarray:
    """Skew n x n matrix from n(n-1)/2 parameters in :func:`upper_diagonal_layout` order."""
    p = np.asarray(p, dtype=float)
    m = n * (n - 1) // 2
    if p.shape != (m,):
        raise ValidationError(f"expected {m} skew parameters for n={n}, got shape {p.shape}")
    rows, cols = _layout_arrays(n)
    P = np.zeros((n, n))
    P[rows, cols] = p
    return P - P.T


def vee_upper(P) -> np.ndarray:
    """Parameters of a skew matrix, inverse of :func:`skw_upper`."""
    P = np.asarray(P, dtype=float)
    rows, cols = _layout_arrays(P.shape[0])
    return P[rows, cols].copy()


def skwr6(p) -> np.ndarray:
    """so(6) element from 15 parameters filling the five upper diagonals."""
    return skw_upper(p, 6)


def skw4(p) -> np.ndarray:
    """so(4) element from 6 parameters, same layout rule as :func:`skwr6`."""
    return skw_upper(p, 4)


# -- exponentials ------------------------------------------------------------

def exp_so2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def exp_so3(q) -> np.ndarray:
    """Rodrigues formula Q = I + sin(t) R + (1 - cos(t)) R^2, t = |q|, R = skw3(q / t)."""
    q = np.asarray(q, dtype=float)
    theta = np.linalg.norm(q)
    if theta == 0.0:
        return np.eye(3)
    R = skw3(q / theta)
    return np.eye(3) + np.sin(theta) * R + (1.0 - np.cos(theta)) * (R @ R)


def expm_skew(P) -> np.ndarray:
    """Exponential of a skew matrix of any size through its real Schur form.

    Exact orthogonality is kept because the result is assembled from exact 2x2
    rotation blocks.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        return exp_so2(P[1, 0])
    if n == 3:
        return exp_so3(vee3(P))
    # skew matrices are normal, so the real Schur form is block diagonal
    T, Z = schur(0.5 * (P - P.T), output="real")
    E = np.eye(n)
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            a = 0.5 * (T[i + 1, i] - T[i, i + 1])
            c, s = np.cos(a), np.sin(a)
            E[i:i + 2, i:i + 2] = [[c, -s], [s, c]]
            i += 2
        else:
            i += 1
    return Z @ E @ Z.T


def rodrigues6(theta: float, r) -> np.ndarray:
    """exp(theta * trep(skw3(r))) for a unit axis r via the closed 5-term formula."""
    r = np.asarray(r, dtype=float)
    R = trep(skw3(r / np.linalg.norm(r)))
    R2 = R @ R
    R3 = R2 @ R
    R4 = R3 @ R
    c, s = np.cos(theta), np.sin(theta)
    return (np.eye(6) + s * R + (1 - c) * R2
            + s * (1 - c) / 3.0 * (R + R3) + (1 - c) ** 2 / 6.0 * (R2 + R4))


def rodrigues3(theta: float) -> np.ndarray:
    """exp(theta * trep(skw2(1))) in 2D Kelvin space, closed form."""
    R = trep(skw2(1.0))
    return np.eye(3) + 0.5 * np.sin(2 * theta) * R + 0.25 * (1 - np.cos(2 * theta)) * (R @ R)


# -- logarithm ---------------------------------------------------------------

def check_rotation(Q, name: str = "rotation") -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValidationError(f"{name}: expected a square matrix, got shape {Q.shape}")
    n = Q.shape[0]
    err = np.linalg.norm(Q @ Q.T - np.eye(n))
    if err > 1e-10:
        raise ValidationError(f"{name}: not orthogonal (|QQ^T - I|_F = {err:.3e})")
    if np.linalg.det(Q) < 0:
        raise ValidationError(f"{name}: determinant is -1, improper rotation")
    return Q


def log_rotation(Q) -> np.ndarray:
    """Principal logarithm of a rotation matrix via its real Schur decomposition.

    Raises :class:`BranchError` when a rotation plane turns by an angle within
    ``BRANCH_TOL`` of pi, where the logarithm is not unique.
    """
    Q = check_rotation(Q)
    n = Q.shape[0]
    if n == 1:
        return np.zeros((1, 1))
    T, Z = schur(Q, output="real")
    L = np.zeros((n, n))
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 0.0:
            blk = T[i:i + 2, i:i + 2]
            a = np.arctan2(0.5 * (blk[1, 0] - blk[0, 1]), 0.5 * (blk[0, 0] + blk[1, 1]))
            if np.pi - abs(a) < BRANCH_TOL:
                raise BranchError(f"rotation angle {a:.12f} rad lies on the logarithm branch boundary")
            L[i:i + 2, i:i + 2] = [[0.0, -a], [a, 0.0]]
            i += 2
        else:
            if T[i, i] < 0:
                raise BranchError("rotation has eigenvalue -1 (plane angle pi); logarithm not unique")
            i += 1
    P = Z @ L @ Z.T
    return 0.5 * (P - P.T)


def log_rotations(Qs) -> np.ndarray:
    """Batched principal logarithm for a stack of rotations, shape (N, n, n).

    Uses log Q = g(S) (Q - Q^T)/2 with S = (Q + Q^T)/2 and g(c) = acos(c)/sin(acos(c)),
    valid because S and Q - Q^T commute.  Each plane angle is theta with cos(theta)
    an eigenvalue of S.
    """
    Qs = np.asarray(Qs, dtype=float)
    S = 0.5 * (Qs + np.swapaxes(Qs, -1, -2))
    A = 0.5 * (Qs - np.swapaxes(Qs, -1, -2))
    w, U = np.linalg.eigh(S)
    if np.any(w < -1.0 + BRANCH_TOL):
        raise BranchError("rotation with plane angle pi in batch; logarithm not unique")
    w = np.clip(w, -1.0, 1.0)
    th = np.arccos(w)
    g = np.ones_like(th)
    big = th > 1e-6
    g[big] = th[big] / np.sin(th[big])
    g[~big] = 1.0 + th[~big] ** 2 / 6.0
    G = (U * g[..., None, :]) @ np.swapaxes(U, -1, -2)
    L = G @ A
    return 0.5 * (L - np.swapaxes(L, -1, -2))


def rotation_angles(Q) -> np.ndarray:
    """Plane rotation angles (non-negative) of Q, one per 2x2 Schur block."""
    L = log_rotation(Q)
    ev = np.linalg.eigvals(L).imag
    return np.sort(ev[ev > 1e-15])


# -- strain-space representation ---------------------------------------------

def _rep_tables(d: int):
    idx = KELVIN_INDEX[d]
    g = np.array([1.0 if i == j else SQRT2 for i, j in idx])
    I = np.array([i for i, _ in idx])
    J = np.array([j for _, j in idx])
    return g, I, J


def Trep(Q) -> np.ndarray:
    """Strain-space rotation induced by a spatial rotation Q in SO(2) or SO(3).

    Entry (a, b) with a ~ (i, j), b ~ (m, n) equals
    g_a g_b (Q_im Q_jn + Q_in Q_jm) / 2, g = 1 on normal and sqrt(2) on shear slots.
    """
    Q = check_rotation(Q, "spatial rotation")
    d = Q.shape[0]
    if d not in (2, 3):
        raise ValidationError(f"spatial rotation must be 2x2 or 3x3, got {Q.shape}")
    g, I, J = _rep_tables(d)
    M = Q[I][:, I] * Q[J][:, J] + Q[I][:, J] * Q[J][:, I]
    return 0.5 * g[:, None] * g[None, :] * M


def trep(R) -> np.ndarray:
    """Derivative of :func:`Trep` at the identity applied to a skew matrix R."""
    R = np.asarray(R, dtype=float)
    d = R.shape[0]
    if R.shape not in ((2, 2), (3, 3)):
        raise ValidationError(f"trep expects a 2x2 or 3x3 skew matrix, got {R.shape}")
    g, I, J = _rep_tables(d)
    E = np.eye(d)
    M = (R[I][:, I] * E[J][:, J] + E[I][:, I] * R[J][:, J]
         + R[I][:, J] * E[J][:, I] + E[I][:, J] * R[J][:, I])
    return 0.5 * g[:, None] * g[None, :] * M


def spatial_exp(q) -> np.ndarray:
    """Spatial rotation from q: angle (length 1) in 2D, rotation vector (length 3) in 3D."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.size == 1:
        return exp_so2(q[0])
    if q.size == 3:
        return exp_so3(q)
    raise ValidationError(f"spatial rotation parameter must have length 1 or 3, got {q.size}")


def spatial_log(Q) -> np.ndarray:
    """Inverse of :func:`spatial_exp` on the principal branch."""
    L = log_rotation(Q)
    if L.shape[0] == 2:
        return np.array([L[1, 0]])
    return vee3(L)


# -- subspace split of so(k) -------------------------------------------------

@dataclass(frozen=True)
class SubspaceBases:
    """Basis h of the spatially induced parameters and basis k of their complement."""

    h: np.ndarray  # (m_Q, n_par)
    k: np.ndarray  # (n_par - m_Q, n_par)

    def skew(self, p) -> np.ndarray:
        """Skew matrix of a parameter vector in the full so(k) coordinates."""
        p = np.asarray(p, dtype=float)
        if self.h.shape[1] == 15:
            return skwr6(p)
        # 2D parameters use the cross-product layout of skw3
        return skw3(p)


def subspace_bases(dim: int) -> SubspaceBases:
    """Bases of st and of its orthogonal complement in parameter coordinates."""
    if dim == 3:
        e = np.eye(15)
        E = lambda i: e[i - 1]  # noqa: E731  1-based unit vectors
        h = np.array([
            -SQRT2 * E(9) + SQRT2 * E(13) + E(11),
            SQRT2 * E(3) - SQRT2 * E(8) - E(7),
            -SQRT2 * E(1) + SQRT2 * E(2) + E(12),
        ])
        k = np.array([
            E(4), E(5), E(6), E(10), E(14), E(15),
            E(9) + E(13), E(3) + E(8), E(1) + E(2),
            E(9) - E(13) + 2 * SQRT2 * E(11),
            E(3) - E(8) + 2 * SQRT2 * E(7),
            E(1) - E(2) + 2 * SQRT2 * E(12),
        ])
        return SubspaceBases(h, k)
    if dim == 2:
        g = np.eye(3)
        h = np.array([-SQRT2 * (g[0] + g[1])])
        k = np.array([SQRT2 * (g[0] - g[1]), g[2]])
        return SubspaceBases(h, k)
    raise ValidationError(f"dim must be 2 or 3, got {dim}")


def complement_skew(s, dim: int) -> np.ndarray:
    """Skew matrix in the complement of st from coefficients s on the k basis."""
    B = subspace_bases(dim)
    s = np.asarray(s, dtype=float)
    if s.shape != (B.k.shape[0],):
        raise ValidationError(f"expected {B.k.shape[0]} complement coefficients, got shape {s.shape}")
    return B.skew(s @ B.k)


__all__ = [
    "skw3", "vee3", "skw2", "skw4", "skwr6", "skw_upper", "vee_upper", "upper_diagonal_layout",
    "exp_so2", "exp_so3", "expm_skew", "rodrigues6", "rodrigues3", "log_rotation",
    "log_rotations", "rotation_angles", "check_rotation", "Trep", "trep", "spatial_exp",
    "spatial_log", "SubspaceBases", "subspace_bases", "complement_skew", "kelvin_dim",
    "spatial_dim",
]
