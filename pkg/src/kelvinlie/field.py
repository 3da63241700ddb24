"""One-dimensional fields of Kelvin matrices on x in [0, 1].

Two kinds of field are provided: deterministic interpolation fields along a
geodesic between two endpoint materials, and random fields whose parameter
vector z(x) is Gaussian with a separable covariance

    Cov(z_a(x), z_b(y)) = rho(|x - y|) S_ab,

rho being a Matern correlation and S the cross covariance at lag zero.  The
spatial part is expanded with a discrete Karhunen-Loeve decomposition using
trapezoidal quadrature weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, kv

from .classes import LieTriple, class_spec, parse_class
from .errors import ValidationError
from .metrics import DEFAULT_WEIGHTS, MetricWeights, interpolate
from .stochastic import GenConfig, cov_factor, standard_normals, triple_from_sample, _base_factors

NEG_EIG_TOL = 1e-10


@dataclass(frozen=True)
class Grid1D:
    points: np.ndarray

    def __post_init__(self):
        x = np.array(self.points, dtype=float).ravel()
        if x.size < 2:
            raise ValidationError("a grid needs at least two points")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("grid points must be strictly increasing")
        if x[0] < 0 or x[-1] > 1:
            raise ValidationError("grid points must lie in [0, 1]")
        x.setflags(write=False)
        object.__setattr__(self, "points", x)

    @classmethod
    def uniform(cls, n: int) -> "Grid1D":
        return cls(np.linspace(0.0, 1.0, n))

    def __len__(self) -> int:
        return self.points.size

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights."""
        x = self.points
        w = np.zeros_like(x)
        dx = np.diff(x)
        w[:-1] += 0.5 * dx
        w[1:] += 0.5 * dx
        return w


@dataclass(frozen=True)
class MaternCov:
    """Matern covariance with smoothness nu, correlation length ell and variance sigma2."""

    nu: float
    ell: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not (self.nu > 0 and self.ell > 0 and self.sigma2 > 0):
            raise ValidationError(f"Matern parameters must be positive, got {self}")

    def __call__(self, h) -> np.ndarray:
        return matern_cov(h, self)

    def matrix(self, grid: Grid1D) -> np.ndarray:
        x = grid.points
        return matern_cov(np.abs(x[:, None] - x[None, :]), self)


def matern_cov(h, m: MaternCov) -> np.ndarray:
    """sigma2 2^(1-nu)/Gamma(nu) (sqrt(2 nu) h/ell)^nu K_nu(sqrt(2 nu) h/ell).

    Closed forms are used for nu = 0.5, 1.5 and 2.5.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValidationError("distances must be non-negative")
    r = h / m.ell
    if m.nu == 0.5:
        c = np.exp(-r)
    elif m.nu == 1.5:
        a = np.sqrt(3.0) * r
        c = (1.0 + a) * np.exp(-a)
    elif m.nu == 2.5:
        a = np.sqrt(5.0) * r
        c = (1.0 + a + a * a / 3.0) * np.exp(-a)
    else:
        c = matern_bessel(r, m.nu)
    return m.sigma2 * c


def matern_bessel(r, nu: float) -> np.ndarray:
    """Unit-variance Matern correlation at scaled distance r through K_nu."""
    r = np.asarray(r, dtype=float)
    a = np.sqrt(2.0 * nu) * r
    out = np.ones_like(a)
    pos = a > 0
    ap = a[pos]
    out[pos] = 2.0 ** (1.0 - nu) / gamma(nu) * ap ** nu * kv(nu, ap)
    return out


@dataclass(frozen=True)
class KLExpansion:
    """Discrete KL decomposition; columns of ``vectors`` are orthonormal in the weighted product."""

    grid: Grid1D
    eigenvalues: np.ndarray
    vectors: np.ndarray
    rank95: int

    @property
    def scalings(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)

    def reconstruct(self, rank: int | None = None) -> np.ndarray:
        r = len(self.eigenvalues) if rank is None else rank
        R = self.vectors[:, :r]
        return (R * self.eigenvalues[:r]) @ R.T

    def truncation_error(self, rank: int) -> float:
        """sqrt(sum_{l > rank} mu_l^2), the weighted Frobenius error of :meth:`reconstruct`."""
        return float(np.sqrt(np.sum(self.eigenvalues[rank:] ** 2)))

    def rank_for(self, fraction: float) -> int:
        """Smallest rank capturing ``fraction`` of the trace."""
        c = np.cumsum(self.eigenvalues)
        return int(np.searchsorted(c, fraction * c[-1] * (1 - 1e-15)) + 1)


def weighted_norm(A, grid: Grid1D) -> float:
    """Frobenius norm of W^(1/2) A W^(1/2), the operator-consistent kernel norm."""
    s = np.sqrt(grid.weights)
    return float(np.linalg.norm(s[:, None] * np.asarray(A) * s[None, :]))


def kl_decompose(grid: Grid1D, kernel) -> KLExpansion:
    """Eigen-decomposition of the covariance operator discretized on ``grid``.

    ``kernel`` is a :class:`MaternCov`, a callable of the distance, or an
    N x N kernel matrix.  The symmetric matrix W^(1/2) K W^(1/2) is
    diagonalized and eigenvectors are mapped back with W^(-1/2).
    """
    if isinstance(kernel, MaternCov):
        K = kernel.matrix(grid)
    elif callable(kernel):
        x = grid.points
        K = np.asarray(kernel(np.abs(x[:, None] - x[None, :])), dtype=float)
    else:
        K = np.asarray(kernel, dtype=float)
    N = len(grid)
    if K.shape != (N, N):
        raise ValidationError(f"kernel matrix must be {N}x{N}, got {K.shape}")
    if np.max(np.abs(K - K.T)) > 1e-12 * max(1.0, np.max(np.abs(K))):
        raise ValidationError("kernel matrix is not symmetric")
    s = np.sqrt(grid.weights)
    B = s[:, None] * K * s[None, :]
    mu, U = np.linalg.eigh(0.5 * (B + B.T))
    mu, U = mu[::-1], U[:, ::-1]
    tr = max(float(np.sum(np.abs(mu))), 1e-300)
    if mu[-1] < -NEG_EIG_TOL * tr:
        raise ValidationError(f"kernel is not positive semidefinite (eigenvalue {mu[-1]:.3e})")
    mu = np.clip(mu, 0.0, None)
    vecs = U / s[:, None]
    c = np.cumsum(mu)
    rank95 = int(np.searchsorted(c, 0.95 * c[-1] * (1 - 1e-15)) + 1)
    for a in (mu, vecs):
        a.setflags(write=False)
    return KLExpansion(grid, mu, vecs, rank95)


def kl_project(values, kl: KLExpansion, mean=0.0, rank: int | None = None) -> np.ndarray:
    """Coefficients zeta_l = mu_l^(-1/2) (r_l, f - mean)_W of a sampled field.

    ``values`` has shape (N,) or (N, n); modes with zero eigenvalue get 0.
    """
    f = np.asarray(values, dtype=float) - mean
    r = len(kl.eigenvalues) if rank is None else rank
    R = kl.vectors[:, :r]
    proj = R.T @ (kl.grid.weights[:, None] * f.reshape(f.shape[0], -1))
    mu = kl.eigenvalues[:r]
    inv = np.where(mu > 0, 1.0 / np.sqrt(np.where(mu > 0, mu, 1.0)), 0.0)
    out = inv[:, None] * proj
    return out.reshape((r,) + f.shape[1:])


@dataclass(frozen=True)
class FieldSample:
    """Kelvin matrices on a grid, with their triples and (for random fields) parameters."""

    x: np.ndarray
    matrices: np.ndarray
    triples: tuple[LieTriple, ...] | None = None
    params: np.ndarray | None = None

    @property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.matrices)

    def to_csv(self, fh, unit: str = "GPa") -> None:
        k = self.matrices.shape[1]
        iu = np.triu_indices(k)
        fh.write(f"# units: x [-], det [{unit}^{k}], lam [{unit}], C [{unit}]\n")
        cols = ["x", "det"] + [f"lam{i + 1}" for i in range(k)] + [f"C{i + 1}{j + 1}" for i, j in zip(*iu)]
        fh.write(",".join(cols) + "\n")
        for i, (x, d, M) in enumerate(zip(self.x, self.det, self.matrices)):
            lam = self.triples[i].lam if self.triples else np.sort(np.linalg.eigvalsh(M))[::-1]
            row = [x, d] + list(lam) + list(M[iu])
            fh.write(",".join(repr(float(v)) for v in row) + "\n")

    def to_jsonl(self, fh) -> None:
        from .io import triple_to_dict

        for i, (x, M) in enumerate(zip(self.x, self.matrices)):
            rec = {"x": float(x), "kelvin": M.tolist()}
            if self.triples:
                rec["triple"] = triple_to_dict(self.triples[i])
            fh.write(json.dumps(rec) + "\n")


def interpolate_field(a, b, grid: Grid1D, kind: str,
                      w: MetricWeights = DEFAULT_WEIGHTS) -> FieldSample:
    """Field x -> geodesic(a, b, x) sampled on the grid."""
    path = interpolate(a, b, kind, grid.points, w)
    triples = tuple(path.triples) if path.triples is not None else None
    return FieldSample(grid.points, path.matrices, triples)


@dataclass(frozen=True)
class FieldSpec:
    """Separable Gaussian field of parameter fluctuations.

    ``kernel`` gives the shared spatial correlation (its variance is divided
    out), ``cross_cov`` the n x n covariance of the parameters at a point.
    ``rank`` truncates the KL expansion (full rank by default).
    """

    kernel: MaternCov
    cross_cov: np.ndarray
    rank: int | None = None


def _field_factors(grid: Grid1D, spec: FieldSpec, n: int):
    S = np.array(spec.cross_cov, dtype=float)
    if S.ndim == 0:
        S = float(S) * np.eye(n)
    if S.shape != (n, n):
        raise ValidationError(f"cross covariance must be {n}x{n}, got {S.shape}")
    if np.max(np.abs(S - S.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(S))):
        raise ValidationError("cross covariance is not symmetric")
    Lc = cov_factor(0.5 * (S + S.T))
    rho = MaternCov(spec.kernel.nu, spec.kernel.ell, 1.0)
    kl = kl_decompose(grid, rho)
    r = len(grid) if spec.rank is None else int(spec.rank)
    if not 1 <= r <= len(grid):
        raise ValidationError(f"rank must lie in [1, {len(grid)}], got {r}")
    A = kl.vectors[:, :r] * kl.scalings[:r]
    return A, Lc, kl, r


def _z0_field(z0, grid: Grid1D, n: int) -> np.ndarray:
    z0 = np.asarray(z0, dtype=float)
    if z0.shape == (n,):
        return np.broadcast_to(z0, (len(grid), n))
    if z0.shape == (len(grid), n):
        return z0
    raise ValidationError(f"z0 must have shape ({n},) or ({len(grid)}, {n}), got {z0.shape}")


def sample_param_field(cls, z0, spec: FieldSpec, grid: Grid1D, seed: int, count: int,
                       start: int = 0) -> np.ndarray:
    """Parameter fields z(x_i, omega_j), shape (count, N, n).

    z~(x) = sum_l sqrt(mu_l) r_l(x) L_c zeta_l with independent standard
    normal zeta_l in R^n; realization j uses row ``start + j`` of the seed's
    normal stream, so results do not depend on how realizations are batched.
    """
    s = class_spec(cls)
    n = s.n
    A, Lc, _, r = _field_factors(grid, spec, n)
    Z0 = _z0_field(z0, grid, n)
    zeta = standard_normals(seed, start, count, r * n).reshape(count, r, n)
    out = np.empty((count, len(grid), n))
    for j in range(count):
        out[j] = Z0 + A @ zeta[j] @ Lc.T
    return out


def sample_random_field(cls, z0, spec: FieldSpec, grid: Grid1D, seed: int, count: int,
                        ordering: bool = False, ref_modulus: float = 1.0) -> list[FieldSample]:
    """Random Kelvin-matrix fields: every grid point's parameters go through the product build."""
    c = parse_class(cls)
    n = class_spec(c).n
    Z0 = _z0_field(z0, grid, n)
    cfgs = [GenConfig(c, Z0[i], 0.0, ordering, 0, ref_modulus) for i in range(len(grid))]
    bases = [_base_factors(cfg) for cfg in cfgs]
    Z = sample_param_field(c, Z0, spec, grid, seed, count)
    out = []
    for j in range(count):
        triples = tuple(triple_from_sample(cfg, z, b) for cfg, z, b in zip(cfgs, Z[j], bases))
        mats = np.array([t.matrix() for t in triples])
        out.append(FieldSample(grid.points, mats, triples, Z[j]))
    return out


def lag_correlation(values: np.ndarray, grid: Grid1D, lag: float) -> float:
    """Empirical correlation of a scalar field ensemble (count, N) at a given lag.

    All grid pairs whose separation equals ``lag`` (to 1e-9) are pooled.
    """
    x = grid.points
    f = np.asarray(values, dtype=float)
    f = f - f.mean(axis=0)
    sd = f.std(axis=0)
    num = []
    for i in range(len(x)):
        j = np.searchsorted(x, x[i] + lag - 1e-9)
        if j < len(x) and abs(x[j] - x[i] - lag) < 1e-9:
            num.append(np.mean(f[:, i] * f[:, j]) / (sd[i] * sd[j]))
    if not num:
        raise ValidationError(f"no grid pairs at lag {lag}")
    return float(np.mean(num))


__all__ = [
    "Grid1D", "MaternCov", "matern_cov", "matern_bessel", "KLExpansion", "kl_decompose",
    "kl_project", "weighted_norm", "FieldSample", "interpolate_field", "FieldSpec",
    "sample_param_field", "sample_random_field", "lag_correlation",
]
