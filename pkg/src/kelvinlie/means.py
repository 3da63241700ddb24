"""Weighted Frechet means of Kelvin-matrix ensembles.

The product distance is a weighted sum of squared factor distances, so its
Frechet functional separates: the mean triple consists of the rotation means
of the Q and V factors and the geometric mean of the moduli, independently of
the weights c_V and c_T.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classes import LieTriple
from .errors import ConvergenceError, ValidationError
from .kelvin import check_spd
from .lie import check_rotation, expm_skew, log_rotations
from .metrics import DEFAULT_WEIGHTS, MetricWeights, _spd_exp, _spd_log, dist_product

WEIGHT_TOL = 1e-12
# beyond this many members the initial guess uses the chordal proxy
EXACT_INIT_MAX = 256


@dataclass
class MeanResult:
    """Frechet mean with its variance and solver diagnostics."""

    mean: np.ndarray
    variance: float
    iterations: int = 0
    converged: bool = True
    triple: LieTriple | None = None
    grad_norm: float = 0.0
    spd_ok: bool = True


def check_weights(weights, count: int, normalize: bool = False) -> np.ndarray:
    """Validate ensemble weights; ``None`` means uniform."""
    if count < 1:
        raise ValidationError("ensemble must be non-empty")
    if weights is None:
        return np.full(count, 1.0 / count)
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != count:
        raise ValidationError(f"got {w.size} weights for {count} members")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ValidationError("weights must be finite and positive")
    total = w.sum()
    if normalize:
        return w / total
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ValidationError(f"weights must sum to 1 (sum is {total!r})")
    return w


def tree_sum(x: np.ndarray) -> np.ndarray:
    """Sum along axis 0 by pairwise reduction; the order depends only on the length."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] == 0:
        return np.zeros(x.shape[1:])
    while x.shape[0] > 1:
        if x.shape[0] % 2:
            x = np.concatenate([x, np.zeros((1,) + x.shape[1:])])
        x = x[0::2] + x[1::2]
    return x[0]


def _batched_logs(Qs: np.ndarray, workers: int | None, chunk: int = 1024) -> np.ndarray:
    if not workers or workers <= 1 or len(Qs) <= chunk:
        return log_rotations(Qs)
    parts = [Qs[i:i + chunk] for i in range(0, len(Qs), chunk)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return np.concatenate(list(ex.map(log_rotations, parts)))


def _geodesic_sq(Qs: np.ndarray, Q: np.ndarray, workers=None) -> np.ndarray:
    """Squared rotation distances |log(Q_j Q^T)|_F^2."""
    L = _batched_logs(Qs @ Q.T, workers)
    return np.sum(L * L, axis=(1, 2))


def _initial_index(Qs: np.ndarray, w: np.ndarray) -> int:
    N = len(Qs)
    if N <= EXACT_INIT_MAX:
        scores = np.array([w @ _geodesic_sq(Qs, Q) for Q in Qs])
    else:
        M = tree_sum(w[:, None, None] * Qs)
        scores = -np.einsum("nij,ij->n", Qs, M)
    return int(np.argmin(scores))


def mean_rotation(Qs, weights=None, tol: float = 1e-11, max_iter: int = 200,
                  workers: int | None = None) -> tuple[np.ndarray, int, float]:
    """Karcher mean of rotations under the bi-invariant distance.

    Iterates Q <- exp(sum_j w_j log(Q_j Q^T)) Q from the member with the
    smallest weighted sum of squared distances (a chordal proxy is used for
    more than ``EXACT_INIT_MAX`` members).  Returns (mean, iterations,
    gradient norm).  Raises :class:`ValidationError` when the members do not
    lie in a geodesic ball of radius pi/2 around the starting member and
    :class:`ConvergenceError` when ``max_iter`` is exhausted.
    """
    Qs = np.asarray(Qs, dtype=float)
    if Qs.ndim != 3 or Qs.shape[1] != Qs.shape[2]:
        raise ValidationError(f"expected a stack of square matrices, got shape {Qs.shape}")
    w = check_weights(weights, len(Qs))
    for i, Q in enumerate(Qs):
        check_rotation(Q, f"member {i}")
    Q = Qs[_initial_index(Qs, w)].copy()
    # Riemannian distance is |log|_F / sqrt(2), the largest plane angle for one plane
    radius = np.sqrt(_geodesic_sq(Qs, Q, workers).max() / 2.0)
    if radius >= np.pi / 2:
        raise ValidationError(
            f"ensemble too dispersed for a unique mean (radius {radius:.4f} >= pi/2)")
    grad = np.inf
    for it in range(1, max_iter + 1):
        L = _batched_logs(Qs @ Q.T, workers)
        G = tree_sum(w[:, None, None] * L)
        grad = float(np.linalg.norm(G))
        if grad <= tol:
            return Q, it, grad
        Q = expm_skew(G) @ Q
    raise ConvergenceError(f"Karcher iteration did not converge in {max_iter} steps (gradient {grad:.3e})")


def mean_logdiag(lams, weights=None) -> np.ndarray:
    """Weighted geometric mean exp(sum_j w_j log lam_j) of positive diagonals."""
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 2:
        raise ValidationError(f"expected a stack of diagonals, got shape {lams.shape}")
    if np.any(lams <= 0):
        raise ValidationError("diagonal entries must be positive")
    w = check_weights(weights, len(lams))
    return np.exp(tree_sum(w[:, None] * np.log(lams)))


def _as_matrices(items) -> np.ndarray:
    mats = [it.matrix() if isinstance(it, LieTriple) else np.asarray(it, dtype=float) for it in items]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise ValidationError(f"ensemble members have mixed shapes {sorted(shapes)}")
    return np.array(mats)


def mean_euclid(items, weights=None) -> MeanResult:
    """Weighted arithmetic mean; a non-SPD result is flagged in ``spd_ok``."""
    C = _as_matrices(items)
    w = check_weights(weights, len(C))
    M = tree_sum(w[:, None, None] * C)
    M = 0.5 * (M + M.T)
    var = float(w @ np.sum((C - M) ** 2, axis=(1, 2)))
    spd_ok = bool(np.linalg.eigvalsh(M)[0] > 0)
    return MeanResult(M, var, 1, True, spd_ok=spd_ok)


def mean_log_euclid(items, weights=None) -> MeanResult:
    """Weighted mean exp(sum_j w_j log C_j) of the log-Euclidean comparison metric."""
    C = _as_matrices(items)
    w = check_weights(weights, len(C))
    logs = np.array([_spd_log(check_spd(c)) for c in C])
    S = tree_sum(w[:, None, None] * logs)
    var = float(w @ np.sum((logs - S) ** 2, axis=(1, 2)))
    return MeanResult(_spd_exp(S), var, 1, True)


def product_variance(center: LieTriple, items, weights, w: MetricWeights = DEFAULT_WEIGHTS) -> float:
    """Frechet functional sum_j w_j d_E(center, item_j)^2."""
    return float(sum(wj * dist_product(center, t, w) ** 2 for wj, t in zip(weights, items)))


def mean_product(items, weights=None, w: MetricWeights = DEFAULT_WEIGHTS, tol: float = 1e-11,
                 max_iter: int = 200, workers: int | None = None) -> MeanResult:
    """Frechet mean of triples under the product distance, factor by factor."""
    items = list(items)
    if not items or not all(isinstance(t, LieTriple) for t in items):
        raise ValidationError("product mean needs a non-empty list of LieTriple members")
    if len({t.k for t in items}) != 1:
        raise ValidationError("ensemble members have mixed dimensions")
    wt = check_weights(weights, len(items))
    Q, it_q, g_q = mean_rotation(np.array([t.Q for t in items]), wt, tol, max_iter, workers)
    V, it_v, g_v = mean_rotation(np.array([t.V for t in items]), wt, tol, max_iter, workers)
    lam = mean_logdiag(np.array([t.lam for t in items]), wt)
    triple = LieTriple(Q, V, lam, items[0].cls)
    var = _product_variance_fast(triple, items, wt, w, workers)
    return MeanResult(triple.matrix(), var, max(it_q, it_v), True, triple, max(g_q, g_v))


def _product_variance_fast(center: LieTriple, items, wt, w: MetricWeights, workers=None) -> float:
    dq = _geodesic_sq(np.array([t.Q for t in items]), center.Q, workers)
    dv = _geodesic_sq(np.array([t.V for t in items]), center.V, workers)
    dl = np.sum((np.log(np.array([t.lam for t in items])) - np.log(center.lam)) ** 2, axis=1)
    return float(tree_sum(wt * (dl + w.c_V * dq + w.c_T * dv)))


def frechet_mean(items, kind: str, weights=None, w: MetricWeights = DEFAULT_WEIGHTS,
                 tol: float = 1e-11, max_iter: int = 200, workers: int | None = None) -> MeanResult:
    """Dispatch on the metric kind (``euclid``, ``log_euclid`` or ``product``)."""
    from .metrics import normalize_kind

    kind = normalize_kind(kind)
    if kind == "euclid":
        return mean_euclid(items, weights)
    if kind == "log_euclid":
        return mean_log_euclid(items, weights)
    return mean_product(items, weights, w, tol, max_iter, workers)


__all__ = [
    "MeanResult", "check_weights", "tree_sum", "mean_rotation", "mean_logdiag", "mean_euclid",
    "mean_log_euclid", "mean_product", "product_variance", "frechet_mean",
]
