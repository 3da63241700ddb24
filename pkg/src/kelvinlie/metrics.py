"""Distances and geodesics for Kelvin matrices.

Three kinds are supported:

* ``euclid``: Frobenius distance and straight-line interpolation,
* ``log_euclid``: Frobenius distance of matrix logarithms, for comparison,
* ``product``: the product distance on triples (Q, V, Lambda),

      d^2 = |log L1 - log L2|_F^2 + c_V th_R(Q1, Q2)^2 + c_T th_R(V1, V2)^2,

  with th_R(A, B) = |log(A B^T)|_F.  Its geodesics move each factor along a
  one-parameter subgroup, so the moduli, and hence the determinant, only
  change through Lambda.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .classes import LieTriple
from .errors import ValidationError
from .lie import expm_skew, log_rotation

KINDS = ("euclid", "product", "log_euclid")
_ALIASES = {"euclidean": "euclid", "log_euclidean": "log_euclid", "logeuclid": "log_euclid"}


def normalize_kind(kind: str) -> str:
    """Canonical metric kind name; accepts the long spellings as aliases."""
    k = _ALIASES.get(str(kind).lower(), str(kind).lower())
    if k not in KINDS:
        raise ValidationError(f"unknown metric kind {kind!r}; expected one of {KINDS}")
    return k


@dataclass(frozen=True)
class MetricWeights:
    """Positive weights of the spatial (c_V) and strain-space (c_T) rotation terms."""

    c_V: float = 1.0
    c_T: float = 1.0

    def __post_init__(self):
        if not (self.c_V > 0 and self.c_T > 0):
            raise ValidationError(f"metric weights must be positive, got c_V={self.c_V}, c_T={self.c_T}")


DEFAULT_WEIGHTS = MetricWeights()


def _same_dim(A, B) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValidationError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A, B


def dist_euclid(C1, C2) -> float:
    C1, C2 = _same_dim(C1, C2)
    return float(np.linalg.norm(C1 - C2))


def _spd_log(C) -> np.ndarray:
    w, U = np.linalg.eigh(C)
    if w[0] <= 0:
        raise ValidationError("log-Euclidean distance needs SPD matrices")
    return (U * np.log(w)) @ U.T


def _spd_exp(S) -> np.ndarray:
    w, U = np.linalg.eigh(0.5 * (S + S.T))
    return (U * np.exp(w)) @ U.T


def dist_log_euclid(C1, C2) -> float:
    C1, C2 = _same_dim(C1, C2)
    return float(np.linalg.norm(_spd_log(C1) - _spd_log(C2)))


def dist_rot(Q1, Q2) -> float:
    """Bi-invariant distance |log(Q1 Q2^T)|_F on SO(n)."""
    Q1, Q2 = _same_dim(Q1, Q2)
    return float(np.linalg.norm(log_rotation(Q1 @ Q2.T)))


def dist_logdiag(L1, L2) -> float:
    """Log-Euclidean distance |log L1 - log L2|_F of positive diagonals (vectors or matrices)."""
    l1 = _diag(L1)
    l2 = _diag(L2)
    if l1.shape != l2.shape:
        raise ValidationError(f"dimension mismatch: {l1.shape} vs {l2.shape}")
    return float(np.linalg.norm(np.log(l1) - np.log(l2)))


def _diag(L) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    v = np.diag(L) if L.ndim == 2 else L.ravel()
    if np.any(v <= 0):
        raise ValidationError(f"diagonal entries must be positive, got {v}")
    return v


def dist_product(t1: LieTriple, t2: LieTriple, w: MetricWeights = DEFAULT_WEIGHTS) -> float:
    if t1.k != t2.k:
        raise ValidationError(f"triples of different size: {t1.k} vs {t2.k}")
    th_l = dist_logdiag(t1.lam, t2.lam)
    th_q = dist_rot(t1.Q, t2.Q)
    th_v = dist_rot(t1.V, t2.V)
    return float(np.sqrt(th_l ** 2 + w.c_V * th_q ** 2 + w.c_T * th_v ** 2))


def _groups(lam, rtol: float = 1e-12) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    order = np.argsort(lam)
    labels = np.empty(lam.size, dtype=int)
    g = -1
    prev = None
    for i in order:
        if prev is None or abs(lam[i] - lam[prev]) > rtol * abs(lam[i]):
            g += 1
        labels[i] = g
        prev = i
    for i, g in enumerate(labels):
        groups.setdefault(int(g), []).append(i)
    return list(groups.values())


def dist_product_canonical(t1: LieTriple, t2: LieTriple, w: MetricWeights = DEFAULT_WEIGHTS) -> float:
    """Product distance minimised over the finite representation ambiguity of t2.

    The ambiguity set consists of column sign flips of V2 and permutations of
    V2 columns within groups of equal eigenvalues of Lambda2 (which leave
    Lambda2 unchanged).  Only candidates with det(V1 V2'^T) = +1 are admitted.
    V2 may be improper (det -1) here, e.g. after a single column flip.
    """
    if t1.k != t2.k:
        raise ValidationError(f"triples of different size: {t1.k} vs {t2.k}")
    k = t1.k
    th_l = dist_logdiag(t1.lam, t2.lam)
    th_q = dist_rot(t1.Q, t2.Q)
    perms_per_group = [list(itertools.permutations(g)) for g in _groups(t2.lam)]
    det1 = np.sign(np.linalg.det(t1.V))
    best = np.inf
    for choice in itertools.product(*perms_per_group):
        perm = np.arange(k)
        for g, pg in zip(_groups(t2.lam), choice):
            perm[list(g)] = pg
        Vp = t2.V[:, perm]
        for signs in itertools.product((1.0, -1.0), repeat=k):
            Vs = Vp * np.array(signs)
            if np.sign(np.linalg.det(Vs)) != det1:
                continue
            M = t1.V @ Vs.T
            try:
                th_v = float(np.linalg.norm(log_rotation(M)))
            except ValidationError:
                continue
            best = min(best, th_v)
    if not np.isfinite(best):
        raise ValidationError("no admissible representation in the ambiguity set")
    return float(np.sqrt(th_l ** 2 + w.c_V * th_q ** 2 + w.c_T * best ** 2))


def rotation_geodesic(Q1, Q2, t: float) -> np.ndarray:
    """exp(t log(Q2 Q1^T)) Q1."""
    Q1, Q2 = _same_dim(Q1, Q2)
    return expm_skew(t * log_rotation(Q2 @ Q1.T)) @ Q1


def triple_geodesic(t1: LieTriple, t2: LieTriple, t: float) -> LieTriple:
    """Point at parameter t on the product geodesic, factor by factor."""
    Q = rotation_geodesic(t1.Q, t2.Q, t)
    V = rotation_geodesic(t1.V, t2.V, t)
    lam = np.exp((1 - t) * np.log(t1.lam) + t * np.log(t2.lam))
    return LieTriple(Q, V, lam, t1.cls)


def _as_matrix(x) -> np.ndarray:
    return x.matrix() if isinstance(x, LieTriple) else np.asarray(x, dtype=float)


def geodesic(a, b, kind: str, t: float, w: MetricWeights = DEFAULT_WEIGHTS):
    """Kelvin matrix at parameter t in [0, 1] between endpoints a and b.

    ``product`` requires :class:`LieTriple` endpoints and returns the matrix;
    the other kinds accept matrices or triples.  The weights do not change
    product geodesics (they only scale the factor distances).
    """
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"t must lie in [0, 1], got {t}")
    kind = normalize_kind(kind)
    if kind == "euclid":
        A, B = _same_dim(_as_matrix(a), _as_matrix(b))
        return (1 - t) * A + t * B
    if kind == "log_euclid":
        A, B = _same_dim(_as_matrix(a), _as_matrix(b))
        return _spd_exp((1 - t) * _spd_log(A) + t * _spd_log(B))
    if kind == "product":
        if not (isinstance(a, LieTriple) and isinstance(b, LieTriple)):
            raise ValidationError("product geodesic needs LieTriple endpoints")
        return triple_geodesic(a, b, t).matrix()
    raise ValidationError(f"unknown metric kind {kind!r}; expected one of {KINDS}")


def distance(a, b, kind: str, w: MetricWeights = DEFAULT_WEIGHTS) -> float:
    kind = normalize_kind(kind)
    if kind == "euclid":
        return dist_euclid(_as_matrix(a), _as_matrix(b))
    if kind == "log_euclid":
        return dist_log_euclid(_as_matrix(a), _as_matrix(b))
    if kind == "product":
        return dist_product(a, b, w)
    raise ValidationError(f"unknown metric kind {kind!r}; expected one of {KINDS}")


@dataclass
class InterpolationPath:
    """Sampled geodesic: parameters t (strictly increasing) and matrices."""

    kind: str
    t: np.ndarray
    matrices: np.ndarray
    triples: list | None = None
    spd_ok: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.matrices)

    def to_csv(self, fh, unit: str = "GPa") -> None:
        """Write columns t, det, C11..Ckk (upper triangle, row-major) after a unit line."""
        k = self.matrices.shape[1]
        iu = np.triu_indices(k)
        names = [f"C{i + 1}{j + 1}" for i, j in zip(*iu)]
        fh.write(f"# units: t [-], det [{unit}^{k}], C [{unit}]\n")
        fh.write(",".join(["t", "det"] + names) + "\n")
        for t, d, M in zip(self.t, self.det, self.matrices):
            row = [t, d] + list(M[iu])
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def interpolate(a, b, kind: str, ts, w: MetricWeights = DEFAULT_WEIGHTS) -> InterpolationPath:
    """Evaluate the geodesic at the parameters ``ts``.

    Euclidean paths are checked for positive definiteness at every sample;
    a failure is recorded in ``spd_ok`` rather than raised.
    """
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or ts.size < 1 or np.any(np.diff(ts) <= 0):
        raise ValidationError("interpolation parameters must be strictly increasing")
    if ts[0] < 0 or ts[-1] > 1:
        raise ValidationError("interpolation parameters must lie in [0, 1]")
    kind = normalize_kind(kind)
    triples = None
    if kind == "product":
        if not (isinstance(a, LieTriple) and isinstance(b, LieTriple)):
            raise ValidationError("product interpolation needs LieTriple endpoints")
        triples = [triple_geodesic(a, b, t) for t in ts]
        mats = np.array([tr.matrix() for tr in triples])
    else:
        mats = np.array([geodesic(a, b, kind, t, w) for t in ts])
    spd_ok = bool(all(np.linalg.eigvalsh(M)[0] > 0 for M in mats))
    return InterpolationPath(kind, ts, mats, triples, spd_ok)


__all__ = [
    "KINDS", "normalize_kind", "MetricWeights", "DEFAULT_WEIGHTS", "dist_euclid", "dist_log_euclid", "dist_rot",
    "dist_logdiag", "dist_product", "dist_product_canonical", "rotation_geodesic",
    "triple_geodesic", "geodesic", "distance", "InterpolationPath", "interpolate",
]
