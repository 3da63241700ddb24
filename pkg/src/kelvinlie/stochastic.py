"""Random parameter vectors and random Kelvin matrices.

A sample is z = z0 + L xi with L L^T = cov and xi standard normal.  The
fluctuation z~ = L xi acts on each factor separately:

    Q = exp(q~) exp(q0),   V = V1(p~) V0(p0),   Lambda = exp(mu0 + mu~),

so with a distribution of z~ symmetric about zero the factor means are the
deterministic parts.  For classes whose distributor is an exponential of a
skew matrix (monoclinic, orthotropic 3D, triclinic 3D) V1 is that
exponential; for the angle-parametrized classes the angles are perturbed
additively, which is the same group product.

Random numbers come from Philox streams keyed by (seed, block index) with a
fixed block size, so each sample depends only on the seed and its index and
results do not depend on the number of worker threads.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import norm

from .classes import (
    SC, LieTriple, SymmetryClass, build_eigvecs, canonical_frame, check_reduced_form, class_spec,
    is_weaker_or_equal, parse_class, spatial_rotation,
)
from .errors import ValidationError
from .lie import Trep
from .means import mean_product
from .metrics import DEFAULT_WEIGHTS, MetricWeights

BLOCK = 256
PSD_TOL = 1e-12
_GROUP_V = (SC.MONOCLINIC_3D, SC.ORTHO_3D, SC.TRICLINIC_3D)


@dataclass(frozen=True)
class GenConfig:
    """Generator configuration.

    ``z0`` is the deterministic parameter vector (q0, p0, mu0) and ``cov`` the
    covariance of the fluctuation.  With ``ordering`` the mu block is read as
    (tau_1, ..., tau_{m-1}, mu_m), see :func:`ordered_moduli`.
    ``moduli_transform`` optionally maps the Gaussian mu block of a sample
    stack to other log-moduli marginals (see :func:`point_transform`).
    """

    cls: SymmetryClass
    z0: np.ndarray
    cov: np.ndarray
    ordering: bool = False
    seed: int = 0
    ref_modulus: float = 1.0
    moduli_transform: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        cls = parse_class(self.cls)
        s = class_spec(cls)
        z0 = np.array(self.z0, dtype=float).ravel()
        if z0.size != s.n or not np.all(np.isfinite(z0)):
            raise ValidationError(f"{cls}: z0 must hold {s.n} finite values, got {z0.size}")
        cov = np.array(self.cov, dtype=float)
        if cov.ndim == 0:
            cov = float(cov) * np.eye(s.n)
        if cov.shape != (s.n, s.n):
            raise ValidationError(f"{cls}: cov must be {s.n}x{s.n}, got {cov.shape}")
        if np.max(np.abs(cov - cov.T), initial=0.0) > PSD_TOL * max(1.0, np.max(np.abs(cov))):
            raise ValidationError("cov is not symmetric")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.ref_modulus <= 0:
            raise ValidationError("ref_modulus must be positive")
        for a in (z0, cov):
            a.setflags(write=False)
        object.__setattr__(self, "cls", cls)
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "_factor", cov_factor(self.cov))

    @property
    def spec(self):
        return class_spec(self.cls)

    @property
    def factor(self) -> np.ndarray:
        return self._factor

    def to_dict(self) -> dict:
        return {
            "class": self.cls.value, "z0": self.z0.tolist(), "cov": self.cov.tolist(),
            "ordering": self.ordering, "seed": self.seed, "ref_modulus": self.ref_modulus,
            "moduli_transform": getattr(self.moduli_transform, "__name__", None),
        }

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "GenConfig":
        """Build from a JSON-style dict (angles in radians).

        ``z0`` is a flat list or an object with ``q``, ``p`` and ``mu``; the
        fluctuation is ``cov`` (matrix or scalar) or ``sigma`` (scalar or
        per-parameter standard deviations, independent).
        """
        if "class" not in d:
            raise ValidationError("config: missing field 'class'")
        c = parse_class(d["class"])
        s = class_spec(c)
        z0 = d.get("z0")
        if z0 is None:
            raise ValidationError("config: missing field 'z0'")
        if isinstance(z0, dict):
            parts = []
            for key, m in (("q", s.m_Q), ("p", s.m_V), ("mu", s.m_L)):
                v = np.asarray(z0.get(key, np.zeros(m)), dtype=float).ravel()
                if v.size != m:
                    raise ValidationError(f"config: z0.{key} must have {m} entries, got {v.size}")
                parts.append(v)
            z0 = np.concatenate(parts)
        if "cov" in d and "sigma" in d:
            raise ValidationError("config: give either 'cov' or 'sigma', not both")
        if "sigma" in d:
            sig = np.broadcast_to(np.asarray(d["sigma"], dtype=float), (s.n,))
            cov = np.diag(sig ** 2)
        else:
            cov = d.get("cov", 0.0)
        return cls(c, z0, cov, bool(d.get("ordering", False)), int(d.get("seed", 0)),
                   float(d.get("ref_modulus", 1.0)))


def cov_factor(cov) -> np.ndarray:
    """Matrix L with L L^T = cov; eigen-factor fallback for semidefinite cov."""
    cov = np.asarray(cov, dtype=float)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    w, U = np.linalg.eigh(cov)
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size and w[0] < -PSD_TOL * scale:
        raise ValidationError(f"covariance is not positive semidefinite (eigenvalue {w[0]:.3e})")
    return U * np.sqrt(np.clip(w, 0.0, None))


def standard_normals(seed: int, start: int, count: int, n: int) -> np.ndarray:
    """Rows start .. start+count-1 of the standard normal stream of ``seed``."""
    out = np.empty((count, n))
    i = start
    while i < start + count:
        b = i // BLOCK
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(b,))))
        block = rng.standard_normal((BLOCK, n))
        lo = i - b * BLOCK
        m = min(BLOCK - lo, start + count - i)
        out[i - start:i - start + m] = block[lo:lo + m]
        i += m
    return out


def sample_params(cfg: GenConfig, count: int, start: int = 0) -> np.ndarray:
    """Parameter vectors z_i = z0 + L xi_i, shape (count, n)."""
    if count < 0:
        raise ValidationError("count must be non-negative")
    xi = standard_normals(cfg.seed, start, count, cfg.spec.n)
    L = cfg.factor
    out = np.empty_like(xi)
    # row-wise reduction keeps each sample independent of the batch shape
    for i in range(0, count, BLOCK):
        x = xi[i:i + BLOCK]
        out[i:i + BLOCK] = cfg.z0 + np.sum(x[:, None, :] * L[None, :, :], axis=-1)
    return out


def ordered_moduli(mu_last, tau) -> np.ndarray:
    """Strictly decreasing moduli lam_k = lam_{k+1} + exp(tau_k), lam_m = exp(mu_m).

    Works on stacks: ``tau`` has shape (..., m-1) and ``mu_last`` shape (...).
    Ordering holds exactly as long as exp(tau_k) is not lost to rounding
    against lam_{k+1}.
    """
    mu_last = np.asarray(mu_last, dtype=float)
    tau = np.asarray(tau, dtype=float)
    inc = np.concatenate([np.exp(tau), np.exp(mu_last)[..., None]], axis=-1)
    return np.flip(np.cumsum(np.flip(inc, -1), axis=-1), -1)


def sample_ordered_moduli(mu_last: float, tau, fluctuations=None) -> np.ndarray:
    """Ordered moduli from base parameters plus optional fluctuation rows.

    ``fluctuations`` has shape (count, m) and perturbs (tau, mu_m); the result
    then has shape (count, m).
    """
    base = np.concatenate([np.asarray(tau, dtype=float).ravel(), [float(mu_last)]])
    x = base if fluctuations is None else base + np.asarray(fluctuations, dtype=float)
    return ordered_moduli(x[..., -1], x[..., :-1])


def point_transform(target, mean: float, std: float, name: str | None = None):
    """Map Gaussian log-moduli to log-moduli with marginal ``target`` for the modulus.

    ``target`` is a frozen ``scipy.stats`` distribution of the modulus itself;
    a Gaussian value x is sent to log(F_target^-1(Phi((x - mean) / std))).
    """
    if std <= 0:
        raise ValidationError("std must be positive")

    def transform(mu: np.ndarray) -> np.ndarray:
        u = norm.cdf((np.asarray(mu) - mean) / std)
        return np.log(target.ppf(u))

    transform.__name__ = name or f"point_transform[{target.dist.name}]"
    return transform


def _base_factors(cfg: GenConfig) -> tuple[np.ndarray, np.ndarray]:
    q0, p0, _ = cfg.spec.split(cfg.z0)
    return spatial_rotation(cfg.cls, q0), build_eigvecs(cfg.cls, p0)


def triple_from_sample(cfg: GenConfig, z: np.ndarray, base=None) -> LieTriple:
    """Factor-wise product triple of one sample z = z0 + z~.

    ``base`` optionally carries the precomputed deterministic factors (Q0, V0).
    """
    s = cfg.spec
    Q0, V0 = _base_factors(cfg) if base is None else base
    q0, p0, _ = s.split(cfg.z0)
    q, p, mu = s.split(z)
    qt, pt = q - q0, p - p0
    Q = spatial_rotation(s.cls, qt) @ Q0 if np.any(qt) else Q0
    if s.cls in _GROUP_V:
        V = build_eigvecs(s.cls, pt) @ V0 if np.any(pt) else V0
    else:
        V = build_eigvecs(s.cls, p)
    if cfg.moduli_transform is not None:
        mu = np.asarray(cfg.moduli_transform(mu), dtype=float)
    if cfg.ordering:
        vals = ordered_moduli(mu[-1], mu[:-1])
    else:
        vals = np.exp(mu)
    lam = cfg.ref_modulus * vals[list(s.layout)]
    if s.cls in (SC.TRICLINIC_2D, SC.TRICLINIC_3D):
        V = Trep(canonical_frame((V * lam) @ V.T, s.cls)) @ V
    return LieTriple(Q, V, lam, s.cls)


@dataclass(frozen=True)
class SampleBatch:
    """Immutable batch: parameters (N, n), matrices (N, k, k) and triples."""

    params: np.ndarray
    matrices: np.ndarray
    triples: tuple[LieTriple, ...]
    seed: int
    config_hash: str
    cls: SymmetryClass

    def __len__(self) -> int:
        return len(self.triples)

    def to_jsonl(self, fh) -> None:
        from .io import triple_to_dict

        for i, (z, C, t) in enumerate(zip(self.params, self.matrices, self.triples)):
            rec = {"index": i, "class": self.cls.value, "z": z.tolist(),
                   "kelvin": C.tolist(), "triple": triple_to_dict(t)}
            fh.write(json.dumps(rec) + "\n")

    def to_csv(self, fh) -> None:
        k = self.matrices.shape[1]
        iu = np.triu_indices(k)
        fh.write(f"# class {self.cls.value}, seed {self.seed}, config {self.config_hash}, units GPa\n")
        fh.write(",".join(["index"] + [f"C{i + 1}{j + 1}" for i, j in zip(*iu)]) + "\n")
        for i, C in enumerate(self.matrices):
            fh.write(",".join([str(i)] + [repr(float(x)) for x in C[iu]]) + "\n")


def _build_block(cfg: GenConfig, start: int, count: int):
    Z = sample_params(cfg, count, start)
    base = _base_factors(cfg)
    triples = [triple_from_sample(cfg, z, base) for z in Z]
    return Z, triples


def random_kelvin(cfg: GenConfig, count: int, workers: int | None = None) -> SampleBatch:
    """Random Kelvin matrices of class ``cfg.cls``.

    Samples are generated in blocks of ``BLOCK`` indices; with ``workers`` > 1
    blocks run on a thread pool.  The batch is identical for every worker count.
    """
    if count < 1:
        raise ValidationError("count must be positive")
    starts = list(range(0, count, BLOCK))
    sizes = [min(BLOCK, count - s) for s in starts]
    if workers and workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda a: _build_block(cfg, *a), zip(starts, sizes)))
    else:
        parts = [_build_block(cfg, s, m) for s, m in zip(starts, sizes)]
    Z = np.concatenate([p[0] for p in parts])
    triples = tuple(t for p in parts for t in p[1])
    mats = np.array([t.matrix() for t in triples])
    for a in (Z, mats):
        a.setflags(write=False)
    return SampleBatch(Z, mats, triples, cfg.seed, cfg.hash(), cfg.cls)


@dataclass
class SymmetryReport:
    mean_class: SymmetryClass
    member_class: SymmetryClass
    count: int
    mean_violation: float
    mean_tol: float
    member_violation: float
    passed: bool
    mean_triple: LieTriple | None = None


def ensemble_mean_symmetry_check(batch: SampleBatch, mean_class, member_class=None,
                                 tol_scale: float = 10.0, member_tol: float = 1e-9,
                                 w: MetricWeights = DEFAULT_WEIGHTS) -> SymmetryReport:
    """Check that the product mean of a batch has (at least) the symmetry ``mean_class``.

    ``mean_class`` must be ``member_class`` or stronger in the Hasse order.
    The mean is tested in its own reduced frame against a tolerance
    ``tol_scale / sqrt(count)`` (relative violation); members are tested at
    ``member_tol``.
    """
    member_class = parse_class(member_class or batch.cls)
    mean_class = parse_class(mean_class)
    if not is_weaker_or_equal(member_class, mean_class):
        raise ValidationError(f"{mean_class} is not {member_class} or a stronger class")
    member_viol = max(check_reduced_form(t.reduced(), member_class, reduce=True)[1]
                      for t in batch.triples)
    res = mean_product(batch.triples, w=w)
    tol = tol_scale / np.sqrt(len(batch))
    _, mean_viol = check_reduced_form(res.triple.reduced(), mean_class, reduce=True)
    passed = bool(mean_viol <= tol and member_viol <= member_tol)
    return SymmetryReport(mean_class, member_class, len(batch), mean_viol, tol, member_viol,
                          passed, res.triple)


__all__ = [
    "GenConfig", "SampleBatch", "SymmetryReport", "cov_factor", "standard_normals",
    "sample_params", "ordered_moduli", "sample_ordered_moduli", "point_transform",
    "triple_from_sample", "random_kelvin", "ensemble_mean_symmetry_check",
]
