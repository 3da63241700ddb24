"""Cortical bone interpolation study.

Starting from the orthotropic bone material A, three target materials B are
formed and connected to A by Euclidean and product-metric interpolation:

* ``scaling``: the shear moduli in slots 13 and 12 (lam5, lam6) times 5,
* ``rotation``: A rotated by 60 degrees about the 2-axis,
* ``eigenstrain``: the normal-strain eigenvectors rotated by 60 degrees about
  the 2-axis inside the upper-left 3x3 block (same moduli, same orientation).

For the last two the moduli are unchanged, so the product path keeps the
determinant constant while the Euclidean path swells.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classes import SC, LieTriple
from .field import FieldSample, Grid1D, interpolate_field
from .kelvin import bone_kelvin, directional_young_modulus
from .lie import exp_so3

ROTATION_ANGLE = np.pi / 3
SCALE_FACTOR = 5.0
TRACES = ("scaling", "rotation", "eigenstrain")
KINDS = ("euclid", "product")


def bone_triple(symmetrize: str = "upper") -> LieTriple:
    """Triple of the bone Kelvin matrix in its material frame.

    V is block diagonal: eigenvectors of the normal 3x3 block (descending
    moduli) followed by the identity on the shear slots 23, 13, 12.
    """
    A = bone_kelvin(symmetrize)
    w, U = np.linalg.eigh(A[:3, :3])
    w, U = w[::-1], U[:, ::-1]
    if np.linalg.det(U) < 0:
        U[:, 2] = -U[:, 2]
    V = np.eye(6)
    V[:3, :3] = U
    lam = np.concatenate([w, np.diag(A)[3:]])
    return LieTriple(np.eye(3), V, lam, SC.ORTHO_3D)


def bone_targets(tA: LieTriple) -> dict[str, LieTriple]:
    R = exp_so3([0.0, ROTATION_ANGLE, 0.0])
    lam = tA.lam.copy()
    lam[4:] *= SCALE_FACTOR
    P = np.eye(6)
    P[:3, :3] = R
    return {
        "scaling": LieTriple(tA.Q, tA.V, lam, tA.cls),
        "rotation": LieTriple(R, tA.V, tA.lam, tA.cls),
        "eigenstrain": LieTriple(tA.Q, P @ tA.V, tA.lam, tA.cls),
    }


@dataclass
class TraceSummary:
    det_start: float
    det_end: float
    max_rel_excess: float  # (max det - max endpoint det) / det_start
    max_rel_deviation: float  # max |det(x) - det(0)| / det(0)
    swelling: bool

    @classmethod
    def from_field(cls, f: FieldSample, tol: float = 1e-6) -> "TraceSummary":
        d = f.det
        hi = max(d[0], d[-1])
        excess = float((d[1:-1].max() - hi) / d[0]) if d.size > 2 else 0.0
        return cls(float(d[0]), float(d[-1]), excess,
                   float(np.max(np.abs(d - d[0])) / d[0]), bool(excess > tol))


@dataclass
class BoneDemo:
    A: np.ndarray
    young_axes: tuple[float, float, float]
    fields: dict[tuple[str, str], FieldSample]
    summary: dict[tuple[str, str], TraceSummary] = field(default_factory=dict)

    def summary_dict(self) -> dict:
        out = {"young_modulus_axes_GPa": list(self.young_axes), "traces": {}}
        for (trace, kind), s in self.summary.items():
            out["traces"].setdefault(trace, {})[kind] = s.__dict__
        return out


def run_bone_demo(n_points: int = 101, symmetrize: str = "upper") -> BoneDemo:
    tA = bone_triple(symmetrize)
    A = tA.matrix()
    young = tuple(directional_young_modulus(A, e) for e in np.eye(3))
    grid = Grid1D.uniform(n_points)
    fields = {}
    for trace, tB in bone_targets(tA).items():
        for kind in KINDS:
            fields[(trace, kind)] = interpolate_field(tA, tB, grid, kind)
    summary = {key: TraceSummary.from_field(f) for key, f in fields.items()}
    return BoneDemo(A, young, fields, summary)


def write_bone_demo(out_dir, n_points: int = 101, symmetrize: str = "upper") -> BoneDemo:
    """Write six trace CSVs and ``summary.json`` to ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    demo = run_bone_demo(n_points, symmetrize)
    for (trace, kind), f in demo.fields.items():
        with (out / f"bone_{trace}_{kind}.csv").open("w") as fh:
            f.to_csv(fh)
    with (out / "summary.json").open("w") as fh:
        json.dump(demo.summary_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return demo


__all__ = ["bone_triple", "bone_targets", "run_bone_demo", "write_bone_demo", "BoneDemo",
           "TraceSummary", "TRACES", "KINDS"]
