"""Command-line interface.

Angles given as flags are in degrees; JSON config files use radians.
Exit codes: 0 success, 2 invalid input, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classes import (
    CLASS_SPECS, LieTriple, build_full, class_spec, hasse_parents, parse_class,
    triple_from_reduced,
)
from .errors import ConvergenceError, ValidationError
from .field import FieldSpec, Grid1D, MaternCov, interpolate_field, sample_random_field
from .io import dumps, item_from_json, load_json, triple_to_dict
from .kelvin import direction_from_angles, directional_young_modulus
from .means import frechet_mean
from .metrics import MetricWeights, normalize_kind
from .stochastic import GenConfig, random_kelvin


def _floats(text: str | None) -> np.ndarray:
    if text is None or text.strip() == "":
        return np.zeros(0)
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _weights(args) -> MetricWeights:
    return MetricWeights(args.cv, args.ct)


def _fmt(args, default: str) -> str:
    return args.format or default


# -- subcommands -----------------------------------------------------------------

def cmd_classes(args) -> None:
    rows = []
    for c, s in CLASS_SPECS.items():
        rows.append({"class": c.value, "dim": s.dim, "m_Q": s.m_Q, "m_V": s.m_V, "m_L": s.m_L,
                     "n": s.n, "parents": [p.value for p in hasse_parents(c)]})
    with _output(args.out) as fh:
        if _fmt(args, "csv") == "json":
            fh.write(dumps(rows))
        else:
            fh.write("class,dim,m_Q,m_V,m_L,n,parents\n")
            for r in rows:
                fh.write(f"{r['class']},{r['dim']},{r['m_Q']},{r['m_V']},{r['m_L']},{r['n']},"
                         f"{' '.join(r['parents'])}\n")


def _build_z(args) -> tuple[str, np.ndarray]:
    if args.config:
        cfg = load_json(args.config)
        if not isinstance(cfg, dict):
            raise ValidationError(f"{args.config}: top level must be an object")
        g = GenConfig.from_dict(cfg)
        return g.cls, g.z0
    if not args.cls:
        raise ValidationError("build needs --config or --class")
    s = class_spec(args.cls)
    q = np.deg2rad(_floats(args.q))
    p = np.deg2rad(_floats(args.p))
    if args.moduli is not None and args.mu is not None:
        raise ValidationError("give either --mu or --moduli, not both")
    mu = np.log(_floats(args.moduli)) if args.moduli is not None else _floats(args.mu)
    for name, v, m in (("--q", q, s.m_Q), ("--p", p, s.m_V), ("--mu/--moduli", mu, s.m_L)):
        if v.size != m:
            raise ValidationError(f"{s.cls}: {name} needs {m} values, got {v.size}")
    return s.cls, np.concatenate([q, p, mu])


def build_record(cls, z) -> dict:
    C, t = build_full(cls, z)
    return {"class": class_spec(cls).cls.value, "z": np.asarray(z).tolist(), "kelvin": C.tolist(),
            "triple": triple_to_dict(t), "det": float(np.linalg.det(C)),
            "eigenvalues": np.sort(np.linalg.eigvalsh(C))[::-1].tolist()}


def cmd_build(args) -> None:
    cls, z = _build_z(args)
    rec = build_record(cls, z)
    with _output(args.out) as fh:
        if _fmt(args, "json") == "csv":
            k = len(rec["kelvin"])
            iu = np.triu_indices(k)
            fh.write(",".join(f"C{i + 1}{j + 1}" for i, j in zip(*iu)) + "\n")
            fh.write(",".join(repr(float(v)) for v in np.array(rec["kelvin"])[iu]) + "\n")
        else:
            fh.write(dumps(rec))


def _gen_config(args) -> GenConfig:
    cfg = load_json(args.config)
    if not isinstance(cfg, dict):
        raise ValidationError(f"{args.config}: top level must be an object")
    if args.seed is not None:
        cfg = dict(cfg, seed=args.seed)
    if args.cls is not None:
        cfg = dict(cfg, **{"class": args.cls})
    try:
        return GenConfig.from_dict(cfg)
    except ValidationError as exc:
        raise ValidationError(f"{args.config}: {exc}") from None


def cmd_sample(args) -> None:
    cfg = _gen_config(args)
    batch = random_kelvin(cfg, args.count, workers=args.workers)
    with _output(args.out) as fh:
        if _fmt(args, "json") == "csv":
            batch.to_csv(fh)
        else:
            batch.to_jsonl(fh)


def _as_triple(item, args, reference=None):
    if isinstance(item, LieTriple):
        return item
    if not args.cls:
        raise ValidationError("raw Kelvin matrices need --class for the product metric")
    return triple_from_reduced(item, args.cls, reference)


def cmd_interpolate(args) -> None:
    a = item_from_json(load_json(args.a), str(args.a))
    b = item_from_json(load_json(args.b), str(args.b))
    kind = normalize_kind(args.metric)
    if kind == "product":
        a = _as_triple(a, args)
        b = _as_triple(b, args, a)
    f = interpolate_field(a, b, Grid1D.uniform(args.points), kind, _weights(args))
    with _output(args.out) as fh:
        if _fmt(args, "csv") == "json":
            f.to_jsonl(fh)
        else:
            f.to_csv(fh)


def cmd_mean(args) -> None:
    data = load_json(args.input)
    weights = None
    if isinstance(data, dict):
        if "items" not in data:
            raise ValidationError(f"{args.input}: missing field 'items'")
        weights = data.get("weights")
        data = data["items"]
    if not isinstance(data, list) or not data:
        raise ValidationError(f"{args.input}: expected a non-empty array of items")
    items = [item_from_json(obj, f"{args.input}: items[{i}]") for i, obj in enumerate(data)]
    kind = normalize_kind(args.metric)
    if kind == "product":
        ref = None
        triples = []
        for i, it in enumerate(items):
            try:
                t = _as_triple(it, args, ref)
            except ValidationError as exc:
                raise ValidationError(f"{args.input}: items[{i}]: {exc}") from None
            ref = ref or t
            triples.append(t)
        items = triples
    if weights is not None:
        from .means import check_weights

        weights = check_weights(weights, len(items), normalize=True)
    res = frechet_mean(items, kind, weights, _weights(args), tol=args.tol)
    rec = {"metric": kind, "mean": res.mean.tolist(), "variance": res.variance,
           "iterations": res.iterations, "converged": res.converged,
           "grad_norm": res.grad_norm, "spd": res.spd_ok}
    if res.triple is not None:
        rec["triple"] = triple_to_dict(res.triple)
    with _output(args.out) as fh:
        fh.write(dumps(rec))


def cmd_field(args) -> None:
    cfg = load_json(args.config)
    if not isinstance(cfg, dict):
        raise ValidationError(f"{args.config}: top level must be an object")
    where = str(args.config)
    for key in ("class", "z0", "kernel"):
        if key not in cfg:
            raise ValidationError(f"{where}: missing field '{key}'")
    g = GenConfig.from_dict({k: cfg[k] for k in ("class", "z0", "ordering", "ref_modulus") if k in cfg})
    kern = cfg["kernel"]
    try:
        kernel = MaternCov(float(kern["nu"]), float(kern["ell"]))
    except (KeyError, TypeError):
        raise ValidationError(f"{where}: kernel needs numeric 'nu' and 'ell'") from None
    n = g.spec.n
    if "sigma" in cfg:
        cross = np.diag(np.broadcast_to(np.asarray(cfg["sigma"], dtype=float), (n,)) ** 2)
    else:
        cross = np.asarray(cfg.get("cross_cov", 0.0), dtype=float)
    spec = FieldSpec(kernel, cross, cfg.get("rank"))
    grid = Grid1D.uniform(int(cfg.get("points", args.points)))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    count = int(cfg.get("count", args.count))
    fields = sample_random_field(g.cls, g.z0, spec, grid, seed, count, g.ordering, g.ref_modulus)
    with _output(args.out) as fh:
        if _fmt(args, "json") == "csv":
            for j, f in enumerate(fields):
                buf = io.StringIO()
                f.to_csv(buf)
                lines = buf.getvalue().splitlines()
                if j == 0:
                    fh.write(lines[0] + "\n" + "realization," + lines[1] + "\n")
                for line in lines[2:]:
                    fh.write(f"{j},{line}\n")
        else:
            for j, f in enumerate(fields):
                rec = {"realization": j, "x": f.x.tolist(), "params": f.params.tolist(),
                       "kelvin": f.matrices.tolist(), "det": f.det.tolist()}
                fh.write(json.dumps(rec) + "\n")


def ymod_table(C, n_theta: int, n_phi: int) -> list[tuple[float, float, float]]:
    """Young's modulus on an equiangular grid; theta in [0, 180], phi in [0, 360) degrees."""
    if n_theta < 2 or n_phi < 1:
        raise ValidationError("need at least 2 polar and 1 azimuthal grid points")
    rows = []
    for th in np.linspace(0.0, 180.0, n_theta):
        for ph in np.arange(n_phi) * (360.0 / n_phi):
            d = direction_from_angles(np.deg2rad(th), np.deg2rad(ph))
            d /= np.linalg.norm(d)
            rows.append((float(th), float(ph), directional_young_modulus(C, d)))
    return rows


def cmd_ymod(args) -> None:
    obj = load_json(args.input)
    item = item_from_json(obj, str(args.input))
    C = item.matrix() if isinstance(item, LieTriple) else item
    if C.shape != (6, 6):
        raise ValidationError("ymod needs a 3D (6x6) Kelvin matrix")
    rows = ymod_table(C, args.ntheta, args.nphi)
    with _output(args.out) as fh:
        if _fmt(args, "csv") == "json":
            fh.write(dumps([{"theta_deg": a, "phi_deg": b, "Y_GPa": y} for a, b, y in rows]))
        else:
            fh.write("theta_deg,phi_deg,Y_GPa\n")
            for a, b, y in rows:
                fh.write(f"{a!r},{b!r},{y!r}\n")


def cmd_bone_demo(args) -> None:
    from .demo import write_bone_demo

    out = args.out or "bone_demo"
    demo = write_bone_demo(out, args.points, args.symmetrize)
    summary = demo.summary_dict()
    print(f"wrote {len(demo.fields)} traces and summary.json to {Path(out)}")
    for trace, kinds in summary["traces"].items():
        for kind, s in kinds.items():
            print(f"{trace:12s} {kind:8s} det deviation {s['max_rel_deviation']:.3e}  "
                  f"swelling {'yes' if s['swelling'] else 'no'}")


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the random seed")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("--out", default=None, help="output file (directory for bone-demo); stdout if omitted")
    common.add_argument("--class", dest="cls", default=None, help="symmetry class name")
    common.add_argument("--metric", default="product", choices=("euclid", "product", "log_euclid"))
    common.add_argument("--cv", type=float, default=1.0, help="weight of the spatial rotation term")
    common.add_argument("--ct", type=float, default=1.0, help="weight of the strain-space rotation term")
    common.add_argument("--tol", type=float, default=1e-11, help="Karcher gradient tolerance")

    ap = argparse.ArgumentParser(prog="kelvinlie", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classes", parents=[common], help="list symmetry classes")
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("build", parents=[common], help="assemble a Kelvin matrix from parameters")
    p.add_argument("--config", help="JSON file with class and z0 (radians)")
    p.add_argument("--q", help="spatial rotation parameters, degrees, comma-separated")
    p.add_argument("--p", help="eigen-strain parameters, degrees, comma-separated")
    p.add_argument("--mu", help="log Kelvin moduli (ln GPa), comma-separated")
    p.add_argument("--moduli", help="distinct Kelvin moduli in GPa, comma-separated")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sample", parents=[common], help="random Kelvin matrices")
    p.add_argument("--config", required=True, help="JSON generator config")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("interpolate", parents=[common], help="geodesic between two materials")
    p.add_argument("a", help="JSON file of the start material (matrix or triple)")
    p.add_argument("b", help="JSON file of the end material")
    p.add_argument("--points", type=int, default=101)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("mean", parents=[common], help="Frechet mean of an ensemble")
    p.add_argument("input", help="JSON array of items, or object with items and weights")
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("field", parents=[common], help="random Kelvin-matrix fields on [0, 1]")
    p.add_argument("--config", required=True, help="JSON field config")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("ymod", parents=[common], help="directional Young's modulus table")
    p.add_argument("input", help="JSON file with a 3D Kelvin matrix or triple")
    p.add_argument("--ntheta", type=int, default=37)
    p.add_argument("--nphi", type=int, default=72)
    p.set_defaults(func=cmd_ymod)

    p = sub.add_parser("bone-demo", parents=[common], help="cortical bone interpolation study")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--symmetrize", choices=("upper", "average"), default="upper")
    p.set_defaults(func=cmd_bone_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cls is not None:
            args.cls = parse_class(args.cls).value
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
