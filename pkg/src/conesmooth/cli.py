"""Command line surface: evaluation, cores, Hausdorff reports, verification,
benchmarks, and figure data emission.

Every command is deterministic given its flags and seed; artifacts are
emitted as JSON (sorted keys) or CSV (17 significant digits, LF line
endings) so reruns diff clean.  Flags win over a --config JSON file;
CONESMOOTH_SEED supplies the seed when neither gives one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import composite_solver as comp
from . import cone_smoothing as cs
from . import function_smoothing as fs
from . import numeric_core as nc
from . import sublinear_catalog as cat
from . import verify

CSV_NUMBER = "%.17g"

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_NUMERIC = 3


@dataclass
class RunConfig:
    """Merged command configuration: flags over config file over defaults."""

    command: str
    target: str = None
    family: str = None
    cone: str = None
    d: int = None
    weights: list = None
    vertices: list = None
    variant: str = None
    beta: float = 1.0
    x: list = None
    grad: bool = False
    n: int = None
    samples: int = None
    eps: float = 1e-2
    surrogate: str = "both"
    suite: str = "all"
    seed: int = 0
    out: str = None
    format: str = "json"


def _parse_floats(text):
    if isinstance(text, (list, tuple, np.ndarray)):
        return [float(v) for v in np.ravel(text)]
    parts = [p for chunk in str(text).split(",") for p in chunk.split()]
    if not parts:
        raise ValueError("empty numeric list")
    return [float(p) for p in parts]


def _num(v):
    return CSV_NUMBER % float(v)


def _csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else _num(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _build_family(cfg):
    if not cfg.family:
        raise ValueError("this command requires --family")
    family = cfg.family.replace("_", "-").lower()
    d = cfg.d
    if d is None and cfg.x is not None and family not in (cat.RELU,):
        if family == cat.MAX_EIGEN:
            side = int(round(len(cfg.x) ** 0.5))
            d = side
        elif family not in (cat.WEIGHTED_INF_NORM, cat.POLYTOPE):
            d = len(cfg.x)
    if family == cat.RELU:
        return cat.relu()
    if family == cat.EUCLIDEAN_NORM:
        return cat.euclidean_norm(_need_d(d))
    if family == cat.ONE_NORM:
        return cat.one_norm(_need_d(d))
    if family == cat.WEIGHTED_INF_NORM:
        w = cfg.weights if cfg.weights is not None else (1.0, 2.0)
        return cat.weighted_inf_norm(_parse_floats(w))
    if family == cat.MAX:
        return cat.coordinate_max(_need_d(d))
    if family == cat.MAX_EIGEN:
        return cat.max_eigen(_need_d(d))
    if family == cat.POLYTOPE:
        if cfg.vertices is None:
            raise ValueError("polytope-support requires --vertices")
        verts = cfg.vertices
        if isinstance(verts, str):
            verts = json.loads(verts)
        return cat.polytope_support(verts)
    raise ValueError("unknown family %r" % (cfg.family,))


def _need_d(d):
    if d is None:
        raise ValueError("this family requires --d (or an --x to infer it)")
    return int(d)


def _build_cone(cfg):
    if not cfg.cone:
        raise ValueError("this command requires --cone")
    kind = cfg.cone.replace("_", "-").lower()
    if kind == cs.ORTHANT:
        return cs.Orthant(_need_d(cfg.d))
    if kind == cs.SECOND_ORDER:
        return cs.SecondOrder(_need_d(cfg.d))
    if kind == cs.PSD:
        return cs.PSDCone(_need_d(cfg.d))
    if kind == cs.EXPONENTIAL:
        return cs.ExponentialCone()
    raise ValueError("unknown cone %r" % (cfg.cone,))


def _point_for(f, values):
    x = np.asarray(values, float)
    if x.size != f.ambient_dim:
        raise ValueError("--x has %d entries, %s expects %d"
                         % (x.size, f.family, f.ambient_dim))
    return x.reshape(f.shape)


def _cmd_smooth_eval(cfg):
    f = _build_family(cfg)
    if cfg.x is None:
        raise ValueError("smooth-eval requires --x")
    x = _point_for(f, cfg.x)
    variant = cfg.variant or fs.MIN_GENERAL
    core = fs.compute_core(f)
    spec = fs.make_smoothing(core, variant, cfg.beta)
    value = fs.eval_smoothing(spec, x)
    payload = {
        "family": f.family,
        "variant": variant,
        "beta": float(cfg.beta),
        "x": [float(v) for v in np.ravel(x)],
        "value": value,
        "sublinear_value": f.value(x),
    }
    if cfg.grad:
        payload["gradient"] = [float(v) for v in
                               np.ravel(fs.grad_smoothing(spec, x))]
    print(_num(value))
    if cfg.out:
        if cfg.format == "csv":
            header = ["value"] + ["x%d" % i for i in range(x.size)]
            _emit(_csv_text(header, [[value] + payload["x"]]), cfg.out)
        else:
            _emit(_json_text(payload), cfg.out)
    return _EXIT_OK


def _cmd_core(cfg):
    if cfg.family and cfg.cone:
        raise ValueError("pass --family or --cone, not both")
    if cfg.family:
        f = _build_family(cfg)
        core = fs.compute_core(f)
        payload = {
            "family": f.family,
            "center": [float(v) for v in np.ravel(core.center)],
            "center_height": float(core.center_height),
            "width": float(core.width),
            "unique": bool(core.unique),
        }
    else:
        k = _build_cone(cfg)
        core = cs.cone_core(k)
        payload = core.descriptor()
    text = _json_text(payload)
    sys.stdout.write(text)
    if cfg.out:
        _emit(text, cfg.out)
    return _EXIT_OK


def _cmd_core_estimate(cfg):
    k = _build_cone(cfg)
    n = cfg.n or 5000
    est = nc.estimate_core(k, n, cfg.seed)
    payload = {
        "kind": k.kind,
        "n_samples": int(est.n_samples),
        "n_normals": int(est.normals.shape[0]),
        "seed": int(est.seed),
        "center": [float(v) for v in np.ravel(est.center_estimate)],
        "width": float(est.width_estimate),
        "unique_probe": bool(nc.uniqueness_probe(est, seed=cfg.seed)),
        "residuals": nc.estimate_residuals(est),
    }
    text = _json_text(payload)
    sys.stdout.write(text)
    if cfg.out:
        _emit(text, cfg.out)
    return _EXIT_OK


def _cmd_hausdorff(cfg):
    k = _build_cone(cfg)
    core = cs.cone_core(k)
    variant = cfg.variant or cs.MIN_INNER
    s = cs.make_smoothed_set(core, variant, cfg.beta)
    samples = cfg.samples or (60 if k.kind == cs.EXPONENTIAL else 300)
    worst, rows = cs.hausdorff_estimate(s, samples=samples, seed=cfg.seed,
                                        details=True)
    payload = {
        "kind": k.kind,
        "variant": variant,
        "beta": float(cfg.beta),
        "samples": int(samples),
        "seed": int(cfg.seed),
        "measured_gap": float(worst),
        "certified_bound": float(s.lam),
    }
    print("measured gap %s (certified bound %s)"
          % (_num(worst), _num(s.lam)))
    if cfg.out:
        if cfg.format == "csv":
            dim = int(np.prod(s.shape))
            header = ["side"] + ["x%d" % i for i in range(dim)] + ["gap"]
            table = [[side] + [float(v) for v in pt] + [gap]
                     for side, pt, gap in rows]
            _emit(_csv_text(header, table), cfg.out)
        else:
            _emit(_json_text(payload), cfg.out)
    return _EXIT_OK


def _cmd_verify(cfg):
    reports = verify.run_suite(cfg.suite, cfg.seed)
    failed = 0
    for rep in reports:
        tag = "PASS" if rep.passed else "FAIL"
        failed += 0 if rep.passed else 1
        print("%s %-34s worst=%.3e tol=%.1e n=%d"
              % (tag, rep.name, rep.worst_violation, rep.tolerance,
                 rep.n_samples))
    print("%d/%d checks passed" % (len(reports) - failed, len(reports)))
    if cfg.out:
        _emit(_json_text([r.to_dict() for r in reports]), cfg.out)
    return _EXIT_OK if failed == 0 else _EXIT_NUMERIC


def _cmd_bench(cfg):
    if cfg.target != "minimax":
        raise ValueError("unknown benchmark %r (expected 'minimax')"
                         % (cfg.target,))
    methods = {"optimal": ("optimal",), "logsumexp": ("log-sum-exp",),
               "both": None}.get(cfg.surrogate)
    if methods is None and cfg.surrogate != "both":
        raise ValueError("unknown surrogate %r" % (cfg.surrogate,))
    res = comp.run_minimax_bench(cfg.n or 64, cfg.d or 10, cfg.eps,
                                 cfg.seed, methods=methods)
    for rec in res["records"]:
        print("%-12s iters=%-7d final_gap=%s beta=%s time=%.2fs"
              % (rec.method, rec.iterations, _num(rec.final_gap),
                 _num(rec.beta), rec.runtime_s))
    if "iteration_ratio" in res:
        print("iteration ratio (logsumexp / optimal): %.3f"
              % res["iteration_ratio"])
        print("predicted sqrt(log(n)/w) ratio:        %.3f"
              % res["predicted_ratio"])
    payload = {
        "records": [r.to_dict() for r in res["records"]],
        "predicted_ratio": res["predicted_ratio"],
    }
    if "iteration_ratio" in res:
        payload["iteration_ratio"] = res["iteration_ratio"]
    if cfg.out:
        _emit(_json_text(payload), cfg.out)
    return _EXIT_OK


def _two_norm_curves():
    r = np.arange(0, 301) * 0.01
    f1 = np.where(r <= 1.0, 0.5 * r * r, r - 0.5)
    f2 = f1 + 0.25
    s8 = np.sqrt(np.maximum(8.0 - r * r, 0.0))
    f3 = np.where(r <= 2.0, 2.0 * np.sqrt(2.0) - s8,
                  r - 2.0 * (2.0 - np.sqrt(2.0)))
    f4 = f3 + 6.0 * np.sqrt(2.0) - 8.0
    f5 = np.sqrt(1.0 + r * r) - 1.0
    return r, (f1, f2, f3, f4, f5)


def _exp_panels(seed, samples):
    k = cs.ExponentialCone()
    core = cs.cone_core(k)
    est = core.estimate
    xk = np.ravel(np.asarray(core.center, float))
    dirs = verify.sphere_points(samples, (3,), seed)

    cone_pts = []
    anchor = k.interior_point()
    for u in dirs:
        p = verify.bisect_boundary(k.membership, anchor, u, 12.0)
        if p is not None:
            cone_pts.append(np.ravel(p))
    cone_pts = np.array(cone_pts)
    shifted = cone_pts + xk[None, :]

    core_pts = []
    core_normals = []
    anchor_core = 1.05 * xk  # strictly interior to every sampled halfspace
    slack = np.maximum(-1.0 - est.normals @ anchor_core, 0.0)
    for u in dirs:
        denom = est.normals @ u
        pos = denom > 1e-12
        if not np.any(pos):
            continue
        ratios = slack[pos] / denom[pos]
        t = float(np.min(ratios))
        if t <= 0.0:
            continue
        j = np.flatnonzero(pos)[int(np.argmin(ratios))]
        core_pts.append(anchor_core + t * u)
        core_normals.append(est.normals[j])
    core_pts = np.array(core_pts)
    core_normals = np.array(core_normals)

    # s_in = x_K + K + B(0,1): push exact cone boundary points out along
    # the analytic exponential-cone normal (curve portion only)
    s_in = []
    for p in cone_pts:
        x, y, z = p
        if y <= 1e-9:
            continue
        e = np.exp(x / y)
        nu = np.array([e, e * (1.0 - x / y), -1.0])
        nu /= np.linalg.norm(nu)
        s_in.append(xk + p + nu)
    s_in = np.array(s_in)

    s_in_max = core_pts + core_normals  # C_K + B(0,1) boundary sample
    return [
        ("cone", cone_pts),
        ("shifted-cone", shifted),
        ("core", core_pts),
        ("s-inner-min", s_in),
        ("s-inner-max", s_in_max),
    ]


def _cmd_figure(cfg):
    if cfg.target == "two-norm":
        r, curves = _two_norm_curves()
        rows = [[r[i]] + [c[i] for c in curves] for i in range(r.size)]
        text = _csv_text(["r", "f1", "f2", "f3", "f4", "f5"], rows)
        _emit(text, cfg.out)
        return _EXIT_OK
    if cfg.target == "exp-cone":
        prefix = cfg.out or "figure-exp-cone"
        samples = cfg.samples or 400
        for name, pts in _exp_panels(cfg.seed, samples):
            path = "%s-%s.csv" % (prefix, name)
            rows = [[p[0], p[1], p[2]] for p in pts]
            _emit(_csv_text(["x", "y", "z"], rows), path)
            print("wrote %s (%d points)" % (path, len(rows)))
        return _EXIT_OK
    raise ValueError("unknown figure %r (expected 'two-norm' or 'exp-cone')"
                     % (cfg.target,))


_HANDLERS = {
    "smooth-eval": _cmd_smooth_eval,
    "core": _cmd_core,
    "core-estimate": _cmd_core_estimate,
    "hausdorff": _cmd_hausdorff,
    "verify": _cmd_verify,
    "bench": _cmd_bench,
    "figure": _cmd_figure,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="conesmooth",
        description="Optimal smoothings of sublinear functions and cones")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, family=False, cone=False, point=False, bench=False,
               target=None):
        p.add_argument("--config", help="JSON file of flag defaults")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="artifact path")
        p.add_argument("--format", choices=["json", "csv"])
        if family:
            p.add_argument("--family", help="sublinear family name")
            p.add_argument("--weights", help="comma floats "
                           "(weighted-inf-norm)")
            p.add_argument("--vertices", help="JSON rows (polytope-support)")
        if cone:
            p.add_argument("--cone", help="cone kind")
        if family or cone:
            p.add_argument("--d", type=int, help="dimension")
        if point:
            p.add_argument("--variant", choices=list(fs.VARIANTS))
            p.add_argument("--beta", type=float)
        if bench:
            p.add_argument("--n", type=int)
            p.add_argument("--eps", type=float)
        if target:
            p.add_argument("target", choices=target)

    p = sub.add_parser("smooth-eval", help="evaluate a smoothing")
    common(p, family=True, point=True)
    p.add_argument("--x", help="comma-separated point coordinates")
    p.add_argument("--grad", action="store_true",
                   help="include the gradient in the artifact")

    p = sub.add_parser("core", help="closed-form core of a family or cone")
    common(p, family=True, cone=True)

    p = sub.add_parser("core-estimate", help="numeric core from normals")
    common(p, cone=True)
    p.add_argument("--n", type=int, help="normal samples")

    p = sub.add_parser("hausdorff", help="sampled Hausdorff gap report")
    common(p, cone=True, point=True)
    p.add_argument("--samples", type=int, help="ray directions")

    p = sub.add_parser("verify", help="run property-check suites")
    common(p)
    p.add_argument("--suite", choices=["functions", "cones", "composite",
                                       "all"])

    p = sub.add_parser("bench", help="smoothed minimax benchmark")
    common(p, bench=True, target=("minimax",))
    p.add_argument("--d", type=int)
    p.add_argument("--surrogate", choices=["optimal", "logsumexp", "both"])

    p = sub.add_parser("figure", help="emit figure data as CSV")
    common(p, target=("two-norm", "exp-cone"))
    p.add_argument("--samples", type=int, help="points per panel")
    return parser


def _merge_config(args):
    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("--config must hold a JSON object")
    cfg = RunConfig(command=args.command)
    for name in vars(cfg):
        if name == "command":
            continue
        flag = getattr(args, name, None)
        if flag is None and name in data:
            flag = data[name]
        if flag is not None:
            setattr(cfg, name, flag)
    if getattr(args, "seed", None) is None and "seed" not in data:
        env = os.environ.get("CONESMOOTH_SEED")
        if env is not None:
            cfg.seed = int(env)
    if cfg.x is not None:
        cfg.x = _parse_floats(cfg.x)
    if cfg.weights is not None:
        cfg.weights = _parse_floats(cfg.weights)
    return cfg


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        handler = _HANDLERS[cfg.command]
        return handler(cfg)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return _EXIT_USAGE
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return _EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
