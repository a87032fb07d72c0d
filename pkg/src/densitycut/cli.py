"""``densitycut`` command-line front end.

Every subcommand resolves a job configuration (flags over an optional JSON
``--config`` file) and runs one pipeline that emits a JSON report. Without
``--out`` the report goes to stdout; with ``--out DIR`` it is written to
``DIR/report.json`` next to any masks and CSV tables.

Exit codes: 0 on success, 2 on invalid input, 3 when a numerical stage fails.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, cluster, export, mollify, oned, sweepcut
from .densities import FAMILIES, ExponentTriple, builtin, counterexample_box
from .errors import (BadParams, DegenerateMass, DensityCutError, DisconnectedGraph, EmptySide,
                     GridTooCoarse, GridTooFine, OutsideDomain, RadiusExceedsDomain, UnknownFamily)

log = logging.getLogger(__name__)

COMMANDS = ("analyze1d", "partition2d", "iterate2d", "cluster", "verify", "mollify-check",
            "scaling-check", "counterexample")
TWO_D = {"partition2d", "iterate2d", "counterexample"}
VALIDATION_ERRORS = (BadParams, UnknownFamily, OutsideDomain, GridTooCoarse, GridTooFine,
                     EmptySide, DisconnectedGraph, DegenerateMass, RadiusExceedsDomain)
EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


class ConfigError(BadParams):
    pass


@dataclass
class JobConfig:
    """Fully resolved job description; embedded verbatim in every report."""

    command: str
    density: dict
    exponents: list
    h: float = None
    tol: float = 1e-8
    seed: int = 0
    out: str = None
    sweep_eps: list = None
    max_rounds: int = 50
    mesh_n: int = 2048
    points: str = None
    variant: str = "both"
    timings: bool = False

    KEYS = ("command", "density", "exponents", "h", "tol", "seed", "out", "sweep_eps",
            "max_rounds", "mesh_n", "points", "variant", "timings")

    def to_dict(self):
        d = asdict(self)
        d.pop("out")
        return d


# ---------------------------------------------------------------- parsing

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON job file; flags override its entries")
    common.add_argument("--density", help=f"family: {', '.join(sorted(FAMILIES))}")
    common.add_argument("--eps", type=float)
    common.add_argument("--n", type=float, help="plateau width or counterexample cap 1/n")
    common.add_argument("--noise", type=float)
    common.add_argument("--dim", type=int, help="dimension of the uniform family")
    common.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="extra family parameter (repeatable)")
    common.add_argument("--abg", nargs=3, type=float, action="append", metavar=("A", "B", "G"),
                        help="exponents alpha beta gamma (repeat for a sweep)")
    common.add_argument("--h", type=float, help="grid size")
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--sweep-eps", help="comma-separated eps values")
    common.add_argument("--max-rounds", type=int)
    common.add_argument("--mesh-n", type=int, help="1D finite element mesh size")
    common.add_argument("--points", help="CSV of points, one per row")
    common.add_argument("--variant", choices=("13", "baseline", "both"))
    common.add_argument("--timings", action="store_true", default=None,
                        help="record wall-clock timings (reports stop being byte-stable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="densitycut",
                                     description="Density-weighted spectral cuts.")
    parser.add_argument("--version", action="version", version=f"densitycut {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analyze1d": "1D cut with its eigenvalue bounds",
        "partition2d": "single spectral sweep cut on a grid",
        "iterate2d": "iterated cuts keeping the heaviest component",
        "cluster": "two-way spectral clustering of a point CSV",
        "verify": "Cheeger and Buser checks for a 1D or 2D density",
        "mollify-check": "mollifier gradient bound and L1 sandwich checks",
        "scaling-check": "exactness of the rescaling identities",
        "counterexample": "orientation of the (1,2) and (1,3) cuts on the two-scale density",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def resolve_config(args):
    """Merge the optional config file with explicit flags into a :class:`JobConfig`."""
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(base, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(base) - set(JobConfig.KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if base.get("command", args.command) != args.command:
            raise ConfigError(f"config is for {base['command']!r}, not {args.command!r}")
    cfg = dict(base)
    cfg["command"] = args.command

    dens = dict(cfg.get("density") or {})
    if set(dens) - {"family", "params"}:
        raise ConfigError(f"unknown density keys: {sorted(set(dens) - {'family', 'params'})}")
    params = dict(dens.get("params") or {})
    family = args.density or dens.get("family")
    if args.command == "counterexample":
        family = family or "counterexample2d"
        if family != "counterexample2d":
            raise ConfigError("the counterexample command uses the counterexample2d family")
    for key in ("eps", "n", "noise", "dim"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k] = _parse_value(v)
    if family is None and args.command not in ("cluster", "mollify-check"):
        raise ConfigError("--density is required")
    if family == "uniform" and "dim" not in params:
        params["dim"] = 2 if args.command in TWO_D else 1
    if family == "counterexample2d":
        params.setdefault("n", 64)
        params.setdefault("eps", 0.01 / params["n"])
    cfg["density"] = {"family": family, "params": params} if family else None

    if args.abg:
        cfg["exponents"] = [list(t) for t in args.abg]
    exps = cfg.get("exponents") or [[1.0, 2.0, 3.0]]
    if exps and not isinstance(exps[0], (list, tuple)):
        exps = [exps]
    cfg["exponents"] = [list(ExponentTriple.of(t).as_tuple()) for t in exps]

    for key, attr in (("h", "h"), ("tol", "tol"), ("seed", "seed"), ("out", "out"),
                      ("max_rounds", "max_rounds"), ("mesh_n", "mesh_n"), ("points", "points"),
                      ("variant", "variant"), ("timings", "timings")):
        val = getattr(args, attr)
        if val is not None:
            cfg[key] = val
    if args.sweep_eps:
        try:
            cfg["sweep_eps"] = [float(t) for t in args.sweep_eps.replace(" ", ",").split(",") if t]
        except ValueError:
            raise ConfigError(f"bad --sweep-eps list {args.sweep_eps!r}") from None
    job = JobConfig(**{k: v for k, v in cfg.items() if k in JobConfig.KEYS})
    _validate(job)
    return job


def _validate(job):
    if job.tol is None or not job.tol > 0:
        raise ConfigError("tol must be positive")
    if job.h is not None and not job.h > 0:
        raise ConfigError("h must be positive")
    if job.max_rounds < 1:
        raise ConfigError("max_rounds must be at least 1")
    if job.mesh_n < 8:
        raise ConfigError("mesh_n must be at least 8")
    if job.sweep_eps is not None and not all(e > 0 for e in job.sweep_eps):
        raise ConfigError("sweep eps values must be positive")
    if job.density is not None:
        # fail early on a bad family or parameters
        _density(job.density, job.sweep_eps[0] if job.sweep_eps else None)


def _density(spec, eps=None):
    params = dict(spec["params"])
    if eps is not None:
        params["eps"] = eps
    return builtin(spec["family"], params)


# ---------------------------------------------------------------- reports

def _blank_report(job):
    return {
        "config": job.to_dict(),
        "version": __version__,
        "phi": None,
        "lambda2": None,
        "threshold": None,
        "cheeger": {"lhs": None, "rhs": None, "holds": None},
        "buser": {"lhs": None, "rhs": None, "holds": None, "constant_variant": None},
        "timings_ms": {},
        "residual": None,
    }


def _fill_checks(report, chk):
    report["cheeger"] = {"lhs": chk.cheeger_lhs, "rhs": chk.cheeger_rhs, "holds": chk.cheeger_holds}
    report["buser"] = {"lhs": chk.buser_lhs, "rhs": chk.buser_rhs, "holds": chk.buser_holds,
                       "constant_variant": chk.constant_variant,
                       "rhs_8": chk.buser8_rhs, "holds_8": chk.buser8_holds}


def _threads():
    try:
        return max(1, int(os.environ.get("DENSITYCUT_THREADS", "1")))
    except ValueError:
        raise ConfigError("DENSITYCUT_THREADS must be an integer") from None


def _fan_out(fn, jobs):
    """Map ``fn`` over independent jobs, in parallel when DENSITYCUT_THREADS > 1."""
    workers = min(_threads(), len(jobs))
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# ---------------------------------------------------------------- 1D jobs

def _one_d_job(item):
    spec, ex, eps, mesh_n, tol, seed = item
    rho = _density(spec, eps)
    if rho.dim != 1:
        raise BadParams(f"{rho.name} is {rho.dim}D; this command needs a 1D density")
    res = oned.analyze_1d(rho, ex, mesh_n=mesh_n, tol=min(tol, 1e-10), seed=seed)
    chk = sweepcut.verify_inequalities(res.phi, res.lambda2, res.lipschitz, 1, ex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        br = oned.muckenhoupt_bound(rho, ex)
    return res, chk, br


def _points_1d(job):
    eps_list = job.sweep_eps or [None]
    return [(job.density, tuple(ex), eps, job.mesh_n, job.tol, job.seed)
            for ex in job.exponents for eps in eps_list]


def _run_1d(job, out):
    items = _points_1d(job)
    results = _fan_out(_one_d_job, items)
    report = _blank_report(job)
    rows = []
    for item, (res, chk, br) in zip(items, results):
        _, ex, eps, *_ = item
        rows.append({
            "exponents": list(ex), "eps": eps, "phi": res.phi, "xhat": res.xhat,
            "lambda2": res.lambda2, "residual": res.residual, "theta": res.theta,
            "witness": res.witness, "buser_bound_1d": res.buser_bound,
            "cheeger_holds": chk.cheeger_holds, "buser_holds": chk.buser_holds,
            "muckenhoupt": {"lower": br.lower, "upper": br.upper, "constant": br.constant,
                            "divergent": br.divergent},
        })
    if len(results) == 1:
        res, chk, _ = results[0]
        report.update(phi=res.phi, lambda2=res.lambda2, threshold=res.xhat,
                      residual=res.residual)
        _fill_checks(report, chk)
    report["details"] = {"rows": rows, "dim": 1}
    header = ["alpha", "beta", "gamma", "eps", "phi", "lambda2", "witness", "cheeger_holds",
              "buser_holds"]
    table = [[*r["exponents"], r["eps"] if r["eps"] is not None else "", r["phi"], r["lambda2"],
              r["witness"], r["cheeger_holds"], r["buser_holds"]] for r in rows]
    out["curve.csv"] = export.rows_to_csv(header, table)
    return report


# ---------------------------------------------------------------- 2D jobs

def _default_h(rho):
    return min(rho.domain.lengths) / 64


def _mask_of(grid, vertices):
    return grid.as_mask(vertices).reshape(grid.shape)


def _run_partition(job, out):
    report = _blank_report(job)
    rho = _density(job.density)
    if rho.dim != 2:
        raise BadParams("partition2d needs a 2D density")
    ex = job.exponents[0]
    h = job.h or _default_h(rho)
    cut, rep, grid = sweepcut.algorithm1(rho, ex, h, tol=job.tol, seed=job.seed)
    chk = sweepcut.verify_inequalities(cut.phi, rep.lambda2, rep.lipschitz_L, 2, ex)
    report.update(phi=cut.phi, lambda2=rep.lambda2, threshold=cut.threshold,
                  residual=rep.residual)
    _fill_checks(report, chk)
    report["timings_ms"] = rep.timings_ms
    report["details"] = {"h": grid.h, "grid_shape": list(grid.shape), "mass_a": cut.mass_a,
                         "mass_complement": cut.mass_ac, "boundary_edges": int(cut.boundary_edges.size),
                         "multiplicity": rep.multiplicity, "dim": 2,
                         "eigenvector": "second-smallest generalized eigenvector"}
    out["mask.pgm"] = export.mask_to_pgm(_mask_of(grid, cut.members))
    return report


def _run_iterate(job, out):
    report = _blank_report(job)
    rho = _density(job.density)
    if rho.dim != 2:
        raise BadParams("iterate2d needs a 2D density")
    ex = job.exponents[0]
    h = job.h or _default_h(rho)
    res = sweepcut.algorithm2(rho, ex, h, tol=job.tol, max_rounds=job.max_rounds, seed=job.seed)
    last = res.trail[-1]
    chk = sweepcut.verify_inequalities(last.phi, last.lambda2, float(rho.lipschitz), 2, ex)
    report.update(phi=last.phi, lambda2=last.lambda2)
    _fill_checks(report, chk)
    grid = res.grid
    region = grid.as_mask(res.region)
    crossing = region[grid.eu] != region[grid.ev]
    report["details"] = {
        "h": grid.h, "grid_shape": list(grid.shape), "rounds": [asdict(r) for r in res.trail],
        "region_mass_fraction": res.region_mass / res.total_mass,
        "boundary_mean_rho": float(np.mean(grid.edge_rho[crossing])) if crossing.any() else None,
        "dim": 2,
    }
    out["mask.pgm"] = export.mask_to_pgm(region.reshape(grid.shape))
    return report


def _run_counterexample(job, out):
    report = _blank_report(job)
    p = job.density["params"]
    n, eps = float(p["n"]), float(p["eps"])
    par = p.get("parametrization", "statement")
    run = sweepcut.counterexample_orientation(n, eps, h=job.h, tol=job.tol, seed=job.seed,
                                              parametrization=par)
    report.update(phi=run.phi_13, lambda2=run.lambda_13)
    chk = sweepcut.verify_inequalities(run.phi_13, run.lambda_13, 1.0, 2, (1, 2, 3))
    _fill_checks(report, chk)
    X, Y = counterexample_box(n, par)
    report["details"] = {
        "n": n, "eps": eps, "h": run.h, "X": X, "Y": Y, "vertices": run.vertices,
        "phi_12_cut": run.phi_12, "phi_13_cut": run.phi_13, "ratio": run.ratio,
        "lambda_12": run.lambda_12, "lambda_13": run.lambda_13,
        "cut_12_across_y0": run.orient_12.across_y0, "cut_13_across_x0": run.orient_13.across_x0,
        "dim": 2,
    }
    g = run.grid
    out["mask_12.pgm"] = export.mask_to_pgm(_mask_of(g, run.cut_12.members))
    out["mask_13.pgm"] = export.mask_to_pgm(_mask_of(g, run.cut_13.members))
    return report


def _run_verify(job, out):
    rho = _density(job.density)
    if rho.dim == 1:
        return _run_1d(job, out)
    return _run_partition(job, out)


# ---------------------------------------------------------------- other jobs

def _run_cluster(job, out):
    if not job.points:
        raise ConfigError("cluster needs --points FILE")
    try:
        cloud = cluster.load_points(job.points)
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    report = _blank_report(job)
    details = {"n": cloud.n, "d": cloud.d, "eigenvector": "Fiedler (second-smallest) vector"}
    variants = {"13": cluster.cluster_13, "baseline": cluster.cluster_baseline}
    chosen = ["13", "baseline"] if job.variant == "both" else [job.variant]
    for name in chosen:
        res = variants[name](cloud, tol=min(job.tol, 1e-10), seed=job.seed)
        details[f"conductance_{name}"] = res.conductance
        details[f"threshold_{name}"] = res.threshold
        details[f"sizes_{name}"] = [int(np.sum(res.labels == 1)), int(np.sum(res.labels == 2))]
        buf = io.StringIO()
        cluster.write_labels(buf, res.labels)
        out["labels.csv" if name == "13" else f"labels_{name}.csv"] = buf.getvalue()
        if name == chosen[0]:
            report.update(phi=res.conductance, threshold=res.threshold)
    report["details"] = details
    return report


def _run_mollify(job, out):
    report = _blank_report(job)
    grads = {str(d): mollify.grad_l1_norm(d) for d in range(1, 6)}
    rng = np.random.default_rng(job.seed)
    checks = []
    for c in (0.1, 0.3, 0.5):
        centre = rng.uniform(-0.5, 0.5)
        width = rng.uniform(0.2, 0.6)
        base = rng.uniform(-0.3, 0.3)
        freq = rng.uniform(0.5, 3.0)
        f = lambda x, centre=centre, width=width: mollify.profile((x - centre) / width)
        delta = lambda x, c=c, base=base, freq=freq: base + (c / freq) * np.sin(freq * x)
        r = mollify.l1_sandwich_check(f, delta, c, [(centre - width, centre + width)])
        checks.append({"c": c, "lhs": r.lhs, "mid": r.mid, "rhs": r.rhs, "passed": r.passed})
    report["details"] = {
        "grad_l1_norm": grads,
        "grad_bound_holds": all(v <= 2 * int(d) for d, v in grads.items()),
        "sandwich": checks,
    }
    return report


def _run_scaling(job, out):
    report = _blank_report(job)
    rho = _density(job.density)
    if rho.dim != 1:
        raise BadParams("scaling-check works on 1D densities")
    a0, b0 = rho.domain.bounds[0]
    x = a0 + 0.3 * (b0 - a0)
    u = lambda t: np.cos(2.0 * t) + t
    du = lambda t: -2.0 * np.sin(2.0 * t) + 1.0
    rows = []
    for ex in job.exponents:
        for ell, a in ((2.0, 1.0), (1.0, 2.0), (3.0, 0.5)):
            c = oned.scaling_check_1d(rho, ex, ell, a, x, u, du)
            rows.append({"exponents": ex, "ell": ell, "a": a, "phi_error": c.phi_error,
                         "rayleigh_error": c.rayleigh_error})
    report["details"] = {"rows": rows,
                         "max_error": max(max(r["phi_error"], r["rayleigh_error"]) for r in rows)}
    return report


RUNNERS = {
    "analyze1d": _run_1d,
    "verify": _run_verify,
    "partition2d": _run_partition,
    "iterate2d": _run_iterate,
    "counterexample": _run_counterexample,
    "cluster": _run_cluster,
    "mollify-check": _run_mollify,
    "scaling-check": _run_scaling,
}


def execute(job):
    """Run a resolved job; returns ``(report, files)`` with ``files`` a name -> text map."""
    files = {}
    t0 = time.perf_counter()
    report = RUNNERS[job.command](job, files)
    if job.timings:
        report["timings_ms"] = dict(report.get("timings_ms") or {},
                                    total=1e3 * (time.perf_counter() - t0))
    else:
        report["timings_ms"] = {}
    return report, files


def run(argv=None):
    """Entry point returning the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        job = resolve_config(args)
        report, files = execute(job)
    except VALIDATION_ERRORS as exc:
        print(f"densitycut: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DensityCutError, ArithmeticError) as exc:
        print(f"densitycut: computation failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = export.dumps_report(report)
    if job.out:
        out = Path(job.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text)
        for name, content in files.items():
            (out / name).write_text(content)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
