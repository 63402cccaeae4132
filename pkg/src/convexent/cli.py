"""Command-line entry point: ``convexent {verify,entropy,volume,mposition,demo-counterexample}``."""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .bodies import (Ball, Body, Box, Ellipsoid, Simplex, VPolytope, Zonotope,
                     difference_body, linear_image, volume)
from .entropy import entropy_analytic, entropy_knn, entropy_plugin_mc
from .inequalities import (AffineFunction, Budget, InstanceGenerator, Job, _aspect_axes,
                           check_aep, check_berwald, check_cvx_ent, check_epi,
                           check_fracsub_plunnecke, check_innerprod, check_isotropic_repi,
                           check_maxnorm, check_renyi2, check_reverse_epi,
                           check_rogers_shephard, check_submod, check_submod_volume,
                           check_vol_ent, check_vol_maxnorm, check_volsum, demo_counterexample,
                           entropy_of_sum, random_zonotopes, run_suite, summarize)
from .measures import (Density, ExponentialOrthant, Gaussian, LinearPushforward, ParetoOrthant,
                       PowerSimplex, UniformOnBody)
from .numerics import MAX_DIM, SeededStream, ball_radius_for_volume
from .positions import m_position_search
from .results import FIELDS

WORKERS_ENV = "CONVEXENT_WORKERS"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# instance literals
# ---------------------------------------------------------------------------

def _arr(v):
    return np.asarray(v, dtype=float)


BODY_TYPES = {
    "box": lambda d: Box(_arr(d["lo"]), _arr(d["hi"])),
    "cube": lambda d: Box.cube(int(d["n"]), d.get("lo", 0.0), d.get("hi", 1.0)),
    "ball": lambda d: Ball(_arr(d.get("center", np.zeros(int(d.get("n", 1))))),
                           float(d.get("radius", 1.0))),
    "ellipsoid": lambda d: Ellipsoid(_arr(d["center"]), _arr(d["shape"])),
    "simplex": lambda d: (Simplex(_arr(d["vertices"])) if "vertices" in d
                          else Simplex.standard(int(d["n"]), d.get("side", 1.0))),
    "vpolytope": lambda d: VPolytope(_arr(d["vertices"])),
    "zonotope": lambda d: Zonotope(_arr(d["center"]), _arr(d["generators"])),
}

DENSITY_TYPES = {
    "uniform": lambda d: UniformOnBody(parse_literal(d["body"])),
    "gaussian": lambda d: Gaussian(_arr(d["mean"]), _arr(d["cov"])),
    "exponential": lambda d: ExponentialOrthant(float(d.get("rate", 1.0)), int(d["n"])),
    "pareto": lambda d: ParetoOrthant(float(d["beta"]), int(d["n"])),
    "powersimplex": lambda d: PowerSimplex(float(d["kappa_tilde"]), int(d["n"]),
                                           d.get("peak", "face")),
    "linear": lambda d: LinearPushforward(_arr(d["matrix"]), parse_literal(d["base"]),
                                          d.get("offset")),
}


def parse_literal(value):
    """Numbers pass through, lists map elementwise, tagged objects become bodies
    or densities, and untagged ``{"w": ..., "c": ...}`` objects become affine maps."""
    if isinstance(value, list):
        return [parse_literal(v) for v in value]
    if not isinstance(value, dict):
        return value
    tag = value.get("type")
    if tag in BODY_TYPES:
        return BODY_TYPES[tag](value)
    if tag in DENSITY_TYPES:
        return DENSITY_TYPES[tag](value)
    if tag is None and {"w", "c"} <= value.keys():
        return AffineFunction(_arr(value["w"]), float(value["c"]))
    raise ConfigError(f"unknown literal type {tag!r}")


# check name -> (function, positional argument keys)
FILE_CHECKS = {
    "epi": (check_epi, ("x", "y")),
    "volsum": (check_volsum, ("a", "b")),
    "vol_ent": (check_vol_ent, ("bodies",)),
    "cvx_ent": (check_cvx_ent, ("density",)),
    "berwald": (check_berwald, ("body", "phi", "p", "q")),
    "maxnorm": (check_maxnorm, ("density", "beta0")),
    "innerprod": (check_innerprod, ("f", "g")),
    "vol_maxnorm": (check_vol_maxnorm, ("bodies",)),
    "rogers_shephard": (check_rogers_shephard, ("a", "b")),
    "renyi2": (check_renyi2, ("density",)),
    "aep": (check_aep, ("density", "beta0")),
    "submod": (check_submod, ("x", "y", "z")),
    "submod_volume": (check_submod_volume, ("a", "b", "d")),
    "fracsub_plunnecke": (check_fracsub_plunnecke, ("x", "ys", "k")),
    "repi": (check_reverse_epi, ("x", "y", "beta0")),
    "isotropic_repi": (check_isotropic_repi, ("a", "b")),
}


def load_instance_jobs(path: str, beta0: float) -> list[Job]:
    """Jobs from a JSON document ``{"instances": [{"check": ..., <args>}, ...]}``."""
    with open(path) as fh:
        doc = json.load(fh)
    entries = doc["instances"] if isinstance(doc, dict) else doc
    jobs = []
    for i, entry in enumerate(entries):
        name = entry.get("check")
        if name not in FILE_CHECKS:
            raise ConfigError(f"instance {i}: unknown check {name!r}")
        fn, keys = FILE_CHECKS[name]
        entry = dict(entry)
        entry.setdefault("beta0", beta0)
        try:
            args = [parse_literal(entry[k]) for k in keys]
        except KeyError as exc:
            raise ConfigError(f"instance {i}: missing field {exc}") from None
        for a in args:
            if isinstance(a, (Body, Density)) and not 1 <= a.n <= MAX_DIM:
                raise ConfigError(f"instance {i}: dimension outside 1..{MAX_DIM}")
        label = entry.get("instance", f"file[{i}]")
        jobs.append(Job(name, label,
                        lambda B, s, fn=fn, args=args, label=label: fn(*args, B, s, label)))
    return jobs


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _clean(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def render_report(results, header: dict, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in results:
            rec = r.as_record()
            w.writerow([repr(rec[f]) if isinstance(rec[f], float) else rec[f] for f in FIELDS])
        return buf.getvalue()
    records = [{k: _clean(v) for k, v in r.as_record().items()} for r in results]
    return json.dumps({"header": header, "records": records}, indent=1) + "\n"


def _write(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _ints(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t)
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(",") if t)
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _check_dim(n: int):
    if not 1 <= n <= MAX_DIM:
        raise ConfigError(f"dimension {n} outside 1..{MAX_DIM}")


def _workers(flag: int) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
    return max(1, flag)


def cmd_verify(args) -> int:
    dims = _ints(args.dim)
    for n in dims:
        _check_dim(n)
    suite = () if args.suite == "all" else tuple(s for s in args.suite.split(",") if s)
    try:
        cfg = InstanceGenerator(dims=dims, betas=_floats(args.beta), beta0=args.beta0,
                                checks=suite, counter_betas=_floats(args.counter_betas),
                                seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    budget = Budget(samples=args.samples, inner=args.inner, volume_samples=args.volume_samples,
                    search_budget=args.search_budget, search_samples=args.search_samples,
                    seed=args.seed)
    extra = load_instance_jobs(args.instances, args.beta0) if args.instances else []
    results = run_suite(cfg, budget, _workers(args.workers), extra)
    cfg_dict = {"suite": args.suite, "dims": list(dims), "betas": list(cfg.betas),
                "beta0": cfg.beta0, "counter_betas": list(cfg.counter_betas),
                "budget": asdict(budget), "instances": args.instances}
    header = {"tool_version": __version__, "root_seed": args.seed,
              "config_digest": config_digest(cfg_dict)}
    _write(render_report(results, header, args.format), args.out)
    counts = summarize(results)
    print(" ".join(f"{k}={v}" for k, v in counts.items()), file=sys.stderr)
    for r in results:
        if r.verdict in ("fail", "error"):
            print(f"{r.verdict.upper()}: {r.name} [{r.instance}] slack={r.slack:.4g} "
                  f"stderr={r.stderr:.3g}", file=sys.stderr)
    if counts.get("error"):
        return EXIT_CONFIG
    return EXIT_FAIL if counts.get("fail") else EXIT_OK


NAMED_LAWS = {
    "uniform01": lambda n, a: UniformOnBody(Box.cube(n, 0.0, 1.0)),
    "ucube": lambda n, a: UniformOnBody(Box.cube(n, -0.5, 0.5)),
    "uball": lambda n, a: UniformOnBody(Ball.unit(n, ball_radius_for_volume(n, 1.0))),
    "usimplex": lambda n, a: UniformOnBody(Simplex.standard(n)),
    "gaussian": lambda n, a: Gaussian.standard(n, a.variance),
    "exponential": lambda n, a: ExponentialOrthant(a.rate, n),
    "pareto": lambda n, a: ParetoOrthant(a.beta, n),
    "powersimplex": lambda n, a: PowerSimplex(a.kappa_tilde, n, a.peak),
}
# spellings accepted by --family
FAMILY_ALIASES = {"uniform": "uniform01", "cube": "uniform01", "ball": "uball",
                  "simplex": "usimplex", "gauss": "gaussian", "exp": "exponential"}


def _law(name: str, n: int, args) -> Density:
    key = FAMILY_ALIASES.get(name, name)
    if key not in NAMED_LAWS:
        raise ConfigError(f"unknown family {name!r}; choose from {sorted(NAMED_LAWS)}")
    try:
        return NAMED_LAWS[key](n, args)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_entropy(args) -> int:
    n = args.dim
    _check_dim(n)
    stream = SeededStream(args.seed, "cli/entropy")
    budget = Budget(samples=args.samples, inner=args.inner, seed=args.seed)
    if args.sum:
        laws = [_law(t, n, args) for t in args.sum.split(",") if t]
        if not any(d.evaluable for d in laws):
            raise ConfigError("a sum needs at least one evaluable summand")
        h = entropy_of_sum(laws, budget, stream)
    else:
        d = _law(args.family, n, args)
        if args.method == "analytic":
            h = entropy_analytic(d)
        elif args.method == "plugin":
            h = entropy_plugin_mc(d, args.samples, stream)
        else:
            h = entropy_knn(d.sample(args.samples, stream.rng), args.k)
    print(f"h = {h.h:.6f}  H = {h.H:.6f}  stderr = {h.stderr:.3g}  method = {h.method}"
          + ("  (bias flag)" if h.bias_flag else ""))
    return EXIT_OK


def _rotation(n: int, angle: float) -> np.ndarray:
    r = np.eye(n)
    if n >= 2:
        c, s = np.cos(angle), np.sin(angle)
        r[:2, :2] = [[c, -s], [s, c]]
    return r


def _body(args) -> Body:
    n = args.dim
    _check_dim(n)
    kind = args.body
    if kind == "cube":
        return Box.cube(n, 0.0, args.side)
    if kind == "ball":
        return Ball.unit(n, args.r)
    if kind == "simplex":
        return Simplex.standard(n, args.side)
    if kind == "ellipsoid":
        # unit volume, axis ratio ``aspect``, rotated so the optimum is not the identity
        rot = _rotation(n, math.pi / 5)
        axes = _aspect_axes(n, args.aspect)
        return Ellipsoid(np.zeros(n), rot @ np.diag(axes**2) @ rot.T)
    if kind == "zonotope":
        return random_zonotopes(n, 1, SeededStream(args.seed, "cli/zonotope").rng,
                                args.generators)[0]
    raise ConfigError(f"unknown body {kind!r}")


def cmd_volume(args) -> int:
    body = _body(args)
    if args.difference:
        body = difference_body(body)
    est = volume(body, args.samples, SeededStream(args.seed, "cli/volume"))
    method = "exact" if est.stderr == 0 and est.samples == 0 else "monte-carlo"
    print(f"volume = {est.value:.6f}  stderr = {est.stderr:.3g}  method = {method}")
    return EXIT_OK


def cmd_mposition(args) -> int:
    body = _body(args)
    res = m_position_search(body, args.budget, args.samples, SeededStream(args.seed, "cli/mpos"))
    print(f"objective = {res.objective:.4f} +- {res.objective_stderr:.2g}  "
          f"identity = {res.baseline:.4f}  evaluations = {res.iterations}"
          + ("  (budget exhausted)" if res.flagged else ""))
    with np.printoptions(precision=4, suppress=True):
        print("map =", res.matrix.tolist() if body.n > 3 else res.matrix)
    return EXIT_OK


def cmd_demo_counterexample(args) -> int:
    betas = _floats(args.betas)
    if any(b <= 1 for b in betas):
        raise ConfigError("every beta must exceed 1 (the entropy diverges otherwise)")
    budget = Budget(samples=args.samples, inner=args.inner, seed=args.seed)
    results = demo_counterexample(betas, budget, SeededStream(args.seed, "cli/counter"))
    rows = {}
    for r in results:
        if r.name in ("counter.plus", "counter.minus"):
            rows.setdefault(r.instance, {})[r.name.split(".")[1]] = r.lhs
    print(f"{'beta':>6}  {'H(X+Y)/H(X)':>12}  {'H(X-Y)/H(X)':>12}  {'min':>10}")
    for inst, row in rows.items():
        beta = inst.split("=")[1].rstrip(")")
        print(f"{beta:>6}  {row['plus']:12.4f}  {row['minus']:12.4f}  "
              f"{min(row.values()):10.4f}")
    trend = [r for r in results if r.name == "counter.trend"]
    for r in trend:
        print(f"{r.instance}: {r.verdict}")
    return EXIT_FAIL if any(r.failed for r in trend) else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convexent", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the inequality suite and write a report")
    v.add_argument("--suite", default="all", help="'all' or comma-separated check names")
    v.add_argument("--dim", default="1,2", help="comma-separated dimensions")
    v.add_argument("--beta", default="", help="Pareto betas (raised to the valid range)")
    v.add_argument("--beta0", type=float, default=3.0)
    v.add_argument("--counter-betas", default="3,1.3,1.1")
    v.add_argument("--samples", type=int, default=50_000)
    v.add_argument("--inner", type=int, default=128)
    v.add_argument("--volume-samples", type=int, default=100_000)
    v.add_argument("--search-budget", type=int, default=300)
    v.add_argument("--search-samples", type=int, default=5_000)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--workers", type=int, default=1,
                   help=f"thread count; the {WORKERS_ENV} variable overrides it")
    v.add_argument("--instances", help="JSON file with extra instances")
    v.add_argument("--out", help="report path (default stdout)")
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.set_defaults(func=cmd_verify)

    def law_options(q):
        q.add_argument("--dim", type=int, default=1)
        q.add_argument("--beta", type=float, default=3.0)
        q.add_argument("--rate", type=float, default=1.0)
        q.add_argument("--variance", type=float, default=1.0)
        q.add_argument("--kappa-tilde", type=float, default=1.0)
        q.add_argument("--peak", choices=("face", "vertex"), default="face")
        q.add_argument("--samples", type=int, default=200_000)
        q.add_argument("--inner", type=int, default=256)
        q.add_argument("--seed", type=int, default=42)

    e = sub.add_parser("entropy", help="entropy of a law or of a sum of laws")
    law_options(e)
    e.add_argument("--family", default="uniform", help=", ".join(sorted(NAMED_LAWS)))
    e.add_argument("--sum", help="comma-separated summands, e.g. uniform01,uniform01")
    e.add_argument("--method", choices=("analytic", "plugin", "knn"), default="analytic")
    e.add_argument("--k", type=int, default=5, help="neighbour index for --method knn")
    e.set_defaults(func=cmd_entropy)

    def body_options(q, samples):
        q.add_argument("--body", choices=("cube", "ball", "simplex", "ellipsoid", "zonotope"),
                       default="cube")
        q.add_argument("--dim", type=int, default=2)
        q.add_argument("--r", type=float, default=1.0, help="ball radius")
        q.add_argument("--side", type=float, default=1.0)
        q.add_argument("--aspect", type=float, default=10.0, help="ellipsoid axis ratio")
        q.add_argument("--generators", type=int, default=None)
        q.add_argument("--samples", type=int, default=samples)
        q.add_argument("--seed", type=int, default=42)

    vo = sub.add_parser("volume", help="volume of a body (exact or Monte Carlo)")
    body_options(vo, 200_000)
    vo.add_argument("--difference", action="store_true", help="use the difference body A - A")
    vo.set_defaults(func=cmd_volume)

    m = sub.add_parser("mposition", help="numerical M-position search")
    body_options(m, 10_000)
    m.add_argument("--budget", type=int, default=500, help="objective evaluations")
    m.set_defaults(func=cmd_mposition)

    d = sub.add_parser("demo-counterexample",
                       help="entropy growth of Pareto sums as beta approaches 1")
    d.add_argument("--betas", default="3,1.5,1.2")
    d.add_argument("--samples", type=int, default=100_000)
    d.add_argument("--inner", type=int, default=256)
    d.add_argument("--seed", type=int, default=42)
    d.set_defaults(func=cmd_demo_counterexample)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"convexent: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
