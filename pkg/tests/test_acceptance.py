"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from convexent.bodies import Ball, Box, Ellipsoid, Simplex, Zonotope, difference_body, volume_mc
from convexent.entropy import entropy_analytic, entropy_plugin_mc
from convexent.inequalities import (Budget, check_aep, check_berwald, check_epi,
                                    check_fracsub, check_isotropic_repi, check_maxnorm,
                                    check_plunnecke, check_reverse_epi, check_submod,
                                    check_submod_volume, check_volsum, counterexample_ratios,
                                    gaussian_submod_slack, random_zonotopes,
                                    simplex_power_moment)
from convexent.measures import ExponentialOrthant, Gaussian, ParetoOrthant, UniformOnBody
from convexent.numerics import SeededStream, ball_radius_for_volume
from convexent.positions import m_position_search
from convexent.support import LOGCONCAVE_C0, essential_support, support_mass_mc

SEED = 42
FULL = Budget(samples=200_000, inner=128, volume_samples=200_000, search_budget=500,
              search_samples=10_000, seed=SEED)


def S(label):
    return SeededStream(SEED, f"acceptance/{label}")


def by_name(records):
    return {r.name: r for r in records}


_terminal = {}


@pytest.fixture(autouse=True)
def _reporter(request):
    # write through the terminal reporter so the lines survive output capture
    _terminal["tr"] = request.config.pluginmanager.get_plugin("terminalreporter")
    yield
    _terminal.pop("tr", None)


def verdict(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail}"
    tr = _terminal.get("tr")
    if tr is not None:
        tr.write_line(line)
    else:
        print(line)
    assert ok, line


def test_01_epi_equality():
    t0 = time.time()
    worst = 0.0
    ok = True
    for n, scale in ((1, 3.0), (2, 2.0), (3, 0.5)):
        (r,) = check_epi(Gaussian.standard(n), Gaussian.standard(n, scale), FULL, S(f"epi{n}"))
        worst = max(worst, abs(r.slack) / r.stderr)
        ok &= abs(r.slack) <= 3 * r.stderr
    u = UniformOnBody(Box.cube(1))
    (r,) = check_epi(u, u, FULL, S("epi-u"))
    dt = time.time() - t0
    ok &= abs(r.rhs - math.e) <= 0.05 and dt <= 30
    verdict(1, "EPI equality", ok,
            f"max |slack|/stderr = {worst:.2f} over Gaussian pairs; uniform pair H = {r.rhs:.4f} "
            f"(e = {math.e:.4f}); {dt:.1f} s")


def test_02_volsum_sandwich():
    t0 = time.time()
    c = Box.cube(2)
    recs = by_name(check_volsum(c, c, FULL, S("volsum")))
    lo, hi = recs["volsum.lower"], recs["volsum.upper"]
    H, se = lo.rhs, lo.stderr
    dt = time.time() - t0
    ok = (H - 1 >= 3 * se and 4 - H >= 3 * se and abs(H - math.e) <= 3 * se + 0.01
          and hi.lhs == H and dt <= 60)
    verdict(2, "entropy-volume sandwich", ok,
            f"H(X+Y) = {H:.4f} +- {se:.4f} in [1, 4], oracle e = {math.e:.4f}; {dt:.1f} s")


def test_03_maxnorm_exponential_equality():
    ok = True
    parts = []
    for n in (1, 2, 3):
        d = ExponentialOrthant(1.0, n)
        recs = by_name(check_maxnorm(d, 3.0, FULL, S(f"mx{n}")))
        gap = recs["maxnorm.upper"].slack
        mc = entropy_plugin_mc(d, FULL.samples, S(f"mx-plugin{n}"))
        plug_gap = mc.h / n - (1 - math.log(d.max_density()) / n)
        ok &= gap == 0.0 and abs(plug_gap) <= 0.02
        parts.append(f"n={n}: analytic {gap:.1e}, plug-in {plug_gap:+.4f}")
    verdict(3, "log-concave max-density equality", ok, "; ".join(parts))


def test_04_berwald_linear_equality():
    n, p, q = 2, 1.0, 2.0
    sx = Simplex.standard(n)
    (r,) = check_berwald(sx, lambda x: x.sum(axis=1), p, q, FULL, S("berwald"),
                         "simplex, sum(x)", simplex_power_moment(n, face=True))
    rel = r.slack / r.rhs
    verdict(4, "Berwald equality for phi = sum(x)", abs(rel) <= 0.01,
            f"q-side {r.lhs:.6f}, p-side {r.rhs:.6f}, relative slack {rel:.4f} "
            f"(limit 0.01)")


def test_05_rogers_shephard():
    est = volume_mc(difference_body(Simplex.standard(2)), FULL.volume_samples, S("hexagon"))
    cube_ok = True
    for n in (1, 2, 3):
        c = Box.cube(n, -0.5, 0.5)
        cube_ok &= difference_body(c).exact_volume() == 2.0**n
    ok = abs(est.value - 3.0) <= 0.03 * 3.0 and cube_ok
    verdict(5, "Rogers-Shephard sharpness", ok,
            f"|T - T| = {est.value:.4f} +- {est.stderr:.4f} (hexagon 3); cube difference "
            f"bodies 2^n exact: {cube_ok}")


def test_06_essential_support():
    recs = by_name(check_aep(ParetoOrthant(6.0, 2), 3.0, FULL, S("aep-pareto")))
    m = recs["aep.mass"]
    vol_ok = recs["aep.volume.lower"].verdict == "pass" == recs["aep.volume.upper"].verdict
    exact_vol = recs["aep.volume.lower"].stderr == 0
    g = Gaussian.standard(1)
    es = essential_support(g, LOGCONCAVE_C0)
    half_width = float(es.body.support(np.array([[1.0]]))[0])
    mass = support_mass_mc(g, es, FULL.samples, S("aep-gauss"))
    exact = stats.norm.cdf(4) - stats.norm.cdf(-4)
    ok = (m.verdict == "pass" and m.rhs >= 0.5 and vol_ok and exact_vol
          and abs(half_width - 4.0) < 1e-12 and abs(mass.value - exact) <= 3 * mass.stderr + 1e-9
          and mass.value > 0.8)
    verdict(6, "essential support", ok,
            f"Pareto mass {m.rhs:.4f} >= 1/2, volume sandwich exact {vol_ok}; Gaussian "
            f"K = [-{half_width:g}, {half_width:g}], mass {mass.value:.6f} vs {exact:.6f}")


def test_07_submodularity():
    ok = True
    worst = 0.0
    for a, b, c in ((1.0, 2.0, 3.0), (0.3, 5.0, 0.7), (2.0, 0.01, 1.0)):
        g = lambda v: Gaussian.standard(1, v)
        (r,) = check_submod(g(a), g(b), g(c), FULL, S("sm-g"))
        err = abs(r.slack - gaussian_submod_slack(a, b, c))
        worst = max(worst, err)
        ok &= err <= 1e-12 and r.slack >= 0
    n = 2
    ball = Ball.unit(n, ball_radius_for_volume(n, 1.0))
    cube = UniformOnBody(Box.cube(n))
    (e,) = check_submod(cube, cube, UniformOnBody(ball), FULL, S("sm-u"))
    ok &= e.verdict == "pass"
    zono_ok = True
    for i in range(5):
        zs = random_zonotopes(n, 3, S(f"sm-z{i}").rng)
        for r in check_submod_volume(*zs, FULL, S(f"sm-v{i}")):
            zono_ok &= r.stderr == 0 and r.verdict == "pass"
    ok &= zono_ok
    verdict(7, "submodularity", ok,
            f"Gaussian closed-form error {worst:.1e}; cube/cube/ball slack {e.slack:.4f} "
            f"+- {e.stderr:.4f}; zonotope volume forms exact: {zono_ok}")


def test_08_plunnecke_and_fracsub():
    n, m = 2, 3
    c = Box.cube(n)
    (r,) = check_plunnecke(c, [c] * m, 1, FULL, S("pl"))
    ok = r.lhs == 1 + m and r.verdict == "pass" and r.stderr == 0
    slacks = []
    ys = [Gaussian.standard(n, v) for v in (0.5, 1.0, 2.0)]
    for k in (1, 2):
        (f,) = check_fracsub(Gaussian.standard(n), ys, k, FULL, S(f"fs{k}"))
        ok &= f.verdict == "pass"
        slacks.append(f"k={k} slack {f.slack:.4f}")
    verdict(8, "Plunnecke-Ruzsa and fractional subadditivity", ok,
            f"equal cubes LHS = {r.lhs:g} (1 + m = {1 + m}) <= {r.rhs:g}; " + ", ".join(slacks))


def test_09_m_position():
    t0 = time.time()
    rot = np.array([[math.cos(0.7), -math.sin(0.7)], [math.sin(0.7), math.cos(0.7)]])
    axes = np.array([1.0, 10.0]) / math.sqrt(10 * math.pi)
    ell = Ellipsoid(np.zeros(2), rot @ np.diag(axes**2) @ rot.T)
    res = m_position_search(ell, 500, 10_000, S("mpos"))
    dt = time.time() - t0
    never_worse = True
    rng = S("mpos-zono").rng
    for i in range(20):
        z = Zonotope(np.zeros(2), rng.standard_normal((4, 2)))
        zr = m_position_search(z, 100, 2_000, S(f"mpos-z{i}"))
        never_worse &= zr.objective >= zr.baseline
    ok = res.objective >= 0.98 and res.iterations <= 500 and dt <= 300 and never_worse
    verdict(9, "M-position search", ok,
            f"ellipse objective {res.objective:.4f} (identity {res.baseline:.4f}) in "
            f"{res.iterations} evaluations, {dt:.1f} s; never worse on 20 zonotopes: {never_worse}")


def test_10_reverse_epi():
    ok = True
    lows = []
    pairs = [(Gaussian.standard(2), Gaussian(np.zeros(2), np.diag([9.0, 0.2]))),
             (ExponentialOrthant(1.0, 2), UniformOnBody(Box.cube(2))),
             (Gaussian.standard(1), ExponentialOrthant(3.0, 1))]
    for i, (x, y) in enumerate(pairs):
        r = by_name(check_reverse_epi(x, y, 3.0, FULL, S(f"repi{i}")))["repi.lower"]
        h_over_n = 0.5 * math.log(r.rhs)
        se = 0.5 * r.stderr / r.rhs
        ok &= h_over_n >= math.log(math.sqrt(2)) - 3 * se
        lows.append(f"{h_over_n:.3f}")
    ball = UniformOnBody(Ball.unit(2, ball_radius_for_volume(2, 1.0)))
    b = by_name(check_reverse_epi(ball, ball, 3.0, FULL, S("repi-ball")))["repi.ratio_volsum"]
    ok &= b.rhs <= 2.0 + 1e-9 and b.verdict == "pass"
    cvs = []
    small = Budget(samples=40_000, inner=64, volume_samples=50_000, search_budget=200,
                   search_samples=4_000)
    for n in (1, 2):
        beta = max(2 * n + 1, 3 * n)
        ratios = []
        for seed in range(10):
            d = ParetoOrthant(float(beta), n)
            bud = Budget(**{**small.__dict__, "seed": seed})
            recs = by_name(check_reverse_epi(d, d, 3.0, bud, SeededStream(seed, f"repi-p{n}")))
            ratios.append(recs["repi.ratio"].lhs)
        ratios = np.array(ratios)
        cv = ratios.std(ddof=1) / ratios.mean()
        ok &= bool(np.all(np.isfinite(ratios))) and cv <= 0.2
        cvs.append(f"n={n} beta={beta}: mean {ratios.mean():.3f}, CV {cv:.3f}")
    verdict(10, "reverse EPI pipeline", ok,
            f"h/n = {', '.join(lows)} >= log sqrt 2 = {math.log(math.sqrt(2)):.3f}; ball ratio "
            f"{b.lhs:.3f} <= {b.rhs:.3f}; " + "; ".join(cvs))


def test_11_isotropic_reverse():
    c = Box.cube(2)
    cc = by_name(check_isotropic_repi(c, c, FULL, S("iso-cc")))
    r = cc["isotropic_repi"]
    ok = (abs(r.lhs - 4 / (8 * math.pi * math.e)) < 1e-12 and abs(r.rhs - 1 / 6) < 1e-12
          and r.verdict == "pass")
    cs = by_name(check_isotropic_repi(c, Simplex.standard(2), FULL, S("iso-cs")))
    ok &= cs["isotropic_repi"].verdict == "pass"
    floors = [rec for recs in (cc, cs) for k, rec in recs.items() if k.startswith("isotropic.const")]
    ok &= all(f.rhs >= f.lhs - 3 * f.stderr for f in floors)
    verdict(11, "isotropic reverse inequality", ok,
            f"cube pair {r.lhs:.4f} <= {r.rhs:.4f}; cube/simplex {cs['isotropic_repi'].lhs:.4f} "
            f"<= {cs['isotropic_repi'].rhs:.4f}; min L^2 = {min(f.rhs for f in floors):.4f} "
            f">= {1 / (2 * math.pi * math.e):.4f}")


def test_12_counterexample_trend():
    mins = []
    for beta in (3.0, 1.3, 1.1):
        (rp, ep), (rm, em) = counterexample_ratios(beta, FULL, S(f"counter{beta:g}"))
        mins.append((rp, ep) if rp <= rm else (rm, em))
    seps = [(b[0] - a[0]) / math.hypot(a[1], b[1]) for a, b in zip(mins, mins[1:])]
    ok = all(s > 3 for s in seps)
    verdict(12, "counterexample trend", ok,
            "min ratios " + ", ".join(f"{m:.3f}+-{e:.3f}" for m, e in mins)
            + "; separations " + ", ".join(f"{s:.1f} sigma" for s in seps))


def test_13_determinism(tmp_path):
    env = {k: v for k, v in os.environ.items() if k != "CONVEXENT_WORKERS"}
    outs = []
    for workers in (1, 8):
        out = tmp_path / f"report_w{workers}.json"
        proc = subprocess.run([sys.executable, "-m", "convexent.cli", "verify", "--seed", "42",
                               "--workers", str(workers), "--out", str(out)],
                              env=env, capture_output=True, text=True)
        assert proc.returncode in (0, 1), proc.stderr
        outs.append(out.read_bytes())
    same = outs[0] == outs[1]
    verdict(13, "determinism", same,
            f"reports with 1 and 8 workers are {'byte-identical' if same else 'different'} "
            f"({len(outs[0])} bytes)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
