"""Numerical checks of entropy and volume inequalities, one function per inequality.

Every check returns a list of :class:`CheckResult` records, because two-sided
bounds are reported as separate ``.lower`` and ``.upper`` records. A record
states ``lhs <= rhs``; its ``slack`` is ``rhs - lhs``.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import reduce
from typing import Callable

import numpy as np

from .bodies import (Ball, Body, Box, Ellipsoid, Simplex, Zonotope, difference_body,
                     intersection_volume_mc, minkowski_sum, sample_uniform_many, translate,
                     volume)
from .entropy import (EntropyValue, NoClosedForm, entropy_analytic, entropy_plugin_mc,
                      entropy_sum_smoothed, gaussian_closure, renyi2_mc)
from .measures import (Density, ExponentialOrthant, Gaussian, LinearPushforward, ParetoOrthant,
                       PowerSimplex, SumPair, UniformOnBody, normalize_max_density)
from .numerics import (MAX_DIM, Estimate, SeededStream, ball_radius_for_volume, gen_binomial,
                       mc_mean)
from .positions import (isotropic_constant, isotropic_map, m_position_search,
                        put_measure_m_position)
from .results import CheckResult, make_check
from .support import (LOGCONCAVE_C0, c0_convex, check_support_mass, check_support_volume,
                      essential_support, typset_ratio)

# configured ceilings for report-only measurements
MAXNORM_CONSTANT_CEILING = 10.0
REPI_RATIO_CEILING = 50.0
M_SUM_FLOOR = 0.1
TYPSET_CEILING = 1e6


@dataclass(frozen=True)
class Budget:
    samples: int = 200_000          # outer Monte Carlo size
    inner: int = 256                # inner size of the smoothed sum estimator
    volume_samples: int = 200_000
    search_budget: int = 500        # objective evaluations per M-position search
    search_samples: int = 10_000
    seed: int = 0


def _sigma(*errs) -> float:
    return math.sqrt(sum(e * e for e in errs))


def _power_err(value: float, err: float, power: float) -> float:
    """Delta-method error of value**power."""
    return abs(power) * value ** power * err / value if err else 0.0


# ---------------------------------------------------------------------------
# entropy helpers
# ---------------------------------------------------------------------------

def entropy_of(density: Density, budget: Budget, stream: SeededStream) -> EntropyValue:
    try:
        return entropy_analytic(density)
    except NoClosedForm:
        return entropy_plugin_mc(density, budget.samples, stream)


def entropy_of_sum(parts, budget: Budget, stream: SeededStream,
                   closed_form: bool = True) -> EntropyValue:
    """h(X_1 + ... + X_m); Gaussian sums in closed form when ``closed_form``."""
    parts = list(parts)
    if len(parts) == 1:
        return entropy_of(parts[0], budget, stream)
    if closed_form:
        gs = [gaussian_closure(p) for p in parts]
        if all(g is not None for g in gs):
            return entropy_analytic(Gaussian(sum(g.mean for g in gs), sum(g.cov for g in gs)))
    # the first evaluable law is smoothed over the sum of the others
    k = next((i for i, p in enumerate(parts) if p.evaluable), None)
    if k is None:
        raise ValueError("at least one summand must be evaluable")
    rest = parts[:k] + parts[k + 1:]
    y = reduce(SumPair, rest)
    return entropy_sum_smoothed(parts[k], y, budget.samples, budget.inner, stream)


def _sum_volume(bodies, budget: Budget, stream: SeededStream) -> Estimate:
    return volume(reduce(minkowski_sum, bodies), budget.volume_samples, stream)


# ---------------------------------------------------------------------------
# entropy power and entropy-volume relations
# ---------------------------------------------------------------------------

def check_epi(x: Density, y: Density, budget: Budget, stream: SeededStream,
              instance: str = "", closed_form: bool = False) -> list[CheckResult]:
    """H(X) + H(Y) <= H(X + Y)."""
    hx = entropy_of(x, budget, stream.child("x"))
    hy = entropy_of(y, budget, stream.child("y"))
    hs = entropy_of_sum([x, y], budget, stream.child("sum"), closed_form)
    lhs = hx.H + hy.H
    err = _sigma(hx.H_stderr, hy.H_stderr, hs.H_stderr)
    return [make_check("epi", x.n, instance, lhs, hs.H, err, seed=budget.seed)]


def check_volsum(a: Body, b: Body, budget: Budget, stream: SeededStream,
                 instance: str = "") -> list[CheckResult]:
    """|A+B|^{2/n} / 4 <= H(X + Y) <= |A+B|^{2/n} for uniform X on A, Y on B."""
    n = a.n
    hs = entropy_of_sum([UniformOnBody(a), UniformOnBody(b)], budget, stream.child("sum"))
    vol = _sum_volume([a, b], budget, stream.child("volume"))
    v = vol.value ** (2.0 / n)
    v_err = _power_err(vol.value, vol.stderr, 2.0 / n)
    return [
        make_check("volsum.lower", n, instance, v / 4, hs.H, _sigma(v_err / 4, hs.H_stderr),
                   seed=budget.seed),
        make_check("volsum.upper", n, instance, hs.H, v, _sigma(v_err, hs.H_stderr),
                   seed=budget.seed),
    ]


def check_vol_ent(bodies, budget: Budget, stream: SeededStream,
                  instance: str = "") -> list[CheckResult]:
    """log|A_1+...+A_m| - n log m <= h(S_m) <= log|A_1+...+A_m|."""
    bodies = list(bodies)
    n, m = bodies[0].n, len(bodies)
    hs = entropy_of_sum([UniformOnBody(b) for b in bodies], budget, stream.child("sum"))
    vol = _sum_volume(bodies, budget, stream.child("volume"))
    lv = math.log(vol.value)
    lv_err = vol.stderr / vol.value
    err = _sigma(lv_err, hs.stderr)
    return [
        make_check("vol_ent.lower", n, instance, lv - n * math.log(m), hs.h, err,
                   seed=budget.seed),
        make_check("vol_ent.upper", n, instance, hs.h, lv, err, seed=budget.seed),
    ]


def _support_body(density: Density) -> Body:
    if isinstance(density, UniformOnBody):
        return density.body
    if isinstance(density, PowerSimplex):
        return Simplex.standard(density.n)
    raise ValueError("entropy lower bounds need a uniform or power-simplex law")


def check_cvx_ent(density: Density, budget: Budget, stream: SeededStream,
                  instance: str = "", method: str = "analytic") -> list[CheckResult]:
    """Entropy lower bounds for kappa-concave laws on a body A, 0 < kappa <= 1/n.

    ``.sharp``: h >= log|A| + sum_i 1/(1 + kt i) - log C(1/kappa, n);
    ``.simple``: h >= log|A| + n log(kappa n).
    """
    n = density.n
    p = density.params()
    if not 0 < p.kappa <= 1.0 / n:
        raise ValueError("needs 0 < kappa <= 1/n")
    body = _support_body(density)
    log_a = math.log(body.exact_volume())
    if method == "analytic":
        h = entropy_analytic(density)
    else:
        h = entropy_plugin_mc(density, budget.samples, stream)
    kt = p.kappa_tilde
    harmonic = sum(1.0 / (1.0 + kt * i) for i in range(1, n + 1)) if math.isfinite(kt) else 0.0
    sharp = log_a + harmonic - math.log(gen_binomial(1.0 / p.kappa, n))
    simple = log_a + n * math.log(p.kappa * n)
    return [
        make_check("cvx_ent.sharp", n, instance, sharp, h.h, h.stderr, seed=budget.seed),
        make_check("cvx_ent.simple", n, instance, simple, h.h, h.stderr, seed=budget.seed),
    ]


# ---------------------------------------------------------------------------
# Berwald's inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineFunction:
    """phi(x) = <w, x> + c."""

    w: np.ndarray
    c: float

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ np.asarray(self.w, dtype=float) + self.c


def random_positive_affine(body: Body, rng: np.random.Generator, margin: float = 1.0
                           ) -> AffineFunction:
    """An affine function that is nonnegative on the body (hence concave and >= 0)."""
    w = rng.standard_normal(body.n)
    c = float(body.support(-w[None, :])[0]) + margin * rng.random()
    return AffineFunction(w, c)


def berwald_side(r: float, moment: float, n: int, vol: float) -> float:
    """(C(n + r, n) / |A|)^{1/r} * (int_A phi^r)^{1/r}."""
    return (gen_binomial(n + r, n) / vol * moment) ** (1.0 / r)


def check_berwald(body: Body, phi: Callable, p: float, q: float, budget: Budget,
                  stream: SeededStream, instance: str = "",
                  moment: Callable[[float], float] | None = None) -> list[CheckResult]:
    """Berwald: the q-side is at most the p-side for 0 < p < q.

    ``moment(r)`` may supply the exact integral of phi^r over the body;
    otherwise both integrals come from one uniform sample of the body.
    """
    if not 0 < p < q:
        raise ValueError("needs 0 < p < q")
    n = body.n
    vol = body.exact_volume()
    if moment is not None:
        lhs = berwald_side(q, moment(q), n, vol)
        rhs = berwald_side(p, moment(p), n, vol)
        return [make_check("berwald", n, instance, lhs, rhs, 0.0, seed=budget.seed)]
    x = sample_uniform_many(body, budget.samples, stream)
    vals = phi(x)
    if np.any(vals < -1e-12):
        raise ValueError("phi must be nonnegative on the body")
    vals = np.maximum(vals, 0.0)
    sides, errs = [], []
    for r in (q, p):
        m = vals**r
        mean, se = float(m.mean()), float(m.std(ddof=1) / math.sqrt(len(m)))
        side = berwald_side(r, vol * mean, n, vol)
        sides.append(side)
        errs.append(side * se / (r * mean))
    return [make_check("berwald", n, instance, sides[0], sides[1], _sigma(*errs),
                       seed=budget.seed)]


def simplex_power_moment(n: int, face: bool = True) -> Callable[[float], float]:
    """Exact integral over the standard simplex of (sum x)^r or (1 - sum x)^r."""
    if face:
        return lambda r: 1.0 / (math.factorial(n - 1) * (r + n))
    return lambda r: math.exp(math.lgamma(r + 1) - math.lgamma(r + n + 1))


# ---------------------------------------------------------------------------
# maximum of the density
# ---------------------------------------------------------------------------

def check_maxnorm(density: Density, beta0: float, budget: Budget, stream: SeededStream,
                  instance: str = "") -> list[CheckResult]:
    """log ||f||^{-1/n} <= h/n <= C + log ||f||^{-1/n}.

    C = 1 for log-concave laws, where the Gaussian comparison
    -1/2 <= h(Z)/n - h(X)/n <= 1/2 (Z Gaussian with the same maximum) is also
    checked. For other convex laws the constant is only measured.
    """
    n = density.n
    h = entropy_of(density, budget, stream)
    base = -math.log(density.max_density()) / n
    hn, err = h.h / n, h.stderr / n
    out = [make_check("maxnorm.lower", n, instance, base, hn, err, seed=budget.seed)]
    if density.params().log_concave:
        out.append(make_check("maxnorm.upper", n, instance, hn, 1.0 + base, err,
                              seed=budget.seed))
        gap = 0.5 + base - hn  # h(Z)/n - h(X)/n
        out.append(make_check("maxnorm.gauss.lower", n, instance, -0.5, gap, err,
                              seed=budget.seed))
        out.append(make_check("maxnorm.gauss.upper", n, instance, gap, 0.5, err,
                              seed=budget.seed))
    else:
        out.append(make_check("maxnorm.constant", n, instance, hn - base,
                              MAXNORM_CONSTANT_CEILING, err, "report", budget.seed))
    return out


def inner_product(f: Density, g: Density, budget: Budget, stream: SeededStream) -> Estimate:
    """Integral of f g, as E g(X) with X ~ f, or in closed form for Gaussians."""
    gf, gg = gaussian_closure(f), gaussian_closure(g)
    if gf is not None and gg is not None:
        z = Gaussian(gf.mean, gf.cov + gg.cov)
        return Estimate(float(z.pdf(gg.mean)[0]), 0.0, 0)
    if isinstance(f, UniformOnBody) and isinstance(g, UniformOnBody):
        inter = intersection_volume_mc(f.body, g.body, budget.volume_samples, stream)
        s = 1.0 / (f.volume * g.volume)
        return Estimate(s * inter.value, s * inter.stderr, inter.samples)
    return mc_mean(lambda size, sub: g.pdf(f.sample(size, sub.rng)), budget.samples, stream)


def check_innerprod(f: Density, g: Density, budget: Budget, stream: SeededStream,
                    instance: str = "") -> list[CheckResult]:
    """(int f g)^{-2/n} <= H(X + Y) <= e^2 (int f g)^{-2/n} for symmetric log-concave f, g."""
    n = f.n
    if not (f.symmetric and g.symmetric):
        raise ValueError("needs symmetric densities")
    ip = inner_product(f, g, budget, stream.child("ip"))
    b = ip.value ** (-2.0 / n)
    b_err = _power_err(ip.value, ip.stderr, -2.0 / n)
    hs = entropy_of_sum([f, g], budget, stream.child("sum"))
    return [
        make_check("innerprod.lower", n, instance, b, hs.H, _sigma(b_err, hs.H_stderr),
                   seed=budget.seed),
        make_check("innerprod.upper", n, instance, hs.H, math.e**2 * b,
                   _sigma(math.e**2 * b_err, hs.H_stderr), seed=budget.seed),
    ]


def sum_density_at(parts, point, budget: Budget, stream: SeededStream) -> Estimate:
    """Unbiased estimate of the density of X_1 + ... + X_m at ``point``."""
    first, rest = parts[0], parts[1:]
    point = np.asarray(point, dtype=float)

    def draw(size, sub):
        s = sum(r.sample(size, sub.child(str(i)).rng) for i, r in enumerate(rest))
        return first.pdf(point - s)

    return mc_mean(draw, budget.samples, stream)


def check_vol_maxnorm(bodies, budget: Budget, stream: SeededStream,
                      instance: str = "") -> list[CheckResult]:
    """1 <= ||f_m|| |A_1 + ... + A_m| <= (m e)^n.

    For symmetric bodies the maximum sits at the origin and is estimated
    without bias. Otherwise the largest estimate over sampled points is a
    report-only value.
    """
    bodies = list(bodies)
    n, m = bodies[0].n, len(bodies)
    parts = [UniformOnBody(b) for b in bodies]
    vol = _sum_volume(bodies, budget, stream.child("volume"))
    if all(b.is_symmetric() for b in bodies):
        peak = sum_density_at(parts, np.zeros(n), budget, stream.child("peak"))
        kind = None
    else:
        rng = stream.child("points").rng
        pts = sum(p.sample(16, rng) for p in parts)
        small = replace(budget, samples=max(budget.samples // 16, 2))
        ests = [sum_density_at(parts, x, small, stream.child(f"peak{i}"))
                for i, x in enumerate(pts)]
        peak = max(ests, key=lambda e: e.value)
        kind = "report"
    prod = peak.value * vol.value
    err = _sigma(peak.stderr * vol.value, peak.value * vol.stderr)
    return [
        make_check("vol_maxnorm.lower", n, instance, 1.0, prod, err, kind, budget.seed),
        make_check("vol_maxnorm.upper", n, instance, prod, (m * math.e) ** n, err, kind,
                   budget.seed),
    ]


# ---------------------------------------------------------------------------
# Rogers-Shephard family
# ---------------------------------------------------------------------------

def shift_grid(a: Body, b: Body, points_per_axis: int = 5) -> np.ndarray:
    """Origin plus a regular grid over the bounding box of A - B."""
    lo_a, hi_a = a.bbox()
    lo_b, hi_b = b.bbox()
    lo, hi = lo_a - hi_b, hi_a - lo_b
    axes = [np.linspace(l, h, points_per_axis + 2)[1:-1] for l, h in zip(lo, hi)]
    grid = np.array(list(itertools.product(*axes)))
    return np.vstack([np.zeros(a.n), grid])


def check_rogers_shephard(a: Body, b: Body, budget: Budget, stream: SeededStream,
                          instance: str = "") -> list[CheckResult]:
    """Rogers-Shephard inequalities.

    ``.diffbody`` (A = B, x = 0): |A - A| <= C(2n, n) |A|.
    ``.sup`` (report-only): sup_x |(A - x) cap B| |A - B| over a grid of shifts
    against C(2n, n) |A| |B|.
    ``.symmsum.lower/.upper`` for symmetric bodies:
    |A|^{1/n}|B|^{1/n} <= |A cap B|^{1/n}|A + B|^{1/n} <= 4 |A|^{1/n}|B|^{1/n}.
    """
    n = a.n
    c = gen_binomial(2 * n, n)
    va = volume(a, budget.volume_samples, stream.child("va"))
    vb = volume(b, budget.volume_samples, stream.child("vb"))
    diff = volume(minkowski_sum(a, b.reflect()), budget.volume_samples, stream.child("diff"))
    out = []
    if a is b:
        out.append(make_check("rogers_shephard.diffbody", n, instance, diff.value,
                              c * va.value, _sigma(diff.stderr, c * va.stderr),
                              seed=budget.seed))
    grid_samples = max(budget.volume_samples // 10, 1000)
    best = Estimate(0.0, 0.0, 0)
    for i, x in enumerate(shift_grid(a, b)):
        v = intersection_volume_mc(translate(a, -x), b, grid_samples, stream.child(f"shift{i}"))
        if v.value > best.value:
            best = v
    out.append(make_check("rogers_shephard.sup", n, instance, best.value * diff.value,
                          c * va.value * vb.value, best.stderr * diff.value, "report",
                          budget.seed))
    if a.is_symmetric() and b.is_symmetric():
        inter = intersection_volume_mc(a, b, budget.volume_samples, stream.child("cap"))
        plus = volume(minkowski_sum(a, b), budget.volume_samples, stream.child("plus"))
        mid = (inter.value * plus.value) ** (1.0 / n)
        mid_err = mid / n * _sigma(inter.stderr / inter.value, plus.stderr / plus.value)
        ref = (va.value * vb.value) ** (1.0 / n)
        ref_err = ref / n * _sigma(va.stderr / va.value, vb.stderr / vb.value)
        out.append(make_check("rogers_shephard.symmsum.lower", n, instance, ref, mid,
                              _sigma(mid_err, ref_err), seed=budget.seed))
        out.append(make_check("rogers_shephard.symmsum.upper", n, instance, mid, 4 * ref,
                              _sigma(mid_err, 4 * ref_err), seed=budget.seed))
    return out


# ---------------------------------------------------------------------------
# Renyi-2 and essential supports
# ---------------------------------------------------------------------------

def renyi2_closed_form(density: Density) -> float | None:
    g = gaussian_closure(density)
    if g is not None:
        return float((4 * math.pi) ** (-g.n / 2) * math.exp(-0.5 * g._logdet))
    if isinstance(density, UniformOnBody):
        return 1.0 / density.volume
    if isinstance(density, ExponentialOrthant):
        return (density.rate / 2) ** density.n
    if isinstance(density, LinearPushforward):
        inner = renyi2_closed_form(density.base)
        return None if inner is None else inner / density.abs_det
    return None


def check_renyi2(density: Density, budget: Budget, stream: SeededStream,
                 instance: str = "") -> list[CheckResult]:
    """2^{-n} ||f|| <= int f^2 <= ||f|| for log-concave f."""
    n = density.n
    exact = renyi2_closed_form(density)
    est = Estimate(exact, 0.0, 0) if exact is not None else renyi2_mc(density, budget.samples,
                                                                       stream)
    top = density.max_density()
    return [
        make_check("renyi2.lower", n, instance, top / 2**n, est.value, est.stderr,
                   seed=budget.seed),
        make_check("renyi2.upper", n, instance, est.value, top, est.stderr, seed=budget.seed),
    ]


def aep_c0(density: Density, beta0: float) -> float:
    """e^{-8} for log-concave laws, else the convex-measure constant for beta0."""
    if density.params().log_concave:
        return LOGCONCAVE_C0
    beta, n = density.params().beta, density.n
    if not (beta >= n + 1 and beta >= beta0 * n):
        raise ValueError(f"beta = {beta} is outside the range beta >= max(n + 1, beta0 n)")
    return c0_convex(beta0)


def check_aep(density: Density, beta0: float, budget: Budget, stream: SeededStream,
              instance: str = "") -> list[CheckResult]:
    """Mass and volume of the essential support; the typical-set ratio is report-only."""
    es = essential_support(density, aep_c0(density, beta0))
    out = [check_support_mass(density, es, budget.samples, stream.child("mass"), instance,
                              budget.seed)]
    out += check_support_volume(density, es, budget.volume_samples, stream.child("volume"),
                                instance, budget.seed)
    ratio = typset_ratio(density, es, budget.volume_samples, stream.child("volume"))
    out.append(make_check("aep.typset_ratio", density.n, instance, ratio, TYPSET_CEILING, 0.0,
                          "report", budget.seed))
    return out


# ---------------------------------------------------------------------------
# submodularity and sumset inequalities
# ---------------------------------------------------------------------------

def check_submod(x: Density, y: Density, z: Density, budget: Budget, stream: SeededStream,
                 instance: str = "") -> list[CheckResult]:
    """h(X + Y + Z) + h(Z) <= h(X + Z) + h(Y + Z)."""
    hxyz = entropy_of_sum([x, y, z], budget, stream.child("xyz"))
    hz = entropy_of(z, budget, stream.child("z"))
    hxz = entropy_of_sum([x, z], budget, stream.child("xz"))
    hyz = entropy_of_sum([y, z], budget, stream.child("yz"))
    err = _sigma(hxyz.stderr, hz.stderr, hxz.stderr, hyz.stderr)
    return [make_check("submod.entropy", x.n, instance, hxyz.h + hz.h, hxz.h + hyz.h, err,
                       seed=budget.seed)]


def check_submod_volume(a: Body, b: Body, d: Body, budget: Budget, stream: SeededStream,
                        instance: str = "") -> list[CheckResult]:
    """|A+B|^{1/n}|D|^{1/n} <= 2 |A+D|^{1/n}|B+D|^{1/n}, and the same with A+B+D and 3."""
    n = a.n
    vols = {}
    for key, parts in {"ab": [a, b], "abd": [a, b, d], "d": [d], "ad": [a, d],
                       "bd": [b, d]}.items():
        vols[key] = _sum_volume(parts, budget, stream.child(key))
    r = {k: v.value ** (1.0 / n) for k, v in vols.items()}
    rel = {k: v.stderr / (n * v.value) for k, v in vols.items()}
    rhs = r["ad"] * r["bd"]
    out = []
    for name, top, const in (("submod.volume2", "ab", 2.0), ("submod.volume3", "abd", 3.0)):
        lhs = r[top] * r["d"]
        err = _sigma(lhs * rel[top], lhs * rel["d"], const * rhs * rel["ad"],
                     const * rhs * rel["bd"])
        out.append(make_check(name, n, instance, lhs, const * rhs, err, seed=budget.seed))
    return out


def gaussian_submod_slack(a: float, b: float, c: float) -> float:
    """Closed-form slack for 1D Gaussians with variances a, b, c."""
    return 0.5 * math.log((a + c) * (b + c) / ((a + b + c) * c))


def check_fracsub(x: Density, ys, k: int, budget: Budget, stream: SeededStream,
                  instance: str = "") -> list[CheckResult]:
    """h(X + sum_i Y_i) - h(X) <= C(m-1, k-1)^{-1} sum_{|s|=k} [h(X + sum_{i in s} Y_i) - h(X)]."""
    ys = list(ys)
    m = len(ys)
    if not 1 <= k <= m:
        raise ValueError("needs 1 <= k <= m")
    hx = entropy_of(x, budget, stream.child("x"))
    hall = entropy_of_sum([x] + ys, budget, stream.child("all"))
    weight = 1.0 / math.comb(m - 1, k - 1)
    total, errs = 0.0, [hall.stderr]
    for s in itertools.combinations(range(m), k):
        hs = entropy_of_sum([x] + [ys[i] for i in s], budget,
                            stream.child("s" + "".join(map(str, s))))
        total += hs.h - hx.h
        errs.append(weight * hs.stderr)
    lhs = hall.h - hx.h
    coeff = abs(1 - weight * math.comb(m, k))  # net multiplicity of h(X)
    errs.append(coeff * hx.stderr)
    return [make_check(f"fracsub.k{k}", x.n, instance, lhs, weight * total, _sigma(*errs),
                       seed=budget.seed)]


def check_plunnecke(a: Body, bs, k: int, budget: Budget, stream: SeededStream,
                    instance: str = "") -> list[CheckResult]:
    """|A + sum B_i|^{1/n} <= (1 + m) [prod_s c_s]^{1/C(m-1,k-1)} |A|^{1/n},
    with c_s = |A + sum_{i in s} B_i|^{1/n} / |A|^{1/n}."""
    bs = list(bs)
    m, n = len(bs), a.n
    va = volume(a, budget.volume_samples, stream.child("a"))
    ra = va.value ** (1.0 / n)
    rel = [va.stderr / (n * va.value)]
    log_prod = 0.0
    for s in itertools.combinations(range(m), k):
        v = _sum_volume([a] + [bs[i] for i in s], budget,
                        stream.child("s" + "".join(map(str, s))))
        log_prod += math.log(v.value ** (1.0 / n) / ra)
        rel.append(v.stderr / (n * v.value) / math.comb(m - 1, k - 1))
    top = _sum_volume([a] + bs, budget, stream.child("all"))
    lhs = top.value ** (1.0 / n)
    rhs = (1 + m) * math.exp(log_prod / math.comb(m - 1, k - 1)) * ra
    err = _sigma(lhs * top.stderr / (n * top.value), rhs * _sigma(*rel))
    return [make_check(f"plunnecke.k{k}", n, instance, lhs, rhs, err, seed=budget.seed)]


def check_fracsub_plunnecke(x, ys, k: int, budget: Budget, stream: SeededStream,
                            instance: str = "") -> list[CheckResult]:
    """Entropy form for densities, volume form for bodies."""
    if isinstance(x, Body):
        return check_plunnecke(x, ys, k, budget, stream, instance)
    return check_fracsub(x, ys, k, budget, stream, instance)


def check_m_sum(a: Body, b: Body, budget: Budget, stream: SeededStream,
                instance: str = "") -> list[CheckResult]:
    """After both symmetric bodies are put in M-position, the ratio
    |A cap B|^{1/n} / min(|A|^{1/n}, |B|^{1/n}) is compared with a configured floor."""
    n = a.n
    pa = m_position_search(a, budget.search_budget, budget.search_samples, stream.child("a"))
    pb = m_position_search(b, budget.search_budget, budget.search_samples, stream.child("b"))
    ta, tb = pa.body_image(a), pb.body_image(b)
    inter = intersection_volume_mc(ta, tb, budget.volume_samples, stream.child("cap"))
    va = volume(a, budget.volume_samples, stream.child("va")).value
    vb = volume(b, budget.volume_samples, stream.child("vb")).value
    ratio = (inter.value / min(va, vb)) ** (1.0 / n)
    err = _power_err(inter.value, inter.stderr, 1.0 / n) / min(va, vb) ** (1.0 / n)
    return [make_check("m_sum.floor", n, instance, M_SUM_FLOOR, ratio, err, "statistical",
                       budget.seed)]


# ---------------------------------------------------------------------------
# reverse entropy power inequalities
# ---------------------------------------------------------------------------

def unit_ball_uniform(n: int) -> UniformOnBody:
    return UniformOnBody(Ball.unit(n, ball_radius_for_volume(n, 1.0)))


def check_reverse_epi(x: Density, y: Density, beta0: float, budget: Budget,
                      stream: SeededStream, instance: str = "") -> list[CheckResult]:
    """Normalize both maxima to one, put both laws in M-position, then measure.

    ``.lower``: 2 <= H(X~ + Y~), i.e. h/n >= log sqrt 2.
    ``.ratio`` (report-only): H(X~ + Y~) / (H(X) + H(Y)).
    ``.ratio_volsum`` for uniform laws: the ratio is at most
    |A~ + B~|^{2/n} / (|A|^{2/n} + |B|^{2/n}).
    ``.summand_x/.summand_y`` (report-only): H(X~ + Z), H(Y~ + Z) with Z
    uniform on the unit-volume ball.
    """
    n = x.n
    for d in (x, y):
        p = d.params()
        if not (p.log_concave or p.kappa > 0 or p.beta >= max(2 * n + 1, beta0 * n)):
            raise ValueError(f"beta = {p.beta} is outside beta >= max(2n + 1, beta0 n)")
    placed = []
    for tag, d in (("x", x), ("y", y)):
        c0 = aep_c0(d, beta0) if not d.params().kappa > 0 else LOGCONCAVE_C0
        pos = put_measure_m_position(d, c0, budget.search_budget, budget.search_samples,
                                     stream.child(f"pos_{tag}"))
        placed.append(pos)
    tx, ty = placed[0].push(x), placed[1].push(y)
    # the pushed laws have maximum one, so H(X) + H(Y) refers to the normalized laws
    nx, ny = normalize_max_density(x), normalize_max_density(y)
    hx = entropy_of(nx, budget, stream.child("hx"))
    hy = entropy_of(ny, budget, stream.child("hy"))
    hs = entropy_of_sum([tx, ty], budget, stream.child("sum"))
    base = hx.H + hy.H
    ratio = hs.H / base
    ratio_err = ratio * _sigma(hs.H_stderr / hs.H, _sigma(hx.H_stderr, hy.H_stderr) / base)
    out = [
        make_check("repi.lower", n, instance, 2.0, hs.H, hs.H_stderr, seed=budget.seed),
        make_check("repi.ratio", n, instance, ratio, REPI_RATIO_CEILING, ratio_err, "report",
                   budget.seed),
    ]
    if isinstance(x, UniformOnBody) and isinstance(y, UniformOnBody):
        ta, tb = placed[0].body_image(x.body), placed[1].body_image(y.body)
        vol = _sum_volume([ta, tb], budget, stream.child("volsum"))
        bound = vol.value ** (2.0 / n) / base
        out.append(make_check("repi.ratio_volsum", n, instance, ratio, bound,
                              _sigma(ratio_err, bound * 2 * vol.stderr / (n * vol.value)),
                              seed=budget.seed))
    z = unit_ball_uniform(n)
    for tag, t in (("x", tx), ("y", ty)):
        hz = entropy_sum_smoothed(z, t, budget.samples, budget.inner, stream.child(f"z{tag}"))
        out.append(make_check(f"repi.summand_{tag}", n, instance, hz.H, REPI_RATIO_CEILING,
                              hz.H_stderr, "report", budget.seed))
    return out


def check_isotropic_repi(a: Body, b: Body, budget: Budget, stream: SeededStream,
                         instance: str = "") -> list[CheckResult]:
    """|A~ + B~|^{2/n} / (8 pi e) <= L_A^2 |A|^{2/n} + L_B^2 |B|^{2/n}, bodies in
    isotropic position, plus L^2 >= 1/(2 pi e) for each body."""
    n = a.n
    out = []
    images, terms, errs = [], 0.0, []
    for tag, body in (("a", a), ("b", b)):
        dens = UniformOnBody(body, volume(body, budget.volume_samples,
                                          stream.child(f"v{tag}")).value)
        pos = isotropic_map(dens, budget.samples, stream.child(f"iso{tag}"))
        images.append(pos.body_image(body))
        lsq = isotropic_constant(dens, budget.samples, stream.child(f"iso{tag}"))
        out.append(make_check(f"isotropic.constant_{tag}", n, instance, 1 / (2 * math.pi * math.e),
                              lsq.value, lsq.stderr, seed=budget.seed))
        # L^2 |A|^{2/n} is the common variance in isotropic position
        terms += pos.objective
        errs.append(pos.objective_stderr)
    vol = _sum_volume(images, budget, stream.child("sum"))
    lhs = vol.value ** (2.0 / n) / (8 * math.pi * math.e)
    err = _sigma(_power_err(vol.value, vol.stderr, 2.0 / n) / (8 * math.pi * math.e), *errs)
    out.append(make_check("isotropic_repi", n, instance, lhs, terms, err, seed=budget.seed))
    return out


def counterexample_ratios(beta: float, budget: Budget, stream: SeededStream):
    """H(X+Y)/H(X) and H(X-Y)/H(X) for i.i.d. 1D Pareto laws, with stderrs."""
    if not beta > 1:
        raise ValueError("beta must exceed 1 (the entropy diverges otherwise)")
    x = ParetoOrthant(beta, 1)
    hx = entropy_analytic(x).h
    neg = LinearPushforward(-np.eye(1), x)
    out = []
    for tag, y in (("plus", x), ("minus", neg)):
        hs = entropy_sum_smoothed(x, y, budget.samples, budget.inner, stream.child(tag))
        r = math.exp(2 * (hs.h - hx))
        out.append((r, 2 * r * hs.stderr))
    return out


def demo_counterexample(betas, budget: Budget, stream: SeededStream) -> list[CheckResult]:
    """min(H(X+Y), H(X-Y)) / H(X) along a sweep of Pareto exponents.

    Per-beta ratios are report-only. ``counter.trend`` records assert that the
    minimum ratio grows as beta decreases.
    """
    betas = sorted((float(b) for b in betas), reverse=True)
    if any(not b > 1 for b in betas):
        raise ValueError("beta must exceed 1 (the entropy diverges otherwise)")
    out, mins = [], []
    for b in betas:
        (rp, ep), (rm, em) = counterexample_ratios(b, budget, stream.child(f"beta{b:g}"))
        inst = f"pareto1d(beta={b:g})"
        out.append(make_check("counter.plus", 1, inst, rp, rp, ep, "report", budget.seed))
        out.append(make_check("counter.minus", 1, inst, rm, rm, em, "report", budget.seed))
        mins.append((rp, ep) if rp <= rm else (rm, em))
    for (b0, (r0, e0)), (b1, (r1, e1)) in zip(zip(betas, mins), zip(betas[1:], mins[1:])):
        out.append(make_check("counter.trend", 1, f"beta {b0:g} -> {b1:g}", r0, r1,
                              _sigma(e0, e1), "statistical", budget.seed))
    return out


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InstanceGenerator:
    """What the suite runs: dimensions, beta values and which checks."""

    dims: tuple = (1, 2)
    betas: tuple = ()
    beta0: float = 3.0
    checks: tuple = ()              # empty means all
    counter_betas: tuple = (3.0, 1.3, 1.1)
    seed: int = 42

    def __post_init__(self):
        for n in self.dims:
            if not 1 <= n <= MAX_DIM:
                raise ValueError(f"dimension {n} outside 1..{MAX_DIM}")
        if not self.beta0 > 2:
            raise ValueError("beta0 must exceed 2")

    def wants(self, name: str) -> bool:
        return not self.checks or name in self.checks

    def pareto_betas(self, n: int):
        """Betas for n that meet beta >= max(2n + 1, beta0 n)."""
        floor = max(2 * n + 1, self.beta0 * n)
        return sorted({max(b, floor) for b in self.betas} or {floor})


@dataclass(frozen=True)
class Job:
    name: str
    instance: str
    run: Callable[[Budget, SeededStream], list]


def _cube(n, lo=0.0, hi=1.0):
    return Box.cube(n, lo, hi)


def _unit_cube(n):
    return Box.cube(n, -0.5, 0.5)


def _unit_ball(n):
    return Ball.unit(n, ball_radius_for_volume(n, 1.0))


def _jobs(cfg: InstanceGenerator) -> list[Job]:
    jobs = []

    def add(name, instance, fn):
        if cfg.wants(name.split(".")[0]):
            jobs.append(Job(name, instance, fn))

    for n in cfg.dims:
        cube, ucube, uball = _cube(n), _unit_cube(n), _unit_ball(n)
        simplex = Simplex.standard(n)
        g1, g2 = Gaussian.standard(n), Gaussian.standard(n, 4.0)
        expo = ExponentialOrthant(1.0, n)
        b0 = cfg.beta0
        add("epi", f"gauss(I)+gauss(4I) n={n}",
            lambda B, s, g1=g1, g2=g2: check_epi(g1, g2, B, s, f"gauss(I)+gauss(4I) n={g1.n}"))
        add("epi", f"unif(cube)+unif(cube) n={n}",
            lambda B, s, c=cube: check_epi(UniformOnBody(c), UniformOnBody(c), B, s,
                                           f"unif(cube)+unif(cube) n={c.n}"))
        add("volsum", f"cube+cube n={n}",
            lambda B, s, c=cube: check_volsum(c, c, B, s, f"cube+cube n={c.n}"))
        if n >= 2:
            add("volsum", f"simplex+cube n={n}",
                lambda B, s, a=simplex, c=cube: check_volsum(a, c, B, s, f"simplex+cube n={a.n}"))
        add("vol_ent", f"3 cubes n={n}",
            lambda B, s, c=cube: check_vol_ent([c, c, c], B, s, f"3 cubes n={c.n}"))
        add("vol_ent", f"2 balls n={n}",
            lambda B, s, b=uball: check_vol_ent([b, b], B, s, f"2 balls n={b.n}"))
        add("cvx_ent", f"uniform(simplex) n={n}",
            lambda B, s, a=simplex: check_cvx_ent(UniformOnBody(a), B, s,
                                                  f"uniform(simplex) n={a.n}"))
        for peak in ("vertex", "face"):
            add("cvx_ent", f"powersimplex(kt=0.5,{peak}) n={n}",
                lambda B, s, n=n, peak=peak: check_cvx_ent(
                    PowerSimplex(0.5, n, peak), B, s, f"powersimplex(kt=0.5,{peak}) n={n}"))
        add("berwald", f"simplex,1-sum(x),(1,2) n={n}",
            lambda B, s, n=n: check_berwald(
                Simplex.standard(n), lambda x: 1 - x.sum(axis=1), 1.0, 2.0, B, s,
                f"simplex,1-sum(x),(1,2) n={n}", simplex_power_moment(n, face=False)))
        add("berwald", f"simplex,sum(x),(1,2) n={n}",
            lambda B, s, n=n: check_berwald(
                Simplex.standard(n), lambda x: x.sum(axis=1), 1.0, 2.0, B, s,
                f"simplex,sum(x),(1,2) n={n}", simplex_power_moment(n, face=True)))
        add("berwald", f"cube,constant,(1,3) n={n}",
            lambda B, s, c=cube: check_berwald(
                c, lambda x: np.full(len(x), 2.0), 1.0, 3.0, B, s, f"cube,constant,(1,3) n={c.n}",
                lambda r, v=c.exact_volume(): 2.0**r * v))
        add("berwald", f"cube,random affine,(1,2) n={n}",
            lambda B, s, c=cube: check_berwald(
                c, random_positive_affine(c, s.child("phi").rng), 1.0, 2.0, B, s.child("mc"),
                f"cube,random affine,(1,2) n={c.n}"))
        add("maxnorm", f"exponential n={n}",
            lambda B, s, d=expo: check_maxnorm(d, b0, B, s, f"exponential n={d.n}"))
        add("maxnorm", f"uniform(cube) n={n}",
            lambda B, s, c=ucube: check_maxnorm(UniformOnBody(c), b0, B, s,
                                                f"uniform(cube) n={c.n}"))
        for beta in cfg.pareto_betas(n):
            add("maxnorm", f"pareto(beta={beta:g}) n={n}",
                lambda B, s, n=n, beta=beta: check_maxnorm(
                    ParetoOrthant(beta, n), b0, B, s, f"pareto(beta={beta:g}) n={n}"))
            add("aep", f"pareto(beta={beta:g}) n={n}",
                lambda B, s, n=n, beta=beta: check_aep(
                    ParetoOrthant(beta, n), b0, B, s, f"pareto(beta={beta:g}) n={n}"))
        add("innerprod", f"gauss+gauss n={n}",
            lambda B, s, g=g1: check_innerprod(g, g, B, s, f"gauss+gauss n={g.n}"))
        add("innerprod", f"unif(ucube)+unif(ucube) n={n}",
            lambda B, s, c=ucube: check_innerprod(UniformOnBody(c), UniformOnBody(c), B, s,
                                                  f"unif(ucube)+unif(ucube) n={c.n}"))
        add("vol_maxnorm", f"2 ucubes n={n}",
            lambda B, s, c=ucube: check_vol_maxnorm([c, c], B, s, f"2 ucubes n={c.n}"))
        add("vol_maxnorm", f"3 ucubes n={n}",
            lambda B, s, c=ucube: check_vol_maxnorm([c, c, c], B, s, f"3 ucubes n={c.n}"))
        if n >= 2:
            add("rogers_shephard", f"simplex n={n}",
                lambda B, s, a=simplex: check_rogers_shephard(a, a, B, s, f"simplex n={a.n}"))
            add("rogers_shephard", f"ucube,uball n={n}",
                lambda B, s, a=ucube, b=uball: check_rogers_shephard(
                    a, b, B, s, f"ucube,uball n={a.n}"))
        add("renyi2", f"exponential n={n}",
            lambda B, s, d=expo: check_renyi2(d, B, s, f"exponential n={d.n}"))
        add("renyi2", f"gauss(4I) n={n}",
            lambda B, s, d=g2: check_renyi2(d, B, s, f"gauss(4I) n={d.n}"))
        add("renyi2", f"uniform(simplex) n={n}",
            lambda B, s, a=simplex: check_renyi2(UniformOnBody(a), B, s,
                                                 f"uniform(simplex) n={a.n}"))
        add("aep", f"gauss n={n}",
            lambda B, s, g=g1: check_aep(g, b0, B, s, f"gauss n={g.n}"))
        add("aep", f"exponential n={n}",
            lambda B, s, d=expo: check_aep(d, b0, B, s, f"exponential n={d.n}"))
        add("submod", f"gauss(1,2,3) n={n}",
            lambda B, s, n=n: check_submod(Gaussian.standard(n), Gaussian.standard(n, 2.0),
                                           Gaussian.standard(n, 3.0), B, s,
                                           f"gauss(1,2,3) n={n}"))
        add("submod", f"unif(cube,cube,ball) n={n}",
            lambda B, s, c=cube, b=uball: check_submod(
                UniformOnBody(c), UniformOnBody(c), UniformOnBody(b), B, s,
                f"unif(cube,cube,ball) n={c.n}"))
        if n >= 2:
            add("submod", f"volume zonotopes n={n}",
                lambda B, s, n=n: check_submod_volume(
                    *random_zonotopes(n, 3, s.child("gen").rng), B, s,
                    f"volume zonotopes n={n}"))
        for k in (1, 2):
            add("fracsub", f"gauss m=3 k={k} n={n}",
                lambda B, s, n=n, k=k: check_fracsub(
                    Gaussian.standard(n), [Gaussian.standard(n, t) for t in (0.5, 1.0, 2.0)], k,
                    B, s, f"gauss m=3 k={k} n={n}"))
            add("plunnecke", f"cubes m=3 k={k} n={n}",
                lambda B, s, c=cube, k=k: check_plunnecke(c, [c, c, c], k, B, s,
                                                          f"cubes m=3 k={k} n={c.n}"))
        add("plunnecke", f"cube+balls m=3 k=2 n={n}",
            lambda B, s, c=cube, b=uball: check_plunnecke(c, [b, c, b], 2, B, s,
                                                          f"cube+balls m=3 k=2 n={c.n}"))
        add("repi", f"gauss(I),gauss(diag) n={n}",
            lambda B, s, n=n: check_reverse_epi(
                Gaussian.standard(n), Gaussian(np.zeros(n), np.diag(np.linspace(0.25, 4, n))),
                3.0, B, s, f"gauss(I),gauss(diag) n={n}"))
        add("repi", f"unif(uball),unif(uball) n={n}",
            lambda B, s, b=uball: check_reverse_epi(UniformOnBody(b), UniformOnBody(b), 3.0,
                                                    B, s, f"unif(uball),unif(uball) n={b.n}"))
        for beta in cfg.pareto_betas(n):
            add("repi", f"pareto(beta={beta:g}) pair n={n}",
                lambda B, s, n=n, beta=beta: check_reverse_epi(
                    ParetoOrthant(beta, n), ParetoOrthant(beta, n), b0, B, s,
                    f"pareto(beta={beta:g}) pair n={n}"))
        add("isotropic_repi", f"ucube,ucube n={n}",
            lambda B, s, c=ucube: check_isotropic_repi(c, c, B, s, f"ucube,ucube n={c.n}"))
        if n >= 2:
            add("isotropic_repi", f"cube,simplex n={n}",
                lambda B, s, c=cube, a=simplex: check_isotropic_repi(c, a, B, s,
                                                                     f"cube,simplex n={c.n}"))
            add("m_sum", f"ucube,ellipse n={n}",
                lambda B, s, c=ucube, n=n: check_m_sum(
                    c, Ellipsoid(np.zeros(n), np.diag(_aspect_axes(n, 4.0)) ** 2), B, s,
                    f"ucube,ellipse n={n}"))
    add("counter", "pareto1d sweep",
        lambda B, s: demo_counterexample(cfg.counter_betas, B, s))
    return jobs


def _aspect_axes(n: int, aspect: float) -> np.ndarray:
    """Semi-axes of a unit-volume ellipsoid whose longest/shortest ratio is ``aspect``."""
    axes = np.geomspace(1.0, aspect, n)
    return axes * ball_radius_for_volume(n, 1.0) / np.prod(axes) ** (1.0 / n)


def random_zonotopes(n: int, count: int, rng: np.random.Generator, generators: int | None = None):
    g = generators or n + 2
    return [Zonotope(np.zeros(n), rng.standard_normal((g, n))) for _ in range(count)]


def _config_error(job: Job, budget: Budget, exc: Exception) -> list[CheckResult]:
    return [CheckResult(job.name, 0, f"{job.instance}: configuration error: {exc}",
                        math.nan, math.nan, math.nan, 0.0, "error", budget.seed)]


def run_job(job: Job, budget: Budget) -> list[CheckResult]:
    stream = SeededStream(budget.seed, f"{job.name}/{job.instance}")
    try:
        return job.run(budget, stream)
    except ValueError as exc:
        return _config_error(job, budget, exc)


def run_suite(config: InstanceGenerator, budget: Budget, workers: int = 1,
              extra_jobs=()) -> list[CheckResult]:
    """Run every configured check plus ``extra_jobs``; the sorted result is
    independent of ``workers``."""
    budget = replace(budget, seed=config.seed)
    jobs = _jobs(config) + list(extra_jobs)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: run_job(j, budget), jobs))
    else:
        parts = [run_job(j, budget) for j in jobs]
    results = [r for part in parts for r in part]
    return sorted(results, key=lambda r: (r.name, r.instance, r.seed))


def summarize(results) -> dict:
    counts = {"pass": 0, "fail": 0, "report-only": 0, "error": 0}
    for r in results:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    return counts
