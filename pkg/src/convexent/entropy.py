"""Differential entropy: closed forms, plug-in Monte Carlo, sums and nearest neighbours.

All entropies are in nats. The entropy power is ``exp(2 h / n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from .measures import (Density, ExponentialOrthant, Gaussian, LinearPushforward,
                       NotEvaluable, ParetoOrthant, PowerSimplex, SumPair,
                       SymmetrizedPair, UniformOnBody)
from .numerics import Estimate, SeededStream, ball_volume, mc_mean

DEFAULT_INNER = 256
# outer points per chunk of the smoothed estimator; fixed so that results do
# not depend on how the work is split
SUM_CHUNK = 1024
KNN_DISTANCE_FLOOR = 1e-12


class NoClosedForm(ValueError):
    pass


@dataclass(frozen=True)
class EntropyValue:
    h: float
    n: int
    method: str
    stderr: float = 0.0
    samples: int = 0
    bias_flag: bool = False

    @property
    def H(self) -> float:
        return entropy_power(self)

    @property
    def H_stderr(self) -> float:
        """Delta-method error of the entropy power."""
        return 2.0 / self.n * self.H * self.stderr


def entropy_power(h: EntropyValue) -> float:
    return math.exp(2.0 * h.h / h.n)


def gaussian_closure(density: Density) -> Gaussian | None:
    """The Gaussian law of ``density`` when it is built from Gaussians by sums,
    differences and affine maps, else ``None``."""
    if isinstance(density, Gaussian):
        return density
    if isinstance(density, LinearPushforward):
        g = gaussian_closure(density.base)
        if g is None:
            return None
        u = density.matrix
        return Gaussian(u @ g.mean + density.offset, u @ g.cov @ u.T)
    if isinstance(density, SymmetrizedPair):
        g = gaussian_closure(density.base)
        return None if g is None else Gaussian(np.zeros(g.n), 2 * g.cov)
    if isinstance(density, SumPair):
        a, b = gaussian_closure(density.first), gaussian_closure(density.second)
        if a is None or b is None:
            return None
        return Gaussian(a.mean + b.mean, a.cov + b.cov)
    return None


def entropy_analytic(density: Density) -> EntropyValue:
    n = density.n
    g = gaussian_closure(density)
    if g is not None:
        h = 0.5 * n * math.log(2 * math.pi * math.e) + 0.5 * g._logdet
        return EntropyValue(h, n, "analytic")
    if isinstance(density, UniformOnBody):
        return EntropyValue(math.log(density.volume), n, "analytic")
    if isinstance(density, ExponentialOrthant):
        return EntropyValue(n * (1 - math.log(density.rate)), n, "analytic")
    if isinstance(density, ParetoOrthant):
        # log(1 + sum x) = log Gamma(beta) - log Gamma(beta - n) variables in the
        # E/G representation, whose log-means are digammas
        b = density.beta
        h = -math.log(density.norm_const) + b * (digamma(b) - digamma(b - n))
        return EntropyValue(float(h), n, "analytic")
    if isinstance(density, PowerSimplex):
        p = density.power
        if density.peak == "face":
            # s = sum x ~ Beta(p + n, 1)
            elog = -1.0 / (p + n)
        else:
            # 1 - sum x ~ Beta(p + 1, n)
            elog = digamma(p + 1) - digamma(p + n + 1)
        return EntropyValue(float(-math.log(density.norm_const) - p * elog), n, "analytic")
    if isinstance(density, LinearPushforward):
        base = entropy_analytic(density.base)
        return EntropyValue(base.h + math.log(density.abs_det), n, "analytic")
    raise NoClosedForm(f"no closed-form entropy for {type(density).__name__}")


def _log_pdf(density: Density, x):
    if hasattr(density, "log_pdf"):
        return density.log_pdf(x)
    with np.errstate(divide="ignore"):
        return np.log(density.pdf(x))


def entropy_plugin_mc(density: Density, samples: int, stream: SeededStream) -> EntropyValue:
    """Sample mean of -log f(X)."""
    if not density.evaluable:
        raise NotEvaluable(f"{type(density).__name__} is not directly evaluable")

    def draw(size, sub):
        return -_log_pdf(density, density.sample(size, sub.rng))

    est = mc_mean(draw, samples, stream)
    return EntropyValue(est.value, density.n, "plugin_mc", est.stderr, est.samples)


def renyi2_mc(density: Density, samples: int, stream: SeededStream) -> Estimate:
    """Estimate of the integral of f squared as the mean of f(X)."""
    if not density.evaluable:
        raise NotEvaluable(f"{type(density).__name__} is not directly evaluable")
    return mc_mean(lambda size, sub: density.pdf(density.sample(size, sub.rng)), samples, stream)


def _inner_values(x: Density, y: Density, s, rng, m, split):
    """Rows of i.i.d. unbiased estimates of f_{X+Y}(s), one row per outer point.

    One-sided: average of f_X(s - Y_j). Split: the Y-side term keeps only
    draws with <y, s> <= |s|^2 / 2 and the X-side term handles the other half
    space with f_Y(s - X_j). Each term is then bounded by the density near
    s / 2, which keeps heavy-tailed sums under control.
    """
    c, n = s.shape
    ys = y.sample(c * m, rng).reshape(c, m, n)
    diff = (s[:, None, :] - ys).reshape(-1, n)
    vals = x.pdf(diff).reshape(c, m)
    if split:
        half = 0.5 * np.einsum("ij,ij->i", s, s)[:, None]
        vals = vals * (np.einsum("imk,ik->im", ys, s) <= half)
        xo = x.sample(c * m, rng).reshape(c, m, n)
        other = y.pdf((s[:, None, :] - xo).reshape(-1, n)).reshape(c, m)
        other = other * (np.einsum("imk,ik->im", xo, s) < half)
        vals = vals + other
    return vals


def _corrected_log(vals, fallback):
    """-log of the row means with a second-order Jensen correction."""
    m = vals.shape[1]
    f = vals.mean(axis=1)
    var = vals.var(axis=1, ddof=1) / m
    zero = f <= 0
    if np.any(zero):
        # no inner draw reached the point; fold in the outer point's own
        # density value so the logarithm stays finite
        f = np.where(zero, fallback / (m + 1), f)
        var = np.where(zero, 0.0, var)
    return -np.log(f) - var / (2 * f * f)


def entropy_sum_smoothed(x: Density, y: Density, outer: int, inner: int = DEFAULT_INNER,
                         stream: SeededStream | None = None, split: bool | None = None
                         ) -> EntropyValue:
    """Estimate h(X + Y) from an inner Monte Carlo estimate of the density of X + Y.

    ``x`` must be evaluable. When ``y`` is evaluable too the split estimator
    is used (see ``_inner_density``). Each outer point gets fresh inner draws.
    ``bias_flag`` is set when the estimate from the first half of the inner
    draws differs from the full one by more than one stderr.
    """
    if not x.evaluable:
        raise NotEvaluable("the first summand must be evaluable")
    if x.n != y.n:
        raise ValueError("dimension mismatch")
    if inner < 4:
        raise ValueError("inner sample size must be at least 4")
    stream = stream or SeededStream(0, "entropy_sum")
    split = y.evaluable if split is None else split
    totals = np.zeros(2)
    sq = 0.0
    done = 0
    for i, start in enumerate(range(0, outer, SUM_CHUNK)):
        c = min(SUM_CHUNK, outer - start)
        sub = stream.child(f"chunk{i}")
        xo = x.sample(c, sub.child("outer_x").rng)
        s = xo + y.sample(c, sub.child("outer_y").rng)
        vals = _inner_values(x, y, s, sub.child("inner").rng, inner, split)
        own = x.pdf(xo)
        full = _corrected_log(vals, own)
        half = _corrected_log(vals[:, : inner // 2], own)
        totals += full.sum(), half.sum()
        sq += float((full * full).sum())
        done += c
    mean, mean_half = totals / done
    var = max(sq / done - mean * mean, 0.0) * done / (done - 1)
    se = math.sqrt(var / done)
    return EntropyValue(float(mean), x.n, "smoothed_sum", se, done,
                        bias_flag=bool(abs(mean - mean_half) > se))


def entropy_of_sum(densities, outer: int, inner: int = DEFAULT_INNER,
                   stream: SeededStream | None = None) -> EntropyValue:
    """h(X_1 + ... + X_m): closed form for Gaussian sums, else the smoothed
    estimator with the first law as the evaluable summand."""
    densities = list(densities)
    if len(densities) == 1:
        d = densities[0]
        try:
            return entropy_analytic(d)
        except NoClosedForm:
            return entropy_plugin_mc(d, outer, stream)
    g = [gaussian_closure(d) for d in densities]
    if all(gi is not None for gi in g):
        cov = sum(gi.cov for gi in g)
        return entropy_analytic(Gaussian(np.zeros(len(cov)), cov))
    rest = densities[1:]
    y = rest[0]
    for d in rest[1:]:
        y = SumPair(y, d)
    return entropy_sum_smoothed(densities[0], y, outer, inner, stream)


def entropy_knn(samples, k: int = 5) -> EntropyValue:
    """Kozachenko-Leonenko estimate from k-th nearest-neighbour distances."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    N, n = x.shape
    if k < 1 or N <= k:
        raise ValueError("need k >= 1 and more than k samples")
    dist, _ = cKDTree(x).query(x, k=k + 1)
    eps = np.maximum(dist[:, k], KNN_DISTANCE_FLOOR)
    logs = n * np.log(eps)
    h = digamma(N) - digamma(k) + math.log(ball_volume(n)) + logs.mean()
    return EntropyValue(float(h), n, "knn", float(logs.std(ddof=1) / math.sqrt(N)), N)

