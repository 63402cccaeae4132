"""Isotropic position, isotropic constants and numerical M-position search."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bodies import (Ball, Body, linear_image, sample_uniform_many, scale_body, translate,
                     volume)
from .measures import Density, LinearPushforward, UniformOnBody, scale_density
from .numerics import (Estimate, SeededStream, ball_radius_for_volume, mc_mean, sl_dim,
                       sl_param, whitening_map)
from .support import essential_support

RESTARTS = 3
VOLUME_SAMPLES = 200_000
ISOTROPY_BATCHES = 20
ANISOTROPY_TOL = 0.05


@dataclass(frozen=True)
class PositionResult:
    """The affine map x -> matrix @ (scale * x + shift)."""

    matrix: np.ndarray
    shift: np.ndarray
    objective: float
    objective_stderr: float
    iterations: int
    flagged: bool = False
    scale: float = 1.0
    baseline: float = field(default=math.nan)

    def apply(self, x):
        return (self.scale * np.asarray(x, dtype=float) + self.shift) @ self.matrix.T

    def push(self, density: Density) -> Density:
        return LinearPushforward(self.scale * self.matrix, density, self.matrix @ self.shift)

    def body_image(self, body: Body) -> Body:
        return linear_image(self.scale * self.matrix, body, self.matrix @ self.shift)


# ---------------------------------------------------------------------------
# isotropic position
# ---------------------------------------------------------------------------

def _moments(density: Density, samples: int, stream: SeededStream):
    """Mean and covariance (exact when available) plus per-batch covariances."""
    exact = density.mean_cov()
    if exact is not None:
        return exact[0], np.atleast_2d(exact[1]), None
    x = density.sample(samples, stream.rng)
    batches = [np.atleast_2d(np.cov(b, rowvar=False))
               for b in np.array_split(x, ISOTROPY_BATCHES)]
    return x.mean(axis=0), np.atleast_2d(np.cov(x, rowvar=False)), batches


def isotropic_map(density: Density, samples: int = 200_000,
                  stream: SeededStream | None = None) -> PositionResult:
    """Center, then whiten. ``objective`` is the common variance afterwards."""
    stream = stream or SeededStream(0, "isotropic")
    mean, cov, batches = _moments(density, samples, stream)
    W = whitening_map(cov)
    n = density.n
    sigma2 = float(np.linalg.det(cov) ** (1.0 / n))
    err = 0.0
    if batches is not None:
        vals = [np.linalg.det(c) ** (1.0 / n) for c in batches]
        err = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return PositionResult(W, -mean, sigma2, err, 0)


def isotropic_constant(density: Density, samples: int = 200_000,
                       stream: SeededStream | None = None) -> Estimate:
    """L^2 = ||f||^{2/n} sigma^2 after the isotropic map.

    Both factors are invariant under translations and determinant-one maps,
    so the value is computed from the covariance of ``density`` as given.
    """
    pos = isotropic_map(density, samples, stream)
    norm = density.max_density() ** (2.0 / density.n)
    return Estimate(norm * pos.objective, norm * pos.objective_stderr,
                    0 if pos.objective_stderr == 0 else samples)


def anisotropy(density: Density, samples: int = 200_000,
               stream: SeededStream | None = None) -> float:
    """Relative spread of the covariance eigenvalues: 0 in isotropic position."""
    _, cov, _ = _moments(density, samples, stream or SeededStream(0, "anisotropy"))
    w = np.linalg.eigvalsh(cov)
    return float((w.max() - w.min()) / w.mean())


# ---------------------------------------------------------------------------
# M-position
# ---------------------------------------------------------------------------

def _volume(body: Body, stream: SeededStream) -> Estimate:
    return volume(body, VOLUME_SAMPLES, stream)


def _centroid(body: Body, stream: SeededStream) -> np.ndarray:
    dens = UniformOnBody(body, 1.0)
    exact = dens.mean_cov()
    if exact is not None:
        return np.asarray(exact[0], dtype=float)
    return sample_uniform_many(body, 20_000, stream).mean(axis=0)


def _ball_points(n: int, volume: float, size: int, stream: SeededStream) -> np.ndarray:
    return sample_uniform_many(Ball.unit(n, ball_radius_for_volume(n, volume)), size, stream)


def _overlap(body: Body, z: np.ndarray, theta=None) -> np.ndarray:
    """Indicators of u^{-1} z in the body, i.e. of z in u(body)."""
    if theta is None:
        return body.contains(z)
    return body.contains(z @ sl_param(-np.asarray(theta)).T)


def _as_m(p: float, p_err: float, n: int) -> tuple[float, float]:
    if p <= 0:
        return 0.0, 0.0
    v = p ** (1.0 / n)
    return v, v * p_err / (n * p)


def m_functional(a: Body, samples: int = 100_000,
                 stream: SeededStream | None = None) -> Estimate:
    """|A cap D|^{1/n} / |A|^{1/n} with D the origin ball of volume |A|.

    Computed as p^{1/n} where p is the chance that a uniform point of D lies in A.
    """
    stream = stream or SeededStream(0, "m_functional")
    vol = _volume(a, stream.child("volume"))
    est = mc_mean(lambda size, sub: a.contains(_ball_points(a.n, vol.value, size, sub))
                  .astype(float), samples, stream.child("overlap"))
    value, err = _as_m(est.value, est.stderr, a.n)
    return Estimate(value, err, est.samples)


def m_position_search(a: Body, budget: int = 500, samples_per_eval: int = 10_000,
                      stream: SeededStream | None = None,
                      restarts: int = RESTARTS) -> PositionResult:
    """Maximize the M functional of u(A + t) over determinant-one u.

    The translation t is either zero or minus the centroid, whichever
    overlaps D more. The map u = sl_param(theta) is found by Nelder-Mead on a
    fixed sample of D (common random numbers), restarted with a shrinking
    initial simplex. The final objective is re-evaluated on fresh points and
    the identity is returned whenever it does at least as well.
    """
    stream = stream or SeededStream(0, "m_position")
    n = a.n
    vol = _volume(a, stream.child("volume")).value
    z = _ball_points(n, vol, samples_per_eval, stream.child("crn"))

    shifts = [np.zeros(n), -_centroid(a, stream.child("centroid"))]
    scores = [_overlap(translate(a, t), z).mean() for t in shifts]
    shift = shifts[int(np.argmax(scores))]
    body = translate(a, shift)

    def loss(theta):
        return -_overlap(body, z, theta).mean()

    theta = np.zeros(sl_dim(n))
    best = loss(theta)
    used = 1
    step = 1.0
    per_run = max(budget - 1, restarts) // restarts
    for _ in range(restarts if theta.size else 0):
        if used >= budget:
            break
        simplex = np.vstack([theta, theta + step * np.eye(theta.size)])
        res = minimize(loss, theta, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "maxfev": min(per_run, budget - used),
                                "xatol": 1e-3, "fatol": 0.5 / samples_per_eval})
        used += res.nfev
        if res.fun < best:
            theta, best = res.x, res.fun
        step *= 0.5

    fresh = _ball_points(n, vol, 4 * samples_per_eval, stream.child("final"))
    ident = _overlap(body, fresh).astype(float)
    found = _overlap(body, fresh, theta).astype(float)
    m0 = len(fresh)
    if found.mean() <= ident.mean():
        theta, found = np.zeros_like(theta), ident
    value, err = _as_m(found.mean(), found.std(ddof=1) / math.sqrt(m0), n)
    base, _ = _as_m(ident.mean(), 0.0, n)
    return PositionResult(sl_param(theta), shift, value, err, used, used >= budget,
                          baseline=base)


def put_measure_m_position(density: Density, c0: float, budget: int = 500,
                           samples: int = 10_000,
                           stream: SeededStream | None = None) -> PositionResult:
    """Place the measure so that its mass in the unit-volume ball D is large.

    The density is first rescaled to have maximum one; its essential support
    K_f is scaled to unit volume and put in M-position, and the same map is
    applied to the measure. ``objective`` is mu(D)^{1/n} after the map and
    ``baseline`` the same quantity for the rescaled but unmoved measure.
    """
    stream = stream or SeededStream(0, "measure_m_position")
    n = density.n
    s0 = density.max_density() ** (1.0 / n)
    normed = scale_density(density, s0)
    es = essential_support(normed, c0)
    kvol = _volume(es.body, stream.child("kvol")).value
    r = kvol ** (1.0 / n)
    pos = m_position_search(scale_body(es.body, 1.0 / r), budget, samples,
                            stream.child("search"))
    # u(K'/r + t) = u(K + r t) / r, so the measure is shifted by r t
    shift = r * pos.shift
    result = PositionResult(pos.matrix, shift, 0.0, 0.0, pos.iterations, pos.flagged,
                            scale=s0)
    radius = ball_radius_for_volume(n, 1.0)

    def mass(res):
        def draw(size, sub):
            y = res.apply(density.sample(size, sub.rng))
            return (np.einsum("ij,ij->i", y, y) <= radius * radius).astype(float)
        return mc_mean(draw, 4 * samples, stream.child("mass"))

    after = mass(result)
    before = mass(PositionResult(np.eye(n), np.zeros(n), 0.0, 0.0, 0, scale=s0))
    value, err = _as_m(after.value, after.stderr, n)
    base, _ = _as_m(before.value, 0.0, n)
    return PositionResult(pos.matrix, shift, value, err, pos.iterations, pos.flagged,
                          scale=s0, baseline=base)
