"""Essential supports: superlevel sets {f >= c0^n ||f||} as explicit bodies."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import Body, Ellipsoid, Simplex, VPolytope, linear_image
from .bodies import volume as body_volume
from .entropy import entropy_analytic
from .measures import (Density, ExponentialOrthant, Gaussian, LinearPushforward,
                       ParetoOrthant, PowerSimplex, UniformOnBody)
from .numerics import Estimate, SeededStream, mc_mean
from .results import CheckResult, make_check

LOGCONCAVE_C0 = math.exp(-8.0)
LOGCONCAVE_C1 = 0.2


def c0_convex(beta0: float) -> float:
    """exp(-32 beta0 / (beta0 - 1)), the threshold for beta >= beta0 n."""
    if not beta0 > 1:
        raise ValueError("beta0 must exceed 1")
    if math.isinf(beta0):
        return math.exp(-32.0)
    return math.exp(-32.0 * beta0 / (beta0 - 1.0))


def c0_logconcave() -> tuple[float, float]:
    return LOGCONCAVE_C0, LOGCONCAVE_C1


@dataclass(frozen=True)
class EssentialSupport:
    body: Body
    c0: float
    level: float

    def volume(self, samples: int = 200_000, stream: SeededStream | None = None) -> Estimate:
        return body_volume(self.body, samples, stream or SeededStream(0, "support_volume"))


def _level_body(density: Density, c0: float) -> Body:
    n = density.n
    log_inv = -n * math.log(c0)  # log of ||f|| / level
    if isinstance(density, UniformOnBody):
        return density.body
    if isinstance(density, Gaussian):
        return Ellipsoid(density.mean, 2.0 * log_inv * density.cov)
    if isinstance(density, ExponentialOrthant):
        return Simplex.standard(n, log_inv / density.rate)
    if isinstance(density, ParetoOrthant):
        return Simplex.standard(n, math.expm1(log_inv / density.beta))
    if isinstance(density, PowerSimplex):
        # s^p >= c0^n with p = 1 / kappa_tilde
        t = math.exp(-log_inv * density.kappa_tilde) if density.power else 0.0
        if density.peak == "vertex":
            return Simplex.standard(n, 1.0 - t)
        if t == 0.0:
            return Simplex.standard(n)
        # {x >= 0, t <= sum x <= 1}: the simplex with the corner at 0 cut off
        eye = np.eye(n)
        return VPolytope(np.vstack([eye, t * eye]))
    if isinstance(density, LinearPushforward):
        return linear_image(density.matrix, _level_body(density.base, c0), density.offset)
    raise ValueError(f"no closed-form level set for {type(density).__name__}")


def essential_support(density: Density, c0: float) -> EssentialSupport:
    if not 0 < c0 < 1:
        raise ValueError("c0 must lie in (0, 1)")
    level = c0**density.n * density.max_density()
    return EssentialSupport(_level_body(density, c0), c0, level)


def support_mass_mc(density: Density, es: EssentialSupport, samples: int,
                    stream: SeededStream) -> Estimate:
    """Probability that X falls in the essential support."""
    return mc_mean(lambda size, sub: es.body.contains(density.sample(size, sub.rng)).astype(float),
                   samples, stream)


def mass_bound(density: Density, c0: float) -> float:
    """1 - c1^n with the log-concave constants, else one half."""
    if density.params().log_concave and c0 <= LOGCONCAVE_C0:
        return 1.0 - LOGCONCAVE_C1**density.n
    return 0.5


def check_support_mass(density: Density, es: EssentialSupport, samples: int,
                       stream: SeededStream, instance: str = "", seed: int = 0) -> CheckResult:
    mass = support_mass_mc(density, es, samples, stream)
    return make_check("aep.mass", density.n, instance, mass_bound(density, es.c0), mass.value,
                      mass.stderr, "statistical", seed)


def check_support_volume(density: Density, es: EssentialSupport, samples: int = 200_000,
                         stream: SeededStream | None = None, instance: str = "",
                         seed: int = 0) -> list[CheckResult]:
    """Both halves of 1/2 ||f||^{-1/n} <= |K_f|^{1/n} <= ||f||^{-1/n} / c0."""
    n = density.n
    vol = es.volume(samples, stream)
    r = vol.value ** (1.0 / n)
    r_err = r * vol.stderr / (n * vol.value) if vol.stderr else 0.0
    base = density.max_density() ** (-1.0 / n)
    return [
        make_check("aep.volume.lower", n, instance, 0.5 * base, r, r_err, seed=seed),
        make_check("aep.volume.upper", n, instance, r, base / es.c0, r_err, seed=seed),
    ]


def typset_ratio(density: Density, es: EssentialSupport, samples: int = 200_000,
                 stream: SeededStream | None = None) -> float:
    """H(X) / |K_f|^{2/n}."""
    vol = es.volume(samples, stream)
    return entropy_analytic(density).H / vol.value ** (2.0 / density.n)
