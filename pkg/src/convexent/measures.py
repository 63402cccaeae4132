"""Kappa-concave probability densities and the convexity-parameter algebra.

For a kappa-concave law on R^n with density f we track

    kappa_tilde = kappa / (1 - n kappa),     beta = 1 / |kappa_tilde|,

so that f is kappa_tilde-concave; for kappa < 0 it has the form V^{-beta}
with V convex and beta = n - 1/kappa > n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .bodies import Body, sample_uniform_rng
from .numerics import SeededStream, is_spd

PARETO_BETA_MARGIN = 1e-6
M_MEAN_GEOMETRIC_BELOW = 1e-7


class NotEvaluable(TypeError):
    """The density of this law has no pointwise closed form."""


@dataclass(frozen=True)
class ConvexityParams:
    n: int
    kappa: float
    kappa_tilde: float
    beta: float

    @classmethod
    def from_kappa(cls, kappa: float, n: int) -> "ConvexityParams":
        if kappa > 1.0 / n + 1e-15:
            raise ValueError(f"kappa must be <= 1/n = {1 / n}")
        if kappa == -math.inf:
            return cls(n, kappa, -1.0 / n, float(n))
        if kappa == 0:
            return cls(n, 0.0, 0.0, math.inf)
        if abs(kappa - 1.0 / n) <= 1e-15:
            # uniform: f = phi^0, kappa_tilde = +inf
            return cls(n, 1.0 / n, math.inf, 0.0)
        kt = kappa / (1 - n * kappa)
        beta = n - 1.0 / kappa if kappa < 0 else 1.0 / kt
        return cls(n, kappa, kt, beta)

    @classmethod
    def from_kappa_tilde(cls, kappa_tilde: float, n: int) -> "ConvexityParams":
        if kappa_tilde == math.inf:
            return cls.from_kappa(1.0 / n, n)
        if kappa_tilde == 0:
            return cls.from_kappa(0.0, n)
        return cls.from_kappa(kappa_tilde / (1 + n * kappa_tilde), n)

    @property
    def log_concave(self) -> bool:
        return self.kappa >= 0


def convolution_kappa(k1: ConvexityParams, k2: ConvexityParams) -> ConvexityParams:
    """Convexity parameter of the convolution: 1/kappa = 1/kappa' + 1/kappa''."""
    if k1.n != k2.n:
        raise ValueError("dimension mismatch")
    a, b = k1.kappa, k2.kappa
    if a == 0 and b == 0:
        return ConvexityParams.from_kappa(0.0, k1.n)
    if not (-1 <= a <= 1 and -1 <= b <= 1) or not a + b > 0:
        raise ValueError(
            f"convolution rule needs kappa', kappa'' in [-1, 1] with kappa' + kappa'' > 0 "
            f"(got {a}, {b})")
    return ConvexityParams.from_kappa(a * b / (a + b), k1.n)


def m_mean(a, b, t: float, kappa: float):
    """M_kappa^{(t)}(a, b) with the min / max / geometric limits."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = 1 - t
    if kappa == -math.inf:
        return np.minimum(a, b)
    if kappa == math.inf:
        return np.maximum(a, b)
    if abs(kappa) < M_MEAN_GEOMETRIC_BELOW:
        # (.)^{1/kappa} amplifies rounding; the geometric limit is accurate here
        return a**t * b**s
    with np.errstate(divide="ignore"):
        return (t * a**kappa + s * b**kappa) ** (1.0 / kappa)


# ---------------------------------------------------------------------------
# density families
# ---------------------------------------------------------------------------

class Density:
    n: int
    evaluable = True

    def params(self) -> ConvexityParams:
        raise NotImplementedError

    def pdf(self, x) -> np.ndarray:
        raise NotEvaluable(f"{type(self).__name__} is not directly evaluable")

    def max_density(self) -> float:
        raise NotEvaluable(f"{type(self).__name__} has no closed-form maximum")

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def mean_cov(self):
        """Exact (mean, covariance), or ``None``."""
        return None

    @property
    def symmetric(self) -> bool:
        """Even about the origin (f(x) = f(-x))."""
        return False

    def _rows(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1, 1)
        if x.ndim == 1:
            x = x.reshape(1, -1) if x.size == self.n else x.reshape(-1, 1)
        if x.shape[1] != self.n:
            raise ValueError(f"dimension mismatch: expected {self.n}, got {x.shape[1]}")
        return x


@dataclass(frozen=True, eq=False)
class UniformOnBody(Density):
    body: Body
    volume: float | None = None

    def __post_init__(self):
        if self.volume is None:
            object.__setattr__(self, "volume", self.body.exact_volume())

    @property
    def n(self):
        return self.body.n

    def params(self):
        return ConvexityParams.from_kappa(1.0 / self.n, self.n)

    def pdf(self, x):
        return self.body.contains(self._rows(x)) / self.volume

    def max_density(self):
        return 1.0 / self.volume

    def sample(self, size, rng):
        return sample_uniform_rng(self.body, size, rng)

    def mean_cov(self):
        return _uniform_moments(self.body)

    @property
    def symmetric(self):
        return self.body.is_symmetric()


def _uniform_moments(body):
    from .bodies import Ball, Box, Ellipsoid, LinearImage, Simplex

    n = body.n
    if isinstance(body, Box):
        return (body.lo + body.hi) / 2, np.diag((body.hi - body.lo) ** 2 / 12)
    if isinstance(body, Ball):
        return body.center.copy(), body.radius**2 / (n + 2) * np.eye(n)
    if isinstance(body, Ellipsoid):
        return body.center.copy(), body.shape / (n + 2)
    if isinstance(body, Simplex):
        V = body.vertices
        m = V.mean(axis=0)
        s = V.sum(axis=0)
        second = (V.T @ V + np.outer(s, s)) / ((n + 1) * (n + 2))
        return m, second - np.outer(m, m)
    if isinstance(body, LinearImage):
        inner = _uniform_moments(body.child)
        if inner is None:
            return None
        m, C = inner
        u = body.matrix
        return u @ m + body.offset, u @ C @ u.T
    return None


@dataclass(frozen=True, eq=False)
class Gaussian(Density):
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.mean, dtype=float))
        C = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if C.shape != (m.size, m.size) or not is_spd(C):
            raise ValueError("covariance must be SPD and match the mean")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "cov", C)

    @classmethod
    def standard(cls, n: int, scale: float = 1.0) -> "Gaussian":
        return cls(np.zeros(n), scale * np.eye(n))

    @property
    def n(self):
        return self.mean.size

    @cached_property
    def _prec(self):
        return np.linalg.inv(self.cov)

    @cached_property
    def _chol(self):
        return np.linalg.cholesky(self.cov)

    @cached_property
    def _logdet(self):
        return float(np.linalg.slogdet(self.cov)[1])

    def params(self):
        return ConvexityParams.from_kappa(0.0, self.n)

    def log_pdf(self, x):
        d = self._rows(x) - self.mean
        q = np.einsum("ij,jk,ik->i", d, self._prec, d)
        return -0.5 * q - 0.5 * (self.n * math.log(2 * math.pi) + self._logdet)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def max_density(self):
        return math.exp(-0.5 * (self.n * math.log(2 * math.pi) + self._logdet))

    def sample(self, size, rng):
        return self.mean + rng.standard_normal((size, self.n)) @ self._chol.T

    def mean_cov(self):
        return self.mean.copy(), self.cov.copy()

    @property
    def symmetric(self):
        return not np.any(self.mean)


@dataclass(frozen=True, eq=False)
class ExponentialOrthant(Density):
    """lambda^n exp(-lambda (x_1 + ... + x_n)) on the positive orthant."""

    rate: float
    n: int

    def __post_init__(self):
        if self.rate <= 0 or self.n < 1:
            raise ValueError("rate must be positive and n >= 1")

    def params(self):
        return ConvexityParams.from_kappa(0.0, self.n)

    def log_pdf(self, x):
        x = self._rows(x)
        inside = np.all(x >= 0, axis=1)
        with np.errstate(invalid="ignore"):
            out = self.n * math.log(self.rate) - self.rate * x.sum(axis=1)
        return np.where(inside, out, -np.inf)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def max_density(self):
        return self.rate**self.n

    def sample(self, size, rng):
        return rng.standard_exponential((size, self.n)) / self.rate

    def mean_cov(self):
        return np.full(self.n, 1 / self.rate), np.eye(self.n) / self.rate**2


@dataclass(frozen=True, eq=False)
class ParetoOrthant(Density):
    """(beta-1)...(beta-n) (1 + x_1 + ... + x_n)^{-beta} on the positive orthant."""

    beta: float
    n: int

    def __post_init__(self):
        if not self.beta > self.n + PARETO_BETA_MARGIN:
            raise ValueError(f"Pareto family needs beta > n + {PARETO_BETA_MARGIN} (got {self.beta})")

    @cached_property
    def norm_const(self):
        return math.prod(self.beta - i for i in range(1, self.n + 1))

    def params(self):
        return ConvexityParams.from_kappa(-1.0 / (self.beta - self.n), self.n)

    def log_pdf(self, x):
        x = self._rows(x)
        inside = np.all(x >= 0, axis=1)
        s = np.where(inside, x.sum(axis=1), 0.0)
        return np.where(inside, math.log(self.norm_const) - self.beta * np.log1p(s), -np.inf)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def max_density(self):
        return self.norm_const

    def sample(self, size, rng):
        # X = E / G with E_i standard exponential and G ~ Gamma(beta - n)
        e = rng.standard_exponential((size, self.n))
        g = rng.standard_gamma(self.beta - self.n, size)
        return e / g[:, None]

    def mean_cov(self):
        a = self.beta - self.n
        if a <= 2:
            return None
        m = 1.0 / (a - 1)
        second = 1.0 / ((a - 1) * (a - 2))
        cov = np.full((self.n, self.n), second - m * m) + second * np.eye(self.n)
        return np.full(self.n, m), cov

    def marginal_cdf(self, t):
        """CDF of one coordinate: a 1D Pareto with density exponent beta - n + 1."""
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return 1.0 - (1.0 + t) ** (-(self.beta - self.n))


@dataclass(frozen=True, eq=False)
class PowerSimplex(Density):
    """Density proportional to s^p, p = 1/kappa_tilde, on {x_i > 0, sum x_i < 1}.

    ``peak="face"`` uses s = x_1 + ... + x_n (maximal on the face s = 1);
    ``peak="vertex"`` uses s = 1 - (x_1 + ... + x_n) (maximal at the origin).
    """

    kappa_tilde: float
    n: int
    peak: str = "face"

    def __post_init__(self):
        if not self.kappa_tilde > 0:
            raise ValueError("PowerSimplex needs kappa_tilde > 0")
        if self.peak not in ("face", "vertex"):
            raise ValueError("peak must be 'face' or 'vertex'")

    @property
    def power(self):
        return 0.0 if self.kappa_tilde == math.inf else 1.0 / self.kappa_tilde

    @cached_property
    def norm_const(self):
        p, n = self.power, self.n
        if self.peak == "face":
            # int_0^1 s^{p+n-1}/(n-1)! ds = 1/((n-1)! (p+n))
            return math.factorial(n - 1) * (p + n)
        # int_0^1 (1-s)^p s^{n-1}/(n-1)! ds = Gamma(p+1)/Gamma(p+n+1)
        return math.exp(math.lgamma(p + n + 1) - math.lgamma(p + 1))

    def params(self):
        return ConvexityParams.from_kappa_tilde(self.kappa_tilde, self.n)

    def _s(self, x):
        t = x.sum(axis=1)
        return t if self.peak == "face" else 1.0 - t

    def log_pdf(self, x):
        x = self._rows(x)
        inside = np.all(x >= 0, axis=1) & (x.sum(axis=1) <= 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.clip(self._s(x), 0.0, 1.0)
            val = math.log(self.norm_const) + (self.power * np.log(s) if self.power else 0.0)
        return np.where(inside, val, -np.inf)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def max_density(self):
        return self.norm_const

    def sample(self, size, rng):
        n, p = self.n, self.power
        # radial coordinate t = sum x_i, then a uniform point on the slice
        if self.peak == "face":
            t = rng.random(size) ** (1.0 / (p + n))
        else:
            t = 1.0 - rng.beta(p + 1.0, float(n), size)
        w = rng.standard_exponential((size, n))
        w /= w.sum(axis=1, keepdims=True)
        return w * t[:, None]


@dataclass(frozen=True, eq=False)
class LinearPushforward(Density):
    """Law of u X + offset."""

    matrix: np.ndarray
    base: Density
    offset: np.ndarray = field(default=None)

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if u.shape != (self.base.n, self.base.n):
            raise ValueError("dimension mismatch between map and density")
        off = np.zeros(self.base.n) if self.offset is None else np.asarray(self.offset, dtype=float)
        object.__setattr__(self, "matrix", u)
        object.__setattr__(self, "offset", off)

    @property
    def n(self):
        return self.base.n

    @property
    def evaluable(self):
        return self.base.evaluable

    @cached_property
    def _inv(self):
        return np.linalg.inv(self.matrix)

    @cached_property
    def abs_det(self):
        return abs(float(np.linalg.det(self.matrix)))

    def params(self):
        return self.base.params()

    def pdf(self, x):
        y = (self._rows(x) - self.offset) @ self._inv.T
        return self.base.pdf(y) / self.abs_det

    def max_density(self):
        return self.base.max_density() / self.abs_det

    def sample(self, size, rng):
        return self.base.sample(size, rng) @ self.matrix.T + self.offset

    def mean_cov(self):
        inner = self.base.mean_cov()
        if inner is None:
            return None
        m, C = inner
        return self.matrix @ m + self.offset, self.matrix @ C @ self.matrix.T

    @property
    def symmetric(self):
        return not np.any(self.offset) and self.base.symmetric


@dataclass(frozen=True, eq=False)
class SymmetrizedPair(Density):
    """Law of X - X' for an independent copy X'."""

    base: Density
    evaluable = False

    @property
    def n(self):
        return self.base.n

    def params(self):
        p = self.base.params()
        return convolution_kappa(p, p)

    def sample(self, size, rng):
        return self.base.sample(size, rng) - self.base.sample(size, rng)

    def mean_cov(self):
        inner = self.base.mean_cov()
        return None if inner is None else (np.zeros(self.n), 2 * inner[1])

    @property
    def symmetric(self):
        return True


@dataclass(frozen=True, eq=False)
class SumPair(Density):
    """Law of X + Y for independent X, Y."""

    first: Density
    second: Density
    evaluable = False

    def __post_init__(self):
        if self.first.n != self.second.n:
            raise ValueError("dimension mismatch")

    @property
    def n(self):
        return self.first.n

    def params(self):
        return convolution_kappa(self.first.params(), self.second.params())

    def sample(self, size, rng):
        return self.first.sample(size, rng) + self.second.sample(size, rng)

    def mean_cov(self):
        a, b = self.first.mean_cov() or (None, None), self.second.mean_cov() or (None, None)
        if a[0] is None or b[0] is None:
            return None
        return a[0] + b[0], a[1] + b[1]

    @property
    def symmetric(self):
        return self.first.symmetric and self.second.symmetric


def sum_of(densities) -> Density:
    """Right-nested SumPair of two or more laws."""
    densities = list(densities)
    out = densities[-1]
    for d in reversed(densities[:-1]):
        out = SumPair(d, out)
    return out


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def kappa_of(density: Density) -> ConvexityParams:
    return density.params()


def density_eval(density: Density, x) -> np.ndarray | float:
    """Normalized density value(s); zero outside the support."""
    if not density.evaluable:
        raise NotEvaluable(f"{type(density).__name__} is not directly evaluable")
    x = np.asarray(x, dtype=float)
    vals = density.pdf(x)
    single = x.ndim == 0 or (x.ndim == 1 and x.size == density.n)
    return float(vals[0]) if single else vals


def max_density(density: Density) -> float:
    return float(density.max_density())


def sample(density: Density, stream: SeededStream) -> np.ndarray:
    return density.sample(1, stream.rng)[0]


def sample_many(density: Density, size: int, stream: SeededStream) -> np.ndarray:
    return density.sample(size, stream.rng)


def symmetrize(density: Density) -> Density:
    return SymmetrizedPair(density)


def scale_density(density: Density, s: float) -> Density:
    """Law of s X."""
    return LinearPushforward(s * np.eye(density.n), density)


def normalize_max_density(density: Density) -> Density:
    """Rescale so that the maximum of the density equals one."""
    s = density.max_density() ** (1.0 / density.n)
    return scale_density(density, s)


@dataclass(frozen=True)
class MomentEstimate:
    mean: np.ndarray
    cov: np.ndarray
    mean_stderr: np.ndarray
    cov_stderr: np.ndarray
    samples: int


def mean_cov_mc(density: Density, samples: int, stream: SeededStream) -> MomentEstimate:
    x = density.sample(samples, stream.rng)
    m = x.mean(axis=0)
    d = x - m
    prods = d[:, :, None] * d[:, None, :]
    cov = prods.sum(axis=0) / (samples - 1)
    return MomentEstimate(
        m, cov,
        x.std(axis=0, ddof=1) / math.sqrt(samples),
        prods.std(axis=0, ddof=1) / math.sqrt(samples),
        samples)


def unit_volume_ball_density(n: int) -> UniformOnBody:
    from .bodies import Ball
    from .numerics import ball_radius_for_volume

    return UniformOnBody(Ball.unit(n, ball_radius_for_volume(n, 1.0)))

