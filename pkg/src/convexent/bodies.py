"""Convex bodies: support functions, membership, Minkowski sums, volumes, sampling.

Bodies are immutable. Every variant exposes an unnormalized (1-homogeneous)
support function, which is what makes Minkowski sums and linear images cheap:

    h_{A+B}(theta) = h_A(theta) + h_B(theta),     h_{uA}(theta) = h_A(u^T theta).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .numerics import (
    MAX_DIM,
    TOL_LP,
    Estimate,
    SeededStream,
    ball_volume,
    feasible_nonneg,
    lp_point_in_hull,
    mc_mean,
)

# hit-and-run defaults (heuristic mixing, no certified mixing time)
HR_BURN_IN = 1000
HR_THIN_PER_DIM = 50
REJECTION_ATTEMPT_FACTOR = 200

# zonotopes with more generators than this are not expanded to vertex lists
_MAX_ZONOTOPE_VERTEX_GENERATORS = 12


class OracleUnavailable(RuntimeError):
    """Exact membership (or an exact formula) is not available for this body."""


class Body:
    """Base class; concrete variants are frozen dataclasses below."""

    n: int

    # -- interface -----------------------------------------------------
    def support(self, theta: np.ndarray) -> np.ndarray:
        """Support values for directions stacked in the rows of ``theta``."""
        raise NotImplementedError

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Vectorized membership for points stacked in rows."""
        raise NotImplementedError

    def vertex_list(self):
        """Finite set whose convex hull is the body, or ``None``."""
        return None

    def reflect(self) -> "Body":
        raise NotImplementedError

    def exact_volume(self) -> float:
        raise OracleUnavailable(f"exact volume unavailable for {type(self).__name__}")

    def _sample_direct(self, size: int, rng: np.random.Generator):
        """Exact i.i.d. uniform sampler, or ``None`` when none exists."""
        return None

    # -- shared helpers ------------------------------------------------
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        eye = np.eye(self.n)
        hi = self.support(eye)
        lo = -self.support(-eye)
        return lo, hi

    def is_symmetric(self, samples: int = 64, seed: int = 0) -> bool:
        """Central symmetry about the origin, tested on random directions."""
        rng = np.random.default_rng(seed)
        th = rng.standard_normal((samples, self.n))
        a, b = self.support(th), self.support(-th)
        return bool(np.allclose(a, b, rtol=1e-9, atol=1e-9 * max(1.0, np.abs(a).max())))


def _rows(x, n=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if n is not None and x.shape[1] != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {x.shape[1]}")
    return x


@dataclass(frozen=True, eq=False)
class Box(Body):
    """Axis-parallel box prod_i [lo_i, hi_i]."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError("box needs lo <= hi of equal shapes")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, n: int, lo: float = 0.0, hi: float = 1.0) -> "Box":
        return cls(np.full(n, lo), np.full(n, hi))

    @property
    def n(self):
        return self.lo.size

    def support(self, theta):
        th = _rows(theta, self.n)
        return np.maximum(th * self.lo, th * self.hi).sum(axis=1)

    def contains(self, x):
        x = _rows(x, self.n)
        return np.all((x >= self.lo - TOL_LP) & (x <= self.hi + TOL_LP), axis=1)

    def distance(self, x):
        x = _rows(x, self.n)
        return np.linalg.norm(x - np.clip(x, self.lo, self.hi), axis=1)

    def vertex_list(self):
        return np.array(list(itertools.product(*zip(self.lo, self.hi))), dtype=float)

    def reflect(self):
        return Box(-self.hi, -self.lo)

    def exact_volume(self):
        return float(np.prod(self.hi - self.lo))

    def _sample_direct(self, size, rng):
        return self.lo + (self.hi - self.lo) * rng.random((size, self.n))


@dataclass(frozen=True, eq=False)
class Ball(Body):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @classmethod
    def unit(cls, n: int, radius: float = 1.0) -> "Ball":
        return cls(np.zeros(n), radius)

    @property
    def n(self):
        return self.center.size

    def support(self, theta):
        th = _rows(theta, self.n)
        return th @ self.center + self.radius * np.linalg.norm(th, axis=1)

    def contains(self, x):
        return self.distance(x) <= TOL_LP * max(1.0, self.radius)

    def distance(self, x):
        x = _rows(x, self.n)
        return np.maximum(np.linalg.norm(x - self.center, axis=1) - self.radius, 0.0)

    def reflect(self):
        return Ball(-self.center, self.radius)

    def exact_volume(self):
        return ball_volume(self.n, self.radius)

    def _sample_direct(self, size, rng):
        return self.center + self.radius * _unit_ball_points(size, self.n, rng)


def _unit_ball_points(size, n, rng):
    g = rng.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.random((size, 1)) ** (1.0 / n)


@dataclass(frozen=True, eq=False)
class Ellipsoid(Body):
    """{x : (x - c)^T Q^{-1} (x - c) <= 1} for an SPD shape matrix Q."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        Q = np.atleast_2d(np.asarray(self.shape, dtype=float))
        if Q.shape != (c.size, c.size):
            raise ValueError("shape matrix must be n x n")
        Q = (Q + Q.T) / 2
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise ValueError("ellipsoid shape matrix must be SPD")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", Q)

    @property
    def n(self):
        return self.center.size

    @cached_property
    def _chol(self):
        return np.linalg.cholesky(self.shape)

    @cached_property
    def _inv(self):
        return np.linalg.inv(self.shape)

    def support(self, theta):
        th = _rows(theta, self.n)
        q = np.einsum("ij,jk,ik->i", th, self.shape, th)
        return th @ self.center + np.sqrt(np.maximum(q, 0.0))

    def contains(self, x):
        d = _rows(x, self.n) - self.center
        return np.einsum("ij,jk,ik->i", d, self._inv, d) <= 1 + TOL_LP

    def reflect(self):
        return Ellipsoid(-self.center, self.shape)

    def exact_volume(self):
        return ball_volume(self.n) * math.sqrt(np.linalg.det(self.shape))

    def _sample_direct(self, size, rng):
        return self.center + _unit_ball_points(size, self.n, rng) @ self._chol.T


class _HullMixin:
    """Vectorized membership through the facet inequalities of a point hull."""

    @cached_property
    def _facets(self):
        V = self.vertex_list()
        if self.n == 1:
            return np.array([[1.0], [-1.0]]), np.array([-V.max(), V.min()])
        try:
            hull = ConvexHull(V)
        except QhullError:
            return None
        return hull.equations[:, :-1], hull.equations[:, -1]

    def _hull_contains(self, x):
        x = _rows(x, self.n)
        if self._facets is None:  # lower-dimensional hull: per-point LP
            V = self.vertex_list()
            return np.array([lp_point_in_hull(p, V) for p in x])
        A, b = self._facets
        scale = max(1.0, float(np.abs(self.vertex_list()).max()))
        return np.all(x @ A.T + b <= TOL_LP * scale, axis=1)


@dataclass(frozen=True, eq=False)
class Simplex(_HullMixin, Body):
    """Convex hull of n + 1 affinely independent vertices (rows)."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.shape != (V.shape[1] + 1, V.shape[1]):
            raise ValueError("a simplex in R^n needs n + 1 vertices")
        if abs(np.linalg.det(V[1:] - V[0])) < 1e-14 * max(1.0, np.abs(V).max()) ** V.shape[1]:
            raise ValueError("simplex vertices must be affinely independent")
        object.__setattr__(self, "vertices", V)

    @classmethod
    def standard(cls, n: int, side: float = 1.0) -> "Simplex":
        """{x_i >= 0, x_1 + ... + x_n <= side}."""
        return cls(np.vstack([np.zeros(n), side * np.eye(n)]))

    @property
    def n(self):
        return self.vertices.shape[1]

    @cached_property
    def _bary(self):
        return np.linalg.inv((self.vertices[1:] - self.vertices[0]).T)

    def support(self, theta):
        return (_rows(theta, self.n) @ self.vertices.T).max(axis=1)

    def contains(self, x):
        lam = (_rows(x, self.n) - self.vertices[0]) @ self._bary.T
        tol = TOL_LP
        return np.all(lam >= -tol, axis=1) & (lam.sum(axis=1) <= 1 + tol)

    def vertex_list(self):
        return self.vertices

    def reflect(self):
        return Simplex(-self.vertices)

    def exact_volume(self):
        return abs(np.linalg.det(self.vertices[1:] - self.vertices[0])) / math.factorial(self.n)

    def _sample_direct(self, size, rng):
        w = rng.standard_exponential((size, self.n + 1))
        w /= w.sum(axis=1, keepdims=True)
        return w @ self.vertices


@dataclass(frozen=True, eq=False)
class VPolytope(_HullMixin, Body):
    """Convex hull of a finite vertex list."""

    vertices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.atleast_2d(np.asarray(self.vertices, dtype=float)))

    @property
    def n(self):
        return self.vertices.shape[1]

    def support(self, theta):
        return (_rows(theta, self.n) @ self.vertices.T).max(axis=1)

    def contains(self, x):
        return self._hull_contains(x)

    def vertex_list(self):
        return self.vertices

    def reflect(self):
        return VPolytope(-self.vertices)


@dataclass(frozen=True, eq=False)
class Zonotope(_HullMixin, Body):
    """center + sum_i [0, 1] g_i for generators g_i stacked in rows."""

    center: np.ndarray
    generators: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        G = np.asarray(self.generators, dtype=float).reshape(-1, c.size)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "generators", G)

    @classmethod
    def from_segments(cls, *segments) -> "Zonotope":
        """Sum of segments [a_i, b_i]."""
        a = np.array([s[0] for s in segments], dtype=float)
        b = np.array([s[1] for s in segments], dtype=float)
        return cls(a.sum(axis=0), b - a)

    @property
    def n(self):
        return self.center.size

    def support(self, theta):
        th = _rows(theta, self.n)
        return th @ self.center + np.maximum(th @ self.generators.T, 0.0).sum(axis=1)

    def contains(self, x):
        if len(self.generators) <= _MAX_ZONOTOPE_VERTEX_GENERATORS:
            return self._hull_contains(x)
        return np.array([self._lp_contains(p) for p in _rows(x, self.n)])

    def _lp_contains(self, p):
        # p - c = G^T mu with 0 <= mu <= 1, written as mu + s = 1, (mu, s) >= 0
        k = len(self.generators)
        A = np.block([[self.generators.T, np.zeros((self.n, k))], [np.eye(k), np.eye(k)]])
        b = np.concatenate([p - self.center, np.ones(k)])
        return feasible_nonneg(A, b)

    def vertex_list(self):
        k = len(self.generators)
        if k > _MAX_ZONOTOPE_VERTEX_GENERATORS:
            return None
        mask = np.array(list(itertools.product((0.0, 1.0), repeat=k))).reshape(-1, k)
        return self.center + mask @ self.generators

    def reflect(self):
        return Zonotope(-self.center, -self.generators)

    def exact_volume(self):
        G = self.generators
        if len(G) < self.n:
            return 0.0
        return float(sum(abs(np.linalg.det(G[list(S)]))
                         for S in itertools.combinations(range(len(G)), self.n)))


@dataclass(frozen=True, eq=False)
class LinearImage(Body):
    """u(A) + offset for an invertible matrix u."""

    matrix: np.ndarray
    child: Body
    offset: np.ndarray = field(default=None)

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if u.shape != (self.child.n, self.child.n):
            raise ValueError("dimension mismatch between map and body")
        off = np.zeros(self.child.n) if self.offset is None else np.asarray(self.offset, dtype=float)
        object.__setattr__(self, "matrix", u)
        object.__setattr__(self, "offset", off)

    @property
    def n(self):
        return self.child.n

    @cached_property
    def _inv(self):
        return np.linalg.inv(self.matrix)

    def support(self, theta):
        th = _rows(theta, self.n)
        return self.child.support(th @ self.matrix) + th @ self.offset

    def contains(self, x):
        return self.child.contains((_rows(x, self.n) - self.offset) @ self._inv.T)

    def vertex_list(self):
        V = self.child.vertex_list()
        return None if V is None else V @ self.matrix.T + self.offset

    def reflect(self):
        return LinearImage(-self.matrix, self.child, -self.offset)

    def exact_volume(self):
        return abs(np.linalg.det(self.matrix)) * self.child.exact_volume()

    def _sample_direct(self, size, rng):
        y = self.child._sample_direct(size, rng)
        return None if y is None else y @ self.matrix.T + self.offset


@dataclass(frozen=True, eq=False)
class SumNode(_HullMixin, Body):
    """Minkowski sum of children without a closed-form representation."""

    children: tuple

    def __post_init__(self):
        ch = tuple(self.children)
        if len(ch) < 2 or len({c.n for c in ch}) != 1:
            raise ValueError("a sum node needs at least two children of equal dimension")
        object.__setattr__(self, "children", ch)

    @property
    def n(self):
        return self.children[0].n

    def support(self, theta):
        return sum(c.support(theta) for c in self.children)

    def vertex_list(self):
        return self._vertices

    @cached_property
    def _vertices(self):
        lists = [c.vertex_list() for c in self.children]
        if any(v is None for v in lists):
            return None
        out = lists[0]
        for V in lists[1:]:
            out = _prune_to_hull((out[:, None, :] + V[None, :, :]).reshape(-1, self.n))
        return out

    @cached_property
    def _distance_form(self):
        """(core, ball) when the sum is boxes plus balls."""
        balls = [c for c in self.children if isinstance(c, Ball)]
        rest = [c for c in self.children if not isinstance(c, Ball)]
        if not balls or not all(isinstance(c, Box) for c in rest):
            return None
        ball = Ball(sum(b.center for b in balls), sum(b.radius for b in balls))
        core = Box(sum(c.lo for c in rest), sum(c.hi for c in rest)) if rest else None
        return core, ball

    def contains(self, x):
        if self.vertex_list() is not None:
            return self._hull_contains(x)
        form = self._distance_form
        if form is not None:
            core, ball = form
            x = _rows(x, self.n)
            if core is None:
                return ball.contains(x)
            return core.distance(x - ball.center) <= ball.radius * (1 + TOL_LP)
        raise OracleUnavailable(
            "exact membership in this Minkowski sum is unavailable; "
            "use sampled sums (X + Y) instead of membership")

    def reflect(self):
        return SumNode(tuple(c.reflect() for c in self.children))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def support_function(body: Body, direction) -> float:
    """sup_{x in A} <x, theta> for the normalized direction theta."""
    d = np.asarray(direction, dtype=float).ravel()
    norm = np.linalg.norm(d)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    return float(body.support(d / norm)[0])


def contains(body: Body, point) -> bool:
    """Exact membership of a single point.

    Vertex-represented bodies (and sums of them) are decided by the phase-one
    LP; other variants use their closed forms.
    """
    p = np.asarray(point, dtype=float).ravel()
    if p.size != body.n:
        raise ValueError(f"dimension mismatch: body in R^{body.n}, point in R^{p.size}")
    if isinstance(body, (VPolytope, SumNode)) and body.vertex_list() is not None:
        return lp_point_in_hull(p, body.vertex_list())
    return bool(body.contains(p)[0])


def contains_many(body: Body, points) -> np.ndarray:
    return body.contains(_rows(points, body.n))


def minkowski_sum(a: Body, b: Body) -> Body:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    if isinstance(a, Box) and isinstance(b, Box):
        return Box(a.lo + b.lo, a.hi + b.hi)
    if isinstance(a, Ball) and isinstance(b, Ball):
        return Ball(a.center + b.center, a.radius + b.radius)
    if isinstance(a, Zonotope) and isinstance(b, Zonotope):
        return Zonotope(a.center + b.center, np.vstack([a.generators, b.generators]))
    if isinstance(a, Ellipsoid) and isinstance(b, Ellipsoid):
        s = _homothety_ratio(a.shape, b.shape)
        if s is not None:
            return Ellipsoid(a.center + b.center, (1 + s) ** 2 * a.shape)
    if isinstance(a, (VPolytope, Simplex)) and isinstance(b, (VPolytope, Simplex)):
        V = (a.vertex_list()[:, None, :] + b.vertex_list()[None, :, :]).reshape(-1, a.n)
        return VPolytope(_prune_to_hull(V))
    kids = []
    for c in (a, b):
        kids.extend(c.children if isinstance(c, SumNode) else (c,))
    return SumNode(tuple(kids))


def _homothety_ratio(Qa, Qb):
    # Qb = s^2 Qa for some s > 0
    s2 = np.trace(Qb) / np.trace(Qa)
    if np.allclose(Qb, s2 * Qa, rtol=1e-12, atol=1e-14):
        return math.sqrt(s2)
    return None


def _prune_to_hull(V):
    if V.shape[1] == 1:
        return np.array([[V.min()], [V.max()]])
    try:
        return V[ConvexHull(V).vertices]
    except QhullError:
        return V


def reflect(body: Body) -> Body:
    return body.reflect()


def difference_body(a: Body) -> Body:
    """A - A."""
    return minkowski_sum(a, a.reflect())


def volume_exact(body: Body) -> float:
    return float(body.exact_volume())


def _check_mc_dim(body):
    if body.n > MAX_DIM:
        raise ValueError(f"Monte Carlo volumes are limited to n <= {MAX_DIM}")


def _finite_bbox(body):
    lo, hi = body.bbox()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("body is unbounded")
    return lo, hi


def volume_mc(body: Body, samples: int, stream: SeededStream) -> Estimate:
    """Hit-or-miss volume over the tight axis bounding box."""
    _check_mc_dim(body)
    lo, hi = _finite_bbox(body)
    box_vol = float(np.prod(hi - lo))

    def draw(size, sub):
        x = lo + (hi - lo) * sub.rng.random((size, body.n))
        return box_vol * body.contains(x)

    return mc_mean(draw, samples, stream)


def volume(body: Body, samples: int, stream: SeededStream) -> Estimate:
    """Exact volume when a formula exists (stderr 0), else hit-or-miss."""
    try:
        return Estimate(volume_exact(body), 0.0, 0)
    except OracleUnavailable:
        return volume_mc(body, samples, stream)


def intersection_volume_mc(a: Body, b: Body, samples: int, stream: SeededStream) -> Estimate:
    _check_mc_dim(a)
    la, ha = _finite_bbox(a)
    lb, hb = _finite_bbox(b)
    lo, hi = np.maximum(la, lb), np.minimum(ha, hb)
    if np.any(hi <= lo):
        return Estimate(0.0, 0.0, samples)
    box_vol = float(np.prod(hi - lo))

    def draw(size, sub):
        x = lo + (hi - lo) * sub.rng.random((size, a.n))
        return box_vol * (a.contains(x) & b.contains(x))

    return mc_mean(draw, samples, stream)


def sample_uniform_many(body: Body, size: int, stream: SeededStream,
                        burn_in: int = HR_BURN_IN, thin: int | None = None) -> np.ndarray:
    """``size`` uniform points in the body (rows).

    Closed-form samplers where they exist; otherwise rejection from the
    bounding box, falling back to hit-and-run when the rejection cap is hit.
    """
    return sample_uniform_rng(body, size, stream.rng, burn_in, thin)


def sample_uniform_rng(body: Body, size: int, rng: np.random.Generator,
                       burn_in: int = HR_BURN_IN, thin: int | None = None) -> np.ndarray:
    x = body._sample_direct(size, rng)
    if x is not None:
        return x
    lo, hi = _finite_bbox(body)
    if np.any(hi - lo <= 0):
        raise ValueError("body is not full-dimensional")
    out = []
    have = 0
    attempts = 0
    cap = REJECTION_ATTEMPT_FACTOR * size + 10_000
    while have < size and attempts < cap:
        batch = min(max(2 * (size - have), 1024), 1 << 18)
        cand = lo + (hi - lo) * rng.random((batch, body.n))
        acc = cand[body.contains(cand)]
        out.append(acc)
        have += len(acc)
        attempts += batch
    if have >= size:
        return np.vstack(out)[:size]
    start = np.vstack(out)[0] if have else None
    return _hit_and_run(body, size, rng, start, burn_in, thin)


def sample_uniform(body: Body, stream: SeededStream) -> np.ndarray:
    return sample_uniform_many(body, 1, stream)[0]


def hit_and_run(body: Body, size: int, stream: SeededStream, start=None,
                burn_in: int = HR_BURN_IN, thin: int | None = None) -> np.ndarray:
    """Hit-and-run walk; chords found by bisection on the membership oracle.

    Mixing is heuristic: no certified mixing time is claimed at these budgets.
    """
    return _hit_and_run(body, size, stream.rng, start, burn_in, thin)


def _hit_and_run(body, size, rng, start, burn_in, thin):
    n = body.n
    thin = thin or HR_THIN_PER_DIM * n
    lo, hi = _finite_bbox(body)
    if start is None:
        start = (lo + hi) / 2
        if not body.contains(start)[0]:
            raise RuntimeError("rejection cap exceeded and no interior start point for hit-and-run")
    x = np.asarray(start, dtype=float)
    span = float(np.linalg.norm(hi - lo))

    facets = getattr(body, "_facets", None) if isinstance(body, _HullMixin) else None

    def edge(x, d):
        if facets is not None:
            # largest t with A (x + t d) + b <= 0
            A, b = facets
            rate = A @ d
            room = -(A @ x + b)
            pos = rate > 1e-15
            return float(np.min(np.maximum(room[pos], 0.0) / rate[pos])) if pos.any() else span
        a, b = 0.0, span
        for _ in range(50):
            m = (a + b) / 2
            if body.contains(x + m * d)[0]:
                a = m
            else:
                b = m
        return a

    out = np.empty((size, n))
    total = burn_in + size * thin
    k = 0
    for step in range(total):
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
        t_hi, t_lo = edge(x, d), edge(x, -d)
        x = x + (rng.random() * (t_hi + t_lo) - t_lo) * d
        if step >= burn_in and (step - burn_in) % thin == thin - 1:
            out[k] = x
            k += 1
    return out


def scale_body(body: Body, s: float) -> Body:
    """s * A (homothety about the origin)."""
    if isinstance(body, Box):
        lo, hi = s * body.lo, s * body.hi
        return Box(np.minimum(lo, hi), np.maximum(lo, hi))
    if isinstance(body, Ball):
        return Ball(s * body.center, abs(s) * body.radius)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(s * body.center, s * s * body.shape)
    if isinstance(body, Simplex):
        return Simplex(s * body.vertices)
    if isinstance(body, VPolytope):
        return VPolytope(s * body.vertices)
    if isinstance(body, Zonotope):
        return Zonotope(s * body.center, s * body.generators)
    if isinstance(body, SumNode):
        return SumNode(tuple(scale_body(c, s) for c in body.children))
    if isinstance(body, LinearImage):
        return LinearImage(s * body.matrix, body.child, s * body.offset)
    raise TypeError(f"cannot scale {type(body).__name__}")


def scale_to_unit_volume(body: Body, volume: float | None = None,
                         stream: SeededStream | None = None, samples: int = 200_000) -> Body:
    """|A|^{-1/n} A. Uses the exact volume when available, else a MC estimate."""
    if volume is None:
        try:
            volume = body.exact_volume()
        except OracleUnavailable:
            if stream is None:
                raise
            volume = volume_mc(body, samples, stream).value
    if not volume > 0:
        raise ValueError("degenerate (zero-volume) body")
    return scale_body(body, volume ** (-1.0 / body.n))


def translate(body: Body, t) -> Body:
    return linear_image(np.eye(body.n), body, t)


def linear_image(u, body: Body, offset=None) -> Body:
    """u(A) + offset, in closed form where the variant allows it."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape != (body.n, body.n):
        raise ValueError(f"dimension mismatch: map {u.shape}, body in R^{body.n}")
    t = np.zeros(body.n) if offset is None else np.asarray(offset, dtype=float)
    if np.array_equal(u, np.eye(body.n)) and not np.any(t):
        return body
    if isinstance(body, Ellipsoid):
        return Ellipsoid(u @ body.center + t, u @ body.shape @ u.T)
    if isinstance(body, Ball):
        return Ellipsoid(u @ body.center + t, body.radius**2 * (u @ u.T))
    if isinstance(body, Zonotope):
        return Zonotope(u @ body.center + t, body.generators @ u.T)
    if isinstance(body, Box):
        if _is_diagonal(u):
            d = np.diag(u)
            lo, hi = d * body.lo + t, d * body.hi + t
            return Box(np.minimum(lo, hi), np.maximum(lo, hi))
        return Zonotope(u @ body.lo + t, np.diag(body.hi - body.lo) @ u.T)
    if isinstance(body, Simplex):
        return Simplex(body.vertices @ u.T + t)
    if isinstance(body, VPolytope):
        return VPolytope(body.vertices @ u.T + t)
    if isinstance(body, LinearImage):
        return LinearImage(u @ body.matrix, body.child, u @ body.offset + t)
    return LinearImage(u, body, t)


def _is_diagonal(u):
    return np.count_nonzero(u - np.diag(np.diag(u))) == 0
