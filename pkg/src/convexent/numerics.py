"""Seeded random streams, small dense linear algebra and special functions.

Everything here is a pure function of its inputs except :class:`SeededStream`,
which owns a generator and must not be shared between consumers.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

TOL_LP = 1e-9
TOL_DET = 1e-10
MAX_DIM = 6

# Fixed chunk size for Monte Carlo loops: the chunk layout (and hence the
# substream labels) never depends on how many workers evaluate it.
MC_CHUNK = 1 << 14


class SeededStream:
    """A reproducible random substream keyed by ``(root_seed, label)``.

    Two streams built from the same pair produce identical sequences; streams
    with different labels are seeded from different SHA-256 digests and are
    treated as independent.
    """

    def __init__(self, root_seed: int, label: str = ""):
        self.root_seed = int(root_seed) % (1 << 64)
        self.label = label
        digest = hashlib.sha256(f"{self.root_seed}|{label}".encode()).digest()
        words = np.frombuffer(digest, dtype=np.uint32)
        self.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))

    def child(self, name) -> "SeededStream":
        return SeededStream(self.root_seed, f"{self.label}/{name}")

    def __repr__(self):
        return f"SeededStream({self.root_seed}, {self.label!r})"


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo value with its standard error."""

    value: float
    stderr: float
    samples: int

    def __iter__(self):
        yield self.value
        yield self.stderr


def mc_mean(draw: Callable[[int, SeededStream], np.ndarray], samples: int,
            stream: SeededStream) -> Estimate:
    """Pooled sample mean of ``draw`` over fixed-size labeled chunks.

    ``draw(size, substream)`` returns ``size`` i.i.d. values. The result is a
    deterministic function of ``stream`` and ``samples``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    count, mean, m2 = 0, 0.0, 0.0
    for i, size in enumerate(_chunk_sizes(samples)):
        vals = np.asarray(draw(size, stream.child(f"chunk{i}")), dtype=float)
        mu = float(vals.mean())
        # Chan et al. pairwise merge of (count, mean, M2)
        delta = mu - mean
        tot = count + size
        mean += delta * size / tot
        m2 += float(((vals - mu) ** 2).sum()) + delta * delta * count * size / tot
        count = tot
    var = m2 / (count - 1)
    return Estimate(mean, math.sqrt(var / count), count)


def _chunk_sizes(samples: int):
    full, rest = divmod(samples, MC_CHUNK)
    sizes = [MC_CHUNK] * full
    if rest:
        sizes.append(rest)
    return sizes


def gen_binomial(q: float, n: int) -> float:
    """Generalized binomial coefficient q(q-1)...(q-n+1)/n!."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = 1.0
    for i in range(n):
        out *= (q - i) / (i + 1)
    return out


def ball_volume(n: int, r: float = 1.0) -> float:
    return math.pi ** (n / 2) * r**n / math.gamma(n / 2 + 1)


def ball_radius_for_volume(n: int, volume: float) -> float:
    return (volume / ball_volume(n, 1.0)) ** (1.0 / n)


def feasible_nonneg(A: np.ndarray, b: np.ndarray, tol: float = TOL_LP) -> bool:
    """Decide whether ``{z >= 0 : A z = b}`` is non-empty.

    Phase-one primal simplex on a dense tableau with artificial variables,
    using Bland's rule so degenerate pivots cannot cycle.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, k = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    # tableau columns: k structural, m artificial, rhs
    T = np.zeros((m + 1, k + m + 1))
    T[:m, :k] = A
    T[:m, k:k + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :k] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(k, k + m))
    scale = max(1.0, np.abs(A).max(initial=0.0), np.abs(b).max(initial=0.0))
    eps = 1e-12 * scale
    for _ in range(50 * (k + m) + 100):
        reduced = T[m, :-1]
        entering = next((j for j in range(k + m) if reduced[j] < -eps), None)
        if entering is None:
            break
        col = T[:m, entering]
        ratios = [(T[i, -1] / col[i], basis[i], i) for i in range(m) if col[i] > eps]
        if not ratios:  # unbounded phase one cannot happen; objective is >= 0
            break
        best = min(r for r, _, _ in ratios)
        # Bland: among ties pick the smallest basic index
        leave = min((bv, i) for r, bv, i in ratios if r <= best + eps)[1]
        T[leave] /= T[leave, entering]
        for i in range(m + 1):
            if i != leave and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[leave]
        basis[leave] = entering
    return -T[m, -1] <= tol * scale


def lp_point_in_hull(point, vertices, tol: float = TOL_LP) -> bool:
    """Exact hull membership by a feasibility solve of sum(l_i v_i) = x, sum(l_i) = 1."""
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    x = np.asarray(point, dtype=float).ravel()
    if V.shape[1] != x.size:
        raise ValueError(f"dimension mismatch: point in R^{x.size}, vertices in R^{V.shape[1]}")
    A = np.vstack([V.T, np.ones(len(V))])
    b = np.append(x, 1.0)
    return feasible_nonneg(A, b, tol)


def traceless_from_params(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).ravel()
    n = math.isqrt(theta.size + 1)
    if n * n != theta.size + 1:
        raise ValueError(f"theta must have length n^2 - 1, got {theta.size}")
    M = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    k = n * (n - 1)
    M[off] = theta[:k]
    diag = theta[k:]
    M[np.arange(n - 1), np.arange(n - 1)] = diag
    M[n - 1, n - 1] = -diag.sum()
    return M


def sl_param(theta) -> np.ndarray:
    """Map ``n^2 - 1`` parameters to a determinant-one matrix exp(M(theta)).

    Off-diagonal entries of ``M`` are filled row-major first, followed by the
    first ``n - 1`` diagonal entries; the last diagonal entry makes ``M``
    traceless.
    """
    return scipy.linalg.expm(traceless_from_params(theta))


def sl_dim(n: int) -> int:
    return n * n - 1


def is_spd(S: np.ndarray, tol: float = 1e-12) -> bool:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        return False
    if not np.allclose(S, S.T, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(S).max())):
        return False
    return bool(np.linalg.eigvalsh(S).min() > tol * max(1.0, np.abs(S).max()))


def sym_sqrt(S: np.ndarray, inverse: bool = False) -> np.ndarray:
    w, V = np.linalg.eigh((S + S.T) / 2)
    if w.min() <= 0:
        raise ValueError("matrix is not positive definite")
    p = -0.5 if inverse else 0.5
    return (V * w**p) @ V.T


def whitening_map(cov) -> np.ndarray:
    """Determinant-one map W with W cov W^T proportional to the identity."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if not is_spd(cov):
        raise ValueError("covariance must be symmetric positive definite")
    n = cov.shape[0]
    w = np.linalg.eigvalsh(cov)
    scale = math.exp(np.log(w).sum() / (2 * n))
    return scale * sym_sqrt(cov, inverse=True)
