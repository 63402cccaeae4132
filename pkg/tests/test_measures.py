import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from convexent.bodies import Box, Simplex
from convexent.measures import (ConvexityParams, ExponentialOrthant, Gaussian,
                                LinearPushforward, NotEvaluable, ParetoOrthant, PowerSimplex,
                                SumPair, UniformOnBody, convolution_kappa, density_eval,
                                m_mean, mean_cov_mc, normalize_max_density, scale_density,
                                sum_of, symmetrize)


def test_convexity_params_of_families():
    assert Gaussian.standard(2).params().kappa == 0
    assert UniformOnBody(Box.cube(2)).params().kappa == pytest.approx(0.5)
    p = ParetoOrthant(5.0, 2).params()
    assert p.beta == pytest.approx(5.0) and p.kappa == pytest.approx(-1 / 3)
    ps = PowerSimplex(0.5, 2).params()
    assert ps.kappa == pytest.approx(0.25)  # 1 / (p + n) with p = 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.floats(0.05, 20.0))
def test_kappa_tilde_round_trip(n, kt):
    p = ConvexityParams.from_kappa_tilde(kt, n)
    q = ConvexityParams.from_kappa(p.kappa, n)
    assert q.kappa_tilde == pytest.approx(kt, rel=1e-9)
    assert p.beta == pytest.approx(1 / kt, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_convolution_rule_symmetric_and_below_both(a, b):
    pa, pb = ConvexityParams.from_kappa(a, 1), ConvexityParams.from_kappa(b, 1)
    ab, ba = convolution_kappa(pa, pb), convolution_kappa(pb, pa)
    assert ab.kappa == pytest.approx(ba.kappa)
    assert ab.kappa <= min(a, b) + 1e-12
    assert 1 / ab.kappa == pytest.approx(1 / a + 1 / b)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 10), st.floats(1e-3, 10), st.floats(0, 1), st.floats(-3, 1))
def test_m_mean_monotone_in_kappa(a, b, t, k):
    lo = m_mean(a, b, t, k - 0.5)
    hi = m_mean(a, b, t, k)
    assert lo <= hi * (1 + 1e-9)
    assert min(a, b) * (1 - 1e-9) <= hi <= max(a, b) * (1 + 1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(2.5, 9.0), st.integers(0, 10_000))
def test_pareto_is_kappa_concave_along_segments(beta, seed):
    # f^{kappa_tilde} is concave with kappa_tilde = -1 / beta: f(mid)^kt >= mean of f^kt
    d = ParetoOrthant(beta, 2)
    rng = np.random.default_rng(seed)
    x, y = rng.random((2, 2)) * 5
    kt = -1.0 / beta
    mid = d.pdf(0.5 * (x + y))[0] ** kt
    ends = 0.5 * (d.pdf(x)[0] ** kt + d.pdf(y)[0] ** kt)
    assert mid <= ends + 1e-12  # kt < 0 flips the inequality for f^kt


@pytest.mark.parametrize("density", [
    Gaussian(np.zeros(2), np.array([[2.0, 0.3], [0.3, 0.5]])),
    ExponentialOrthant(2.0, 2),
    ParetoOrthant(5.0, 2),
    PowerSimplex(0.5, 2, "face"),
    PowerSimplex(0.5, 2, "vertex"),
    UniformOnBody(Simplex.standard(2)),
])
def test_densities_integrate_to_one(density):
    f = lambda y, x: density_eval(density, [x, y])
    if isinstance(density, Gaussian):
        val = integrate.dblquad(f, -12, 12, -12, 12)[0]
    elif isinstance(density, (PowerSimplex, UniformOnBody)):
        val = integrate.dblquad(f, 0, 1, 0, lambda x: 1 - x)[0]
    else:
        val = integrate.dblquad(f, 0, np.inf, 0, np.inf)[0]
    assert val == pytest.approx(1.0, abs=2e-3)


def test_max_density_values():
    assert ExponentialOrthant(2.0, 3).max_density() == pytest.approx(8.0)
    assert Gaussian.standard(2).max_density() == pytest.approx(1 / (2 * math.pi))
    assert ParetoOrthant(3.0, 1).max_density() == pytest.approx(2.0)
    assert UniformOnBody(Box.cube(2, 0, 2)).max_density() == pytest.approx(0.25)


def test_pareto_sampler_matches_marginal_cdf(stream):
    d = ParetoOrthant(4.0, 2)
    x = d.sample(20_000, stream.rng)
    assert (x >= 0).all()
    ks = stats.kstest(x[:, 0], lambda t: d.marginal_cdf(t))
    assert ks.pvalue > 1e-3


def test_power_simplex_sampler_moments(stream):
    # face peak: s = sum x ~ Beta(p + n, 1), mean (p + n) / (p + n + 1)
    d = PowerSimplex(0.5, 2, "face")
    s = d.sample(40_000, stream.rng).sum(axis=1)
    assert s.mean() == pytest.approx(4 / 5, abs=0.01)
    v = PowerSimplex(0.5, 2, "vertex").sample(40_000, stream.rng).sum(axis=1)
    # 1 - s ~ Beta(p + 1, n): mean of s is n / (p + n + 1) = 2 / 5
    assert v.mean() == pytest.approx(2 / 5, abs=0.01)


def test_pushforward_and_scaling():
    base = ExponentialOrthant(1.0, 2)
    u = np.array([[2.0, 0.0], [1.0, 1.0]])
    d = LinearPushforward(u, base, np.array([1.0, 0.0]))
    assert d.max_density() == pytest.approx(0.5)
    assert d.pdf(np.array([[1.0, 0.0]]))[0] == pytest.approx(0.5)
    assert normalize_max_density(Gaussian.standard(3)).max_density() == pytest.approx(1.0)
    assert scale_density(base, 2.0).max_density() == pytest.approx(0.25)


def test_sums_and_symmetrization_are_sample_only(stream):
    s = sum_of([Gaussian.standard(1), Gaussian.standard(1), Gaussian.standard(1)])
    assert isinstance(s, SumPair) and not s.evaluable
    with pytest.raises(NotEvaluable):
        s.pdf(np.zeros((1, 1)))
    x = s.sample(20_000, stream.rng)
    assert x.var() == pytest.approx(3.0, rel=0.05)
    sym = symmetrize(ExponentialOrthant(1.0, 1))
    assert sym.symmetric
    assert sym.sample(20_000, stream.rng).var() == pytest.approx(2.0, rel=0.05)


def test_mean_cov_mc_close_to_exact(stream):
    d = ParetoOrthant(8.0, 2)
    m, c = d.mean_cov()
    est = mean_cov_mc(d, 100_000, stream)
    assert np.all(np.abs(est.mean - m) < 4 * est.mean_stderr + 1e-3)
