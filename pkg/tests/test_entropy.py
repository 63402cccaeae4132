import math

import numpy as np
import pytest
from scipy import integrate

from convexent.bodies import Ball, Box, Simplex
from convexent.entropy import (NoClosedForm, entropy_analytic, entropy_knn, entropy_of_sum,
                               entropy_plugin_mc, entropy_sum_smoothed, renyi2_mc)
from convexent.measures import (ExponentialOrthant, Gaussian, LinearPushforward, ParetoOrthant,
                                PowerSimplex, SumPair, UniformOnBody)
from convexent.numerics import SeededStream

# h(X + Y) and h(X - Y) for i.i.d. 1D Pareto laws with density 2 (1 + x)^-3,
# frozen from adaptive quadrature of the convolution densities.
PARETO3_SUM_H = 1.5777075031
PARETO3_DIFF_H = 1.7657169813


def _quad_entropy(pdf, lo, hi):
    g = lambda t: -pdf(t) * math.log(pdf(t)) if pdf(t) > 0 else 0.0
    return integrate.quad(g, lo, hi, limit=200)[0]


def test_closed_forms_against_quadrature():
    e = ExponentialOrthant(2.0, 1)
    assert entropy_analytic(e).h == pytest.approx(
        _quad_entropy(lambda t: 2 * math.exp(-2 * t), 0, 50), abs=1e-8)
    p = ParetoOrthant(3.0, 1)
    assert entropy_analytic(p).h == pytest.approx(1.5 - math.log(2), abs=1e-12)
    ps = PowerSimplex(0.5, 1, "face")  # density 3 x^2 on [0, 1]
    assert entropy_analytic(ps).h == pytest.approx(
        _quad_entropy(lambda t: 3 * t * t, 0, 1), abs=1e-8)


@pytest.mark.parametrize("density", [
    ParetoOrthant(7.0, 2), ParetoOrthant(10.0, 3),
    PowerSimplex(0.5, 2, "face"), PowerSimplex(0.25, 3, "vertex"),
    ExponentialOrthant(0.5, 3),
])
def test_closed_forms_against_plugin(density):
    mc = entropy_plugin_mc(density, 200_000, SeededStream(1, "plugin"))
    assert abs(mc.h - entropy_analytic(density).h) < 4 * mc.stderr + 1e-3


def test_gaussian_and_pushforward_rules():
    g = Gaussian(np.zeros(2), np.diag([2.0, 3.0]))
    assert entropy_analytic(g).h == pytest.approx(math.log(2 * math.pi * math.e) + 0.5 * math.log(6))
    u = UniformOnBody(Box.cube(2))
    img = LinearPushforward(np.diag([2.0, 3.0]), u)
    assert entropy_analytic(img).h == pytest.approx(math.log(6))
    assert entropy_analytic(SumPair(g, g)).h == pytest.approx(entropy_analytic(
        Gaussian(np.zeros(2), np.diag([4.0, 6.0]))).h)
    with pytest.raises(NoClosedForm):
        entropy_analytic(SumPair(u, u))


def test_triangular_entropy_from_smoothed_estimator():
    u = UniformOnBody(Box.cube(1))
    h = entropy_sum_smoothed(u, u, 100_000, 256, SeededStream(3, "tri"))
    assert abs(h.h - 0.5) < 3 * h.stderr + 0.005
    assert h.H == pytest.approx(math.e, abs=0.05)


def test_smoothed_estimator_matches_gaussian_closed_form():
    g = Gaussian.standard(2)
    h = entropy_sum_smoothed(g, Gaussian.standard(2, 4.0), 50_000, 128, SeededStream(4, "g"))
    exact = entropy_analytic(Gaussian.standard(2, 5.0)).h
    assert abs(h.h - exact) < 3 * h.stderr + 0.005


@pytest.mark.parametrize("sign,oracle", [(1, PARETO3_SUM_H), (-1, PARETO3_DIFF_H)])
def test_split_estimator_on_heavy_tails(sign, oracle):
    x = ParetoOrthant(3.0, 1)
    y = x if sign > 0 else LinearPushforward(-np.eye(1), x)
    h = entropy_sum_smoothed(x, y, 100_000, 128, SeededStream(5, f"p{sign}"))
    assert abs(h.h - oracle) < 4 * h.stderr + 0.01


def test_sum_estimator_is_deterministic_and_seed_dependent():
    u = UniformOnBody(Simplex.standard(2))
    a = entropy_sum_smoothed(u, u, 3_000, 32, SeededStream(9, "d"))
    b = entropy_sum_smoothed(u, u, 3_000, 32, SeededStream(9, "d"))
    c = entropy_sum_smoothed(u, u, 3_000, 32, SeededStream(10, "d"))
    assert a == b and a.h != c.h


def test_entropy_of_sum_many_summands():
    u = UniformOnBody(Box.cube(1, -0.5, 0.5))
    h = entropy_of_sum([u, u, u], 50_000, 128, SeededStream(6, "ih"))
    # Irwin-Hall(3) entropy by quadrature of the piecewise quadratic density
    def f(t):
        t = abs(t)
        if t <= 0.5:
            return 0.75 - t * t
        if t <= 1.5:
            return 0.5 * (1.5 - t) ** 2
        return 0.0
    exact = 2 * _quad_entropy(f, 0, 1.5)
    assert abs(h.h - exact) < 3 * h.stderr + 0.005


def test_knn_estimator_rough_agreement():
    g = Gaussian.standard(2)
    x = g.sample(20_000, np.random.default_rng(0))
    assert entropy_knn(x).h == pytest.approx(entropy_analytic(g).h, abs=0.05)


def test_renyi2_mc():
    e = ExponentialOrthant(1.0, 2)
    est = renyi2_mc(e, 100_000, SeededStream(0, "r2"))
    assert abs(est.value - 0.25) < 3 * est.stderr + 1e-3


def test_uniform_ball_entropy():
    b = UniformOnBody(Ball.unit(3))
    assert entropy_analytic(b).h == pytest.approx(math.log(4 * math.pi / 3))
