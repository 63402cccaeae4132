import math

import numpy as np
import pytest
from scipy import stats

from convexent.bodies import Ellipsoid, Simplex, VPolytope, volume_exact
from convexent.measures import (ExponentialOrthant, Gaussian, LinearPushforward, ParetoOrthant,
                                PowerSimplex)
from convexent.numerics import SeededStream
from convexent.support import (LOGCONCAVE_C0, c0_convex, check_support_mass,
                               check_support_volume, essential_support, mass_bound,
                               support_mass_mc, typset_ratio)


def test_c0_constants():
    assert c0_convex(3.0) == pytest.approx(math.exp(-48))
    assert c0_convex(math.inf) == pytest.approx(math.exp(-32))
    with pytest.raises(ValueError):
        c0_convex(1.0)


def test_gaussian_level_set_is_interval_and_mass_matches_normal_cdf():
    es = essential_support(Gaussian.standard(1), LOGCONCAVE_C0)
    assert isinstance(es.body, Ellipsoid)
    assert es.body.support(np.array([[1.0]]))[0] == pytest.approx(4.0)
    mass = support_mass_mc(Gaussian.standard(1), es, 200_000, SeededStream(0, "m"))
    exact = stats.norm.cdf(4) - stats.norm.cdf(-4)
    assert abs(mass.value - exact) <= 3 * mass.stderr + 1e-6
    assert mass.value > 1 - 1 / 5
    assert mass_bound(Gaussian.standard(1), LOGCONCAVE_C0) == pytest.approx(0.8)


def test_pareto_level_set_is_simplex_with_exact_side():
    d = ParetoOrthant(6.0, 2)
    c0 = c0_convex(3.0)
    es = essential_support(d, c0)
    side = math.expm1(-2 * math.log(c0) / 6.0)  # (1 + s)^-6 >= c0^2
    assert isinstance(es.body, Simplex)
    assert volume_exact(es.body) == pytest.approx(side**2 / 2)
    rec = check_support_mass(d, es, 50_000, SeededStream(0, "pm"))
    assert rec.verdict == "pass" and rec.lhs == 0.5
    for r in check_support_volume(d, es):
        assert r.verdict == "pass"


def test_exponential_level_set_volume_and_typical_ratio():
    d = ExponentialOrthant(1.0, 2)
    es = essential_support(d, LOGCONCAVE_C0)
    assert es.volume().value == pytest.approx(128.0)
    assert typset_ratio(d, es) == pytest.approx(math.e**2 / 128)


def test_power_simplex_face_level_set_is_truncated_simplex():
    d = PowerSimplex(0.5, 2, "face")  # density 12 s^2 on the simplex
    c0 = math.sqrt(0.25)  # level = c0^2 * max = 3 -> s >= 0.5
    es = essential_support(d, c0)
    assert isinstance(es.body, VPolytope)
    est = es.volume(200_000, SeededStream(0, "ps"))
    assert abs(est.value - 0.375) < 3 * est.stderr + 1e-3
    assert es.body.contains(np.array([[0.3, 0.3]]))[0]
    assert not es.body.contains(np.array([[0.2, 0.2]]))[0]


def test_pushforward_level_set():
    base = Gaussian.standard(2)
    u = np.array([[2.0, 0.0], [0.0, 0.5]])
    es = essential_support(LinearPushforward(u, base), LOGCONCAVE_C0)
    direct = essential_support(Gaussian(np.zeros(2), u @ u.T), LOGCONCAVE_C0)
    assert es.volume().value == pytest.approx(direct.volume().value)


def test_level_value():
    d = ExponentialOrthant(1.0, 3)
    es = essential_support(d, 0.5)
    assert es.level == pytest.approx(0.125)
    with pytest.raises(ValueError):
        essential_support(d, 1.5)
