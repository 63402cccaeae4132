"""Entropy and volume inequalities for convex measures."""

__version__ = "0.1.0"

from .bodies import (Ball, Body, Box, Ellipsoid, Simplex, VPolytope, Zonotope,  # noqa: E402
                     minkowski_sum, volume)
from .entropy import (EntropyValue, entropy_analytic, entropy_knn,  # noqa: E402
                      entropy_plugin_mc, entropy_sum_smoothed)
from .measures import (ExponentialOrthant, Gaussian, LinearPushforward,  # noqa: E402
                       ParetoOrthant, PowerSimplex, UniformOnBody)
from .numerics import Estimate, SeededStream  # noqa: E402
from .results import CheckResult  # noqa: E402
