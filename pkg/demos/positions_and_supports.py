"""Putting bodies and measures in a good position before adding them.

An elongated ellipse overlaps the ball of the same area poorly; a
determinant-one map found by direct search fixes that. The same search,
run on the level set {f >= c0^n max f}, places a whole measure.

Run: python3 demos/positions_and_supports.py
"""
import math

import numpy as np

from convexent import Box, Ellipsoid, Gaussian, SeededStream, Simplex, UniformOnBody
from convexent.positions import (isotropic_constant, m_functional, m_position_search,
                                 put_measure_m_position)
from convexent.support import LOGCONCAVE_C0, essential_support

stream = SeededStream(7, "demo")

angle = 0.4
rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
axes = np.array([1.0, 10.0]) / math.sqrt(10 * math.pi)  # area one
ellipse = Ellipsoid(np.zeros(2), rot @ np.diag(axes**2) @ rot.T)

print("M functional before:", round(m_functional(ellipse, 100_000, stream.child("m0")).value, 4))
res = m_position_search(ellipse, 500, 10_000, stream.child("search"))
print(f"after search: {res.objective:.4f} using {res.iterations} evaluations")
print("map:\n", np.round(res.matrix, 3))

# a measure: stretched Gaussian, normalized to max density one
g = Gaussian(np.zeros(2), np.diag([50.0, 0.02]))
print("\nlevel-set volume of g:", round(essential_support(g, LOGCONCAVE_C0).volume().value, 3))
placed = put_measure_m_position(g, LOGCONCAVE_C0, 300, 5_000, stream.child("measure"))
print(f"mass^(1/n) in the unit-volume ball: {placed.baseline:.3f} -> {placed.objective:.3f}")

# isotropic constants are affine invariants
for name, body in (("square", Box.cube(2)), ("triangle", Simplex.standard(2))):
    print(f"L^2({name}) = {isotropic_constant(UniformOnBody(body)).value:.5f}")
