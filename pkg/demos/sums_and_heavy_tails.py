"""How the entropy of a sum behaves: bounded growth for log-concave laws,
unbounded growth for heavy-tailed ones.

Run: python3 demos/sums_and_heavy_tails.py
"""
import math

import numpy as np

from convexent import (Box, Gaussian, LinearPushforward, ParetoOrthant, SeededStream,
                       UniformOnBody, entropy_analytic, entropy_sum_smoothed)

stream = SeededStream(2024, "demo")

# Two uniforms on [0, 1] add up to the triangle law, whose entropy is exactly 1/2.
u = UniformOnBody(Box.cube(1))
h = entropy_sum_smoothed(u, u, 100_000, 256, stream.child("triangle"))
print(f"h(U + U') = {h.h:.4f} +- {h.stderr:.4f}   (exact 0.5)")

# Gaussians sit on the equality line of the entropy power inequality.
g1, g2 = Gaussian.standard(2), Gaussian.standard(2, 3.0)
h = entropy_sum_smoothed(g1, g2, 50_000, 128, stream.child("gauss"))
print(f"H(X) + H(Y) = {entropy_analytic(g1).H + entropy_analytic(g2).H:.3f}, "
      f"H(X + Y) = {h.H:.3f} +- {h.H_stderr:.3f}")

# For 1D Pareto laws the ratio H(X +- Y) / H(X) blows up as beta -> 1,
# so no reverse inequality can hold without a bound on beta.
print(f"\n{'beta':>5} {'H(X+Y)/H(X)':>12} {'H(X-Y)/H(X)':>12}")
for beta in (4.0, 2.0, 1.5, 1.2):
    x = ParetoOrthant(beta, 1)
    hx = entropy_analytic(x).h
    ratios = []
    for tag, y in (("plus", x), ("minus", LinearPushforward(-np.eye(1), x))):
        hs = entropy_sum_smoothed(x, y, 60_000, 128, stream.child(f"{beta}/{tag}"))
        ratios.append(math.exp(2 * (hs.h - hx)))
    print(f"{beta:5.2f} {ratios[0]:12.3f} {ratios[1]:12.3f}")
