"""Expressions and truncated Taylor jets.

Parse a scene expression, evaluate it as a jet (all Taylor coefficients
at once), and cross-check the low-order coefficients against central
finite differences.
"""

import numpy as np

from darboux import eval_jet, parse_expression, to_prefix
from darboux.expr import eval_scalar

text = "t^2/2 + t^3/6 + y*t^2/2"
expr = parse_expression(text, ["t", "y"])
print("expression:", text)
print("prefix form:", to_prefix(expr))

jet = eval_jet(expr, ["t", "y"], [0.2, -0.1], 4)
print("\njet at (0.2, -0.1), order 4:")
for alpha, c in zip(jet.space.indices[:10], jet.coeffs[:10]):
    print(f"  coeff{alpha} = {c:+.12f}")

h = 1e-3
fd_t = (eval_scalar(expr, ["t", "y"], [0.2 + h, -0.1])
        - eval_scalar(expr, ["t", "y"], [0.2 - h, -0.1])) / (2 * h)
print(f"\nd/dt by finite differences: {fd_t:+.10f}")
print(f"d/dt from the jet:          {jet.coefficient((1, 0)):+.10f}")

# exact rational mode for polynomial data
from fractions import Fraction

exact = eval_jet(expr, ["t", "y"], [Fraction(0), Fraction(0)], 3, exact=True)
print("\nexact coefficients at the origin:")
print("  t^2:", exact.coefficient((2, 0)), " t^3:", exact.coefficient((3, 0)),
      " t^2 y:", exact.coefficient((2, 1)))
