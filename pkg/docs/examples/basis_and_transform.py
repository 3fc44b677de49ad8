"""Prototype B-splines and their closed-form Hilbert transforms.

Builds the centered prototypes of order 1 to 4, checks their mass and
smoothness, and compares the closed-form transform of the hat against the
direct roof-top formula and against adaptive principal-value quadrature.

    python docs/examples/basis_and_transform.py
"""

import numpy as np
from scipy import integrate

from passive_bspline import hilbert_pp, prototype_bspline, rooftop_hilbert_reference

h = 1.0
print("order  support      mass   C^k")
for m in (1, 2, 3, 4):
    p = prototype_bspline(m, h)
    print(f"{m:5d}  [0, {m * h:g}]  {p.integral():8.5f}   k={p.continuity_order()}")

# The hat centered at 0 is the roof-top max(1 - |x|, 0).
roof = prototype_bspline(2, h).shifted(-h)
H = hilbert_pp(roof)

x = np.array([-2.0, -0.3, 0.25, 0.5, 1.0, 2.0, 10.0])
print("\n     x      closed form    direct formula   quadrature")
for xi in x:
    # QUADPACK's Cauchy weight handles 1/(s - x) inside the support
    if -1 < xi < 1:
        q = integrate.quad(roof, -1, 1, weight="cauchy", wvar=xi)[0]
    else:
        q = integrate.quad(lambda s: roof(s) / (s - xi), -1, 1, points=[0.0])[0]
    print(f"{xi:6.2f}  {H(xi):+.12f}  {rooftop_hilbert_reference(xi, h):+.12f}  {q / np.pi:+.12f}")

# Far away the transform decays like -(mass / pi) / x.
print(f"\n1e6 * H(1e6) = {1e6 * H(1e6):.9f}, -1/pi = {-1 / np.pi:.9f}")

# The box (order 1) has jumps, so its transform has log singularities there.
box = hilbert_pp(prototype_bspline(1, h))
print("box transform singular at", box.singular_knots)
