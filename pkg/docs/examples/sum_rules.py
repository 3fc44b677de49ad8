"""Sum rules and the lower-bound chain for a fitted passive material.

Checks the k = 0 sum rule of a synthetic measure and of a fitted one, then
evaluates the three terms of the inequality chain behind the sum-rule
bound on the target band.

    python docs/examples/sum_rules.py
"""

import numpy as np

from passive_bspline import (
    HerglotzMeasure,
    TargetSpec,
    bound_chain,
    prototype_bspline,
    run_fit,
    sum_rule,
)

# Origin atom 0.3 and a roof-top pair of total mass 0.4.
hat = prototype_bspline(2, 0.5) * (0.2 / 0.5)
dens = hat.shifted(0.5) + hat.shifted(-1.5)
m = HerglotzMeasure(point_masses=((0.0, 0.3),), density=dens, symmetric=True)
print("synthetic k=0:", sum_rule(m, 0))
m1 = HerglotzMeasure(density=dens, symmetric=True)
print("synthetic k=1:", sum_rule(m1, 1))

res = run_fit(TargetSpec.permittivity(-1 + 0.05j), 0.1, 200)
fitted = res.measure()
lhs, rhs = sum_rule(fitted, 0)
print(f"\nfitted k=0: lhs = {lhs:.12f}, rhs = {rhs:.12f}")

# h0(x) = x, the Herglotz part of -F for Re eps_t = -1.
chain = bound_chain(fitted, lambda x: np.asarray(x, dtype=float) + 0j, 1.0, res.grid.omega)
print(f"chain: {chain.lower:.5f} <= {chain.middle:.5f} <= {chain.upper:.5f}  holds={chain.holds}")
print(f"sup |h + h0| on the band = {chain.delta:.5f}")
