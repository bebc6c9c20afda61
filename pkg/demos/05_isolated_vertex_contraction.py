"""
The isolated-site rate as a constrained minimum
===============================================

The rate for the fraction of isolated sites is the smallest degree-law
rate among degree laws with that mass at zero. We minimize numerically by
mirror descent and compare with the closed form.
"""

import math

from mrnldp import isolated_rate_h, solve_t
from mrnldp.verify import minimize_degree_rate_given_isolated

c = 2.0
print(f"typical isolated fraction exp(-c) = {math.exp(-c):.6f}")
for z in (0.05, 0.2, math.exp(-c), 0.6, 0.9):
    best, pmf = minimize_degree_rate_given_isolated(z, c, restarts=200, iters=3000)
    closed = isolated_rate_h(z, c).value
    print(f"z={z:.4f}  t={solve_t(z, c):.6f}  min lambda {best:.10f}  h(z) {closed:.10f}")
