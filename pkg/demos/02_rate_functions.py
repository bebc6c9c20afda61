"""
Rate functions and their zeros
==============================

Each rate function vanishes exactly at the typical (law-of-large-numbers)
value of its observable and is positive elsewhere. We evaluate them at
their zeros and at a few atypical points.
"""

import math

import numpy as np

from mrnldp import (
    DegreeDistribution,
    degree_rate_lambda,
    isolated_rate_h,
    kernel_product,
    kullback_action,
    kullback_variational_gap,
    poisson_pmf,
    q1_kernel,
    rate_I,
    rate_I1,
    rate_J1,
)

eta = np.array([0.5, 0.5])
c = np.array([[2.0, 1.0], [1.0, 3.0]])
typical = kernel_product(c, eta)

###############################################################################
# Link measures
# -------------
# The Kullback action compares a link measure with ``c eta (x) eta``.
# Doubling every link costs ``M (2 log 2 - 1)`` where ``M`` is the typical
# mass. The dual form is attained at ``g = log(pi / typical)``.

print("action at typical  ", kullback_action(typical, eta, c))
print("action at doubled  ", kullback_action(2 * typical, eta, c),
      typical.sum() * (2 * math.log(2) - 1))
V, g = kullback_variational_gap(2 * typical, eta, c)
print("dual value, maximizer", V, g.ravel())
print("I at LLN point     ", rate_I(eta, typical, eta, c))
print("I1, doubled links  ", rate_I1(eta, 2 * typical, c))

###############################################################################
# Neighbourhoods
# --------------
# At the typical point the neighbourhood law is the Poisson reference
# ``q1`` and the joint rate is zero. An inconsistent pair is infinite and
# says why.

q1 = q1_kernel(typical, eta, cap=30)
print("J1 at LLN point    ", rate_J1(typical, q1, eta, c))
print("J1, wrong links    ", rate_J1(2 * typical, q1, eta, c))

###############################################################################
# Degrees and isolated sites
# --------------------------
# For a single type with kernel ``c`` the degree law is Poisson(c) and the
# isolated fraction is ``exp(-c)``.

cs = 2.0
print("lambda(Poisson(2)) ", degree_rate_lambda(poisson_pmf(cs, 60), cs))
print("lambda(Poisson(4)) ", degree_rate_lambda(poisson_pmf(4.0, 60), cs), 2 * math.log(2) - 1)
print("lambda(no links)   ", degree_rate_lambda(DegreeDistribution(np.array([1.0])), cs))
for z in (0.0, 0.1, math.exp(-cs), 0.3, 0.6, 0.9, 1.0):
    print(f"  h({z:.4f}) = {isolated_rate_h(z, cs).value:.6f}")
