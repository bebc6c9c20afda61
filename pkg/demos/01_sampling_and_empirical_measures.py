"""
Sampling a block model and reading off its empirical measures
==============================================================

A two-type network on ``n`` sites: each site gets a type from ``eta`` and
each pair of sites links with probability ``c(a, b) / (n + c(a, b))``.
From one sample we read the type measure, the link measure, the
neighbourhood measure and the degree law, and check the identities that
tie them together.
"""

import numpy as np

from mrnldp import (
    Alphabet,
    ModelSpec,
    SeededRng,
    consistency_check,
    cooperative_measure,
    degree_measure,
    kernel_product,
    neighbourhood_measure,
    sample_network,
    type_measure,
)

spec = ModelSpec(Alphabet(("red", "blue")), eta=[0.3, 0.7],
                 kernel=[[3.0, 1.0], [1.0, 2.0]], n=20000)
G = sample_network(spec, SeededRng(seed=2024))
print(f"{G.n} sites, {G.num_edges} links")

###############################################################################
# Type and link measures
# ----------------------
# The link measure has total mass ``2|E| / n`` and, for large ``n``, sits
# close to ``c rho (x) rho`` where ``rho`` is the type measure.

rho = type_measure(G)
L2 = cooperative_measure(G)
print("type measure      ", np.round(rho, 4))
print("link measure      ", np.round(L2, 4).tolist())
print("c rho (x) rho     ", np.round(kernel_product(spec.kernel, rho), 4).tolist())
print("mass, 2|E|/n      ", L2.sum(), 2 * G.num_edges / G.n)

###############################################################################
# Neighbourhoods
# --------------
# Each site contributes ``1/n`` at its (type, neighbour-count profile).
# Summing profiles recovers the link measure exactly.

M1 = neighbourhood_measure(G, cap=30)
top = sorted(M1.masses.items(), key=lambda kv: -kv[1])[:5]
for (a, prof), w in top:
    print(f"  {spec.alphabet.labels[a]:>4s} {prof}  {w:.4f}")
print("consistent with link measure:", consistency_check(L2, M1))

###############################################################################
# Degree law
# ----------

d = degree_measure(G, k_max=12)
print("degree pmf", np.round(d.pmf, 4))
print("mean degree", d.mean)

###############################################################################
# Exact arithmetic
# ----------------
# With ``exact=True`` masses are fractions, so the identities hold with
# no rounding at all.

L2x = cooperative_measure(G, exact=True)
print(sum(L2x.ravel()) == type(L2x[0, 0])(2 * G.num_edges, G.n))
