"""
Rare events by exponential tilting
==================================

The probability that a sparse random graph has no links at all decays
like ``exp(-n c / 2)``. Plain simulation never sees it; tilting the link
probabilities by ``g`` makes it common, and the exact likelihood ratio
reweights each hit.
"""

import math

import numpy as np

from mrnldp import ModelSpec
from mrnldp.verify import (
    Event,
    LinkMassBall,
    NoEdges,
    empty_graph_log_probability,
    optimal_tilt,
    rare_event_tilted,
    tilted_mean_weight,
)

c = 2.0
for n in (50, 100, 200):
    spec = ModelSpec.single_type(c, n)
    est = rare_event_tilted(spec, Event("L2", NoEdges()), np.full((1, 1), -math.log(n)),
                            replicas=5000, seed=n)
    exact = empty_graph_log_probability(spec)
    print(f"n={n:3d}  log P exact {exact:9.3f}  tilted {est.log_mean:9.3f}"
          f"  z={(est.mean - math.exp(exact)) / est.se:+.2f}  slope {-exact / n:.4f}")

###############################################################################
# The likelihood ratio has mean one
# ---------------------------------
# Its variance grows exponentially with ``n``, so an untargeted tilt is
# only useful on small graphs; the tilt has to point at the event.

for n in (10, 20, 40):
    spec = ModelSpec.single_type(c, n)
    est = tilted_mean_weight(spec, np.full((1, 1), 0.7), replicas=20000, seed=3)
    print(f"n={n:3d}  E[dP/dP~] = {est.mean:.4f} +- {est.se:.4f}   ESS {est.ess:8.1f}")

###############################################################################
# Twice the typical number of links
# ---------------------------------
# The tilt ``log(target / typical)`` makes the target link mass typical.

target = np.array([[2 * c]])
g = optimal_tilt(target, [1.0], [[c]])
for n in (50, 100, 200):
    spec = ModelSpec.single_type(c, n)
    event = Event("L2", LinkMassBall(n, (2 * c,), 0.1))
    est = rare_event_tilted(spec, event, g, replicas=4000, seed=n)
    print(f"n={n:3d}  P = {est.mean:.3e} +- {est.se:.1e}   -(1/n) log P = {-est.log_mean / n:.4f}")
