"""Large deviations of empirical measures of multitype random networks.

Sampling of stochastic block models, their empirical type, link and
neighbourhood measures, the associated rate functions, and tools that check
the rate functions numerically (exact enumeration, Monte Carlo, tilted
importance sampling).
"""
from .exceptions import BudgetError, DomainError, StructureError
from .measures import (
    Alphabet,
    kernel_product,
    kullback_action,
    kullback_variational_gap,
    relative_entropy,
    spectral_potential,
    total_variation,
)
from .model import (
    ModelSpec,
    SeededRng,
    TypedGraph,
    edge_probability,
    log_rn_derivative,
    sample_graph,
    sample_network,
    sample_tilted_graph,
    sample_types,
)
from .empirical import (
    DegreeDistribution,
    NeighbourhoodMeasure,
    consistency_check,
    cooperative_measure,
    degree_measure,
    neighbourhood_measure,
    type_measure,
)
from .rates import (
    RatePair,
    degree_rate_lambda,
    isolated_rate_h,
    poisson_pmf,
    q1_kernel,
    rate_I,
    rate_I1,
    rate_J1,
    solve_t,
)

__version__ = "0.1.0"
