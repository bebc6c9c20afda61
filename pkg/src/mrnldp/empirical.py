"""Empirical measures of a typed graph.

All measures are computed from integer counts with denominator ``n``. Pass
``exact=True`` to get ``fractions.Fraction`` masses (numpy object arrays),
which makes identities such as ``|L2| = 2|E|/n`` hold exactly.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .measures import Alphabet
from .model import TypedGraph, oriented_edge_counts

DEFAULT_CAP = 50


def _scale(counts, n: int, exact: bool):
    counts = np.asarray(counts)
    if exact:
        out = np.empty(counts.shape, dtype=object)
        for idx, v in np.ndenumerate(counts):
            out[idx] = Fraction(int(v), n)
        return out
    return counts.astype(float) / n


def type_counts(graph: TypedGraph) -> np.ndarray:
    return np.bincount(graph.types, minlength=graph.alphabet.m)


def type_measure(graph: TypedGraph, exact: bool = False) -> np.ndarray:
    """Fraction of sites of each type."""
    return _scale(type_counts(graph), graph.n, exact)


def cooperative_counts(graph: TypedGraph) -> np.ndarray:
    """Integer numerators of the empirical cooperative measure (denominator ``n``)."""
    E = oriented_edge_counts(graph)
    if graph.symmetric:
        return E + E.T
    return 2 * E


def cooperative_measure(graph: TypedGraph, exact: bool = False) -> np.ndarray:
    """Empirical cooperative (link) measure; total mass ``2|E|/n``.

    Symmetric graphs count each link in both orientations with weight
    ``1/n``; asymmetric graphs count the stored orientation with ``2/n``.
    """
    return _scale(cooperative_counts(graph), graph.n, exact)


def neighbour_profiles(graph: TypedGraph) -> np.ndarray:
    """``(n, m)`` array: number of neighbours of each type, per site."""
    prof = np.zeros((graph.n, graph.alphabet.m), dtype=np.int64)
    if graph.num_edges:
        i, j = graph.edges[:, 0], graph.edges[:, 1]
        np.add.at(prof, (i, graph.types[j]), 1)
        np.add.at(prof, (j, graph.types[i]), 1)
    return prof


@dataclass
class NeighbourhoodMeasure:
    """Measure on (type, neighbour-count profile) pairs.

    Profiles with a coordinate above ``cap`` are not stored individually;
    their mass is pooled per type in ``overflow``.
    """

    m: int
    cap: int
    masses: dict = field(default_factory=dict)
    overflow: np.ndarray = None

    def __post_init__(self):
        if self.overflow is None:
            self.overflow = np.zeros(self.m)

    def items(self) -> Iterator[tuple[tuple[int, tuple[int, ...]], object]]:
        return iter(sorted(self.masses.items()))

    def total(self):
        return sum(self.masses.values()) + sum(self.overflow)

    def type_marginal(self) -> np.ndarray:
        """Mass of each type, overflow included."""
        out = [self.overflow[a] for a in range(self.m)]
        for (a, _), w in self.masses.items():
            out[a] = out[a] + w
        return np.array(out, dtype=object if _is_exact(out) else float)

    def pair_marginal(self) -> np.ndarray:
        """``sum_l l(b) omega(a, l)`` over stored profiles."""
        out = [[0] * self.m for _ in range(self.m)]
        for (a, prof), w in self.masses.items():
            for b, k in enumerate(prof):
                if k:
                    out[a][b] = out[a][b] + k * w
        flat = [x for row in out for x in row]
        return np.array(out, dtype=object if _is_exact(flat) else float)

    def has_overflow(self, tol: float = 0.0) -> bool:
        return any(x > tol for x in self.overflow)


def _is_exact(values) -> bool:
    return any(isinstance(v, Fraction) for v in values)


def neighbourhood_measure(graph: TypedGraph, cap: int = DEFAULT_CAP, exact: bool = False) -> NeighbourhoodMeasure:
    """Empirical neighbourhood measure: mass ``1/n`` at each site's (type, profile)."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    m, n = graph.alphabet.m, graph.n
    prof = neighbour_profiles(graph)
    tally = Counter()
    over = [0] * m
    for t, row in zip(graph.types.tolist(), prof.tolist()):
        if max(row) > cap:
            over[t] += 1
        else:
            tally[(t, tuple(row))] += 1
    if exact:
        masses = {k: Fraction(v, n) for k, v in tally.items()}
        overflow = np.array([Fraction(v, n) for v in over], dtype=object)
    else:
        masses = {k: v / n for k, v in tally.items()}
        overflow = np.array(over, dtype=float) / n
    return NeighbourhoodMeasure(m, cap, masses, overflow)


@dataclass
class DegreeDistribution:
    """pmf on ``0..k_max`` plus the mass beyond ``k_max``."""

    pmf: np.ndarray
    overflow: float = 0.0

    @property
    def k_max(self) -> int:
        return len(self.pmf) - 1

    @property
    def mean(self) -> float:
        """Mean degree; ``inf`` when there is overflow mass."""
        if self.overflow > 0:
            return float("inf")
        k = np.arange(len(self.pmf))
        return float(np.dot(k, np.asarray(self.pmf, dtype=float)))


def degree_measure(graph: TypedGraph, k_max: int = DEFAULT_CAP, exact: bool = False) -> DegreeDistribution:
    """Degree distribution of the sites."""
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    deg = graph.degrees()
    counts = np.bincount(np.minimum(deg, k_max + 1), minlength=k_max + 2)
    pmf = _scale(counts[:k_max + 1], graph.n, exact)
    over = Fraction(int(counts[k_max + 1]), graph.n) if exact else counts[k_max + 1] / graph.n
    return DegreeDistribution(pmf, over)


def consistency_check(pi, omega: NeighbourhoodMeasure, tol: float = 1e-9) -> tuple[bool, float]:
    """Is the link measure ``pi`` reproduced by the neighbourhood measure?

    Checks ``sum_l l(b) omega(a, l) == pi(a, b)`` for every type pair. Mass
    in the overflow bucket has unknown profiles, so overflow above ``tol``
    fails.
    Returns ``(ok, residual)`` with the largest entrywise violation.
    """
    pi = np.asarray(pi)
    seen = omega.pair_marginal()
    diff = [abs(x - y) for x, y in zip(seen.ravel(), pi.ravel())]
    residual = max(diff) if diff else 0
    ok = residual <= tol and not omega.has_overflow(tol)
    return bool(ok), float(residual)


# -- CSV output --------------------------------------------------------------

def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_type_measure_csv(fh, rho, alphabet: Alphabet) -> None:
    """Columns ``label,mass``."""
    w = _writer(fh)
    w.writerow(["label", "mass"])
    for lab, x in zip(alphabet.labels, rho):
        w.writerow([lab, repr(float(x))])


def write_pair_measure_csv(fh, pi, alphabet: Alphabet) -> None:
    """Columns ``label,label2,mass``."""
    w = _writer(fh)
    w.writerow(["label", "label2", "mass"])
    for a, la in enumerate(alphabet.labels):
        for b, lb in enumerate(alphabet.labels):
            w.writerow([la, lb, repr(float(pi[a][b]))])


def write_neighbourhood_csv(fh, omega: NeighbourhoodMeasure, alphabet: Alphabet) -> None:
    """Columns ``label,profile,mass``; profile is ``;``-joined counts in label order.

    Overflow mass is written with profile ``overflow``.
    """
    w = _writer(fh)
    w.writerow(["label", "profile", "mass"])
    for (a, prof), x in omega.items():
        w.writerow([alphabet.labels[a], ";".join(map(str, prof)), repr(float(x))])
    for a, x in enumerate(omega.overflow):
        if x > 0:
            w.writerow([alphabet.labels[a], "overflow", repr(float(x))])


def write_degree_csv(fh, d: DegreeDistribution) -> None:
    """Columns ``k,mass``; the overflow row has ``k`` = ``overflow``."""
    w = _writer(fh)
    w.writerow(["k", "mass"])
    for k, x in enumerate(d.pmf):
        w.writerow([k, repr(float(x))])
    w.writerow(["overflow", repr(float(d.overflow))])
