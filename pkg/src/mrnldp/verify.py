"""Exact enumeration, Monte Carlo and tilted importance sampling.

Observables are encoded as canonical keys (tuples of integers) so that
laws from exact enumeration and from simulation can be compared outcome
by outcome:

``"L1"``        type counts, one per label
``"L2"``        numerators of the cooperative measure (denominator ``n``),
                row-major over label pairs
``"deg"``       sorted ``(degree, number of sites)`` pairs
``"M1"``        sorted ``(label, profile, number of sites)`` triples
``"isolated"``  ``(number of isolated sites,)``

Replicas are reproducible: the per-graph path gives replica ``r`` the stream
``SeededRng(seed, r)``; the vectorized small-``n`` path draws replicas in
fixed-size blocks, block ``b`` using ``SeededRng(seed, b)``. Block sizes
depend only on the model, never on the worker count, so results are
bitwise identical for any number of workers.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from typing import Callable, Sequence

import numpy as np

from .empirical import (
    DegreeDistribution,
    cooperative_measure,
    degree_measure,
    neighbourhood_measure,
    type_measure,
)
from .exceptions import BudgetError, DomainError
from .measures import kernel_product
from .model import (
    ModelSpec,
    SeededRng,
    TypedGraph,
    log_rn_derivative,
    pair_probabilities,
    sample_network,
    tilted_probabilities,
)
from .rates import degree_rate_lambda

OBSERVABLES = ("L1", "L2", "deg", "M1", "isolated")
ENUMERATION_BUDGET = 10_000_000

# vectorized path: at most this many pairs per graph, and this many
# random numbers per block
_BATCH_MAX_PAIRS = 4096
_BATCH_CELLS = 1 << 22


def _check_kind(kind: str) -> str:
    if kind not in OBSERVABLES:
        raise ValueError(f"unknown observable {kind!r}; expected one of {OBSERVABLES}")
    return kind


# -- observable keys -----------------------------------------------------------

def observable_key(graph: TypedGraph, kind: str) -> tuple:
    """Canonical integer key of an observable, computed from the empirical measures."""
    _check_kind(kind)
    n = graph.n
    if kind == "L1":
        return tuple(int(x * n) for x in type_measure(graph, exact=True))
    if kind == "L2":
        return tuple(int(x * n) for x in cooperative_measure(graph, exact=True).ravel())
    if kind == "deg":
        d = degree_measure(graph, k_max=max(n - 1, 0), exact=True)
        return tuple((k, int(x * n)) for k, x in enumerate(d.pmf) if x)
    if kind == "M1":
        om = neighbourhood_measure(graph, cap=max(n - 1, 1), exact=True)
        return tuple((a, prof, int(x * n)) for (a, prof), x in om.items())
    d = degree_measure(graph, k_max=0, exact=True)
    return (int(d.pmf[0] * n),)


def _pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def _batch_keys(types: np.ndarray, adj: np.ndarray, m: int, symmetric: bool, kind: str) -> list:
    """Observable keys for a block of graphs.

    ``types`` is ``(R, n)``; ``adj`` is ``(R, C)`` booleans over the pairs
    ``i < j`` in lexicographic order.
    """
    R, n = types.shape
    I, J = _pairs(n)
    if kind == "L1":
        rows = np.stack([(types == a).sum(axis=1) for a in range(m)], axis=1)
        return _rows_to_keys(rows, tuple)
    if kind == "L2":
        cell = types[:, I] * m + types[:, J]
        E = np.stack([(adj & (cell == k)).sum(axis=1) for k in range(m * m)], axis=1)
        E = E.reshape(R, m, m)
        L = E + E.transpose(0, 2, 1) if symmetric else 2 * E
        return _rows_to_keys(L.reshape(R, m * m), tuple)
    deg = np.zeros((R, n), dtype=np.int64)
    for k, (i, j) in enumerate(zip(I, J)):
        deg[:, i] += adj[:, k]
        deg[:, j] += adj[:, k]
    if kind == "isolated":
        return _rows_to_keys((deg == 0).sum(axis=1, keepdims=True), tuple)
    if kind == "deg":
        hist = np.stack([(deg == k).sum(axis=1) for k in range(n)], axis=1)
        return _rows_to_keys(hist, lambda row: tuple((k, int(c)) for k, c in enumerate(row) if c))
    # M1: per-site profile, then a histogram over (type, profile) cells
    prof = np.zeros((R, n, m), dtype=np.int64)
    for k, (i, j) in enumerate(zip(I, J)):
        e = adj[:, k].astype(np.int64)
        np.add.at(prof, (np.arange(R), i, types[:, j]), e)
        np.add.at(prof, (np.arange(R), j, types[:, i]), e)
    radix = n ** np.arange(m - 1, -1, -1)
    code = types * n ** m + (prof * radix).sum(axis=2)
    ncell = m * n ** m
    hist = np.zeros((R, ncell), dtype=np.int64)
    np.add.at(hist, (np.repeat(np.arange(R), n), code.ravel()), 1)

    def decode(row):
        out = []
        for cellid in np.flatnonzero(row):
            a, rest = divmod(int(cellid), n ** m)
            prof_t = tuple(int(x) for x in np.unravel_index(rest, (n,) * m)) if m > 1 else (rest,)
            out.append((a, prof_t, int(row[cellid])))
        return tuple(sorted(out))

    return _rows_to_keys(hist, decode)


def _rows_to_keys(rows: np.ndarray, convert) -> list:
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    keys = [convert(tuple(int(x) for x in u)) if convert is tuple else convert(u) for u in uniq]
    return [keys[i] for i in inverse.ravel()]


# -- laws ----------------------------------------------------------------------

@dataclass
class EnsembleDistribution:
    """Law of an observable: ``{key: probability}`` plus provenance."""

    kind: str
    probs: dict
    replicas: int | None = None

    @property
    def support(self) -> list[tuple[tuple, float]]:
        return sorted(self.probs.items())

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def probability(self, predicate: Callable[[tuple], bool]) -> float:
        return math.fsum(p for k, p in self.probs.items() if predicate(k))

    def tv(self, other: "EnsembleDistribution") -> float:
        keys = set(self.probs) | set(other.probs)
        return 0.5 * math.fsum(abs(self.probs.get(k, 0.0) - other.probs.get(k, 0.0)) for k in keys)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    se: float
    replicas: int
    seed: int
    log_mean: float | None = None
    ess: float | None = None
    hits: int | None = None
    flagged: bool = False


# -- parallel plumbing -----------------------------------------------------------

def _pool_map(func, tasks: Sequence, workers: int) -> list:
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("fork")) as ex:
        return list(ex.map(func, tasks, chunksize=1))


def _block_size(spec: ModelSpec) -> int:
    C = max(spec.n * (spec.n - 1) // 2, 1)
    return int(min(65536, max(1, _BATCH_CELLS // (C + spec.n))))


def _use_batch(spec: ModelSpec, kind: str | None = None) -> bool:
    C = spec.n * (spec.n - 1) // 2
    if C > _BATCH_MAX_PAIRS:
        return False
    if kind == "M1" and spec.m * spec.n ** spec.m > 4096:
        return False
    return True


def _blocks(replicas: int, size: int) -> list[tuple[int, int]]:
    return [(b, min(size, replicas - b * size)) for b in range(-(-replicas // size))]


def _sample_block(spec: ModelSpec, g, seed: int, block: int, count: int):
    """Vectorized draw of ``count`` graphs: types, adjacency and log-RN."""
    gen = SeededRng(seed, block).generator()
    n, m = spec.n, spec.m
    I, J = _pairs(n)
    types = gen.choice(m, size=(count, n), p=spec.eta)
    P = pair_probabilities(spec)
    Pt = P if g is None else tilted_probabilities(P, g)
    u = gen.random((count, I.shape[0]))
    ti, tj = types[:, I], types[:, J]
    adj = u < Pt[ti, tj]
    if g is None:
        logrn = np.zeros(count)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            on = np.where(P > 0, np.log(P) - np.log(Pt), 0.0)
            off = np.where(P > 0, np.log1p(-P) - np.log1p(-Pt), 0.0)
        logrn = np.where(adj, on[ti, tj], off[ti, tj]).sum(axis=1)
    return types, adj, logrn


def _law_block(args):
    spec, kind, seed, block, count = args
    types, adj, _ = _sample_block(spec, None, seed, block, count)
    return Counter(_batch_keys(types, adj, spec.m, spec.symmetric, kind))


def _law_replica(args):
    spec, kind, seed, r = args
    return observable_key(sample_network(spec, SeededRng(seed, r)), kind)


# -- exact enumeration -------------------------------------------------------------

def enumeration_size(spec: ModelSpec) -> int:
    """Number of (types, graph) configurations: ``m^n * 2^(n(n-1)/2)``."""
    return spec.m ** spec.n * 2 ** (spec.n * (spec.n - 1) // 2)


def _enumerate_types(args):
    spec, kind, type_vec = args
    n = spec.n
    I, J = _pairs(n)
    C = I.shape[0]
    types = np.array(type_vec, dtype=np.int64)
    p = pair_probabilities(spec)[types[I], types[J]]
    p_types = math.prod(float(spec.eta[t]) for t in type_vec)
    out = defaultdict(list)
    if p_types == 0:
        return out
    for mask in range(2 ** C):
        bits = np.array([(mask >> k) & 1 for k in range(C)], dtype=bool)
        prob = p_types * math.prod(np.where(bits, p, 1.0 - p).tolist())
        if prob == 0:
            continue
        g = TypedGraph(spec.alphabet, types, np.stack([I[bits], J[bits]], axis=1), spec.symmetric)
        out[observable_key(g, kind)].append(prob)
    return out


def enumerate_ensemble(spec: ModelSpec, kind: str, budget: int = ENUMERATION_BUDGET,
                       workers: int = 1) -> EnsembleDistribution:
    """Exact law of an observable by summing over every configuration.

    Raises :class:`BudgetError` when ``m^n * 2^(n(n-1)/2)`` exceeds ``budget``.
    """
    _check_kind(kind)
    size = enumeration_size(spec)
    if size > budget:
        raise BudgetError(size, budget)
    tasks = [(spec, kind, tv) for tv in itertools.product(range(spec.m), repeat=spec.n)]
    merged = defaultdict(list)
    for part in _pool_map(_enumerate_types, tasks, workers):
        for key, probs in part.items():
            merged[key].extend(probs)
    probs = {k: math.fsum(v) for k, v in merged.items()}
    dist = EnsembleDistribution(kind, dict(sorted(probs.items())))
    if abs(dist.total() - 1.0) > 1e-12:
        raise RuntimeError(f"enumerated probabilities sum to {dist.total()!r}")
    return dist


# -- Monte Carlo -------------------------------------------------------------------

def mc_observable(spec: ModelSpec, kind: str, replicas: int, seed: int,
                  workers: int = 1) -> EnsembleDistribution:
    """Empirical law of an observable over ``replicas`` independent graphs."""
    _check_kind(kind)
    if replicas < 1:
        raise ValueError("need at least one replica")
    counts = Counter()
    if _use_batch(spec, kind):
        tasks = [(spec, kind, seed, b, k) for b, k in _blocks(replicas, _block_size(spec))]
        for part in _pool_map(_law_block, tasks, workers):
            counts.update(part)
    else:
        tasks = [(spec, kind, seed, r) for r in range(replicas)]
        counts.update(_pool_map(_law_replica, tasks, workers))
    probs = {k: v / replicas for k, v in sorted(counts.items())}
    return EnsembleDistribution(kind, probs, replicas)


def _replica_apply(args):
    spec, fn, seed, r, g = args
    graph = sample_network(spec, SeededRng(seed, r), g)
    return fn(graph)


def replicate(spec: ModelSpec, fn: Callable[[TypedGraph], object], replicas: int, seed: int,
              workers: int = 1, g=None) -> list:
    """``fn(graph)`` for each replica graph, in replica order.

    ``fn`` must be picklable (a module-level function or class) when
    ``workers > 1``.
    """
    tasks = [(spec, fn, seed, r, g) for r in range(replicas)]
    return _pool_map(_replica_apply, tasks, workers)


def mc_estimate(values: Sequence[float], seed: int) -> McEstimate:
    """Sample mean and its standard error."""
    x = np.asarray(values, dtype=float)
    R = x.shape[0]
    mean = math.fsum(x) / R
    se = math.sqrt(math.fsum((x - mean) ** 2) / (R - 1) / R) if R > 1 else math.inf
    return McEstimate(mean, se, R, seed)


# -- tilted rare-event estimation --------------------------------------------------

@dataclass(frozen=True)
class Event:
    """Predicate on the canonical key of one observable."""

    kind: str
    predicate: Callable[[tuple], bool]
    name: str = "event"

    def __call__(self, graph: TypedGraph) -> bool:
        return bool(self.predicate(observable_key(graph, self.kind)))


@dataclass(frozen=True)
class NoEdges:
    """Predicate for the empty-graph event on ``L2`` keys."""

    def __call__(self, key) -> bool:
        return not any(key)


@dataclass(frozen=True)
class LinkMassBall:
    """``|L2 - target|`` (total variation of the pair measures) at most ``radius``.

    Works on ``L2`` keys, which hold ``n * L2`` row-major.
    """

    n: int
    target: tuple
    radius: float

    def __call__(self, key) -> bool:
        tv = 0.5 * sum(abs(k / self.n - t) for k, t in zip(key, self.target))
        # boundary outcomes sit exactly on the sphere; absorb rounding
        return tv <= self.radius + 1e-12 * (1.0 + self.radius)


@dataclass(frozen=True)
class AtLeastIsolated:
    count: int

    def __call__(self, key) -> bool:
        return key[0] >= self.count


def _tilted_block(args):
    spec, event, g, seed, block, count = args
    types, adj, logrn = _sample_block(spec, g, seed, block, count)
    keys = _batch_keys(types, adj, spec.m, spec.symmetric, event.kind)
    cache = {}
    hit = np.empty(count, dtype=bool)
    for r, k in enumerate(keys):
        if k not in cache:
            cache[k] = bool(event.predicate(k))
        hit[r] = cache[k]
    return np.where(hit, logrn, -np.inf)


def _tilted_replica(args):
    spec, event, g, seed, r = args
    graph = sample_network(spec, SeededRng(seed, r), g)
    if not event(graph):
        return -math.inf
    return log_rn_derivative(spec, graph, g)


def _weighted_estimate(logw: np.ndarray, seed: int) -> McEstimate:
    """Mean and SE of ``exp(logw)`` computed with a common shift."""
    R = logw.shape[0]
    hits = int(np.isfinite(logw).sum())
    if hits == 0:
        return McEstimate(0.0, 0.0, R, seed, -math.inf, 0.0, 0, flagged=True)
    shift = float(logw[np.isfinite(logw)].max())
    w = np.exp(logw - shift)
    mean_s = math.fsum(w) / R
    var_s = math.fsum((w - mean_s) ** 2) / (R - 1) if R > 1 else math.inf
    se_s = math.sqrt(var_s / R)
    ess = math.fsum(w) ** 2 / math.fsum(w * w)
    scale = math.exp(shift) if shift < 700 else math.inf
    return McEstimate(mean_s * scale, se_s * scale, R, seed, shift + math.log(mean_s), ess, hits)


def rare_event_tilted(spec: ModelSpec, event: Event, g, replicas: int, seed: int,
                      workers: int = 1) -> McEstimate:
    """Importance-sampling estimate of ``P(event)``.

    Graphs are drawn with link probabilities tilted by ``g`` and each hit is
    weighted by the exact likelihood ratio. ``g = 0`` is plain Monte Carlo.
    The estimate is flagged when no replica hits the event.
    """
    g = np.zeros((spec.m, spec.m)) if g is None else np.asarray(g, dtype=float)
    if _use_batch(spec, event.kind):
        tasks = [(spec, event, g, seed, b, k) for b, k in _blocks(replicas, _block_size(spec))]
        logw = np.concatenate(_pool_map(_tilted_block, tasks, workers))
    else:
        tasks = [(spec, event, g, seed, r) for r in range(replicas)]
        logw = np.array(_pool_map(_tilted_replica, tasks, workers), dtype=float)
    return _weighted_estimate(logw, seed)


def optimal_tilt(pi_target, omega, c) -> np.ndarray:
    """Test function that makes ``pi_target`` the typical link measure.

    ``log(pi_target / (c omega omega))`` with zero where the kernel product
    vanishes; entries where only ``pi_target`` vanishes are clipped to -50.
    """
    target = kernel_product(c, omega)
    pi_target = np.asarray(pi_target, dtype=float)
    g = np.zeros_like(target)
    pos = (pi_target > 0) & (target > 0)
    g[pos] = np.log(pi_target[pos] / target[pos])
    g[(pi_target == 0) & (target > 0)] = -50.0
    return g


def tilted_mean_weight(spec: ModelSpec, g, replicas: int, seed: int, workers: int = 1) -> McEstimate:
    """Mean of ``exp(log dP/dP~)`` under the tilted law; equals 1 in expectation."""
    return rare_event_tilted(spec, Event("L1", _always, "always"), g, replicas, seed, workers)


def _always(key) -> bool:
    return True


# -- slope scans -------------------------------------------------------------------

@dataclass(frozen=True)
class SlopeRow:
    n: int
    estimate: float
    se: float
    slope: float
    usable: bool


def ldp_slope_scan(spec_at: Callable[[int], ModelSpec], ns: Sequence[int],
                   event_at: Callable[[int], Event], g_at: Callable[[int], np.ndarray],
                   replicas: int, seed: int, workers: int = 1) -> list[SlopeRow]:
    """``-(1/n) log P_hat(event)`` along a grid of sizes.

    Rows whose standard error exceeds 30% of the estimate are marked unusable.
    """
    rows = []
    for n in ns:
        est = rare_event_tilted(spec_at(n), event_at(n), g_at(n), replicas, seed, workers)
        if est.flagged or est.mean <= 0:
            rows.append(SlopeRow(n, est.mean, est.se, math.inf, False))
            continue
        slope = -est.log_mean / n
        rows.append(SlopeRow(n, est.mean, est.se, slope, est.se <= 0.3 * est.mean))
    return rows


def empty_graph_log_probability(spec: ModelSpec) -> float:
    """Exact ``log P(no links)``, averaging over the type law."""
    if spec.m == 1:
        p = float(pair_probabilities(spec)[0, 0])
        return spec.n * (spec.n - 1) / 2 * math.log1p(-p)
    raise DomainError("closed form implemented for a single type only")


# -- asymptotic form of the likelihood ratio ----------------------------------------

@dataclass(frozen=True)
class AsymptoticRnReport:
    n: int
    max_decomposition_error: float
    max_deviation: float
    mean_deviation: float


def _decomposed_log_rn(graph: TypedGraph, g, h) -> float:
    n = graph.n
    L2 = cooperative_measure(graph)
    L1 = type_measure(graph)
    return float(-n * np.sum(0.5 * L2 * g) - n * np.sum(0.5 * np.outer(L1, L1) * h)
                 + np.sum(0.5 * np.diag(L1) * np.diag(h)))


def asymptotic_rn_check(spec: ModelSpec, g, replicas: int, seed: int) -> AsymptoticRnReport:
    """Compare the exact log-RN derivative with its empirical-measure form.

    The exact value equals ``-n<L2/2, g> - n<L1 x L1 / 2, h_n> + <L1_diag / 2, h_n>``
    with ``h_n = n log((1 - p)/(1 - p~))`` (up to rounding). Replacing
    ``h_n`` by its limit ``c (1 - e^g)`` gives the asymptotic form; the
    deviation between the two is O(1), i.e. o(n).
    Symmetric models and symmetric ``g`` only.
    """
    g = np.asarray(g, dtype=float)
    if not spec.symmetric or not np.array_equal(g, g.T):
        raise DomainError("asymptotic check needs a symmetric model and test function")
    P = pair_probabilities(spec)
    Pt = tilted_probabilities(P, g)
    n = spec.n
    h_n = -n * (np.log1p(-P) - np.log1p(-Pt))
    h_inf = spec.kernel * (1.0 - np.exp(g))
    dec_err, dev = [], []
    for r in range(replicas):
        graph = sample_network(spec, SeededRng(seed, r), g)
        exact = log_rn_derivative(spec, graph, g)
        dec_err.append(abs(exact - _decomposed_log_rn(graph, g, h_n)))
        dev.append(abs(exact - _decomposed_log_rn(graph, g, h_inf)))
    return AsymptoticRnReport(n, max(dec_err), max(dev), math.fsum(dev) / replicas)


# -- contraction check ----------------------------------------------------------------

def minimize_degree_rate_given_isolated(z: float, c: float, k_max: int = 30, restarts: int = 1000,
                                        seed: int = 0, step: float = 0.5, iters: int = 4000
                                        ) -> tuple[float, np.ndarray]:
    """``min { degree_rate_lambda(d, c) : d(0) = z }`` over pmfs on ``0..k_max``.

    Entropic mirror descent (projected gradient in the KL geometry, whose
    projection onto the scaled simplex is a renormalization), run from
    ``restarts`` random Dirichlet starts in parallel. Returns the best value
    and its pmf.
    """
    if not 0 <= z < 1:
        raise DomainError("z must lie in [0, 1)")
    rng = SeededRng(seed, 0).generator()
    k = np.arange(1, k_max + 1, dtype=float)
    logfact = np.cumsum(np.log(k))
    d = rng.dirichlet(np.ones(k_max), size=restarts) * (1.0 - z)
    d = np.maximum(d, 1e-300)
    for _ in range(iters):
        mean = d @ k
        grad = np.log(d) + 1.0 + logfact - 0.5 * np.outer(np.log(mean * c), k)
        logd = np.log(d) - step * grad
        logd -= logd.max(axis=1, keepdims=True)
        d = np.exp(logd)
        d *= (1.0 - z) / d.sum(axis=1, keepdims=True)
        d = np.maximum(d, 1e-300)
    best_val, best = math.inf, None
    for row in d:
        pmf = np.concatenate([[z], row])
        val = degree_rate_lambda(DegreeDistribution(pmf, 0.0), c).value
        if val < best_val:
            best_val, best = val, pmf
    return best_val, best


# -- law-of-large-numbers summaries ---------------------------------------------------

@dataclass(frozen=True)
class LlnObservation:
    """Per-replica summary used by the law-of-large-numbers checks."""

    isolated_fraction: float
    degree_pmf: tuple
    degree_overflow: float
    link_measure: tuple
    type_measure: tuple


@dataclass(frozen=True)
class LlnSummary:
    k_max: int = 50

    def __call__(self, graph: TypedGraph) -> LlnObservation:
        d = degree_measure(graph, self.k_max)
        return LlnObservation(
            float(d.pmf[0]),
            tuple(float(x) for x in d.pmf),
            float(d.overflow),
            tuple(float(x) for x in cooperative_measure(graph).ravel()),
            tuple(float(x) for x in type_measure(graph)),
        )
