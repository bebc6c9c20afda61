"""Sampling multitype random networks (stochastic block models).

Sites get i.i.d. types from the type law ``eta``; each unordered pair of
distinct sites is then linked independently. With link-formation rate
``kappa_n`` and destruction rate ``ell_n`` the stationary link probability
is ``kappa_n / (kappa_n + ell_n)``; we fix ``kappa_n / ell_n = c / n`` so
that ``p_n(a, b) = c(a, b) / (n + c(a, b))``.

Edges are always stored as unordered pairs ``i < j``. For an asymmetric
kernel the pair ``(i, j)`` with ``i < j`` uses ``c(Z(i), Z(j))``; this
orientation rule lives in :func:`pair_probabilities` and nowhere else.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy.special import expit, logit

from .exceptions import DomainError, StructureError
from .measures import Alphabet, as_kernel, as_probability


def canonical_edge_probability(c: np.ndarray, n: int) -> np.ndarray:
    """``c / (n + c)``: link probability under ``kappa_n / ell_n = c / n``."""
    c = np.asarray(c, dtype=float)
    return c / (n + c)


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of a multitype random network on ``n`` sites.

    ``edge_probability_fn(c, n)`` maps the kernel to finite-n link
    probabilities; swap it to test sensitivity to the finite-n sequence.
    """

    alphabet: Alphabet
    eta: np.ndarray
    kernel: np.ndarray
    n: int
    symmetric: bool = True
    edge_probability_fn: Callable[[np.ndarray, int], np.ndarray] = field(
        default=canonical_edge_probability, compare=False
    )

    def __post_init__(self):
        if not isinstance(self.alphabet, Alphabet):
            object.__setattr__(self, "alphabet", Alphabet(tuple(self.alphabet)))
        m = self.alphabet.m
        object.__setattr__(self, "eta", as_probability(self.eta, m=m, tol=1e-9))
        object.__setattr__(self, "kernel", as_kernel(self.kernel, m=m, symmetric=self.symmetric))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"site count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "symmetric", bool(self.symmetric))

    @property
    def m(self) -> int:
        return self.alphabet.m

    def with_n(self, n: int) -> "ModelSpec":
        return ModelSpec(self.alphabet, self.eta, self.kernel, n, self.symmetric,
                         self.edge_probability_fn)

    @classmethod
    def single_type(cls, c: float, n: int, label: str = "a") -> "ModelSpec":
        """Erdos-Renyi special case: one type, kernel ``c``."""
        return cls(Alphabet((label,)), np.ones(1), np.array([[float(c)]]), n)


@dataclass(frozen=True)
class SeededRng:
    """A reproducible random stream identified by ``(seed, stream)``."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        return np.random.default_rng(ss)


RngLike = Union[np.random.Generator, SeededRng, int]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeededRng):
        return rng.generator()
    return SeededRng(int(rng)).generator()


@dataclass(eq=False)
class TypedGraph:
    """Site types plus an edge list of unordered pairs ``i < j``.

    ``types`` holds label indices into ``alphabet``; ``edges`` is an
    ``(E, 2)`` integer array sorted lexicographically.
    """

    alphabet: Alphabet
    types: np.ndarray
    edges: np.ndarray
    symmetric: bool = True

    def __post_init__(self):
        self.types = np.asarray(self.types, dtype=np.int64)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        n = self.types.shape[0]
        if self.types.ndim != 1 or n < 1:
            raise StructureError("types must be a nonempty 1-d array")
        if np.any(self.types < 0) or np.any(self.types >= self.alphabet.m):
            raise StructureError("type index outside the alphabet")
        if edges.size:
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise StructureError("edges must be pairs i < j (no self-loops)")
            if edges.min() < 0 or edges.max() >= n:
                raise StructureError("edge endpoint outside [0, n)")
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if np.any(np.all(edges[1:] == edges[:-1], axis=1)):
                raise StructureError("duplicate edge")
        self.edges = edges

    @property
    def n(self) -> int:
        return int(self.types.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def __eq__(self, other):
        if not isinstance(other, TypedGraph):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.symmetric == other.symmetric
                and np.array_equal(self.types, other.types)
                and np.array_equal(self.edges, other.edges))


def edge_probability(spec: ModelSpec, a, b) -> float:
    """Link probability between a site of type ``a`` and one of type ``b``.

    Labels may be given by name or index.
    """
    ia = spec.alphabet.index(a) if isinstance(a, str) else int(a)
    ib = spec.alphabet.index(b) if isinstance(b, str) else int(b)
    return float(pair_probabilities(spec)[ia, ib])


def pair_probabilities(spec: ModelSpec) -> np.ndarray:
    """``P[a, b]``: link probability of a pair ``i < j`` with ``Z(i)=a, Z(j)=b``."""
    p = np.asarray(spec.edge_probability_fn(spec.kernel, spec.n), dtype=float)
    if p.shape != spec.kernel.shape or np.any(p < 0) or np.any(p > 1):
        raise DomainError("edge probability function must return values in [0, 1]")
    return p


def tilted_probabilities(p, g) -> np.ndarray:
    """Exponentially tilted link probabilities ``e^g p / (e^g p + 1 - p)``.

    Entries with ``g == 0`` are returned unchanged (bit for bit).
    """
    p = np.asarray(p, dtype=float)
    g = np.asarray(g, dtype=float)
    if g.shape != p.shape:
        raise StructureError(f"test function must have shape {p.shape}, got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise OverflowError("tilting needs a finite test function")
    with np.errstate(divide="ignore"):
        tilted = expit(g + logit(p))
    return np.where(g == 0, p, tilted)


def sample_types(spec: ModelSpec, rng: RngLike) -> np.ndarray:
    """``n`` i.i.d. label indices drawn from ``spec.eta``."""
    gen = as_generator(rng)
    return gen.choice(spec.m, size=spec.n, p=spec.eta)


def _pair_index_to_ij(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row i of the strict upper triangle starts at i*(2n-i-1)/2
    k = np.asarray(k, dtype=np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2).astype(np.int64)
    i = np.clip(i, 0, n - 2)

    def start(r):
        return r * (2 * n - r - 1) // 2

    while True:
        high = start(i) > k
        if not high.any():
            break
        i[high] -= 1
    while True:
        low = start(i + 1) <= k
        if not low.any():
            break
        i[low] += 1
    j = k - start(i) + i + 1
    return i, j


def _sample_edges(types: np.ndarray, P: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """Independent links with type-pair probabilities ``P``.

    Walks the ``n(n-1)/2`` pairs in lexicographic order with geometric jumps
    at the largest probability, then thins each candidate to its own
    probability. Cost is proportional to the number of candidates, not pairs.
    """
    n = types.shape[0]
    total = n * (n - 1) // 2
    pmax = float(P.max()) if P.size else 0.0
    if total == 0 or pmax <= 0.0:
        return np.empty((0, 2), dtype=np.int64)
    mean = total * pmax
    chunk = int(min(total, mean + 6.0 * math.sqrt(mean) + 64))
    found = []
    last = -1
    while last < total:
        jumps = gen.geometric(pmax, size=chunk)
        idx = last + np.cumsum(jumps, dtype=np.int64)
        last = int(idx[-1])
        idx = idx[idx < total]
        if idx.size:
            i, j = _pair_index_to_ij(idx, n)
            keep = gen.random(idx.size) * pmax < P[types[i], types[j]]
            found.append(np.stack([i[keep], j[keep]], axis=1))
    if not found:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(found, axis=0)


def _check_types(spec: ModelSpec, types) -> np.ndarray:
    types = np.asarray(types, dtype=np.int64)
    if types.shape != (spec.n,):
        raise StructureError(f"expected {spec.n} site types, got shape {types.shape}")
    return types


def sample_graph(spec: ModelSpec, types, rng: RngLike) -> TypedGraph:
    """Draw the links of a multitype random network given the site types."""
    types = _check_types(spec, types)
    edges = _sample_edges(types, pair_probabilities(spec), as_generator(rng))
    return TypedGraph(spec.alphabet, types, edges, spec.symmetric)


def sample_tilted_graph(spec: ModelSpec, types, g, rng: RngLike) -> TypedGraph:
    """Draw links under the law tilted by the test function ``g``.

    With ``g`` identically zero this consumes the random stream exactly as
    :func:`sample_graph` does and returns the same graph.
    """
    types = _check_types(spec, types)
    P = tilted_probabilities(pair_probabilities(spec), g)
    edges = _sample_edges(types, P, as_generator(rng))
    return TypedGraph(spec.alphabet, types, edges, spec.symmetric)


def sample_network(spec: ModelSpec, rng: RngLike, g=None) -> TypedGraph:
    """Types and links from one stream; tilted when ``g`` is given."""
    gen = as_generator(rng)
    types = sample_types(spec, gen)
    if g is None:
        return sample_graph(spec, types, gen)
    return sample_tilted_graph(spec, types, g, gen)


def oriented_pair_counts(types, m: int) -> np.ndarray:
    """``N[a, b] = #{i < j : Z(i) = a, Z(j) = b}``."""
    types = np.asarray(types, dtype=np.int64)
    onehot = np.zeros((types.shape[0], m), dtype=np.int64)
    onehot[np.arange(types.shape[0]), types] = 1
    before = np.cumsum(onehot, axis=0) - onehot
    return before.T @ onehot


def oriented_edge_counts(graph: TypedGraph) -> np.ndarray:
    """``E[a, b] = #{edges (i, j), i < j : Z(i) = a, Z(j) = b}``."""
    m = graph.alphabet.m
    out = np.zeros((m, m), dtype=np.int64)
    if graph.num_edges:
        np.add.at(out, (graph.types[graph.edges[:, 0]], graph.types[graph.edges[:, 1]]), 1)
    return out


def _xlogy_diff(count, a, b):
    # count * (log a - log b), with 0 * anything = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        term = count * (a - b)
    return np.where(count > 0, term, 0.0)


def log_rn_derivative(spec: ModelSpec, graph: TypedGraph, g) -> float:
    """Exact ``log dP/dP~`` of a graph, where ``P~`` is tilted by ``g``.

    Sums ``log p - log p~`` over the links and ``log(1-p) - log(1-p~)`` over
    the non-linked pairs. Both laws share the type law, so only links enter.
    """
    P = pair_probabilities(spec)
    Pt = tilted_probabilities(P, g)
    N = oriented_pair_counts(graph.types, spec.m)
    E = oriented_edge_counts(graph)
    with np.errstate(divide="ignore"):
        on = _xlogy_diff(E, np.log(P), np.log(Pt))
        off = _xlogy_diff(N - E, np.log1p(-P), np.log1p(-Pt))
    return float(math.fsum(on.ravel()) + math.fsum(off.ravel()))


# -- edge-list text format ---------------------------------------------------

def format_graph(graph: TypedGraph) -> str:
    """Serialize: header ``n m symmetric``, then ``i label`` per site, then ``i j`` per edge."""
    buf = io.StringIO()
    buf.write(f"{graph.n} {graph.alphabet.m} {int(graph.symmetric)}\n")
    labels = graph.alphabet.labels
    for i, t in enumerate(graph.types):
        buf.write(f"{i} {labels[t]}\n")
    for i, j in graph.edges:
        buf.write(f"{i} {j}\n")
    return buf.getvalue()


def parse_graph(text: str, alphabet: Alphabet | None = None) -> TypedGraph:
    """Inverse of :func:`format_graph`.

    Without ``alphabet`` the label order is order of first appearance, and
    all ``m`` labels must then occur among the sites.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise StructureError("empty graph file")
    try:
        n, m, sym = (int(x) for x in lines[0].split())
    except ValueError:
        raise StructureError(f"bad header line {lines[0]!r}") from None
    if len(lines) < 1 + n:
        raise StructureError(f"expected {n} site lines")
    site_labels = []
    for k, ln in enumerate(lines[1:1 + n]):
        parts = ln.split()
        if len(parts) != 2 or int(parts[0]) != k:
            raise StructureError(f"bad site line {ln!r}")
        site_labels.append(parts[1])
    if alphabet is None:
        alphabet = Alphabet(tuple(dict.fromkeys(site_labels)))
    if alphabet.m != m:
        raise StructureError(f"header declares {m} labels, alphabet has {alphabet.m}")
    types = np.array([alphabet.index(s) for s in site_labels], dtype=np.int64)
    edges = []
    for ln in lines[1 + n:]:
        parts = ln.split()
        if len(parts) != 2:
            raise StructureError(f"bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return TypedGraph(alphabet, types, np.array(edges, dtype=np.int64).reshape(-1, 2), bool(sym))


def write_graph(graph: TypedGraph, path) -> None:
    Path(path).write_text(format_graph(graph))


def read_graph(path, alphabet: Alphabet | None = None) -> TypedGraph:
    return parse_graph(Path(path).read_text(), alphabet)
