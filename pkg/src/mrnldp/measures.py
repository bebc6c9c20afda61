"""Finite-alphabet measures and the entropy functionals built on them.

Measures are plain numpy arrays indexed by label position: a probability
measure on the alphabet is a 1-d array, a pair measure (link measure,
connectivity kernel, test function) is an ``(m, m)`` array. The
connectivity kernel stores the single ratio ``c = kappa / ell``; a pair
that never links has ``c = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DomainError, StructureError

#: absolute per-entry tolerance for equality of measures
MEASURE_TOL = 1e-12


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of group labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 1:
            raise DomainError("alphabet needs at least one label")
        if len(set(labels)) != len(labels):
            raise DomainError(f"duplicate labels in {labels!r}")
        for lab in labels:
            if not lab or any(ch.isspace() for ch in lab):
                raise DomainError(f"label {lab!r} is empty or contains whitespace")

    @property
    def m(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)


def as_probability(weights: Sequence[float], m: int | None = None, tol: float = MEASURE_TOL) -> np.ndarray:
    """Validate and return a probability vector as a float array."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise StructureError(f"probability measure must be 1-d, got shape {w.shape}")
    if m is not None and w.shape[0] != m:
        raise StructureError(f"expected {m} weights, got {w.shape[0]}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DomainError("probability weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > tol:
        raise DomainError(f"probability weights sum to {w.sum()!r}, not 1")
    return w


def as_kernel(c, m: int | None = None, symmetric: bool | None = None) -> np.ndarray:
    """Validate a connectivity kernel ``c = kappa/ell`` as an ``(m, m)`` array."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise StructureError(f"kernel must be square, got shape {c.shape}")
    if m is not None and c.shape[0] != m:
        raise StructureError(f"kernel is {c.shape[0]}x{c.shape[0]}, alphabet has {m} labels")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise DomainError("kernel entries must be finite and nonnegative")
    if symmetric and not np.array_equal(c, c.T):
        raise DomainError("symmetric model requires a symmetric kernel")
    return c


def _as_pair(pi, m: int) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (m, m):
        raise StructureError(f"pair measure must have shape {(m, m)}, got {pi.shape}")
    if np.any(pi < 0) or not np.all(np.isfinite(pi)):
        raise DomainError("pair measure entries must be finite and nonnegative")
    return pi


def is_symmetric(a) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and np.array_equal(a, a.T)


def relative_entropy(mu, nu) -> float:
    """Relative entropy ``sum mu * log(mu / nu)`` of two finite measures.

    Neither argument needs to be normalized. Terms with ``mu == 0`` vanish
    and any ``mu > 0`` sitting where ``nu == 0`` gives ``inf``.

    Raises
    ------
    StructureError
        If the two measures live on different index sets (shapes).
    DomainError
        If any entry is negative.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise StructureError(f"index sets differ: {mu.shape} vs {nu.shape}")
    if np.any(mu < 0) or np.any(nu < 0):
        raise DomainError("relative entropy needs nonnegative measures")
    support = mu > 0
    if np.any(support & (nu == 0)):
        return float("inf")
    m, n = mu[support], nu[support]
    return float(np.sum(m * (np.log(m) - np.log(n))))


def kernel_product(c, rho) -> np.ndarray:
    """The pair measure ``c(a, b) rho(a) rho(b)``."""
    rho = np.asarray(rho, dtype=float)
    c = as_kernel(c, m=rho.shape[0])
    return c * np.outer(rho, rho)


def kullback_action(pi, rho, c) -> float:
    """Kullback action of a link measure ``pi`` against ``c rho (x) rho``.

    ``H(pi || c rho rho) + |c rho rho| - |pi|``. Nonnegative, zero exactly
    when ``pi`` equals the kernel product, and ``inf`` when ``pi`` charges a
    pair on which the kernel product vanishes.
    """
    rho = np.asarray(rho, dtype=float)
    target = kernel_product(c, rho)
    pi = _as_pair(pi, rho.shape[0])
    h = relative_entropy(pi, target)
    if np.isinf(h):
        return h
    val = h + target.sum() - pi.sum()
    # rounding can leave a tiny negative value at the equality point
    if -MEASURE_TOL * (1.0 + target.sum()) < val < 0.0:
        val = 0.0
    return float(val)


def spectral_potential(g, omega, c) -> float:
    """``-sum (1 - exp(g)) c omega (x) omega`` for a test function ``g``.

    Raises OverflowError when ``exp(g)`` is not representable.
    """
    omega = np.asarray(omega, dtype=float)
    target = kernel_product(c, omega)
    g = np.asarray(g, dtype=float)
    if g.shape != target.shape:
        raise StructureError(f"test function must have shape {target.shape}, got {g.shape}")
    with np.errstate(over="raise"):
        try:
            eg = np.exp(g)
        except FloatingPointError:
            raise OverflowError("exp(g) overflows in spectral potential") from None
    # zero-weight pairs contribute nothing whatever g is there
    mask = target > 0
    return float(-np.sum((1.0 - eg[mask]) * target[mask]))


def kullback_variational_gap(pi, omega, c) -> tuple[float, np.ndarray | None]:
    """Dual value of the Kullback action and the test function attaining it.

    The supremum over ``g`` of ``<g, pi> - spectral_potential(g, omega, c)``
    is attained at ``g* = log(pi / (c omega omega))``. Where ``pi`` vanishes
    but the kernel product does not, the supremum is only approached as
    ``g -> -inf``; those entries of ``g*`` are ``-inf``. Pairs where both
    vanish do not enter and get ``g* = 0``.

    Returns ``(inf, None)`` when ``pi`` is not absolutely continuous with
    respect to the kernel product.
    """
    omega = np.asarray(omega, dtype=float)
    target = kernel_product(c, omega)
    pi = _as_pair(pi, omega.shape[0])
    if np.any((pi > 0) & (target == 0)):
        return float("inf"), None
    g = np.zeros_like(pi)
    pos = pi > 0
    g[pos] = np.log(pi[pos]) - np.log(target[pos])
    g[(~pos) & (target > 0)] = -np.inf
    # <g*, pi> - rho(g*, omega), using e^{-inf} = 0 and 0 * (-inf) = 0
    eg = np.exp(g)
    live = target > 0
    value = float(np.sum(g[pos] * pi[pos]) + np.sum((1.0 - eg[live]) * target[live]))
    primal = kullback_action(pi, omega, c)
    if abs(value - primal) > 1e-9 * (1.0 + abs(primal)):
        raise RuntimeError(f"dual value {value!r} disagrees with Kullback action {primal!r}")
    return value, g


def total_variation(p, q) -> float:
    """Half the l1 distance between two pmfs on a shared enumeration."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise StructureError(f"supports differ: {p.shape} vs {q.shape}")
    return float(0.5 * np.abs(p - q).sum())


def total_variation_dict(p: dict, q: dict) -> float:
    """Total variation between two pmfs given as ``{outcome: mass}`` maps."""
    keys = set(p) | set(q)
    return 0.5 * float(sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys))
