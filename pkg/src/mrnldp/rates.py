"""Large-deviation rate functions for multitype random networks.

Every function returns a :class:`RatePair`; infinite rates carry a short
witness naming the constraint that failed.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .empirical import DEFAULT_CAP, DegreeDistribution, NeighbourhoodMeasure, consistency_check
from .exceptions import DomainError
from .measures import kullback_action, relative_entropy

# largest (cap + 1) ** m grid that q1_kernel will materialize per type
_MAX_PROFILE_GRID = 5_000_000


@dataclass(frozen=True)
class RatePair:
    value: float
    witness: str | None = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self):
        return float(self.value)


def _rate(value: float, witness: str) -> RatePair:
    if not math.isfinite(value):
        return RatePair(math.inf, witness)
    # rounding at a zero of the rate
    if -1e-12 < value < 0:
        value = 0.0
    return RatePair(value)


def rate_I(rho, pi, eta, c) -> RatePair:
    """Joint rate of the type measure and the link measure.

    ``H(rho || eta) + 0.5 * kullback_action(pi, rho, c)``.
    """
    h_type = relative_entropy(rho, eta)
    if math.isinf(h_type):
        return RatePair(math.inf, "type measure not absolutely continuous w.r.t. eta")
    h_link = kullback_action(pi, rho, c)
    return _rate(h_type + 0.5 * h_link, "link measure charges a pair with zero kernel weight")


def rate_I1(omega, pi, c) -> RatePair:
    """Rate of the link measure given type measure ``omega``: half the Kullback action."""
    return _rate(0.5 * kullback_action(pi, omega, c),
                 "link measure charges a pair with zero kernel weight")


def poisson_pmf(c: float, k_max: int) -> DegreeDistribution:
    """Poisson(c) pmf on ``0..k_max`` with the upper tail as overflow."""
    if c < 0 or not math.isfinite(c):
        raise DomainError(f"Poisson mean must be finite and nonnegative, got {c!r}")
    k = np.arange(k_max + 1)
    if c == 0:
        pmf = (k == 0).astype(float)
        return DegreeDistribution(pmf, 0.0)
    pmf = np.exp(-c + k * math.log(c) - gammaln(k + 1))
    return DegreeDistribution(pmf, float(poisson.sf(k_max, c)))


def _poisson_logpmf(k, mean):
    k = np.asarray(k, dtype=float)
    if mean == 0:
        return np.where(k == 0, 0.0, -np.inf)
    return -mean + k * math.log(mean) - gammaln(k + 1)


def q1_log_mass(pi, omega1, a: int, profile) -> float:
    """Log of the reference neighbourhood mass at type ``a`` and ``profile``.

    The reference law puts mass ``omega1(a)`` on type ``a`` and, given the
    type, draws independent Poisson neighbour counts with means
    ``pi(a, b) / omega1(a)``.
    """
    pi = np.asarray(pi, dtype=float)
    w = float(omega1[a])
    if w == 0:
        if np.any(pi[a] > 0):
            raise DomainError(f"type {a} has zero mass but positive link mass")
        return -math.inf
    means = pi[a] / w
    return math.log(w) + float(sum(_poisson_logpmf(k, mu) for k, mu in zip(profile, means)))


def q1_kernel(pi, omega1, cap: int = DEFAULT_CAP) -> NeighbourhoodMeasure:
    """Reference neighbourhood law built from a link measure and a type law.

    Profiles with any count above ``cap`` go to the per-type overflow.
    """
    pi = np.asarray(pi, dtype=float)
    omega1 = np.asarray(omega1, dtype=float)
    m = omega1.shape[0]
    for a in range(m):
        if omega1[a] == 0 and np.any(pi[a] > 0):
            raise DomainError(f"type {a} has zero mass but positive link mass")
    if (cap + 1) ** m > _MAX_PROFILE_GRID:
        raise ValueError(f"profile grid ({cap + 1})^{m} too large to materialize")
    masses = {}
    overflow = np.zeros(m)
    ks = np.arange(cap + 1)
    for a in range(m):
        if omega1[a] == 0:
            continue
        means = pi[a] / omega1[a]
        factors = [np.exp(_poisson_logpmf(ks, mu)) for mu in means]
        inside = 1.0
        for mu in means:
            inside *= 1.0 - (poisson.sf(cap, mu) if mu > 0 else 0.0)
        overflow[a] = omega1[a] * (1.0 - inside)
        for prof in itertools.product(range(cap + 1), repeat=m):
            w = omega1[a]
            for b, k in enumerate(prof):
                w *= factors[b][k]
            if w > 0:
                masses[(a, prof)] = w
    return NeighbourhoodMeasure(m, cap, masses, overflow)


def rate_J1(pi, omega: NeighbourhoodMeasure, eta, c, tol: float = 1e-9,
            tail_tol: float = 1e-12) -> RatePair:
    """Joint rate of the link measure and the neighbourhood measure.

    ``H(omega || q1) + H(omega_1 || eta) + 0.5 * kullback_action(pi, omega_1, c)``
    when ``(pi, omega)`` is consistent, ``inf`` otherwise. ``omega_1`` is the
    type marginal of ``omega`` and ``q1`` the reference law of
    :func:`q1_kernel` built from ``pi`` and ``omega_1``. Overflow mass up to
    ``tail_tol`` is treated as truncation error.
    """
    if omega.has_overflow(tail_tol):
        return RatePair(math.inf, "overflow: neighbourhood measure exceeds the profile cap")
    ok, residual = consistency_check(pi, omega, tol=tol)
    if not ok:
        return RatePair(math.inf, f"consistency (residual {residual:.3g})")
    pi = np.asarray(pi, dtype=float)
    omega1 = omega.type_marginal().astype(float)
    h_nb = 0.0
    for (a, prof), w in omega.items():
        w = float(w)
        if w <= 0:
            continue
        lq = q1_log_mass(pi, omega1, a, prof)
        if lq == -math.inf:
            return RatePair(math.inf, "neighbourhood measure not absolutely continuous w.r.t. q1")
        h_nb += w * (math.log(w) - lq)
    h_type = relative_entropy(omega1, eta)
    if math.isinf(h_type):
        return RatePair(math.inf, "type marginal not absolutely continuous w.r.t. eta")
    h_link = kullback_action(pi, omega1, c)
    return _rate(h_nb + h_type + 0.5 * h_link,
                 "link measure charges a pair with zero kernel weight")


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(x), 0.0)


def degree_rate_lambda(d: DegreeDistribution, c: float, tail_tol: float = 1e-12) -> RatePair:
    """Rate of the degree distribution of a sparse Erdos-Renyi graph with kernel ``c``.

    ``H(d || q_<d>) + <d>/2 log(<d>/c) - <d>/2 + c/2``, where ``q_<d>`` is
    Poisson with the mean of ``d``. Overflow mass above ``tail_tol`` stands
    for an infinite mean and gives ``inf``; smaller overflow is treated as
    truncation error of a light-tailed pmf and ignored.
    """
    if not c > 0:
        raise DomainError(f"kernel scalar must be positive, got {c!r}")
    if d.overflow > tail_tol:
        return RatePair(math.inf, "infinite mean degree (overflow mass)")
    pmf = np.asarray(d.pmf, dtype=float)
    k = np.arange(len(pmf))
    mean = float(np.dot(k, pmf))
    sup = pmf > 0
    logq = _poisson_logpmf(k[sup], mean)
    h = float(np.sum(pmf[sup] * (np.log(pmf[sup]) - logq)))
    value = h + 0.5 * float(_xlogx(mean)) - 0.5 * mean * math.log(c) - 0.5 * mean + 0.5 * c
    return _rate(value, "")


def solve_t(z: float, c: float, tol: float = 1e-12) -> float:
    """Positive root of ``1 - exp(-t) = c (1 - z) / t`` by bisection.

    The residual ``1 - exp(-t) - c(1 - z)/t`` is increasing in ``t``, so the
    root is unique. Defined for ``0 <= z < 1``.
    """
    if not c > 0:
        raise DomainError(f"kernel scalar must be positive, got {c!r}")
    if not 0 <= z < 1:
        raise DomainError(f"z must lie in [0, 1), got {z!r}")
    s = c * (1.0 - z)

    def resid(t):
        return -math.expm1(-t) - s / t

    lo, hi = 0.5 * min(s, math.sqrt(s)), max(1.0, 2.0 * s)
    while resid(lo) > 0:
        lo *= 0.5
    while resid(hi) < 0:
        hi *= 2.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        r = resid(mid)
        if r == 0 or hi - lo <= 4 * math.ulp(mid):
            lo = hi = mid
            break
        if r < 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    if abs(resid(t)) >= tol:
        raise RuntimeError(f"bisection stalled at t={t!r}, residual {resid(t)!r}")
    return t


def isolated_rate_h(z: float, c: float) -> RatePair:
    """Rate of the fraction of isolated vertices in a sparse Erdos-Renyi graph.

    ``z log z + c z (1 - z/2) - (1 - z)[log(c/t) - (t - c(1-z))^2 / (2c(1-z))]``
    with ``t = solve_t(z, c)``. At ``z = 1`` this is the limit ``c/2``.
    """
    if not c > 0:
        raise DomainError(f"kernel scalar must be positive, got {c!r}")
    if not 0 <= z <= 1:
        raise DomainError(f"z must lie in [0, 1], got {z!r}")
    if z == 1:
        return RatePair(0.5 * c)
    t = solve_t(z, c)
    u = 1.0 - z
    zlogz = z * math.log(z) if z > 0 else 0.0
    value = zlogz + c * z * (1 - z / 2) - u * (math.log(c / t) - (t - c * u) ** 2 / (2 * c * u))
    return _rate(value, "")


def rate_landscape(c: float, num: int = 1000) -> list[tuple[float, RatePair]]:
    """``isolated_rate_h`` on an even grid of ``num`` points in ``[0, 1]``."""
    return [(float(z), isolated_rate_h(float(z), c)) for z in np.linspace(0.0, 1.0, num)]
