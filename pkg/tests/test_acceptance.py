"""Acceptance criteria, one test per criterion.

Each test prints a ``criterion k: PASS|FAIL`` line (also collected in the
terminal summary) and then asserts the same outcome.
"""
import math
import time

import numpy as np
import pytest
import yaml

from mrnldp import (
    Alphabet,
    ModelSpec,
    SeededRng,
    consistency_check,
    cooperative_measure,
    degree_rate_lambda,
    isolated_rate_h,
    kernel_product,
    kullback_action,
    kullback_variational_gap,
    neighbourhood_measure,
    poisson_pmf,
    q1_kernel,
    rate_I,
    rate_J1,
    sample_network,
    spectral_potential,
    type_measure,
)
from mrnldp.cli import main
from mrnldp.verify import (
    AtLeastIsolated,
    Event,
    LinkMassBall,
    LlnSummary,
    NoEdges,
    empty_graph_log_probability,
    enumerate_ensemble,
    mc_observable,
    mc_estimate,
    minimize_degree_rate_given_isolated,
    rare_event_tilted,
    replicate,
    tilted_mean_weight,
)
from mrnldp.measures import total_variation

pytestmark = pytest.mark.slow
AB = Alphabet(("a", "b"))


def random_triple(rng, m):
    rho = rng.dirichlet(np.ones(m))
    c = rng.uniform(0, 4, (m, m))
    c = (c + c.T) / 2
    c[rng.random((m, m)) < 0.15] = 0.0
    c = np.minimum(c, c.T)
    return rho, c


def test_1_kullback_nonnegativity(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst, bad_iff, count = math.inf, 0, 0
    for i in range(10_000):
        m = 1 + i % 4
        rho, c = random_triple(rng, m)
        target = kernel_product(c, rho)
        kind = i % 3
        if kind == 0:
            pi = target.copy()
        elif kind == 1:
            pi = target * rng.uniform(0.5, 1.5, (m, m))
        else:
            pi = target + np.where(target > 0, 1e-3, 0.0)
        val = kullback_action(pi, rho, c)
        count += 1
        worst = min(worst, val)
        equal = np.all(np.abs(pi - target) <= 1e-12)
        if (abs(val) <= 1e-12) != bool(equal):
            bad_iff += 1
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-12 and bad_iff == 0 and elapsed < 10
    criterion(1, ok, f"{count} triples, min action {worst:.3g}, iff violations {bad_iff}, {elapsed:.1f}s")
    assert ok


def test_2_variational_identity(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    max_gap, max_excess = 0.0, -math.inf
    for i in range(1000):
        m = 1 + i % 3
        w, c = random_triple(rng, m)
        target = kernel_product(c, w)
        pi = target * rng.uniform(0, 3, (m, m))
        pi[rng.random((m, m)) < 0.1] = 0.0
        V, _ = kullback_variational_gap(pi, w, c)
        max_gap = max(max_gap, abs(V - kullback_action(pi, w, c)))
        for _ in range(100):
            g = rng.uniform(-4, 4, (m, m))
            excess = float(np.sum(g * pi)) - spectral_potential(g, w, c) - V
            max_excess = max(max_excess, excess)
    elapsed = time.perf_counter() - t0
    ok = max_gap <= 1e-10 and max_excess <= 1e-12 and elapsed < 30
    criterion(2, ok, f"max |dual - primal| {max_gap:.2g}, max grid excess {max_excess:.3g}, {elapsed:.1f}s")
    assert ok


def test_3_lln(criterion):
    t0 = time.perf_counter()
    n, seeds = 10**5, 20
    spec = ModelSpec.single_type(2.0, n)
    obs = replicate(spec, LlnSummary(50), seeds, seed=31)
    iso = mc_estimate([o.isolated_fraction for o in obs], 31)
    q2 = poisson_pmf(2.0, 50).pmf
    tv = max(total_variation(np.asarray(o.degree_pmf), q2) for o in obs)
    mass = max(abs(sum(o.link_measure) - 2.0) for o in obs)
    spec2 = ModelSpec(AB, [0.5, 0.5], [[2.0, 1.0], [1.0, 3.0]], n)
    obs2 = replicate(spec2, LlnSummary(50), seeds, seed=32)
    entry = 0.0
    for o in obs2:
        L2 = np.asarray(o.link_measure).reshape(2, 2)
        entry = max(entry, np.abs(L2 - kernel_product(spec2.kernel, o.type_measure)).max(),
                    np.abs(L2 - kernel_product(spec2.kernel, spec2.eta)).max())
    elapsed = time.perf_counter() - t0
    z = (iso.mean - math.exp(-2)) / iso.se
    ok = abs(z) <= 3 and tv < 0.02 and mass < 0.05 and entry < 0.05 and elapsed < 120
    criterion(3, ok, f"isolated {iso.mean:.5f} (z={z:+.2f}), max TV {tv:.4f}, "
                     f"max |mass-2| {mass:.4f}, two-type max entry error {entry:.4f}, {elapsed:.1f}s")
    assert ok


def test_4_exact_oracle(criterion):
    t0 = time.perf_counter()
    spec = ModelSpec(AB, [0.5, 0.5], [[1.0, 2.0], [2.0, 1.0]], 4)
    tvs = {}
    for kind in ("L1", "L2", "deg", "M1", "isolated"):
        exact = enumerate_ensemble(spec, kind)
        tvs[kind] = exact.tv(mc_observable(spec, kind, 10**6, seed=41))
    elapsed = time.perf_counter() - t0
    ok = max(tvs.values()) < 0.005 and elapsed < 120
    detail = ", ".join(f"{k} {v:.4f}" for k, v in tvs.items())
    criterion(4, ok, f"TV per observable: {detail}; {elapsed:.1f}s")
    assert ok


def test_5_rate_zeros(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for c in (0.5, 1.0, 2.0, 4.0):
        eta = np.array([0.3, 0.7])
        kern = c * np.array([[1.0, 0.5], [0.5, 2.0]])
        pi = kernel_product(kern, eta)
        vals = [
            degree_rate_lambda(poisson_pmf(c, 80), c).value,
            isolated_rate_h(math.exp(-c), c).value,
            rate_I(eta, pi, eta, kern).value,
            rate_J1(pi, q1_kernel(pi, eta, cap=40), eta, kern).value,
        ]
        worst = max(worst, max(abs(v) for v in vals))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 5
    criterion(5, ok, f"max |rate at LLN point| {worst:.2g} over c in (0.5, 1, 2, 4), {elapsed:.2f}s")
    assert ok


def test_6_contraction(criterion):
    t0 = time.perf_counter()
    errs = {}
    for z in (0.2, math.exp(-2), 0.6, 0.9):
        best, pmf = minimize_degree_rate_given_isolated(z, 2.0)
        assert pmf[0] == z
        errs[z] = abs(best - isolated_rate_h(z, 2.0).value)
    elapsed = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-6 and elapsed < 60
    detail = ", ".join(f"z={z:.4f}: {e:.1e}" for z, e in errs.items())
    criterion(6, ok, f"|min lambda - h|: {detail}; {elapsed:.1f}s")
    assert ok


def test_7_empty_graph_slope(criterion):
    t0 = time.perf_counter()
    zs, slopes = [], []
    for n in (50, 100, 200):
        spec = ModelSpec.single_type(2.0, n)
        exact_log = empty_graph_log_probability(spec)
        assert exact_log == pytest.approx(math.comb(n, 2) * math.log1p(-2 / (n + 2)), rel=1e-14)
        est = rare_event_tilted(spec, Event("L2", NoEdges()), np.full((1, 1), -math.log(n)), 10_000, seed=71)
        zs.append((est.mean - math.exp(exact_log)) / est.se)
        slopes.append(-exact_log / n)
    large = -empty_graph_log_probability(ModelSpec.single_type(2.0, 10**6)) / 10**6
    elapsed = time.perf_counter() - t0
    ok = (max(abs(z) for z in zs) <= 3 and abs(slopes[-1] - 1.0) <= 0.02
          and slopes[0] < slopes[1] < slopes[2] < large <= 1.0 and elapsed < 120)
    criterion(7, ok, f"z-scores {', '.join(f'{z:+.2f}' for z in zs)}; exact slopes "
                     f"{', '.join(f'{s:.5f}' for s in slopes)} (n=1e6: {large:.6f}), {elapsed:.1f}s")
    assert ok


def test_8_change_of_measure(criterion):
    t0 = time.perf_counter()
    spec = ModelSpec(AB, [0.5, 0.5], [[1.0, 2.0], [2.0, 1.0]], 10)
    gs = [np.array([[0.5, -0.3], [-0.3, 1.0]]), np.full((2, 2), math.log(2)),
          np.array([[-1.0, 0.8], [0.8, -2.0]])]
    zs = []
    for k, g in enumerate(gs):
        est = tilted_mean_weight(spec, g, 10**5, seed=80 + k)
        zs.append((est.mean - 1.0) / est.se)
    small = spec.with_n(4)
    exact_law = enumerate_ensemble(small, "L2")
    events = [
        (Event("L2", LinkMassBall(4, (0.0, 1.5, 1.5, 0.0), 0.5)), np.array([[-1.0, 1.0], [1.0, -1.0]])),
        (Event("L2", NoEdges()), np.full((2, 2), -1.5)),
    ]
    ev_z = []
    for k, (ev, g) in enumerate(events):
        est = rare_event_tilted(small, ev, g, 10**5, seed=90 + k)
        ev_z.append((est.mean - exact_law.probability(ev.predicate)) / est.se)
    iso_exact = enumerate_ensemble(small, "isolated").probability(AtLeastIsolated(3))
    est = rare_event_tilted(small, Event("isolated", AtLeastIsolated(3)), np.full((2, 2), -1.0), 10**5, seed=95)
    ev_z.append((est.mean - iso_exact) / est.se)
    elapsed = time.perf_counter() - t0
    ok = max(abs(z) for z in zs + ev_z) <= 3 and elapsed < 120
    criterion(8, ok, f"mean-weight z {', '.join(f'{z:+.2f}' for z in zs)}; "
                     f"event vs enumeration z {', '.join(f'{z:+.2f}' for z in ev_z)}; {elapsed:.1f}s")
    assert ok


def test_9_empirical_identities(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    failures = 0
    for r in range(1000):
        n = int(rng.integers(1, 51))
        spec = ModelSpec(AB, [0.4, 0.6], [[1.0, 3.0], [3.0, 0.5]], n)
        G = sample_network(spec, SeededRng(9, r))
        L1 = type_measure(G, exact=True)
        L2 = cooperative_measure(G, exact=True)
        M = neighbourhood_measure(G, exact=True)
        ok_r = (sum(L2.ravel()) * n == 2 * G.num_edges
                and list(M.type_marginal()) == list(L1)
                and consistency_check(L2, M, tol=0) == (True, 0.0))
        failures += not ok_r
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 10
    criterion(9, ok, f"1000 graphs, {failures} identity failures, {elapsed:.1f}s")
    assert ok


MODEL1 = {"labels": ["a"], "eta": [1.0], "kernel": [[2.0]]}
MODEL2 = {"labels": ["a", "b"], "eta": [0.5, 0.5], "kernel": [[1.0, 2.0], [2.0, 1.0]]}
DETERMINISM_CONFIGS = {
    "lln": {"experiment": "lln", "model": MODEL2, "n": 3000, "replicas": 6, "seed": 1},
    "enumerate": {"experiment": "enumerate", "model": MODEL2, "n": 4, "observable": "M1",
                  "replicas": 30000, "seed": 2},
    "rare-event": {"experiment": "rare-event", "model": MODEL1, "n": 60,
                   "event": {"kind": "no-edges"}, "replicas": 3000, "seed": 3},
    "rare-event-large": {"experiment": "rare-event", "model": MODEL1, "n": 120,
                         "event": {"kind": "isolated-at-least", "fraction": 0.3},
                         "tilt": [[-0.7]], "replicas": 40, "seed": 4},
    "rate-landscape": {"experiment": "rate-landscape", "model": MODEL1},
    "slope-scan": {"experiment": "slope-scan", "model": MODEL1, "n_grid": [30, 60],
                   "event": {"kind": "link-ball", "target": [[4.0]], "radius": 0.1},
                   "replicas": 2000, "seed": 5},
}


def test_10_determinism(criterion, tmp_path):
    t0 = time.perf_counter()
    mismatched = []
    for name, cfg in DETERMINISM_CONFIGS.items():
        path = tmp_path / f"{name}.yaml"
        path.write_text(yaml.safe_dump(cfg))
        outputs = []
        for run, workers in enumerate((1, 1, 4, 16)):
            out = tmp_path / f"{name}-{run}"
            assert main(["run", str(path), "--out", str(out), "--workers", str(workers)]) == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if any(o != outputs[0] for o in outputs[1:]):
            mismatched.append(name)
    elapsed = time.perf_counter() - t0
    ok = not mismatched
    criterion(10, ok, f"{len(DETERMINISM_CONFIGS)} configs x workers (1, 1, 4, 16): "
                      f"{'all byte-identical' if ok else 'mismatch in ' + ', '.join(mismatched)}, {elapsed:.1f}s")
    assert ok
