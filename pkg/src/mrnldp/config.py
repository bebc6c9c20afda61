"""Experiment configuration: loading, validation and hashing.

A configuration is a YAML (or JSON) mapping::

    experiment: lln              # see EXPERIMENTS
    model:
      labels: [a, b]
      eta: [0.5, 0.5]
      kernel: [[2.0, 1.0], [1.0, 2.0]]   # c = kappa / ell
      symmetric: true
    n: 100000                    # site count (n_grid for slope-scan)
    replicas: 20
    seed: 1
    caps: {degree: 50, profile: 50}
    output: results/lln

Experiment-specific keys are listed in ``docs/config.md``. ``output`` and
``workers`` do not enter the configuration hash, so re-running with another
worker count reproduces the same files byte for byte.
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import yaml

from .measures import Alphabet
from .model import ModelSpec

EXPERIMENTS = {
    "lln": "law-of-large-numbers check of isolated fraction, degree law and link measure",
    "enumerate": "exact law of an observable by enumeration, compared with Monte Carlo",
    "rare-event": "tilted importance-sampling estimate of a rare event probability",
    "rate-landscape": "isolated-vertex rate h(z) on a grid of z in [0, 1]",
    "slope-scan": "-(1/n) log P(event) along an n-grid against the rate value",
}
OBSERVABLE_KINDS = ("L1", "L2", "deg", "M1", "isolated")
EVENT_KINDS = ("no-edges", "link-ball", "isolated-at-least")
_UNHASHED = ("output", "workers")


class ConfigError(ValueError):
    """Schema or invariant violation; ``errors`` holds ``field.path: message`` strings."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def load_config(path) -> dict:
    """Parse a YAML/JSON config file. I/O problems raise ``OSError``."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"<file>: not valid YAML/JSON ({exc})"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["<root>: expected a mapping"])
    return data


def config_hash(cfg: dict) -> str:
    payload = {k: v for k, v in cfg.items() if k not in _UNHASHED}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _matrix(x, m: int):
    try:
        a = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        return None
    return a if a.shape == (m, m) else None


def validate_config(cfg: dict) -> tuple[list[str], list[str]]:
    """Return ``(errors, warnings)``; both are ``field.path: message`` strings."""
    errors, warnings = [], []
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        errors.append(f"experiment: must be one of {sorted(EXPERIMENTS)}, got {exp!r}")

    model = cfg.get("model")
    m = None
    if not isinstance(model, dict):
        errors.append("model: missing or not a mapping")
        model = {}
    labels = model.get("labels")
    if not isinstance(labels, list) or not labels:
        errors.append("model.labels: must be a nonempty list")
    else:
        try:
            Alphabet(tuple(labels))
            m = len(labels)
        except ValueError as exc:
            errors.append(f"model.labels: {exc}")
    symmetric = model.get("symmetric", True)
    if not isinstance(symmetric, bool):
        errors.append("model.symmetric: must be true or false")
    if m is not None:
        eta = model.get("eta")
        try:
            eta_a = np.asarray(eta, dtype=float)
        except (TypeError, ValueError):
            eta_a = None
        if eta_a is None or eta_a.shape != (m,):
            errors.append(f"model.eta: must be a list of {m} numbers")
        elif np.any(eta_a < 0) or not np.all(np.isfinite(eta_a)):
            errors.append("model.eta: entries must be finite and nonnegative")
        elif abs(eta_a.sum() - 1.0) > 1e-9:
            errors.append(f"model.eta: must sum to 1, sums to {eta_a.sum():.12g}")
        kern = _matrix(model.get("kernel"), m)
        if kern is None:
            errors.append(f"model.kernel: must be a {m}x{m} matrix of numbers")
        elif np.any(kern < 0) or not np.all(np.isfinite(kern)):
            errors.append("model.kernel: entries must be finite and nonnegative")
        elif symmetric is True and not np.array_equal(kern, kern.T):
            errors.append("model.kernel: asymmetric kernel with symmetric flag set")

    if exp == "slope-scan":
        grid = cfg.get("n_grid")
        if not isinstance(grid, list) or not grid or not all(_is_int(x) and x >= 2 for x in grid):
            errors.append("n_grid: must be a nonempty list of integers >= 2")
    elif exp in ("lln", "enumerate", "rare-event"):
        n = cfg.get("n")
        if not _is_int(n) or n < 1:
            errors.append("n: must be a positive integer")
    if exp != "rate-landscape":
        reps = cfg.get("replicas")
        if not _is_int(reps) or reps < 1:
            errors.append("replicas: must be a positive integer")
    if not _is_int(cfg.get("seed", 0)):
        errors.append("seed: must be an integer")
    caps = cfg.get("caps", {})
    if not isinstance(caps, dict):
        errors.append("caps: must be a mapping")
    else:
        for key, val in caps.items():
            if key not in ("degree", "profile"):
                errors.append(f"caps.{key}: unknown cap")
            elif not _is_int(val) or val < 1:
                errors.append(f"caps.{key}: must be an integer >= 1")
    workers = cfg.get("workers", 1)
    if not _is_int(workers) or workers < 1:
        errors.append("workers: must be a positive integer")

    single = m == 1
    if exp == "enumerate":
        if cfg.get("observable") not in OBSERVABLE_KINDS:
            errors.append(f"observable: must be one of {list(OBSERVABLE_KINDS)}")
        if m is not None and _is_int(cfg.get("n")):
            n = cfg["n"]
            need = m ** n * 2 ** (n * (n - 1) // 2)
            budget = cfg.get("budget", 10_000_000)
            if need > budget:
                warnings.append(f"n: enumeration needs {need} configurations, budget is {budget}")
    if exp in ("rare-event", "slope-scan"):
        event = cfg.get("event")
        if not isinstance(event, dict) or event.get("kind") not in EVENT_KINDS:
            errors.append(f"event.kind: must be one of {list(EVENT_KINDS)}")
        else:
            if event["kind"] == "link-ball":
                if m is not None and _matrix(event.get("target"), m) is None:
                    errors.append(f"event.target: must be a {m}x{m} matrix")
                r = event.get("radius")
                if not isinstance(r, (int, float)) or isinstance(r, bool) or r <= 0:
                    errors.append("event.radius: must be a positive number")
            if event["kind"] == "isolated-at-least":
                if not isinstance(event.get("fraction"), (int, float)):
                    errors.append("event.fraction: must be a number in [0, 1]")
        tilt = cfg.get("tilt", "optimal")
        if tilt != "optimal" and m is not None and _matrix(tilt, m) is None:
            errors.append(f"tilt: must be 'optimal' or a {m}x{m} matrix")
        if exp == "slope-scan":
            band = cfg.get("band", 0.15)
            if not isinstance(band, (int, float)) or isinstance(band, bool) or band <= 0:
                errors.append("band: must be a positive number")
        if exp == "slope-scan" and not single and "rate_value" not in cfg:
            errors.append("rate_value: required for slope scans of multitype models")
    if exp == "rate-landscape":
        if not single:
            errors.append("model.labels: rate-landscape needs a single-type model")
        elif m is not None and _matrix(model.get("kernel"), 1) is not None and not float(model["kernel"][0][0]) > 0:
            errors.append("model.kernel: rate-landscape needs a positive kernel")
        pts = cfg.get("grid_points", 1000)
        if not _is_int(pts) or pts < 2:
            errors.append("grid_points: must be an integer >= 2")
    if exp == "lln":
        tol = cfg.get("tolerances", {})
        if not isinstance(tol, dict):
            errors.append("tolerances: must be a mapping")
    return errors, warnings


def model_spec(cfg: dict, n: int) -> ModelSpec:
    model = cfg["model"]
    return ModelSpec(
        Alphabet(tuple(model["labels"])),
        np.asarray(model["eta"], dtype=float),
        np.asarray(model["kernel"], dtype=float),
        n,
        bool(model.get("symmetric", True)),
    )


def finite_or_none(x):
    """JSON-safe float."""
    x = float(x)
    return x if math.isfinite(x) else None
