"""Synthetic functional-ordinal datasets for the two simulation scenarios.

Scenario (a) hides a cumulative level effect on the lowest-variance spline.
Scenario (b) separates the upper levels on one spline and the lower levels
(scaled by ``q``) on another, so consecutive levels are unevenly spaced.
Its ``random_steps`` variant instead gives every spline random per-level
slopes, one set for the lower half of the levels and one for the upper.

Every random quantity comes from its own counter-based substream keyed by
``(seed, tag, index)``: appending splines or units never changes the draws
already made for existing ones.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field

import numpy as np

from ordifun import rng
from ordifun.basis import FunctionalDataset, make_bspline_basis
from ordifun.errors import ValidationError
from ordifun.ordinal import OrdinalLabels

# substream tags
_SPLINE, _NOISE, _LEVEL, _GAMMA, _PAIR = 1, 2, 3, 4, 5


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    q: float
    n: int = 1000
    n_basis: int = 10
    n_C: int = 8
    domain: tuple = (0.0, 100.0)
    seed: int = 0
    variant: str = "fixed_steps"

    def __post_init__(self):
        if self.scenario not in ("a", "b"):
            raise ValidationError(f"scenario must be 'a' or 'b', got {self.scenario!r}", "bad_scenario")
        if not 0.0 <= float(self.q) <= 1.0:
            raise ValidationError(f"q must lie in [0, 1], got {self.q}", "bad_q")
        if self.variant not in ("fixed_steps", "random_steps"):
            raise ValidationError(f"unknown variant {self.variant!r}", "bad_scenario")
        if self.n < 1 or self.n_C < 1:
            raise ValidationError("n and n_C must be positive", "bad_scenario")
        if self.scenario == "b" and self.n_basis < 2:
            raise ValidationError("scenario b needs at least two splines", "bad_basis")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))


@dataclass
class Simulation:
    data: FunctionalDataset
    labels: OrdinalLabels
    config: ScenarioConfig
    realized: dict = field(default_factory=dict)

    def sidecar(self) -> dict:
        """Full realized configuration, JSON-serializable."""
        out = asdict(self.config)
        out["domain"] = list(self.config.domain)
        out.update(self.realized)
        out["dataset_sha256"] = dataset_hash(self.data, self.labels)
        return out


def dataset_hash(data: FunctionalDataset, labels: OrdinalLabels) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(data.coefficients, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(labels.levels, dtype="<i8").tobytes())
    return h.hexdigest()


def _spline_uniforms(seed, n_basis, draws):
    """``(n_basis, draws)`` uniforms; spline ``j`` owns substream ``(SPLINE, j)``."""
    return np.stack([rng.uniform(rng.stream_key(seed, _SPLINE, j), draws) for j in range(n_basis)])


def _noise(seed, n, n_basis):
    """Standard normals ``(n, n_basis)``; column ``j`` is substream ``(NOISE, j)`` indexed by unit."""
    return np.column_stack([rng.normal(rng.stream_key(seed, _NOISE, j), n) for j in range(n_basis)])


def _levels(seed, n, n_C):
    return rng.integers(rng.stream_key(seed, _LEVEL), n, n_C + 1)


def _cumulative_shift(increments, levels):
    """``sum_{c=0}^{c_i} increments[c]`` for each unit."""
    return np.cumsum(increments)[levels]


def _pack(cfg, coef, levels, realized):
    basis = make_bspline_basis(cfg.n_basis, cfg.domain)
    return Simulation(FunctionalDataset(coef, basis), OrdinalLabels(levels, cfg.n_C), cfg, realized)


def simulate_a(cfg: ScenarioConfig) -> Simulation:
    u = _spline_uniforms(cfg.seed, cfg.n_basis, 2)
    mu = -10.0 + 20.0 * u[:, 0]
    sigma = 10.0 * u[:, 1]
    coef = mu + sigma * _noise(cfg.seed, cfg.n, cfg.n_basis)
    levels = _levels(cfg.seed, cfg.n, cfg.n_C)
    gamma = np.zeros(cfg.n_C + 1)
    gamma[1:] = 10.0 * cfg.q + rng.normal(rng.stream_key(cfg.seed, _GAMMA), cfg.n_C)
    s = int(np.argmin(sigma))
    coef[:, s] += _cumulative_shift(gamma, levels)
    realized = {"mu": mu.tolist(), "sigma": sigma.tolist(), "s": s, "gamma": gamma.tolist()}
    return _pack(cfg, coef, levels, realized)


def _distinct_pair(seed, n_basis):
    u = rng.uniform(rng.stream_key(seed, _PAIR), 2)
    j1 = min(int(u[0] * n_basis), n_basis - 1)
    j2 = min(int(u[1] * (n_basis - 1)), n_basis - 2)
    if j2 >= j1:
        j2 += 1
    return j1, j2


def simulate_b(cfg: ScenarioConfig) -> Simulation:
    if cfg.variant == "random_steps":
        return _simulate_b_random_steps(cfg)
    mu = -10.0 + 20.0 * _spline_uniforms(cfg.seed, cfg.n_basis, 1)[:, 0]
    coef = mu + _noise(cfg.seed, cfg.n, cfg.n_basis)
    levels = _levels(cfg.seed, cfg.n, cfg.n_C)
    j1, j2 = _distinct_pair(cfg.seed, cfg.n_basis)
    split = cfg.n_C // 2
    c = np.arange(cfg.n_C + 1)
    # (0,0,0,0,0,5,5,5,5) and (0,5q,5q,5q,5q,0,0,0,0) for n_C = 8
    gamma1 = np.where(c > split, 5.0, 0.0)
    gamma2 = np.where((c >= 1) & (c <= split), 5.0 * cfg.q, 0.0)
    coef[:, j1] += _cumulative_shift(gamma1, levels)
    coef[:, j2] += _cumulative_shift(gamma2, levels)
    realized = {
        "mu": mu.tolist(),
        "j1": j1,
        "j2": j2,
        "gamma1": gamma1.tolist(),
        "gamma2": gamma2.tolist(),
    }
    return _pack(cfg, coef, levels, realized)


def _simulate_b_random_steps(cfg):
    u = _spline_uniforms(cfg.seed, cfg.n_basis, 3)
    mu0, mu1, mu2 = (-1.0 + 2.0 * u[:, k] for k in range(3))
    levels = _levels(cfg.seed, cfg.n, cfg.n_C)
    split = cfg.n_C // 2
    low_steps = np.minimum(levels, split).astype(np.float64)
    high_steps = np.maximum(levels - split, 0).astype(np.float64)
    mean = mu0 + cfg.q * np.outer(low_steps, mu1) + np.outer(high_steps, mu2)
    coef = mean + _noise(cfg.seed, cfg.n, cfg.n_basis)
    realized = {"mu0": mu0.tolist(), "mu1": mu1.tolist(), "mu2": mu2.tolist()}
    return _pack(cfg, coef, levels, realized)


def simulate(cfg: ScenarioConfig) -> Simulation:
    return simulate_a(cfg) if cfg.scenario == "a" else simulate_b(cfg)


def simulate_scenario_a(cfg: ScenarioConfig):
    if cfg.scenario != "a":
        raise ValidationError("config is not for scenario a", "bad_scenario")
    sim = simulate_a(cfg)
    return sim.data, sim.labels


def simulate_scenario_b(cfg: ScenarioConfig):
    if cfg.scenario != "b":
        raise ValidationError("config is not for scenario b", "bad_scenario")
    sim = simulate_b(cfg)
    return sim.data, sim.labels
