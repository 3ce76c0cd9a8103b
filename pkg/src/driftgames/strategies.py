"""Player and adversary strategies.

The potential player weights chips proportionally to the negative spatial
gradient of the upper potential one step ahead.  The restricted adversary
splits the active chips into two groups of nearly equal gradient mass
(``balanced_partition``) and moves them by ``+-unit``, freezing chips that
sit at or below the flat region of the truncated potential.  For V1 a
biased coin-flip adversary with rejection on the drift constraint is also
provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .bounds import critical_index, shift_params
from .config import ConfigError, GameConfig, Side, Variant
from .engine import AdversaryAbort, AdversaryMove, GameState, at_or_below, loss_mask
from .potentials import potential_spec
from .special import log_neg_g_prime, potential_eval


@dataclass(frozen=True)
class PlayerParams:
    variant: Variant
    beta: float
    tau: float
    shift: float  # spatial offset of the upper potential, added to each position
    uniform_fallback_tolerance: float = 0.0

    @classmethod
    def for_config(cls, config: GameConfig, uniform_fallback_tolerance: float = 0.0) -> "PlayerParams":
        spec = potential_spec(config, Side.UPPER)
        scale = config.delta if config.variant.has_drift else config.R
        beta, tau = shift_params(config.variant, config.T, config.theta, scale, Side.UPPER)
        return cls(config.variant, beta, tau, spec.spatial_shift, uniform_fallback_tolerance)


def _normalized(logw: np.ndarray) -> np.ndarray:
    w = np.exp(logw - logw.max())
    return w / w.sum()


def player_weights(config: GameConfig, state: GameState, params: PlayerParams) -> np.ndarray:
    if state.t >= 0:
        raise ValueError("no move after the final round")
    N = config.N
    if config.variant.interval_moves:
        active = ~loss_mask(config, state)
    else:
        active = np.ones(N, dtype=bool)
    p = np.zeros(N)
    if not active.any():
        p[:] = 1.0 / N
        return p
    # the constant factor 2 of g_tilde' cancels in the normalization
    logw = np.asarray(
        log_neg_g_prime(state.positions[active] + params.shift, state.t + 1 - params.tau), dtype=float
    ).reshape(-1)
    tol = params.uniform_fallback_tolerance
    if tol > 0 and float(np.exp(logw).sum()) < tol:
        p[active] = 1.0 / active.sum()
        return p
    p[active] = _normalized(logw)
    return p


def uniform_weights(config: GameConfig, state: GameState) -> np.ndarray:
    return np.full(config.N, 1.0 / config.N)


class AdversaryMode(Enum):
    RANDOMIZED_V1 = "randomized"
    COMBINATORIAL = "combinatorial"


@dataclass(frozen=True)
class AdversaryParams:
    variant: Variant
    mode: AdversaryMode
    alpha: float
    beta: float
    tau: float
    shift: float  # spatial offset of the lower potential
    retry_budget: int = 64
    critical_index: int | None = None  # chips with counter <= -K are frozen (V2/V4)

    @classmethod
    def for_config(cls, config: GameConfig, mode=AdversaryMode.COMBINATORIAL) -> "AdversaryParams":
        mode = AdversaryMode(mode)
        v = config.variant
        scale = config.delta if v.has_drift else config.R
        beta, tau = shift_params(v, config.T, config.theta, scale, Side.LOWER)
        alpha = config.T ** (-1.0 - config.theta / 4.0)
        if mode is AdversaryMode.RANDOMIZED_V1 and v is not Variant.V1:
            raise ConfigError("the randomized adversary is defined for V1 only")
        k = critical_index(v, config.T, config.theta, scale) if v.interval_moves else None
        return cls(v, mode, alpha, beta, tau, config.threshold + beta, config.retry_budget, k)

    @property
    def critical_value(self) -> float:
        """Freezing threshold in shifted coordinates (``-inf`` when nothing freezes)."""
        return -self.shift if self.critical_index is not None else -math.inf


def randomized_v1_draw(config: GameConfig, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """One i.i.d. draw: ``1 - delta`` w.p. ``(1 + delta + alpha)/2``, else ``-1 - delta``."""
    q = (1.0 + config.delta + alpha) / 2.0
    return np.where(rng.random(config.N) < q, config.up, config.down)


def adversary_randomized_v1(
    config: GameConfig, state: GameState, p: np.ndarray, params: AdversaryParams, rng: np.random.Generator
) -> AdversaryMove:
    if config.variant is not Variant.V1:
        raise ConfigError("the randomized adversary is defined for V1 only")
    for attempt in range(params.retry_budget):
        z = randomized_v1_draw(config, params.alpha, rng)
        if float(p @ z) >= 0.0:
            return AdversaryMove(z, retries=attempt, increment_ok=_increment_ok(config, state, z, params))
    raise AdversaryAbort(
        f"no feasible draw within {params.retry_budget} attempts at t={state.t}"
    )


def _increment_ok(config: GameConfig, state: GameState, z: np.ndarray, params: AdversaryParams) -> bool:
    """Did the lower potential rise by at least its expectation minus ``alpha/2``?"""
    spec = potential_spec(config, Side.LOWER)
    s, t = state.positions, state.t
    q = (1.0 + config.delta + params.alpha) / 2.0
    after_up = potential_eval(spec, s + config.up, t + 1)
    after_down = potential_eval(spec, s + config.down, t + 1)
    now = potential_eval(spec, s, t)
    expected = float(np.mean(q * after_up + (1.0 - q) * after_down - now))
    actual = float(np.mean(potential_eval(spec, s + z, t + 1) - now))
    return actual >= expected - params.alpha / 2.0


def balanced_partition(a) -> np.ndarray:
    """Signs ``sigma`` with ``|sum sigma_i a_i| <= max a_i`` for nonnegative ``a``.

    Greedy: visit values in descending order (stable) and put each on the side
    with the smaller running sum, ties going to the ``+1`` side.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError("balanced_partition expects a 1-d sequence")
    if (a < 0).any() or np.isnan(a).any():
        raise ValueError("balanced_partition requires nonnegative values")
    order = np.argsort(-a, kind="stable")
    signs = np.empty(a.size, dtype=np.int8)
    signs[order] = _greedy_signs(np.ascontiguousarray(a[order]))
    return signs


@njit(cache=True)
def _greedy_signs(sorted_values):
    out = np.empty(sorted_values.size, dtype=np.int8)
    plus = 0.0
    minus = 0.0
    for k in range(sorted_values.size):
        if plus <= minus:
            plus += sorted_values[k]
            out[k] = 1
        else:
            minus += sorted_values[k]
            out[k] = -1
    return out


def adversary_combinatorial(
    config: GameConfig, state: GameState, p: np.ndarray, params: AdversaryParams
) -> AdversaryMove:
    v = config.variant
    N = config.N
    if v.interval_moves:
        if not state.lattice:
            raise ConfigError("the combinatorial adversary needs valid lattice counters")
        frozen = state.counters <= -params.critical_index
    else:
        frozen = np.zeros(N, dtype=bool)
    active = ~frozen
    z = np.zeros(N)
    if not active.any():
        return AdversaryMove(z, first_order=0.0)
    # scale-free gradient magnitudes -f'(s + beta, t + 1 - tau), max normalized to 1
    logs = np.asarray(
        log_neg_g_prime(state.positions[active] + params.shift, state.t + 1 - params.tau), dtype=float
    ).reshape(-1)
    a = np.exp(logs - logs.max())
    sigma = balanced_partition(a).astype(float)
    pa = p[active]
    if pa[sigma > 0].sum() < pa[sigma < 0].sum():
        sigma = -sigma
    if v is Variant.V1:
        za = np.where(sigma > 0, config.up, config.down)
        za = _repair_v1(pa, za, config)
        sigma = np.where(za == config.up, 1.0, -1.0)
    else:
        za = sigma * config.unit
    z[active] = za
    first_order = abs(float(sigma @ a))  # divided by max a = 1
    return AdversaryMove(z, first_order=first_order)


def _repair_v1(p: np.ndarray, z: np.ndarray, config: GameConfig) -> np.ndarray:
    """Lift down-moves to up-moves, heaviest weight first, until ``p.z >= 0``."""
    slack = float(p @ z)
    if slack >= 0:
        return z
    z = z.copy()
    gain = config.up - config.down
    down_idx = np.flatnonzero(z == config.down)
    for i in down_idx[np.argsort(-p[down_idx], kind="stable")]:
        z[i] = config.up
        slack += p[i] * gain
        if slack >= 0 and float(p @ z) >= 0:
            break
    return z


def adversary_greedy(config: GameConfig, state: GameState, p: np.ndarray) -> AdversaryMove:
    """Start with every chip up, then push down the lightest chips while ``p.z >= 0``."""
    z = np.full(config.N, config.up)
    slack = float(p @ z)
    gain = config.up - config.down
    for i in np.argsort(p, kind="stable"):
        if slack - p[i] * gain >= 0:
            z[i] = config.down
            slack -= p[i] * gain
    if float(p @ z) < 0:  # float drift in the running slack
        z = np.full(config.N, config.up)
    return AdversaryMove(z)


def adversary_random_feasible(
    config: GameConfig, state: GameState, p: np.ndarray, rng: np.random.Generator
) -> AdversaryMove:
    """Uniform moves from the move set, redrawn until ``p.z >= 0``."""
    for attempt in range(config.retry_budget):
        if config.variant.interval_moves:
            z = rng.uniform(config.down, config.up, size=config.N)
        else:
            z = np.where(rng.random(config.N) < 0.5, config.up, config.down)
        if float(p @ z) >= 0.0:
            return AdversaryMove(z, retries=attempt)
    raise AdversaryAbort(f"no feasible random draw within {config.retry_budget} attempts at t={state.t}")


PLAYERS = ("potential", "uniform")
ADVERSARIES = ("randomized", "combinatorial", "greedy", "randomFeasible")


def make_player(name: str, config: GameConfig):
    if name == "potential":
        params = PlayerParams.for_config(config)
        return lambda cfg, state: player_weights(cfg, state, params)
    if name == "uniform":
        return uniform_weights
    raise ConfigError(f"unknown player {name!r}; choose from {PLAYERS}")


def make_adversary(name: str, config: GameConfig):
    if name == "randomized":
        params = AdversaryParams.for_config(config, AdversaryMode.RANDOMIZED_V1)
        return lambda cfg, state, p, rng: adversary_randomized_v1(cfg, state, p, params, rng)
    if name == "combinatorial":
        params = AdversaryParams.for_config(config, AdversaryMode.COMBINATORIAL)
        return lambda cfg, state, p, rng: adversary_combinatorial(cfg, state, p, params)
    if name == "greedy":
        return lambda cfg, state, p, rng: adversary_greedy(cfg, state, p)
    if name == "randomFeasible":
        return adversary_random_feasible
    raise ConfigError(f"unknown adversary {name!r}; choose from {ADVERSARIES}")
