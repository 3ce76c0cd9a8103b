"""Chip state, admissibility, step semantics and the game loop.

Time runs from ``-T`` to ``0``.  V1/V2 are simulated in shifted coordinates:
a move ``z`` here corresponds to ``z + delta`` in the original game, so the
drift constraint becomes ``p.z >= 0`` and the loss region ``s <= -delta*T``.

Besides float positions each chip carries an integer counter so that
threshold tests never depend on float ties:

* V1 - the original-coordinate position (sum of +-1 moves); shifted
  position is ``counter - delta * elapsed``.
* V2/V4 - number of ``+unit`` minus ``-unit`` moves, valid while every move
  so far was in ``{0, +unit, -unit}``.
* V3 - the position itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .config import GameConfig, Side, Variant
from .potentials import potential_spec, potential_value

SIMPLEX_TOL = 1e-12
SLACK_TOL = 1e-12


class GameError(RuntimeError):
    pass


class InadmissibleMove(GameError):
    pass


class AdversaryAbort(GameError):
    """The adversary could not produce a feasible move; carries the partial trace."""

    def __init__(self, message: str, trace: "GameTrace | None" = None):
        super().__init__(message)
        self.trace = trace


def rng_stream(seed: int, run_index: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``(seed, run_index)``."""
    ss = np.random.SeedSequence(int(seed) % 2**64, spawn_key=(int(run_index),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class GameState:
    t: int
    positions: np.ndarray
    counters: np.ndarray
    lattice: bool = True

    @classmethod
    def initial(cls, config: GameConfig) -> "GameState":
        return cls(
            t=-config.T,
            positions=np.zeros(config.N),
            counters=np.zeros(config.N, dtype=np.int64),
        )

    def copy(self) -> "GameState":
        return GameState(self.t, self.positions.copy(), self.counters.copy(), self.lattice)


def reconstruct(config: GameConfig, state: GameState) -> np.ndarray:
    """Positions implied by the lattice counters."""
    if config.variant is Variant.V1:
        return state.counters - config.delta * (state.t + config.T)
    return state.counters * config.unit


def floor_index(level: float, unit: float) -> int:
    """Largest integer ``k`` with ``k * unit <= level`` (``unit > 0``)."""
    k = math.floor(level / unit)
    while k * unit > level:
        k -= 1
    while (k + 1) * unit <= level:
        k += 1
    return k


def at_or_below(config: GameConfig, state: GameState, level: float) -> np.ndarray:
    """Mask of chips with shifted position ``<= level``, decided on counters when exact."""
    v = config.variant
    if v is Variant.V1:
        # shifted = counter - delta*elapsed
        return state.counters <= floor_index(level + config.delta * (state.t + config.T), 1.0)
    if state.lattice and config.unit > 0:
        return state.counters <= floor_index(level, config.unit)
    return state.positions <= level


def loss_mask(config: GameConfig, state: GameState) -> np.ndarray:
    return at_or_below(config, state, -config.threshold)


def in_move_set(config: GameConfig, z: np.ndarray) -> np.ndarray:
    if config.variant.interval_moves:
        return (z >= config.down) & (z <= config.up)
    return (z == config.up) | (z == config.down)


def admissible(config: GameConfig, p, z) -> bool:
    p = np.asarray(p, dtype=float)
    z = np.asarray(z, dtype=float)
    if p.shape != (config.N,) or z.shape != (config.N,):
        raise ValueError(f"expected vectors of length {config.N}, got {p.shape} and {z.shape}")
    if (p < 0).any() or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        return False
    return bool(in_move_set(config, z).all()) and float(p @ z) >= -SLACK_TOL


def step(config: GameConfig, state: GameState, p, z, check: bool = True) -> GameState:
    if state.t >= 0:
        raise GameError("game already finished")
    z = np.asarray(z, dtype=float)
    if check and not admissible(config, p, z):
        raise InadmissibleMove(f"inadmissible move at t={state.t}")
    new = state.copy()
    new.positions = state.positions + z
    if config.variant.interval_moves:
        unit = config.unit
        up, down, still = z == unit, z == -unit, z == 0.0
        if new.lattice and (up | down | still).all():
            new.counters = state.counters + up.astype(np.int64) - down.astype(np.int64)
        else:
            new.lattice = False
    else:
        new.counters = state.counters + np.where(z == config.up, 1, -1)
    new.t = state.t + 1
    return new


def final_loss(config: GameConfig, state: GameState) -> float:
    if state.t != 0:
        raise GameError(f"final_loss called at t={state.t}, before the last round")
    return float(loss_mask(config, state).mean())


@dataclass
class AdversaryMove:
    z: np.ndarray
    retries: int = 0
    first_order: float = math.nan  # |sum z_i f'| / (unit * max |f'|), combinatorial only
    increment_ok: bool | None = None  # randomized V1 only


class Player(Protocol):
    def __call__(self, config: GameConfig, state: GameState) -> np.ndarray: ...


class Adversary(Protocol):
    def __call__(
        self, config: GameConfig, state: GameState, p: np.ndarray, rng: np.random.Generator
    ) -> AdversaryMove: ...


@dataclass
class GameTrace:
    config: GameConfig
    slack: np.ndarray
    retries: np.ndarray
    lam_upper: np.ndarray  # length T+1, includes t = 0
    lam_lower: np.ndarray
    first_order: np.ndarray
    increment_ok: np.ndarray  # -1 unknown, 0 false, 1 true
    final_positions: np.ndarray
    final_counters: np.ndarray
    lattice: bool
    losses: np.ndarray | None = None
    weights: np.ndarray | None = None
    moves: np.ndarray | None = None
    steps_done: int = 0

    @property
    def loss(self) -> float:
        return float(self.losses.mean())

    @property
    def min_slack(self) -> float:
        return float(self.slack[: self.steps_done].min()) if self.steps_done else math.inf

    @property
    def retries_total(self) -> int:
        return int(self.retries.sum())

    def increment_fraction(self) -> float:
        known = self.increment_ok[self.increment_ok >= 0]
        return float(known.mean()) if known.size else math.nan

    def to_bytes(self) -> bytes:
        parts = [self.slack, self.retries, self.lam_upper, self.lam_lower, self.final_positions,
                 self.final_counters]
        if self.weights is not None:
            parts += [self.weights, self.moves]
        return b"".join(np.ascontiguousarray(a).tobytes() for a in parts)


def play(
    config: GameConfig,
    player: Player,
    adversary: Adversary,
    rng: np.random.Generator | None = None,
    record: bool = False,
    potentials: bool = True,
) -> GameTrace:
    """Run ``T`` rounds; the adversary's move is validated every round."""
    if rng is None:
        rng = rng_stream(config.seed)
    T, N = config.T, config.N
    up_spec = potential_spec(config, Side.UPPER) if potentials else None
    lo_spec = potential_spec(config, Side.LOWER) if potentials else None
    trace = GameTrace(
        config=config,
        slack=np.full(T, math.nan),
        retries=np.zeros(T, dtype=np.int64),
        lam_upper=np.full(T + 1, math.nan),
        lam_lower=np.full(T + 1, math.nan),
        first_order=np.full(T, math.nan),
        increment_ok=np.full(T, -1, dtype=np.int8),
        final_positions=np.zeros(N),
        final_counters=np.zeros(N, dtype=np.int64),
        lattice=True,
        weights=np.zeros((T, N)) if record else None,
        moves=np.zeros((T, N)) if record else None,
    )
    state = GameState.initial(config)
    for k in range(T):
        if potentials:
            trace.lam_upper[k] = potential_value(up_spec, state.positions, state.t)
            trace.lam_lower[k] = potential_value(lo_spec, state.positions, state.t)
        p = np.asarray(player(config, state), dtype=float)
        try:
            move = adversary(config, state, p, rng)
        except AdversaryAbort as exc:
            _finish(trace, state, k)
            exc.trace = trace
            raise
        z = np.asarray(move.z, dtype=float)
        if not admissible(config, p, z):
            _finish(trace, state, k)
            raise AdversaryAbort(f"adversary emitted an inadmissible move at t={state.t}", trace)
        trace.slack[k] = float(p @ z)
        trace.retries[k] = move.retries
        trace.first_order[k] = move.first_order
        if move.increment_ok is not None:
            trace.increment_ok[k] = int(move.increment_ok)
        if record:
            trace.weights[k] = p
            trace.moves[k] = z
        state = step(config, state, p, z, check=False)
    if potentials:
        trace.lam_upper[T] = potential_value(up_spec, state.positions, 0)
        trace.lam_lower[T] = potential_value(lo_spec, state.positions, 0)
    _finish(trace, state, T)
    trace.losses = loss_mask(config, state).astype(np.int8)
    return trace


def _finish(trace: GameTrace, state: GameState, steps: int) -> None:
    trace.final_positions = state.positions.copy()
    trace.final_counters = state.counters.copy()
    trace.lattice = state.lattice
    trace.steps_done = steps
