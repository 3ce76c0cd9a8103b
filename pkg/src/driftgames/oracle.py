"""Backward induction for tiny binary-move games.

Computes a certified interval around the minimax loss

    V(s, t) = min_p max_{z in {+-1}^N, p.z >= delta} V(s + z, t + 1),
    V(s, 0) = mean_i 1{s_i <= -threshold},

in original (unshifted) coordinates, from ``s = 0`` at ``t = -T`` unless a start is given.

The minimum over the simplex is bracketed on a regular grid of resolution
``m`` (all points ``k/m``, so vertices and edges are included):

* upper: the best grid point for the player.  Any fixed ``p`` is a legal
  player choice, so this can only overestimate.
* lower: the simplex is triangulated into grid cells; inside a cell the
  adversary is only credited with moves feasible at every vertex of the cell
  (``p.z`` is linear, so such moves are feasible on the whole cell).  The
  smallest such cell value underestimates the minimum.

Both envelopes propagate through the recursion, so the final interval
contains the true value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import ConfigError, Variant

MAX_T = 8
MAX_N = 3
MAX_STATES = 10**6


@dataclass(frozen=True)
class OracleConfig:
    variant: Variant
    T: int
    N: int
    resolution: int = 16
    delta: float = 0.0  # V1 drift
    R: float = 0.0  # V3 loss threshold

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.variant not in (Variant.V1, Variant.V3):
            raise ConfigError("the oracle handles the finite-move variants V1 and V3 only")
        if not 1 <= self.T <= MAX_T:
            raise ConfigError(f"oracle needs 1 <= T <= {MAX_T}")
        if not 1 <= self.N <= MAX_N:
            raise ConfigError(f"oracle needs 1 <= N <= {MAX_N}")
        if self.resolution < 1:
            raise ConfigError("resolution must be >= 1")
        if self.variant is Variant.V1 and not 0 <= self.delta <= 1:
            raise ConfigError("V1 needs 0 <= delta <= 1")
        if self.variant is Variant.V3 and self.delta != 0:
            raise ConfigError("V3 has no drift")
        if self.R < 0:
            raise ConfigError("R must be >= 0")
        n_states = (self.T + 1) * math.comb(2 * self.T + self.N, self.N)
        if n_states > MAX_STATES:
            raise ConfigError("state space exceeds the oracle budget")

    @property
    def position_bound(self) -> int:
        return self.T

    @property
    def drift(self) -> float:
        return self.delta if self.variant is Variant.V1 else 0.0

    @property
    def threshold(self) -> float:
        return 0.0 if self.variant is Variant.V1 else self.R


@dataclass(frozen=True)
class OracleResult:
    lower: float
    upper: float
    resolution: int
    states: int

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 1e-12) -> bool:
        return self.lower - tol <= value <= self.upper + tol


def simplex_grid(n: int, m: int) -> np.ndarray:
    """Integer compositions of ``m`` into ``n`` parts (rows sum to ``m``)."""
    if n == 1:
        return np.array([[m]], dtype=np.int64)
    rows = [c + (m - sum(c),) for c in itertools.product(range(m + 1), repeat=n - 1) if sum(c) <= m]
    return np.array(rows, dtype=np.int64)


def simplex_cells(n: int, m: int, grid: np.ndarray) -> np.ndarray:
    """Vertex indices (into ``grid``) of a triangulation of the simplex."""
    index = {tuple(row): i for i, row in enumerate(grid.tolist())}
    if n == 1:
        return np.array([[0]])
    if n == 2:
        return np.array([[index[(k, m - k)], index[(k + 1, m - k - 1)]] for k in range(m)])
    cells = []
    for i in range(m):
        for j in range(m - i):
            a, b, c = (i, j), (i + 1, j), (i, j + 1)
            cells.append([index[(x, y, m - x - y)] for x, y in (a, b, c)])
            if i + j + 2 <= m:
                d = (i + 1, j + 1)
                cells.append([index[(x, y, m - x - y)] for x, y in (b, c, d)])
    return np.array(cells)


def dpp_minimax(cfg: OracleConfig, start=None, canonical: bool = True) -> OracleResult:
    """Certified interval for the value at ``t = -T`` from integer positions ``start``.

    ``canonical`` stores states as sorted tuples (the value is symmetric in chip
    labels); switching it off keeps labelled states, which is slower but lets the
    symmetry itself be tested.
    """
    n, m = cfg.N, cfg.resolution
    start = tuple(int(x) for x in (start if start is not None else [0] * n))
    if len(start) != n:
        raise ConfigError(f"start needs {n} positions")
    key = (lambda xs: tuple(sorted(xs))) if canonical else tuple
    moves = np.array(list(itertools.product((1, -1), repeat=n)), dtype=np.int64)  # (2^n, n)
    grid = simplex_grid(n, m)
    cells = simplex_cells(n, m, grid)
    # p.z >= delta  <=>  k.z >= delta*m  with integer k = m p
    feasible = (grid @ moves.T) >= cfg.drift * m - 1e-9 * m  # (points, 2^n)
    cell_feasible = feasible[cells].all(axis=1)  # (cells, 2^n)
    threshold = cfg.threshold

    @lru_cache(maxsize=None)
    def value(t: int, s: tuple[int, ...]) -> tuple[float, float]:
        if t == 0:
            loss = sum(1 for x in s if x <= -threshold) / n
            return loss, loss
        arr = np.array(s, dtype=np.int64)
        lo_z = np.empty(len(moves))
        hi_z = np.empty(len(moves))
        for k, z in enumerate(moves):
            lo_z[k], hi_z[k] = value(t + 1, key((arr + z).tolist()))
        # every grid point and cell admits the all-up move, so the masked max is finite
        upper = np.where(feasible, hi_z, -np.inf).max(axis=1).min()
        lower = np.where(cell_feasible, lo_z, -np.inf).max(axis=1).min()
        return float(lower), float(upper)

    lo, hi = value(-cfg.T, key(list(start)))
    return OracleResult(lo, hi, m, value.cache_info().currsize)
