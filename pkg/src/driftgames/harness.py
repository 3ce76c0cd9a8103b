"""Single runs, T-sweeps, CSV output and convergence verdicts.

Every run is keyed by ``(seed, run_index)``; the run index is the position of
the run in the sweep's deterministic enumeration (gamma, then T, then
repetition), so results do not depend on how runs are scheduled on workers.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import n_requirement, theorem_bounds
from .config import ConfigError, GameConfig, Side, Variant
from .engine import AdversaryAbort, GameState, GameTrace, play, reconstruct, rng_stream
from .strategies import ADVERSARIES, PLAYERS, make_adversary, make_player

SIMULATE_COLUMNS = (
    "variant", "T", "N", "gamma", "theta", "seed",
    "loss", "minSlack", "upperMain", "lowerMain", "retriesTotal",
)
SWEEP_COLUMNS = (
    "variant", "T", "N", "gamma", "theta", "seed", "reps",
    "meanLoss", "upperMain", "lowerMain", "leadingLimit", "gap",
    "minSlack", "retriesTotal", "failures", "slope",
)
N_CAP = 100_000
N_RULES = ("explicit", "theorem", "power")


def fmt(value) -> str:
    """17 significant digits for floats (round-trip exact); plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".17g")
    if isinstance(value, Variant):
        return value.value
    return str(value)


def to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


@dataclass(frozen=True)
class RunResult:
    run_index: int
    loss: float
    min_slack: float
    retries: int
    aborted: bool
    reconstruct_error: float
    increment_fraction: float
    first_order_excess: float  # max over steps of first-order sum minus its bound (<= 0 is fine)


def run_game(
    config: GameConfig,
    player: str,
    adversary: str,
    run_index: int = 0,
    potentials: bool = False,
) -> tuple[RunResult, GameTrace]:
    """Play one game on the ``(config.seed, run_index)`` stream; aborts are recorded."""
    p = make_player(player, config)
    a = make_adversary(adversary, config)
    rng = rng_stream(config.seed, run_index)
    try:
        trace = play(config, p, a, rng, potentials=potentials)
        aborted = False
    except AdversaryAbort as exc:
        trace = exc.trace
        aborted = True
    return _summarize(config, trace, run_index, aborted), trace


def _summarize(config: GameConfig, trace: GameTrace, run_index: int, aborted: bool) -> RunResult:
    state = GameState(trace.steps_done - config.T, trace.final_positions, trace.final_counters, trace.lattice)
    if trace.lattice:
        err = float(np.max(np.abs(reconstruct(config, state) - trace.final_positions), initial=0.0))
    else:
        err = math.nan
    fo = trace.first_order[: trace.steps_done]
    fo = fo[~np.isnan(fo)]
    return RunResult(
        run_index=run_index,
        loss=math.nan if aborted else trace.loss,
        min_slack=trace.min_slack,
        retries=trace.retries_total,
        aborted=aborted,
        reconstruct_error=err,
        increment_fraction=trace.increment_fraction(),
        first_order_excess=float((fo - 1.0).max()) if fo.size else math.nan,
    )


def simulate(config: GameConfig, player: str = "potential", adversary: str = "combinatorial",
             run_index: int = 0) -> tuple[dict, GameTrace]:
    """One game plus its CSV row.  Raises ``AdversaryAbort`` if the adversary gave up."""
    result, trace = run_game(config, player, adversary, run_index, potentials=True)
    if result.aborted:
        raise AdversaryAbort(f"adversary aborted after {trace.steps_done} of {config.T} rounds", trace)
    upper = theorem_bounds(config.variant, Side.UPPER, config.gamma, config.T, config.theta)
    lower = theorem_bounds(config.variant, Side.LOWER, config.gamma, config.T, config.theta)
    row = {
        "variant": config.variant, "T": config.T, "N": config.N, "gamma": float(config.gamma),
        "theta": float(config.theta), "seed": config.seed, "loss": result.loss,
        "minSlack": result.min_slack, "upperMain": upper.main_term, "lowerMain": lower.main_term,
        "retriesTotal": result.retries,
    }
    return row, trace


@dataclass(frozen=True)
class SweepSpec:
    variant: Variant
    gammas: tuple[float, ...]
    Ts: tuple[int, ...]
    theta: float = 0.6
    reps: int = 1
    n_rule: str = "theorem"
    N: int | None = None
    n_cap: int = N_CAP
    seed: int = 0
    player: str = "potential"
    adversary: str = "combinatorial"
    retry_budget: int = 64

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "Ts", tuple(int(t) for t in self.Ts))
        if not self.Ts:
            raise ConfigError("the T list is empty")
        if any(b <= a for a, b in zip(self.Ts, self.Ts[1:])):
            raise ConfigError("the T list must be strictly increasing")
        if not self.gammas:
            raise ConfigError("the gamma list is empty")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.n_rule not in N_RULES:
            raise ConfigError(f"unknown N rule {self.n_rule!r}; choose from {N_RULES}")
        if self.n_rule == "explicit" and (self.N is None or self.N < 1):
            raise ConfigError("the explicit N rule needs N >= 1")
        if self.player not in PLAYERS:
            raise ConfigError(f"unknown player {self.player!r}")
        if self.adversary not in ADVERSARIES:
            raise ConfigError(f"unknown adversary {self.adversary!r}")
        for g in self.gammas:
            for T in self.Ts:
                GameConfig(self.variant, T, 1, g, self.theta)  # validates delta <= 1

    def chips(self, T: int) -> tuple[int, bool]:
        """``(N, capped)`` for horizon ``T``."""
        if self.n_rule == "explicit":
            return int(self.N), False
        if self.n_rule == "power":
            return max(1, math.ceil(T ** ((2.0 + self.theta) / 4.0))), False
        n = n_requirement(self.variant, T, self.theta)
        if n > self.n_cap:
            return self.n_cap, True
        return n, False


@dataclass
class CellResult:
    gamma: float
    T: int
    N: int
    capped: bool
    runs: list[RunResult]
    upper_main: float
    lower_main: float
    leading_limit: float

    @property
    def completed(self) -> list[RunResult]:
        return [r for r in self.runs if not r.aborted]

    @property
    def failures(self) -> int:
        return sum(r.aborted for r in self.runs)

    @property
    def mean_loss(self) -> float:
        done = self.completed
        return float(np.mean([r.loss for r in done])) if done else math.nan

    @property
    def gap(self) -> float:
        return abs(self.mean_loss - self.leading_limit)

    @property
    def min_slack(self) -> float:
        return min((r.min_slack for r in self.runs), default=math.inf)

    @property
    def retries(self) -> int:
        return sum(r.retries for r in self.runs)


@dataclass
class ConvergenceVerdict:
    gamma: float
    Ts: tuple[int, ...]
    gaps: tuple[float, ...]
    slope: float | None  # None when fewer than 3 T values
    in_band: bool
    gap_not_worse: bool
    slope_ok: bool | None
    band: float
    slope_max: float

    @property
    def passed(self) -> bool:
        return self.in_band and self.gap_not_worse and self.slope_ok is not False


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list[CellResult]
    verdicts: list[ConvergenceVerdict] = field(default_factory=list)

    def rows(self) -> list[dict]:
        slopes = {v.gamma: v.slope for v in self.verdicts}
        out = []
        for c in self.cells:
            slope = slopes.get(c.gamma)
            out.append({
                "variant": self.spec.variant, "T": c.T, "N": c.N, "gamma": c.gamma,
                "theta": float(self.spec.theta), "seed": self.spec.seed, "reps": self.spec.reps,
                "meanLoss": c.mean_loss, "upperMain": c.upper_main, "lowerMain": c.lower_main,
                "leadingLimit": c.leading_limit, "gap": c.gap, "minSlack": c.min_slack,
                "retriesTotal": c.retries, "failures": c.failures,
                "slope": math.nan if slope is None else slope,
            })
        return out

    def csv(self) -> str:
        return to_csv(self.rows(), SWEEP_COLUMNS)

    def summary(self) -> str:
        lines = [f"# sweep {self.spec.variant.value} theta={fmt(self.spec.theta)} "
                 f"player={self.spec.player} adversary={self.spec.adversary}"]
        for v in self.verdicts:
            slope = "undefined" if v.slope is None else f"{v.slope:.4f}"
            lines.append(
                f"# gamma={fmt(v.gamma)} slope={slope} in_band={v.in_band} "
                f"gap_not_worse={v.gap_not_worse} slope_ok={v.slope_ok} -> "
                f"{'PASS' if v.passed else 'FAIL'}"
            )
        return "\n".join(lines)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


def loglog_slope(Ts, gaps) -> float | None:
    """Least-squares slope of ``log gap`` on ``log T``; ``None`` below three points."""
    Ts = np.asarray(Ts, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if Ts.size < 3:
        return None
    if (gaps <= 0).any() or not np.isfinite(gaps).all():
        return math.nan
    slope, _ = np.polyfit(np.log(Ts), np.log(gaps), 1)
    return float(slope)


def _run_task(task) -> RunResult:
    variant, T, N, gamma, theta, seed, retry_budget, player, adversary, run_index = task
    config = GameConfig(variant, T, N, gamma, theta, seed, retry_budget)
    return run_game(config, player, adversary, run_index)[0]


def sweep(spec: SweepSpec, jobs: int = 1, band: float = 0.1, slope_max: float = -0.05) -> SweepResult:
    plan = []
    tasks = []
    index = 0
    for gamma in spec.gammas:
        for T in spec.Ts:
            N, capped = spec.chips(T)
            if capped:
                warnings.warn(
                    f"N requirement for {spec.variant.value} at T={T} exceeds {spec.n_cap}; capped",
                    stacklevel=2,
                )
            plan.append((gamma, T, N, capped, index))
            for rep in range(spec.reps):
                tasks.append((spec.variant.value, T, N, gamma, spec.theta, spec.seed,
                              spec.retry_budget, spec.player, spec.adversary, index + rep))
            index += spec.reps
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_run_task(t) for t in tasks]
    by_index = {r.run_index: r for r in results}

    cells = []
    for gamma, T, N, capped, start in plan:
        upper = theorem_bounds(spec.variant, Side.UPPER, gamma, T, spec.theta)
        lower = theorem_bounds(spec.variant, Side.LOWER, gamma, T, spec.theta)
        cells.append(CellResult(
            gamma, T, N, capped, [by_index[start + r] for r in range(spec.reps)],
            upper.main_term, lower.main_term, upper.leading_limit,
        ))
    out = SweepResult(spec, cells)
    for gamma in spec.gammas:
        mine = [c for c in cells if c.gamma == gamma]
        gaps = tuple(c.gap for c in mine)
        slope = loglog_slope(spec.Ts, gaps)
        in_band = all(c.lower_main - band <= c.mean_loss <= c.upper_main + band for c in mine)
        out.verdicts.append(ConvergenceVerdict(
            gamma=gamma, Ts=spec.Ts, gaps=gaps, slope=slope, in_band=in_band,
            gap_not_worse=gaps[-1] <= gaps[0],
            slope_ok=None if slope is None else bool(slope <= slope_max),
            band=band, slope_max=slope_max,
        ))
    return out
