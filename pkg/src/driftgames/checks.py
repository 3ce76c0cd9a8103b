"""Fast self-checks behind ``driftgames check``."""

from __future__ import annotations

import math

import numpy as np
import mpmath

from .bounds import theorem_bounds
from .config import GameConfig, Side, Variant
from .engine import SLACK_TOL
from .harness import run_game
from .oracle import OracleConfig, dpp_minimax
from .special import g_derivatives, g_eval, tail_integral
from .strategies import ADVERSARIES, balanced_partition


def _tail_quad(a: float) -> float:
    with mpmath.workdps(30):
        return float(mpmath.quad(lambda x: mpmath.exp(-x * x), [a, mpmath.inf]) / mpmath.sqrt(mpmath.pi))


def check_tail_integral():
    pts = np.linspace(-6, 6, 25)
    err = max(abs(tail_integral(a) - _tail_quad(a)) for a in pts)
    return err <= 1e-12 and tail_integral(0.0) == 0.5, f"max |err| = {err:.2e}"


def check_heat_equation():
    s = np.linspace(-4, 4, 41)
    worst = 0.0
    for t in (-0.5, -1.0, -10.0):
        h = 1e-4
        dt = (g_eval(s, t + h) - g_eval(s, t - h)) / (2 * h)
        d2 = g_derivatives(s, t).d2
        worst = max(worst, float(np.max(np.abs(dt + 0.5 * d2))))
    return worst <= 1e-4, f"max residual = {worst:.2e}"


def check_partition():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a = rng.uniform(0, rng.uniform(0.01, 10), size=rng.integers(1, 200))
        if abs(float(balanced_partition(a) @ a)) > a.max() * (1 + 1e-12):
            return False, "bound violated"
    return True, "1000 random instances"


def check_limits():
    ok = True
    for g in (0.0, 0.25, 1.0):
        lims = {v: theorem_bounds(v, Side.UPPER, g, 1000, 0.6).leading_limit for v in Variant}
        ok &= all(
            theorem_bounds(v, Side.LOWER, g, 1000, 0.6).leading_limit == lims[v] for v in Variant
        )
        ok &= lims[Variant.V2] == 2 * lims[Variant.V1] and lims[Variant.V4] == 2 * lims[Variant.V3]
    return ok, "sides coincide, interval moves double"


def check_oracle():
    single = dpp_minimax(OracleConfig(Variant.V1, T=5, N=1))
    full_drift = dpp_minimax(OracleConfig(Variant.V1, T=4, N=2, delta=1.0))
    ok = single.upper == 0.0 and full_drift.upper == 0.0
    return ok, f"N=1 -> [{single.lower}, {single.upper}], delta=1 -> [{full_drift.lower}, {full_drift.upper}]"


def check_feasibility():
    worst = math.inf
    for v in Variant:
        for adv in ADVERSARIES:
            if adv == "randomized" and v is not Variant.V1:
                continue
            res, _ = run_game(GameConfig(v, 64, 12, 0.5), "potential", adv, run_index=1)
            worst = min(worst, res.min_slack)
    return worst >= -SLACK_TOL, f"min slack = {worst:.3g}"


CHECKS = (
    ("tail integral vs quadrature", check_tail_integral),
    ("heat equation residual", check_heat_equation),
    ("partition bound", check_partition),
    ("bound limits", check_limits),
    ("oracle forced values", check_oracle),
    ("move feasibility", check_feasibility),
)


def run_checks() -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS:
        ok, detail = fn()
        out.append((name, bool(ok), detail))
    return out
