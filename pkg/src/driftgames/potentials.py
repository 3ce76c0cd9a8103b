"""Upper and lower potentials built from shifted copies of ``g`` / ``g_tilde``."""

from __future__ import annotations

import numpy as np

from .bounds import shift_params
from .config import GameConfig, Side, Variant
from .special import Kind, PotentialSpec, g_eval, g_tilde_eval, potential_eval


def potential_spec(config: GameConfig, side: Side) -> PotentialSpec:
    """Per-chip potential whose mean over chips is the bound potential.

    Upper specs dominate the loss indicator at ``t = 0``; lower specs are
    dominated by it.
    """
    v = config.variant
    c = config.threshold
    scale = config.delta if v.has_drift else config.R
    beta, tau = shift_params(v, config.T, config.theta, scale, side)
    if v in (Variant.V1, Variant.V3):
        if side is Side.UPPER:
            return PotentialSpec(Kind.HEAT_TAIL, c - beta, tau, 1.0 - g_eval(-beta, -tau))
        return PotentialSpec(Kind.HEAT_TAIL, c + beta, tau, -g_eval(beta, -tau))
    if side is Side.UPPER:
        return PotentialSpec(Kind.TRUNCATED_TAIL, c, tau, 0.0)
    return PotentialSpec(Kind.TRUNCATED_TAIL, c + beta, tau, -g_tilde_eval(beta, -tau))


def potential_value(spec: PotentialSpec, positions: np.ndarray, t: float) -> float:
    return float(np.mean(potential_eval(spec, positions, t)))
