"""Shift parameters, integral limits and main terms of the eight bounds.

For each variant the upper bound (potential player vs any adversary) and
lower bound (restricted adversary vs any player) read

    V1/V3 upper:  1 - [Phi(a) - Phi(b)]       V1/V3 lower:  Phi(a) - Phi(b)
    V2/V4 upper:  2 Phi(a)                    V2/V4 lower:  2 [Phi(a) - Phi(b)]

with ``Phi`` the Gaussian tail integral.  All of them tend to ``Phi(sqrt(gamma))``
(binary moves) or ``2 Phi(sqrt(gamma))`` (interval moves) as ``T -> inf``.
Additive error terms are ``O(T^-exponent)`` with unstated constants; only the
exponent is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .config import ConfigError, Side, Variant
from .special import tail_integral


@dataclass(frozen=True)
class BoundReport:
    variant: Variant
    side: Side
    gamma: float
    T: int
    theta: float
    a: float
    b: float  # +inf when the integral is one-sided
    main_term: float
    leading_limit: float
    error_exponent: float
    beta: float
    tau: float
    n_requirement: int | None


def drift_scale(variant: Variant, gamma: float, T: int) -> float:
    """``delta`` for V1/V2, ``R`` for V3/V4."""
    variant = Variant.parse(variant)
    if variant.has_drift:
        delta = math.sqrt(2.0 * gamma / T)
        if delta > 1:
            raise ConfigError(f"delta = {delta:.6g} > 1 for gamma={gamma}, T={T}")
        return delta
    return math.sqrt(2.0 * gamma * T)


def shift_params(variant, T: int, theta: float, scale: float, side=Side.LOWER) -> tuple[float, float]:
    """Return ``(beta, tau)``.  ``scale`` is ``delta`` (V1/V2) or ``R`` (V3/V4).

    Only the interval-move variants distinguish sides: their upper-bound
    potential uses ``beta = 0, tau = T^theta``, while the lower-bound shift is
    rounded up so that the freezing threshold sits on the adversary's lattice.
    """
    variant = Variant.parse(variant)
    side = Side(side)
    if not 0 < theta < 1:
        raise ConfigError("theta must lie in (0, 1)")
    half = T ** (theta / 2.0)
    if variant in (Variant.V1, Variant.V3):
        return half, half
    if side is Side.UPPER:
        return 0.0, float(T**theta)
    if variant is Variant.V2:
        delta = scale
        if delta >= 1:
            raise ConfigError("the V2 lattice needs delta < 1")
        unit = 1.0 - delta
        k = critical_index(variant, T, theta, delta)
        beta = k * unit - delta * T
    else:
        beta = critical_index(variant, T, theta, scale) - scale
    return beta, beta


def critical_index(variant, T: int, theta: float, scale: float) -> int:
    """Integer ``K`` with freezing threshold ``-K * unit`` for the V2/V4 adversary."""
    variant = Variant.parse(variant)
    half = T ** (theta / 2.0)
    if variant is Variant.V2:
        return math.ceil((scale * T + half) / (1.0 - scale))
    if variant is Variant.V4:
        return math.ceil(scale + half)
    raise ValueError(f"{variant} has no freezing threshold")


def _limits(variant: Variant, side: Side, gamma: float, T: int, theta: float) -> tuple[float, float]:
    root = math.sqrt(gamma)
    b = T ** (theta / 4.0) / math.sqrt(2.0)
    if variant in (Variant.V1, Variant.V3):
        if side is Side.UPPER:
            damp = 1.0 + T ** (theta / 2.0 - 1.0)
            a = -math.sqrt(gamma / damp) + T ** ((theta - 1.0) / 2.0) / math.sqrt(2.0 * damp)
        else:
            a = root + T ** ((theta - 1.0) / 2.0) / math.sqrt(2.0)
        return a, b
    if side is Side.UPPER:
        return math.sqrt(gamma / (1.0 + T ** (theta - 1.0))), math.inf
    return root + (T ** (theta / 2.0) + 1.0) / math.sqrt(2.0 * T), b


def leading_limit(variant, gamma: float) -> float:
    variant = Variant.parse(variant)
    base = tail_integral(math.sqrt(gamma))
    return 2.0 * base if variant.interval_moves else base


def theorem_bounds(variant, side, gamma: float, T: int, theta: float) -> BoundReport:
    variant = Variant.parse(variant)
    side = Side(side)
    if gamma < 0:
        raise ConfigError("gamma must be >= 0")
    scale = drift_scale(variant, gamma, T)
    a, b = _limits(variant, side, gamma, T, theta)
    band = tail_integral(a) - tail_integral(b)
    if variant.interval_moves:
        main = 2.0 * band
        exponent = theta / 2.0 if side is Side.UPPER else theta / 4.0
    else:
        main = 1.0 - band if side is Side.UPPER else band
        exponent = theta / 4.0
    try:
        beta, tau = shift_params(variant, T, theta, scale, side)
    except ConfigError:  # delta == 1 leaves no V2 lattice
        beta = tau = math.nan
    return BoundReport(
        variant=variant,
        side=side,
        gamma=gamma,
        T=T,
        theta=theta,
        a=a,
        b=b,
        main_term=main,
        leading_limit=leading_limit(variant, gamma),
        error_exponent=exponent,
        beta=beta,
        tau=tau,
        n_requirement=n_requirement(variant, T, theta) if side is Side.LOWER else None,
    )


def n_requirement(variant, T: int, theta: float) -> int:
    """Smallest chip count meeting the lower-bound hypothesis.

    V1: ``N > 8 T^(2+theta/2) log(1 / (1 - sqrt(exp(-T^(-2-theta/2)))))`` (natural log).
    V2-V4: ``N >= T^((2+theta)/4)``.
    """
    variant = Variant.parse(variant)
    if not 0 < theta < 1:
        raise ConfigError("theta must lie in (0, 1)")
    with mpmath.workdps(60):
        T_ = mpmath.mpf(T)
        th = mpmath.mpf(theta)
        if variant is Variant.V1:
            power = T_ ** (2 + th / 2)
            x = 1 / power
            # 1 - exp(-x/2) via expm1 keeps the tiny difference accurate
            gap = -mpmath.expm1(-x / 2)
            bound = 8 * power * mpmath.log(1 / gap)
            n = int(mpmath.floor(bound)) + 1
        else:
            n = int(mpmath.ceil(T_ ** ((2 + th) / 4)))
    return max(n, 1)
