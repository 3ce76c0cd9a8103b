"""Closed-form heat-equation potentials and the Gaussian tail integral.

``g(s, t) = Phi(s / sqrt(-2 t))`` solves ``d_t g + g''/2 = 0`` backwards in time
with final data ``1{s <= 0}``.  ``g_tilde`` equals ``2 g`` to the right of the
origin and ``1`` to the left; it solves ``d_t f + max(f'', 0)/2 = 0`` away
from the kink at ``s = 0``.

Every function accepts scalars or numpy arrays and only ever looks at
strictly negative times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import erfc

SQRT_PI = math.sqrt(math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)


def tail_integral(a):
    """Return ``Phi(a) = (1/sqrt(pi)) * int_a^inf exp(-x^2) dx``.

    ``Phi(+inf) = 0`` and ``Phi(-inf) = 1``.  NaN input raises ``ValueError``.
    """
    arr = np.asarray(a, dtype=float)
    if np.isnan(arr).any():
        raise ValueError("tail_integral: NaN argument")
    # erfc(-|a|) = 2 - erfc(|a|) loses nothing in absolute terms
    out = 0.5 * erfc(arr)
    return float(out) if out.ndim == 0 else out


def _check_time(t):
    t_arr = np.asarray(t, dtype=float)
    if np.isnan(t_arr).any() or (t_arr >= 0).any():
        raise ValueError(f"time must be strictly negative, got {t!r}")
    return t_arr


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def g_eval(s, t):
    t_arr = _check_time(t)
    s_arr = np.asarray(s, dtype=float)
    return tail_integral(s_arr / np.sqrt(-2.0 * t_arr))


@dataclass(frozen=True)
class Derivatives:
    """Spatial derivatives ``d1..d4`` and time derivatives ``dt``, ``dtt``."""

    d1: np.ndarray | float
    d2: np.ndarray | float
    d3: np.ndarray | float
    d4: np.ndarray | float
    dt: np.ndarray | float
    dtt: np.ndarray | float

    def scaled(self, factor: float) -> "Derivatives":
        return Derivatives(*(factor * np.asarray(v) for v in self._values()))._squeeze()

    def _values(self):
        return (self.d1, self.d2, self.d3, self.d4, self.dt, self.dtt)

    def _squeeze(self) -> "Derivatives":
        return Derivatives(*(_scalar(np.asarray(v)) for v in self._values()))


def g_prime(s, t):
    """``g'(s, t) = -exp(s^2 / 2t) / sqrt(-2 pi t)``; always ``<= 0``."""
    t_arr = _check_time(t)
    s_arr = np.asarray(s, dtype=float)
    return _scalar(-np.exp(s_arr**2 / (2.0 * t_arr)) / np.sqrt(-2.0 * math.pi * t_arr))


def log_neg_g_prime(s, t):
    """``log(-g'(s, t))``, finite even where ``g'`` underflows."""
    t_arr = _check_time(t)
    s_arr = np.asarray(s, dtype=float)
    return _scalar(s_arr**2 / (2.0 * t_arr) - 0.5 * np.log(-2.0 * math.pi * t_arr))


def g_derivatives(s, t) -> Derivatives:
    t_arr = _check_time(t)
    s_arr = np.asarray(s, dtype=float)
    kernel = np.exp(s_arr**2 / (2.0 * t_arr)) / np.sqrt(-2.0 * math.pi * t_arr)
    u = s_arr**2 / t_arr
    d1 = -kernel
    d2 = -s_arr * kernel / t_arr
    d3 = -kernel * (1.0 + u) / t_arr
    d4 = -s_arr * kernel * (3.0 + u) / t_arr**2
    return Derivatives(d1, d2, d3, d4, -0.5 * d2, 0.25 * d4)._squeeze()


def g_tilde_eval(s, t):
    t_arr = _check_time(t)
    s_arr = np.asarray(s, dtype=float)
    out = np.where(s_arr > 0, 2.0 * np.asarray(g_eval(np.maximum(s_arr, 0.0), t_arr)), 1.0)
    return _scalar(out)


def g_tilde_prime(s, t):
    """One-sided ``g_tilde'``; zero on ``s < 0``.  Raises at the kink."""
    s_arr = np.asarray(s, dtype=float)
    if (s_arr == 0).any():
        raise ValueError("g_tilde derivative is undefined at s = 0")
    return _scalar(np.where(s_arr > 0, 2.0 * np.asarray(g_prime(s_arr, t)), 0.0))


def g_tilde_derivatives(s, t) -> Derivatives:
    s_arr = np.asarray(s, dtype=float)
    if (s_arr == 0).any():
        raise ValueError("g_tilde derivatives are undefined at s = 0")
    base = g_derivatives(s_arr, t)
    right = s_arr > 0
    return Derivatives(
        *(np.where(right, 2.0 * np.asarray(v), 0.0) for v in base._values())
    )._squeeze()


class Kind(Enum):
    HEAT_TAIL = "g"
    TRUNCATED_TAIL = "g_tilde"


@dataclass(frozen=True)
class PotentialSpec:
    """``f(s, t) = base(s + spatial_shift, t - time_shift) + vertical_offset``."""

    kind: Kind
    spatial_shift: float = 0.0
    time_shift: float = 0.0
    vertical_offset: float = 0.0

    def __post_init__(self):
        if self.time_shift < 0:
            raise ValueError("time_shift must be nonnegative")

    def _args(self, s, t):
        return np.asarray(s, dtype=float) + self.spatial_shift, np.asarray(t, dtype=float) - self.time_shift


def potential_eval(spec: PotentialSpec, s, t):
    x, u = spec._args(s, t)
    base = g_eval if spec.kind is Kind.HEAT_TAIL else g_tilde_eval
    return _scalar(np.asarray(base(x, u)) + spec.vertical_offset)


def potential_grad(spec: PotentialSpec, s, t):
    """Spatial derivative; the flat branch of ``g_tilde`` (and its kink) gives 0."""
    x, u = spec._args(s, t)
    if spec.kind is Kind.HEAT_TAIL:
        return g_prime(x, u)
    return _scalar(np.where(x > 0, 2.0 * np.asarray(g_prime(x, u)), 0.0))
