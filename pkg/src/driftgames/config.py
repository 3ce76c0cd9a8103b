"""Game variants and run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class ConfigError(ValueError):
    """Invalid game or sweep configuration."""


class Variant(Enum):
    V1 = "v1"  # moves {+-1}, drift delta, loss 1{s <= 0}
    V2 = "v2"  # moves [-1, 1], drift delta, loss 1{s <= 0}
    V3 = "v3"  # moves {+-1}, no drift, loss 1{s <= -R}
    V4 = "v4"  # moves [-1, 1], no drift, loss 1{s <= -R}

    @classmethod
    def parse(cls, name: "str | Variant") -> "Variant":
        if isinstance(name, Variant):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ConfigError(f"unknown variant {name!r}") from None

    @property
    def has_drift(self) -> bool:
        return self in (Variant.V1, Variant.V2)

    @property
    def interval_moves(self) -> bool:
        return self in (Variant.V2, Variant.V4)


class Side(Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class GameConfig:
    """One game.  V1/V2 are played in shifted coordinates (moves ``z - delta``,
    constraint ``p.z >= 0``, loss ``1{s <= -delta*T}``)."""

    variant: Variant
    T: int
    N: int
    gamma: float
    theta: float = 0.6
    seed: int = 0
    retry_budget: int = 64
    delta: float = field(init=False)
    R: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if int(self.T) != self.T or self.T < 1:
            raise ConfigError(f"T must be a positive integer, got {self.T!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "N", int(self.N))
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ConfigError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        if not 0 < self.theta < 1:
            raise ConfigError(f"theta must lie in (0, 1), got {self.theta!r}")
        if self.retry_budget < 1:
            raise ConfigError("retry_budget must be >= 1")
        if self.variant.has_drift:
            delta = math.sqrt(2.0 * self.gamma / self.T)
            if delta > 1:
                raise ConfigError(
                    f"delta = sqrt(2*gamma/T) = {delta:.6g} exceeds 1 for gamma={self.gamma}, T={self.T}"
                )
            object.__setattr__(self, "delta", delta)
            object.__setattr__(self, "R", 0.0)
        else:
            object.__setattr__(self, "delta", 0.0)
            object.__setattr__(self, "R", math.sqrt(2.0 * self.gamma * self.T))

    @property
    def threshold(self) -> float:
        """Loss region is ``s <= -threshold`` (``delta*T`` or ``R``)."""
        return self.delta * self.T if self.variant.has_drift else self.R

    @property
    def unit(self) -> float:
        """Lattice step of the restricted adversary."""
        return 1.0 - self.delta if self.variant is Variant.V2 else 1.0

    @property
    def up(self) -> float:
        return 1.0 - self.delta

    @property
    def down(self) -> float:
        return -1.0 - self.delta
