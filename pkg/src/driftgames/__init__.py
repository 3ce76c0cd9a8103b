"""Drifting games with heat-equation potentials."""

from .config import ConfigError, GameConfig, Side, Variant

__all__ = ["ConfigError", "GameConfig", "Side", "Variant"]
__version__ = "0.1.0"
