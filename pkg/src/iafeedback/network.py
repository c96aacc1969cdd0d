"""Cellular network configuration and i.i.d. Rayleigh channel generation."""

from dataclasses import dataclass

import numpy as np

from .rng import generator


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkConfig:
    """Downlink topology: G cells, K users per cell, N/M antennas, d streams."""

    G: int
    K: int
    N: int
    M: int
    d: int

    @property
    def num_ms(self):
        return self.G * self.K


def validate_config(cfg):
    """Raise ConfigError naming the violated inequality, if any."""
    for name in ("G", "K", "N", "M", "d"):
        value = getattr(cfg, name)
        if int(value) != value or value < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value}")
    bound = (cfg.G - 1) * cfg.K * cfg.d + cfg.d
    if cfg.M > bound:
        raise ConfigError(
            f"M <= (G-1)*K*d + d violated: M={cfg.M} > {bound} "
            "(receive antennas over-sufficient for pure zero forcing)"
        )
    if cfg.N < cfg.K * cfg.d:
        raise ConfigError(f"N >= K*d violated: N={cfg.N} < {cfg.K * cfg.d}")
    if cfg.d > min(cfg.M, cfg.N):
        raise ConfigError(f"d <= min(M, N) violated: d={cfg.d} > {min(cfg.M, cfg.N)}")


def draw_channels(cfg, rng_state):
    """One block-fading realization: array of shape (G, K, G, M, N).

    channels[j, k, i] is the M x N matrix from cell i's base station to user
    (j, k); entries are CN(0, 1), deterministic given rng_state.
    """
    validate_config(cfg)
    rng = generator(rng_state)
    shape = (cfg.G, cfg.K, cfg.G, cfg.M, cfg.N)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
