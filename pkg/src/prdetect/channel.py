"""One-tap partial-response channel ``y_i = x_i + h x_{i-1} + n_i``.

Noise is drawn with numpy's PCG64 bit generator and its ziggurat
``standard_normal`` sampler, scaled by ``sqrt(sigma2)``. Per-worker streams
come from ``SeedSequence([seed, worker])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PrChannelConfig:
    h: float
    sigma2: float
    seed: int = 0
    x0: float = 0.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not 0.0 <= self.h < 1.0:
            raise ValueError(f"h must lie in [0, 1), got {self.h}")


def make_rng(seed: int, worker: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, worker])))


def snr_to_sigma2(snr_db: float, h: float = 0.0) -> float:
    """Noise variance for unit signal power, SNR = (1 + h**2) / sigma2."""
    return (1.0 + h * h) / 10.0 ** (snr_db / 10.0)


def sigma2_to_snr(sigma2: float, h: float = 0.0) -> float:
    return 10.0 * np.log10((1.0 + h * h) / sigma2)


def isi(x: np.ndarray, h: float, x0: float = 0.0) -> np.ndarray:
    """Noiseless channel output."""
    x = np.asarray(x, dtype=float)
    prev = np.empty_like(x)
    if x.size:
        prev[0] = x0
        prev[1:] = x[:-1]
    return x + h * prev


def transmit(x: np.ndarray, cfg: PrChannelConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Pass symbols through the channel.

    When ``rng`` is omitted a fresh generator is seeded from ``cfg.seed``, so
    repeated calls with the same config give bit-identical noise.
    """
    x = np.asarray(x, dtype=float)
    if rng is None:
        rng = make_rng(cfg.seed)
    noise = rng.standard_normal(x.size) * np.sqrt(cfg.sigma2)
    return isi(x, cfg.h, cfg.x0) + noise
