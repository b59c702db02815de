"""M-state trellis detection on the raw channel output.

The state at time ``t`` is the previous symbol ``x[t-1]``; symbol ``x[k]`` is
the state at time ``k + 1``. Symbol LLRs are referenced to the ``+1Δ`` level:
``Lambda[k, x] = log P(x_k = x | y) - log P(x_k = +Δ | y)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import PamConstellation
from .metrics import CsCounter
from .trellis import bcjr_kernel, sova_kernel, viterbi_kernel

MODES = ("log-sum", "max-log")


@dataclass(frozen=True)
class DetectorConfig:
    """Trellis detector options.

    ``boundary`` sets the prior on the symbol preceding the frame:
    ``"uniform"`` (any level) or ``"zero"`` (the channel's silent start).
    The frame end is always left open.
    """

    mode: str = "max-log"
    delta: int = 10
    boundary: str = "uniform"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.delta < 1:
            raise ValueError("traceback length must be >= 1")
        if self.boundary not in ("uniform", "zero"):
            raise ValueError("boundary must be 'uniform' or 'zero'")


def _check_sigma2(sigma2):
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")


def branch_metrics(y, h, sigma2, c: PamConstellation, boundary="uniform"):
    """``gamma[t, a, b] = -(y_t - x_b - h x_a)^2 / (2 sigma2)``."""
    _check_sigma2(sigma2)
    y = np.asarray(y, dtype=float)
    lv = c.levels
    g = -((y[:, None, None] - lv[None, None, :] - h * lv[None, :, None]) ** 2) / (2.0 * sigma2)
    if boundary == "zero" and y.size:
        g[0] = -((y[0] - lv[None, :]) ** 2) / (2.0 * sigma2)
    return np.ascontiguousarray(g)


def detect_full(y, h, sigma2, c: PamConstellation, cfg: DetectorConfig = DetectorConfig(),
                counter: CsCounter | None = None) -> np.ndarray:
    """Symbol LLRs by BCJR on the M-state trellis (Log-MAP or Max-Log-MAP).

    Returns
    -------
    np.ndarray
        ``(N, M)`` symbol LLRs with the ``+1Δ`` column identically zero.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return np.zeros((0, c.order))
    g = branch_metrics(y, h, sigma2, c, cfg.boundary)
    zeros = np.zeros(c.order)
    _, _, app, cs = bcjr_kernel(g, zeros, zeros, cfg.mode == "max-log")
    if counter is not None:
        counter.add("pam-" + ("mlm" if cfg.mode == "max-log" else "lm"), cs)
    lam = app[1:] - app[1:, c.ref_index][:, None]
    return lam


def sova_full(y, h, sigma2, c: PamConstellation, cfg: DetectorConfig = DetectorConfig(),
              counter: CsCounter | None = None) -> np.ndarray:
    """Symbol LLRs by SOVA with traceback window ``cfg.delta``.

    Output follows the same sign convention as :func:`detect_full`.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return np.zeros((0, c.order))
    g = branch_metrics(y, h, sigma2, c, cfg.boundary)
    zeros = np.zeros(c.order)
    rel, _, cs = sova_kernel(g, zeros, zeros, int(cfg.delta))
    if counter is not None:
        counter.add("pam-sova", cs)
    r = rel[1:]
    return -(r - r[:, c.ref_index][:, None])


def viterbi_full(y, h, sigma2, c: PamConstellation, boundary="uniform") -> np.ndarray:
    """Maximum-likelihood sequence estimate (levels)."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return np.zeros(0)
    g = branch_metrics(y, h, sigma2, c, boundary)
    zeros = np.zeros(c.order)
    path = viterbi_kernel(g, zeros, zeros)
    return c.levels[path[1:]]
