"""Bit-LLR producers. All outputs use ``L = log P(b=1) / P(b=0)``, shape (N, m)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .constellation import PamConstellation
from .detector_dfe3 import omega
from .metrics import CsCounter

HD_FLOOR = 1e-5


def _bitwise(metric: np.ndarray, bits: np.ndarray, mode: str) -> np.ndarray:
    """Combine per-hypothesis log metrics into bit LLRs.

    ``metric`` is (N, K) over K hypotheses whose labels are rows of ``bits`` (K, m).
    """
    n = metric.shape[0]
    m = bits.shape[1]
    out = np.empty((n, m))
    for j in range(m):
        one = bits[:, j] == 1
        if mode == "max-log":
            out[:, j] = metric[:, one].max(axis=1) - metric[:, ~one].max(axis=1)
        elif mode == "log-sum":
            out[:, j] = logsumexp(metric[:, one], axis=1) - logsumexp(metric[:, ~one], axis=1)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return out


def awgn_demap(y_eq, sigma2, c: PamConstellation, mode: str = "max-log",
               counter: CsCounter | None = None) -> np.ndarray:
    """Memoryless Gaussian demapper treating ``y_eq ~ N(x, sigma2)``."""
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    y_eq = np.atleast_1d(np.asarray(y_eq, dtype=float))
    metric = -((y_eq[:, None] - c.levels[None, :]) ** 2) / (2.0 * sigma2)
    if counter is not None:
        counter.add("demapper", y_eq.size * c.m * c.order)
    return _bitwise(metric, c.bit_table, mode)


def symbol_to_bit(lam, c: PamConstellation, mode: str = "max-log",
                  counter: CsCounter | None = None) -> np.ndarray:
    """Bit LLRs from symbol LLRs assuming equally likely bits."""
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    if counter is not None:
        counter.add("demapper", lam.shape[0] * c.m * c.order)
    return _bitwise(lam, c.bit_table, mode)


def state_demap(y_eq, gamma, sigma2, h, c: PamConstellation, mode: str = "max-log",
                counter: CsCounter | None = None) -> np.ndarray:
    """Bit LLRs that weigh the three bias hypotheses by their state LLRs.

    For each bit value the hypotheses ``(s, x)`` with ``x`` in the labeled
    subset are scored ``Gamma[s] - (y_eq - x - h*omega(s))^2 / (2 sigma2)``.
    ``max-log`` keeps the best score per bit value; ``log-sum`` combines all
    scores exactly.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    y_eq = np.atleast_1d(np.asarray(y_eq, dtype=float))
    gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
    w = omega(c)
    r = y_eq[:, None, None] - c.levels[None, None, :] - h * w[None, :, None]
    metric = gamma[:, :, None] - r * r / (2.0 * sigma2)  # (N, 3, M)
    if counter is not None:
        counter.add("demapper", y_eq.size * c.m * (3 * c.order + 6))
    bits = np.tile(c.bit_table, (3, 1))
    return _bitwise(metric.reshape(y_eq.size, -1), bits, mode)


def hd_llr_table(decided, true, c: PamConstellation, floor: float = HD_FLOOR) -> np.ndarray:
    """Constant bit LLRs per decided level from empirical crossovers.

    Parameters
    ----------
    decided, true : array of int
        Level indices of decisions and of the corresponding transmitted symbols.

    Returns
    -------
    np.ndarray
        (M, m) table; row ``k`` holds the LLRs emitted when level ``k`` is decided.
        Bit posteriors are clipped to ``[floor, 1 - floor]``; a level that was
        never decided falls back to its own label.
    """
    decided = np.asarray(decided, dtype=np.int64).ravel()
    true = np.asarray(true, dtype=np.int64).ravel()
    if decided.size == 0:
        raise ValueError("empty training set")
    if decided.shape != true.shape:
        raise ValueError("decided/true length mismatch")
    M = c.order
    counts = np.bincount(decided * M + true, minlength=M * M).reshape(M, M).astype(float)
    rows = counts.sum(axis=1)
    post = np.where(rows[:, None] > 0, counts / np.maximum(rows, 1)[:, None], np.eye(M))
    p1 = post @ c.bit_table.astype(float)
    p1 = np.clip(p1, floor, 1.0 - floor)
    return np.log(p1) - np.log1p(-p1)


def hd_demap(decided, table: np.ndarray) -> np.ndarray:
    return table[np.asarray(decided, dtype=np.int64)]


def save_hd_table(path, table: np.ndarray) -> None:
    """Write ``level_index: llr_1 ... llr_m`` lines."""
    M, m = table.shape
    lines = [f"# hd-llr-table M={M} m={m}"]
    lines += [f"{k}: " + " ".join(repr(float(v)) for v in table[k]) for k in range(M)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_hd_table(path) -> np.ndarray:
    rows = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, vals = line.partition(":")
        rows[int(key)] = [float(v) for v in vals.split()]
    return np.array([rows[k] for k in sorted(rows)])
