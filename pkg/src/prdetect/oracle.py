"""Brute-force references for short frames.

These enumerate every symbol or state sequence and never touch the
recursion kernels; only the Gaussian log-metric is restated here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .constellation import PamConstellation


@dataclass(frozen=True)
class OracleLimit:
    max_sequences: int = 4096

    def check(self, count: int):
        if count > self.max_sequences:
            raise ValueError(f"{count} sequences exceed the oracle limit {self.max_sequences}")


def _combine(values, mode):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return -np.inf
    m = values.max()
    if mode == "max-log" or m == -np.inf:
        return m
    return m + np.log(np.exp(values - m).sum())


def exact_full_map(y, h, sigma2, c: PamConstellation, mode="log-sum", boundary="uniform",
                   limit: OracleLimit = OracleLimit()) -> np.ndarray:
    """Symbol LLRs (``+1Δ`` reference) by enumerating all symbol sequences.

    ``boundary="uniform"`` also enumerates the symbol preceding the frame;
    ``"zero"`` fixes it to 0.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    starts = list(c.levels) if boundary == "uniform" else [0.0]
    limit.check(len(starts) * c.order ** n)
    cells = [[[] for _ in range(c.order)] for _ in range(n)]
    for x0 in starts:
        for seq in itertools.product(range(c.order), repeat=n):
            x = c.levels[list(seq)]
            prev = np.concatenate(([x0], x[:-1]))
            score = -np.sum((y - x - h * prev) ** 2) / (2.0 * sigma2)
            for i, k in enumerate(seq):
                cells[i][k].append(score)
    lam = np.empty((n, c.order))
    for i in range(n):
        tot = [_combine(cells[i][k], mode) for k in range(c.order)]
        lam[i] = np.array(tot) - tot[c.ref_index]
    return lam


def exact_dfe3_map(y_eq, x_hat, h, sigma2, c: PamConstellation, mode="log-sum",
                   limit: OracleLimit = OracleLimit()) -> np.ndarray:
    """State LLRs (centre reference) by enumerating state sequences.

    The state before the first sample and after the last are both the
    centre; a sequence is dropped when it claims a neighbour beyond the
    outermost level.
    """
    y_eq = np.asarray(y_eq, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    n = y_eq.size
    limit.check(3 ** n)
    off = {0: -c.d, 1: 0.0, 2: c.d}
    cells = [[[] for _ in range(3)] for _ in range(n)]
    # seq[i] is the state of sample i; seq[0] is forced to the centre, and the
    # state after the last sample is the centre as well
    for tail in itertools.product(range(3), repeat=n - 1):
        seq = (1,) + tail + (1,)
        score = 0.0
        feasible = True
        for i in range(n):
            nxt = seq[i + 1]
            x = x_hat[i] + off[nxt]
            if x < c.levels[0] - 1e-9 * c.delta or x > c.levels[-1] + 1e-9 * c.delta:
                feasible = False
                break
            score -= (y_eq[i] - x - h * off[seq[i]]) ** 2 / (2.0 * sigma2)
        if not feasible:
            continue
        for i in range(n):
            cells[i][seq[i]].append(score)
    gam = np.empty((n, 3))
    for i in range(n):
        tot = [_combine(cells[i][s], mode) for s in range(3)]
        gam[i] = np.array(tot) - tot[1]
    return gam


def exact_viterbi(y, h, c: PamConstellation, boundary="uniform",
                  limit: OracleLimit = OracleLimit()) -> np.ndarray:
    """Minimum squared-error symbol sequence by enumeration (first minimum wins)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    starts = list(c.levels) if boundary == "uniform" else [0.0]
    limit.check(len(starts) * c.order ** n)
    best, arg = np.inf, None
    for seq in itertools.product(range(c.order), repeat=n):
        x = c.levels[list(seq)]
        for x0 in starts:
            prev = np.concatenate(([x0], x[:-1]))
            v = np.sum((y - x - h * prev) ** 2)
            if v < best:
                best, arg = v, x
    return arg
