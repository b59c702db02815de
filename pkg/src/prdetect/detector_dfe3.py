"""Three-state (l, c, r) detection on DFE output.

State ``s`` of sample ``k`` encodes the previous decision error
``x[k-1] - x_hat[k-1]`` in ``{-d, 0, +d}``, which biases ``y_eq[k]`` by
``h * omega(s)``. A transition into ``l`` (``r``) claims that the current
decision sits one level too high (low); it is blocked when ``x_hat`` is the
lowest (highest) level, because no such neighbour exists.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

from .constellation import PamConstellation
from .metrics import CsCounter
from .trellis import bcjr_kernel, sova_kernel

L, C, R = 0, 1, 2


class BiasedState(IntEnum):
    l = L  # noqa: E741
    c = C
    r = R

    def omega(self, d: float) -> float:
        return (-d, 0.0, d)[self]


def omega(c: PamConstellation) -> np.ndarray:
    """Offsets ``(-d, 0, +d)`` indexed by state."""
    return np.array([-c.d, 0.0, c.d])


EDGE_PRIOR = np.array([-np.inf, 0.0, -np.inf])


def _check(y_eq, x_hat, sigma2):
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    y_eq = np.asarray(y_eq, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if y_eq.shape != x_hat.shape:
        raise ValueError(f"length mismatch: {y_eq.shape} vs {x_hat.shape}")
    return y_eq, x_hat


def branch_metrics(y_eq, x_hat, sigma2, h, c: PamConstellation) -> np.ndarray:
    """Log branch metrics ``gamma[k, s_prev, s_next]`` for every sample.

    ``-(y_eq - x_hat - h*omega(s_prev) - omega(s_next))^2 / (2 sigma2)``; the
    constant ``1/(sqrt(2 pi) M sigma)`` is dropped. Scalars give a 3x3 matrix.
    """
    scalar = np.ndim(y_eq) == 0
    y_eq, x_hat = _check(np.atleast_1d(y_eq), np.atleast_1d(x_hat), sigma2)
    w = omega(c)
    r = (y_eq - x_hat)[:, None, None] - h * w[None, :, None] - w[None, None, :]
    g = -(r * r) / (2.0 * sigma2)
    tol = 1e-9 * c.delta
    g[x_hat <= -c.outer + tol, :, L] = -np.inf
    g[x_hat >= c.outer - tol, :, R] = -np.inf
    g = np.ascontiguousarray(g)
    return g[0] if scalar else g


def dfe3_map(y_eq, x_hat, sigma2, h, c: PamConstellation, mode="max-log",
             counter: CsCounter | None = None) -> np.ndarray:
    """State LLRs ``Gamma[k] = log P(s_k | y) - log P(s_k = c | y)``.

    Both frame edges are pinned to the centre state. ``mode`` is
    ``"max-log"`` (MLM) or ``"log-sum"`` (LM).

    Returns
    -------
    np.ndarray
        ``(N, 3)`` array ordered (l, c, r); the centre column is zero.
    """
    y_eq, x_hat = _check(y_eq, x_hat, sigma2)
    if y_eq.size == 0:
        return np.zeros((0, 3))
    g = branch_metrics(y_eq, x_hat, sigma2, h, c)
    _, _, app, cs = bcjr_kernel(g, EDGE_PRIOR, EDGE_PRIOR, mode == "max-log")
    if counter is not None:
        counter.add("dfe3-" + ("mlm" if mode == "max-log" else "lm"), cs)
    app = app[:-1]
    assert np.all(np.isfinite(app[:, C])), "centre state lost all probability"
    return app - app[:, C][:, None]


def dfe3_sova(y_eq, x_hat, sigma2, h, c: PamConstellation, delta: int = 10,
              counter: CsCounter | None = None, return_path: bool = False):
    """State LLRs by SOVA on the 3-state trellis.

    Metric excesses from :func:`prdetect.trellis.sova_kernel` are mapped to
    ``Gamma[k, s] = -(rel[k, s] - rel[k, c])`` so that larger means more likely,
    matching :func:`dfe3_map`. The frame start is pinned to the centre state;
    the frame end is merged with the same centre-state terminal as the MAP
    detector.
    """
    if delta < 1:
        raise ValueError("traceback length must be >= 1")
    y_eq, x_hat = _check(y_eq, x_hat, sigma2)
    if y_eq.size == 0:
        return (np.zeros((0, 3)), np.zeros(0, dtype=np.int64)) if return_path else np.zeros((0, 3))
    g = branch_metrics(y_eq, x_hat, sigma2, h, c)
    cost = -EDGE_PRIOR
    rel, path, cs = sova_kernel(g, cost, cost, int(delta))
    if counter is not None:
        counter.add("dfe3-sova", cs)
    rel = rel[:-1]
    gam = -(rel - rel[:, C][:, None])
    return (gam, path[:-1]) if return_path else gam


class Dfe3SovaStream:
    """Incremental DFE-3 SOVA emitting state LLRs with a fixed latency.

    Feed samples with :meth:`push`; each call returns the ``(k, Gamma_k)``
    pairs whose symbol left the traceback window, read from the register of
    the best terminating state at that moment. :meth:`finish` merges the
    remaining window with the centre-state terminal and flushes it.
    """

    def __init__(self, sigma2, h, c: PamConstellation, delta: int = 10):
        if delta < 1:
            raise ValueError("traceback length must be >= 1")
        if not sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {sigma2}")
        self.sigma2, self.h, self.c, self.delta = sigma2, h, c, delta
        self.xi = -EDGE_PRIOR.copy()
        self.window: list[np.ndarray] = []  # per symbol: (3 terminating, 3) excess
        self.k0 = 0  # index of window[0]

    def push(self, y_eq_k: float, x_hat_k: float):
        g = branch_metrics(float(y_eq_k), float(x_hat_k), self.sigma2, self.h, self.c)
        cand = self.xi[:, None] - g  # (prev, next)
        new_xi = cand.min(axis=0)
        with np.errstate(invalid="ignore"):
            diff = np.where(np.isfinite(new_xi)[None, :], cand - new_xi[None, :], np.inf)
        # entry[s, s2] = min_s1 old[s1, s2] + diff[s1, s]
        self.window = [
            np.min(e[:, None, :] + diff[:, :, None], axis=0) for e in self.window
        ]
        self.window.append(diff.T.copy())
        self.xi = new_xi - new_xi[np.isfinite(new_xi)].min()
        out = []
        while len(self.window) > self.delta + 1:
            e = self.window.pop(0)
            best = int(np.argmin(self.xi))
            out.append((self.k0, -(e[best] - e[best, C])))
            self.k0 += 1
        return out

    def finish(self):
        tot = self.xi - EDGE_PRIOR
        ref = tot.min()
        out = []
        for e in self.window:
            r = np.min(e + tot[:, None], axis=0) - ref
            out.append((self.k0, -(r - r[C])))
            self.k0 += 1
        self.window = []
        return out
