"""Decision-feedback equalizers for the one-tap channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .constellation import PamConstellation

DEFAULT_WDFE = {4: (3.0, 0.25), 8: (3.0, 0.3)}


@dataclass(frozen=True)
class WdfeParams:
    """Sigmoid compression parameters of the weighted DFE.

    ``form`` selects the weighting curve:

    * ``"logistic"``: ``f = 1 / (1 + exp(-a (eta/b - 1)))``, ranging over (0, 1).
    * ``"literal"``: ``f = 0.5 (1 - e) / (1 + e)`` with ``e = exp(-a (eta/b - 1))``,
      ranging over (-1/2, 1/2).

    ``b = 0`` always means ``f = 1`` (plain DFE) in both forms.
    """

    a: float = 3.0
    b: float = 0.25
    form: str = "logistic"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")
        if self.form not in ("logistic", "literal"):
            raise ValueError(f"unknown form {self.form!r}")

    @classmethod
    def default_for(cls, order: int) -> "WdfeParams":
        a, b = DEFAULT_WDFE.get(order, (3.0, 0.25))
        return cls(a, b)


def reliability(y_eq, x_hat, c: PamConstellation):
    """Heuristic decision reliability ``eta`` in [0, 1]."""
    y_eq = np.asarray(y_eq, dtype=float)
    eta = np.where(np.abs(y_eq) >= c.outer, 1.0, 1.0 - np.abs(x_hat - y_eq) / c.delta)
    return np.clip(eta, 0.0, 1.0)


@njit(cache=True)
def _weight(eta, a, b, literal):
    if b == 0.0:
        return 1.0
    e = np.exp(-a * (eta / b - 1.0))
    if literal:
        return 0.5 * (1.0 - e) / (1.0 + e)
    return 1.0 / (1.0 + e)


def weight(eta, p: WdfeParams):
    """Feedback weight ``f(eta)``."""
    lit = p.form == "literal"
    return np.vectorize(lambda v: _weight(float(v), p.a, p.b, lit), otypes=[float])(eta)


@njit(cache=True)
def _slice1(v, delta, order):
    k = np.floor(v / (2.0 * delta) + order / 2.0)
    if k < 0:
        k = 0.0
    elif k > order - 1:
        k = order - 1.0
    return (2.0 * k - (order - 1)) * delta


@njit(cache=True)
def _dfe_kernel(y, h, delta, order):
    n = y.size
    y_eq = np.empty(n)
    x_hat = np.empty(n)
    prev = 0.0
    for i in range(n):
        v = y[i] - h * prev
        y_eq[i] = v
        prev = _slice1(v, delta, order)
        x_hat[i] = prev
    return y_eq, x_hat


@njit(cache=True)
def _wdfe_kernel(y, h, delta, order, a, b, literal):
    n = y.size
    y_eq = np.empty(n)
    x_hat = np.empty(n)
    outer = (order - 1) * delta
    fb = 0.0
    for i in range(n):
        v = y[i] - h * fb
        xh = _slice1(v, delta, order)
        y_eq[i] = v
        x_hat[i] = xh
        if abs(v) >= outer:
            eta = 1.0
        else:
            eta = 1.0 - abs(xh - v) / delta
            if eta < 0.0:
                eta = 0.0
        f = _weight(eta, a, b, literal)
        fb = f * xh + (1.0 - f) * v
    return y_eq, x_hat


def dfe(y: np.ndarray, h: float, c: PamConstellation):
    """One-tap DFE: ``y_eq[i] = y[i] - h * x_hat[i-1]`` with ``x_hat[-1] = 0``.

    Returns
    -------
    y_eq, x_hat : np.ndarray
        Equalized samples and sliced decisions.
    """
    return _dfe_kernel(np.ascontiguousarray(y, dtype=float), float(h), c.delta, c.order)


def wdfe(y: np.ndarray, h: float, c: PamConstellation, p: WdfeParams):
    """Weighted DFE feeding back ``f(eta) x_hat + (1 - f(eta)) y_eq``."""
    if p.b == 0.0:
        return dfe(y, h, c)
    return _wdfe_kernel(
        np.ascontiguousarray(y, dtype=float), float(h), c.delta, c.order,
        p.a, p.b, p.form == "literal",
    )


def genie_dfe(y: np.ndarray, x_true: np.ndarray, h: float) -> np.ndarray:
    """Error-propagation-free DFE fed back with the transmitted symbols."""
    y = np.asarray(y, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if y.shape != x_true.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {x_true.shape}")
    prev = np.concatenate(([0.0], x_true[:-1]))
    return y - h * prev


def biased_state_sequence(x: np.ndarray, x_hat: np.ndarray, c: PamConstellation) -> np.ndarray:
    """Biased state seen by each sample: 0 (l), 1 (c), 2 (r).

    The state of sample ``i`` is the previous decision error
    ``x[i-1] - x_hat[i-1]`` in units of ``d``; errors of two or more levels
    fall outside the three-state model and are marked ``-1``.
    """
    e = np.asarray(x, dtype=float) - np.asarray(x_hat, dtype=float)
    k = np.rint(np.concatenate(([0.0], e[:-1])) / c.d).astype(np.int64)
    return np.where(np.abs(k) <= 1, k + 1, -1)
