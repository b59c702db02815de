"""PAM-M alphabet with binary-reflected Gray labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SUPPORTED_ORDERS = (2, 4, 8, 16)


def gray_code(m: int) -> np.ndarray:
    """Binary-reflected Gray code of ``m`` bits, in reflection order."""
    i = np.arange(1 << m, dtype=np.int64)
    return i ^ (i >> 1)


@dataclass(frozen=True)
class PamConstellation:
    """Bipolar PAM-M alphabet ``{±Δ, ±3Δ, ..., ±(M-1)Δ}``.

    Level index ``k`` (0 = most negative) carries the label ``gray_code(m)[k]``;
    bit position ``j`` refers to the ``j``-th most significant label bit.
    """

    order: int
    delta: float
    levels: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)  # (M,) integer label per level index
    bit_table: np.ndarray = field(repr=False)  # (M, m) label bits per level index

    @property
    def m(self) -> int:
        return self.bit_table.shape[1]

    @property
    def d(self) -> float:
        """Minimum Euclidean distance ``2Δ``."""
        return 2.0 * self.delta

    @property
    def outer(self) -> float:
        return (self.order - 1) * self.delta

    @property
    def label_to_index(self) -> np.ndarray:
        inv = np.empty(self.order, dtype=np.int64)
        inv[self.labels] = np.arange(self.order)
        return inv

    @property
    def ref_index(self) -> int:
        """Index of the ``+1Δ`` level, the reference of symbol LLRs."""
        return self.order // 2

    def subset(self, j: int, b: int) -> np.ndarray:
        """Level indices whose label has bit value ``b`` at position ``j``."""
        return np.flatnonzero(self.bit_table[:, j] == b)

    def subset_mask(self) -> np.ndarray:
        """Boolean (m, 2, M) mask; ``mask[j, b, k]`` iff level ``k`` is in X_j^b."""
        bt = self.bit_table.T.astype(bool)
        return np.stack([~bt, bt], axis=1)

    def index_of(self, values: np.ndarray) -> np.ndarray:
        """Level index of values that are exactly (up to rounding) levels."""
        k = np.rint((np.asarray(values) / self.delta + self.order - 1) / 2.0)
        return k.astype(np.int64)


def build(order: int, normalization: str = "unit-power") -> PamConstellation:
    """Build a Gray-labeled PAM constellation.

    Parameters
    ----------
    order : int
        Modulation order, one of 2, 4, 8, 16.
    normalization : {"unit-power", "unit-delta"}
        ``unit-power`` scales so that the mean of level**2 is one;
        ``unit-delta`` fixes Δ = 1.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"order must be one of {SUPPORTED_ORDERS}, got {order}")
    if normalization == "unit-power":
        delta = float(np.sqrt(3.0 / (order * order - 1)))
    elif normalization == "unit-delta":
        delta = 1.0
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    m = order.bit_length() - 1
    levels = (2.0 * np.arange(order) - (order - 1)) * delta
    labels = gray_code(m)
    shifts = np.arange(m - 1, -1, -1)
    bit_table = ((labels[:, None] >> shifts[None, :]) & 1).astype(np.int8)
    for arr in (levels, labels, bit_table):
        arr.setflags(write=False)
    return PamConstellation(order, delta, levels, labels, bit_table)


def bits_to_indices(bits: np.ndarray, c: PamConstellation) -> np.ndarray:
    """Group bits MSB-first into labels and return level indices."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % c.m:
        raise ValueError(f"bit count {bits.size} not divisible by m={c.m}")
    weights = 1 << np.arange(c.m - 1, -1, -1)
    labels = bits.reshape(-1, c.m) @ weights
    return c.label_to_index[labels]


def indices_to_bits(idx: np.ndarray, c: PamConstellation) -> np.ndarray:
    return c.bit_table[np.asarray(idx, dtype=np.int64)].reshape(-1).astype(np.int8)


def map_bits(bits: np.ndarray, c: PamConstellation) -> np.ndarray:
    """Map a bit sequence to PAM symbols, ``m`` bits per symbol."""
    return c.levels[bits_to_indices(bits, c)]


def unmap_symbols(symbols: np.ndarray, c: PamConstellation) -> np.ndarray:
    """Inverse of :func:`map_bits` for exact level values."""
    return indices_to_bits(c.index_of(symbols), c)


def slice_index(y_eq, c: PamConstellation):
    """Index of the nearest level; ties at a threshold resolve upward."""
    k = np.floor(np.asarray(y_eq, dtype=float) / c.d + c.order / 2.0)
    return np.clip(k, 0, c.order - 1).astype(np.int64)


def slice(y_eq, c: PamConstellation):  # noqa: A001 - mirrors the slicer name
    """Hard decision on equalized samples (scalar or array)."""
    out = c.levels[slice_index(y_eq, c)]
    return float(out) if np.ndim(out) == 0 else out
