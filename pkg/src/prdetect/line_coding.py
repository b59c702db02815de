"""Modulo-M precoding and block bit interleaving."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit


@njit(cache=True)
def _precode(u, M):
    p = np.empty_like(u)
    prev = 0
    for i in range(u.size):
        prev = (u[i] - prev) % M
        p[i] = prev
    return p


def _levels(u, M):
    u = np.ascontiguousarray(u, dtype=np.int64)
    if u.size and (u.min() < 0 or u.max() >= M):
        raise ValueError(f"level indices must lie in [0, {M})")
    return u


def precode(u, M: int) -> np.ndarray:
    """``p[i] = (u[i] - p[i-1]) mod M`` with ``p[-1] = 0``.

    An alternating +1/-1 run of level errors on ``p`` leaves only the two
    edge symbols in error after :func:`deprecode`.
    """
    return _precode(_levels(u, M), M)


def deprecode(p, M: int) -> np.ndarray:
    """``u[i] = (p[i] + p[i-1]) mod M`` with ``p[-1] = 0``."""
    p = _levels(p, M)
    prev = np.concatenate(([0], p[:-1]))
    return (p + prev) % M


@dataclass(frozen=True)
class InterleaverSpec:
    """Random permutation over ``block`` consecutive codewords."""

    codeword_length: int
    block: int = 4
    seed: int = 0

    @property
    def size(self) -> int:
        return self.block * self.codeword_length

    @cached_property
    def permutation(self) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, 0x1E])))
        return rng.permutation(self.size)

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.empty(self.size, dtype=np.int64)
        inv[self.permutation] = np.arange(self.size)
        return inv


def _check_len(x, spec):
    x = np.asarray(x)
    if x.shape[0] != spec.size:
        raise ValueError(f"expected {spec.size} values, got {x.shape[0]}")
    return x


def interleave(bits, spec: InterleaverSpec) -> np.ndarray:
    """``out[i] = bits[perm[i]]``."""
    return _check_len(bits, spec)[spec.permutation]


def deinterleave(values, spec: InterleaverSpec) -> np.ndarray:
    """Inverse of :func:`interleave`; works on bits or LLRs."""
    return _check_len(values, spec)[spec.inverse]
