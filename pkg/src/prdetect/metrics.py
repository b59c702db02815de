"""BER, NGMI, burst statistics and compare-and-select complexity accounting."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("scheme", "snr_db", "pre_ber", "post_ber", "ngmi", "cs_per_codeword",
               "frames", "bit_errors")


@dataclass
class CsCounter:
    """Tally of compare-and-select operations.

    A max/min over ``n`` operands adds ``n``. ``full`` counts every operand
    of the recursions as written; ``pruned`` leaves out blocked transitions.
    Tallies are attributed to labels and merge by addition.
    """

    full: Counter = field(default_factory=Counter)
    pruned: Counter = field(default_factory=Counter)

    def add(self, label: str, n, pruned=None):
        if np.ndim(n) == 1:
            n, pruned = int(n[0]), int(n[1])
        self.full[label] += int(n)
        self.pruned[label] += int(n if pruned is None else pruned)

    def total(self, pruned: bool = False) -> int:
        return sum((self.pruned if pruned else self.full).values())

    def merge(self, other: "CsCounter") -> "CsCounter":
        return CsCounter(self.full + other.full, self.pruned + other.pruned)

    def __add__(self, other):
        return self.merge(other)


def ber(ref_bits, test_bits):
    """Return ``(errors, total, ratio)``."""
    ref_bits = np.asarray(ref_bits).ravel()
    test_bits = np.asarray(test_bits).ravel()
    if ref_bits.shape != test_bits.shape:
        raise ValueError(f"length mismatch: {ref_bits.size} vs {test_bits.size}")
    n = ref_bits.size
    e = int(np.count_nonzero(ref_bits != test_bits))
    return e, n, (e / n if n else 0.0)


def ngmi_terms(llrs, bits):
    """Per-bit cost ``log2(1 + exp(-(2b - 1) L))``; summed by :func:`ngmi`."""
    llrs = np.asarray(llrs, dtype=float)
    bits = np.asarray(bits)
    if bits.ndim == 1 and llrs.ndim == 2 and bits.size == llrs.size:
        bits = bits.reshape(llrs.shape)  # flat MSB-first bits against an (N, m) frame
    if llrs.shape != bits.shape:
        raise ValueError(f"shape mismatch: {llrs.shape} vs {bits.shape}")
    sgn = 2.0 * bits - 1.0
    return np.logaddexp(0.0, -sgn * llrs) / np.log(2.0)


def ngmi(llrs, bits) -> float:
    """LLR-based normalized GMI, ``1 - mean(log2(1 + exp(-(2b-1) L)))``.

    LLRs follow ``L = log P(b=1) / P(b=0)``.
    """
    t = ngmi_terms(llrs, bits)
    return 1.0 - float(t.mean()) if t.size else float("nan")


def burst_stats(errors) -> dict[int, int]:
    """Histogram of maximal runs of nonzero symbol errors."""
    nz = np.asarray(errors) != 0
    if not nz.any():
        return {}
    padded = np.concatenate(([False], nz, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    return dict(sorted(Counter((stops - starts).tolist()).items()))


def merge_bursts(a: dict, b: dict) -> dict:
    out = Counter(a)
    out.update(b)
    return dict(sorted(out.items()))


# --- complexity ------------------------------------------------------------
#
# Per-symbol CS operands, counting a max/min over n operands as n:
#   slicer              M      (nearest of M levels)
#   AWGN / symbol->bit  m*M    (two maxima over M/2 levels per bit)
#   state demapper      m*(3M + 6)  (3 minima over M/2 levels and one max over
#                               3 states, per bit value and bit)
#   MLM, S states       3*S^2  (forward, backward, joint per Eq.-style max)
#   SOVA, S states      S^2 + delta*S^3  (path metric + windowed update)
# Blocked DFE-3 columns remove one third of the trellis work at the
# instants where the decision is an outer level (fraction 2/M).

SCHEMES_CS = ("pam-mlm", "pam-sova", "dfe3-mlm", "dfe3-sova", "dfe", "wdfe", "pam-lm",
              "dfe3-lm", "awgn-baseline")


def _trellis_cs(kind: str, S: int, delta: int) -> float:
    if kind == "mlm":
        return 3.0 * S * S
    if kind == "sova":
        return S * S + delta * S ** 3
    raise ValueError(kind)


def cs_per_symbol(scheme: str, M: int, delta: int = 10, blocked_fraction: float = 0.0) -> dict:
    """Per-symbol CS breakdown for a scheme.

    ``blocked_fraction`` is the share of DFE-3 time instants with one blocked
    target column; pass ``2/M`` for the expected saving with uniform data.
    """
    m = M.bit_length() - 1
    if scheme in ("pam-mlm", "pam-lm", "pam-sova"):
        kind = "sova" if scheme.endswith("sova") else "mlm"
        return {"trellis": _trellis_cs(kind, M, delta), "demapper": float(m * M)}
    if scheme in ("dfe3-mlm", "dfe3-lm", "dfe3-sova"):
        kind = "sova" if scheme.endswith("sova") else "mlm"
        t = _trellis_cs(kind, 3, delta) * (1.0 - blocked_fraction / 3.0)
        return {"slicer": float(M), "trellis": t, "demapper": float(m * (3 * M + 6))}
    if scheme in ("dfe", "wdfe", "dfe-int", "wdfe-int", "awgn-baseline"):
        out = {"demapper": float(m * M)}
        if scheme != "awgn-baseline":
            out["slicer"] = float(M)
        return out
    raise ValueError(f"unknown scheme {scheme!r}")


def complexity_report(scheme: str, codeword_bits: int, M: int, delta: int = 10,
                      blocked_fraction: float = 0.0) -> float:
    """CS operations per codeword of ``codeword_bits`` coded bits."""
    m = M.bit_length() - 1
    per_sym = sum(cs_per_symbol(scheme, M, delta, blocked_fraction).values())
    return per_sym * codeword_bits / m


def complexity_table(M: int, codeword_bits: int = 17664, delta: int = 10) -> dict:
    """CS per codeword for the trellis schemes, with and without blocking."""
    rows = {}
    for s in ("pam-mlm", "pam-sova", "dfe3-mlm", "dfe3-sova"):
        rows[s] = {
            "cs": complexity_report(s, codeword_bits, M, delta),
            "cs_blocked": complexity_report(
                s, codeword_bits, M, delta, 2.0 / M if s.startswith("dfe3") else 0.0),
        }
    return rows


def cs_reduction(M: int, algo: str, delta: int = 10, blocked: bool = False) -> float:
    """Fractional CS saving of DFE-3 ``algo`` over the M-state ``algo``."""
    bf = 2.0 / M if blocked else 0.0
    full = complexity_report(f"pam-{algo}", 1, M, delta)
    red = complexity_report(f"dfe3-{algo}", 1, M, delta, bf)
    return 1.0 - red / full
