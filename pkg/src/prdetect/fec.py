"""Binary LDPC codes: alist I/O, systematic encoding, sum-product decoding."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np
from numba import njit

DESK_CODE = "ldpc_2304_r083.alist"


class CodeError(ValueError):
    """Malformed or unusable parity-check description."""


@dataclass(frozen=True)
class BpConfig:
    max_iterations: int = 6
    schedule: str = "flooding"
    variant: str = "sum-product"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.schedule != "flooding" or self.variant != "sum-product":
            raise ValueError("only flooding sum-product decoding is implemented")


def _gf2_rref(H: np.ndarray):
    """Reduced row echelon form over GF(2); returns (R, pivot columns)."""
    R = H.astype(np.uint8).copy()
    m, n = R.shape
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hits = np.flatnonzero(R[row:, col]) + row
        if hits.size == 0:
            continue
        p = hits[0]
        if p != row:
            R[[row, p]] = R[[p, row]]
        others = np.flatnonzero(R[:, col])
        others = others[others != row]
        R[others] ^= R[row]
        pivots.append(col)
        row += 1
    return R[:row], np.array(pivots, dtype=np.int64)


class LdpcCode:
    """Sparse binary code defined by its parity-check matrix."""

    def __init__(self, H: np.ndarray, name: str = ""):
        H = (np.asarray(H) != 0).astype(np.uint8)
        if H.ndim != 2 or H.size == 0:
            raise CodeError("parity-check matrix must be a non-empty 2-D array")
        self.H = H
        self.name = name
        self.m, self.n = H.shape
        R, piv = _gf2_rref(H)
        if piv.size < self.m:
            raise CodeError(
                f"parity-check matrix is rank deficient: rank {piv.size} < {self.m} rows")
        self.k = self.n - self.m
        self.parity_cols = piv
        mask = np.ones(self.n, dtype=bool)
        mask[piv] = False
        self.info_cols = np.flatnonzero(mask)
        # parity[piv[r]] = sum_c R[r, info_c] * u_c
        self._A = R[:, self.info_cols].astype(np.int32)
        rows, cols = np.nonzero(H)
        order = np.lexsort((rows, cols))
        self._edge_var = cols[order].astype(np.int64)
        self._edge_chk = rows[order].astype(np.int64)
        self._var_ptr = np.concatenate(([0], np.cumsum(np.bincount(cols, minlength=self.n))))
        corder = np.argsort(self._edge_chk, kind="stable")
        self._chk_edges = corder.astype(np.int64)
        self._chk_ptr = np.concatenate(([0], np.cumsum(np.bincount(rows, minlength=self.m))))

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, info) -> np.ndarray:
        """Systematic encoding; accepts (k,) or (B, k) bits."""
        info = np.asarray(info)
        single = info.ndim == 1
        info = np.atleast_2d(info).astype(np.int32)
        if info.shape[1] != self.k:
            raise ValueError(f"expected {self.k} information bits, got {info.shape[1]}")
        cw = np.zeros((info.shape[0], self.n), dtype=np.int8)
        cw[:, self.info_cols] = info
        cw[:, self.parity_cols] = (info @ self._A.T) & 1
        return cw[0] if single else cw

    def extract_info(self, cw) -> np.ndarray:
        return np.asarray(cw)[..., self.info_cols]

    def syndrome(self, cw) -> np.ndarray:
        return (self.H.astype(np.int32) @ np.asarray(cw, dtype=np.int32).T % 2).T

    def is_codeword(self, cw) -> bool:
        return not np.any(self.syndrome(cw))

    def decode(self, llrs, cfg: BpConfig = BpConfig(), trace: bool = False):
        """See :func:`bp_decode`."""
        return bp_decode(llrs, self, cfg, trace)

    @cached_property
    def max_weights(self):
        return int(self.H.sum(axis=0).max()), int(self.H.sum(axis=1).max())


def read_alist(source) -> np.ndarray:
    """Parse MacKay's alist text format into a dense 0/1 matrix."""
    text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
    try:
        tok = [int(t) for t in text.split()]
        n, m = tok[0], tok[1]
        pos = 4
        col_w = tok[pos:pos + n]
        pos += n
        row_w = tok[pos:pos + m]
        pos += m
        max_cw, max_rw = tok[2], tok[3]
        H = np.zeros((m, n), dtype=np.uint8)
        for j in range(n):
            entries = tok[pos:pos + max_cw]
            pos += max_cw
            for r in entries[: col_w[j]]:
                H[r - 1, j] = 1
        for i in range(m):
            entries = tok[pos:pos + max_rw]
            pos += max_rw
            got = sorted(c - 1 for c in entries[: row_w[i]])
            if got != np.flatnonzero(H[i]).tolist():
                raise CodeError(f"row {i + 1} disagrees with column lists")
    except (IndexError, ValueError) as exc:
        if isinstance(exc, CodeError):
            raise
        raise CodeError(f"malformed alist: {exc}") from exc
    return H


def write_alist(H: np.ndarray, path=None) -> str:
    H = (np.asarray(H) != 0).astype(np.uint8)
    m, n = H.shape
    cw = H.sum(axis=0)
    rw = H.sum(axis=1)
    lines = [f"{n} {m}", f"{cw.max()} {rw.max()}",
             " ".join(map(str, cw)), " ".join(map(str, rw))]
    for j in range(n):
        idx = (np.flatnonzero(H[:, j]) + 1).tolist()
        lines.append(" ".join(map(str, idx + [0] * (cw.max() - len(idx)))))
    for i in range(m):
        idx = (np.flatnonzero(H[i]) + 1).tolist()
        lines.append(" ".join(map(str, idx + [0] * (rw.max() - len(idx)))))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_code(source) -> LdpcCode:
    """Load an alist file (path or text). ``"desk"`` selects the bundled code."""
    if source == "desk":
        text = resources.files("prdetect.data").joinpath(DESK_CODE).read_text()
        return LdpcCode(read_alist(text), name="desk-2304")
    return LdpcCode(read_alist(source), name=str(source))


def regular_ldpc(n: int, dv: int, dc: int, seed: int = 0, max_tries: int = 50) -> np.ndarray:
    """(dv, dc)-regular parity-check matrix free of 4-cycles.

    Columns are attached greedily: each edge goes to a least-loaded row that
    shares no column with the rows already chosen for this column.
    """
    if (n * dv) % dc:
        raise ValueError("n*dv must be divisible by dc")
    m = n * dv // dc
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        H = np.zeros((m, n), dtype=np.uint8)
        deg = np.zeros(m, dtype=np.int64)
        row_cols: list[list[int]] = [[] for _ in range(m)]
        ok = True
        for j in rng.permutation(n):
            chosen: list[int] = []
            banned = np.zeros(m, dtype=bool)
            for _e in range(dv):
                free = (deg < dc) & ~banned
                if not free.any():
                    ok = False
                    break
                cand = np.flatnonzero(free & (deg == deg[free].min()))
                r = int(rng.choice(cand))
                chosen.append(r)
                banned[r] = True
                for col in row_cols[r]:
                    banned[H[:, col].astype(bool)] = True
                deg[r] += 1
            if not ok:
                break
            for r in chosen:
                H[r, j] = 1
                row_cols[r].append(int(j))
        if ok and np.all(deg == dc):
            return H
    raise RuntimeError("could not construct a 4-cycle-free regular code")


# --- sum-product decoder ---------------------------------------------------

_CLIP = 30.0


@njit(cache=True)
def _phi(x):
    # phi(x) = -log(tanh(x/2)), self-inverse on x > 0
    if x < 1e-12:
        x = 1e-12
    if x > _CLIP:
        return 2.0 * np.exp(-x)
    return -np.log(np.tanh(0.5 * x))


@njit(cache=True)
def _spa(lam, edge_var, var_ptr, chk_edges, chk_ptr, n_chk, max_iter, trace):
    n = lam.size
    E = edge_var.size
    v2c = np.empty(E)
    c2v = np.zeros(E)
    post = lam.copy()
    for e in range(E):
        v2c[e] = lam[edge_var[e]]
    hard = np.zeros(n, dtype=np.int8)
    viol = np.zeros(max_iter, dtype=np.int64)
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        for c in range(n_chk):
            tot = 0.0
            neg = 0
            for q in range(chk_ptr[c], chk_ptr[c + 1]):
                e = chk_edges[q]
                v = v2c[e]
                if v < 0:
                    neg += 1
                tot += _phi(abs(v))
            for q in range(chk_ptr[c], chk_ptr[c + 1]):
                e = chk_edges[q]
                v = v2c[e]
                mag = _phi(max(tot - _phi(abs(v)), 1e-300))
                sgn = neg - (1 if v < 0 else 0)
                c2v[e] = -mag if sgn % 2 else mag
        for j in range(n):
            s = lam[j]
            for e in range(var_ptr[j], var_ptr[j + 1]):
                s += c2v[e]
            post[j] = s
            for e in range(var_ptr[j], var_ptr[j + 1]):
                v = s - c2v[e]
                if v > _CLIP:
                    v = _CLIP
                elif v < -_CLIP:
                    v = -_CLIP
                v2c[e] = v
            hard[j] = 1 if s < 0 else 0
        bad = 0
        for c in range(n_chk):
            par = 0
            for q in range(chk_ptr[c], chk_ptr[c + 1]):
                par ^= hard[edge_var[chk_edges[q]]]
            bad += par
        viol[it - 1] = bad
        if bad == 0:
            converged = True
            break
    return hard, converged, it, post, viol


def bp_decode(llrs, code: LdpcCode, cfg: BpConfig = BpConfig(), trace: bool = False):
    """Flooding sum-product decoding.

    Parameters
    ----------
    llrs : array (n,)
        Channel LLRs, ``log P(b=1) / P(b=0)``.

    Returns
    -------
    bits, converged, iterations
        Hard decisions after the last iteration, whether all checks are
        satisfied, and the number of iterations run. With ``trace=True`` a
        fourth item holds the unsatisfied-check count after each iteration.
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    if llrs.size != code.n:
        raise ValueError(f"expected {code.n} LLRs, got {llrs.size}")
    lam = np.clip(-llrs, -_CLIP, _CLIP)  # decoder works in log P(0)/P(1)
    hard, conv, it, _, viol = _spa(lam, code._edge_var, code._var_ptr, code._chk_edges,
                                   code._chk_ptr, code.m, cfg.max_iterations, trace)
    if trace:
        return hard, bool(conv), int(it), viol[:it].copy()
    return hard, bool(conv), int(it)
