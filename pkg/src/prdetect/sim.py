"""Monte-Carlo link simulation: scheme pipelines, stopping rules, sweeps."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import __version__
from . import constellation as cst
from .channel import isi, snr_to_sigma2
from .demappers import awgn_demap, hd_demap, hd_llr_table, state_demap, symbol_to_bit
from .detector_dfe3 import dfe3_map, dfe3_sova
from .detector_full import DetectorConfig, detect_full, sova_full, viterbi_full
from .equalizers import WdfeParams, dfe, wdfe
from .fec import BpConfig, LdpcCode, bp_decode, load_code
from .line_coding import InterleaverSpec, deinterleave, deprecode, interleave, precode
from .metrics import CSV_COLUMNS, CsCounter, burst_stats, merge_bursts, ngmi_terms

log = logging.getLogger(__name__)

SCHEMES = (
    "awgn-baseline", "dfe", "wdfe", "dfe-int", "wdfe-int", "dfe-prec-hd", "dfe-hd",
    "mlsd-hd", "pam-lm", "pam-mlm", "pam-sova", "dfe3-lm", "dfe3-mlm", "dfe3-sova",
)
HD_SCHEMES = ("dfe-prec-hd", "dfe-hd", "mlsd-hd")
NGMI_ESTIMATOR = "1 - mean log2(1 + exp(-(2b-1) L))"


@dataclass(frozen=True)
class RunConfig:
    """Resolved simulation settings.

    ``code`` is ``"none"`` (uncoded bits, pre-FEC metrics only), ``"desk"``
    (bundled 2304-bit LDPC code) or a path to an alist file. Without a code a
    pseudo-codeword is ``codeword_bits`` random bits.
    """

    M: int = 4
    h: float = 0.7
    snr_db: tuple = ()
    codewords_per_frame: int = 4
    code: str = "desk"
    codeword_bits: int = 2304
    delta: int = 10
    wdfe_a: float | None = None
    wdfe_b: float | None = None
    wdfe_form: str = "logistic"
    bp_iterations: int = 6
    min_codewords: int = 500
    min_bit_errors: int = 10_000
    max_frames: int = 2_000
    hd_calibration_symbols: int = 1_000_000
    seed: int = 1
    workers: int = 1
    processes: int = 1

    def __post_init__(self):
        if self.min_codewords < 1:
            raise ValueError("min_codewords must be >= 1")
        if self.min_bit_errors < 0:
            raise ValueError("min_bit_errors must be >= 0")
        if self.workers < 1 or self.max_frames < 1 or self.codewords_per_frame < 1:
            raise ValueError("workers, max_frames and codewords_per_frame must be >= 1")
        if self.M not in cst.SUPPORTED_ORDERS:
            raise ValueError(f"unsupported M={self.M}")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))

    @property
    def wdfe_params(self) -> WdfeParams:
        d = WdfeParams.default_for(self.M)
        a = d.a if self.wdfe_a is None else self.wdfe_a
        b = d.b if self.wdfe_b is None else self.wdfe_b
        return WdfeParams(a, b, self.wdfe_form)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_db"] = list(self.snr_db)
        return d


@lru_cache(maxsize=8)
def _code(source: str) -> LdpcCode | None:
    return None if source == "none" else load_code(source)


@dataclass
class Tally:
    frames: int = 0
    codewords: int = 0
    pre_errors: int = 0
    pre_bits: int = 0
    post_errors: int = 0
    post_bits: int = 0
    ngmi_sum: float = 0.0
    ngmi_bits: int = 0
    symbols: int = 0
    cw_post_errors: list = field(default_factory=list)
    cw_pre_errors: list = field(default_factory=list)
    cw_ngmi: list = field(default_factory=list)  # per-codeword sums of NGMI cost terms
    bursts: dict = field(default_factory=dict)
    cs: CsCounter = field(default_factory=CsCounter)

    def absorb(self, o: "Tally") -> None:
        """In-place :meth:`merge`."""
        for name in ("frames", "codewords", "pre_errors", "pre_bits", "post_errors",
                     "post_bits", "ngmi_sum", "ngmi_bits", "symbols"):
            setattr(self, name, getattr(self, name) + getattr(o, name))
        self.cw_post_errors.extend(o.cw_post_errors)
        self.cw_pre_errors.extend(o.cw_pre_errors)
        self.cw_ngmi.extend(o.cw_ngmi)
        self.bursts = merge_bursts(self.bursts, o.bursts)
        self.cs = self.cs.merge(o.cs)

    def merge(self, o: "Tally") -> "Tally":
        out = Tally()
        out.absorb(self)
        out.absorb(o)
        return out


def _rng(cfg: RunConfig, snr_db: float, *stream) -> np.random.Generator:
    key = int(round(snr_db * 1000)) + 1_000_000
    ss = np.random.SeedSequence([cfg.seed, key, *stream])
    return np.random.Generator(np.random.PCG64(ss))


class Link:
    """One scheme at one operating point; simulates frames."""

    def __init__(self, scheme: str, cfg: RunConfig, snr_db: float):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
        self.scheme, self.cfg, self.snr_db = scheme, cfg, snr_db
        self.c = cst.build(cfg.M)
        self.h = 0.0 if scheme == "awgn-baseline" else cfg.h
        self.sigma2 = snr_to_sigma2(snr_db, self.h)
        self.code = _code(cfg.code)
        self.n = self.code.n if self.code else cfg.codeword_bits
        if (self.n * cfg.codewords_per_frame) % self.c.m:
            raise ValueError("frame bits must be a multiple of log2(M)")
        self.ileave = (InterleaverSpec(self.n, cfg.codewords_per_frame, cfg.seed)
                       if scheme.endswith("-int") else None)
        self.table = None
        if scheme in HD_SCHEMES:
            self.table = self._calibrate()

    # -- pipeline pieces ---------------------------------------------------
    def _source(self, rng):
        B = self.cfg.codewords_per_frame
        if self.code is None:
            return None, rng.integers(0, 2, B * self.n).astype(np.int8)
        info = rng.integers(0, 2, (B, self.code.k)).astype(np.int8)
        return info, self.code.encode(info).reshape(-1)

    def _transmit(self, coded, rng):
        tx_bits = interleave(coded, self.ileave) if self.ileave else coded
        u = cst.bits_to_indices(tx_bits, self.c)
        idx = precode(u, self.c.order) if self.scheme == "dfe-prec-hd" else u
        x = self.c.levels[idx]
        y = isi(x, self.h) + rng.standard_normal(x.size) * np.sqrt(self.sigma2)
        return u, idx, x, y

    def _hard(self, y, counter=None):
        """Symbol-index decisions of the HD schemes, in the data (u) domain."""
        c = self.c
        if self.scheme == "mlsd-hd":
            d = c.index_of(viterbi_full(y, self.h, self.sigma2, c, "zero"))
            if counter is not None:
                counter.add("mlsd", y.size * c.order ** 2)
            return d, d
        _, x_hat = dfe(y, self.h, c)
        if counter is not None:
            counter.add("slicer", y.size * c.order)
        d = c.index_of(x_hat)
        if self.scheme == "dfe-prec-hd":
            return deprecode(d, c.order), d
        return d, d

    def _calibrate(self):
        rng = _rng(self.cfg, self.snr_db, 0xCA1)
        per = self.n * self.cfg.codewords_per_frame // self.c.m
        dec, tru = [], []
        left = self.cfg.hd_calibration_symbols
        while left > 0:
            bits = rng.integers(0, 2, per * self.c.m).astype(np.int8)
            u, _, _, y = self._transmit(bits, rng)
            d, _ = self._hard(y)
            dec.append(d)
            tru.append(u)
            left -= per
        return hd_llr_table(np.concatenate(dec), np.concatenate(tru), self.c)

    def detect(self, y, counter: CsCounter | None = None):
        """Return ``(llr (N, m), hard bits (N*m,) in tx order, symbol decisions)``."""
        c, h, s2, sch = self.c, self.h, self.sigma2, self.scheme
        if sch in HD_SCHEMES:
            d, tx_dec = self._hard(y, counter)
            llr = hd_demap(d, self.table)
            bits = cst.indices_to_bits(d, c)
            return llr, bits, tx_dec
        if sch == "awgn-baseline" or sch.startswith("dfe") or sch.startswith("wdfe"):
            if sch.startswith("wdfe"):
                y_eq, x_hat = wdfe(y, h, c, self.cfg.wdfe_params)
            else:
                y_eq, x_hat = dfe(y, h, c)
            if counter is not None and sch != "awgn-baseline":
                counter.add("slicer", y.size * c.order)
            d = c.index_of(x_hat)
            if sch.startswith("dfe3"):
                if sch == "dfe3-sova":
                    gam = dfe3_sova(y_eq, x_hat, s2, h, c, self.cfg.delta, counter)
                    mode = "max-log"
                else:
                    mode = "log-sum" if sch == "dfe3-lm" else "max-log"
                    gam = dfe3_map(y_eq, x_hat, s2, h, c, mode, counter)
                llr = state_demap(y_eq, gam, s2, h, c, mode, counter)
                bits = (llr > 0).astype(np.int8).reshape(-1)
                return llr, bits, cst.bits_to_indices(bits, c)
            llr = awgn_demap(y_eq, s2, c, "max-log", counter)
            return llr, cst.indices_to_bits(d, c), d
        # full-state trellis schemes
        if sch == "pam-sova":
            lam = sova_full(y, h, s2, c, DetectorConfig("max-log", self.cfg.delta, "zero"), counter)
            mode = "max-log"
        else:
            mode = "log-sum" if sch == "pam-lm" else "max-log"
            lam = detect_full(y, h, s2, c, DetectorConfig(mode, self.cfg.delta, "zero"), counter)
        llr = symbol_to_bit(lam, c, mode, counter)
        bits = (llr > 0).astype(np.int8).reshape(-1)
        return llr, bits, cst.bits_to_indices(bits, c)

    def frame(self, rng) -> Tally:
        info, coded = self._source(rng)
        u, idx, x, y = self._transmit(coded, rng)
        t = Tally(frames=1, codewords=self.cfg.codewords_per_frame, symbols=x.size)
        llr, hard_bits, sym_dec = self.detect(y, t.cs)
        llr = llr.reshape(-1)
        if self.ileave:
            llr = deinterleave(llr, self.ileave)
            hard_bits = deinterleave(hard_bits, self.ileave)
        pre = hard_bits != coded
        t.pre_errors = int(pre.sum())
        t.pre_bits = coded.size
        t.cw_pre_errors = pre.reshape(self.cfg.codewords_per_frame, -1).sum(axis=1).tolist()
        if self.scheme not in HD_SCHEMES:
            terms = ngmi_terms(llr, coded).reshape(self.cfg.codewords_per_frame, -1).sum(axis=1)
            t.cw_ngmi = terms.tolist()
            t.ngmi_sum = float(terms.sum())
            t.ngmi_bits = coded.size
        if sym_dec is not None:
            t.bursts = burst_stats(sym_dec != idx)
        if self.code is not None:
            B = self.cfg.codewords_per_frame
            bp = BpConfig(self.cfg.bp_iterations)
            for b, cw_llr in enumerate(llr.reshape(B, -1)):
                dec, _, _ = bp_decode(cw_llr, self.code, bp)
                e = int(np.count_nonzero(self.code.extract_info(dec) != info[b]))
                t.post_errors += e
                t.post_bits += self.code.k
                t.cw_post_errors.append(e)
        return t


@lru_cache(maxsize=4)
def _link(scheme: str, cfg: RunConfig, snr_db: float) -> Link:
    return Link(scheme, cfg, snr_db)


def _chunk(args):
    scheme, cfg, snr_db, worker, rnd, nframes = args
    link = _link(scheme, cfg, snr_db)
    rng = _rng(cfg, snr_db, worker, rnd)
    t = Tally()
    for _ in range(nframes):
        t.absorb(link.frame(rng))
    return t


def _enough(t: Tally, cfg: RunConfig) -> bool:
    errs = t.post_errors if cfg.code != "none" else t.pre_errors
    return t.codewords >= cfg.min_codewords and errs >= cfg.min_bit_errors


def simulate(scheme: str, cfg: RunConfig, snr_db: float, frames_per_round: int | None = None) -> Tally:
    """Accumulate frames until both minima hold or ``max_frames`` is reached.

    Frames are dealt in rounds of ``frames_per_round`` per worker; worker
    ``w`` in round ``r`` draws from ``SeedSequence([seed, snr, w, r])`` and
    results merge in worker order, so outputs depend only on the config.
    """
    if frames_per_round is None:
        need = -(-cfg.min_codewords // cfg.codewords_per_frame)
        frames_per_round = max(1, min(64, -(-need // cfg.workers)))
    total = Tally()
    rnd = 0
    pool = ProcessPoolExecutor(cfg.processes) if cfg.processes > 1 else None
    try:
        while total.frames < cfg.max_frames:
            left = cfg.max_frames - total.frames
            jobs = []
            for w in range(cfg.workers):
                k = min(frames_per_round, left)
                left -= k
                if k > 0:
                    jobs.append((scheme, cfg, snr_db, w, rnd, k))
            results = pool.map(_chunk, jobs) if pool else map(_chunk, jobs)
            for r in results:
                total.absorb(r)
            rnd += 1
            if _enough(total, cfg):
                break
    finally:
        if pool:
            pool.shutdown()
    return total


def row_from_tally(scheme: str, snr_db: float, t: Tally, cfg: RunConfig) -> dict:
    m = cst.build(cfg.M).m
    n = _code(cfg.code).n if cfg.code != "none" else cfg.codeword_bits
    cs_sym = t.cs.total() / t.symbols if t.symbols else 0.0
    coded = cfg.code != "none"
    return {
        "scheme": scheme,
        "snr_db": snr_db,
        "pre_ber": t.pre_errors / t.pre_bits if t.pre_bits else float("nan"),
        "post_ber": (t.post_errors / t.post_bits) if coded and t.post_bits else float("nan"),
        "ngmi": 1.0 - t.ngmi_sum / t.ngmi_bits if t.ngmi_bits else float("nan"),
        "cs_per_codeword": cs_sym * n / m,
        "frames": t.frames,
        "bit_errors": t.post_errors if coded else t.pre_errors,
        "pre_bit_errors": t.pre_errors,
        "bits": t.post_bits if coded else t.pre_bits,
        "capped": int(not _enough(t, cfg)),
    }


def run_point(scheme: str, cfg: RunConfig, snr_db: float) -> dict:
    """Simulate one scheme at one SNR and return a metrics row."""
    t = simulate(scheme, cfg, snr_db)
    row = row_from_tally(scheme, snr_db, t, cfg)
    row["bursts"] = t.bursts
    row["tally"] = t
    return row


def sweep(schemes, cfg: RunConfig) -> list[dict]:
    rows = []
    for s in schemes:
        for snr in cfg.snr_db:
            log.info("running %s at %.2f dB", s, snr)
            rows.append(run_point(s, cfg, snr))
    return rows


EXTRA_COLUMNS = ("pre_bit_errors", "bits", "capped")


def rows_to_csv(rows, cfg: RunConfig) -> str:
    """CSV text with the resolved config in ``#`` header lines."""
    buf = io.StringIO()
    meta = {"version": __version__, "config": cfg.to_dict(), "ngmi_estimator": NGMI_ESTIMATOR,
            "bp": "sum-product, flooding", "noise": "PCG64 + standard_normal"}
    buf.write("# prdetect " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS + EXTRA_COLUMNS, extrasaction="ignore",
                       lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    out = []
    for r in csv.DictReader(lines):
        d = dict(r)
        for k in ("snr_db", "pre_ber", "post_ber", "ngmi", "cs_per_codeword"):
            d[k] = float(d[k])
        for k in ("frames", "bit_errors"):
            d[k] = int(d[k])
        out.append(d)
    return out


def gap_at_ber(rows, scheme_a: str, scheme_b: str, target: float, column: str = "pre_ber") -> float:
    """SNR difference ``B - A`` at ``target`` BER (log-linear interpolation)."""
    return snr_at_ber(rows, scheme_b, target, column) - snr_at_ber(rows, scheme_a, target, column)


def snr_at_ber(rows, scheme: str, target: float, column: str = "pre_ber") -> float:
    pts = sorted((r["snr_db"], r[column]) for r in rows if r["scheme"] == scheme)
    snr = np.array([p[0] for p in pts])
    ber = np.array([p[1] for p in pts])
    lt = np.log10(target)
    for i in range(len(pts) - 1):
        b0, b1 = ber[i], ber[i + 1]
        if b0 <= 0 or b1 <= 0:
            continue
        l0, l1 = np.log10(b0), np.log10(b1)
        if (l0 - lt) * (l1 - lt) <= 0 and l0 != l1:
            return float(snr[i] + (lt - l0) * (snr[i + 1] - snr[i]) / (l1 - l0))
        if l0 == l1 == lt:
            return float(snr[i])
    raise ValueError(f"target BER {target:g} outside the range of {scheme!r}")


def plot_svg(rows, path, column: str = "pre_ber"):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for s in dict.fromkeys(r["scheme"] for r in rows):
        pts = sorted((r["snr_db"], r[column]) for r in rows if r["scheme"] == s)
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=s)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(column.replace("_", " "))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
    finally:
        plt.close(fig)


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
