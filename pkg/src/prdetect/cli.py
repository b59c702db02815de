"""Command-line entry point: ``prdetect {run,sweep,gap,complexity}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .metrics import complexity_table, cs_reduction
from .sim import (SCHEMES, RunConfig, gap_at_ber, plot_svg, read_csv, row_from_tally,
                  rows_to_csv, simulate, sweep)

# (lower, upper) bands checked by ``complexity --check``
COMPLEXITY_BANDS = {
    "dfe3_sova_over_pam8_sova": (0.0332, 0.0932),
    "sova_reduction_m4": (0.49, 0.59),
    "sova_reduction_m8": (0.91, 0.97),
}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text()) or {}
    except OSError as exc:
        raise SystemExit(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SystemExit(f"config {path} must be a mapping")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise SystemExit(f"unknown config keys in {path}: {sorted(unknown)}")
    return data


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML file with RunConfig fields")
    for f in dataclasses.fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "snr_db":
            p.add_argument(flag, type=float, nargs="+", help="SNR grid in dB")
        elif f.name in ("code", "wdfe_form"):
            p.add_argument(flag, type=str)
        elif f.type in ("int", int):
            p.add_argument(flag, type=int)
        else:
            p.add_argument(flag, type=float)


def resolve_config(args) -> RunConfig:
    data = load_config(args.config)
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            data[f.name] = v
    try:
        return RunConfig(**data)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"invalid configuration: {exc}") from exc


def _emit(rows, cfg, out, plot):
    text = rows_to_csv(rows, cfg)
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise SystemExit(f"cannot write CSV to {out}: {exc}") from exc
    else:
        sys.stdout.write(text)
    if plot:
        plot_svg(rows, plot)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    snr = args.snr if args.snr is not None else (cfg.snr_db[0] if cfg.snr_db else None)
    if snr is None:
        raise SystemExit("run needs --snr or a one-point --snr-db grid")
    t = simulate(args.scheme, cfg, snr)
    row = row_from_tally(args.scheme, snr, t, cfg)
    _emit([row], cfg, args.out, None)
    if args.bursts:
        sys.stderr.write(json.dumps({str(k): v for k, v in sorted(t.bursts.items())}) + "\n")
    return 1 if args.check and row["capped"] else 0


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    rows = sweep(args.schemes, cfg)
    _emit(rows, cfg, args.out, args.plot)
    return 1 if args.check and any(r["capped"] for r in rows) else 0


def cmd_gap(args) -> int:
    try:
        rows = read_csv(Path(args.csv).read_text())
    except OSError as exc:
        raise SystemExit(f"cannot read {args.csv}: {exc}") from exc
    gap = gap_at_ber(rows, args.a, args.b, args.ber, args.column)
    print(f"{gap:.4f}")
    if args.check:
        if args.expect is None:
            raise SystemExit("--check needs --expect")
        return 0 if abs(gap - args.expect) <= args.tol else 1
    return 0


def complexity_summary(codeword_bits: int, delta: int) -> dict:
    t4, t8 = complexity_table(4, codeword_bits, delta), complexity_table(8, codeword_bits, delta)
    return {
        "codeword_bits": codeword_bits,
        "delta": delta,
        "table": {"M4": t4, "M8": t8},
        "dfe3_sova_over_pam8_sova": t8["dfe3-sova"]["cs"] / t8["pam-sova"]["cs"],
        "sova_reduction_m4": cs_reduction(4, "sova", delta),
        "sova_reduction_m8": cs_reduction(8, "sova", delta),
        "mlm_reduction_m4": cs_reduction(4, "mlm", delta),
        "mlm_reduction_m8": cs_reduction(8, "mlm", delta),
        "sova_reduction_m4_blocked": cs_reduction(4, "sova", delta, True),
        "sova_reduction_m8_blocked": cs_reduction(8, "sova", delta, True),
    }


def cmd_complexity(args) -> int:
    s = complexity_summary(args.codeword_bits, args.delta)
    print(json.dumps(s, indent=2))
    if not args.check:
        return 0
    ok = all(lo <= s[k] <= hi for k, (lo, hi) in COMPLEXITY_BANDS.items())
    ok &= s["mlm_reduction_m4"] < s["sova_reduction_m4"]
    ok &= s["mlm_reduction_m8"] < s["sova_reduction_m8"]
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prdetect", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scheme at one SNR")
    r.add_argument("scheme", choices=SCHEMES)
    r.add_argument("--snr", type=float)
    r.add_argument("--out")
    r.add_argument("--bursts", action="store_true", help="print burst histogram to stderr")
    r.add_argument("--check", action="store_true", help="exit 1 if the frame cap was hit")
    _add_run_flags(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="simulate schemes over the SNR grid")
    s.add_argument("schemes", nargs="+", choices=SCHEMES)
    s.add_argument("--out")
    s.add_argument("--plot", help="write an SVG BER plot here")
    s.add_argument("--check", action="store_true", help="exit 1 if any row hit the frame cap")
    _add_run_flags(s)
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("gap", help="SNR gap B - A at a target BER from a sweep CSV")
    g.add_argument("csv")
    g.add_argument("a")
    g.add_argument("b")
    g.add_argument("--ber", type=float, default=1e-3)
    g.add_argument("--column", default="pre_ber", choices=("pre_ber", "post_ber"))
    g.add_argument("--expect", type=float)
    g.add_argument("--tol", type=float, default=0.15)
    g.add_argument("--check", action="store_true")
    g.set_defaults(func=cmd_gap)

    c = sub.add_parser("complexity", help="CS counts per codeword")
    c.add_argument("--codeword-bits", type=int, default=17664)
    c.add_argument("--delta", type=int, default=10)
    c.add_argument("--check", action="store_true", help="exit 1 if ratios leave the target bands")
    c.set_defaults(func=cmd_complexity)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(over="ignore")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
