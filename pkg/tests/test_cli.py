import json

import pytest

from prdetect.cli import main

FAST = ["--code", "none", "--min-codewords", "4", "--min-bit-errors", "0", "--max-frames", "2"]


def test_run_to_stdout(capsys):
    assert main(["run", "dfe", "--snr", "16", *FAST]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# prdetect") and "dfe,16.0" in out


def test_run_check_flags_cap(capsys):
    args = ["run", "dfe", "--snr", "16", "--code", "none", "--min-bit-errors", "100000000",
            "--max-frames", "1", "--check"]
    assert main(args) == 1


def test_sweep_config_file_and_gap(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("M: 4\nh: 0.7\nsnr_db: [12, 14, 16, 18]\ncode: none\nmin_codewords: 8\n"
                   "min_bit_errors: 0\nmax_frames: 2\nseed: 3\n")
    out = tmp_path / "s.csv"
    plot = tmp_path / "s.svg"
    assert main(["sweep", "dfe", "wdfe", "--config", str(cfg), "--out", str(out),
                 "--plot", str(plot)]) == 0
    assert plot.exists() and len(out.read_text().splitlines()) == 10
    capsys.readouterr()
    assert main(["gap", str(out), "wdfe", "dfe", "--ber", "1e-2"]) == 0
    gap = float(capsys.readouterr().out)
    assert 0 < gap < 1.5
    assert main(["gap", str(out), "wdfe", "dfe", "--ber", "1e-2", "--check", "--expect",
                 "100", "--tol", "0.1"]) == 1


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("M: 8\nseed: 3\n")
    main(["run", "dfe", "--snr", "16", "--config", str(cfg), "--M", "4", *FAST])
    assert '"M": 4' in capsys.readouterr().out.splitlines()[0]


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("modulation: 4\n")
    with pytest.raises(SystemExit):
        main(["run", "dfe", "--snr", "16", "--config", str(cfg)])


def test_invalid_value():
    with pytest.raises(SystemExit):
        main(["run", "dfe", "--snr", "16", "--min-codewords", "0"])


def test_complexity(capsys):
    assert main(["complexity", "--check"]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["mlm_reduction_m4"] < s["sova_reduction_m4"]


def test_unwritable_output(tmp_path):
    with pytest.raises(SystemExit, match="cannot write"):
        main(["run", "dfe", "--snr", "16", "--out", str(tmp_path / "no" / "x.csv"), *FAST])
