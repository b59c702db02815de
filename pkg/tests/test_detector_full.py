import numpy as np
import pytest

from prdetect import constellation as cst
from prdetect.channel import isi, snr_to_sigma2
from prdetect.detector_full import DetectorConfig, branch_metrics, detect_full, sova_full, viterbi_full
from prdetect.metrics import CsCounter
from prdetect.oracle import exact_full_map, exact_viterbi
from prdetect.trellis import sova_kernel


def frame(rng, M, n, snr, h=0.7):
    c = cst.build(M)
    x = c.levels[rng.integers(0, M, n)]
    s2 = snr_to_sigma2(snr, h)
    return c, x, isi(x, h) + rng.standard_normal(n) * np.sqrt(s2), s2


def memoryless(y, s2, c):
    ref = c.levels[c.ref_index]
    return (-(y[:, None] - c.levels) ** 2 + (y[:, None] - ref) ** 2) / (2 * s2)


@pytest.mark.parametrize("mode", ["log-sum", "max-log"])
def test_h0_is_memoryless(rng, mode):
    c, _, y, s2 = frame(rng, 4, 30, 10, h=0.0)
    lam = detect_full(y, 0.0, s2, c, DetectorConfig(mode))
    np.testing.assert_allclose(lam, memoryless(y, s2, c), atol=1e-9)


def test_sova_h0_is_memoryless(rng):
    c, _, y, s2 = frame(rng, 4, 30, 10, h=0.0)
    np.testing.assert_allclose(sova_full(y, 0.0, s2, c, DetectorConfig(delta=30)),
                               memoryless(y, s2, c), atol=1e-9)


@pytest.mark.parametrize("mode", ["log-sum", "max-log"])
@pytest.mark.parametrize("boundary", ["uniform", "zero"])
def test_matches_oracle(rng, mode, boundary):
    for _ in range(10):
        c, _, y, s2 = frame(rng, 4, 4, rng.uniform(5, 20))
        np.testing.assert_allclose(detect_full(y, 0.7, s2, c, DetectorConfig(mode, boundary=boundary)),
                                   exact_full_map(y, 0.7, s2, c, mode, boundary), atol=1e-9)


def test_reference_column_zero(rng):
    c, _, y, s2 = frame(rng, 8, 50, 20)
    for fn in (detect_full, sova_full):
        assert np.all(fn(y, 0.7, s2, c)[:, c.ref_index] == 0.0)


def test_log_sum_normalises(rng):
    c, _, y, s2 = frame(rng, 4, 40, 12)
    lam = detect_full(y, 0.7, s2, c, DetectorConfig("log-sum"))
    p = np.exp(lam - lam.max(1, keepdims=True))
    p /= p.sum(1, keepdims=True)
    assert np.all(np.isfinite(p)) and np.allclose(p.sum(1), 1.0)


def test_lm_mlm_converge_at_high_snr(rng):
    c = cst.build(4)
    x = c.levels[rng.integers(0, 4, 40)]
    y = isi(x, 0.7)
    gaps = []
    for s2 in (0.1, 0.01, 0.001):
        lm = detect_full(y, 0.7, s2, c, DetectorConfig("log-sum"))
        mlm = detect_full(y, 0.7, s2, c, DetectorConfig("max-log"))
        gaps.append(np.max(np.abs(lm - mlm)))
    assert gaps[0] >= gaps[1] >= gaps[2]


@pytest.mark.parametrize("delta", [1, 3, 10, 64])
def test_sova_hard_decisions_equal_viterbi(rng, delta):
    c, _, y, s2 = frame(rng, 4, 64, 14)
    lam = sova_full(y, 0.7, s2, c, DetectorConfig(delta=delta))
    np.testing.assert_array_equal(c.levels[lam.argmax(1)], viterbi_full(y, 0.7, s2, c))


def test_sova_full_window_equals_mlm(rng):
    for _ in range(5):
        c, _, y, s2 = frame(rng, 4, 64, 13)
        a = sova_full(y, 0.7, s2, c, DetectorConfig(delta=64))
        b = detect_full(y, 0.7, s2, c, DetectorConfig("max-log"))
        np.testing.assert_allclose(a, b, atol=1e-6)


@pytest.mark.parametrize("delta", [1, 2, 5, 10])
def test_sova_window_excess_bounded_by_full_window(rng, delta):
    # a short window minimises over fewer competitors, so excesses can only be larger
    c, _, y, s2 = frame(rng, 4, 64, 13)
    g = branch_metrics(y, 0.7, s2, c)
    z = np.zeros(4)
    short, path, _ = sova_kernel(g, z, z, delta)
    full, path_full, _ = sova_kernel(g, z, z, 64)
    np.testing.assert_array_equal(path, path_full)
    assert np.all(short >= full - 1e-9)
    assert np.all(short[np.arange(65), path] == 0.0)


class TestViterbi:
    def test_noiseless(self, rng):
        c = cst.build(8)
        x = c.levels[rng.integers(0, 8, 100)]
        np.testing.assert_array_equal(viterbi_full(isi(x, 0.7), 0.7, 0.1, c), x)

    def test_matches_enumeration(self, rng):
        for _ in range(10):
            c, _, y, s2 = frame(rng, 4, 4, 8)
            np.testing.assert_array_equal(viterbi_full(y, 0.7, s2, c), exact_viterbi(y, 0.7, c))

    def test_tie_goes_to_lower_index(self):
        c = cst.build(2, "unit-delta")
        np.testing.assert_array_equal(viterbi_full(np.array([0.0]), 0.0, 1.0, c), [-1.0])


def test_counter_attribution(rng):
    c, _, y, s2 = frame(rng, 4, 20, 15)
    cnt = CsCounter()
    detect_full(y, 0.7, s2, c, DetectorConfig("max-log"), cnt)
    sova_full(y, 0.7, s2, c, DetectorConfig(delta=5), cnt)
    assert set(cnt.full) == {"pam-mlm", "pam-sova"}
    assert cnt.full["pam-mlm"] == pytest.approx(3 * 16 * 20, rel=0.1)


def test_branch_metric_shape():
    c = cst.build(4)
    assert branch_metrics(np.zeros(5), 0.7, 1.0, c).shape == (5, 4, 4)


@pytest.mark.parametrize("kw", [{"mode": "exact"}, {"delta": 0}, {"boundary": "open"}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        DetectorConfig(**kw)


def test_sigma2_validation():
    with pytest.raises(ValueError):
        detect_full(np.zeros(3), 0.7, 0.0, cst.build(4))
