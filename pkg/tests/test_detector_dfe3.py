import numpy as np
import pytest

from prdetect import constellation as cst
from prdetect.channel import isi, snr_to_sigma2
from prdetect.detector_dfe3 import (C, L, R, BiasedState, Dfe3SovaStream, branch_metrics, dfe3_map,
                                    dfe3_sova, omega)
from prdetect.equalizers import dfe
from prdetect.oracle import exact_dfe3_map


def dfe_frame(rng, M, n, snr, h=0.7):
    c = cst.build(M)
    x = c.levels[rng.integers(0, M, n)]
    s2 = snr_to_sigma2(snr, h)
    y_eq, x_hat = dfe(isi(x, h) + rng.standard_normal(n) * np.sqrt(s2), h, c)
    return c, x, y_eq, x_hat, s2


def test_omega():
    c = cst.build(4, "unit-delta")
    np.testing.assert_array_equal(omega(c), [-2.0, 0.0, 2.0])
    assert BiasedState.c.omega(2.0) == 0.0 and BiasedState.l.omega(2.0) == -BiasedState.r.omega(2.0)


class TestBranchMetrics:
    c = cst.build(4, "unit-delta")

    def test_centre_example(self):
        g = branch_metrics(1.0, 1.0, 0.5, 0.7, self.c)
        assert g[C, C] == 0.0
        assert g[C, L] == g[C, R] == pytest.approx(-4.0 / (2 * 0.5))

    def test_fig_example(self):
        s2 = 0.3
        g = branch_metrics(-0.6, -1.0, s2, 0.7, self.c)
        assert g[C, C] == pytest.approx(-(0.4 ** 2) / (2 * s2))
        assert g[L, C] == pytest.approx(-(1.8 ** 2) / (2 * s2))

    def test_blocking(self):
        assert np.all(np.isneginf(branch_metrics(-3.2, -3.0, 1.0, 0.7, self.c)[:, L]))
        assert np.all(np.isneginf(branch_metrics(3.2, 3.0, 1.0, 0.7, self.c)[:, R]))
        inner = branch_metrics(1.2, 1.0, 1.0, 0.7, self.c)
        assert np.all(np.isfinite(inner))

    def test_centre_never_blocked(self, rng):
        c, _, y_eq, x_hat, s2 = dfe_frame(rng, 8, 500, 20)
        assert np.all(np.isfinite(branch_metrics(y_eq, x_hat, s2, 0.7, c)[:, :, C]))

    def test_sigma2_validation(self):
        with pytest.raises(ValueError):
            branch_metrics(0.0, 1.0, 0.0, 0.7, self.c)


class TestMap:
    @pytest.mark.parametrize("mode", ["log-sum", "max-log"])
    def test_matches_oracle(self, rng, mode):
        for _ in range(10):
            c, _, y_eq, x_hat, s2 = dfe_frame(rng, 4, 5, rng.uniform(8, 18))
            a = dfe3_map(y_eq, x_hat, s2, 0.7, c, mode)
            b = exact_dfe3_map(y_eq, x_hat, 0.7, s2, c, mode)
            assert np.array_equal(np.isneginf(a), np.isneginf(b))
            fin = np.isfinite(b)
            np.testing.assert_allclose(a[fin], b[fin], atol=1e-9)

    def test_outer_decisions_block_one_side(self):
        c = cst.build(4, "unit-delta")
        x_hat = np.array([-3.0, 3.0, -3.0, 3.0, 1.0])
        gam = dfe3_map(x_hat + 0.1, x_hat, 0.5, 0.7, c)
        # gam[k + 1] is the state produced by the decision x_hat[k]
        np.testing.assert_array_equal(np.isneginf(gam[1:, L]), x_hat[:-1] == -3.0)
        np.testing.assert_array_equal(np.isneginf(gam[1:, R]), x_hat[:-1] == 3.0)
        assert np.all(np.isneginf(gam[0, [L, R]]))
        assert np.all(gam[:, C] == 0)

    def test_noiseless_centre_dominates(self, rng):
        c = cst.build(4)
        x = c.levels[rng.integers(0, 4, 100)]
        y_eq, x_hat = dfe(isi(x, 0.7), 0.7, c)
        gam = dfe3_map(y_eq, x_hat, 0.05, 0.7, c)
        assert np.all(gam[:, [L, R]] < 0)

    def test_log_sum_posterior(self, rng):
        c, _, y_eq, x_hat, s2 = dfe_frame(rng, 4, 100, 14)
        p = np.exp(dfe3_map(y_eq, x_hat, s2, 0.7, c, "log-sum"))
        p /= p.sum(1, keepdims=True)
        np.testing.assert_allclose(p.sum(1), 1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dfe3_map(np.zeros(3), np.zeros(2), 1.0, 0.7, cst.build(4))


class TestSova:
    def test_full_window_equals_mlm(self, rng):
        for _ in range(5):
            c, _, y_eq, x_hat, s2 = dfe_frame(rng, 4, 64, 13)
            a = dfe3_sova(y_eq, x_hat, s2, 0.7, c, delta=64)
            b = dfe3_map(y_eq, x_hat, s2, 0.7, c, "max-log")
            assert np.array_equal(np.isneginf(a), np.isneginf(b))
            fin = np.isfinite(b)
            np.testing.assert_allclose(a[fin], b[fin], atol=1e-6)

    def test_sign_convention_pinned(self, rng):
        c, _, y_eq, x_hat, s2 = dfe_frame(rng, 4, 64, 25)
        gam = dfe3_sova(y_eq, x_hat, s2, 0.7, c, delta=10)
        assert np.all(gam[:, [L, R]] < 0)

    def test_path_avoids_blocked(self, rng):
        for _ in range(10):
            c, _, y_eq, x_hat, s2 = dfe_frame(rng, 4, 200, 12)
            _, path = dfe3_sova(y_eq, x_hat, s2, 0.7, c, 10, return_path=True)
            g = branch_metrics(y_eq, x_hat, s2, 0.7, c)
            nxt = np.append(path[1:], C)
            assert np.all(np.isfinite(g[np.arange(200), path, nxt]))

    def test_delta_validation(self):
        with pytest.raises(ValueError):
            dfe3_sova(np.zeros(3), np.zeros(3), 1.0, 0.7, cst.build(4), delta=0)

    def test_stream_matches_frame(self, rng):
        c, _, y_eq, x_hat, s2 = dfe_frame(rng, 4, 40, 13)
        st = Dfe3SovaStream(s2, 0.7, c, delta=40)
        out = []
        for a, b in zip(y_eq, x_hat):
            out += st.push(a, b)
        assert out == []
        out = st.finish()
        assert [k for k, _ in out] == list(range(40))
        np.testing.assert_allclose(np.array([g for _, g in out]),
                                   dfe3_sova(y_eq, x_hat, s2, 0.7, c, delta=40), atol=1e-9)

    def test_stream_latency(self, rng):
        c, _, y_eq, x_hat, s2 = dfe_frame(rng, 4, 30, 13)
        st = Dfe3SovaStream(s2, 0.7, c, delta=5)
        emitted = [len(st.push(a, b)) for a, b in zip(y_eq, x_hat)]
        assert sum(emitted[:6]) == 0 and all(e == 1 for e in emitted[6:])
        assert len(st.finish()) == 6


def test_centre_column_zero_all_modes(rng):
    c, _, y_eq, x_hat, s2 = dfe_frame(rng, 8, 300, 20)
    for gam in (dfe3_map(y_eq, x_hat, s2, 0.7, c, "log-sum"),
                dfe3_map(y_eq, x_hat, s2, 0.7, c, "max-log"),
                dfe3_sova(y_eq, x_hat, s2, 0.7, c, 10)):
        assert np.all(gam[:, C] == 0.0)
