import numpy as np
import pytest

from prdetect.channel import PrChannelConfig, make_rng, sigma2_to_snr, snr_to_sigma2, transmit


def test_snr_conventions():
    assert snr_to_sigma2(0.0, 0.0) == pytest.approx(1.0)
    assert sigma2_to_snr(1.0, 0.7) == pytest.approx(10 * np.log10(1.49))
    assert sigma2_to_snr(snr_to_sigma2(17.3, 0.7), 0.7) == pytest.approx(17.3)


def test_noiseless_pr():
    y = transmit(np.array([1.0, 1.0]), PrChannelConfig(0.7, 1e-300))
    np.testing.assert_allclose(y, [1.0, 1.7])


def test_identity_channel():
    x = np.array([1.0, -3.0, 3.0])
    np.testing.assert_allclose(transmit(x, PrChannelConfig(0.0, 1e-300)), x)


def test_empty():
    assert transmit(np.array([]), PrChannelConfig(0.7, 1.0)).size == 0


def test_noise_variance():
    cfg = PrChannelConfig(0.7, 0.3, seed=4)
    x = make_rng(1).choice([-1.0, 1.0], 10 ** 6)
    y = transmit(x, cfg)
    n = y - x - 0.7 * np.concatenate(([0.0], x[:-1]))
    assert abs(n.var() / 0.3 - 1) < 0.01


def test_seed_reproducible():
    x = np.ones(100)
    cfg = PrChannelConfig(0.5, 0.2, seed=9)
    np.testing.assert_array_equal(transmit(x, cfg), transmit(x, cfg))
    assert not np.array_equal(transmit(x, cfg), transmit(x, PrChannelConfig(0.5, 0.2, seed=10)))


def test_workers_get_distinct_streams():
    assert make_rng(1, 0).random() != make_rng(1, 1).random()


@pytest.mark.parametrize("kw", [{"sigma2": 0.0}, {"sigma2": -1.0}, {"h": 1.0}, {"h": -0.1}])
def test_config_validation(kw):
    args = {"h": 0.5, "sigma2": 1.0} | kw
    with pytest.raises(ValueError):
        PrChannelConfig(**args)
