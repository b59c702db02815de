import numpy as np
import pytest

from prdetect import constellation as cst
from prdetect.oracle import OracleLimit, exact_dfe3_map, exact_full_map, exact_viterbi


def test_single_symbol_memoryless():
    c = cst.build(4, "unit-delta")
    y = np.array([0.3])
    lam = exact_full_map(y, 0.7, 0.5, c, boundary="zero")
    np.testing.assert_allclose(lam[0], (-(0.3 - c.levels) ** 2 + (0.3 - 1.0) ** 2) / 1.0)


def test_noiseless_recovers(rng):
    c = cst.build(4)
    x = c.levels[rng.integers(0, 4, 4)]
    y = x + 0.7 * np.concatenate(([0.0], x[:-1]))
    lam = exact_full_map(y, 0.7, 0.01, c, boundary="zero")
    np.testing.assert_array_equal(c.levels[lam.argmax(1)], x)
    np.testing.assert_array_equal(exact_viterbi(y, 0.7, c, "zero"), x)


def test_limit():
    c = cst.build(8)
    with pytest.raises(ValueError):
        exact_full_map(np.zeros(5), 0.7, 1.0, c)
    with pytest.raises(ValueError):
        exact_dfe3_map(np.zeros(9), np.ones(9), 0.7, 1.0, c)
    exact_dfe3_map(np.zeros(3), np.full(3, c.levels[4]), 0.7, 1.0, c, limit=OracleLimit(27))


def test_dfe3_posterior_sums_to_one(rng):
    c = cst.build(4)
    x_hat = c.levels[rng.integers(0, 4, 5)]
    gam = exact_dfe3_map(x_hat + 0.1 * rng.standard_normal(5), x_hat, 0.7, 0.1, c)
    p = np.exp(gam)
    p /= p.sum(1, keepdims=True)
    assert np.all((p >= 0) & (p <= 1))
    np.testing.assert_allclose(p.sum(1), 1.0)
    assert np.all(gam[:, 1] == 0)


def test_symmetric_input_symmetric_output():
    c = cst.build(4, "unit-delta")
    y = np.array([0.2, -1.1, 2.5])
    a = exact_full_map(y, 0.5, 0.7, c, boundary="zero")
    b = exact_full_map(-y, 0.5, 0.7, c, boundary="zero")
    # negating the input mirrors the posteriors; compare exp-normalised rows
    pa = np.exp(a - a.max(1, keepdims=True))
    pb = np.exp(b - b.max(1, keepdims=True))
    np.testing.assert_allclose(pa / pa.sum(1, keepdims=True), (pb / pb.sum(1, keepdims=True))[:, ::-1])
