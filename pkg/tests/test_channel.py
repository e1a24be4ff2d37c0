import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pncqam.channel import (
    LinkBudget,
    apply_awgn,
    db_to_linear,
    linear_to_db,
    noise_power,
    path_gain,
    rician_sample,
    spawn_rngs,
)


def test_noise_power_defaults():
    assert noise_power() == pytest.approx(-108.0)
    assert noise_power(bw_hz=2e6) == pytest.approx(-104.99, abs=0.005)
    with pytest.raises(ValueError):
        noise_power(bw_hz=0)


def test_path_gain():
    assert path_gain(250.0) == pytest.approx(2.56e-10, rel=1e-12)
    assert path_gain(1.0) == 1.0
    np.testing.assert_allclose(path_gain(np.array([1.0, 2.0])), [1.0, 1 / 16])
    with pytest.raises(ValueError):
        path_gain(0.0)


def test_rician_mean_power():
    rng = np.random.default_rng(1)
    h = rician_sample(5.0, rng, 1_000_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.005)


def test_rician_limits():
    rng = np.random.default_rng(2)
    h = rician_sample(math.inf, rng, 100)
    np.testing.assert_allclose(np.abs(h), 1.0)
    r = rician_sample(-math.inf, rng, 200_000)
    assert np.mean(np.abs(r) ** 2) == pytest.approx(1.0, abs=0.01)
    assert isinstance(rician_sample(5.0, rng), complex)


def test_rician_k_factor():
    rng = np.random.default_rng(3)
    K = 10 ** 0.5
    h = rician_sample(5.0, rng, 400_000)
    # second and fourth moments determine K
    m2 = np.mean(np.abs(h) ** 2)
    m4 = np.mean(np.abs(h) ** 4)
    want = 2 - (K / (K + 1)) ** 2
    assert m4 / m2**2 == pytest.approx(want, rel=0.01)


def test_awgn_variance():
    rng = np.random.default_rng(4)
    y = apply_awgn(np.zeros(500_000), 0.3, rng)
    assert np.var(y.real) == pytest.approx(0.3, rel=0.01)
    assert np.var(y.imag) == pytest.approx(0.3, rel=0.01)
    x = np.ones(3)
    np.testing.assert_array_equal(apply_awgn(x, 0.0, rng), x)
    with pytest.raises(ValueError):
        apply_awgn(x, -1.0, rng)


def test_spawn_rngs_deterministic():
    a = [g.integers(0, 1 << 30) for g in spawn_rngs(7, 3)]
    b = [g.integers(0, 1 << 30) for g in spawn_rngs(7, 3)]
    assert a == b and len(set(a)) == 3


@given(st.floats(-100, 100), st.floats(1.0, 1000.0), st.floats(-5, 5))
def test_link_budget_db_and_linear_agree(p_tx, r, hdb):
    h = 10 ** (hdb / 20)
    lb = LinkBudget(p_tx, r, -108.0, h)
    assert 10 * math.log10(lb.snr) == pytest.approx(lb.snr_db, abs=1e-9)
    assert lb.rx_power_dbm - (-108.0) == pytest.approx(lb.snr_db, abs=1e-9)


def test_link_budget_example():
    lb = LinkBudget(10.0, 100.0, -108.0)
    assert lb.snr_db == pytest.approx(10 + 108 - 80)
    with pytest.raises(ValueError):
        LinkBudget(10.0, 0.0, -108.0)


def test_db_round_trip():
    x = np.array([1e-12, 0.5, 1.0, 1e9])
    np.testing.assert_allclose(db_to_linear(linear_to_db(x)), x, rtol=1e-12)
