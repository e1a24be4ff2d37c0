import csv
import io
import math

import mpmath as mp
import numpy as np
import pytest

from pncqam import analysis
from pncqam.constellation import from_name
from pncqam.pnc_mapping import build_mapping_table, decode_expected
from pncqam.simulator import (
    SWEEP_COLUMNS,
    EndToEndConfig,
    ErrorStats,
    SimConfig,
    overhearing_configs,
    run_end_to_end,
    run_opportunistic,
    run_point_to_point,
    run_relay_phase1,
    sweep,
)


def relay_ser_oracle(M, gamma):
    """Exact SER of the per-axis slicer on the superposed grid.

    Along one axis the superposed amplitude is the sum of two uniform
    L-ary symbols, so its index has a triangular distribution; only the two
    end points (each with probability 1/L^2) have a single neighbour.
    """
    L = math.isqrt(M)
    q = mp.erfc(mp.sqrt(mp.mpf(3) * gamma / (M - 1)) / mp.sqrt(2)) / 2
    p_axis = (2 - mp.mpf(2) / L**2) * q
    return float(1 - (1 - p_axis) ** 2)


def test_error_stats_arithmetic():
    a = ErrorStats(100, 10, 400, 12)
    b = ErrorStats(100, 0, 400, 0)
    c = a + b
    assert (c.ser, c.ber) == (0.05, 0.015)
    assert c.ser_std == pytest.approx(math.sqrt(0.05 * 0.95 / 200))
    lo, hi = c.ci95()
    assert lo < 0.05 < hi
    assert ErrorStats().ser == 0.0 and ErrorStats().ser_std == 0.0


@pytest.mark.parametrize("runner", [run_point_to_point, run_relay_phase1, run_opportunistic])
def test_deterministic(runner):
    cfg = SimConfig("qam16", 20_000, snr_db=12.0, power_ratio_db=15.0, seed=3)
    a, b = runner(cfg), runner(cfg)
    assert a == b
    assert runner(SimConfig("qam16", 20_000, snr_db=12.0, power_ratio_db=15.0, seed=4)) != a


@pytest.mark.parametrize("name", ["bpsk", "pam4", "qpsk", "qam16", "qam64", "qam8", "qam32"])
def test_noiseless_is_error_free(name):
    cfg = SimConfig(name, 5000, snr_db=None, seed=1)
    assert run_point_to_point(cfg).n_symbol_errors == 0
    assert run_relay_phase1(cfg).n_symbol_errors == 0
    assert run_opportunistic(cfg).n_symbol_errors == 0


def test_bad_configs():
    with pytest.raises(ValueError):
        SimConfig(n_symbols=0)
    with pytest.raises(ValueError):
        SimConfig(power_ratio_db=float("nan"))
    with pytest.raises(ValueError):
        run_point_to_point(SimConfig("qam16", 10, snr_db=-math.inf))


@pytest.mark.parametrize("M, snr_db", [(4, 8.0), (16, 15.0), (64, 21.0)])
def test_p2p_matches_exact_ser(M, snr_db):
    s = run_point_to_point(SimConfig(f"qam{M}", 300_000, snr_db=snr_db, seed=M))
    want = analysis.ser_square_exact(M, 10 ** (snr_db / 10))
    assert abs(s.ser - want) <= 4 * math.sqrt(want * (1 - want) / s.n_symbols)
    lo, hi = analysis.ber_bounds(s.ser, M)
    assert lo <= s.ber <= hi


@pytest.mark.parametrize("M, snr_db", [(4, 9.0), (16, 16.0), (64, 22.0)])
def test_relay_matches_triangular_oracle(M, snr_db):
    s = run_relay_phase1(SimConfig(f"qam{M}", 400_000, snr_db=snr_db, seed=10 + M))
    want = relay_ser_oracle(M, 10 ** (snr_db / 10))
    assert abs(s.ser - want) <= 4 * math.sqrt(want * (1 - want) / s.n_symbols)


def test_opportunistic_without_interference_is_p2p():
    a = run_point_to_point(SimConfig("qam16", 50_000, snr_db=14.0, seed=2))
    b = run_opportunistic(SimConfig("qam16", 50_000, snr_db=14.0, power_ratio_db=math.inf, seed=2))
    assert a == b


def test_opportunistic_within_g_bounds():
    cfg = SimConfig("qam16", 200_000, target_ber=1e-3, power_ratio_db=20.0, seed=5)
    s = run_opportunistic(cfg)
    snr = analysis.SnrPair(cfg.gamma, cfg.gamma / 100.0, 16)
    assert analysis.g_alpha(snr, 0.0) <= s.ser <= analysis.g_alpha(snr, 1.0)


def test_end_to_end_noiseless():
    for name in ("bpsk", "pam4", "qam16", "qam8", "qam32"):
        out = run_end_to_end(EndToEndConfig(name, 4000, overhear_ratio_db=30.0, seed=1))
        assert out["D1"].n_symbol_errors == 0 and out["D2"].n_symbol_errors == 0


def test_end_to_end_broadcast_noise_only_matches_p2p():
    n = 200_000
    out = run_end_to_end(EndToEndConfig("qam16", n, broadcast_snr_db=15.0, seed=9))
    want = analysis.ser_square_exact(16, 10**1.5)
    tol = 4 * math.sqrt(want / n)
    for d in ("D1", "D2"):
        assert abs(out[d].ser - want) <= tol


def test_end_to_end_is_deterministic():
    cfg = EndToEndConfig("qam32", 3000, 20.0, 20.0, 20.0, 10.0, seed=4)
    assert run_end_to_end(cfg) == run_end_to_end(cfg)


def test_wrong_side_information_always_corrupts():
    # with a one-to-one modular rule a wrong overheard symbol can never
    # yield the right decoded symbol
    for name in ("pam4", "qam16", "qam8"):
        c = from_name(name)
        t = build_mapping_table(c)
        s1, s2, k = np.meshgrid(np.arange(c.M), np.arange(c.M), np.arange(c.M), indexing="ij")
        s1, s2, k = s1.ravel(), s2.ravel(), k.ravel()
        wrong = k != s2
        got = decode_expected(t, t.coded(s1, s2)[wrong], k[wrong], on_failure="flag")
        assert np.all(got != s1[wrong])


def test_sweep_csv():
    cfgs = [SimConfig("qam16", 2000, snr_db=10.0, seed=s) for s in range(2)]
    text = sweep("p2p", cfgs)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2
    assert list(rows[0]) == SWEEP_COLUMNS
    assert float(rows[0]["snr_db"]) == pytest.approx(10.0)
    assert float(rows[0]["ser_formula"]) == pytest.approx(analysis.ser_square_exact(16, 10.0))
    assert text == sweep("p2p", cfgs)


def test_sweep_opp_columns_and_empty(tmp_path):
    text = sweep("opp", overhearing_configs(Ms=(4,), ratios_db=(10,), n_symbols=1000))
    row = next(csv.DictReader(io.StringIO(text)))
    assert float(row["g0"]) <= float(row["g_half"]) <= float(row["g1"])
    p = tmp_path / "x.csv"
    empty = sweep("relay", [], path=p)
    assert empty.strip() == ",".join(SWEEP_COLUMNS)
    assert p.read_text() == empty
    with pytest.raises(ValueError):
        sweep("nope", [])


def test_overhearing_configs_seeds_unique():
    cfgs = overhearing_configs()
    assert len(cfgs) == 36
    assert len({c.seed for c in cfgs}) == 36
