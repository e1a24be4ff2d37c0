import math

import numpy as np
import pytest

from pncqam import analysis
from pncqam.rate_adapt import (
    MODULATIONS,
    SCHEMES,
    RateParams,
    Topology,
    ber_upper_listener,
    ber_upper_p2p,
    ber_upper_relay,
    draw_topology,
    equalize_power,
    run_experiment,
    run_trial,
    scheme_throughput,
    select_modulation,
)

NAMES = [m for m, _ in MODULATIONS]


class _NoFading:
    def power(self, key):
        return 1.0


def _line(a, b, d1, d2):
    return Topology(a, b, 0.0, complex(-a, 0), complex(b, 0), d1, d2)


def test_select_modulation_cases():
    assert select_modulation([lambda m: ber_upper_p2p(m, 1e6)], 1e-3) == "qam256"
    assert select_modulation([lambda m: ber_upper_p2p(m, 1e-3)], 1e-3) is None
    assert select_modulation([lambda m: 0.0, lambda m: 1.0 if m != "bpsk" else 0.0], 1e-3) == "bpsk"
    with pytest.raises(ValueError):
        select_modulation([], 1e-3)


def test_bounds_increase_with_order_at_fixed_snr():
    # the cross sizes use a looser bound, so compare within the square family
    square = ["bpsk", "qpsk", "qam16", "qam64", "qam256"]
    for g in (10.0, 100.0, 1000.0):
        vals = [ber_upper_p2p(m, g) for m in square]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_relay_and_listener_bounds_dominate_p2p():
    for m in NAMES:
        for g in (5.0, 50.0, 500.0, 5000.0):
            assert ber_upper_relay(m, g) >= ber_upper_p2p(m, g) - 1e-15
            assert ber_upper_listener(m, g, 0.0) >= ber_upper_p2p(m, g) - 1e-15
            assert ber_upper_listener(m, g, g / 100) >= ber_upper_listener(m, g, 0.0)


def test_square_bounds_match_analysis():
    assert ber_upper_p2p("qam16", 40.0) == analysis.ser_square_exact(16, 40.0)
    assert ber_upper_relay("qam64", 400.0) == analysis.ser_superposed(64, 400.0)


def test_equalize_power():
    p1, p2 = equalize_power(10.0, 16.0, 10.0, 1.0, 10.0)
    assert p2 == 10.0
    assert p1 == pytest.approx(10.0 - 10 * math.log10(16.0))
    assert p1 == pytest.approx(-2.04, abs=0.01)
    assert equalize_power(10.0, 1.0, 10.0, 1.0, 10.0) == (10.0, 10.0)
    assert equalize_power(20.0, 1.0, 5.0, 1.0, 10.0) == (5.0, 5.0)
    with pytest.raises(ValueError):
        equalize_power(0.0, 0.0, 0.0, 1.0, 0.0)


def test_colocated_pnc_hits_peak_rate():
    # short symmetric links: every phase runs 256-QAM
    p = RateParams()
    topo = _line(2.0, 2.0, 2.0 + 0j, -2.0 + 0j)
    res = scheme_throughput("pnc", topo, _NoFading(), p)
    assert res.modulations == ("qam256", "qam256")
    assert res.throughput == pytest.approx(8 * p.symbol_rate)


def test_theoretical_scheme_ratios_at_equal_rates():
    p = RateParams()
    topo = _line(2.0, 2.0, 2.0 + 0j, -2.0 + 0j)
    tp = {s: scheme_throughput(s, topo, _NoFading(), p).throughput for s in ("pnc", "cnc", "four-phase")}
    assert tp["cnc"] / tp["pnc"] == pytest.approx(2 / 3)
    assert tp["four-phase"] / tp["pnc"] == pytest.approx(1 / 2)


def test_cnc_at_least_four_phase_on_symmetric_links():
    p = RateParams()
    for r in (50.0, 150.0, 250.0, 400.0):
        topo = _line(r, r, r + 0j, -r + 0j)
        cnc = scheme_throughput("cnc", topo, _NoFading(), p).throughput
        fp = scheme_throughput("four-phase", topo, _NoFading(), p).throughput
        assert cnc >= fp


def test_infeasible_link_gives_zero():
    topo = _line(1e5, 1e5, 1e5 + 0j, -1e5 + 0j)
    for s in SCHEMES:
        assert scheme_throughput(s, topo, _NoFading()).throughput == 0.0
    with pytest.raises(ValueError):
        scheme_throughput("mesh", topo, _NoFading())


def test_ring_placement_geometry():
    rng = np.random.default_rng(0)
    t = draw_topology(60.0, rng)
    assert abs(t.d1 - t.s2) == pytest.approx(60.0)
    assert abs(t.d2 - t.s1) == pytest.approx(60.0)
    assert abs(t.d1) == pytest.approx(t.d_s2_r)
    assert 125 <= t.d_s1_r <= 250 and 125 <= t.d_s2_r <= 250


@pytest.mark.parametrize("placement", ["random", "beyond", "toward"])
def test_other_placements(placement):
    t = draw_topology(40.0, np.random.default_rng(1), RateParams(placement=placement))
    assert abs(t.d1 - t.s2) == pytest.approx(40.0)
    with pytest.raises(ValueError):
        draw_topology(-1.0, np.random.default_rng(1))
    with pytest.raises(ValueError):
        draw_topology(1.0, np.random.default_rng(1), RateParams(placement="nowhere"))


def test_trial_common_topology_across_distances():
    a = run_trial(0.0, (0, 5))
    b = run_trial(100.0, (0, 5))
    assert a.topology.d_s1_r == b.topology.d_s1_r
    assert run_trial(30.0, 7).schemes == run_trial(30.0, 7).schemes


def test_experiment_output_and_trends(tmp_path):
    out = tmp_path / "tp.csv"
    text, summary = run_experiment([0.0, 100.0, 200.0], 60, seed=1, path=out)
    assert out.read_text() == text
    assert len(text.strip().splitlines()) == 1 + 3 * len(SCHEMES)
    pnc, cnc, direct = summary["pnc"][:, 0], summary["cnc"][:, 0], summary["direct"][:, 0]
    assert pnc[0] > cnc[0] and pnc[0] > pnc[-1]
    assert direct[-1] > direct[0]
    assert text == run_experiment([0.0, 100.0, 200.0], 60, seed=1)[0]
    with pytest.raises(ValueError):
        run_experiment([0.0], 0)
