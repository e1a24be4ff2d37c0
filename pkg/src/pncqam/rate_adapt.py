"""Rate-adaptive two-way relaying: PNC vs CNC vs four-phase vs direct.

Every phase picks the highest modulation whose BER upper bound (the SER
bound, since a wrong symbol costs at most all of its bits) stays below the
ceiling on every link that must decode in that phase.

Geometry: relay at the origin, ``S1`` at ``(-d1, 0)`` and ``S2`` at
``(d2, 0)``. Destination ``D1`` wants ``S1``'s packet and sits at distance
``d_listener`` from ``S2`` (whose packet it overhears); ``D2`` mirrors it
around ``S1``. By default each destination lies on the relay-centred circle
through its nearby source, so growing ``d_listener`` walks it around the
relay toward the other source.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .channel import noise_power, rician_sample
from .constellation import QAM_SQUARE, from_name
from .pnc_mapping import build_mapping_table

__all__ = [
    "MODULATIONS",
    "SCHEMES",
    "RateParams",
    "Topology",
    "TrialResult",
    "ber_upper_p2p",
    "ber_upper_relay",
    "ber_upper_listener",
    "select_modulation",
    "equalize_power",
    "draw_topology",
    "scheme_throughput",
    "run_trial",
    "run_experiment",
    "EXPERIMENT_COLUMNS",
]

# (id, bits per symbol), in increasing rate
MODULATIONS = (
    ("bpsk", 1),
    ("qpsk", 2),
    ("qam16", 4),
    ("qam32", 5),
    ("qam64", 6),
    ("qam128", 7),
    ("qam256", 8),
)
BITS = dict(MODULATIONS)
SCHEMES = ("pnc", "cnc", "four-phase", "direct")

_CONST = {name: from_name(name) for name, _ in MODULATIONS}
_OVERHEAD = {name: build_mapping_table(c).overhead for name, c in _CONST.items()}


def _d2_over_n0(c, gamma):
    return np.asarray(gamma, dtype=float) / c.energy_per_d2


def ber_upper_p2p(mod, gamma):
    """BER upper bound on an interference-free link."""
    c = _CONST[mod]
    if c.M == 2:
        return analysis.ser_bpsk(gamma)
    if c.kind == QAM_SQUARE:
        return analysis.ser_square_exact(c.M, gamma)
    return analysis.ser_upper(_d2_over_n0(c, gamma))


def ber_upper_relay(mod, gamma):
    """BER upper bound of the relay's coded-symbol decision; ``gamma`` per source."""
    c = _CONST[mod]
    if c.M == 2:
        return analysis.ser_pam_superposed(2, gamma)
    if c.kind == QAM_SQUARE:
        return analysis.ser_superposed(c.M, gamma)
    return analysis.ser_upper(_d2_over_n0(c, gamma))


def ber_upper_listener(mod, gamma, gamma_i):
    """BER upper bound when overhearing under same-modulation interference."""
    c = _CONST[mod]
    if c.M == 2:
        arg = max(0.0, math.sqrt(2.0 * gamma) - math.sqrt(2.0 * gamma_i))
        return analysis.q_func(arg)
    if c.kind == QAM_SQUARE:
        return analysis.g_alpha(analysis.SnrPair(gamma, gamma_i, c.M), 1.0)
    a = math.sqrt(2.0 * _d2_over_n0(c, gamma))
    b = math.sqrt(2.0 * _d2_over_n0(c, gamma_i))
    return analysis.ser_opp_upper_distance(a, b, c.L)


def select_modulation(ber_fns, ber_max):
    """Highest modulation id whose every BER bound is ``<= ber_max``, else ``None``.

    ``ber_fns`` are callables taking a modulation id.
    """
    ber_fns = list(ber_fns)
    if not ber_fns:
        raise ValueError("at least one BER constraint is required")
    for mod, _ in reversed(MODULATIONS):
        if all(f(mod) <= ber_max for f in ber_fns):
            return mod
    return None


def equalize_power(p1, g1, p2, g2, p_max):
    """Lower the stronger transmitter so both arrive at the relay with equal power.

    Powers in dBm, gains linear. Both outputs are capped at ``p_max``.
    """
    if g1 <= 0 or g2 <= 0:
        raise ValueError("gains must be positive")
    p1, p2 = min(p1, p_max), min(p2, p_max)
    r1 = p1 + 10.0 * math.log10(g1)
    r2 = p2 + 10.0 * math.log10(g2)
    if r1 > r2:
        p1 -= r1 - r2
    elif r2 > r1:
        p2 -= r2 - r1
    return p1, p2


@dataclass(frozen=True)
class RateParams:
    """Experiment parameters; powers in dBm, distances in metres."""

    p_max_dbm: float = 10.0
    noise_density_dbm_hz: float = -174.0
    noise_figure_db: float = 6.0
    bandwidth_hz: float = 1e6
    k_factor_db: float = 5.0
    ber_max: float = 1e-3
    symbol_rate: float = 0.5e6
    packet_bits: int = 1000
    d_min: float = 125.0
    d_max: float = 250.0
    placement: str = "ring"
    min_distance: float = 1.0

    @property
    def noise_dbm(self) -> float:
        return noise_power(self.noise_density_dbm_hz, self.noise_figure_db, self.bandwidth_hz)


@dataclass(frozen=True)
class Topology:
    """Node positions as complex numbers (metres)."""

    d_s1_r: float
    d_s2_r: float
    d_listener: float
    s1: complex
    s2: complex
    d1: complex
    d2: complex
    r: complex = 0j

    def dist(self, a, b, floor=1.0):
        return max(abs(getattr(self, a) - getattr(self, b)), floor)


def draw_topology(d_listener, rng, params: RateParams = RateParams(), phi=None):
    """Random source-relay distances and listener placement.

    ``placement`` chooses where each destination goes, always at
    ``d_listener`` from the source it overhears:

    * ``"ring"``: on the relay-centred circle through that source (pinned to
      the opposite point once ``d_listener`` exceeds the diameter),
    * ``"random"``: uniformly random direction,
    * ``"beyond"``: on the line, on the far side of the source,
    * ``"toward"``: on the line, toward the relay.
    """
    if d_listener < 0:
        raise ValueError("listener distance must be non-negative")
    a = rng.uniform(params.d_min, params.d_max)
    b = rng.uniform(params.d_min, params.d_max)
    if phi is None:
        phi = rng.uniform(0.0, 2.0 * math.pi, 2)
    s1, s2 = complex(-a, 0.0), complex(b, 0.0)
    if params.placement == "ring":
        t1 = 2.0 * math.asin(min(1.0, d_listener / (2.0 * b)))
        t2 = 2.0 * math.asin(min(1.0, d_listener / (2.0 * a)))
        return Topology(a, b, d_listener, s1, s2, complex(b * np.exp(1j * t1)), complex(-a * np.exp(1j * t2)))
    if params.placement == "random":
        off1, off2 = np.exp(1j * phi[0]), np.exp(1j * phi[1])
    elif params.placement == "beyond":
        off1, off2 = 1.0, -1.0
    elif params.placement == "toward":
        off1, off2 = -1.0, 1.0
    else:
        raise ValueError(f"unknown placement {params.placement!r}")
    d1 = s2 + d_listener * off1
    d2 = s1 + d_listener * off2
    return Topology(a, b, d_listener, s1, s2, complex(d1), complex(d2))


@dataclass
class SchemeResult:
    modulations: tuple
    durations: tuple
    throughput: float


@dataclass
class TrialResult:
    """Per-scheme outcome of one topology/fading draw."""

    topology: Topology
    seed: object
    schemes: dict = field(default_factory=dict)

    def throughput(self, scheme):
        return self.schemes[scheme].throughput


class _Fading:
    """Independent Rician gain per (link, phase); same keys give the same draw."""

    def __init__(self, k_db, rng):
        self.k_db = k_db
        self.rng = rng
        self.cache = {}

    def power(self, key):
        if key not in self.cache:
            self.cache[key] = abs(rician_sample(self.k_db, self.rng)) ** 2
        return self.cache[key]


def _snr(p_dbm, gain, params):
    return 10.0 ** ((p_dbm - params.noise_dbm) / 10.0) * gain


def _gain(topo, a, b, fading, phase, params):
    r = topo.dist(a, b, params.min_distance)
    return fading.power((a, b, phase)) / r**4


def _finish(mods, loads, params):
    if any(m is None for m in mods):
        return SchemeResult(tuple(mods), (), 0.0)
    durs = tuple(load / (params.symbol_rate * BITS[m]) for m, load in zip(mods, loads))
    return SchemeResult(tuple(mods), durs, 2.0 * params.packet_bits / sum(durs))


def _p2p_phase(topo, tx, rxs, fading, phase, params, p_dbm=None):
    p = params.p_max_dbm if p_dbm is None else p_dbm
    gammas = [_snr(p, _gain(topo, tx, rx, fading, phase, params), params) for rx in rxs]
    return select_modulation([lambda m, g=g: ber_upper_p2p(m, g) for g in gammas], params.ber_max)


def scheme_throughput(scheme, topo: Topology, fading, params: RateParams = RateParams()):
    """Modulation, phase durations and throughput of one scheme on one draw.

    ``fading`` is a ``_Fading`` store (or any object with ``power(key)``).
    Throughput is ``2 * packet_bits / total duration``, 0 if any phase has
    no feasible modulation.
    """
    B = params.packet_bits
    if scheme == "pnc":
        g1 = _gain(topo, "s1", "r", fading, "pnc1", params)
        g2 = _gain(topo, "s2", "r", fading, "pnc1", params)
        p1, p2 = equalize_power(params.p_max_dbm, g1, params.p_max_dbm, g2, params.p_max_dbm)
        gamma_r = _snr(p1, g1, params)
        fns = [lambda m: ber_upper_relay(m, gamma_r)]
        # each listener hears its near source under the far source's interference
        for listener, near, pn, far, pf in (("d1", "s2", p2, "s1", p1), ("d2", "s1", p1, "s2", p2)):
            gi = _snr(pn, _gain(topo, near, listener, fading, "pnc1", params), params)
            gj = _snr(pf, _gain(topo, far, listener, fading, "pnc1", params), params)
            fns.append(lambda m, gi=gi, gj=gj: ber_upper_listener(m, gi, gj))
        m1 = select_modulation(fns, params.ber_max)
        m2 = _p2p_phase(topo, "r", ("d1", "d2"), fading, "pnc2", params)
        load2 = B * (_OVERHEAD[m1] if m1 is not None else 1.0)
        return _finish((m1, m2), (B, load2), params)
    if scheme == "cnc":
        m1 = _p2p_phase(topo, "s1", ("r", "d2"), fading, "cnc1", params)
        m2 = _p2p_phase(topo, "s2", ("r", "d1"), fading, "cnc2", params)
        m3 = _p2p_phase(topo, "r", ("d1", "d2"), fading, "cnc3", params)
        return _finish((m1, m2, m3), (B, B, B), params)
    if scheme == "four-phase":
        mods = (
            _p2p_phase(topo, "s1", ("r",), fading, "fp1", params),
            _p2p_phase(topo, "r", ("d1",), fading, "fp2", params),
            _p2p_phase(topo, "s2", ("r",), fading, "fp3", params),
            _p2p_phase(topo, "r", ("d2",), fading, "fp4", params),
        )
        return _finish(mods, (B,) * 4, params)
    if scheme == "direct":
        mods = (
            _p2p_phase(topo, "s1", ("d1",), fading, "dt1", params),
            _p2p_phase(topo, "s2", ("d2",), fading, "dt2", params),
        )
        return _finish(mods, (B, B), params)
    raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def run_trial(d_listener, seed, params: RateParams = RateParams()):
    """All four schemes on one random draw.

    The topology stream depends only on ``seed``, so the same seed gives the
    same source positions at every listener distance.
    """
    ss = np.random.SeedSequence(seed)
    topo_rng, fade_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    topo = draw_topology(d_listener, topo_rng, params)
    fading = _Fading(params.k_factor_db, fade_rng)
    res = TrialResult(topo, seed)
    for scheme in SCHEMES:
        res.schemes[scheme] = scheme_throughput(scheme, topo, fading, params)
    return res


EXPERIMENT_COLUMNS = ["distance_m", "scheme", "mean_throughput_bps", "ci95_half_width_bps", "n_seeds"]


def run_experiment(distances, n_seeds, params: RateParams = RateParams(), seed=0, path=None):
    """Mean throughput per scheme and listener distance.

    Returns ``(csv_text, summary)`` where ``summary[scheme]`` is an array of
    shape ``(len(distances), 2)`` holding mean and 95% half-width.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1")
    distances = [float(d) for d in distances]
    summary = {s: np.zeros((len(distances), 2)) for s in SCHEMES}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EXPERIMENT_COLUMNS)
    for i, d in enumerate(distances):
        tp = {s: np.empty(n_seeds) for s in SCHEMES}
        for k in range(n_seeds):
            res = run_trial(d, (seed, k), params)
            for s in SCHEMES:
                tp[s][k] = res.throughput(s)
        for s in SCHEMES:
            mean = float(tp[s].mean())
            half = float(1.96 * tp[s].std(ddof=1) / math.sqrt(n_seeds)) if n_seeds > 1 else 0.0
            summary[s][i] = mean, half
            w.writerow([repr(d), s, repr(mean), repr(half), n_seeds])
    text = buf.getvalue()
    if path is not None:
        path = Path(path)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write throughput CSV to {path}: {exc}") from exc
    return text, summary
