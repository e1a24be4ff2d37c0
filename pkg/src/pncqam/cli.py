"""Command-line entry point: ``pncqam <subcommand> [options]``.

Every subcommand writes CSV, to stdout or to ``--out``. With ``--out`` a
``<out>.manifest.json`` file is written next to the CSV; its ``argv`` entry
reruns the exact command.

Exit codes: 0 success, 1 invalid input, 2 Exclusive Law violation (``verify``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__, analysis
from .constellation import QAM_SQUARE, from_name
from .pnc_mapping import build_mapping_table, verify_exclusive_law, xor_mapping_table
from .rate_adapt import RateParams, run_experiment
from .simulator import SWEEP_COLUMNS, SimConfig, sweep

SWEEP_HELP = "CSV columns: " + ", ".join(SWEEP_COLUMNS)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def parse_grid(text):
    """``"a:b:step"`` (inclusive), ``"a,b,c"`` or a single number."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(max(n, 0))]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:step, a,b,c or a number") from None


def read_config(path):
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _modulation(text):
    try:
        from_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text.lower()


def _write_rows(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_table(a):
    c = from_name(a.mod, labeling=a.labeling, avg_energy=a.energy)
    rows = [(i, float(p.real), float(p.imag), c.labels[i]) for i, p in enumerate(c.points)]
    return _write_rows(["index", "re", "im", "bits"], rows), 0


def cmd_map(a):
    c = from_name(a.mod, labeling=a.labeling)
    t = build_mapping_table(c)
    reach = t.reachable
    n = t.grid_codes.shape[0]
    rows = []
    if c.kind == "pam":
        for j in range(n):
            code = int(t.grid_codes[j, 0])
            rows.append((j, float((2 * j - (n - 1)) * c.scale), 0.0, code, t.coded_bits(code), int(reach[j, 0])))
        header = ["j", "re", "im", "coded_index", "coded_bits", "reachable"]
    else:
        for l in range(n):
            for l2 in range(n):
                code = int(t.grid_codes[l, l2])
                re, im = (2 * l - (n - 1)) * c.scale, (2 * l2 - (n - 1)) * c.scale
                rows.append((l, l2, float(re), float(im), code, t.coded_bits(code), int(reach[l, l2])))
        header = ["l", "l2", "re", "im", "coded_index", "coded_bits", "reachable"]
    return _write_rows(header, rows), 0


def cmd_verify(a):
    c = from_name(a.mod, labeling=a.labeling)
    t = build_mapping_table(c) if a.mapping == "modular" else xor_mapping_table(c)
    v = verify_exclusive_law(t)
    rows = [(c.name, a.labeling, a.mapping, int(v.law_ok), int(v.geometric_ok), str(v.counterexample or ""))]
    text = _write_rows(["modulation", "labeling", "mapping", "exclusive_law", "window_check", "counterexample"], rows)
    if not v.ok:
        if v.counterexample:
            (p1, p2) = v.counterexample
            code = t.coded(*p1)
            print(
                f"Exclusive Law violated: pairs {p1} and {p2} share coded symbol {code}",
                file=sys.stderr,
            )
        else:
            print(f"window check violated at superposed grid offset {v.window}", file=sys.stderr)
        return text, 2
    return text, 0


def cmd_analytic(a):
    c = from_name(a.mod)
    if c.kind != QAM_SQUARE:
        raise UsageError("analytic needs a square QAM modulation (qpsk, qam16, qam64, qam256)")
    M = c.M
    L = c.L
    rows = []
    for s in a.snr_db:
        for si in a.snr_i_db:
            snr = analysis.SnrPair.from_db(s, si, M)
            ps = analysis.ser_square_exact(M, snr.gamma)
            lo, hi = analysis.ber_bounds(ps, M)
            d2n0 = 3.0 * snr.gamma / (2.0 * (M - 1))
            d2n0_i = 3.0 * snr.gamma_i / (2.0 * (M - 1))
            g0, gh, g1 = (analysis.g_alpha(snr, x) for x in (0.0, 0.5, 1.0))
            rows.append(
                (
                    M,
                    float(s),
                    float(si),
                    ps,
                    analysis.ser_upper(d2n0),
                    lo,
                    hi,
                    analysis.ser_superposed(M, snr.gamma),
                    analysis.ser_opp_upper_distance(math.sqrt(2 * d2n0), math.sqrt(2 * d2n0_i), L),
                    g0,
                    gh,
                    g1,
                    analysis.ber_opp_approx(snr),
                )
            )
    header = [
        "M",
        "snr_db",
        "snr_i_db",
        "ser_exact",
        "ser_upper_4q",
        "ber_lower",
        "ber_upper",
        "ser_superposed",
        "ser_opp_upper",
        "g0",
        "g_half",
        "g1",
        "ber_opp_approx",
    ]
    return _write_rows(header, rows), 0


def cmd_ber(a):
    cfgs = [
        SimConfig(a.mod, a.n_symbols, snr_db=s, labeling=a.labeling, seed=a.seed * 10_000 + i)
        for i, s in enumerate(a.snr_db)
    ]
    return sweep(a.scenario, cfgs), 0


def cmd_opp_ber(a):
    cfgs = []
    mods = [m.strip() for m in a.mod.split(",")]
    for i, mod in enumerate(mods):
        c = from_name(mod)
        if c.kind != QAM_SQUARE:
            raise UsageError("opp-ber needs square QAM modulations")
        for j, r in enumerate(a.ratio_db):
            cfgs.append(
                SimConfig(
                    mod,
                    a.n_symbols,
                    target_ber=a.target_ber,
                    power_ratio_db=r,
                    labeling=a.labeling,
                    seed=a.seed * 10_000 + i * 100 + j,
                )
            )
    return sweep("opp", cfgs), 0


def cmd_throughput(a):
    params = RateParams(
        p_max_dbm=a.p_max_dbm,
        noise_density_dbm_hz=a.noise_density,
        noise_figure_db=a.noise_figure,
        bandwidth_hz=a.bandwidth,
        k_factor_db=a.k_db,
        ber_max=a.ber_max,
        placement=a.placement,
    )
    text, _ = run_experiment(a.distances, a.seeds, params, seed=a.seed)
    return text, 0


def build_parser():
    p = _Parser(prog="pncqam", description="Constellation mapping, error rates and rate adaptation for PNC relaying.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed")
    common.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    common.add_argument("--config", default=None, help="key = value file supplying option defaults")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=fn)
        return sp

    sp = add("table", cmd_table, help="constellation points as CSV (index, re, im, bits)")
    sp.add_argument("--mod", type=_modulation, required=True)
    sp.add_argument("--labeling", choices=("binary", "gray"), default="binary")
    sp.add_argument("--energy", type=float, default=1.0)

    sp = add("map", cmd_map, help="superposed grid with coded symbols as CSV")
    sp.add_argument("--mod", type=_modulation, required=True)
    sp.add_argument("--labeling", choices=("binary", "gray"), default="binary")

    sp = add("verify", cmd_verify, help="check the Exclusive Law; exit 2 on violation")
    sp.add_argument("--mod", type=_modulation, required=True)
    sp.add_argument("--labeling", choices=("binary", "gray"), default="binary")
    sp.add_argument("--mapping", choices=("modular", "xor"), default="modular")

    sp = add("analytic", cmd_analytic, help="closed-form SER/BER values as CSV")
    sp.add_argument("--mod", type=_modulation, required=True)
    sp.add_argument("--snr-db", type=parse_grid, required=True, help="intended SNR (dB), grid allowed")
    sp.add_argument("--snr-i-db", type=parse_grid, default=[-math.inf], help="interference SNR (dB)")

    sp = add("ber", cmd_ber, help="Monte Carlo SER/BER, point-to-point or relay. " + SWEEP_HELP)
    sp.add_argument("--mod", type=_modulation, required=True)
    sp.add_argument("--scenario", choices=("p2p", "relay"), default="p2p")
    sp.add_argument("--snr-db", type=parse_grid, required=True)
    sp.add_argument("--n-symbols", type=int, default=100_000)
    sp.add_argument("--labeling", choices=("binary", "gray"), default="gray")

    sp = add("opp-ber", cmd_opp_ber, help="overhearing BER vs power ratio. " + SWEEP_HELP)
    sp.add_argument("--mod", required=True, help="square QAM id or comma list, e.g. qpsk,qam16")
    sp.add_argument("--ratio-db", type=parse_grid, default=parse_grid("0:40:5"))
    sp.add_argument("--target-ber", type=float, default=1e-3)
    sp.add_argument("--n-symbols", type=int, default=100_000)
    sp.add_argument("--labeling", choices=("binary", "gray"), default="gray")

    sp = add(
        "throughput",
        cmd_throughput,
        help="rate-adaptive throughput per scheme. CSV columns: distance_m, scheme, "
        "mean_throughput_bps, ci95_half_width_bps, n_seeds",
    )
    sp.add_argument("--distances", type=parse_grid, default=parse_grid("0:250:10"))
    sp.add_argument("--seeds", type=int, default=1000)
    sp.add_argument("--p-max-dbm", type=float, default=10.0)
    sp.add_argument("--noise-density", type=float, default=-174.0)
    sp.add_argument("--noise-figure", type=float, default=6.0)
    sp.add_argument("--bandwidth", type=float, default=1e6)
    sp.add_argument("--k-db", type=float, default=5.0)
    sp.add_argument("--ber-max", type=float, default=1e-3)
    sp.add_argument("--placement", choices=("ring", "random", "beyond", "toward"), default="ring")
    return p


def _apply_config(parser, argv):
    pre = _Parser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    cfg = read_config(known.config)
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            dests = {a.dest: a for a in sp._actions}
            defaults = {}
            for k, v in cfg.items():
                if k in dests:
                    act = dests[k]
                    defaults[k] = act.type(v) if act.type else v
                    act.required = False
            sp.set_defaults(**defaults)


def _manifest(args, argv, out_path):
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {
        "subcommand": args.command,
        "parameters": json.loads(json.dumps(params, default=str)),
        "seed": args.seed,
        "version": __version__,
        "output": str(out_path),
        "argv": list(argv),
    }


def dispatch(argv=None):
    """Parse ``argv``, run the subcommand and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        text, code = args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, TypeError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"pncqam: error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        out = Path(args.out)
        man = Path(str(out) + ".manifest.json")
        try:
            out.write_text(text, encoding="utf-8")
            man.write_text(json.dumps(_manifest(args, argv, out), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"pncqam: error: cannot write {out}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(dispatch())
