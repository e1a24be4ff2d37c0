import csv
import io
import json

import pytest

from pncqam import __version__
from pncqam.cli import dispatch, parse_grid


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_grid():
    assert parse_grid("0:40:10") == [0.0, 10.0, 20.0, 30.0, 40.0]
    assert parse_grid("0:1:0.1")[-1] == pytest.approx(1.0)
    assert parse_grid("1,2.5") == [1.0, 2.5]
    assert parse_grid("3") == [3.0]


def test_table(capsys):
    code, out, _ = run(capsys, "table", "--mod", "qam8")
    assert code == 0
    assert len(rows(out)) == 8


def test_map_pam4(capsys):
    code, out, _ = run(capsys, "map", "--mod", "pam4")
    assert code == 0
    assert [int(r["coded_index"]) for r in rows(out)] == [0, 1, 2, 3, 0, 1, 2]


@pytest.mark.parametrize("mod", ["bpsk", "pam16", "qam256", "qam128"])
def test_verify_passes(capsys, mod):
    code, out, _ = run(capsys, "verify", "--mod", mod)
    assert code == 0
    assert rows(out)[0]["exclusive_law"] == "1"


def test_verify_xor_fails(capsys):
    code, out, err = run(capsys, "verify", "--mod", "pam4", "--mapping", "xor")
    assert code == 2
    assert "violated" in err
    assert rows(out)[0]["exclusive_law"] == "0"


def test_analytic_grid(capsys):
    code, out, _ = run(capsys, "analytic", "--mod", "qam16", "--snr-db", "10:20:5")
    assert code == 0
    r = rows(out)
    assert len(r) == 3
    assert float(r[2]["ser_exact"]) == pytest.approx(1.1616290911816575e-05, rel=1e-12)


def test_ber_and_opp_are_deterministic(capsys):
    argv = ("opp-ber", "--mod", "qpsk,qam16", "--ratio-db", "0,30", "--n-symbols", "2000", "--seed", "3")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and len(rows(a)) == 4
    code, out, _ = run(capsys, "ber", "--mod", "qam16", "--scenario", "relay", "--snr-db", "15", "--n-symbols", "2000")
    assert code == 0 and rows(out)[0]["scenario"] == "relay"


def test_out_writes_manifest_and_rerun_matches(tmp_path, capsys):
    out = tmp_path / "p2p.csv"
    argv = ["ber", "--mod", "qam16", "--snr-db", "12", "--n-symbols", "3000", "--seed", "9", "--out", str(out)]
    assert dispatch(argv) == 0
    man = json.loads((tmp_path / "p2p.csv.manifest.json").read_text())
    assert man["subcommand"] == "ber" and man["seed"] == 9 and man["version"] == __version__
    first = out.read_text()
    assert dispatch(man["argv"]) == 0
    assert out.read_text() == first


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nmod = qam64\nsnr-db = 20,25\n")
    code, out, _ = run(capsys, "analytic", "--config", str(cfg))
    assert code == 0
    assert [r["M"] for r in rows(out)] == ["64", "64"]


def test_throughput_small(capsys):
    code, out, _ = run(capsys, "throughput", "--distances", "0,50", "--seeds", "4")
    assert code == 0
    assert len(rows(out)) == 8


@pytest.mark.parametrize(
    "argv",
    [
        ["table", "--mod", "qam32x"],
        ["analytic", "--mod", "qam16", "--snr-db", "a:b"],
        ["ber", "--mod", "qam16"],
        ["nonsense"],
        ["analytic", "--mod", "qam8", "--snr-db", "10"],
        ["table", "--mod", "qam16", "--config", "/nonexistent/file.cfg"],
    ],
)
def test_bad_input_exits_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err
