import json

import pytest

from qdist.cli import main
from qdist.distributions import collision, save_pair


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dist(capsys):
    code, out, _ = run(capsys, "dist", "--family", "collision", "--param", "4")
    assert code == 0
    assert json.loads(out)["bhattacharyya"] == pytest.approx(2**-0.5)


def test_dist_from_file(tmp_path, capsys):
    path = tmp_path / "pair.json"
    save_pair(path, *collision(4))
    code, out, _ = run(capsys, "dist", "--pair", str(path))
    assert code == 0 and json.loads(out)["angle"] == pytest.approx(0.785398163397, abs=1e-9)


@pytest.mark.parametrize(
    "argv",
    [
        ("simulate", "--family", "collision", "--param", "4", "--model", "iii", "--algo", "amplify", "--label", "Q"),
        ("simulate", "--family", "bernoulli", "--param", "0.5", "--param", "0.8", "--model", "iv", "--epsilon", "0.4"),
        ("simulate", "--family", "bernoulli", "--param", "0.5", "--param", "0.8", "--algo", "standard", "--seed", "3"),
        ("simulate", "--family", "bernoulli", "--param", "0.5", "--param", "0.8", "--model", "i", "--string-length", "10"),
        ("simulate", "--family", "bernoulli", "--param", "0.5", "--param", "0.8", "--algo", "classical"),
    ],
)
def test_simulate(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert json.loads(out)["decision"] in ("P", "Q")


def test_witness_report(capsys):
    code, out, _ = run(capsys, "witness", "--family", "collision", "--param", "4", "--garbage", "haar_random", "--garbage-dim", "3")
    report = json.loads(out)
    assert code == 0
    assert all(f["holds"] for f in report["facts"])
    assert report["objective"] == pytest.approx(1.5176380902, abs=1e-9)


def test_lowerbound_report(capsys):
    code, out, _ = run(capsys, "lowerbound", "--family", "bernoulli", "--param", "0.5", "--param", "0.8", "--n", "2", "--sp", "0.9", "--sq", "0.1")
    report = json.loads(out)
    assert code == 0 and len(report["facts"]) == 7
    assert report["adversary_value"] > 0


def test_sep(capsys):
    code, out, _ = run(capsys, "sep", "--t", "3")
    assert code == 0
    assert "1.870829" in out and "1.972027" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("bogus",),
        ("dist",),
        ("dist", "--family", "collision", "--param", "3"),
        ("simulate", "--family", "collision", "--param", "4", "--model", "iii", "--algo", "witness"),
        ("lowerbound", "--family", "collision", "--param", "4", "--n", "9"),
        ("sep", "--t", "0"),
        ("experiment", "missing.toml"),
        ("plot", "missing.csv"),
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_experiment_and_plot(tmp_path, capsys):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        'models = ["iii"]\nalgorithms = ["amplify", "classical"]\nseeds = [0, 1]\n'
        '[family]\nkind = "bernoulli"\nfixed = [0.5]\ngrid = [0.6, 0.9]\n'
        '[output]\ncsv = "out.csv"\nsvg = "out.svg"\n'
    )
    code, _, err = run(capsys, "experiment", str(cfg))
    assert code == 0 and "8 records" in err
    assert (tmp_path / "out.svg").read_text().startswith("<svg")
    code, out, _ = run(capsys, "plot", str(tmp_path / "out.csv"))
    assert code == 0 and out == (tmp_path / "out.svg").read_text()


def test_verification_failure_exit(monkeypatch, capsys):
    import qdist.cli as cli

    monkeypatch.setattr(cli, "verify_witness", lambda *a: 1.0)
    assert run(capsys, "witness", "--family", "collision", "--param", "4")[0] == 1
