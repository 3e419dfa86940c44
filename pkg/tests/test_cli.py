import csv
import json

import numpy as np
import pytest

from cdcroots.channels import bistochastic_cdc
from cdcroots.cli import main
from cdcroots.serialize import load, read_provenance, save


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_qubit_root_file(tmp_path, capsys):
    path = tmp_path / "q.json"
    code, _, err = run(capsys, "construct", "qubit-root", "--l2", 0.5, "--l3", 0.5, "--theta", 0, "--out", path)
    assert code == 0 and "qubit root" in err
    ch = load(path)
    assert np.allclose(np.tril(ch.matrix[1:, 1:]), 0)
    assert read_provenance(path)["construction"] == "qubit-root"
    code, out, _ = run(capsys, "verify", "--in", path)
    rep = json.loads(out)
    assert code == 0 and rep["root_order"] == 3 and rep["cp"] and rep["unital"] and rep["tp"]
    assert len(rep["residuals"]) == 3


def test_perturb_root_order(tmp_path, capsys):
    path = tmp_path / "p.json"
    assert run(capsys, "construct", "perturb-root", "--d", 3, "--out", path)[0] == 0
    prov = read_provenance(path)
    lo, hi = prov["certified_interval"]
    assert lo < prov["parameters"]["eps"] < hi
    rep_path = tmp_path / "r.json"
    assert run(capsys, "verify", "--in", path, "--out", rep_path)[0] == 0
    assert json.loads(rep_path.read_text())["root_order"] == 8


def test_cdc_and_non_root(tmp_path, capsys):
    path = tmp_path / "c.json"
    save(bistochastic_cdc(2), path)
    assert json.loads(run(capsys, "verify", "--in", path)[1])["root_order"] == 1
    ident = tmp_path / "i.json"
    save(bistochastic_cdc(2).__class__(np.eye(4), bistochastic_cdc(2).basis), ident)
    code, out, _ = run(capsys, "verify", "--in", ident)
    assert code == 0 and json.loads(out)["root_order"] is None


def test_memory_verify(tmp_path, capsys):
    path = tmp_path / "m.json"
    assert run(capsys, "construct", "counterexample", "--a", 0.1, "--b", 0.1, "--out", path)[0] == 0
    code, out, _ = run(capsys, "verify", "--memory", "--in", path)
    rep = json.loads(out)
    assert code == 0 and rep["strictly_forgetful"] is False and rep["witness"]
    fpath = tmp_path / "f.json"
    assert run(capsys, "construct", "forgetful", "--out", fpath)[0] == 0
    rep = json.loads(run(capsys, "verify", "--memory", "--in", fpath)[1])
    assert rep["strictly_forgetful"] and rep["depth"] == 3


def test_forgetful_from_spec_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    j = np.zeros((4, 3, 3))
    j[1, 0, 2] = 1
    spec.write_text(json.dumps({"dM": 2, "dA": 2, "dB": 2, "J": j.tolist(), "v": [0.1, 0, 0]}))
    out = tmp_path / "f.json"
    assert run(capsys, "construct", "forgetful", "--spec", spec, "--out", out)[0] == 0
    rep = json.loads(run(capsys, "verify", "--memory", "--in", out)[1])
    assert rep["depth"] == 2


def test_cb_bound(tmp_path, capsys):
    path = tmp_path / "cb.json"
    code, _, err = run(capsys, "construct", "cb-bound", "--d", 2, "--out", path)
    assert code == 0 and "witness = 0.5" in err
    assert abs(read_provenance(path)["parameters"]["witness"] - 0.5) < 1e-10


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_correlate_table(tmp_path, capsys):
    path = tmp_path / "q.json"
    run(capsys, "construct", "qubit-root", "--l2", 0.5, "--l3", 0.4, "--theta", 0.3, "--out", path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "correlate", "--in", path, "--samples", 50, "--seed", 3, "--out", a)[0] == 0
    run(capsys, "correlate", "--in", path, "--samples", 50, "--seed", 3, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"gap,max_violation\r\n")
    rows = read_csv(a)[1:]
    assert [int(r[0]) for r in rows] == [1, 2, 3, 4]
    below = [float(r[1]) <= 1e-9 for r in rows]
    assert below == [False, False, True, True]


def test_correlate_cdc(tmp_path, capsys):
    path = tmp_path / "c.json"
    save(bistochastic_cdc(2), path)
    out = tmp_path / "c.csv"
    run(capsys, "correlate", "--in", path, "--samples", 20, "--out", out)
    assert float(read_csv(out)[1][1]) <= 1e-9


def test_correlate_rejects_non_root(tmp_path, capsys):
    path = tmp_path / "i.json"
    save(bistochastic_cdc(2).__class__(np.eye(4), bistochastic_cdc(2).basis), path)
    code, out, _ = run(capsys, "correlate", "--in", path)
    assert code == 1 and json.loads(out)["error"] == "not-a-root"


@pytest.mark.parametrize(
    "argv,code",
    [
        (["construct", "perturb-root", "--d", "1"], "invalid-dimension"),
        (["construct", "counterexample", "--a", "2", "--b", "2"], "not-completely-positive"),
        (["construct", "qubit-root", "--l2", "0.5", "--l3", "0"], "order-degenerate"),
        (["construct", "cb-bound", "--d", "4"], "retry-with-smaller-delta"),
        (["verify", "--in", "/nonexistent.json"], "FileNotFoundError"),
        (["verify", "--in", "x", "--tol", "0"], "ValueError"),
    ],
)
def test_error_json(capsys, argv, code):
    rc, out, _ = run(capsys, *argv)
    assert rc == 1 and json.loads(out)["error"] == code
