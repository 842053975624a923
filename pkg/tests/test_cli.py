import io
import json
from pathlib import Path

import pytest

from excap.capacity import CapacityReport
from excap.cli import main
from excap.serialize import SCHEMAS, dumps, validate_report

DOCS = Path(__file__).resolve().parents[1] / "docs" / "report_schema.json"


@pytest.fixture
def kdir(tmp_path):
    (tmp_path / "ou.json").write_text(json.dumps({"kind": "ou", "scale": 1.0}))
    (tmp_path / "gauss.json").write_text(json.dumps({"kind": "gauss_sq", "scale": 1.0}))
    (tmp_path / "gauss2.json").write_text(json.dumps({"kind": "gauss_sq", "scale": 1.0, "dim": 2}))
    return tmp_path


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_capacity_ou(kdir):
    code, out, _ = run(["capacity", "--kernel", kdir / "ou.json", "--a", 0, "--b", 2, "--n", 401])
    assert code == 0
    data = validate_report(json.loads(out))
    assert data["result"]["capacity"] == pytest.approx(2.0, rel=0.01)
    assert data["config"] == {"n": 401, "tol": 1e-9, "t_grid": 2001, "seed": 0}
    rep = CapacityReport.from_dict(data["result"])
    assert rep.converged


def test_phase_a1(kdir):
    code, out, _ = run(["phase", "--kernel", kdir / "gauss.json", "--which", "a1"])
    assert code == 0
    assert json.loads(out)["result"]["critical_length"] == pytest.approx(2.2079, abs=1e-3)


def test_missing_kernel_file(kdir):
    target = kdir / "report.json"
    code, out, err = run(["capacity", "--kernel", kdir / "nope.json", "--a", 0, "--b", 1,
                          "--out", target, "--csv", kdir / "m.csv"])
    assert code == 2
    assert out == ""
    assert not target.exists() and not (kdir / "m.csv").exists()
    assert json.loads(err)["error"] == "FileNotFoundError"


@pytest.mark.parametrize("argv", [
    ["capacity", "--kernel", "{k}", "--a", "0", "--b", "0"],
    ["capacity", "--kernel", "{k}", "--a", "0", "--b", "1", "--n", "1"],
    ["capacity", "--kernel", "{k}"],
    ["riesz", "--beta", "1.5"],
    ["capacity", "--kernel", "{k}", "--a", "x", "--b", "1"],
])
def test_validation_errors_exit_2(kdir, argv):
    argv = [a.replace("{k}", str(kdir / "ou.json")) for a in argv]
    code, out, err = run(argv)
    assert code == 2
    assert out == ""
    assert "error" in json.loads(err)


def test_bad_kernel_json(kdir):
    (kdir / "bad.json").write_text('{"kind": "ou", "scale": -2}')
    assert run(["capacity", "--kernel", kdir / "bad.json", "--a", 0, "--b", 1])[0] == 2


def test_nonconvergence_exit_3(kdir, monkeypatch):
    import excap.cli as cli
    from excap import capacity

    from dataclasses import replace

    from excap.exceptions import NonConvergence

    def stalled(kernel, path, n, tol):
        rep = replace(capacity.min_energy(kernel, path, n=n, tol=tol), converged=False)
        raise NonConvergence("stalled", rep)

    monkeypatch.setattr(cli, "min_energy", stalled)
    out_file = kdir / "r.json"
    code, _, err = run(["capacity", "--kernel", kdir / "gauss.json", "--a", 0, "--b", 7,
                        "--n", 101, "--out", out_file])
    assert code == 3
    data = json.loads(out_file.read_text())
    assert data["result"]["converged"] is False
    validate_report(data)
    assert json.loads(err)["error"] == "NonConvergence"


def test_argparse_errors_exit_2():
    code, _, _ = run(["frobnicate"])
    assert code == 2


@pytest.mark.parametrize("argv,csv_header", [
    (["capacity", "--kernel", "ou.json", "--a", "0", "--b", "2", "--n", "51"], "u,weight"),
    (["shape", "--kernel", "gauss.json", "--b", "3", "--n", "101", "--t-grid", "51"], "t,x"),
    (["phase", "--kernel", "gauss.json", "--length", "3.0"], None),
    (["asymptotics", "--kernel", "ou.json", "--lengths", "5", "10", "--n", "101"], "a,normalized_capacity"),
    (["sheet", "--dim", "2", "--n", "101"], None),
    (["search", "--kernel", "gauss2.json", "--a", "0,0", "--b", "1,1", "--n", "41",
      "--restarts", "1", "--iters", "3"], "restart,iter,energy"),
    (["mc", "--kernel", "ou.json", "--b", "1", "--n", "11", "--samples", "20000"], "u,p_hat,ci95,slope"),
    (["riesz", "--beta", "0.5", "--n", "101"], "u,weight"),
])
def test_every_command_schema_and_determinism(kdir, monkeypatch, argv, csv_header):
    monkeypatch.chdir(kdir)
    outs = []
    for i in range(2):
        code, _, _ = run(argv + ["--out", f"r{i}.json", "--csv", f"c{i}.csv"])
        assert code == 0
        outs.append((kdir / f"r{i}.json").read_bytes())
    assert outs[0] == outs[1]
    data = validate_report(json.loads(outs[0]))
    assert data["command"] == argv[0]
    for key in ("n", "tol", "t_grid", "seed"):
        assert key in data["config"]
    if csv_header:
        assert (kdir / "c0.csv").read_text().splitlines()[0] == csv_header
        assert (kdir / "c0.csv").read_bytes() == (kdir / "c1.csv").read_bytes()


def test_search_path_out_is_loadable(kdir):
    from excap.geometry import load_path

    code, _, _ = run(["search", "--kernel", kdir / "gauss2.json", "--a", "0,0", "--b", "1,0",
                      "--n", 31, "--restarts", 1, "--iters", 2, "--out", kdir / "r.json",
                      "--path-out", kdir / "p.json"])
    assert code == 0
    p = load_path(kdir / "p.json")
    assert p.dim == 2


def test_capacity_with_path_file(kdir):
    (kdir / "stair.json").write_text(json.dumps({"vertices": [[1, 2], [2, 2], [2, 1]]}))
    (kdir / "sheet.json").write_text(json.dumps({"kind": "brownian_sheet", "dim": 2}))
    code, out, _ = run(["capacity", "--kernel", kdir / "sheet.json", "--path", kdir / "stair.json",
                        "--n", 201])
    assert code == 0
    assert json.loads(out)["result"]["capacity"] == pytest.approx(2 / 3, rel=0.01)


def test_dumps_format():
    text = dumps({"a": 0.1, "b": [1.0, float("inf")], "c": 3, "d": None, "e": True})
    assert '"a": 0.10000000000000001' in text
    assert "[1.0, Infinity]" in text
    back = json.loads(text)
    assert back["a"] == 0.1 and back["c"] == 3


def test_shipped_schema_matches_library():
    assert json.loads(DOCS.read_text()) == json.loads(json.dumps(SCHEMAS))
