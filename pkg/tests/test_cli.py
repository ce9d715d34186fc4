import csv
import io
import json

import pytest

from spiregraph import cli
from spiregraph.errors import NumericalContractError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_direct_rows(capsys):
    code, out, _ = run(capsys, "spectrum", "--method", "direct", "-m", "4")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 64
    assert abs(sum(float(r["weight"]) for r in rows) - 1) < 1e-8
    assert all(r["channel_mu"] == "" for r in rows)


def test_spectrum_serf_row_count(capsys):
    # prism(7) has 8 distinct base eigenvalues; the three channels with |mu| above
    # the escape threshold lose one root each to the out-of-band branch
    code, out, _ = run(capsys, "spectrum", "--family", "prism", "-m", "7", "--method", "serf")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 8 * 14 - 4
    code, out, _ = run(capsys, "spectrum", "-m", "7", "--include-out-of-band", "--format", "json")
    data = json.loads(out)
    assert len(data["spectrum"]) == 8 * 14 and abs(data["total_weight"] - 1) < 1e-8


def test_invalid_family_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["spectrum", "--family", "petersen", "-m", "4"])
    assert exc.value.code == 2


def test_missing_m_exit_2(capsys):
    code, _, err = run(capsys, "spectrum", "--family", "prism")
    assert code == 2 and "needs -m" in err


def test_distinguish_m4(capsys):
    code, out, _ = run(capsys, "distinguish", "-m", "4")
    d = json.loads(out)
    assert code == 0
    assert abs(d["dis"] - 0.345227) <= 1e-5 and d["n_rep"] == 46
    assert d["dt_coarse"] == 0.5 and d["graph_a"] == "prism" and d["graph_b"] == "moebius"


def test_distinguish_half_horizon(capsys):
    code, out, _ = run(capsys, "distinguish", "-m", "8", "--horizon-mult", "0.5")
    assert code == 0 and abs(json.loads(out)["dis"] - 0.068) <= 0.002


def test_distinguish_csv_and_file(capsys, tmp_path):
    path = tmp_path / "r.csv"
    assert cli.main(["distinguish", "-m", "5", "--format", "csv", "-o", str(path)]) == 0
    rows = list(csv.DictReader(path.open()))
    assert rows[0]["n_rep"] == "69"


def test_crossval_rows(capsys):
    code, out, _ = run(capsys, "crossval", "--m-list", "4,16")
    rows = {int(r["m"]): r for r in csv.DictReader(io.StringIO(out))}
    assert code == 0
    assert float(rows[4]["abs_diff"]) == pytest.approx(2.0e-6, abs=1e-7)
    assert float(rows[16]["abs_diff"]) == pytest.approx(2.5e-7, abs=1e-8)


def test_scale_table(capsys):
    code, out, _ = run(capsys, "scale", "--m-list", "4,5,8,9,16,17,32,33")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [int(r["m"]) for r in rows] == [4, 5, 8, 9, 16, 17, 32, 33]
    n2par = [float(r["n2_parseval"]) for r in rows]
    assert all(a < b for a, b in zip(n2par, n2par[1:])) and n2par[-1] < 3
    assert all(3.0 <= float(r["dis2_over_parseval"]) <= 8.1 for r in rows)


def test_scale_empty_exit_2(capsys):
    code, _, err = run(capsys, "scale", "--m-list", "")
    assert code == 2 and "empty" in err


def test_oracle_prism(capsys, tmp_path):
    dump = tmp_path / "a.txt"
    code, out, _ = run(capsys, "oracle", "--family", "prism", "-m", "4", "-L", "2",
                       "--seed", "7", "-o", str(dump))
    rep = json.loads(out)
    assert code == 0
    assert rep["vertices"] == 344 and rep["degree_census"] == {"6": 8, "7": 336}
    assert rep["krylov_max_err"] <= 1e-8
    assert len(dump.read_text().splitlines()) == 345
    again = tmp_path / "b.txt"
    run(capsys, "oracle", "--family", "prism", "-m", "4", "-L", "2", "--seed", "7", "-o", str(again))
    assert dump.read_bytes() == again.read_bytes()


def test_oracle_welded_trees(capsys):
    code, out, _ = run(capsys, "oracle", "--family", "k2", "-L", "4")
    assert code == 0 and json.loads(out)["vertices"] == 62


def test_hadamard_records_and_summary(capsys):
    code, out, _ = run(capsys, "hadamard", "-m", "5", "--trials", "20", "--seed", "1")
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and len(lines) == 41
    assert set(lines[0]) == {"trial", "truth", "decision", "f_tilde_re", "f_tilde_im", "correct"}
    summary = lines[-1]["summary"]
    assert summary["runs"] == 40 and summary["seed"] == 1 and summary["n_rep"] == 69


def test_hadamard_inflated_and_same_graph(capsys):
    _, out, _ = run(capsys, "hadamard", "-m", "8", "--trials", "500", "--seed", "1",
                    "--nrep-mult", "100", "--summary-only")
    assert json.loads(out)["summary"]["success_rate"] >= 0.999
    _, out, _ = run(capsys, "hadamard", "-m", "8", "--trials", "500", "--seed", "1",
                    "--same-graph", "--summary-only")
    assert 0.45 <= json.loads(out)["summary"]["success_rate"] <= 0.55


def test_hadamard_reproducible_across_threads(capsys, monkeypatch):
    args = ("hadamard", "-m", "5", "--trials", "100", "--seed", "3")
    _, serial, _ = run(capsys, *args)
    monkeypatch.setenv("SPIRE_THREADS", "4")
    _, threaded, _ = run(capsys, *args)
    monkeypatch.setenv("SPIRE_THREADS", "0")
    _, auto, _ = run(capsys, *args)
    assert serial == threaded == auto


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("SPIRE_THREADS", "many")
    code, _, _ = run(capsys, "distinguish", "-m", "4")
    assert code == 2


def test_numerical_contract_exit_3(capsys, monkeypatch):
    def boom(*a, **k):
        raise NumericalContractError("residual")

    monkeypatch.setattr(cli, "distinguishability", boom)
    code, _, err = run(capsys, "distinguish", "-m", "4")
    assert code == 3 and "residual" in err


def test_capacity_exit_3(capsys):
    code, _, _ = run(capsys, "oracle", "--family", "prism", "-m", "4", "-L", "6")
    assert code == 3


def test_custom_edge_list(capsys, tmp_path):
    path = tmp_path / "k33.txt"
    path.write_text("6 3 0\n" + "".join(f"{a} {b}\n" for a in range(3) for b in range(3, 6)))
    code, out, _ = run(capsys, "spectrum", "--family", "file", "--path", str(path),
                       "--method", "direct")
    assert code == 0 and len(out.splitlines()) == 1 + 36


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "spiregraph", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "distinguish" in proc.stdout
