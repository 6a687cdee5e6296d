import csv
import io
import json
import math

import numpy as np
import pytest

from mixent.cli import EXIT_EMPTY, EXIT_GUARD, EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_USAGE, dumps, main
from mixent.data_model import HardAssignment, ingest
from mixent.entropy import criterion_of_assignment
from mixent.synth import TWO_SQRT3, sample, spec_r2


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_values(path, values):
    path.write_text("\n".join(repr(float(v)) for v in values) + "\n")
    return str(path)


def test_fit_binary(tmp_path, capsys, frozen):
    src = write_values(tmp_path / "b.csv", [0] * 70 + [1] * 30)
    code, out, _ = run(capsys, "fit", src, "--family", "bernoulli")
    assert code == EXIT_OK
    res = json.loads(out)
    assert res["best_H"] == pytest.approx(frozen["h_07_03"], abs=1e-12)
    assert res["r_n"] in (1, 2) and res["tie"] is True
    assert len(res["labels"]) == 100


def test_fit_round_trip_labels(tmp_path, capsys):
    x, _ = sample(spec_r2(6.0), 300, seed=4)
    src = write_values(tmp_path / "g.csv", x)
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_init = 4\nstop_r = 2\n")
    code, out, _ = run(capsys, "--seed", "3", "fit", src, "--config", str(cfg))
    assert code == EXIT_OK
    res = json.loads(out)
    assert res["config"]["seed"] == 3 and res["config"]["n_init"] == 4
    raw = np.array([float(v) for v in (tmp_path / "g.csv").read_text().split()])
    w = ingest(raw)
    lab = np.empty(w.m, dtype=int)
    lab[w.index_of(raw)] = res["labels"]
    val = criterion_of_assignment(HardAssignment(lab, max(res["labels"]) + 1), w, "gaussian").value
    assert val == pytest.approx(res["best_H"], abs=1e-12)
    assert res["r_n"] == len(res["nu"]) == len(res["params"])


def test_fit_output_file(tmp_path, capsys):
    src = write_values(tmp_path / "b.csv", [0, 1, 1])
    dst = tmp_path / "out.json"
    code, out, _ = run(capsys, "fit", src, "--family", "bernoulli", "-o", str(dst))
    assert code == EXIT_OK and out == ""
    assert "best_H" in json.loads(dst.read_text())


def test_fit_empty_file(tmp_path, capsys):
    p = tmp_path / "e.csv"
    p.write_text("")
    code, _, err = run(capsys, "fit", str(p))
    assert code == EXIT_EMPTY and "empty sample" in err


def test_fit_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "fit", str(tmp_path / "nope.csv"))
    assert code == EXIT_IO and "cannot read" in err


def test_fit_bad_value(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("1.0\nabc\n")
    code, _, _ = run(capsys, "fit", str(p))
    assert code == EXIT_PARSE


def test_fit_bad_config(tmp_path, capsys):
    src = write_values(tmp_path / "g.csv", [0.0, 1.0, 2.0])
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_init = many\n")
    code, _, _ = run(capsys, "fit", src, "--config", str(cfg))
    assert code == EXIT_PARSE


def test_fit_guard_hit(tmp_path, capsys):
    x, _ = sample(spec_r2(8.0), 200, seed=0)
    src = write_values(tmp_path / "g.csv", x)
    cfg = tmp_path / "c.cfg"
    cfg.write_text("r_max_guard = 1\nn_init = 2\n")
    code, out, err = run(capsys, "fit", src, "--config", str(cfg))
    assert code == EXIT_GUARD and "guard" in err
    assert json.loads(out)["restarts"]["guard_hit"] is True


def test_threshold_boundaries(capsys):
    code, out, _ = run(capsys, "threshold", "0.5", "0", "1", "0.5", repr(TWO_SQRT3), "1")
    assert code == EXIT_OK and abs(json.loads(out)["margin"]) < 1e-12
    code, out, _ = run(capsys, "threshold", "0.5", "0", "1", "0.5", "0", repr(4 + math.sqrt(15)))
    assert abs(json.loads(out)["margin"]) < 1e-12
    code, out, _ = run(capsys, "threshold", "0.5", "0", "1", "0.5", "10", "1")
    assert json.loads(out)["split_is_strictly_better"] is True


def test_threshold_invalid(capsys):
    code, _, _ = run(capsys, "threshold", "0.5", "0", "-1", "0.5", "0", "1")
    assert code == EXIT_PARSE


def test_oracle(tmp_path, capsys, frozen):
    src = write_values(tmp_path / "b.csv", [0] * 7 + [1] * 3)
    code, out, _ = run(capsys, "oracle", src, "--family", "bernoulli", "--r", "3")
    res = json.loads(out)
    assert code == EXIT_OK
    assert res["min_H"] == pytest.approx(frozen["h_07_03"], abs=1e-12)
    assert res["orders"] == [1, 2] and res["tie"] is True


def test_oracle_guard(tmp_path, capsys):
    src = write_values(tmp_path / "g.csv", np.arange(30.0))
    code, _, err = run(capsys, "oracle", src, "--family", "gaussian", "--r", "3")
    assert code == EXIT_GUARD and str(3**30) in err


def test_experiment_small(tmp_path, capsys):
    dst = tmp_path / "t.csv"
    summ = tmp_path / "s.csv"
    code, out, _ = run(
        capsys, "experiment", "table1", "--families", "gaussian", "--mu-factors", "0.5,2.0",
        "--seeds", "0,1", "--n", "300", "-o", str(dst), "--summary", str(summ),
    )
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(dst.read_text())))
    assert rows[0] == ["mu_factor", "family", "seed", "r_n", "best_H", "wallclock_ms"]
    assert len(rows) == 5
    summary = list(csv.reader(io.StringIO(summ.read_text())))
    assert [r[1] for r in summary[1:]] == ["1", "2"]


def test_experiment_unknown_family(capsys):
    code, _, _ = run(capsys, "experiment", "table1", "--families", "cauchy", "--n", "10")
    assert code == EXIT_USAGE


def test_sample_deterministic(capsys):
    _, a, _ = run(capsys, "--seed", "5", "sample", "--mixture", "r7", "--n", "50", "--labels")
    _, b, _ = run(capsys, "--seed", "5", "sample", "--mixture", "r7", "--n", "50", "--labels")
    assert a == b
    rows = list(csv.reader(io.StringIO(a)))
    assert rows[0] == ["value", "label"] and len(rows) == 51
    x, lab = sample(spec_r2(TWO_SQRT3), 50, seed=0)
    _, c, _ = run(capsys, "sample", "--n", "50")
    assert [float(r[0]) for r in list(csv.reader(io.StringIO(c)))[1:]] == x.tolist()


def test_sample_from_config(tmp_path, capsys):
    cfg = tmp_path / "m.cfg"
    cfg.write_text("kind = gaussian\nweights = 0.25,0.75\nmeans = 0,5\nn = 20\n")
    code, out, _ = run(capsys, "sample", "--mixture", "config", "--config", str(cfg))
    assert code == EXIT_OK and len(out.strip().splitlines()) == 21


def test_sample_config_needs_file(capsys):
    code, _, _ = run(capsys, "sample", "--mixture", "config")
    assert code == EXIT_USAGE


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["--jobs", "0", "threshold", "1", "0", "1", "1", "0", "1"])
    assert exc.value.code == EXIT_USAGE


def test_dumps_precision():
    x = 0.1 + 0.2
    text = dumps({"a": x, "b": 2.0, "c": [1, True], "d": float("inf")})
    assert "0.30000000000000004" in text and '"b": 2.0' in text
    assert "Infinity" in text
    assert json.loads(text)["a"] == x
