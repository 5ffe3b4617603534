import csv
import json
import math

import numpy as np
import pytest

from gbsvm.cli import main
from gbsvm.dataset import make_gaussian_blobs, save_csv
from gbsvm.model import GbsvmModel

FAST = ["--pop", "40", "--iters", "150"]


@pytest.fixture
def blobs_csv(tmp_path):
    p = tmp_path / "blobs.csv"
    save_csv(make_gaussian_blobs(80, separation=4.0, seed=1), p)
    return p


def test_gen_balls_two_clusters(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("0,0,1\n0.1,0,1\n5,5,-1\n5.1,5,-1\n")
    out = tmp_path / "b.csv"
    assert main(["gen-balls", "--input", str(p), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3
    assert "balls: 2" in capsys.readouterr().out


def test_gen_balls_json(blobs_csv, tmp_path):
    out = tmp_path / "b.json"
    assert main(["gen-balls", "--input", str(blobs_csv), "--out", str(out), "--radius-mode", "max"]) == 0
    recs = json.loads(out.read_text())
    assert sum(r["size"] for r in recs) == 80


def test_missing_input_is_data_error(tmp_path):
    assert main(["gen-balls", "--input", str(tmp_path / "none.csv"), "--out", str(tmp_path / "o.csv")]) == 2


def test_bad_purity_is_usage_error(blobs_csv, tmp_path):
    assert main(["gen-balls", "--input", str(blobs_csv), "--purity", "0.4", "--out", str(tmp_path / "o")]) == 1


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["train", "--bogus"])
    assert exc.value.code == 1


def test_three_class_file_is_data_error(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,a\n2,b\n3,c\n")
    assert main(["gen-balls", "--input", str(p), "--out", str(tmp_path / "o.csv")]) == 2


def test_train_defaults_echoed(blobs_csv, tmp_path, capsys):
    model = tmp_path / "m.json"
    rc = main(["train", "--input", str(blobs_csv), "--model-out", str(model), "--patience", "5"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "pop=400 max_iter=1050" in out
    m = GbsvmModel.load(model)
    reported = float(out.split("margin=")[1].split()[0])
    assert reported == pytest.approx(math.sqrt(2) / m.norm_w, rel=1e-5)


def test_train_rejects_nonpositive_C(blobs_csv, tmp_path):
    assert main(["train", "--input", str(blobs_csv), "--model-out", str(tmp_path / "m"), "--C", "0"]) == 1


def test_train_trace(blobs_csv, tmp_path):
    trace = tmp_path / "t.csv"
    assert main(["train", "--input", str(blobs_csv), "--model-out", str(tmp_path / "m.json"),
                 "--trace", str(trace), *FAST]) == 0
    assert trace.read_text().startswith("iteration,best_fitness,feasibility_residual")


def test_degenerate_solution_is_solver_error(tmp_path):
    # opposite labels at the same point force A = 0 for every feasible alpha
    p = tmp_path / "d.csv"
    p.write_text("0.5,0.5,1\n0.5,0.5,-1\n")
    rc = main(["train", "--input", str(p), "--no-normalize", "--point-svm",
               "--model-out", str(tmp_path / "m.json"), *FAST])
    assert rc == 3


def test_predict_round_trip(blobs_csv, tmp_path, capsys):
    model = tmp_path / "m.json"
    assert main(["train", "--input", str(blobs_csv), "--model-out", str(model), *FAST]) == 0
    preds = tmp_path / "p.csv"
    assert main(["predict", "--model", str(model), "--input", str(blobs_csv), "--label-col", "-1",
                 "--out", str(preds)]) == 0
    out = capsys.readouterr().out
    acc = float(out.split("accuracy=")[1].split()[0])
    assert acc >= 0.5  # majority baseline on balanced blobs
    with preds.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id", "prediction"]
    assert len(rows) == 81 and {r[1] for r in rows[1:]} <= {"1", "-1"}


def test_predict_features_only(blobs_csv, tmp_path):
    model = tmp_path / "m.json"
    assert main(["train", "--input", str(blobs_csv), "--model-out", str(model), *FAST]) == 0
    X = np.loadtxt(blobs_csv, delimiter=",", skiprows=1)[:, :-1]
    feats = tmp_path / "x.csv"
    np.savetxt(feats, X, delimiter=",")
    assert main(["predict", "--model", str(model), "--input", str(feats), "--out", str(tmp_path / "p.csv")]) == 0


def test_bench_noise_and_time(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["bench-noise", "--n", "80", "--repeats", "1", "--rates", "0,0.2", *FAST, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("dataset,rate,seed,method,accuracy")
    assert len(lines) == 1 + 2 * 2
    tout = tmp_path / "t.json"
    assert main(["bench-time", "--n", "120", *FAST, "--out", str(tout)]) == 0
    doc = json.loads(tout.read_text())
    assert doc["n_points"] == 120 and doc["speedup"] > 0


def test_bench_noise_bad_rates(tmp_path):
    assert main(["bench-noise", "--rates", "0.1,x", "--out", str(tmp_path / "r.csv")]) == 1


def test_bench_noise_defaults():
    from gbsvm.cli import build_parser
    args = build_parser().parse_args(["bench-noise", "--out", "r.csv"])
    assert args.purity == 0.6 and args.n == 500 and args.repeats == 5
    assert [float(r) for r in args.rates.split(",")] == [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3]
    assert (args.pop, args.iters) == (400, 1050)
