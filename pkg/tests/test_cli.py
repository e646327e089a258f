import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from paraqml.cli import main
from paraqml.data import load_split
from paraqml.train import RunResult


@pytest.fixture(autouse=True)
def _outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("PARAQML_OUTPUT_DIR", str(tmp_path / "results"))


def test_gen_data_counts(tmp_path, capsys):
    out = tmp_path / "semi.txt"
    assert main(["gen-data", "--kind", "semicircles", "--seed", "7", "--train", "128", "--test", "64", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# kind=semicircles seed=7")
    assert len(lines) == 1 + 192
    assert "per class [64, 64]" in capsys.readouterr().out


def test_gen_data_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        main(["gen-data", "--kind", "corners", "--seed", "3", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_gen_data_four_label(tmp_path):
    out = tmp_path / "cb4.txt"
    assert main(["gen-data", "--kind", "checkerboard4", "--seed", "1", "--out", str(out)]) == 0
    split = load_split(out)
    assert np.array_equal(np.bincount(split.y_train), [32] * 4)
    assert np.array_equal(np.bincount(split.y_test), [16] * 4)


def test_gen_data_default_path_uses_env(tmp_path):
    assert main(["gen-data", "--kind", "circles"]) == 0
    assert (tmp_path / "results" / "circles_seed0.txt").exists()


def test_gen_data_errors(tmp_path, capsys):
    assert main(["gen-data"]) == 2
    assert "--kind is required" in capsys.readouterr().err
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["gen-data", "--kind", "circles", "--out", str(blocker / "x.txt")]) == 2
    with pytest.raises(SystemExit):
        main(["gen-data", "--kind", "spirals"])


def test_train_smoke_integrated(tmp_path, capsys):
    out = tmp_path / "run.jsonl"
    code = main(["train", "--method", "integrated", "--dataset", "circles", "--seed", "3",
                 "--iterations", "10", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "(2 per iteration)" in text
    assert "circuit executions: 20 " in text
    res = RunResult.loads(out.read_text())
    assert 0.0 <= res.best_window_test_acc <= 1.0
    assert res.best_window == (8, 10)
    assert res.config["effective"]["iterations"] == 10


def test_train_conventional_counter_line(tmp_path, capsys):
    out = tmp_path / "run.jsonl"
    assert main(["train", "--method", "conventional", "--dataset", "semicircles",
                 "--iterations", "3", "--out", str(out)]) == 0
    assert "(256 per iteration)" in capsys.readouterr().out


def test_train_from_data_file(tmp_path, capsys):
    data_file = tmp_path / "d.txt"
    main(["gen-data", "--kind", "corners", "--seed", "2", "--train", "16", "--test", "8", "--out", str(data_file)])
    out = tmp_path / "run.jsonl"
    assert main(["train", "--method", "conventional", "--data-file", str(data_file),
                 "--iterations", "4", "--window", "1", "4", "--out", str(out)]) == 0
    assert "(32 per iteration)" in capsys.readouterr().out
    assert main(["train", "--method", "conventional", "--data-file", str(data_file),
                 "--dataset", "circles", "--iterations", "4"]) == 2


@pytest.mark.parametrize(
    "argv,message",
    [
        (["train", "--dataset", "circles"], "--method is required"),
        (["train", "--method", "integrated"], "--dataset is required"),
        (["train", "--method", "integrated", "--dataset", "circles", "--loss", "cross_entropy"], "only available"),
        (["train", "--method", "integrated", "--dataset", "circles", "--iterations", "5", "--window", "4", "9"], "--window"),
        (["train", "--method", "integrated", "--dataset", "circles", "--a", "-1"], "positive"),
        (["train", "--method", "integrated", "--data-file", "/nonexistent/file"], "cannot load"),
    ],
)
def test_train_validation_errors(argv, message, capsys):
    assert main(argv) == 2
    assert message in capsys.readouterr().err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"train": {"method": "integrated", "dataset": "circles", "iterations": 6, "seed": 4}}))
    out = tmp_path / "run.jsonl"
    assert main(["train", "--config", str(cfg), "--iterations", "4", "--out", str(out)]) == 0
    res = RunResult.loads(out.read_text())
    assert res.iterations == 4  # flag wins over file
    assert res.seed == 4  # file wins over default
    assert res.method == "integrated"


def test_flat_config_and_bad_config(tmp_path, capsys):
    cfg = tmp_path / "flat.json"
    cfg.write_text(json.dumps({"kind": "circles", "seed": 9}))
    out = tmp_path / "d.txt"
    assert main(["gen-data", "--config", str(cfg), "--out", str(out)]) == 0
    assert load_split(out).spec.seed == 9
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["gen-data", "--config", str(bad)]) == 2


def test_bench_rows_and_slopes(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--reps", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config=")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert [int(r["N"]) for r in rows] == [8, 16, 32, 64, 128]
    assert "slope_conventional" in rows[0] and "slope_integrated" in rows[0]
    assert float(rows[0]["wall_integrated_s"]) > 0
    assert "log-log slopes" in capsys.readouterr().out


def test_bench_model_columns_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        main(["bench", "--reps", "0", "--out", str(path)])
    # the preamble echoes the output path; the table itself must match
    assert a.read_text().splitlines()[1:] == b.read_text().splitlines()[1:]


def test_bench_invalid_sizes(capsys):
    assert main(["bench", "--n-list", "8", "12", "--reps", "0"]) == 2


def test_reproduce_table1_smoke(tmp_path, capsys):
    out_dir = tmp_path / "t1"
    code = main(["reproduce-table1", "--runs", "1", "--iterations", "3", "--kinds", "semicircles",
                 "checkerboard4", "--workers", "1", "--out-dir", str(out_dir)])
    text = capsys.readouterr().out
    fails = text.count("[FAIL]")
    assert code == (1 if fails else 0)
    assert text.count("[PASS]") + fails == 2 + 1 + 2  # bands per method, plus one gap check
    rows = list(csv.DictReader(io.StringIO("\n".join((out_dir / "table1.csv").read_text().splitlines()[1:]))))
    assert [r["dataset"] for r in rows] == ["semicircles", "checkerboard4"]
    assert {"conv_train", "conv_test", "int_train", "int_test"} <= set(rows[0])
    records = [json.loads(x) for x in (out_dir / "table1_runs.jsonl").read_text().splitlines()]
    assert len(records) == 4


def test_reproduce_table1_rejects_zero_runs(capsys):
    assert main(["reproduce-table1", "--runs", "0"]) == 2


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 5 and "[FAIL]" not in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "paraqml", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for command in ("gen-data", "train", "reproduce-table1", "bench", "selftest"):
        assert command in proc.stdout
