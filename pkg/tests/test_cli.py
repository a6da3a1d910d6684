import csv
import subprocess
import sys

import pytest

from llmfs.cli import main
from llmfs.data import load_csv

from stub_server import StubServer, constant


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def data_csv(tmp_path):
    path = tmp_path / "d.csv"
    assert main(["synth", "--n-samples", "240", "--n-features", "12", "--n-informative", "3",
                 "--mean-shift", "3", "--seed", "4", "--out", str(path)]) == 0
    return path


def test_synth_writes_loadable_csv(data_csv):
    ds = load_csv(data_csv)
    assert (ds.n_samples, ds.n_features) == (240, 12)
    assert ds.class_counts == (120, 120)


def test_stats_subcommand(tmp_path, data_csv):
    out = tmp_path / "desc.csv"
    assert main(["stats", "--data", str(data_csv), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0][0] == "name" and len(rows) == 13
    assert [r[0] for r in rows[1:]] == [f"f{j}" for j in range(12)]


def test_select_scores_and_selection(tmp_path, data_csv):
    out = tmp_path / "scores.csv"
    sel = tmp_path / "sel.csv"
    assert main(["select", "--data", str(data_csv), "--method", "anova", "--k", "3",
                 "--out", str(out), "--selection-out", str(sel)]) == 0
    scores = read_csv(out)
    assert scores[0] == ["feature_name", "score"] and len(scores) == 13
    picked = read_csv(sel)
    assert picked[0] == ["rank", "feature_index", "feature_name", "score"]
    assert {r[2] for r in picked[1:]} == {"f0", "f1", "f2"}


def test_select_sequential_writes_ranks(tmp_path, data_csv):
    out = tmp_path / "seq.csv"
    assert main(["select", "--data", str(data_csv), "--method", "sequential", "--k", "2", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["feature_name", "rank"] and [r[1] for r in rows[1:]] == ["1", "2"]


def test_select_llm_with_cache(tmp_path, data_csv):
    cache = tmp_path / "cache.tsv"
    args = ["select", "--data", str(data_csv), "--method", "llm", "--k", "3",
            "--backend", "mock", "--cache", str(cache)]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()
    assert len(cache.read_text().splitlines()) == 12


def test_select_llm_over_http(tmp_path, data_csv, monkeypatch):
    monkeypatch.setenv("LLMFS_API_KEY", "k")
    out = tmp_path / "s.csv"
    with StubServer(constant("0.25")) as srv:
        assert main(["select", "--data", str(data_csv), "--method", "llm", "--k", "3",
                     "--backend", "http", "--endpoint", srv.url, "--out", str(out)]) == 0
    assert {r[1] for r in read_csv(out)[1:]} == {"0.25"}
    assert len(srv.requests) == 12


def test_bench_subcommand(tmp_path, data_csv):
    config = tmp_path / "bench.cfg"
    config.write_text("methods = mi, llm\nclassifiers = knn, extra_trees\nk = 3\n")
    out = tmp_path / "out"
    code = main(["bench", "--config", str(config), "--data", str(data_csv), "--out", str(out)])
    assert code == 0
    table = read_csv(out / "report.csv")
    assert len(table) == 5 and table[0][0] == "fs_method"
    heat = read_csv(out / "heatmap.csv")
    assert heat[0] == ["fs_method", "knn", "extra_trees"]
    log = (out / "run.log").read_text()
    assert "cache_hits" in log and "fallbacks" in log


def test_bench_flags_override_config(tmp_path, data_csv):
    config = tmp_path / "bench.cfg"
    config.write_text(f"data_path = {data_csv}\nmethods = chi2\nclassifiers = knn\nk = 2\n")
    out = tmp_path / "out"
    assert main(["bench", "--config", str(config), "--method", "chi2,variance", "--k", "4",
                 "--averaging", "binary", "--out", str(out)]) == 0
    table = read_csv(out / "report.csv")
    assert [(r[0], r[2]) for r in table[1:]] == [("chi2", "4"), ("variance", "4")]
    assert "chi2: shifted" in (out / "run.log").read_text()


def test_bench_reports_failed_cells(tmp_path, data_csv):
    out = tmp_path / "out"
    code = main(["bench", "--data", str(data_csv), "--method", "mi", "--classifiers", "knn",
                 "--k", "50", "--out", str(out)])
    assert code == 1
    assert read_csv(out / "report.csv")[1][3:] == [""] * 7


def test_bad_inputs_exit_nonzero(tmp_path):
    with pytest.raises(SystemExit):
        main(["select", "--data", "x.csv", "--method", "lasso", "--out", "y.csv"])
    with pytest.raises(SystemExit):
        main(["bench", "--averaging", "macro"])


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "llmfs.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
