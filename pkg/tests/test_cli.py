import argparse
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from kdi.cli import build_parser, main, run_cluster_bench
from kdi.core import minmax
from kdi.data_io import load_csv

FIXTURE = os.path.join(os.path.dirname(__file__), "fixtures", "wine_malic.csv")


def run(*argv):
    return main([str(a) for a in argv])


def test_transform_fixture(tmp_path):
    out = tmp_path / "t.csv"
    assert run("transform", FIXTURE, "--alpha", 1, "-o", out) == 0
    x = load_csv(FIXTURE)["MalicAcid"]
    t = load_csv(out)["MalicAcid"]
    assert t.min() == 0.0 and t.max() == 1.0
    order = np.argsort(x)
    assert np.all(np.diff(t[order]) >= 0)


def test_transform_huge_alpha_is_minmax(tmp_path):
    out = tmp_path / "t.csv"
    assert run("transform", FIXTURE, "--alpha", 1e6, "-o", out) == 0
    x = load_csv(FIXTURE)["MalicAcid"]
    assert np.max(np.abs(load_csv(out)["MalicAcid"] - minmax(x, x))) < 1e-3


@pytest.mark.parametrize("flags", [[], ["--kernel", "gaussian"], ["--strategy", "exact"]])
def test_transform_apply_round_trip(tmp_path, flags):
    a, b, m = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "m.json"
    assert run("transform", FIXTURE, "-o", a, "--model-out", m, *flags) == 0
    assert run("transform", FIXTURE, "-o", b, "--apply", m) == 0
    assert a.read_bytes() == b.read_bytes()


def test_transform_skips_bad_cells(tmp_path, capsys):
    src = tmp_path / "in.csv"
    src.write_text("v,w\n1,5\n2,x\n4,6\n8,7\n")
    out = tmp_path / "o.csv"
    assert run("transform", src, "-o", out) == 0
    assert "1 non-numeric" in capsys.readouterr().err
    t = load_csv(out)
    assert np.isnan(t["w"][1]) and t["w"][0] == 0.0 and t["w"][3] == 1.0


def test_corr_outputs(tmp_path, capsys):
    rng = np.random.default_rng(0)
    x = rng.normal(size=200)
    src = tmp_path / "in.csv"
    np.savetxt(src, np.c_[x, x + rng.normal(size=200), np.exp(x)], delimiter=",",
               header="a,b,c", comments="")
    out, gap = tmp_path / "c.csv", tmp_path / "g.csv"
    assert run("corr", src, "--n-boot", 5, "--seed", 3, "-o", out, "--gap-table", gap) == 0
    t = load_csv(out)
    assert len(t["pearson"]) == 3
    assert np.all(t["n_boot"] == 5) and np.all(t["sd_kdi"] > 0)
    assert "top disagreements with Pearson" in capsys.readouterr().err
    assert len(load_csv(gap)["gap"]) == 6
    # deterministic and per-pair seeded
    again = tmp_path / "c2.csv"
    assert run("corr", src, "--n-boot", 5, "--seed", 3, "-o", again, "--pairs", "b:c") == 0
    assert load_csv(again)["sd_kdi"][0] == t["sd_kdi"][2]


def test_corr_bad_pairs(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("a,b\n1,2\n2,3\n3,5\n")
    assert run("corr", src, "--pairs", "a:zz") == 2


def test_corr_many_columns_needs_explicit_pairs(tmp_path):
    src = tmp_path / "wide.csv"
    data = np.random.default_rng(1).normal(size=(5, 33))
    np.savetxt(src, data, delimiter=",", header=",".join(f"c{i}" for i in range(33)), comments="")
    assert run("corr", src, "-o", tmp_path / "o.csv") == 2
    assert run("corr", src, "--pairs", "c0:c1", "-o", tmp_path / "o.csv") == 0


def test_cluster_mixture3(tmp_path, capsys):
    out = tmp_path / "l.csv"
    assert run("cluster", "--mixture", 3, "--n", 500, "--seed", 0, "-o", out) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["k_hat"] == 2 and summary["k_true"] == 2
    t = load_csv(out)
    assert set(np.unique(t["label"])) == {0, 1}
    assert set(t.names) == {"value", "label", "true_label"}


def test_cluster_raw_method(tmp_path, capsys):
    assert run("cluster", "--mixture", 1, "--n", 2000, "--method", "raw") == 0
    assert json.loads(capsys.readouterr().out)["method"] == "raw"


def test_cluster_csv_and_summary_file(tmp_path, capsys):
    s = tmp_path / "s.json"
    assert run("cluster", FIXTURE, "--summary", s) == 0
    assert json.loads(s.read_text()) == json.loads(capsys.readouterr().out)


def test_cluster_bench_rows():
    rows = run_cluster_bench([3], [200], 3, 0, ["kdi", "raw"])
    assert [r["method"] for r in rows] == ["kdi", "raw"]
    assert all(0 <= r["k_recovery"] <= 1 for r in rows)
    assert rows == run_cluster_bench([3], [200], 3, 0, ["kdi", "raw"])


def test_cluster_bench_cli(tmp_path):
    out = tmp_path / "cb.csv"
    assert run("cluster-bench", "--mixtures", "5", "--n-list", "200", "--seeds", 2, "-o", out) == 0
    t = load_csv(out)
    assert t.names == ["mixture", "N", "method", "k_true", "k_recovery", "mean_ari", "n_seeds"]


def test_bench_exact_error_zero(tmp_path):
    out = tmp_path / "b.csv"
    assert run("bench", "--n", 500, "--n-test", 300, "--r-list", "50,100", "--alphas", "1",
               "--repeats", 1, "-o", out) == 0
    t = load_csv(out)
    assert t.names == ["strategy", "alpha", "R", "N", "fit_seconds", "eval_seconds", "max_abs_error"]
    assert len(t["R"]) == 5
    assert t["max_abs_error"][0] == 0.0


@pytest.mark.parametrize(
    "argv,code",
    [
        (["transform", "missing.csv"], 3),
        (["transform", FIXTURE, "--alpha", "-1"], 2),
        (["transform", FIXTURE, "--kernel", "gaussian", "--strategy", "dp"], 2),
        (["transform", FIXTURE, "--columns", "Nope"], 3),
        (["transform", FIXTURE, "--bogus"], 2),
        (["cluster"], 2),
        (["cluster", "--mixture", "9", "--n", "10"], 2),
        (["cluster", "--mixture", "3"], 2),
        (["bench", "--strategies", "fast"], 2),
        (["cluster-bench", "--mixtures", "7"], 2),
        ([], 2),
    ],
)
def test_exit_codes(argv, code):
    assert main(argv) == code


def test_empty_input_is_clean_error(tmp_path, capsys):
    src = tmp_path / "e.csv"
    src.write_text("x\n")
    assert run("cluster", src) == 3
    assert run("transform", src) == 3
    err = capsys.readouterr().err
    assert "empty" in err and "Traceback" not in err


def test_help_documents_every_flag():
    parser = build_parser()
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, p in sub.choices.items():
        text = p.format_help()
        for action in p._actions:
            if isinstance(action, argparse._HelpAction):
                continue
            assert action.help, f"{name}: {action.dest} has no help"
            for opt in action.option_strings:
                assert opt in text, f"{name}: {opt} missing from help"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "kdi", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "cluster-bench" in r.stdout
