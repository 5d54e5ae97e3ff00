"""End-to-end checks for the `rolemark` command-line entry point.

Purpose:
- Drive `rolemark.cli.main` the way the console script does.
Why:
- Exit codes, summary lines and output layouts are the contract scripts and
  CI jobs depend on.
"""

from __future__ import annotations

import json
import logging

import pytest

from java_samples import COUNT_LOOP, ENHANCED_FOR
from rolemark.base import SUITE_NAMES
from rolemark.cli import main


def _java_class(name, *methods):
    body = "\n\n".join("    " + method for method in methods)
    return f"public class {name} {{\n{body}\n}}\n"


def _write_corpus(root):
    (root / "test").mkdir(parents=True)
    (root / "test" / "Loops.java").write_text(
        _java_class("Loops", COUNT_LOOP.replace("void f", "void first"), ENHANCED_FOR),
        encoding="utf-8",
    )
    (root / "test" / "Plain.java").write_text(
        _java_class("Plain", "int one(int x){ return x; }", "int add(int a, int b){ return a + b; }"),
        encoding="utf-8",
    )
    return root


def _tree_bytes(root):
    return {
        path.relative_to(root).as_posix(): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


def test_augment_writes_corpus_manifest_and_stats(tmp_path, capsys):
    source = _write_corpus(tmp_path / "in")
    out = tmp_path / "out"

    assert main(["augment", "--in", str(source), "--out", str(out)]) == 0

    captured = capsys.readouterr()
    assert "augment: 2 of 4 methods augmented (1 steppers, 1 walkers)" in captured.out
    assert (out / "manifest.json").is_file()
    stats = json.loads((out / "stats.json").read_text())
    assert stats["steppers"] == 1
    assert stats["walkers"] == 1
    assert "stepper_count" in (out / "test" / "Loops.java").read_text()


def test_augment_output_independent_of_worker_count(tmp_path):
    source = _write_corpus(tmp_path / "in")
    assert main(["augment", "--in", str(source), "--out", str(tmp_path / "one"), "--workers", "1"]) == 0
    assert main(["augment", "--in", str(source), "--out", str(tmp_path / "two"), "--workers", "2"]) == 0
    assert _tree_bytes(tmp_path / "one") == _tree_bytes(tmp_path / "two")


def test_transform_is_byte_reproducible(tmp_path, capsys):
    source = _write_corpus(tmp_path / "in")
    for name in ("a", "b"):
        code = main(
            ["transform", "--in", str(source), "--out", str(tmp_path / name), "--seed", "7", "--epoch", "0"]
        )
        assert code == 0

    assert _tree_bytes(tmp_path / "a") == _tree_bytes(tmp_path / "b")
    assert "transform: renamed a variable in 4 of 4 methods (seed 7)" in capsys.readouterr().out


def test_suite_creates_all_eight_corpora(tmp_path, capsys):
    source = _write_corpus(tmp_path / "in")
    out = tmp_path / "suite"

    assert main(["suite", "--original", str(source), "--out", str(out), "--seed", "7"]) == 0

    for name in SUITE_NAMES:
        assert (out / name / "manifest.json").is_file()
    summary = json.loads((out / "suite.json").read_text())
    assert summary["seed"] == 7
    assert summary["sizes"]["jl"] == 4
    assert summary["sizes"]["jlr_f"] == 2
    assert "suite: jl=4 jlr=4 jl_f=2 jlr_f=2" in capsys.readouterr().out


def test_filter_writes_both_sides(tmp_path):
    source = _write_corpus(tmp_path / "in")
    roles = tmp_path / "roles"
    assert main(["augment", "--in", str(source), "--out", str(roles)]) == 0

    out = tmp_path / "filtered"
    assert main(["filter", "--original", str(source), "--roles", str(roles), "--out", str(out)]) == 0
    original_manifest = json.loads((out / "original" / "manifest.json").read_text())
    roles_manifest = json.loads((out / "roles" / "manifest.json").read_text())
    assert len(original_manifest["records"]) == len(roles_manifest["records"]) == 2


def test_detect_streams_json_lines(tmp_path, capsys):
    source = _write_corpus(tmp_path / "in")

    assert main(["detect", "--in", str(source)]) == 0

    captured = capsys.readouterr()
    documents = [json.loads(line) for line in captured.out.splitlines()]
    assert len(documents) == 4
    assert sum(doc["counts"]["steppers"] for doc in documents) == 1
    assert "detect: 4 methods, 1 steppers, 1 walkers, 0 parse failures" in captured.err


def test_detect_reports_byte_spans_for_non_ascii_methods(tmp_path, capsys):
    source = 'void f(){ String s = "éé"; for (int i = 0; i < 3; i++) {} }'
    data = tmp_path / "methods.jsonl"
    data.write_text(json.dumps({"id": "m", "code": source}) + "\n", encoding="utf-8")

    assert main(["detect", "--in", str(data), "--format", "jsonl"]) == 0

    (document,) = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    start, end = document["assignments"][0]["span"]
    assert source.encode("utf-8")[start : start + 12] == b"for (int i ="


def test_stats_and_plot(tmp_path, capsys):
    source = _write_corpus(tmp_path / "in")
    plot = tmp_path / "plots" / "steppers.png"
    out = tmp_path / "stats.json"

    assert main(["stats", "--in", str(source), "--out", str(out), "--plot", str(plot)]) == 0

    assert plot.is_file() and plot.stat().st_size > 0
    payload = json.loads(out.read_text())
    assert payload["stepperNameHistogram"] == {"count": 1}
    assert payload["coverage"] == 0.5
    assert "stats: 4 methods, 2 augmented (50.0%)" in capsys.readouterr().out


def test_targets_lists_method_names(tmp_path):
    source = _write_corpus(tmp_path / "in")
    out = tmp_path / "refs.jsonl"

    assert main(["targets", "--in", str(source), "--out", str(out)]) == 0
    refs = {row["ref"] for row in map(json.loads, out.read_text().splitlines())}
    assert refs == {"first", "f", "one", "add"}


def test_eval_prints_micro_scores(tmp_path, capsys):
    pairs = tmp_path / "pairs.jsonl"
    pairs.write_text(
        json.dumps({"id": "a", "ref": "getUserName", "pred": "getName"})
        + "\n"
        + json.dumps({"id": "b", "ref": "sortArray", "pred": "sortList"})
        + "\n"
    )
    out = tmp_path / "report.json"

    assert main(["eval", "--pairs", str(pairs), "--out", str(out), "--per-example"]) == 0

    assert "P=0.750 R=0.600 F1=0.667" in capsys.readouterr().out
    assert json.loads(out.read_text())["counts"]["examples"] == 2
    assert out.with_suffix(".csv").read_text().startswith("id,tp,predLen,refLen")


def test_eval_against_second_prediction_file(tmp_path, capsys):
    refs = tmp_path / "refs.txt"
    first = tmp_path / "first.txt"
    second = tmp_path / "second.txt"
    refs.write_text("getUserName\n")
    first.write_text("getName\n")
    second.write_text("getUserName\n")

    assert main(["eval", "--refs", str(refs), "--preds", str(first), "--against", str(second)]) == 0
    output = capsys.readouterr().out
    assert "against: P=1.000 R=1.000 F1=1.000" in output
    assert "dF1=+0.200" in output


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["augment", "--bogus"],
        ["augment", "--in", "x"],
        ["eval"],
    ],
)
def test_usage_errors_exit_with_status_one(argv, capsys):
    assert main(argv) == 1


def test_missing_input_is_a_usage_error(tmp_path, capsys):
    code = main(["augment", "--in", str(tmp_path / "nope"), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "rolemark augment: error:" in capsys.readouterr().err


def test_invalid_worker_environment_is_a_usage_error(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("ROLEMARK_WORKERS", "lots")
    source = _write_corpus(tmp_path / "in")
    assert main(["stats", "--in", str(source)]) == 1


def test_duplicate_ids_are_a_data_error(tmp_path, capsys):
    data = tmp_path / "dup.jsonl"
    row = json.dumps({"id": "same", "code": "void f(){}"})
    data.write_text(f"{row}\n{row}\n")

    code = main(["augment", "--in", str(data), "--format", "jsonl", "--out", str(tmp_path / "o.jsonl")])
    assert code == 2
    assert "duplicate method id" in capsys.readouterr().err


@pytest.mark.parametrize("verbose", [True, False])
def test_settings_file_controls_verbosity(tmp_path, caplog, verbose):
    source = _write_corpus(tmp_path / "in")
    settings = tmp_path / "settings.json"
    settings.write_text(json.dumps({"verbose": verbose}))

    assert main(["stats", "--in", str(source), "--settings", str(settings)]) == 0

    assert ("running stats with" in caplog.text) is verbose
    assert logging.getLogger("rolemark").isEnabledFor(logging.INFO) is verbose
