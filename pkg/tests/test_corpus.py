from __future__ import annotations

import json

import pytest

from java_samples import COUNT_LOOP, ENHANCED_FOR
from rolemark.base import (
    MANIFEST_FILENAME,
    STEPPER_PREFIX,
    WALKER_PREFIX,
    CorpusError,
    RecordStatus,
)
from rolemark.binding import resolve
from rolemark.corpus import (
    STAGE_AUGMENT,
    STAGE_FILTER,
    MethodRecord,
    Provenance,
    build_eval_suite,
    build_manifest,
    compute_stats,
    emit,
    filter_pair,
    ingest,
    method_targets,
    run_augment,
    run_detect,
    run_transform,
    split_methods,
    stats,
)
from rolemark.rewrite import strip_roles
from rolemark.syntax import parse_method
from rolemark.synthetic import expected_counts, generate_methods, synthetic_corpus

SHAPES_FILE = """\
package demo;

import java.util.List;

public class Shapes {
    private int count = 0;
    private int[] sizes = {1, 2};
    static { System.out.println("init"); }
    { count = 1; }
    abstract static class Inner { void hidden() { } }
    abstract void pending();
    public int area(int w, int h) { return w * h; }
    <T> List<T> same(List<T> xs) { return xs; }
}

enum Color {
    RED, GREEN;
    Color next() { return values()[(ordinal() + 1) % 2]; }
}
"""


def _java_class(name, *methods):
    body = "\n\n".join("    " + method for method in methods)
    return f"public class {name} {{\n{body}\n}}\n"


def _manifest(*sources, split="test"):
    records = [
        MethodRecord(method_id=f"m/{index:03d}", source=source, split=split)
        for index, source in enumerate(sources)
    ]
    return build_manifest(records, Provenance(source_path="<memory>"))


def _prefixed_bindings(corpus, prefix):
    total = 0
    for record in corpus.records:
        table = resolve(parse_method(record.source).unwrap())
        total += sum(1 for binding in table.bindings if binding.name.startswith(prefix))
    return total


def _write_tree(root):
    files = {
        "train/Alpha.java": _java_class(
            "Alpha",
            "int one(){ return 1; }",
            "void loop(){ for (int i = 0; i < 3; i++) { } }",
        ),
        "val/Beta.java": _java_class(
            "Beta",
            "void each(List<String> xs){ for (String s : xs) { use(s); } }",
            "int two(){ return 2; }",
        ),
        "test/Gamma.java": _java_class(
            "Gamma",
            "int three(){ return 3; }",
            "int four(int x){ return x + 4; }",
        ),
    }
    for rel, text in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return files


def test_split_methods_finds_only_bodied_top_level_methods():
    spans = split_methods(SHAPES_FILE)

    texts = [span.slice(SHAPES_FILE) for span in spans]
    assert len(texts) == 3
    assert texts[0].startswith("public int area")
    assert texts[1].startswith("<T> List<T> same")
    assert texts[2].startswith("Color next")


def test_split_methods_gives_up_on_unbalanced_text():
    assert split_methods("class A { void f() { ") is None
    assert split_methods('class A { String s = "open; }') is None


def test_ingest_dir_tree_assigns_ids_and_splits(tmp_path):
    _write_tree(tmp_path)
    corpus = ingest(tmp_path)

    assert len(corpus) == 6
    assert corpus.ids[0] == "test/Gamma.java#0"
    assert corpus.counts_per_split == {"train": 2, "val": 2, "test": 2}
    assert {record.status for record in corpus.records} == {RecordStatus.CARRIED_OVER}
    assert corpus.get("val/Beta.java#1").source == "int two(){ return 2; }"


def test_ingest_without_split_directories_defaults_to_test(tmp_path):
    (tmp_path / "Solo.java").write_text(_java_class("Solo", "int f(){ return 0; }"))
    corpus = ingest(tmp_path)
    assert [record.split for record in corpus.records] == ["test"]


def test_ingest_rejects_bad_paths_and_formats(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest(tmp_path / "missing")
    with pytest.raises(FileNotFoundError):
        ingest(tmp_path / "missing.jsonl", "jsonl")
    with pytest.raises(ValueError):
        ingest(tmp_path, "csv")


def test_jsonl_duplicate_ids_and_malformed_lines_are_reported(tmp_path):
    duplicate = tmp_path / "dup.jsonl"
    duplicate.write_text(
        json.dumps({"id": "a", "code": "void f(){}"})
        + "\n"
        + json.dumps({"id": "a", "code": "void g(){}"})
        + "\n"
    )
    with pytest.raises(CorpusError, match="duplicate method id 'a'"):
        ingest(duplicate, "jsonl")

    malformed = tmp_path / "bad.jsonl"
    malformed.write_text(json.dumps({"id": "a", "code": "void f(){}"}) + "\n{not json\n")
    with pytest.raises(CorpusError, match=":2:"):
        ingest(malformed, "jsonl")


def test_augment_counts_a_stepper_and_a_walker():
    corpus, report = run_augment(_manifest(COUNT_LOOP, ENHANCED_FOR))

    assert report.splits["test"].augmented_methods == 2
    assert (report.steppers, report.walkers) == (1, 1)
    assert report.coverage == 1.0
    assert STAGE_AUGMENT in corpus.stages
    assert {record.status for record in corpus.records} == {RecordStatus.PROCESSED}


def test_augment_without_roles_changes_nothing():
    original = _manifest("int f(){ return 1; }", "void g(String s){ use(s); }")
    corpus, report = run_augment(original)

    assert [record.source for record in corpus.records] == [
        record.source for record in original.records
    ]
    assert report.total_augmented_vars == 0
    assert corpus.augmented == {}


def test_unparseable_methods_are_carried_through():
    broken = "void f( {"
    corpus, report = run_augment(_manifest(broken, COUNT_LOOP))

    assert corpus.records[0].source == broken
    assert corpus.records[0].status is RecordStatus.PARSE_FAILED
    assert report.splits["test"].parse_failed == 1
    documents = run_detect(corpus)
    assert documents[0]["error"]["position"] >= 0
    assert documents[1]["counts"] == {"steppers": 1, "walkers": 0}


def test_statistics_match_construction_truth_and_survive_emit(tmp_path):
    """Augment 1000 template methods and recount after a disk round trip.

    Purpose:
    - Tie corpus statistics to the roles each template was built with.
    Why:
    - The recount after ingest must come from the manifest sidecar alone, and
      a second count read off the emitted source text must agree with it.
    Inputs:
    - 1000 seeded synthetic methods, 300 of them carrying roles.
    Outputs:
    - None; asserts counts before and after emit/ingest.
    """

    methods = generate_methods(1000, augmented=300, seed=5)
    expected = expected_counts(methods)
    corpus, report = run_augment(synthetic_corpus(methods))

    assert report.splits["test"].methods == expected["methods"]
    assert report.splits["test"].augmented_methods == expected["augmentedMethods"]
    assert report.steppers == expected["steppers"]
    assert report.walkers == expected["walkers"]

    emit(corpus, tmp_path / "out", report=report)
    reloaded = ingest(tmp_path / "out")
    assert reloaded.ids == corpus.ids
    assert [record.source for record in reloaded.records] == [
        record.source for record in corpus.records
    ]
    assert reloaded.augmented == corpus.augmented
    assert stats(reloaded) == report
    assert _prefixed_bindings(reloaded, STEPPER_PREFIX) == expected["steppers"]
    assert _prefixed_bindings(reloaded, WALKER_PREFIX) == expected["walkers"]


def test_stepper_histogram_shares():
    loops = [f"void f{n}(){{ for (int i=0; i<{n}; i++){{}} }}" for n in range(4)]
    _corpus, report = run_augment(_manifest(*loops))

    assert report.stepper_name_histogram == (("i", 4),)
    assert report.stepper_name_shares() == {"i": 1.0}


def test_name_based_extras_are_not_counted_as_roles():
    source = "void f(){ for (int i=0; i<3; i++){} { int i = 5; use(i); } }"
    corpus, report = run_augment(_manifest(source), name_based=True)

    assert corpus.records[0].source.count("stepper_i") == 5
    assert report.steppers == 1
    assert report.stepper_name_histogram == (("i", 1),)
    assert report.name_based_extras == 1
    assert report.as_dict()["nameBasedExtras"] == 1
    assert compute_stats(corpus) == report


def test_empty_corpus_statistics_are_zero():
    report = compute_stats(_manifest())
    assert report.coverage == 0.0
    assert report.stepper_name_shares() == {}
    assert report.as_dict()["splits"]["test"] == {
        "methods": 0,
        "augmentedMethods": 0,
        "parseFailed": 0,
    }


def test_transform_is_deterministic_per_seed():
    corpus = synthetic_corpus(generate_methods(50, augmented=20, seed=1))
    first = run_transform(corpus, 7)
    second = run_transform(corpus, 7)
    other = run_transform(corpus, 8)

    assert first == second
    assert first.provenance.seed == 7
    assert first.transformed != other.transformed or first.records != other.records
    assert all(name.new_name.startswith("var") for name in first.transformed.values())


def test_filter_pair_keeps_changed_methods_only():
    original = synthetic_corpus(generate_methods(10, augmented=4, seed=3))
    roles, _report = run_augment(original)
    kept_original, kept_roles = filter_pair(original, roles)

    assert len(kept_original) == len(kept_roles) == 4
    assert kept_original.ids == kept_roles.ids
    assert STAGE_FILTER in kept_roles.stages


def test_filter_pair_rejects_mismatched_ids():
    left = _manifest(COUNT_LOOP)
    right = build_manifest(
        [MethodRecord(method_id="other", source=COUNT_LOOP, split="test")],
        Provenance(source_path=""),
    )
    with pytest.raises(CorpusError):
        filter_pair(left, right)


def test_filter_pair_on_empty_corpora():
    empty = _manifest()
    kept_original, kept_roles = filter_pair(empty, empty)
    assert len(kept_original) == len(kept_roles) == 0


@pytest.mark.parametrize("count, augmented", [(200, 63), (20, 7)])
def test_eval_suite_sizes(count, augmented):
    original = synthetic_corpus(generate_methods(count, augmented=augmented, seed=9))
    suite = build_eval_suite(original, seed=7)

    assert suite.sizes() == {
        "jl": count,
        "jlr": count,
        "jl_f": augmented,
        "jlr_f": augmented,
        "jlt": count,
        "jltr": count,
        "jlt_f": augmented,
        "jltr_f": augmented,
    }
    for record in suite.jlr_f.records:
        restored = strip_roles(record.source, suite.jlr_f.augmented[record.method_id])
        assert restored == suite.jl_f.get(record.method_id).source


def test_eval_suite_pairs_transformed_variables():
    original = synthetic_corpus(generate_methods(40, augmented=15, seed=2))
    suite = build_eval_suite(original, seed=11)

    for method_id, renamed in suite.jltr.transformed.items():
        assert suite.jlt.transformed[method_id].binding_id == renamed.binding_id


def test_eval_suite_on_empty_corpus():
    suite = build_eval_suite(_manifest(), seed=1)
    assert set(suite.sizes().values()) == {0}


def test_dir_tree_round_trip_is_lossless(tmp_path):
    files = _write_tree(tmp_path / "in")
    corpus = ingest(tmp_path / "in")
    emit(corpus, tmp_path / "out", epoch=0)

    for rel, text in files.items():
        assert (tmp_path / "out" / rel).read_text(encoding="utf-8") == text
    manifest = json.loads((tmp_path / "out" / MANIFEST_FILENAME).read_text())
    assert manifest["created"] == 0
    assert ingest(tmp_path / "out") == corpus


def test_jsonl_and_dir_tree_conversions_keep_sources(tmp_path):
    _write_tree(tmp_path / "in")
    corpus, _report = run_augment(ingest(tmp_path / "in"))

    emit(corpus, tmp_path / "corpus.jsonl", "jsonl")
    as_jsonl = ingest(tmp_path / "corpus.jsonl", "jsonl")
    assert as_jsonl == corpus

    emit(as_jsonl, tmp_path / "tree")
    as_tree = ingest(tmp_path / "tree")
    assert [record.source for record in as_tree.records] == [
        record.source for record in corpus.records
    ]


def test_worker_count_does_not_change_output(tmp_path):
    corpus = synthetic_corpus(generate_methods(60, augmented=25, seed=4))
    serial, serial_report = run_augment(corpus, workers=1)
    parallel, parallel_report = run_augment(corpus, workers=2)

    emit(serial, tmp_path / "one.jsonl", "jsonl", report=serial_report)
    emit(parallel, tmp_path / "two.jsonl", "jsonl", report=parallel_report)
    for suffix in (".jsonl", ".manifest.json", ".stats.json"):
        assert (tmp_path / f"one{suffix}").read_bytes() == (tmp_path / f"two{suffix}").read_bytes()


def test_method_targets_skip_unparseable_records():
    rows = method_targets(_manifest(COUNT_LOOP, "void f( {", "int getName(){ return 0; }"))
    assert rows == [{"id": "m/000", "ref": "f"}, {"id": "m/002", "ref": "getName"}]


def test_generate_methods_validates_counts():
    with pytest.raises(ValueError):
        generate_methods(5, augmented=6)
    assert expected_counts(generate_methods(0, augmented=0)) == {
        "methods": 0,
        "augmentedMethods": 0,
        "steppers": 0,
        "walkers": 0,
    }
