"""Corpus ingest, pipeline stages, evaluation suites, statistics and output.

A corpus is a :class:`CorpusManifest`: immutable records ordered by method id
plus the sidecars that earlier stages attached. Every stage returns a new
manifest with the same ids in the same order, so outputs are byte-identical
regardless of how many worker processes did the per-method work.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
    Union,
)

from .base import (
    DEFAULT_SEED,
    DEFAULT_SPLIT,
    INDEPENDENT_SEED_SALT,
    JAVA_SUFFIX,
    MANIFEST_FILENAME,
    SPLITS,
    STATS_FILENAME,
    STEPPER_PREFIX,
    STEPPER_SHARE_TOP_N,
    SUITE_NAMES,
    TOOL_VERSION,
    WALKER_PREFIX,
    CorpusError,
    RecordStatus,
    RenamedBinding,
    Span,
)
from .binding import resolve
from .lexer import TokenKind, decode_source, encode_source, significant, tokenize
from .rewrite import augment, transform_rename
from .roles import detect_roles
from .syntax import method_name, parse_method

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

STAGE_AUGMENT = "augment"
STAGE_TRANSFORM = "transform"
STAGE_FILTER = "filter"
JSONL_DATA_FILENAME = "methods.jsonl"

_UNSAFE_PATH_CHARS = re.compile(r"[^A-Za-z0-9._-]+")


@dataclass(frozen=True)
class MethodRecord:
    method_id: str
    source: str
    split: str
    status: RecordStatus = RecordStatus.CARRIED_OVER
    path: Optional[str] = None
    index: int = 0

    def manifest_row(self) -> Dict[str, Any]:
        return {
            "id": self.method_id,
            "split": self.split,
            "status": self.status.value,
            "path": self.path,
            "index": self.index,
        }


@dataclass(frozen=True)
class FileLayout:
    """A source file cut into text gaps and numbered method slots."""

    path: str
    pieces: Tuple[Union[str, int], ...]

    def render(self, methods: Mapping[int, str]) -> str:
        parts: List[str] = []
        for piece in self.pieces:
            if isinstance(piece, int):
                parts.append(methods.get(piece, ""))
            else:
                parts.append(piece)
        return "".join(parts)


@dataclass(frozen=True)
class Provenance:
    source_path: str
    tool_version: str = TOOL_VERSION
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class CorpusManifest:
    records: Tuple[MethodRecord, ...]
    provenance: Provenance = field(default_factory=lambda: Provenance(source_path=""), compare=False)
    augmented: Mapping[str, Tuple[RenamedBinding, ...]] = field(default_factory=dict)
    transformed: Mapping[str, RenamedBinding] = field(default_factory=dict)
    stages: Tuple[str, ...] = ()
    layouts: Mapping[str, FileLayout] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        ids = [record.method_id for record in self.records]
        if ids != sorted(ids):
            raise CorpusError("Corpus records must be ordered by method id.")
        seen = set()
        for method_id in ids:
            if method_id in seen:
                raise CorpusError(f"Duplicate method id {method_id!r}.")
            seen.add(method_id)
        stray = (set(self.augmented) | set(self.transformed)) - seen
        if stray:
            raise CorpusError(f"Sidecar entries without records: {sorted(stray)[:5]}")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(record.method_id for record in self.records)

    @property
    def counts_per_split(self) -> Dict[str, int]:
        counts = {split: 0 for split in SPLITS}
        for record in self.records:
            counts[record.split] = counts.get(record.split, 0) + 1
        return counts

    def get(self, method_id: str) -> MethodRecord:
        for record in self.records:
            if record.method_id == method_id:
                return record
        raise CorpusError(f"Unknown method id {method_id!r}.")

    def restrict(self, keep: Iterable[str]) -> "CorpusManifest":
        wanted = set(keep)
        return replace(
            self,
            records=tuple(record for record in self.records if record.method_id in wanted),
            augmented={key: value for key, value in self.augmented.items() if key in wanted},
            transformed={key: value for key, value in self.transformed.items() if key in wanted},
        )


def build_manifest(
    records: Iterable[MethodRecord],
    provenance: Provenance,
    **kwargs: Any,
) -> CorpusManifest:
    """Sort records by id and wrap them in a manifest."""
    ordered = tuple(sorted(records, key=lambda record: record.method_id))
    return CorpusManifest(records=ordered, provenance=provenance, **kwargs)


# ---------------------------------------------------------------------------
# Method splitting
# ---------------------------------------------------------------------------


def _match_delimiters(tokens: Sequence[Any]) -> Optional[Dict[int, int]]:
    closers = {"(": ")", "[": "]", "{": "}"}
    stack: List[Tuple[int, str]] = []
    match: Dict[int, int] = {}
    for index, token in enumerate(tokens):
        if token.kind is not TokenKind.PUNCTUATION:
            continue
        if token.text in closers:
            stack.append((index, closers[token.text]))
        elif token.text in (")", "]", "}"):
            if not stack or stack[-1][1] != token.text:
                return None
            opener, _closer = stack.pop()
            match[opener] = index
    return None if stack else match


def _type_keyword(tokens: Sequence[Any], index: int) -> Optional[str]:
    token = tokens[index]
    if token.is_keyword("class", "interface", "enum"):
        if index and tokens[index - 1].is_op("."):
            return None
        return token.text
    if (
        token.kind is TokenKind.IDENTIFIER
        and token.text == "record"
        and index + 1 < len(tokens)
        and tokens[index + 1].kind is TokenKind.IDENTIFIER
    ):
        return "record"
    return None


def _scan_members(
    tokens: Sequence[Any],
    lo: int,
    hi: int,
    match: Mapping[int, int],
    found: List[Span],
    enum_body: bool,
) -> bool:
    index = lo
    if enum_body:
        while index < hi and not tokens[index].is_op(";"):
            index = match[index] + 1 if index in match else index + 1
        index += 1
    while index < hi:
        start = index
        saw_paren = saw_assign = nested_type = False
        kind = None
        cursor = index
        while cursor < hi:
            token = tokens[cursor]
            if token.is_op(";"):
                kind = "member"
                break
            if token.is_op("="):
                saw_assign = True
            elif _type_keyword(tokens, cursor) is not None:
                nested_type = True
            if token.is_op("{"):
                if saw_assign:
                    cursor = match[cursor] + 1
                    continue
                cursor = match[cursor]
                kind = "method" if saw_paren and not nested_type else "member"
                break
            if token.is_op("(", "["):
                if token.is_op("(") and not saw_assign:
                    saw_paren = True
                cursor = match[cursor] + 1
                continue
            cursor += 1
        if kind is None:
            return False
        if kind == "method":
            found.append(Span(tokens[start].start, tokens[cursor].end))
        index = cursor + 1
    return True


def split_methods(text: str) -> Optional[List[Span]]:
    """Spans of the bodied methods declared directly in a file's type bodies.

    Nested types, fields, initializer blocks and body-less methods are left in
    place. A file without any type header is read as a bare sequence of
    members. Returns ``None`` when delimiters are unbalanced or a literal or
    comment never closes.
    """
    tokens = significant(tokenize(text))
    if any(token.flagged for token in tokens):
        return None
    match = _match_delimiters(tokens)
    if match is None:
        return None
    found: List[Span] = []
    saw_type = False
    index = 0
    while index < len(tokens):
        keyword = _type_keyword(tokens, index)
        if keyword is None:
            index = match[index] + 1 if index in match else index + 1
            continue
        saw_type = True
        body = index + 1
        while body < len(tokens) and not tokens[body].is_op("{"):
            body = match[body] + 1 if body in match else body + 1
        if body >= len(tokens):
            return None
        if not _scan_members(tokens, body + 1, match[body], match, found, keyword == "enum"):
            return None
        index = match[body] + 1
    if not saw_type and not _scan_members(tokens, 0, len(tokens), match, found, False):
        return None
    return found


def layout_file(path: str, text: str) -> Tuple[FileLayout, List[str]]:
    """Cut ``text`` into a layout and its method texts.

    Files that defeat the scanner become one slot holding the whole text.
    """
    spans = split_methods(text)
    if spans is None:
        return FileLayout(path=path, pieces=(0,)), [text]
    pieces: List[Union[str, int]] = []
    methods: List[str] = []
    cursor = 0
    for slot, span in enumerate(spans):
        pieces.append(text[cursor : span.start])
        pieces.append(slot)
        methods.append(span.slice(text))
        cursor = span.end
    pieces.append(text[cursor:])
    return FileLayout(path=path, pieces=tuple(pieces)), methods


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------


def _jsonl_paths(path: Path) -> Tuple[Path, Path, Path]:
    """Data, manifest and stats locations for a jsonl corpus."""
    if path.suffix == ".jsonl":
        return path, path.with_suffix(".manifest.json"), path.with_suffix(".stats.json")
    return path / JSONL_DATA_FILENAME, path / MANIFEST_FILENAME, path / STATS_FILENAME


def _read_manifest_file(path: Path) -> Optional[Dict[str, Any]]:
    if not path.is_file():
        return None
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        logger.warning("ignoring unreadable manifest %s: %s", path, exc)
        return None
    return payload if isinstance(payload, dict) else None


def _split_for(relpath: Path, root: Path) -> str:
    if len(relpath.parts) > 1 and relpath.parts[0] in SPLITS:
        return relpath.parts[0]
    if root.name in SPLITS:
        return root.name
    return DEFAULT_SPLIT


def _ingest_dir_tree(root: Path, saved: Optional[Dict[str, Any]]) -> Tuple[List[MethodRecord], Dict[str, FileLayout]]:
    saved_rows: Dict[Tuple[str, int], Dict[str, Any]] = {}
    for row in (saved or {}).get("records", []):
        if isinstance(row, dict) and row.get("path") is not None:
            saved_rows[(str(row["path"]), int(row.get("index", 0)))] = row

    records: List[MethodRecord] = []
    layouts: Dict[str, FileLayout] = {}
    for file_path in sorted(root.rglob(f"*{JAVA_SUFFIX}")):
        if not file_path.is_file():
            continue
        relpath = file_path.relative_to(root)
        rel = relpath.as_posix()
        try:
            text = decode_source(file_path.read_bytes())
        except OSError as exc:
            logger.warning("skipping unreadable file %s: %s", file_path, exc)
            continue
        if not text.strip():
            logger.info("skipping empty file %s", rel)
            continue
        layout, methods = layout_file(rel, text)
        if layout.pieces == (0,) and len(methods) == 1:
            logger.info("%s: method scanner could not split the file; kept whole", rel)
        elif not methods:
            logger.info("%s: no bodied methods found", rel)
            continue
        layouts[rel] = layout
        split = _split_for(relpath, root)
        for index, source in enumerate(methods):
            row = saved_rows.get((rel, index), {})
            status = RecordStatus(row["status"]) if "status" in row else RecordStatus.CARRIED_OVER
            records.append(
                MethodRecord(
                    method_id=str(row.get("id", f"{rel}#{index}")),
                    source=source,
                    split=str(row.get("split", split)),
                    status=status,
                    path=rel,
                    index=index,
                )
            )
    return records, layouts


def _ingest_jsonl(data_path: Path, saved: Optional[Dict[str, Any]]) -> List[MethodRecord]:
    saved_rows = {
        str(row["id"]): row
        for row in (saved or {}).get("records", [])
        if isinstance(row, dict) and "id" in row
    }
    records: List[MethodRecord] = []
    seen: Dict[str, int] = {}
    with data_path.open("r", encoding="utf-8", errors="surrogateescape") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{data_path}:{line_number}: malformed JSON ({exc.msg}).") from exc
            if not isinstance(payload, dict) or not isinstance(payload.get("id"), str):
                raise CorpusError(f"{data_path}:{line_number}: expected an object with a string 'id'.")
            if not isinstance(payload.get("code"), str):
                raise CorpusError(f"{data_path}:{line_number}: expected a string 'code'.")
            method_id = payload["id"]
            if method_id in seen:
                raise CorpusError(
                    f"{data_path}:{line_number}: duplicate method id {method_id!r} "
                    f"(first seen on line {seen[method_id]})."
                )
            seen[method_id] = line_number
            split = payload.get("split", DEFAULT_SPLIT)
            if split not in SPLITS:
                raise CorpusError(f"{data_path}:{line_number}: unknown split {split!r}.")
            row = saved_rows.get(method_id, {})
            status = RecordStatus(row["status"]) if "status" in row else RecordStatus.CARRIED_OVER
            path = row.get("path")
            records.append(
                MethodRecord(
                    method_id=method_id,
                    source=payload["code"],
                    split=split,
                    status=status,
                    path=None if path is None else str(path),
                    index=int(row.get("index", 0)),
                )
            )
    return records


def _restore_sidecars(saved: Optional[Dict[str, Any]], ids: Iterable[str]) -> Dict[str, Any]:
    if not saved:
        return {}
    known = set(ids)
    augmented = {
        key: tuple(RenamedBinding.from_dict(item) for item in value)
        for key, value in (saved.get("augmented") or {}).items()
        if key in known
    }
    transformed = {
        key: RenamedBinding.from_dict(value)
        for key, value in (saved.get("transformed") or {}).items()
        if key in known
    }
    return {
        "augmented": augmented,
        "transformed": transformed,
        "stages": tuple(saved.get("stages") or ()),
    }


def ingest(path: Union[str, Path], fmt: str = "dir-tree", *, seed: int = DEFAULT_SEED) -> CorpusManifest:
    """Read a corpus from a directory tree of ``.java`` files or a jsonl file.

    A manifest written by :func:`emit` next to the data restores ids, statuses
    and sidecars, so ingest after emit gives back the emitted manifest.
    """
    root = Path(path)
    if fmt == "dir-tree":
        if not root.is_dir():
            raise FileNotFoundError(f"Corpus directory not found: {root}")
        saved = _read_manifest_file(root / MANIFEST_FILENAME)
        records, layouts = _ingest_dir_tree(root, saved)
    elif fmt == "jsonl":
        data_path, manifest_path, _stats_path = _jsonl_paths(root)
        if not data_path.is_file():
            raise FileNotFoundError(f"Corpus jsonl file not found: {data_path}")
        saved = _read_manifest_file(manifest_path)
        records = _ingest_jsonl(data_path, saved)
        layouts = {}
    else:
        raise ValueError(f"Unknown corpus format {fmt!r}.")

    if saved and isinstance(saved.get("seed"), int):
        seed = saved["seed"]
    provenance = Provenance(source_path=str(root), seed=seed)
    sidecars = _restore_sidecars(saved, (record.method_id for record in records))
    corpus = build_manifest(records, provenance, layouts=layouts, **sidecars)
    logger.info("ingested %d methods from %s", len(corpus), root)
    return corpus


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Ordered map, across worker processes when ``workers`` > 1."""
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def _augment_source(source: str, name_based: bool = False) -> Tuple[RecordStatus, str, Tuple[RenamedBinding, ...]]:
    outcome = parse_method(source)
    if outcome.tree is None:
        return RecordStatus.PARSE_FAILED, source, ()
    table = resolve(outcome.tree)
    report = detect_roles(outcome.tree, table)
    result = augment(source, report, table, name_based=name_based)
    if not result.changed:
        return RecordStatus.CARRIED_OVER, source, ()
    return RecordStatus.PROCESSED, result.source, result.renamed_bindings


def _transform_source(
    item: Tuple[str, str], global_seed: int, salt: str = ""
) -> Tuple[RecordStatus, str, Optional[RenamedBinding]]:
    method_id, source = item
    outcome = parse_method(source)
    if outcome.tree is None:
        return RecordStatus.PARSE_FAILED, source, None
    table = resolve(outcome.tree)
    result = transform_rename(source, table, method_id, global_seed, salt=salt)
    if result.renamed is None:
        return RecordStatus.CARRIED_OVER, source, None
    return RecordStatus.PROCESSED, result.source, result.renamed


def detect_document(item: Tuple[str, str]) -> Dict[str, Any]:
    """The ``detect`` JSON document for one method, or its parse failure."""
    method_id, source = item
    outcome = parse_method(source)
    if outcome.tree is None:
        assert outcome.failure is not None
        return {
            "methodId": method_id,
            "error": {"reason": outcome.failure.reason, "position": outcome.failure.position},
        }
    table = resolve(outcome.tree)
    return detect_roles(outcome.tree, table).as_dict(method_id, table, outcome.tree.source)


def run_detect(corpus: CorpusManifest, *, workers: int = 1) -> List[Dict[str, Any]]:
    items = [(record.method_id, record.source) for record in corpus.records]
    return parallel_map(detect_document, items, workers)


def run_augment(
    corpus: CorpusManifest,
    *,
    workers: int = 1,
    name_based: bool = False,
) -> Tuple[CorpusManifest, "StatsReport"]:
    """Detect roles and prefix role variables in every record.

    Records that fail to parse keep their text with status ``parse-failed``;
    parsed records without any rename are ``carried-over``.
    """
    sources = [record.source for record in corpus.records]
    results = parallel_map(partial(_augment_source, name_based=name_based), sources, workers)
    records: List[MethodRecord] = []
    augmented: Dict[str, Tuple[RenamedBinding, ...]] = {}
    for record, (status, source, renamed) in zip(corpus.records, results):
        if status is RecordStatus.PARSE_FAILED:
            logger.debug("%s: parse failed; carried over unchanged", record.method_id)
        records.append(replace(record, source=source, status=status))
        if renamed:
            augmented[record.method_id] = renamed
    result = replace(
        corpus,
        records=tuple(records),
        augmented=augmented,
        stages=corpus.stages + (STAGE_AUGMENT,),
    )
    report = compute_stats(result)
    logger.info(
        "augmented %d of %d methods (%d parse failures)",
        sum(stats.augmented_methods for stats in report.splits.values()),
        len(result),
        sum(stats.parse_failed for stats in report.splits.values()),
    )
    return result, report


def run_transform(
    corpus: CorpusManifest,
    global_seed: int,
    *,
    workers: int = 1,
    salt: str = "",
) -> CorpusManifest:
    """Rename one seeded-random variable per parseable record to ``varN``."""
    items = [(record.method_id, record.source) for record in corpus.records]
    results = parallel_map(partial(_transform_source, global_seed=global_seed, salt=salt), items, workers)
    records: List[MethodRecord] = []
    transformed: Dict[str, RenamedBinding] = {}
    for record, (status, source, renamed) in zip(corpus.records, results):
        records.append(replace(record, source=source, status=status))
        if renamed is not None:
            transformed[record.method_id] = renamed
    return replace(
        corpus,
        records=tuple(records),
        transformed=transformed,
        stages=corpus.stages + (STAGE_TRANSFORM,),
        provenance=replace(corpus.provenance, seed=global_seed),
    )


def filter_pair(
    original: CorpusManifest, roles: CorpusManifest
) -> Tuple[CorpusManifest, CorpusManifest]:
    """Keep only the methods that augmentation changed, in both corpora."""
    original_ids, roles_ids = set(original.ids), set(roles.ids)
    if original_ids != roles_ids:
        missing = sorted(original_ids - roles_ids)[:3]
        extra = sorted(roles_ids - original_ids)[:3]
        raise CorpusError(
            f"Corpora do not share the same method ids (only in original: {missing}, only in roles: {extra})."
        )
    roles_by_id = {record.method_id: record.source for record in roles.records}
    keep = [record.method_id for record in original.records if roles_by_id[record.method_id] != record.source]
    filtered_original = original.restrict(keep)
    filtered_roles = roles.restrict(keep)
    return (
        replace(filtered_original, stages=original.stages + (STAGE_FILTER,)),
        replace(filtered_roles, stages=roles.stages + (STAGE_FILTER,)),
    )


@dataclass(frozen=True)
class EvalSuite:
    """The eight evaluation corpora: plain, roles, filtered and transformed."""

    jl: CorpusManifest
    jlr: CorpusManifest
    jl_f: CorpusManifest
    jlr_f: CorpusManifest
    jlt: CorpusManifest
    jltr: CorpusManifest
    jlt_f: CorpusManifest
    jltr_f: CorpusManifest

    def items(self) -> Iterator[Tuple[str, CorpusManifest]]:
        for name in SUITE_NAMES:
            yield name, getattr(self, name)

    def sizes(self) -> Dict[str, int]:
        return {name: len(corpus) for name, corpus in self.items()}


def build_eval_suite(
    original: CorpusManifest,
    roles: Optional[CorpusManifest] = None,
    seed: int = DEFAULT_SEED,
    *,
    workers: int = 1,
    name_based: bool = False,
    independent_seeds: bool = False,
) -> EvalSuite:
    """Build the paired evaluation sets from one test corpus.

    The transformed roles set is ``transform(roles)``; both transformed sets
    share per-method seeds unless ``independent_seeds`` salts the roles side.
    Filtered transformed sets keep the ids of the untransformed filtered sets.
    """
    if roles is None:
        roles, _report = run_augment(original, workers=workers, name_based=name_based)
    jl_f, jlr_f = filter_pair(original, roles)
    jlt = run_transform(original, seed, workers=workers)
    salt = INDEPENDENT_SEED_SALT if independent_seeds else ""
    jltr = run_transform(roles, seed, workers=workers, salt=salt)
    kept = jl_f.ids
    return EvalSuite(
        jl=original,
        jlr=roles,
        jl_f=jl_f,
        jlr_f=jlr_f,
        jlt=jlt,
        jltr=jltr,
        jlt_f=replace(jlt.restrict(kept), stages=jlt.stages + (STAGE_FILTER,)),
        jltr_f=replace(jltr.restrict(kept), stages=jltr.stages + (STAGE_FILTER,)),
    )


def method_targets(corpus: CorpusManifest) -> List[Dict[str, str]]:
    """Method name of every parseable record, as evaluation references."""
    rows: List[Dict[str, str]] = []
    for record in corpus.records:
        outcome = parse_method(record.source)
        if outcome.tree is None:
            continue
        rows.append({"id": record.method_id, "ref": method_name(outcome.tree)})
    return rows


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitStats:
    methods: int = 0
    augmented_methods: int = 0
    parse_failed: int = 0

    def as_dict(self) -> Dict[str, int]:
        return {
            "methods": self.methods,
            "augmentedMethods": self.augmented_methods,
            "parseFailed": self.parse_failed,
        }


@dataclass(frozen=True)
class StatsReport:
    splits: Mapping[str, SplitStats]
    steppers: int
    walkers: int
    stepper_name_histogram: Tuple[Tuple[str, int], ...]
    # Same-named bindings prefixed only by the name-based mode.
    name_based_extras: int = 0

    @property
    def total_augmented_vars(self) -> int:
        return self.steppers + self.walkers

    @property
    def coverage(self) -> float:
        methods = sum(stats.methods for stats in self.splits.values())
        augmented_methods = sum(stats.augmented_methods for stats in self.splits.values())
        return augmented_methods / methods if methods else 0.0

    def stepper_name_shares(self, top_n: int = STEPPER_SHARE_TOP_N) -> Dict[str, float]:
        if not self.steppers:
            return {}
        return {name: count / self.steppers for name, count in self.stepper_name_histogram[:top_n]}

    def as_dict(self) -> Dict[str, Any]:
        return {
            "splits": {split: stats.as_dict() for split, stats in self.splits.items()},
            "steppers": self.steppers,
            "walkers": self.walkers,
            "totalAugmentedVars": self.total_augmented_vars,
            "stepperNameHistogram": dict(self.stepper_name_histogram),
            "coverage": self.coverage,
            "stepperNameShares": self.stepper_name_shares(),
            "nameBasedExtras": self.name_based_extras,
        }


def _role_prefix(item: RenamedBinding) -> Optional[str]:
    for prefix in (STEPPER_PREFIX, WALKER_PREFIX):
        if item.new_name == prefix + item.old_name:
            return prefix
    return None


def compute_stats(corpus: CorpusManifest) -> StatsReport:
    """Recount a report from record statuses and the augmentation sidecar."""
    methods: Counter = Counter()
    augmented_methods: Counter = Counter()
    parse_failed: Counter = Counter()
    histogram: Counter = Counter()
    steppers = walkers = extras = 0
    for record in corpus.records:
        methods[record.split] += 1
        if record.status is RecordStatus.PARSE_FAILED:
            parse_failed[record.split] += 1
        renamed = corpus.augmented.get(record.method_id, ())
        if renamed:
            augmented_methods[record.split] += 1
        for item in renamed:
            if item.name_based_extra:
                extras += 1
                continue
            prefix = _role_prefix(item)
            if prefix == STEPPER_PREFIX:
                steppers += 1
                histogram[item.old_name] += 1
            elif prefix == WALKER_PREFIX:
                walkers += 1
    splits = {
        split: SplitStats(methods[split], augmented_methods[split], parse_failed[split])
        for split in sorted(set(SPLITS) | set(methods), key=_split_order)
    }
    ordered = tuple(sorted(histogram.items(), key=lambda item: (-item[1], item[0])))
    return StatsReport(
        splits=splits,
        steppers=steppers,
        walkers=walkers,
        stepper_name_histogram=ordered,
        name_based_extras=extras,
    )


def _split_order(split: str) -> Tuple[int, str]:
    return (SPLITS.index(split) if split in SPLITS else len(SPLITS), split)


def stats(corpus: CorpusManifest, *, workers: int = 1) -> StatsReport:
    """Statistics of an augmented corpus, re-detecting roles when it is not one."""
    if STAGE_AUGMENT in corpus.stages:
        return compute_stats(corpus)
    _augmented, report = run_augment(corpus, workers=workers)
    return report


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def manifest_payload(corpus: CorpusManifest, *, epoch: Optional[int] = None) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "tool_version": corpus.provenance.tool_version,
        "seed": corpus.provenance.seed,
        "source_path": corpus.provenance.source_path,
        "stages": list(corpus.stages),
        "splits": corpus.counts_per_split,
        "augmented": {
            key: [item.as_dict() for item in corpus.augmented[key]] for key in sorted(corpus.augmented)
        },
        "transformed": {key: corpus.transformed[key].as_dict() for key in sorted(corpus.transformed)},
        "records": [record.manifest_row() for record in corpus.records],
    }
    if epoch is not None:
        payload["created"] = epoch
    return payload


def _write_json(path: Path, payload: Mapping[str, Any]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"Unable to write {path}: {exc}") from exc


def _assign_paths(corpus: CorpusManifest) -> CorpusManifest:
    """Give records that never came from a file a path of their own."""
    taken = {record.path for record in corpus.records if record.path is not None}
    records: List[MethodRecord] = []
    for record in corpus.records:
        if record.path is not None:
            records.append(record)
            continue
        stem = _UNSAFE_PATH_CHARS.sub("_", record.method_id).strip("._") or "method"
        candidate = f"{record.split}/{stem}{JAVA_SUFFIX}"
        counter = 1
        while candidate in taken:
            candidate = f"{record.split}/{stem}_{counter}{JAVA_SUFFIX}"
            counter += 1
        taken.add(candidate)
        records.append(replace(record, path=candidate, index=0))
    return replace(corpus, records=tuple(records))


def _plain_layout(rel: str, slots: Sequence[int]) -> FileLayout:
    """Methods separated by blank lines, for records with no source file."""
    pieces: List[Union[str, int]] = []
    for position, slot in enumerate(slots):
        if position:
            pieces.append("\n\n")
        pieces.append(slot)
    pieces.append("\n")
    return FileLayout(path=rel, pieces=tuple(pieces))


def emit(
    corpus: CorpusManifest,
    path: Union[str, Path],
    fmt: str = "dir-tree",
    *,
    epoch: Optional[int] = None,
    report: Optional[StatsReport] = None,
) -> List[Path]:
    """Write records, the manifest and optionally a stats report.

    dir-tree output mirrors the input files, with each method slot refilled
    from its record; jsonl output lists records in manifest order.
    """
    target = Path(path)
    written: List[Path] = []
    if fmt == "dir-tree":
        corpus = _assign_paths(corpus)
        by_file: Dict[str, Dict[int, str]] = {}
        for record in corpus.records:
            assert record.path is not None
            by_file.setdefault(record.path, {})[record.index] = record.source
        # Slots left empty by filtering vanish from the file, so renumber the
        # survivors the way a re-scan of the written file will number them.
        position = {
            (rel, slot): rank
            for rel, slots in by_file.items()
            for rank, slot in enumerate(sorted(slots))
        }
        corpus = replace(
            corpus,
            records=tuple(
                replace(record, index=position[(record.path, record.index)])
                for record in corpus.records
            ),
        )
        for rel in sorted(by_file):
            layout = corpus.layouts.get(rel) or _plain_layout(rel, sorted(by_file[rel]))
            file_path = target / rel
            try:
                file_path.parent.mkdir(parents=True, exist_ok=True)
                file_path.write_bytes(encode_source(layout.render(by_file[rel])))
            except OSError as exc:
                raise OSError(f"Unable to write {file_path}: {exc}") from exc
            written.append(file_path)
        manifest_path = target / MANIFEST_FILENAME
        stats_path = target / STATS_FILENAME
    elif fmt == "jsonl":
        data_path, manifest_path, stats_path = _jsonl_paths(target)
        try:
            data_path.parent.mkdir(parents=True, exist_ok=True)
            with data_path.open("w", encoding="utf-8", newline="\n") as handle:
                for record in corpus.records:
                    row = {"id": record.method_id, "code": record.source, "split": record.split}
                    handle.write(json.dumps(row) + "\n")
        except OSError as exc:
            raise OSError(f"Unable to write {data_path}: {exc}") from exc
        written.append(data_path)
    else:
        raise ValueError(f"Unknown corpus format {fmt!r}.")

    _write_json(manifest_path, manifest_payload(corpus, epoch=epoch))
    written.append(manifest_path)
    if report is not None:
        _write_json(stats_path, report.as_dict())
        written.append(stats_path)
    return written


__all__ = [
    "STAGE_AUGMENT",
    "STAGE_TRANSFORM",
    "STAGE_FILTER",
    "JSONL_DATA_FILENAME",
    "MethodRecord",
    "FileLayout",
    "Provenance",
    "CorpusManifest",
    "build_manifest",
    "split_methods",
    "layout_file",
    "ingest",
    "parallel_map",
    "detect_document",
    "run_detect",
    "run_augment",
    "run_transform",
    "filter_pair",
    "EvalSuite",
    "build_eval_suite",
    "method_targets",
    "SplitStats",
    "StatsReport",
    "compute_stats",
    "stats",
    "manifest_payload",
    "emit",
]
