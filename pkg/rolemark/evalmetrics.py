"""Sub-token precision, recall and F1 for method-name predictions."""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from itertools import groupby
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .base import UNK_SUBTOKEN, CorpusError

logger = logging.getLogger(__name__)

_SEPARATORS = re.compile(r"[\W_]+")

PER_EXAMPLE_COLUMNS = ("id", "tp", "predLen", "refLen", "precision", "recall", "f1")


def _char_class(char: str) -> str:
    if char.isupper():
        return "upper"
    if char.islower():
        return "lower"
    if char.isdigit():
        return "digit"
    return "other"


def _case_pieces(chunk: str) -> List[str]:
    """Split one separator-free chunk at case and digit boundaries.

    An upper-case run directly before lower-case letters gives its last letter
    to the word that follows, so ``XMLParser`` splits as ``XML`` and ``Parser``.
    """
    pieces: List[str] = []
    upper = ""
    for kind, chars in groupby(chunk, key=_char_class):
        text = "".join(chars)
        if kind == "upper":
            upper = text
            continue
        if kind == "lower":
            if len(upper) > 1:
                pieces.append(upper[:-1])
            pieces.append(upper[-1:] + text)
        else:
            if upper:
                pieces.append(upper)
            pieces.append(text)
        upper = ""
    if upper:
        pieces.append(upper)
    return pieces


def subtokenize(name: str) -> List[str]:
    """``parseHTTP2Frame`` -> ``['parse', 'http', '2', 'frame']``; letters may be any script."""
    pieces: List[str] = []
    for chunk in _SEPARATORS.split(unicodedata.normalize("NFC", name)):
        pieces.extend(piece.lower() for piece in _case_pieces(chunk))
    return [piece for piece in pieces if piece]


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class NamePair:
    method_id: str
    reference: str
    prediction: str = ""


@dataclass(frozen=True)
class ExampleScore:
    method_id: str
    tp: int
    pred_len: int
    ref_len: int

    @property
    def precision(self) -> float:
        return self.tp / self.pred_len if self.pred_len else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.ref_len if self.ref_len else 1.0

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)


def _drop_ignored(text: str, ignore: Iterable[str]) -> str:
    for token in ignore:
        text = text.replace(token, " ")
    return text


def score_example(
    prediction: str,
    reference: str,
    *,
    method_id: str = "",
    ignore_subtokens: Sequence[str] = (),
) -> ExampleScore:
    """True positives are the multiset intersection of the two sub-token lists."""
    pred = subtokenize(_drop_ignored(prediction, ignore_subtokens))
    ref = subtokenize(reference)
    tp = sum((Counter(pred) & Counter(ref)).values())
    return ExampleScore(method_id=method_id, tp=tp, pred_len=len(pred), ref_len=len(ref))


@dataclass(frozen=True)
class MicroScores:
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> Dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}

    def summary_line(self) -> str:
        return f"P={self.precision:.3f} R={self.recall:.3f} F1={self.f1:.3f}"


@dataclass(frozen=True)
class EvalReport:
    micro: MicroScores
    per_example: Tuple[ExampleScore, ...]
    empty_predictions: int

    @property
    def counts(self) -> Dict[str, int]:
        return {"examples": len(self.per_example), "emptyPredictions": self.empty_predictions}

    def as_dict(self) -> Dict[str, Any]:
        return {"micro": self.micro.as_dict(), "counts": self.counts}

    def per_example_frame(self) -> pd.DataFrame:
        rows = [
            (item.method_id, item.tp, item.pred_len, item.ref_len, item.precision, item.recall, item.f1)
            for item in self.per_example
        ]
        return pd.DataFrame(rows, columns=list(PER_EXAMPLE_COLUMNS))

    def write_per_example_csv(self, path: Union[str, Path]) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        self.per_example_frame().to_csv(target, index=False, lineterminator="\n")
        return target


def evaluate(pairs: Iterable[NamePair], *, ignore_subtokens: Sequence[str] = ()) -> EvalReport:
    """Micro-averaged scores: sums of true positives over sums of lengths.

    Precision is 0 when nothing was predicted; recall is 1 when a reference
    has no sub-tokens. An empty evaluation reports zeros.
    """
    scores: List[ExampleScore] = []
    seen = set()
    empty = 0
    for pair in pairs:
        if pair.method_id in seen:
            raise CorpusError(f"Duplicate method id {pair.method_id!r} in evaluation pairs.")
        seen.add(pair.method_id)
        score = score_example(
            pair.prediction,
            pair.reference,
            method_id=pair.method_id,
            ignore_subtokens=ignore_subtokens,
        )
        if score.pred_len == 0:
            empty += 1
        scores.append(score)

    if not scores:
        return EvalReport(micro=MicroScores(0.0, 0.0, 0.0), per_example=(), empty_predictions=0)

    totals = np.array([(item.tp, item.pred_len, item.ref_len) for item in scores], dtype=np.int64).sum(axis=0)
    tp, pred_total, ref_total = (int(value) for value in totals)
    precision = tp / pred_total if pred_total else 0.0
    recall = tp / ref_total if ref_total else 1.0
    micro = MicroScores(precision=precision, recall=recall, f1=f1_score(precision, recall))
    return EvalReport(micro=micro, per_example=tuple(scores), empty_predictions=empty)


def compare_reports(baseline: EvalReport, candidate: EvalReport) -> Dict[str, Any]:
    """Side-by-side scores of two models on one test set, with differences."""
    base = baseline.micro.as_dict()
    cand = candidate.micro.as_dict()
    return {
        "baseline": base,
        "candidate": cand,
        "delta": {metric: cand[metric] - base[metric] for metric in base},
        "examples": {"baseline": len(baseline.per_example), "candidate": len(candidate.per_example)},
    }


# ---------------------------------------------------------------------------
# Input files
# ---------------------------------------------------------------------------


def _read_jsonl(path: Path) -> Iterable[Tuple[int, Mapping[str, Any]]]:
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{line_number}: malformed JSON ({exc.msg}).") from exc
            if not isinstance(payload, dict) or "id" not in payload:
                raise CorpusError(f"{path}:{line_number}: expected an object with an 'id'.")
            yield line_number, payload


def load_pairs(path: Union[str, Path]) -> List[NamePair]:
    """Read ``{"id", "ref", "pred"}`` lines."""
    pairs: List[NamePair] = []
    for line_number, row in _read_jsonl(Path(path)):
        if "ref" not in row:
            raise CorpusError(f"{path}:{line_number}: missing 'ref'.")
        pairs.append(NamePair(str(row["id"]), str(row["ref"]), str(row.get("pred") or "")))
    return pairs


def load_refs_preds(refs_path: Union[str, Path], preds_path: Union[str, Path]) -> List[NamePair]:
    """Join references with predictions.

    jsonl inputs are joined on ``id`` (a missing prediction counts as empty);
    plain text inputs are aligned line by line and must have equal length.
    """
    refs_path, preds_path = Path(refs_path), Path(preds_path)
    if refs_path.suffix == ".jsonl":
        refs: Dict[str, str] = {}
        for line_number, row in _read_jsonl(refs_path):
            method_id = str(row["id"])
            if method_id in refs:
                raise CorpusError(f"{refs_path}:{line_number}: duplicate method id {method_id!r}.")
            refs[method_id] = str(row.get("ref", ""))
        preds: Dict[str, str] = {}
        for _line_number, row in _read_jsonl(preds_path):
            preds[str(row["id"])] = str(row.get("pred") or "")
        unknown = sorted(set(preds) - set(refs))
        if unknown:
            logger.warning("%d predictions have no reference (first: %r)", len(unknown), unknown[0])
        return [NamePair(method_id, ref, preds.get(method_id, "")) for method_id, ref in refs.items()]

    ref_lines = refs_path.read_text(encoding="utf-8").splitlines()
    pred_lines = preds_path.read_text(encoding="utf-8").splitlines()
    if len(ref_lines) != len(pred_lines):
        raise CorpusError(
            f"{refs_path} has {len(ref_lines)} lines but {preds_path} has {len(pred_lines)}."
        )
    return [
        NamePair(str(index), ref.strip(), pred.strip())
        for index, (ref, pred) in enumerate(zip(ref_lines, pred_lines), start=1)
    ]


def default_ignored(enabled: bool) -> Tuple[str, ...]:
    return (UNK_SUBTOKEN,) if enabled else ()


def report_payload(report: EvalReport, comparison: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    payload = report.as_dict()
    if comparison is not None:
        payload["comparison"] = comparison
    return payload


__all__ = [
    "PER_EXAMPLE_COLUMNS",
    "subtokenize",
    "f1_score",
    "NamePair",
    "ExampleScore",
    "score_example",
    "MicroScores",
    "EvalReport",
    "evaluate",
    "compare_reports",
    "load_pairs",
    "load_refs_preds",
    "default_ignored",
    "report_payload",
]
