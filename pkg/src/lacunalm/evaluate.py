"""Accuracy scoring over masked test sets, bucketed by gap length.

A prediction counts iff it matches the target character exactly. Each masked
position belongs to the bucket of the contiguous mask run containing it
(1..5, then "6+"), measured on the runs themselves so auto-masked and gold
sets bucket identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Sentence, SentenceClass, SegmentKind, classify
from .errors import ContainsBlankLacuna, EmptyTestSet, NoMaskedPositions
from .masking import MaskedSample
from .vocab import MASK, UNK, Vocabulary

BUCKETS = ("1", "2", "3", "4", "5", "6+")


def bucket_label(run_length: int) -> str:
    return str(run_length) if run_length <= 5 else "6+"


@dataclass(frozen=True)
class EvalReport:
    test_set_name: str
    total_masked: int
    correct: int
    accuracy: float
    per_length_buckets: dict[str, tuple[int, float]]
    model_id: str
    seed: int

    def to_dict(self) -> dict:
        return {
            "test_set": self.test_set_name,
            "model_id": self.model_id,
            "seed": self.seed,
            "total_masked": self.total_masked,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "buckets": {
                label: {"count": n, "accuracy": acc}
                for label, (n, acc) in self.per_length_buckets.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def format_table(self) -> str:
        lines = [
            f"test set: {self.test_set_name}   model: {self.model_id}",
            f"accuracy: {self.accuracy:.3f}  ({self.correct}/{self.total_masked})",
            "gap length   masked   accuracy",
        ]
        for label in BUCKETS:
            n, acc = self.per_length_buckets.get(label, (0, 0.0))
            lines.append(f"{label:>10}   {n:>6}   {acc:8.3f}")
        return "\n".join(lines)


def mask_runs(positions: list[int]) -> list[list[int]]:
    """Split sorted positions into maximal contiguous runs."""
    runs: list[list[int]] = []
    for pos in positions:
        if runs and pos == runs[-1][-1] + 1:
            runs[-1].append(pos)
        else:
            runs.append([pos])
    return runs


def build_gold_test(
    sentences: list[Sentence], vocabulary: Vocabulary
) -> list[MaskedSample]:
    """Turn reconstructed-lacuna sentences into masked samples: every
    bracketed character becomes a masked position with the scholar's reading
    as target; damaged characters stay visible context."""
    samples = []
    for s in sentences:
        cls = classify(s)
        if cls is SentenceClass.HAS_BLANK:
            raise ContainsBlankLacuna(f"{s.id}: blank lacuna in gold-style sentence")
        if cls is not SentenceClass.RECONSTRUCTED_ONLY:
            raise ValueError(f"{s.id}: sentence has no reconstructed lacuna")
        chars = s.logical_chars()
        target_ids = vocabulary.encode("".join(chars))  # no blanks by now
        masked: set[int] = set()
        for start, length in s.spans(SegmentKind.RECONSTRUCTED_LACUNA):
            masked.update(range(start, start + length))
        input_ids = np.asarray(target_ids, dtype=np.int64).copy()
        input_ids[sorted(masked)] = MASK
        samples.append(
            MaskedSample(
                input_ids,
                np.asarray(target_ids, dtype=np.int64),
                frozenset(masked),
            )
        )
    return samples


def evaluate(
    predictor,
    test_set: list[MaskedSample],
    vocabulary: Vocabulary,
    test_set_name: str = "",
    model_id: str = "",
    seed: int = 0,
) -> EvalReport:
    """Character-exact accuracy over every masked position.

    `predictor` exposes predict(sample) -> chars for the sorted mask
    positions; predict_batch(samples) is used instead when available.
    """
    if not test_set:
        raise EmptyTestSet("no samples to evaluate")
    for i, sample in enumerate(test_set):
        if not sample.mask_positions:
            raise NoMaskedPositions(f"sample {i} has no masked positions")

    if hasattr(predictor, "predict_batch"):
        all_preds = predictor.predict_batch(test_set)
    else:
        all_preds = [predictor.predict(s) for s in test_set]

    total = 0
    correct = 0
    bucket_counts = {label: 0 for label in BUCKETS}
    bucket_correct = {label: 0 for label in BUCKETS}
    for sample, preds in zip(test_set, all_preds):
        positions = sample.sorted_positions
        if len(preds) != len(positions):
            raise ValueError("predictor returned wrong number of characters")
        by_pos = dict(zip(positions, preds))
        for run in mask_runs(positions):
            label = bucket_label(len(run))
            for pos in run:
                target = vocabulary.symbols[int(sample.target_ids[pos])]
                hit = int(sample.target_ids[pos]) != UNK and by_pos[pos] == target
                total += 1
                bucket_counts[label] += 1
                if hit:
                    correct += 1
                    bucket_correct[label] += 1

    buckets = {
        label: (
            bucket_counts[label],
            bucket_correct[label] / bucket_counts[label] if bucket_counts[label] else 0.0,
        )
        for label in BUCKETS
    }
    return EvalReport(
        test_set_name=test_set_name,
        total_masked=total,
        correct=correct,
        accuracy=correct / total,
        per_length_buckets=buckets,
        model_id=model_id,
        seed=seed,
    )


def write_report(report: EvalReport, path: Path) -> None:
    Path(path).write_text(report.to_json() + "\n", encoding="utf-8")
