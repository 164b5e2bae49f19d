"""Rank same-length reconstruction candidates for a gap by log probability.

All gap positions are masked in one forward pass and each candidate is
scored as the sum of its per-position natural-log probabilities, so every
candidate sees the identical context and the scores are directly comparable.
Candidate characters never feed back into the context.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import SegmentKind, Sentence
from .errors import (
    DuplicateCandidate,
    LengthMismatch,
    MixedCandidateLengths,
    MultipleGaps,
    NoCandidates,
    NoGapPresent,
    UnknownCharacter,
)
from .model import CharBiLSTM, GapPrediction, predict_distributions
from .vocab import Vocabulary


@dataclass(frozen=True)
class RankQuery:
    context: Sentence
    candidates: tuple[str, ...]


@dataclass(frozen=True)
class RankedCandidate:
    text: str
    log_prob: float
    rank: int


def gap_length(sentence: Sentence) -> int:
    """Length of the single blank gap; rejects zero or multiple gaps."""
    gaps = sentence.spans(SegmentKind.BLANK_LACUNA)
    if not gaps:
        raise NoGapPresent("ranking context must contain a blank lacuna")
    if len(gaps) > 1:
        raise MultipleGaps(
            "ranking supports exactly one blank gap; fill or bracket the others"
        )
    return gaps[0][1]


def score_ids(prediction: GapPrediction, candidate_ids: list[int]) -> float:
    """Sum of per-position log probabilities for an id sequence."""
    if len(candidate_ids) != len(prediction.positions):
        raise LengthMismatch(
            f"candidate length {len(candidate_ids)} != gap length {len(prediction.positions)}"
        )
    return float(sum(prediction.log_probs[i, c] for i, c in enumerate(candidate_ids)))


def _candidate_ids(candidate: str, vocabulary: Vocabulary) -> list[int]:
    ids = []
    for ch in candidate:
        idx = vocabulary.index.get(ch)
        if idx is None:
            raise UnknownCharacter(f"character {ch!r} is not in the vocabulary")
        ids.append(idx)
    return ids


def score_candidate(
    context: Sentence,
    candidate: str,
    model: CharBiLSTM,
    vocabulary: Vocabulary,
) -> float:
    prediction = predict_distributions(context, model, vocabulary)
    if len(candidate) != len(prediction.positions):
        raise LengthMismatch(
            f"candidate length {len(candidate)} != gap length {len(prediction.positions)}"
        )
    return score_ids(prediction, _candidate_ids(candidate, vocabulary))


def validate_query(query: RankQuery) -> int:
    """Check RankQuery invariants; returns the gap length."""
    length = gap_length(query.context)
    if not query.candidates:
        raise NoCandidates("at least one candidate is required")
    if len(set(query.candidates)) != len(query.candidates):
        raise DuplicateCandidate("candidates must be unique")
    lengths = {len(c) for c in query.candidates}
    if len(lengths) > 1:
        raise MixedCandidateLengths(
            "all candidates must have the same character length; "
            f"got lengths {sorted(lengths)}"
        )
    if lengths != {length}:
        raise LengthMismatch(
            f"candidates have length {lengths.pop()} but the gap holds {length}"
        )
    return length


def rank_candidates(
    query: RankQuery, model: CharBiLSTM, vocabulary: Vocabulary
) -> list[RankedCandidate]:
    """Score every candidate from one shared forward pass and sort by log
    probability, descending; ties break lexicographically."""
    validate_query(query)
    prediction = predict_distributions(query.context, model, vocabulary)
    scored = [
        (score_ids(prediction, _candidate_ids(c, vocabulary)), c)
        for c in query.candidates
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [
        RankedCandidate(text=c, log_prob=lp, rank=i + 1)
        for i, (lp, c) in enumerate(scored)
    ]
