"""Training/evaluation mask generation.

Two distributions (random 15% BERT-style vs smart lacuna-shaped gaps) times
two re-masking schedules (once at load vs fresh every epoch). All randomness
flows through per-sentence generators keyed on (seed, epoch, sentence index),
so masking is order-independent and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .corpus import Segment, SegmentKind, Sentence, UNDERDOT
from .errors import EmptySequence
from .vocab import MASK

SELECT_RATE = 0.15
SUB_MASK, SUB_RANDOM = 0.80, 0.10  # remaining 0.10 leaves the char in place
GAP_LENGTH_PROBS = ((1, 0.48), (2, 0.22), (3, 0.12))  # else uniform over 4..34
GAP_TAIL_LO, GAP_TAIL_HI = 4, 34
MAX_GAPS = 5
PLACEMENT_ATTEMPTS = 20

# stream key for the fixed dev-set masks; out of range of any real epoch
DEV_STREAM = 2**31 - 1


class Distribution(Enum):
    RANDOM = "random"
    SMART = "smart"


class Remask(Enum):
    ONCE = "once"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class MaskPolicy:
    distribution: Distribution
    remask: Remask
    seed: int

    @property
    def name(self) -> str:
        return f"{self.distribution.value}-{self.remask.value}"


def policy_from_name(name: str, seed: int) -> MaskPolicy:
    dist, _, remask = name.partition("-")
    return MaskPolicy(Distribution(dist), Remask(remask), seed)


@dataclass(frozen=True)
class MaskedSample:
    input_ids: np.ndarray
    target_ids: np.ndarray
    mask_positions: frozenset[int]
    epoch_tag: int = 0

    @property
    def sorted_positions(self) -> list[int]:
        return sorted(self.mask_positions)


def random_mask(ids: np.ndarray, vocab_size: int, rng: np.random.Generator) -> MaskedSample:
    """BERT-style masking: each position selected w.p. 0.15; a selected
    position becomes MASK (80%), a random non-special symbol (10%), or stays
    unchanged (10%). Unchanged positions still count as masked for the loss.
    If nothing got selected, one position is forced so the sample carries
    training signal.
    """
    ids = np.asarray(ids, dtype=np.int64)
    n = len(ids)
    if n == 0:
        raise EmptySequence("cannot mask an empty sequence")
    selected = rng.random(n) < SELECT_RATE
    if not selected.any():
        selected[rng.integers(n)] = True
    positions = np.flatnonzero(selected)
    inputs = ids.copy()
    roll = rng.random(len(positions))
    randoms = rng.integers(3, vocab_size, size=len(positions))
    for pos, r, alt in zip(positions, roll, randoms):
        if r < SUB_MASK:
            inputs[pos] = MASK
        elif r < SUB_MASK + SUB_RANDOM:
            inputs[pos] = alt
        # else: left unchanged
    return MaskedSample(inputs, ids, frozenset(int(p) for p in positions))


def sample_gap_length(rng: np.random.Generator) -> int:
    u = rng.random()
    acc = 0.0
    for length, p in GAP_LENGTH_PROBS:
        acc += p
        if u < acc:
            return length
    return int(rng.integers(GAP_TAIL_LO, GAP_TAIL_HI + 1))


def smart_mask(ids: np.ndarray, rng: np.random.Generator) -> MaskedSample:
    """Lacuna-shaped masking: 1-5 contiguous gaps, lengths drawn from the
    empirical gold-set distribution, truncated at the sequence end. Gapped
    positions are always MASK (a real lacuna shows no character evidence).
    Colliding gaps are re-placed up to 20 times, then dropped.
    """
    ids = np.asarray(ids, dtype=np.int64)
    n = len(ids)
    if n < 2:
        raise EmptySequence("smart masking needs a sequence of length >= 2")
    occupied = np.zeros(n, dtype=bool)
    n_gaps = int(rng.integers(1, MAX_GAPS + 1))
    for _ in range(n_gaps):
        length = sample_gap_length(rng)
        for _ in range(PLACEMENT_ATTEMPTS):
            start = int(rng.integers(n))
            end = min(start + length, n)
            if not occupied[start:end].any():
                occupied[start:end] = True
                break
    inputs = ids.copy()
    inputs[occupied] = MASK
    return MaskedSample(inputs, ids, frozenset(int(p) for p in np.flatnonzero(occupied)))


def _sentence_rng(seed: int, stream: int, idx: int) -> np.random.Generator:
    # per-epoch seed is seed XOR stream; per-sentence independence via idx
    return np.random.default_rng(np.random.SeedSequence((seed ^ stream, idx)))


def mask_one(
    ids: np.ndarray,
    policy: MaskPolicy,
    vocab_size: int,
    stream: int,
    idx: int,
) -> MaskedSample:
    rng = _sentence_rng(policy.seed, stream, idx)
    if policy.distribution is Distribution.RANDOM:
        sample = random_mask(ids, vocab_size, rng)
    else:
        sample = smart_mask(ids, rng)
    return MaskedSample(sample.input_ids, sample.target_ids, sample.mask_positions, stream)


def apply_policy(
    split: list[np.ndarray],
    policy: MaskPolicy,
    epoch: int,
    vocab_size: int,
) -> list[MaskedSample]:
    """Mask a whole split for one epoch.

    Once-policies always use the epoch-0 stream, so every epoch sees the
    identical samples; dynamic policies re-draw per epoch, deterministically
    in (seed, epoch).
    """
    stream = 0 if policy.remask is Remask.ONCE else epoch
    return [
        mask_one(ids, policy, vocab_size, stream, idx)
        for idx, ids in enumerate(split)
    ]


def dev_masks(split: list[np.ndarray], policy: MaskPolicy, vocab_size: int) -> list[MaskedSample]:
    """Dev-set masks: same distribution as the policy but a fixed stream, so
    early stopping compares epochs against a constant target."""
    return [
        mask_one(ids, policy, vocab_size, DEV_STREAM, idx)
        for idx, ids in enumerate(split)
    ]


def masked_line(sentence: Sentence, mask_positions: frozenset[int]) -> str:
    """Re-serialize a complete sentence with mask runs as bracketed spans.

    The original characters go inside the brackets (reconstruction markup),
    so a persisted masked set reloads through the ordinary corpus parser with
    targets intact. Underdots survive outside brackets and are dropped within.
    """
    for seg in sentence.segments:
        if seg.kind in (SegmentKind.BLANK_LACUNA, SegmentKind.RECONSTRUCTED_LACUNA):
            raise ValueError("masked_line expects a complete sentence")
    chars = sentence.logical_chars()
    damaged = sentence.damaged_positions()
    out: list[str] = []
    i = 0
    n = len(chars)
    while i < n:
        if i in mask_positions:
            j = i
            while j < n and j in mask_positions:
                j += 1
            out.append("[" + "".join(chars[i:j]) + "]")
            i = j
        else:
            out.append(chars[i] + (UNDERDOT if i in damaged else ""))
            i += 1
    return "".join(out)


def write_masked_set(
    sentences: list[Sentence],
    samples: list[MaskedSample],
    path: Path,
) -> None:
    lines = [
        masked_line(sent, sample.mask_positions)
        for sent, sample in zip(sentences, samples)
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
