"""Manuscript lines with lacuna markup: parsing, classification, partitioning.

Markup grammar (one sentence per line, UTF-8):
  ``[...]``   blank lacuna, one dot per estimated missing character
  ``[abc]``   span reconstructed by a scholar
  ``x`` + U+0323 (combining dot below)   damaged but legible character

Parsing is strict: nested/unbalanced brackets, empty brackets, and bracket
content mixing dots with letters are rejected with positioned errors rather
than repaired.
"""

from __future__ import annotations

import hashlib
import logging
import random
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import (
    EmptyBrackets,
    EmptyCorpus,
    MarkupError,
    MixedBracketContent,
    UnbalancedBrackets,
)

log = logging.getLogger(__name__)

UNDERDOT = "̣"


class SegmentKind(Enum):
    VISIBLE = "visible"
    BLANK_LACUNA = "blank"
    RECONSTRUCTED_LACUNA = "reconstructed"
    DAMAGED_VISIBLE = "damaged"


class SentenceClass(Enum):
    COMPLETE = "complete"
    RECONSTRUCTED_ONLY = "reconstructed_only"
    HAS_BLANK = "has_blank"


@dataclass(frozen=True)
class Segment:
    kind: SegmentKind
    text: str  # empty for blank lacunae
    length: int

    def serialize(self) -> str:
        if self.kind is SegmentKind.VISIBLE:
            return self.text
        if self.kind is SegmentKind.BLANK_LACUNA:
            return "[" + "." * self.length + "]"
        if self.kind is SegmentKind.RECONSTRUCTED_LACUNA:
            return "[" + self.text + "]"
        return self.text + UNDERDOT


@dataclass(frozen=True)
class Sentence:
    id: str
    segments: tuple[Segment, ...]
    source_file: str = ""

    def serialize(self) -> str:
        return "".join(seg.serialize() for seg in self.segments)

    def logical_chars(self) -> list[str | None]:
        """One entry per character position; None where the text is lost.

        Reconstructed spans and damaged characters count as visible context;
        blank lacunae contribute ``length`` unknown positions.
        """
        chars: list[str | None] = []
        for seg in self.segments:
            if seg.kind is SegmentKind.BLANK_LACUNA:
                chars.extend([None] * seg.length)
            else:
                chars.extend(seg.text)
        return chars

    @property
    def length(self) -> int:
        return sum(seg.length for seg in self.segments)

    def spans(self, kind: SegmentKind) -> list[tuple[int, int]]:
        """(start, length) in logical coordinates for segments of `kind`."""
        out = []
        pos = 0
        for seg in self.segments:
            if seg.kind is kind:
                out.append((pos, seg.length))
            pos += seg.length
        return out

    def damaged_positions(self) -> set[int]:
        return {start for start, _ in self.spans(SegmentKind.DAMAGED_VISIBLE)}


def _visible(text: str) -> Segment:
    return Segment(SegmentKind.VISIBLE, text, len(text))


def _emit(segments: list[Segment], seg: Segment) -> None:
    # adjacent visible runs merge into one segment
    if (
        seg.kind is SegmentKind.VISIBLE
        and segments
        and segments[-1].kind is SegmentKind.VISIBLE
    ):
        segments[-1] = _visible(segments[-1].text + seg.text)
    else:
        segments.append(seg)


def parse_line(raw: str, sentence_id: str = "", source_file: str = "") -> Sentence:
    """Parse one manuscript line into a Sentence.

    Letters are lowercased, so serialization round-trips byte-for-byte on
    lowercase input (the corpus convention). Raises a MarkupError subclass
    on malformed markup.
    """
    line = raw.lower()
    segments: list[Segment] = []
    buf: list[str] = []
    bracket: list[str] | None = None

    def flush():
        if buf:
            _emit(segments, _visible("".join(buf)))
            buf.clear()

    for ch in line:
        if ch == "[":
            if bracket is not None:
                raise UnbalancedBrackets("nested '[' inside brackets")
            flush()
            bracket = []
        elif ch == "]":
            if bracket is None:
                raise UnbalancedBrackets("']' with no matching '['")
            content = "".join(bracket)
            if not content:
                raise EmptyBrackets("empty brackets")
            if UNDERDOT in content:
                raise MixedBracketContent("combining underdot inside brackets")
            dots = content.count(".")
            if dots == len(content):
                _emit(segments, Segment(SegmentKind.BLANK_LACUNA, "", dots))
            elif dots == 0:
                _emit(
                    segments,
                    Segment(SegmentKind.RECONSTRUCTED_LACUNA, content, len(content)),
                )
            else:
                raise MixedBracketContent(
                    f"brackets mix dots and letters: [{content}]"
                )
            bracket = None
        elif ch == UNDERDOT:
            if bracket is not None:
                raise MixedBracketContent("combining underdot inside brackets")
            if not buf:
                raise MarkupError("combining underdot with no base character")
            base = buf.pop()
            flush()
            _emit(segments, Segment(SegmentKind.DAMAGED_VISIBLE, base, 1))
        else:
            if bracket is not None:
                bracket.append(ch)
            else:
                buf.append(ch)

    if bracket is not None:
        raise UnbalancedBrackets("unclosed '['")
    flush()
    return Sentence(id=sentence_id, segments=tuple(segments), source_file=source_file)


def classify(sentence: Sentence) -> SentenceClass:
    kinds = {seg.kind for seg in sentence.segments}
    if SegmentKind.BLANK_LACUNA in kinds:
        return SentenceClass.HAS_BLANK
    if SegmentKind.RECONSTRUCTED_LACUNA in kinds:
        return SentenceClass.RECONSTRUCTED_ONLY
    return SentenceClass.COMPLETE


def load_corpus_file(path: Path) -> list[Sentence]:
    """One sentence per line; blank lines are skipped with a warning."""
    sentences = []
    stem = Path(path).stem
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.rstrip("\n")
            if not text:
                log.warning("%s:%d: skipping empty line", path, line_no)
                continue
            try:
                sentences.append(
                    parse_line(text, sentence_id=f"{stem}:{line_no}", source_file=str(path))
                )
            except MarkupError as err:
                err.source_file = str(path)
                err.line_no = line_no
                raise
    return sentences


def load_corpus_dir(path: Path) -> list[Sentence]:
    files = sorted(Path(path).glob("*.txt"))
    if not files:
        raise EmptyCorpus(f"no .txt files under {path}")
    sentences = []
    for f in files:
        sentences.extend(load_corpus_file(f))
    return sentences


@dataclass(frozen=True)
class CorpusPartition:
    train: tuple[str, ...]
    dev: tuple[str, ...]
    test: tuple[str, ...]
    seed: int

    def manifest_text(self) -> str:
        lines = [f"train\t{i}" for i in self.train]
        lines += [f"dev\t{i}" for i in self.dev]
        lines += [f"test\t{i}" for i in self.test]
        return "\n".join(lines) + "\n"

    @property
    def manifest_hash(self) -> str:
        return hashlib.sha256(self.manifest_text().encode("utf-8")).hexdigest()


def make_partition(complete: list[Sentence], seed: int) -> CorpusPartition:
    """Deterministic seeded 90:5:5 split over complete sentences.

    Dev and test sizes are round(0.05 * n); train takes the remainder, so
    every proportion is within one sentence of its target for any n.
    """
    if not complete:
        raise EmptyCorpus("cannot partition an empty corpus")
    ids = sorted(s.id for s in complete)
    random.Random(seed).shuffle(ids)
    n = len(ids)
    n_dev = round(0.05 * n)
    n_test = round(0.05 * n)
    dev = ids[:n_dev]
    test = ids[n_dev : n_dev + n_test]
    train = ids[n_dev + n_test :]
    return CorpusPartition(tuple(train), tuple(dev), tuple(test), seed)


def write_partition(partition: CorpusPartition, path: Path) -> None:
    Path(path).write_text(partition.manifest_text(), encoding="utf-8")


def read_partition(path: Path, seed: int = -1) -> CorpusPartition:
    splits: dict[str, list[str]] = {"train": [], "dev": [], "test": []}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        try:
            split, sid = line.split("\t")
            splits[split].append(sid)
        except (ValueError, KeyError):
            raise ValueError(f"{path}:{line_no}: bad partition line {line!r}")
    return CorpusPartition(
        tuple(splits["train"]), tuple(splits["dev"]), tuple(splits["test"]), seed
    )


@dataclass(frozen=True)
class StatsReport:
    sentence_count: int
    char_count: int
    min_length: int
    mean_length: float
    max_length: int
    lacuna_count: int
    missing_chars: int
    gap_length_hist: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "sentence_count": self.sentence_count,
            "char_count": self.char_count,
            "min_length": self.min_length,
            "mean_length": self.mean_length,
            "max_length": self.max_length,
            "lacuna_count": self.lacuna_count,
            "missing_chars": self.missing_chars,
            "gap_length_hist": {str(k): v for k, v in sorted(self.gap_length_hist.items())},
        }


def corpus_stats(sentences: list[Sentence]) -> StatsReport:
    """Counts over logical characters; lacunae of both kinds count as missing."""
    if not sentences:
        return StatsReport(0, 0, 0, 0.0, 0, 0, 0, {})
    lengths = [s.length for s in sentences]
    hist: Counter[int] = Counter()
    lacunae = 0
    missing = 0
    for s in sentences:
        for seg in s.segments:
            if seg.kind in (SegmentKind.BLANK_LACUNA, SegmentKind.RECONSTRUCTED_LACUNA):
                lacunae += 1
                missing += seg.length
                hist[seg.length] += 1
    return StatsReport(
        sentence_count=len(sentences),
        char_count=sum(lengths),
        min_length=min(lengths),
        mean_length=sum(lengths) / len(lengths),
        max_length=max(lengths),
        lacuna_count=lacunae,
        missing_chars=missing,
        gap_length_hist=dict(hist),
    )
