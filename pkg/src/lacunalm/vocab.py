"""Indexed character vocabulary with reserved specials.

Index 0/1/2 are PAD/UNK/MASK; the rest are the distinct visible characters
of the training split, ordered by descending frequency then codepoint, so a
rebuilt vocabulary is deterministic and the on-disk file diffs cleanly.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Sentence
from .errors import EmptyCorpus

PAD, UNK, MASK = 0, 1, 2
SPECIAL_TAGS = ("<pad>", "<unk>", "<mask>")


@dataclass(frozen=True)
class Vocabulary:
    symbols: tuple[str, ...]
    index: dict[str, int] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def non_special(self) -> tuple[str, ...]:
        return self.symbols[len(SPECIAL_TAGS):]

    def encode(self, text: str) -> list[int]:
        return [self.index.get(ch, UNK) for ch in text]

    def decode(self, ids) -> str:
        return "".join(self.symbols[i] for i in ids)

    def serialize(self) -> str:
        return "\n".join(self.symbols) + "\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def save(self, path: Path) -> None:
        Path(path).write_text(self.serialize(), encoding="utf-8")


def _from_symbols(symbols: tuple[str, ...]) -> Vocabulary:
    return Vocabulary(symbols=symbols, index={s: i for i, s in enumerate(symbols)})


def from_symbols(non_special: list[str]) -> Vocabulary:
    """Vocabulary from an explicit symbol list (specials prepended)."""
    return _from_symbols(SPECIAL_TAGS + tuple(non_special))


def build_vocab(train_sentences: list[Sentence]) -> Vocabulary:
    if not train_sentences:
        raise EmptyCorpus("vocabulary needs a nonempty training split")
    counts: Counter[str] = Counter()
    for s in train_sentences:
        counts.update(ch for ch in s.logical_chars() if ch is not None)
    if not counts:
        raise EmptyCorpus("training split contains no characters")
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return from_symbols([ch for ch, _ in ordered])


def load_vocab(path: Path) -> Vocabulary:
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    symbols = tuple(lines)
    if symbols[: len(SPECIAL_TAGS)] != SPECIAL_TAGS:
        raise ValueError(f"{path}: first entries must be {SPECIAL_TAGS}")
    return _from_symbols(symbols)
