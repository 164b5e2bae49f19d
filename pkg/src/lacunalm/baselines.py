"""Heuristic baselines: uniform-random character, mode character, tri-gram.

The tri-gram model is left-context only with add-k smoothing (k=0.01) and
backoff to bigram/unigram on unseen contexts. Inside multi-character gaps it
chains its own predictions as context, so it can score gaps of any length.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Sentence
from .errors import EmptyCorpus
from .masking import MaskedSample
from .vocab import Vocabulary

DEFAULT_K = 0.01


class RandomBaseline:
    """Uniform draw over non-special vocabulary symbols."""

    def __init__(self, vocabulary: Vocabulary, seed: int = 0):
        self.vocabulary = vocabulary
        self.rng = np.random.default_rng(seed)

    def predict(self, sample: MaskedSample) -> list[str]:
        symbols = self.vocabulary.non_special
        picks = self.rng.integers(len(symbols), size=len(sample.mask_positions))
        return [symbols[i] for i in picks]


class ModeBaseline:
    """Always predicts the most common training character."""

    def __init__(self, train_sentences: list[Sentence]):
        counts: Counter[str] = Counter()
        for s in train_sentences:
            counts.update(ch for ch in s.logical_chars() if ch is not None)
        if not counts:
            raise EmptyCorpus("mode baseline needs a nonempty training split")
        self.mode_char = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    def predict(self, sample: MaskedSample) -> list[str]:
        return [self.mode_char] * len(sample.mask_positions)


@dataclass
class TrigramTable:
    alphabet: tuple[str, ...]  # vocab order = frequency order; ties break low
    k: float
    unigram: Counter = field(default_factory=Counter)
    bigram: dict = field(default_factory=lambda: defaultdict(Counter))
    trigram: dict = field(default_factory=lambda: defaultdict(Counter))
    total: int = 0

    @classmethod
    def build(
        cls, train_sentences: list[Sentence], vocabulary: Vocabulary, k: float = DEFAULT_K
    ) -> "TrigramTable":
        if not train_sentences:
            raise EmptyCorpus("trigram table needs a nonempty training split")
        table = cls(alphabet=vocabulary.non_special, k=k)
        for s in train_sentences:
            chars = [ch for ch in s.logical_chars() if ch is not None]
            table.total += len(chars)
            table.unigram.update(chars)
            for i in range(1, len(chars)):
                table.bigram[chars[i - 1]][chars[i]] += 1
                if i >= 2:
                    table.trigram[chars[i - 2] + chars[i - 1]][chars[i]] += 1
        return table

    def distribution(self, context: str) -> dict[str, float]:
        """Add-k distribution over the alphabet given up to two left chars,
        backing off when the context was never seen."""
        v = len(self.alphabet)
        counts = None
        if len(context) >= 2:
            counts = self.trigram.get(context[-2:])
        if counts is None and len(context) >= 1:
            counts = self.bigram.get(context[-1])
        if counts:
            ctx_total = sum(counts.values())
            return {
                ch: (counts.get(ch, 0) + self.k) / (ctx_total + self.k * v)
                for ch in self.alphabet
            }
        denom = self.total + self.k * v
        return {ch: (self.unigram.get(ch, 0) + self.k) / denom for ch in self.alphabet}

    def argmax(self, context: str) -> str:
        dist = self.distribution(context)
        best = self.alphabet[0]
        best_p = dist[best]
        for ch in self.alphabet[1:]:
            if dist[ch] > best_p:
                best, best_p = ch, dist[ch]
        return best

    def save(self, path: Path) -> None:
        lines = [f"#k\t{self.k}", "#alphabet\t" + "".join(self.alphabet)]
        for ch, n in sorted(self.unigram.items()):
            lines.append(f"\t{ch}\t{n}")
        for ctx in sorted(self.bigram):
            for ch, n in sorted(self.bigram[ctx].items()):
                lines.append(f"{ctx}\t{ch}\t{n}")
        for ctx in sorted(self.trigram):
            for ch, n in sorted(self.trigram[ctx].items()):
                lines.append(f"{ctx}\t{ch}\t{n}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class TrigramBaseline:
    def __init__(self, table: TrigramTable, vocabulary: Vocabulary):
        self.table = table
        self.vocabulary = vocabulary

    def predict(self, sample: MaskedSample) -> list[str]:
        """Left-to-right scan; masked positions take the argmax given the two
        preceding characters, where earlier masked positions contribute their
        already-predicted values."""
        masked = set(sample.mask_positions)
        chars: list[str] = []
        out: list[str] = []
        for pos in range(len(sample.input_ids)):
            if pos in masked:
                ch = self.table.argmax("".join(chars[-2:]))
                out.append(ch)
            else:
                ch = self.vocabulary.symbols[int(sample.input_ids[pos])]
            chars.append(ch)
        return out
