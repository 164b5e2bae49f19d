import numpy as np
import pytest

from lacunalm import demo_corpus
from lacunalm.corpus import (
    SentenceClass,
    classify,
    load_corpus_dir,
    make_partition,
)
from lacunalm.masking import Distribution, MaskPolicy, Remask
from lacunalm.model import CharBiLSTM, ModelConfig, TrainConfig, train
from lacunalm.vocab import build_vocab, from_symbols

TOY_LETTERS = "abcdefghijkl"

# small weighted lexicon over 12 letters; enough structure that a few
# training epochs produce a clearly non-uniform model
_TOY_LEX = ["ab", "cde", "fg", "hij", "kl", "abc", "defg", "hi", "jkl", "ade"]
_TOY_WEIGHTS = np.array([5, 4, 4, 3, 3, 2, 2, 1, 1, 1], dtype=float)


def toy_sentences(n: int, rng: np.random.Generator) -> list[str]:
    cum = np.cumsum(_TOY_WEIGHTS / _TOY_WEIGHTS.sum())
    out = []
    for _ in range(n):
        k = int(rng.integers(4, 9))
        out.append(
            "".join(_TOY_LEX[int(np.searchsorted(cum, rng.random()))] for _ in range(k))
        )
    return out


@pytest.fixture(scope="session")
def toy_vocab():
    return from_symbols(list(TOY_LETTERS))


@pytest.fixture(scope="session")
def toy_model(toy_vocab):
    rng = np.random.default_rng(9)
    texts = toy_sentences(240, rng)
    seqs = [np.array(toy_vocab.encode(t), dtype=np.int64) for t in texts]
    cfg = ModelConfig(
        vocab_size=toy_vocab.size,
        embedding_dim=16,
        hidden_dim=24,
        projection_dim=12,
        layers=2,
    )
    tcfg = TrainConfig(learning_rate=0.003, batch_size=32, max_epochs=3, seed=3)
    policy = MaskPolicy(Distribution.RANDOM, Remask.DYNAMIC, seed=11)
    result = train(seqs[:200], seqs[200:], policy, cfg, tcfg)
    return result.model


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo_small")
    demo_corpus.generate(out, scale="small")
    return out


class Prepared:
    """Parsed corpus with a deterministic partition and train-split vocab."""

    def __init__(self, corpus_dir, seed=1234):
        sentences = load_corpus_dir(corpus_dir)
        self.complete = [s for s in sentences if classify(s) is SentenceClass.COMPLETE]
        self.gold = [
            s for s in sentences if classify(s) is SentenceClass.RECONSTRUCTED_ONLY
        ]
        self.blank = [s for s in sentences if classify(s) is SentenceClass.HAS_BLANK]
        self.partition = make_partition(self.complete, seed)
        by_id = {s.id: s for s in self.complete}
        self.train = [by_id[i] for i in self.partition.train]
        self.dev = [by_id[i] for i in self.partition.dev]
        self.test = [by_id[i] for i in self.partition.test]
        self.vocab = build_vocab(self.train)

    def encode_split(self, sentences):
        return [
            np.array(
                self.vocab.encode("".join(s.logical_chars())), dtype=np.int64
            )
            for s in sentences
        ]


@pytest.fixture(scope="session")
def small_prepared(small_corpus_dir):
    return Prepared(small_corpus_dir)
