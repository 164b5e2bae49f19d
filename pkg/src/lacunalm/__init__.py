"""Character-level biLSTM masked language modeling for manuscript lacunae."""

__version__ = "0.1.0"

from .corpus import Sentence, Segment, SegmentKind, SentenceClass, classify, parse_line
from .masking import MaskPolicy, Distribution, Remask, MaskedSample
from .model import CharBiLSTM, ModelConfig, TrainConfig
from .vocab import Vocabulary, build_vocab

__all__ = [
    "__version__",
    "Sentence",
    "Segment",
    "SegmentKind",
    "SentenceClass",
    "classify",
    "parse_line",
    "MaskPolicy",
    "Distribution",
    "Remask",
    "MaskedSample",
    "CharBiLSTM",
    "ModelConfig",
    "TrainConfig",
    "Vocabulary",
    "build_vocab",
]
