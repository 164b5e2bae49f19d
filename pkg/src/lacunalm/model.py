"""Character-level bidirectional LSTM masked language model.

Pipeline: embedding -> stacked biLSTM -> concatenated forward/backward top
states -> linear projection -> vocab logits -> log-softmax. The loss is mean
NLL over masked positions only; everything else about a sentence is context.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from .corpus import Sentence
from .errors import (
    DivergedLoss,
    EmptyCorpus,
    IndexOutOfVocab,
    LengthMismatch,
    NoGapPresent,
    NoMaskedPositions,
)
from .masking import MaskedSample, MaskPolicy, Remask, apply_policy, dev_masks
from .vocab import MASK, PAD, UNK, Vocabulary

N_SPECIALS = 3


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embedding_dim: int = 200
    hidden_dim: int = 300  # per direction
    projection_dim: int = 150
    layers: int = 4
    bidirectional: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.0003
    weight_decay: float = 0.01
    batch_size: int = 32
    max_epochs: int = 50
    early_stop_patience: int = 5
    seed: int = 0
    grad_clip_norm: float = 5.0
    max_len: int = 0  # 0 = no truncation; set for memory-limited runs
    lr_decay: float = 1.0  # per-epoch multiplicative factor; 1.0 = constant lr

    def to_dict(self) -> dict:
        return asdict(self)


class CharBiLSTM(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.embedding = nn.Embedding(cfg.vocab_size, cfg.embedding_dim, padding_idx=PAD)
        self.lstm = nn.LSTM(
            cfg.embedding_dim,
            cfg.hidden_dim,
            num_layers=cfg.layers,
            bidirectional=cfg.bidirectional,
            batch_first=True,
        )
        dirs = 2 if cfg.bidirectional else 1
        self.projection = nn.Linear(cfg.hidden_dim * dirs, cfg.projection_dim)
        self.output = nn.Linear(cfg.projection_dim, cfg.vocab_size)

    def forward(self, batch: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        """Per-position log-probabilities over the vocabulary, [B, T, V].

        Rows at pad positions are unspecified; rows at real positions are
        valid log distributions.
        """
        if batch.numel() and int(batch.max()) >= self.cfg.vocab_size:
            raise IndexOutOfVocab(
                f"id {int(batch.max())} >= vocab size {self.cfg.vocab_size}"
            )
        if len(lengths) != batch.shape[0] or (
            len(lengths) and int(lengths.max()) > batch.shape[1]
        ):
            raise LengthMismatch("lengths do not match the padded batch")
        embedded = self.embedding(batch)
        packed = pack_padded_sequence(
            embedded, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        states, _ = self.lstm(packed)
        hidden, _ = pad_packed_sequence(
            states, batch_first=True, total_length=batch.shape[1]
        )
        logits = self.output(self.projection(hidden))
        return torch.log_softmax(logits, dim=-1)


def mlm_loss(
    log_probs: torch.Tensor, targets: torch.Tensor, mask: torch.Tensor
) -> torch.Tensor:
    """Mean NLL of targets over masked positions; everything else contributes
    zero, including pad."""
    total = mask.sum()
    if int(total) == 0:
        raise NoMaskedPositions("loss needs at least one masked position")
    nll = -log_probs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    return (nll * mask).sum() / total


def collate(
    samples: list[MaskedSample], dtype=torch.long
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    """Pad a batch of samples to a common width. Returns (inputs, targets,
    mask, lengths); mask is float (1.0 at loss positions)."""
    if not samples:
        raise NoMaskedPositions("empty batch")
    width = max(len(s.input_ids) for s in samples)
    b = len(samples)
    inputs = torch.full((b, width), PAD, dtype=dtype)
    targets = torch.full((b, width), PAD, dtype=dtype)
    mask = torch.zeros((b, width), dtype=torch.float32)
    lengths = torch.zeros(b, dtype=torch.long)
    for i, s in enumerate(samples):
        n = len(s.input_ids)
        if not s.mask_positions:
            raise NoMaskedPositions(f"sample {i} has no masked positions")
        inputs[i, :n] = torch.from_numpy(np.asarray(s.input_ids))
        targets[i, :n] = torch.from_numpy(np.asarray(s.target_ids))
        mask[i, list(s.mask_positions)] = 1.0
        lengths[i] = n
    return inputs, targets, mask, lengths


def _length_batches(samples: list[MaskedSample], batch_size: int) -> list[list[int]]:
    # group similar lengths to limit padding waste; order restored by shuffle
    order = sorted(range(len(samples)), key=lambda i: (len(samples[i].input_ids), i))
    return [order[i : i + batch_size] for i in range(0, len(order), batch_size)]


@torch.no_grad()
def score_samples(
    model: CharBiLSTM, samples: list[MaskedSample], batch_size: int = 64
) -> tuple[float, float]:
    """(mean masked NLL, masked accuracy) over a sample list. Accuracy uses
    the argmax over non-special symbols, matching evaluation."""
    model.eval()
    total_nll = 0.0
    total = 0
    correct = 0
    for batch_idx in _length_batches(samples, batch_size):
        inputs, targets, mask, lengths = collate([samples[i] for i in batch_idx])
        log_probs = model(inputs, lengths)
        nll = -log_probs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
        total_nll += float((nll * mask).sum())
        total += int(mask.sum())
        pred = log_probs[:, :, N_SPECIALS:].argmax(dim=-1) + N_SPECIALS
        correct += int(((pred == targets) & mask.bool()).sum())
    if total == 0:
        raise NoMaskedPositions("no masked positions to score")
    return total_nll / total, correct / total


@dataclass
class TrainResult:
    model: CharBiLSTM
    history: list[dict]
    best_epoch: int
    best_dev_accuracy: float


def train(
    train_seqs: list[np.ndarray],
    dev_seqs: list[np.ndarray],
    policy: MaskPolicy,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    progress: Callable[[dict], None] | None = None,
) -> TrainResult:
    """Train with AdamW and gradient-norm clipping; keep the checkpoint with
    the best dev masked accuracy; stop on patience exhaustion.

    The dev set is masked once with a fixed stream regardless of the remask
    policy, so early stopping never chases a moving target.
    """
    if not train_seqs or not dev_seqs:
        raise EmptyCorpus("train and dev splits must be nonempty")
    if train_cfg.max_len:
        train_seqs = [ids[: train_cfg.max_len] for ids in train_seqs]
        dev_seqs = [ids[: train_cfg.max_len] for ids in dev_seqs]
    torch.manual_seed(train_cfg.seed)
    model = CharBiLSTM(model_cfg)
    optimizer = torch.optim.AdamW(
        model.parameters(),
        lr=train_cfg.learning_rate,
        weight_decay=train_cfg.weight_decay,
    )
    dev_samples = dev_masks(dev_seqs, policy, model_cfg.vocab_size)

    history: list[dict] = []
    best_state: dict | None = None
    best_acc = -1.0
    best_epoch = -1
    once_cache: list[MaskedSample] | None = None

    for epoch in range(train_cfg.max_epochs):
        if policy.remask is Remask.ONCE and once_cache is not None:
            samples = once_cache
        else:
            samples = apply_policy(train_seqs, policy, epoch, model_cfg.vocab_size)
            if policy.remask is Remask.ONCE:
                once_cache = samples

        batches = _length_batches(samples, train_cfg.batch_size)
        order = np.random.default_rng((train_cfg.seed, epoch)).permutation(len(batches))
        model.train()
        epoch_nll = 0.0
        epoch_masked = 0
        for b in order:
            group = [samples[i] for i in batches[b]]
            inputs, targets, mask, lengths = collate(group)
            log_probs = model(inputs, lengths)
            loss = mlm_loss(log_probs, targets, mask)
            loss_value = float(loss.detach())
            if not math.isfinite(loss_value):
                raise DivergedLoss(f"non-finite training loss at epoch {epoch}")
            optimizer.zero_grad()
            loss.backward()
            if train_cfg.grad_clip_norm:
                nn.utils.clip_grad_norm_(model.parameters(), train_cfg.grad_clip_norm)
            optimizer.step()
            epoch_nll += loss_value * int(mask.sum())
            epoch_masked += int(mask.sum())

        epoch_lr = optimizer.param_groups[0]["lr"]
        if train_cfg.lr_decay != 1.0:
            for group in optimizer.param_groups:
                group["lr"] *= train_cfg.lr_decay

        dev_loss, dev_acc = score_samples(model, dev_samples, train_cfg.batch_size)
        record = {
            "epoch": epoch,
            "train_loss": epoch_nll / max(epoch_masked, 1),
            "dev_loss": dev_loss,
            "dev_accuracy": dev_acc,
            "lr": epoch_lr,
        }
        history.append(record)
        if progress is not None:
            progress(record)

        if dev_acc > best_acc:
            best_acc = dev_acc
            best_epoch = epoch
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
        elif epoch - best_epoch >= train_cfg.early_stop_patience:
            break

    assert best_state is not None
    model.load_state_dict(best_state)
    model.eval()
    return TrainResult(model, history, best_epoch, best_acc)


@dataclass(frozen=True)
class GapPrediction:
    """Log distributions at the masked positions of one query sentence."""

    positions: tuple[int, ...]
    log_probs: np.ndarray  # [n_gap_positions, vocab_size]

    def greedy_ids(self) -> list[int]:
        # ties resolve to the lowest index via argmax-first semantics
        return [int(np.argmax(row[N_SPECIALS:])) + N_SPECIALS for row in self.log_probs]

    def greedy_chars(self, vocabulary: Vocabulary) -> list[str]:
        return [vocabulary.symbols[i] for i in self.greedy_ids()]

    def top_k(self, vocabulary: Vocabulary, k: int = 10) -> list[list[tuple[str, float]]]:
        out = []
        for row in self.log_probs:
            usable = row[N_SPECIALS:]
            order = np.argsort(-usable, kind="stable")[:k]
            out.append(
                [(vocabulary.symbols[i + N_SPECIALS], float(usable[i])) for i in order]
            )
        return out


def encode_with_gaps(sentence: Sentence, vocabulary: Vocabulary) -> tuple[list[int], list[int]]:
    """(ids, gap_positions) for a sentence; blank-lacuna positions get MASK."""
    ids: list[int] = []
    gaps: list[int] = []
    for pos, ch in enumerate(sentence.logical_chars()):
        if ch is None:
            ids.append(MASK)
            gaps.append(pos)
        else:
            ids.append(vocabulary.index.get(ch, UNK))
    return ids, gaps


@torch.no_grad()
def predict_distributions(
    sentence: Sentence, model: CharBiLSTM, vocabulary: Vocabulary
) -> GapPrediction:
    """Full log distribution for every blank-lacuna position, from a single
    forward pass with all gaps masked at once."""
    ids, gaps = encode_with_gaps(sentence, vocabulary)
    if not gaps:
        raise NoGapPresent("sentence contains no blank lacuna")
    model.eval()
    inputs = torch.tensor([ids], dtype=torch.long)
    lengths = torch.tensor([len(ids)])
    log_probs = model(inputs, lengths)[0]
    rows = log_probs[gaps].to(torch.float64).numpy()
    return GapPrediction(tuple(gaps), rows)


def filled_text(sentence: Sentence, fill_chars: list[str]) -> str:
    """Logical text with the blank gaps replaced by `fill_chars`."""
    chars = sentence.logical_chars()
    fills = iter(fill_chars)
    return "".join(ch if ch is not None else next(fills) for ch in chars)


class NeuralPredictor:
    """Adapts a trained model to the evaluation predictor protocol; argmax
    prediction restricted to non-special symbols."""

    def __init__(self, model: CharBiLSTM, vocabulary: Vocabulary, batch_size: int = 64):
        self.model = model
        self.vocabulary = vocabulary
        self.batch_size = batch_size

    @torch.no_grad()
    def predict_batch(self, samples: list[MaskedSample]) -> list[list[str]]:
        self.model.eval()
        out: list[list[str]] = [[] for _ in samples]
        for batch_idx in _length_batches(samples, self.batch_size):
            group = [samples[i] for i in batch_idx]
            inputs, _, _, lengths = collate(group)
            log_probs = self.model(inputs, lengths)
            pred = log_probs[:, :, N_SPECIALS:].argmax(dim=-1) + N_SPECIALS
            for row, sample_i in enumerate(batch_idx):
                out[sample_i] = [
                    self.vocabulary.symbols[int(pred[row, pos])]
                    for pos in samples[sample_i].sorted_positions
                ]
        return out

    def predict(self, sample: MaskedSample) -> list[str]:
        return self.predict_batch([sample])[0]
