"""Binary checkpoint format.

Layout (all integers little-endian):

    bytes 0-7   magic ``LACMLM01``
    u64         metadata length
    bytes       metadata, UTF-8 JSON: format_version, config, vocab_digest,
                vocab_symbols, training {epoch, dev_accuracy, seed, policy, ...}
    u32         tensor count
    per tensor: u32 name length, name bytes, u32 ndim, u64 * ndim dims,
                u64 payload length, row-major float32 values

Parameters round-trip bit-exactly; the vocabulary digest is re-verified on
every load.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .errors import CheckpointError
from .model import CharBiLSTM, ModelConfig
from .vocab import Vocabulary, from_symbols

MAGIC = b"LACMLM01"
FORMAT_VERSION = 1


def save_checkpoint(
    path: Path,
    model: CharBiLSTM,
    vocabulary: Vocabulary,
    training: dict,
) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "config": model.cfg.to_dict(),
        "vocab_digest": vocabulary.digest,
        "vocab_symbols": list(vocabulary.symbols),
        "training": training,
    }
    meta_bytes = json.dumps(meta, ensure_ascii=False).encode("utf-8")
    state = model.state_dict()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(struct.pack("<I", len(state)))
        for name, tensor in state.items():
            data = tensor.detach().cpu().to(torch.float32).numpy().astype("<f4")
            name_b = name.encode("utf-8")
            fh.write(struct.pack("<I", len(name_b)))
            fh.write(name_b)
            fh.write(struct.pack("<I", data.ndim))
            for dim in data.shape:
                fh.write(struct.pack("<Q", dim))
            payload = data.tobytes(order="C")
            fh.write(struct.pack("<Q", len(payload)))
            fh.write(payload)


@dataclass
class Checkpoint:
    config: ModelConfig
    vocabulary: Vocabulary
    tensors: dict[str, np.ndarray]
    training: dict

    def build_model(self) -> CharBiLSTM:
        model = CharBiLSTM(self.config)
        state = {k: torch.from_numpy(v.copy()) for k, v in self.tensors.items()}
        model.load_state_dict(state)
        model.eval()
        return model


def _read_exact(fh, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointError("truncated checkpoint file")
    return data


def load_checkpoint(path: Path) -> Checkpoint:
    with open(path, "rb") as fh:
        if _read_exact(fh, 8) != MAGIC:
            raise CheckpointError(f"{path}: bad magic, not a checkpoint")
        (meta_len,) = struct.unpack("<Q", _read_exact(fh, 8))
        meta = json.loads(_read_exact(fh, meta_len).decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(f"unsupported format_version {meta.get('format_version')}")
        vocabulary = from_symbols(meta["vocab_symbols"][3:])
        if tuple(meta["vocab_symbols"][:3]) != vocabulary.symbols[:3]:
            raise CheckpointError("checkpoint vocabulary lacks the special symbols")
        if vocabulary.digest != meta["vocab_digest"]:
            raise CheckpointError("vocabulary digest mismatch")
        (count,) = struct.unpack("<I", _read_exact(fh, 4))
        tensors: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", _read_exact(fh, 4))
            name = _read_exact(fh, name_len).decode("utf-8")
            (ndim,) = struct.unpack("<I", _read_exact(fh, 4))
            dims = [struct.unpack("<Q", _read_exact(fh, 8))[0] for _ in range(ndim)]
            (payload_len,) = struct.unpack("<Q", _read_exact(fh, 8))
            arr = np.frombuffer(_read_exact(fh, payload_len), dtype="<f4")
            tensors[name] = arr.reshape(dims)
        config = ModelConfig.from_dict(meta["config"])
        if config.vocab_size != vocabulary.size:
            raise CheckpointError("config vocab_size disagrees with stored vocabulary")
        return Checkpoint(config, vocabulary, tensors, meta.get("training", {}))


@dataclass
class LoadedModel:
    """A checkpoint ready for inference; immutable, safe to share."""

    id: str
    model: CharBiLSTM
    vocabulary: Vocabulary
    config: ModelConfig
    training: dict


def load_model(path: Path, model_id: str | None = None) -> LoadedModel:
    ckpt = load_checkpoint(path)
    mid = model_id or ckpt.training.get("name") or Path(path).stem
    return LoadedModel(mid, ckpt.build_model(), ckpt.vocabulary, ckpt.config, ckpt.training)
