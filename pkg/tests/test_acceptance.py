"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Criteria 4 and 5 need hours of CPU training; they run only with
LACUNALM_FULLSCALE=1 (pytest -m fullscale also selects just them). The
trained checkpoint is cached under .cache/ so re-runs are cheap.
"""

import itertools
import json
import math
import os
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
import torch

from lacunalm.baselines import ModeBaseline, RandomBaseline, TrigramBaseline, TrigramTable
from lacunalm.checkpoint import load_checkpoint, load_model, save_checkpoint
from lacunalm.cli import main as cli_main
from lacunalm.corpus import load_corpus_file, parse_line
from lacunalm.errors import MixedCandidateLengths
from lacunalm.evaluate import build_gold_test, evaluate
from lacunalm.masking import (
    Distribution,
    MaskPolicy,
    Remask,
    random_mask,
    sample_gap_length,
)
from lacunalm.model import (
    CharBiLSTM,
    ModelConfig,
    NeuralPredictor,
    TrainConfig,
    mlm_loss,
    predict_distributions,
    score_samples,
    train,
)
from lacunalm.ranking import RankQuery, rank_candidates, score_candidate, score_ids
from lacunalm.vocab import MASK, load_vocab

FULLSCALE = os.environ.get("LACUNALM_FULLSCALE") == "1"
CACHE_DIR = Path(os.environ.get("LACUNALM_CACHE", Path(__file__).resolve().parent.parent / ".cache"))


@contextmanager
def criterion(number: int, label: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} {label}: FAIL")
        raise
    print(f"ACCEPTANCE {number} {label}: PASS")


@pytest.fixture(scope="session")
def prepared_dir(tmp_path_factory):
    """Default-scale demo corpus run through the real prepare pipeline."""
    root = tmp_path_factory.mktemp("acceptance")
    corpus = root / "corpus"
    out = root / "prepared"
    assert cli_main(["demo-corpus", "--out", str(corpus), "--scale", "default"]) == 0
    assert cli_main(["prepare", "--corpus", str(corpus), "--out", str(out)]) == 0
    return out


def _load_samples(prepared: Path, name: str):
    vocabulary = load_vocab(prepared / "vocab.txt")
    sentences = load_corpus_file(prepared / name)
    return build_gold_test(sentences, vocabulary), vocabulary


# --- criterion 1: gradient oracle ------------------------------------------


def test_acceptance_1_gradient_oracle():
    with criterion(1, "gradient oracle"):
        cfg = ModelConfig(
            vocab_size=12, embedding_dim=4, hidden_dim=5, projection_dim=3, layers=2
        )
        torch.manual_seed(0)
        model = CharBiLSTM(cfg).double()
        g = torch.Generator().manual_seed(1)
        batch = torch.randint(3, 12, (2, 6), generator=g)
        lengths = torch.tensor([6, 5])
        targets = torch.randint(0, 12, (2, 6), generator=g)
        mask = torch.zeros(2, 6)
        mask[0, 1] = mask[0, 5] = mask[1, 0] = mask[1, 3] = 1.0

        def loss_value():
            return mlm_loss(model(batch, lengths), targets, mask)

        model.zero_grad()
        loss_value().backward()

        @torch.no_grad()
        def fd_eval():
            return float(loss_value())

        h = 1e-5
        worst = 0.0
        n_params = 0
        for name, param in model.named_parameters():
            grad = param.grad.view(-1)
            flat = param.data.view(-1)
            for i in range(flat.numel()):
                n_params += 1
                orig = float(flat[i])
                flat[i] = orig + h
                up = fd_eval()
                flat[i] = orig - h
                down = fd_eval()
                flat[i] = orig
                fd = (up - down) / (2 * h)
                a = float(grad[i])
                if abs(a) < 1e-8 and abs(fd) < 1e-8:
                    continue
                rel = abs(a - fd) / max(abs(a), abs(fd))
                assert rel < 1e-4, f"{name}[{i}]: analytic {a} vs fd {fd} rel {rel:.2e}"
                worst = max(worst, rel)
        assert n_params > 1000  # every parameter of every layer was visited
        print(f"  checked {n_params} parameters, worst rel err {worst:.2e}")


# --- criterion 2: loss sanity + smoke training ------------------------------


def test_acceptance_2_loss_sanity_and_smoke(prepared_dir):
    with criterion(2, "loss sanity"):
        vocab_size = 134
        log_probs = torch.full((3, 8, vocab_size), -math.log(vocab_size))
        targets = torch.randint(0, vocab_size, (3, 8))
        mask = torch.zeros(3, 8)
        mask[:, 2] = mask[:, 5] = 1.0
        loss = float(mlm_loss(log_probs, targets, mask))
        assert abs(loss - math.log(134)) < 1e-3

        vocabulary = load_vocab(prepared_dir / "vocab.txt")
        train_sents = load_corpus_file(prepared_dir / "train.txt")[:1000]
        dev_sents = load_corpus_file(prepared_dir / "dev.txt")[:200]
        seqs = [
            np.array(vocabulary.encode("".join(s.logical_chars())), dtype=np.int64)
            for s in train_sents
        ]
        dev_seqs = [
            np.array(vocabulary.encode("".join(s.logical_chars())), dtype=np.int64)
            for s in dev_sents
        ]
        cfg = ModelConfig(vocab_size=vocabulary.size)
        tcfg = TrainConfig(batch_size=64, max_epochs=3, seed=0)
        policy = MaskPolicy(Distribution.RANDOM, Remask.DYNAMIC, seed=0)

        from lacunalm.masking import dev_masks

        torch.manual_seed(tcfg.seed)
        initial_model = CharBiLSTM(cfg)
        dev_samples = dev_masks(dev_seqs, policy, vocabulary.size)
        initial_dev_loss, _ = score_samples(initial_model, dev_samples, tcfg.batch_size)

        result = train(seqs, dev_seqs, policy, cfg, tcfg)
        final_dev_loss = result.history[-1]["dev_loss"]
        assert final_dev_loss < initial_dev_loss, (
            f"dev loss did not improve: {final_dev_loss} vs initial {initial_dev_loss}"
        )
        print(f"  dev loss {initial_dev_loss:.4f} -> {final_dev_loss:.4f} after 3 epochs")


# --- criterion 3: baseline bands --------------------------------------------


def test_acceptance_3_baseline_bands(prepared_dir):
    with criterion(3, "baseline bands"):
        samples, vocabulary = _load_samples(prepared_dir, "test_random.txt")
        train_sents = load_corpus_file(prepared_dir / "train.txt")

        random_report = evaluate(
            RandomBaseline(vocabulary, seed=0), samples, vocabulary, "test_random", "random"
        )
        analytic = 1.0 / (vocabulary.size - 3)
        assert abs(random_report.accuracy - analytic) < 0.005, random_report.accuracy

        mode = ModeBaseline(train_sents)
        mode_report = evaluate(mode, samples, vocabulary, "test_random", "mode")
        oracle_hits = sum(
            1
            for s in samples
            for pos in s.mask_positions
            if vocabulary.symbols[int(s.target_ids[pos])] == mode.mode_char
        )
        oracle_total = sum(len(s.mask_positions) for s in samples)
        assert mode_report.correct == oracle_hits
        assert mode_report.accuracy == oracle_hits / oracle_total

        trigram = TrigramBaseline(TrigramTable.build(train_sents, vocabulary), vocabulary)
        trigram_report = evaluate(trigram, samples, vocabulary, "test_random", "trigram")
        assert 0.20 <= trigram_report.accuracy <= 0.32, trigram_report.accuracy
        print(
            f"  random {random_report.accuracy:.4f} (analytic {analytic:.4f}), "
            f"mode {mode_report.accuracy:.4f} == oracle, "
            f"trigram {trigram_report.accuracy:.4f} in [0.20, 0.32]"
        )


# --- criteria 4 & 5: full-scale training ------------------------------------


@pytest.fixture(scope="session")
def fullscale_model(prepared_dir):
    CACHE_DIR.mkdir(parents=True, exist_ok=True)
    ckpt = CACHE_DIR / "random-dynamic-default.ckpt"
    if not ckpt.exists():
        # lr schedule chosen by a small search on this corpus (the published
        # 3e-4 stays the module default); everything else is stock
        code = cli_main(
            ["train", "--data", str(prepared_dir), "--mask", "random", "--remask",
             "dynamic", "--out", str(ckpt), "--lr", "0.0012", "--lr-decay", "0.88",
             "--patience", "8"]
        )
        assert code == 0
    return load_model(ckpt)


@pytest.mark.fullscale
@pytest.mark.skipif(not FULLSCALE, reason="set LACUNALM_FULLSCALE=1 to run full training")
def test_acceptance_4_fullscale_training(prepared_dir, fullscale_model):
    with criterion(4, "full-scale training bands"):
        vocabulary = fullscale_model.vocabulary
        predictor = NeuralPredictor(fullscale_model.model, vocabulary)

        random_samples, _ = _load_samples(prepared_dir, "test_random.txt")
        random_report = evaluate(predictor, random_samples, vocabulary, "test_random")
        assert random_report.accuracy >= 0.65, random_report.accuracy

        gold_samples, _ = _load_samples(prepared_dir, "gold.txt")
        gold_report = evaluate(predictor, gold_samples, vocabulary, "gold")
        assert gold_report.accuracy >= 0.30, gold_report.accuracy
        print(
            f"  random-masked {random_report.accuracy:.4f} >= 0.65, "
            f"gold {gold_report.accuracy:.4f} >= 0.30"
        )


@pytest.mark.fullscale
@pytest.mark.skipif(not FULLSCALE, reason="set LACUNALM_FULLSCALE=1 to run full training")
def test_acceptance_5_degradation_with_length(prepared_dir, fullscale_model):
    with criterion(5, "accuracy degradation by gap length"):
        vocabulary = fullscale_model.vocabulary
        predictor = NeuralPredictor(fullscale_model.model, vocabulary)
        smart_samples, _ = _load_samples(prepared_dir, "test_smart.txt")
        report = evaluate(predictor, smart_samples, vocabulary, "test_smart")
        acc1 = report.per_length_buckets["1"][1]
        acc6 = report.per_length_buckets["6+"][1]
        assert report.per_length_buckets["1"][0] > 50
        assert report.per_length_buckets["6+"][0] > 50
        assert acc1 - acc6 >= 0.15, (acc1, acc6)
        print(f"  bucket-1 {acc1:.4f} vs bucket-6+ {acc6:.4f} (gap {acc1 - acc6:.4f})")


# --- criterion 6: masking distributions --------------------------------------


def test_acceptance_6_masking_distributions():
    with criterion(6, "masking distribution bands"):
        rng = np.random.default_rng(2024)
        n = 100_000
        counts = {1: 0, 2: 0, 3: 0, "tail": 0}
        for _ in range(n):
            length = sample_gap_length(rng)
            counts[length if length <= 3 else "tail"] += 1
        assert abs(counts[1] / n - 0.48) < 0.01
        assert abs(counts[2] / n - 0.22) < 0.01
        assert abs(counts[3] / n - 0.12) < 0.01
        assert abs(counts["tail"] / n - 0.18) < 0.01

        vocab_size = 134
        g = np.random.default_rng(7)
        selected = total = 0
        n_mask = n_same = n_other = 0
        for _ in range(670):
            ids = g.integers(3, vocab_size, size=1000).astype(np.int64)
            sample = random_mask(ids, vocab_size, g)
            selected += len(sample.mask_positions)
            total += len(ids)
            for pos in sample.mask_positions:
                got = int(sample.input_ids[pos])
                if got == MASK:
                    n_mask += 1
                elif got == int(sample.target_ids[pos]):
                    n_same += 1
                else:
                    n_other += 1
        rate = selected / total
        assert abs(rate - 0.15) < 0.005
        assert selected >= 100_000
        coincide = 0.10 / (vocab_size - 3)  # random draw hitting the original char
        assert abs(n_mask / selected - 0.80) < 0.01
        assert abs(n_same / selected - (0.10 + coincide)) < 0.01
        assert abs(n_other / selected - (0.10 - coincide)) < 0.01
        print(
            f"  gap lengths {counts[1]/n:.3f}/{counts[2]/n:.3f}/{counts[3]/n:.3f}/"
            f"{counts['tail']/n:.3f}, selection rate {rate:.4f}, "
            f"mix {n_mask/selected:.3f}/{n_same/selected:.3f}/{n_other/selected:.3f}"
        )


# --- criterion 7: ranking oracles --------------------------------------------


def test_acceptance_7_ranking_oracles(toy_model, toy_vocab):
    with criterion(7, "ranking oracles"):
        sentence = parse_line("abcd[..]klab")
        prediction = predict_distributions(sentence, toy_model, toy_vocab)

        letters = toy_vocab.non_special
        assert len(letters) == 12
        scores = {}
        for pair in itertools.product(letters, repeat=2):
            cand = "".join(pair)
            total = score_candidate(sentence, cand, toy_model, toy_vocab)
            manual = sum(
                float(prediction.log_probs[i, toy_vocab.index[c]])
                for i, c in enumerate(cand)
            )
            assert abs(total - manual) < 1e-6  # additivity against per-position lookups
            scores[cand] = total
        assert len(scores) == 144

        greedy = "".join(prediction.greedy_chars(toy_vocab))
        assert scores[greedy] >= max(scores.values()) - 1e-9

        ranked = rank_candidates(
            RankQuery(sentence, tuple(sorted(scores)[:12])), toy_model, toy_vocab
        )
        probs = [r.log_prob for r in ranked]
        assert probs == sorted(probs, reverse=True)
        assert [r.rank for r in ranked] == list(range(1, 13))

        with pytest.raises(MixedCandidateLengths):
            rank_candidates(
                RankQuery(sentence, ("ab", "abc")), toy_model, toy_vocab
            )
        print(f"  greedy fill {greedy!r} optimal over 144 candidates")


# --- criterion 8: corpus round-trip ------------------------------------------


def test_acceptance_8_corpus_roundtrip(prepared_dir):
    with criterion(8, "corpus round-trip and gold counts"):
        corpus_dir = prepared_dir.parent / "corpus"
        n_lines = 0
        for path in sorted(corpus_dir.glob("*.txt")):
            for line in path.read_text(encoding="utf-8").splitlines():
                assert parse_line(line).serialize() == line
                n_lines += 1
        assert n_lines == 10000 + 790 + 780

        stats = json.loads((prepared_dir / "stats.json").read_text())
        samples, _ = _load_samples(prepared_dir, "gold.txt")
        gold_masked = sum(len(s.mask_positions) for s in samples)
        assert gold_masked == stats["gold"]["missing_chars"]
        assert 100 <= stats["vocab_size"] <= 160
        print(
            f"  {n_lines} lines round-tripped; gold masked chars {gold_masked} "
            f"== stats report; vocab {stats['vocab_size']}"
        )


# --- criterion 9: checkpoint round-trip ---------------------------------------


def test_acceptance_9_checkpoint_roundtrip(tmp_path, toy_model, toy_vocab):
    with criterion(9, "checkpoint round-trip"):
        path = tmp_path / "toy.ckpt"
        save_checkpoint(path, toy_model, toy_vocab, {"epoch": 1, "dev_accuracy": 0.5, "seed": 3})
        ckpt = load_checkpoint(path)
        for name, tensor in toy_model.state_dict().items():
            original = tensor.detach().numpy().astype("<f4")
            assert ckpt.tensors[name].tobytes() == original.tobytes()
        rebuilt = ckpt.build_model()
        g = torch.Generator().manual_seed(0)
        batch = torch.randint(3, toy_vocab.size, (3, 11), generator=g)
        lengths = torch.tensor([11, 9, 6])
        with torch.no_grad():
            assert torch.equal(rebuilt(batch, lengths), toy_model(batch, lengths))
        print("  parameters bit-identical, forward outputs identical")
