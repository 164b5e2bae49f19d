"""Command-line driver: prepare, train, eval, predict, rank, serve, demo-corpus.

Exit codes: 0 ok, 2 input error, 3 training failure, 4 query validation
error. File-producing commands write a run manifest next to their outputs.
A config file of key=value lines can supply any long flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import demo_corpus
from .baselines import ModeBaseline, RandomBaseline, TrigramBaseline, TrigramTable
from .checkpoint import load_model, save_checkpoint
from .corpus import (
    SentenceClass,
    classify,
    corpus_stats,
    load_corpus_dir,
    load_corpus_file,
    make_partition,
    parse_line,
    write_partition,
)
from .errors import (
    CheckpointError,
    DivergedLoss,
    EmptyCorpus,
    LengthMismatch,
    MarkupError,
    NoGapPresent,
    QueryError,
)
from .evaluate import build_gold_test, evaluate, write_report
from .masking import Distribution, MaskPolicy, Remask, apply_policy, write_masked_set
from .model import (
    ModelConfig,
    NeuralPredictor,
    TrainConfig,
    filled_text,
    predict_distributions,
    train,
)
from .ranking import RankQuery, rank_candidates
from .vocab import build_vocab, load_vocab


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(
    path: Path,
    subcommand: str,
    flags: dict,
    seeds: dict,
    inputs: dict[str, str],
    outputs: list[str],
    started: float,
) -> None:
    manifest = {
        "subcommand": subcommand,
        "flags": {k: str(v) for k, v in sorted(flags.items()) if v is not None},
        "seeds": seeds,
        "input_digests": inputs,
        "outputs": outputs,
        "wall_time_seconds": round(time.time() - started, 3),
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _encode_sentences(sentences, vocabulary):
    return [
        np.array(vocabulary.encode("".join(s.logical_chars())), dtype=np.int64)
        for s in sentences
    ]


# --- subcommands ------------------------------------------------------------


def cmd_demo_corpus(args) -> int:
    started = time.time()
    out = Path(args.out)
    info = demo_corpus.generate(out, scale=args.scale, seed=args.seed)
    print(f"wrote demo corpus to {out}: {info}")
    _write_manifest(
        out / "manifest.json",
        "demo-corpus",
        vars(args),
        {"seed": args.seed},
        {},
        [str(out / f) for f in ("complete.txt", "reconstructed.txt", "blank.txt")],
        started,
    )
    return 0


def cmd_prepare(args) -> int:
    started = time.time()
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise EmptyCorpus(f"corpus directory not found: {corpus_dir}")
    sentences = load_corpus_dir(corpus_dir)

    complete = [s for s in sentences if classify(s) is SentenceClass.COMPLETE]
    gold = [s for s in sentences if classify(s) is SentenceClass.RECONSTRUCTED_ONLY]
    target = [s for s in sentences if classify(s) is SentenceClass.HAS_BLANK]

    partition = make_partition(complete, args.seed)
    by_id = {s.id: s for s in complete}
    splits = {
        "train": [by_id[i] for i in partition.train],
        "dev": [by_id[i] for i in partition.dev],
        "test": [by_id[i] for i in partition.test],
    }
    vocabulary = build_vocab(splits["train"])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_partition(partition, out / "partition.tsv")
    vocabulary.save(out / "vocab.txt")
    for name, sents in splits.items():
        (out / f"{name}.txt").write_text(
            "\n".join(s.serialize() for s in sents) + "\n", encoding="utf-8"
        )
    (out / "gold.txt").write_text(
        "\n".join(s.serialize() for s in gold) + "\n", encoding="utf-8"
    )
    (out / "target.txt").write_text(
        "\n".join(s.serialize() for s in target) + "\n", encoding="utf-8"
    )

    # fixed masked test sets, one per masking distribution
    test_seqs = _encode_sentences(splits["test"], vocabulary)
    for dist in (Distribution.RANDOM, Distribution.SMART):
        policy = MaskPolicy(dist, Remask.ONCE, args.mask_seed)
        samples = apply_policy(test_seqs, policy, 0, vocabulary.size)
        write_masked_set(splits["test"], samples, out / f"test_{dist.value}.txt")

    stats = {
        "complete": corpus_stats(complete).to_dict(),
        "gold": corpus_stats(gold).to_dict(),
        "target": corpus_stats(target).to_dict(),
        "splits": {k: len(v) for k, v in splits.items()},
        "vocab_size": vocabulary.size,
        "partition_hash": partition.manifest_hash,
    }
    (out / "stats.json").write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")

    print(
        f"prepared {len(complete)} complete / {len(gold)} gold / {len(target)} target sentences"
    )
    print(
        f"splits train={len(splits['train'])} dev={len(splits['dev'])} test={len(splits['test'])}; "
        f"vocab={vocabulary.size}"
    )
    outputs = sorted(str(p) for p in out.glob("*.txt")) + [
        str(out / "partition.tsv"),
        str(out / "stats.json"),
    ]
    _write_manifest(
        out / "manifest.json",
        "prepare",
        vars(args),
        {"seed": args.seed, "mask_seed": args.mask_seed},
        {str(p): _sha256(p) for p in sorted(corpus_dir.glob("*.txt"))},
        outputs,
        started,
    )
    return 0


def cmd_train(args) -> int:
    started = time.time()
    data = Path(args.data)
    train_sents = load_corpus_file(data / "train.txt")
    dev_sents = load_corpus_file(data / "dev.txt")
    vocabulary = load_vocab(data / "vocab.txt")
    if args.limit_train:
        train_sents = train_sents[: args.limit_train]
    if args.limit_dev:
        dev_sents = dev_sents[: args.limit_dev]

    policy = MaskPolicy(Distribution(args.mask), Remask(args.remask), args.seed)
    model_cfg = ModelConfig(
        vocab_size=vocabulary.size,
        embedding_dim=args.embedding_dim,
        hidden_dim=args.hidden_dim,
        projection_dim=args.projection_dim,
        layers=args.layers,
    )
    train_cfg = TrainConfig(
        learning_rate=args.lr,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        early_stop_patience=args.patience,
        seed=args.seed,
        grad_clip_norm=args.grad_clip,
        max_len=args.max_len,
        lr_decay=args.lr_decay,
    )

    def progress(record):
        print(
            "epoch {epoch}: train {train_loss:.4f}  dev {dev_loss:.4f}  "
            "dev acc {dev_accuracy:.4f}".format(**record)
        )

    result = train(
        _encode_sentences(train_sents, vocabulary),
        _encode_sentences(dev_sents, vocabulary),
        policy,
        model_cfg,
        train_cfg,
        progress=progress,
    )

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    name = args.name or policy.name
    save_checkpoint(
        out,
        result.model,
        vocabulary,
        {
            "name": name,
            "policy": policy.name,
            "epoch": result.best_epoch,
            "dev_accuracy": result.best_dev_accuracy,
            "seed": args.seed,
            "train_config": train_cfg.to_dict(),
        },
    )
    log_path = out.with_suffix(out.suffix + ".log.json")
    log_path.write_text(json.dumps(result.history, indent=2) + "\n", encoding="utf-8")
    print(
        f"saved {name} checkpoint to {out} "
        f"(best epoch {result.best_epoch}, dev acc {result.best_dev_accuracy:.4f})"
    )
    _write_manifest(
        out.with_suffix(out.suffix + ".manifest.json"),
        "train",
        vars(args),
        {"seed": args.seed},
        {str(p): _sha256(p) for p in (data / "train.txt", data / "dev.txt", data / "vocab.txt")},
        [str(out), str(log_path)],
        started,
    )
    return 0


def cmd_eval(args) -> int:
    started = time.time()
    test_path = Path(args.test_set)
    test_sentences = load_corpus_file(test_path)
    inputs = {str(test_path): _sha256(test_path)}

    if args.ckpt:
        loaded = load_model(Path(args.ckpt))
        vocabulary = loaded.vocabulary
        predictor = NeuralPredictor(loaded.model, vocabulary, batch_size=args.batch_size)
        model_id = loaded.id
        inputs[str(args.ckpt)] = _sha256(Path(args.ckpt))
    else:
        if not args.data:
            raise EmptyCorpus("--baseline needs --data (a prepare output directory)")
        data = Path(args.data)
        vocabulary = load_vocab(data / "vocab.txt")
        if args.baseline in ("mode", "trigram"):
            train_sents = load_corpus_file(data / "train.txt")
        if args.baseline == "random":
            predictor = RandomBaseline(vocabulary, seed=args.seed)
        elif args.baseline == "mode":
            predictor = ModeBaseline(train_sents)
        else:
            predictor = TrigramBaseline(
                TrigramTable.build(train_sents, vocabulary, k=args.add_k), vocabulary
            )
        model_id = f"baseline-{args.baseline}"

    samples = build_gold_test(test_sentences, vocabulary)
    report = evaluate(
        predictor,
        samples,
        vocabulary,
        test_set_name=test_path.stem,
        model_id=model_id,
        seed=args.seed,
    )
    print(report.format_table())
    if args.report:
        report_path = Path(args.report)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        write_report(report, report_path)
        _write_manifest(
            report_path.with_suffix(report_path.suffix + ".manifest.json"),
            "eval",
            vars(args),
            {"seed": args.seed},
            inputs,
            [str(report_path)],
            started,
        )
    return 0


def cmd_predict(args) -> int:
    loaded = load_model(Path(args.ckpt))
    sentence = parse_line(args.text)
    prediction = predict_distributions(sentence, loaded.model, loaded.vocabulary)
    chars = prediction.greedy_chars(loaded.vocabulary)
    print(filled_text(sentence, chars))
    for pos, entries in zip(prediction.positions, prediction.top_k(loaded.vocabulary, args.top_k)):
        listing = "  ".join(f"{ch} {lp:.4f}" for ch, lp in entries)
        print(f"position {pos}: {listing}")
    return 0


def cmd_rank(args) -> int:
    loaded = load_model(Path(args.ckpt))
    sentence = parse_line(args.text)
    if args.candidates:
        candidates = tuple(c for c in args.candidates.split(",") if c)
    else:
        candidates = tuple(
            line.strip()
            for line in Path(args.candidates_file).read_text(encoding="utf-8").splitlines()
            if line.strip()
        )
    ranked = rank_candidates(RankQuery(sentence, candidates), loaded.model, loaded.vocabulary)
    print("rank  log_prob      candidate")
    for r in ranked:
        print(f"{r.rank:>4}  {r.log_prob:>12.4f}  {r.text}")
    return 0


def cmd_summary(args) -> int:
    """Aggregate eval reports into a models x test-sets accuracy grid."""
    reports = []
    for path in args.reports:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        reports.append((data["model_id"], data["test_set"], data["accuracy"]))
    test_sets = sorted({t for _, t, _ in reports})
    models = sorted({m for m, _, _ in reports})
    cells = {(m, t): a for m, t, a in reports}
    width = max(len(m) for m in models)
    header = " " * width + "".join(f"  {t:>14}" for t in test_sets)
    print(header)
    for m in models:
        row = m.ljust(width)
        for t in test_sets:
            value = cells.get((m, t))
            row += f"  {value:>14.3f}" if value is not None else f"  {'-':>14}"
        print(row)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    models = {}
    for path in args.ckpt:
        loaded = load_model(Path(path))
        if loaded.id in models:
            raise CheckpointError(f"duplicate model id {loaded.id!r}; use distinct names")
        models[loaded.id] = loaded
    app = create_app(models, cors_origins=args.cors_origin or None)
    print(f"serving {sorted(models)} on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lacunalm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo-corpus", help="generate the synthetic demo corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--scale", choices=sorted(demo_corpus.SCALES), default="default")
    p.add_argument("--seed", type=int, default=1234)
    p.set_defaults(func=cmd_demo_corpus)

    p = sub.add_parser("prepare", help="parse, partition, build vocab and test sets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--mask-seed", type=int, default=4321)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train a masked language model")
    p.add_argument("--data", required=True, help="directory produced by prepare")
    p.add_argument("--mask", choices=("random", "smart"), required=True)
    p.add_argument("--remask", choices=("once", "dynamic"), required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--name", help="model id tag (defaults to <mask>-<remask>)")
    p.add_argument("--lr", type=float, default=0.0003)
    p.add_argument("--lr-decay", type=float, default=1.0,
                   help="multiply the learning rate by this factor each epoch")
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-epochs", type=int, default=50)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--grad-clip", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embedding-dim", type=int, default=200)
    p.add_argument("--hidden-dim", type=int, default=300)
    p.add_argument("--projection-dim", type=int, default=150)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--limit-train", type=int, default=0, help="cap training sentences")
    p.add_argument("--limit-dev", type=int, default=0, help="cap dev sentences")
    p.add_argument("--max-len", type=int, default=0,
                   help="truncate sequences to this many chars (0 = keep whole sentences)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a model or baseline on a test set")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ckpt")
    group.add_argument("--baseline", choices=("random", "mode", "trigram"))
    p.add_argument("--data", help="prepare output dir (needed for baselines)")
    p.add_argument("--test-set", required=True)
    p.add_argument("--report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--add-k", type=float, default=0.01, help="trigram smoothing")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="greedy-fill the gaps in a line")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--text", required=True, help="line in corpus markup")
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("rank", help="rank same-length candidates for a gap")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--text", required=True, help="line with exactly one [...] gap")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--candidates", help="comma-separated candidate strings")
    group.add_argument("--candidates-file", help="file with one candidate per line")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("summary", help="tabulate eval reports (models x test sets)")
    p.add_argument("--reports", nargs="+", required=True, help="eval report JSON files")
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("serve", help="serve predict/rank over HTTP")
    p.add_argument("--ckpt", action="append", required=True, help="repeatable")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--cors-origin", action="append", help="allowed origin (repeatable)")
    p.set_defaults(func=cmd_serve)

    for sp in sub.choices.values():
        sp.add_argument("--config", help="key=value file supplying defaults for any flag")
    return parser


def _merge_config(argv: list[str]) -> list[str]:
    """Rewrite argv so config-file entries precede explicit flags (which
    therefore win)."""
    idx = cfg_path = None
    for i, token in enumerate(argv):
        if token == "--config":
            idx, cfg_path = i, argv[i + 1]
            skip = 2
            break
        if token.startswith("--config="):
            idx, cfg_path = i, token.split("=", 1)[1]
            skip = 1
            break
    if idx is None:
        return argv
    tokens: list[str] = []
    for line_no, line in enumerate(Path(cfg_path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{cfg_path}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        tokens += [f"--{key.strip().replace('_', '-')}", value.strip()]
    rest = argv[:idx] + argv[idx + skip :]
    return rest[:1] + tokens + rest[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv:
            argv = _merge_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except DivergedLoss as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (QueryError, NoGapPresent) as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except (MarkupError, LengthMismatch) as err:
        print(f"error: {err}", file=sys.stderr)
        command = argv[0] if argv else ""
        return 4 if command in ("predict", "rank") else 2
    except (EmptyCorpus, CheckpointError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
