from lacunalm import demo_corpus
from lacunalm.corpus import SentenceClass, classify, load_corpus_dir, parse_line


def test_scales_defined():
    assert set(demo_corpus.SCALES) >= {"tiny", "small", "default", "paper"}


def test_rare_pool_is_lowercase_stable():
    assert len(demo_corpus.RARE_POOL) == 98
    for ch in demo_corpus.RARE_POOL + demo_corpus.CORE_LETTERS:
        assert ch.lower() == ch
        assert ch not in "[]."


def test_generation_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    demo_corpus.generate(a, scale="tiny", seed=9)
    demo_corpus.generate(b, scale="tiny", seed=9)
    for name in ("complete.txt", "reconstructed.txt", "blank.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    c = tmp_path / "c"
    demo_corpus.generate(c, scale="tiny", seed=10)
    assert (c / "complete.txt").read_bytes() != (a / "complete.txt").read_bytes()


def test_generated_lines_parse_and_classify(small_corpus_dir):
    sentences = load_corpus_dir(small_corpus_dir)
    classes = {cls: 0 for cls in SentenceClass}
    for s in sentences:
        classes[classify(s)] += 1
    assert classes[SentenceClass.COMPLETE] == 1500
    assert classes[SentenceClass.RECONSTRUCTED_ONLY] == 150
    assert classes[SentenceClass.HAS_BLANK] == 150


def test_roundtrip_all_lines(small_corpus_dir):
    for path in sorted(small_corpus_dir.glob("*.txt")):
        for line in path.read_text(encoding="utf-8").splitlines():
            assert parse_line(line).serialize() == line


def test_gap_statistics_plausible(small_prepared):
    from lacunalm.corpus import corpus_stats

    stats = corpus_stats(small_prepared.gold)
    mean_gap = stats.missing_chars / stats.lacuna_count
    assert 1.5 <= mean_gap <= 3.5
    assert stats.lacuna_count >= len(small_prepared.gold)


def test_custom_counts(tmp_path):
    info = demo_corpus.generate(tmp_path / "x", scale="tiny", counts=(25, 6, 7), seed=3)
    assert info == {"complete": 25, "reconstructed": 6, "blank": 7, "seed": 3}
    lines = (tmp_path / "x" / "complete.txt").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 25
