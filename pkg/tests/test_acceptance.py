"""Acceptance gate: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdicts.
The full-corpus criterion needs the external TEI corpus and is skipped
unless ESCANSION_TEI_DIR points at it.
"""

import os
import random
import time

import numpy as np
import pytest

import oracle
import wordbank
from escansion.baseline import (
    TrainConfig,
    build_vocab,
    featurize,
    load_model,
    loss_and_grads,
    predict,
    predict_scores,
    save_model,
    train,
    _pattern_targets,
)
from escansion.corpus import (
    DEFAULT_RATIOS,
    bundled_mini_gold,
    dedupe_and_clean,
    normalize_met,
    parse_tei_dir,
    split,
)
from escansion.errors import Unfittable, UnnormalizableMet
from escansion.metrics import evaluate
from escansion.phonology import default_lexicon, normalize_token, syllabify
from escansion.scansion import (
    ScanConfig,
    find_figure_sites,
    fit_to_target,
    phonological_parse,
    scan_line,
)

EXAMPLE_LINE = "cubra de nieve la hermosa cumbre"
EXAMPLE_PATTERN = "+--+---+-+-"


def _verdict(name: str, ok: bool, detail: str = "") -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"{name}: {detail}"


def test_criterion_1_example_line_fidelity():
    start = time.perf_counter()
    result = scan_line(EXAMPLE_LINE)
    elapsed = time.perf_counter() - start
    ok = (result.pattern == EXAMPLE_PATTERN
          and result.candidate.metrical_length == 11
          and elapsed < 1.0)
    _verdict("1 example-line-fidelity", ok,
             f"pattern={result.pattern} length={result.candidate.metrical_length} "
             f"time={elapsed:.3f}s")


def test_criterion_2_mini_gold_accuracy():
    gold = bundled_mini_gold()
    assert len(gold) >= 50
    lexicon = default_lexicon()
    start = time.perf_counter()
    pairs = []
    for line in gold:
        try:
            pred = scan_line(line.text, lexicon).pattern
        except Unfittable:
            pred = None
        pairs.append((pred, line.gold, line.text))
    elapsed = time.perf_counter() - start
    report = evaluate(pairs)
    ok = report.accuracy >= 90.0 and elapsed < 1.0
    _verdict("2 mini-gold-accuracy", ok,
             f"accuracy={report.accuracy:.2f} on {report.total} lines "
             f"time={elapsed:.3f}s")


def test_criterion_3_full_corpus_reference():
    tei_dir = os.environ.get("ESCANSION_TEI_DIR")
    if not tei_dir:
        print("\nACCEPTANCE 3 full-corpus-reference: SKIP "
              "(set ESCANSION_TEI_DIR to the TEI corpus; "
              "reference point is Rantanplan at 96.23)")
        pytest.skip("external corpus not available")
    lines = dedupe_and_clean(parse_tei_dir(tei_dir))
    parts = split(lines, ratios=DEFAULT_RATIOS, seed=13)
    lexicon = default_lexicon()
    pairs = []
    for line in parts.test:
        try:
            pred = scan_line(line.text, lexicon).pattern
        except Unfittable:
            pred = None
        pairs.append((pred, line.gold, line.text))
    report = evaluate(pairs)
    ok = report.accuracy >= 90.0
    _verdict("3 full-corpus-reference", ok,
             f"accuracy={report.accuracy:.2f} on {report.total} test lines "
             f"(rule-based SOTA reference: 96.23)")


def test_criterion_4_baseline_band():
    start = time.perf_counter()
    corpus = wordbank.rhythmic_corpus(3000, seed=20250810, free_fraction=0.20)
    parts = split(corpus, ratios=DEFAULT_RATIOS, seed=13)
    config = TrainConfig(epochs=10, embedding_dim=50, learning_rate=0.05,
                         seed=13, bucket_count=2000)
    model = train(parts.train, parts.eval, config)
    report = evaluate([(predict(model, ln.text), ln.gold, ln.text)
                       for ln in parts.test])
    elapsed = time.perf_counter() - start
    ok = 5.0 <= report.accuracy <= 20.0 and elapsed < 600
    _verdict("4 baseline-band", ok,
             f"test exact-match={report.accuracy:.2f} (band [5,20], "
             f"published figures 10.89-11.20) time={elapsed:.1f}s")


def test_criterion_5_fitting_oracle_equivalence():
    lexicon = default_lexicon()
    config = ScanConfig()
    rng = random.Random(424242)
    checked = 0
    agree_feasibility = agree_length = agree_preference = 0
    while checked < 500:
        if rng.random() < 0.5:
            text = wordbank.random_raw_line(rng)
        else:
            template = rng.choice(wordbank.TEMPLATES)[0]
            text = wordbank.realize_template(template, rng) or \
                wordbank.random_raw_line(rng)
        words = phonological_parse(text, lexicon)
        sites = find_figure_sites(words, config)
        if len(sites) > 12:
            continue
        checked += 1
        results = oracle.enumerate_all(words, sites, config.target_length)
        preferred = oracle.preferred_patterns(results, sites,
                                              config.target_length)
        try:
            fitted = fit_to_target(words, sites, config)
        except Unfittable:
            fitted = None
        if (fitted is None) == (not preferred):
            agree_feasibility += 1
        if fitted is None:
            agree_length += 1
            agree_preference += 1
            continue
        if fitted.candidate.metrical_length == config.target_length:
            agree_length += 1
        if preferred and fitted.pattern == preferred[0]:
            agree_preference += 1
    ok = agree_feasibility == agree_length == agree_preference == 500
    _verdict("5 fitting-oracle-equivalence", ok,
             f"feasibility {agree_feasibility}/500, length {agree_length}/500, "
             f"preference {agree_preference}/500")


def test_criterion_6_property_suites():
    lexicon = default_lexicon()
    config = ScanConfig()
    failures = []

    # phonology: round-trip, nucleus uniqueness, digraph integrity
    vocab_words = {normalize_token(tok).normalized
                   for line in bundled_mini_gold()
                   for tok in line.text.split()
                   if any(c.isalpha() for c in tok)}
    vocab_words.update(w for group in wordbank.SHAPES.values() for w in group)
    for w in sorted(vocab_words):
        syls = syllabify(w)
        if "".join(syls) != w:
            failures.append(f"round-trip {w}")
        from escansion.phonology import _group_nuclei, _tokenize
        for syl in syls:
            if sum(k == "V" for k, _ in _group_nuclei(_tokenize(syl))) != 1:
                failures.append(f"nucleus {w}/{syl}")
        for a, b in zip(syls, syls[1:]):
            if (a[-1], b[0]) in {("c", "h"), ("l", "l"), ("r", "r")}:
                failures.append(f"digraph {w}")

    # scansion: length arithmetic and position-10 preference on gold lines
    rng = random.Random(5)
    for line in bundled_mini_gold()[:20]:
        words = phonological_parse(line.text, lexicon)
        sites = find_figure_sites(words, config)
        n0 = sum(len(w.syllables) for w in words)
        for _ in range(20):
            chosen = [s for s in sites if rng.random() < 0.5]
            groups = oracle.apply_subset(words, sites, chosen)
            length, _ = oracle.length_and_pattern(groups)
            merges = sum(1 for s in chosen if s.delta < 0)
            splits_n = sum(1 for s in chosen if s.delta > 0)
            trailing = len(groups) - 1 - max(i for i, s in enumerate(groups) if s)
            if length != n0 - merges + splits_n + (1 - trailing):
                failures.append(f"length-arithmetic {line.text}")
        results = oracle.enumerate_all(words, sites, 11)
        if any(p and p[9] == "+" for _, _, p in results):
            if fit_to_target(words, sites, config).pattern[9] != "+":
                failures.append(f"position-10 {line.text}")

    # corpus: normalize_met idempotence, split determinism + disjointness
    for raw in ("+--+---+-+-", "-+---+---+", "-+---+---+--", "10001000010"):
        if normalize_met(normalize_met(raw)) != normalize_met(raw):
            failures.append(f"normalize_met {raw}")
    try:
        normalize_met("+-+")
        failures.append("normalize_met accepted +-+")
    except UnnormalizableMet:
        pass
    toy = wordbank.synthetic_corpus(45, seed=77)
    for seed in (1, 2, 3):
        a, b = split(toy, seed=seed), split(toy, seed=seed)
        if a != b:
            failures.append(f"split determinism seed {seed}")
        keys = [(ln.poem_id, ln.line_no) for part in a.parts() for ln in part]
        if len(set(keys)) != len(toy):
            failures.append(f"split disjointness seed {seed}")

    # metrics: self-score identity and exact <= per-position
    gold = bundled_mini_gold()
    self_report = evaluate([(ln.gold, ln.gold, ln.text) for ln in gold])
    if self_report.accuracy != 100.0:
        failures.append("self-score not 100.00")
    mixed = evaluate([(g.gold, gold[0].gold, g.text) for g in gold])
    exact = mixed.correct / mixed.total
    if not all(exact <= frac + 1e-12 for frac in mixed.per_position_accuracy):
        failures.append("exact-match exceeded a per-position accuracy")

    # baseline: gradient check and save/load round-trip
    texts = [ln.text for ln in gold[:10]]
    patterns = [ln.gold for ln in gold[:10]]
    cfg = TrainConfig(ngram_min=3, ngram_max=4, embedding_dim=5,
                      bucket_count=16)
    vocab = build_vocab(texts, cfg)
    rng_np = np.random.default_rng(1)
    emb = rng_np.normal(0, 0.3, (vocab.size, 5))
    w = rng_np.normal(0, 0.3, (11, 5))
    b = rng_np.normal(0, 0.3, 11)
    examples = [(featurize(t, vocab), _pattern_targets(p))
                for t, p in zip(texts, patterns)]
    loss, g_e, g_w, g_b = loss_and_grads(emb, w, b, examples)
    eps = 1e-6

    def numeric(arr, idx):
        arr[idx] += eps
        up, *_ = loss_and_grads(emb, w, b, examples)
        arr[idx] -= 2 * eps
        down, *_ = loss_and_grads(emb, w, b, examples)
        arr[idx] += eps
        return (up - down) / (2 * eps)

    for i in range(11):
        num = numeric(b, i)
        if abs(g_b[i] - num) / max(abs(g_b[i]), abs(num), 1e-8) > 1e-4:
            failures.append(f"gradient bias {i}")
        num = numeric(w, (i, 2))
        if abs(g_w[i, 2] - num) / max(abs(g_w[i, 2]), abs(num), 1e-8) > 1e-4:
            failures.append(f"gradient weight {i}")

    import tempfile
    model = train(list(zip(texts, patterns)), [], TrainConfig(
        epochs=2, embedding_dim=8, bucket_count=32))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.json")
        save_model(model, path)
        back = load_model(path)
        for t in texts[:3]:
            if not np.array_equal(predict_scores(model, t),
                                  predict_scores(back, t)):
                failures.append("save/load prediction drift")
        path2 = os.path.join(tmp, "m2.json")
        save_model(back, path2)
        with open(path, "rb") as f1, open(path2, "rb") as f2:
            if f1.read() != f2.read():
                failures.append("save/load bytes differ")

    _verdict("6 property-suites", not failures,
             "all properties hold" if not failures else "; ".join(failures[:5]))


def test_criterion_7_throughput():
    gold = bundled_mini_gold()
    lexicon = default_lexicon()
    config = ScanConfig()
    texts = [ln.text for ln in gold]
    batch = (texts * (1000 // len(texts) + 1))[:1200]
    for text in texts:  # warm-up outside the timer
        scan_line(text, lexicon, config)
    start = time.perf_counter()
    for text in batch:
        scan_line(text, lexicon, config)
    elapsed = time.perf_counter() - start
    rate = len(batch) / elapsed
    ok = rate >= 1000.0
    _verdict("7 throughput", ok,
             f"{rate:.0f} lines/s over {len(batch)} lines (need >= 1000)")
