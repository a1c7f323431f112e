"""Acceptance gate: one test per release criterion, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v`` to get one pass/fail line
per criterion; each test also prints an ``ACCEPTANCE`` line on success.
"""

import json
import math
import shutil
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.stats
from sklearn.metrics import cohen_kappa_score

from congruity.cli import main as cli_main
from congruity.corpus import (
    AnnotationRecord,
    Corpus,
    DialoguePair,
    IncongruenceKind,
    Speaker,
    Utterance,
    VadAnnotation,
    corpus_stats,
)
from congruity.incongruence import (
    Scheme,
    WeightConfig,
    binary_weight,
    incongruence_score,
    normalize_batch,
    sample_weight,
)
from congruity.masking import (
    default_mask_lexicon,
    dropout_decision,
    plan_epoch,
    sample_stream,
    write_plan,
)
from congruity.metrics import (
    pct_adherence,
    score_response,
    semantic_prf,
)
from congruity.stats import (
    cohens_d,
    cohens_kappa,
    fmt_fraction_pct,
    percent_agreement,
    percent_change,
    welch_test,
)

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"


def _ok(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


class TestWeightLawSuite:
    def test_weight_law_bounds_monotonicity_and_exact_endpoint(self):
        rng = np.random.default_rng(2026)
        start = time.perf_counter()
        ss = rng.uniform(0.0, 1.0, 10_000)
        gammas = rng.uniform(0.8, 1.2, 10_000)
        for s, gamma in zip(ss, gammas):
            w = sample_weight(float(s), float(gamma))
            assert 1.0 - 1e-12 <= w <= 2.0 + 1e-12
        # monotone in s at fixed gamma
        for i in range(0, 10_000, 2):
            lo, hi = sorted((float(ss[i]), float(ss[i + 1])))
            gamma = float(gammas[i])
            assert sample_weight(lo, gamma) <= sample_weight(hi, gamma) + 1e-12
        # exact endpoint, every gamma
        for gamma in np.linspace(0.8, 1.2, 101):
            assert sample_weight(1.0, float(gamma)) == 2.0
            assert sample_weight(0.0, float(gamma)) == 1.0
        # binary fallback: weights land on exactly 1 vs 2
        assert binary_weight(0) == 1.0 and binary_weight(1) == 2.0
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"weight-law suite took {elapsed:.2f}s"
        _ok("weight law: w in [1,2], monotone, s=1 -> w=2 exact, binary 1 vs 2")


class TestNormalizationSuite:
    def test_mean_one_and_order_preserved_on_random_batches(self):
        rng = np.random.default_rng(77)
        for _ in range(1_000):
            n = int(rng.integers(1, 65))
            weights = rng.uniform(1.0, 2.0, n)
            normalized = normalize_batch(weights)
            assert abs(normalized.mean() - 1.0) <= 1e-9
            order_before = np.sign(weights[:, None] - weights[None, :])
            order_after = np.sign(normalized[:, None] - normalized[None, :])
            assert np.array_equal(order_before, order_after)
        _ok("normalization: batch mean 1 +/- 1e-9, all pairwise orderings preserved")


class TestScoreSuite:
    def test_score_bounds_and_clip_boundaries(self):
        rng = np.random.default_rng(88)
        low_clip = high_clip = 0
        for _ in range(5_000):
            mismatch = float(rng.uniform(0, math.sqrt(3)))
            tau = float(rng.uniform(1e-6, 2.0))
            cos = float(rng.uniform(-1.0, 1.0))
            lam = float(rng.uniform(0.0, 2.0))
            s = incongruence_score(mismatch, tau, cos, lam)
            assert 0.0 <= s <= 1.0
            if s == 0.0:
                low_clip += 1
            if s == 1.0:
                high_clip += 1
        # anti-aligned embeddings stay in range
        assert incongruence_score(0.0, 1.0, -1.0, 0.5) == 1.0
        # both clip ends are reachable
        assert incongruence_score(0.0, 0.5, 1.0, 0.5) == 0.0
        assert incongruence_score(3.0, 0.1, -1.0, 1.0) == 1.0
        assert high_clip > 0
        _ok("score: in [0,1] under randomized inputs incl. cos=-1; both clip ends hit")


class TestDropoutSuite:
    def test_rate_and_plan_byte_determinism(self, corpus, signals, tmp_path):
        rng = sample_stream(31337, "dropout-rate")
        hits = sum(dropout_decision(rng, 0.3) for _ in range(10_000))
        rate = hits / 10_000
        assert abs(rate - 0.30) < 0.01, f"empirical rate {rate}"

        config = WeightConfig()
        lexicon = default_mask_lexicon()
        blobs = []
        for name in ("one.jsonl", "two.jsonl"):
            plan = plan_epoch(corpus, signals, config, lexicon, seed=555, batch_size=4)
            path = tmp_path / name
            write_plan(plan, config, 4, path)
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1]
        _ok("dropout: 10k draws at p=0.3 within 0.30 +/- 0.01; same seed -> same plan bytes")


class TestStatisticsOracle:
    def test_welch_d_kappa_against_references(self):
        rng = np.random.default_rng(404)
        for _ in range(50):
            na, nb = int(rng.integers(2, 60)), int(rng.integers(2, 60))
            a = rng.normal(rng.uniform(-3, 3), rng.uniform(0.2, 4), na)
            b = rng.normal(rng.uniform(-3, 3), rng.uniform(0.2, 4), nb)
            t, df, p = welch_test(a, b)
            ref = scipy.stats.ttest_ind(a, b, equal_var=False)
            assert t == pytest.approx(float(ref.statistic), abs=1e-8)
            assert p == pytest.approx(float(ref.pvalue), abs=1e-8)
            if hasattr(ref, "df"):
                assert df == pytest.approx(float(ref.df), abs=1e-8)
            pooled = math.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1))
                               / (na + nb - 2))
            assert cohens_d(a, b) == pytest.approx(
                float((a.mean() - b.mean()) / pooled), abs=1e-8)

        for _ in range(50):
            n = int(rng.integers(4, 300))
            x = rng.integers(0, 3, n)
            y = np.where(rng.random(n) < 0.55, x, rng.integers(0, 3, n))
            assert cohens_kappa(x.tolist(), y.tolist()) == pytest.approx(
                float(cohen_kappa_score(x, y)), abs=1e-8)

        # confusion counts [[20,5],[10,15]]: po=0.7, pe=0.5 -> exactly 0.4
        a = ["x"] * 25 + ["y"] * 25
        b = ["x"] * 20 + ["y"] * 5 + ["x"] * 10 + ["y"] * 15
        assert cohens_kappa(a, b) == 0.4
        _ok("statistics: Welch/d/kappa match references to 1e-8; kappa example 0.4 exact")


def _make_pair(i: int, incongruent: bool) -> DialoguePair:
    return DialoguePair(
        pair_id=f"p{i:04d}",
        session_id="s1",
        client=Utterance(Speaker.CLIENT, "Things piled up this week.", 2 * i),
        counsellor=Utterance(Speaker.COUNSELLOR, "What piled up the most?", 2 * i + 1),
        frame_ref=f"frames/{i}.png",
        annotations=AnnotationRecord(
            vad=VadAnnotation(0.4, 0.5, 0.5),
            incongruence=IncongruenceKind.MINIMIZING if incongruent else IncongruenceKind.NONE,
            engagement=0.5,
        ),
    )


class TestReferenceArithmetic:
    # Reference rows: (baseline mean, variant mean, displayed 1-decimal change).
    # Displayed values are 1-decimal roundings (half-width 0.05), checked to
    # +/- 0.05 pp beyond that.
    CHANGE_ROWS = (
        (0.648, 0.616, -4.9),
        (0.648, 0.615, -5.0),
        (0.635, 0.580, -8.7),
    )

    def test_change_column_reproduction(self):
        for baseline, variant, displayed in self.CHANGE_ROWS:
            change = percent_change(baseline, variant)
            assert abs(change - displayed) <= 0.05 + 0.05, (baseline, variant, change)
        _ok("reference arithmetic: change rows -4.9 / -5.0 / -8.7 reproduced")

    def test_agreement_83_of_100(self):
        a = ["keep"] * 100
        b = ["keep"] * 83 + ["flip"] * 17
        assert percent_agreement(a, b) == 83.0
        _ok("reference arithmetic: 83/100 -> 83.0% agreement")

    def test_corpus_manifest_arithmetic(self):
        pairs = tuple(_make_pair(i, i < 161) for i in range(789))
        corpus = Corpus(pairs=pairs, sessions=frozenset({"s1"}), recorded_hours=5.0)
        stats = corpus_stats(corpus)
        assert stats.n_pairs == 789
        assert stats.n_incongruent == 161
        assert fmt_fraction_pct(stats.incongruent_fraction) == "20.4"
        assert stats.n_annotations == 3945
        assert stats.annotations_per_hour == 789.0
        _ok("reference arithmetic: 789 pairs / 161 incongruent / 5h -> 20.4% and 789/hour")


FUZZ_FRAGMENTS = [
    "right", "okay so", "that actually sounds hard", "I'm so sorry",
    "you are not alone", "given your situation", "considering that",
    "specifically", "what I hear is", "to understand you",
    "you feel stretched thin", "I'm wondering what that's like",
    "that makes sense", "you should try harder", "honestly",
    "what changed for you?", "tell me more", "the meeting ran long",
    "it rained all week", "numbers were up", "why?", "hm",
]


class TestMetricDeterminismAndBounds:
    def test_fuzz_bounds_composite_exactness_and_identity(self, markers, store):
        rng = np.random.default_rng(999)

        def fuzz() -> str:
            k = int(rng.integers(0, 10))
            idx = rng.integers(0, len(FUZZ_FRAGMENTS), k)
            return " ".join(FUZZ_FRAGMENTS[int(i)] for i in idx)

        for case in range(500):
            response, client = fuzz(), fuzz()
            use_store = store if case % 2 else None
            row = score_response(response, client, markers, use_store,
                                 reference=client if use_store else None)
            again = score_response(response, client, markers, use_store,
                                   reference=client if use_store else None)
            assert row == again
            for key, value in row.items():
                assert 0.0 <= value <= 1.0, (key, value, response)
            pct = pct_adherence(response, client, markers, use_store)
            expected = (pct.components["rogers_core_mean"]
                        + pct.components["authenticity"]
                        + pct.components["concision"]) / 3.0
            assert abs(pct.value - expected) <= 1e-12

        vocab = list(store.table)
        for _ in range(25):
            text = " ".join(vocab[int(i)] for i in rng.integers(0, len(vocab), 8))
            prf = semantic_prf(text, text, store)
            assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)
        _ok("metrics: 500-case fuzz in [0,1]; composite exact to 1e-12; prf(x,x)=1")


class TestEndToEndGolden:
    COMMANDS = {
        "validate": ["validate", "--corpus", "corpus.jsonl", "--out", "validate"],
        "plan": ["plan", "--corpus", "corpus.jsonl", "--signals", "signals.jsonl",
                 "--seed", "20260810", "--batch-size", "4", "--out", "plan"],
        "score": ["score", "--corpus", "corpus.jsonl",
                  "--responses", "tuned=responses_tuned.jsonl",
                  "--responses", "baseline=responses_baseline.jsonl",
                  "--vectors", "vectors.txt", "--out", "score"],
        "compare": ["compare", "--corpus", "corpus.jsonl",
                    "--responses", "tuned=responses_tuned.jsonl",
                    "--responses", "baseline=responses_baseline.jsonl",
                    "--baseline", "baseline",
                    "--vectors", "vectors.txt", "--out", "compare"],
    }

    def test_pipeline_reproduces_golden_bytes(self, tmp_path, monkeypatch):
        for name in ("corpus.jsonl", "corpus.jsonl.manifest.json", "signals.jsonl",
                     "vectors.txt", "responses_tuned.jsonl", "responses_baseline.jsonl"):
            shutil.copy(FIXTURES / name, tmp_path / name)
        monkeypatch.chdir(tmp_path)
        for command, argv in self.COMMANDS.items():
            assert cli_main(argv) == 0, f"{command} failed"
        for command in self.COMMANDS:
            golden_dir = GOLDEN / command
            produced_dir = tmp_path / command
            names = sorted(p.name for p in golden_dir.iterdir())
            assert sorted(p.name for p in produced_dir.iterdir()) == names
            for name in names:
                assert (produced_dir / name).read_bytes() == (golden_dir / name).read_bytes(), \
                    f"{command}/{name} drifted"
        _ok("end-to-end: validate/plan/score/compare byte-stable against goldens")
