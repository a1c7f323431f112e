import csv
import math

import numpy as np
import pytest
import scipy.stats
from sklearn.metrics import cohen_kappa_score

from congruity.stats import (
    AlignmentError,
    agreement_report,
    betainc_reg,
    cohens_d,
    cohens_kappa,
    comparison_report,
    fmt_change,
    fmt_d,
    fmt_fraction_pct,
    fmt_p,
    percent_agreement,
    percent_change,
    render_agreement_text,
    render_comparison_text,
    student_t_sf,
    summarize,
    welch_test,
    write_comparison_csv,
)


class TestSummarize:
    def test_constant_list(self):
        s = summarize([0.5, 0.5, 0.5])
        assert (s.mean, s.sd) == (0.5, 0.0)

    def test_two_values(self):
        s = summarize([0, 1])
        assert s.mean == 0.5
        assert s.sd == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_singleton_sd_absent(self):
        s = summarize([0.3])
        assert s.n == 1 and s.sd is None

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])


class TestStudentTail:
    def test_sf_at_zero(self):
        assert student_t_sf(0.0, 8) == 0.5

    def test_against_scipy_grid(self):
        for df in (1, 2, 3.7, 8, 15.2, 40, 120):
            for t in (-6.0, -2.5, -1.0, -0.2, 0.3, 1.0, 2.0, 4.5, 9.0):
                ours = student_t_sf(t, df)
                ref = float(scipy.stats.t.sf(t, df))
                assert ours == pytest.approx(ref, abs=1e-10)

    def test_betainc_against_scipy(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            a = float(rng.uniform(0.2, 40))
            b = float(rng.uniform(0.2, 40))
            x = float(rng.uniform(0, 1))
            assert betainc_reg(a, b, x) == pytest.approx(
                float(scipy.stats.beta.cdf(x, a, b)), abs=1e-10)


class TestWelch:
    def test_identical_samples(self):
        a = [0.1, 0.5, 0.9]
        t, df, p = welch_test(a, a)
        assert t == 0.0 and p == 1.0

    def test_reference_example(self):
        t, df, p = welch_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert t == pytest.approx(-1.0, abs=1e-12)
        assert df == pytest.approx(8.0, abs=1e-12)
        assert p == pytest.approx(0.34659350708733416, abs=1e-8)

    def test_separation_limit(self):
        a = np.random.default_rng(1).normal(0, 0.1, 30)
        b = np.random.default_rng(2).normal(100, 0.1, 30)
        _, _, p = welch_test(a, b)
        assert p < 0.001

    def test_both_constant_equal(self):
        t, df, p = welch_test([2.0, 2.0], [2.0, 2.0])
        assert (t, p) == (0.0, 1.0)

    def test_both_constant_unequal(self):
        t, df, p = welch_test([2.0, 2.0], [3.0, 3.0])
        assert math.isinf(t) and p == 0.0

    def test_undersized_rejected(self):
        with pytest.raises(ValueError):
            welch_test([1.0], [1.0, 2.0])

    def test_symmetry(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            a = rng.normal(size=int(rng.integers(2, 20)))
            b = rng.normal(size=int(rng.integers(2, 20)))
            ta, dfa, pa = welch_test(a, b)
            tb, dfb, pb = welch_test(b, a)
            assert ta == pytest.approx(-tb, abs=1e-12)
            assert dfa == pytest.approx(dfb, abs=1e-12)
            assert pa == pytest.approx(pb, abs=1e-12)

    def test_against_scipy_fixtures(self):
        rng = np.random.default_rng(50)
        for _ in range(50):
            na, nb = int(rng.integers(2, 40)), int(rng.integers(2, 40))
            a = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), na)
            b = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), nb)
            t, df, p = welch_test(a, b)
            ref = scipy.stats.ttest_ind(a, b, equal_var=False)
            assert t == pytest.approx(float(ref.statistic), abs=1e-8)
            assert p == pytest.approx(float(ref.pvalue), abs=1e-8)
            if hasattr(ref, "df"):
                assert df == pytest.approx(float(ref.df), abs=1e-8)


class TestCohensD:
    def test_identical(self):
        assert cohens_d([1, 2, 3], [1, 2, 3]) == 0.0

    def test_unit_effect(self):
        # means differ by exactly the pooled sd
        a = [0.0, 2.0]
        b = [math.sqrt(2), 2 + math.sqrt(2)]
        assert cohens_d(b, a) == pytest.approx(1.0, abs=1e-12)

    def test_hand_example(self):
        assert cohens_d([1, 2, 3], [3, 4, 5]) == pytest.approx(-2.0, abs=1e-12)

    def test_zero_pooled_sd_rejected(self):
        with pytest.raises(ValueError):
            cohens_d([1.0, 1.0], [1.0, 1.0])

    def test_antisymmetry_and_invariances(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            a = rng.normal(size=int(rng.integers(2, 15)))
            b = rng.normal(size=int(rng.integers(2, 15)))
            d = cohens_d(a, b)
            assert d == pytest.approx(-cohens_d(b, a), abs=1e-12)
            shift = float(rng.uniform(-5, 5))
            scale = float(rng.uniform(0.1, 10))
            assert cohens_d(a + shift, b + shift) == pytest.approx(d, abs=1e-9)
            assert cohens_d(scale * a, scale * b) == pytest.approx(d, abs=1e-9)

    def test_against_reference_formula(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            a = rng.normal(1, 2, int(rng.integers(2, 30)))
            b = rng.normal(0, 1, int(rng.integers(2, 30)))
            na, nb = len(a), len(b)
            pooled = math.sqrt(((na - 1) * np.var(a, ddof=1) + (nb - 1) * np.var(b, ddof=1))
                               / (na + nb - 2))
            assert cohens_d(a, b) == pytest.approx((a.mean() - b.mean()) / pooled, abs=1e-8)


class TestPercentChange:
    def test_published_rows(self):
        assert percent_change(0.635, 0.580) == pytest.approx(-8.661417322834646, abs=1e-9)
        assert percent_change(0.648, 0.615) == pytest.approx(-5.092592592592593, abs=1e-9)

    def test_identity(self):
        assert percent_change(0.4, 0.4) == 0.0

    def test_zero_baseline_rejected(self):
        with pytest.raises(ValueError):
            percent_change(0.0, 0.1)


class TestAgreement:
    def test_83_of_100(self):
        a = ["x"] * 100
        b = ["x"] * 83 + ["y"] * 17
        assert percent_agreement(a, b) == 83.0

    def test_identical(self):
        assert percent_agreement([1, 2, 3], [1, 2, 3]) == 100.0

    def test_disjoint(self):
        assert percent_agreement(["a", "a"], ["b", "b"]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            percent_agreement([1], [1, 2])


class TestKappa:
    def test_perfect_agreement(self):
        labels = ["a", "b", "c", "a", "b"]
        assert cohens_kappa(labels, labels) == 1.0

    def test_confusion_matrix_example_exact(self):
        # counts [[20, 5], [10, 15]]: po=0.7, pe=0.5 -> kappa = 0.4 exactly
        a = ["x"] * 25 + ["y"] * 25
        b = ["x"] * 20 + ["y"] * 5 + ["x"] * 10 + ["y"] * 15
        assert cohens_kappa(a, b) == 0.4

    def test_chance_level_random(self):
        rng = np.random.default_rng(33)
        a = rng.integers(0, 3, 10_000).tolist()
        b = rng.integers(0, 3, 10_000).tolist()
        assert -0.05 < cohens_kappa(a, b) < 0.05

    def test_constant_identical_lists(self):
        assert cohens_kappa(["a", "a"], ["a", "a"]) == 1.0

    def test_never_exceeds_one(self):
        rng = np.random.default_rng(34)
        for _ in range(100):
            n = int(rng.integers(1, 50))
            a = rng.integers(0, 4, n).tolist()
            b = rng.integers(0, 4, n).tolist()
            assert cohens_kappa(a, b) <= 1.0

    def test_against_sklearn(self):
        rng = np.random.default_rng(52)
        for _ in range(50):
            n = int(rng.integers(5, 200))
            a = rng.integers(0, 3, n)
            b = np.where(rng.random(n) < 0.6, a, rng.integers(0, 3, n))
            ours = cohens_kappa(a.tolist(), b.tolist())
            ref = float(cohen_kappa_score(a, b))
            assert ours == pytest.approx(ref, abs=1e-8)


class TestComparisonReport:
    def test_self_comparison_degenerate(self):
        scores = {"only": {"m1": [0.1, 0.4, 0.7], "m2": [0.5, 0.6, 0.9]}}
        rows = comparison_report(scores, baseline="only")
        assert len(rows) == 2
        for row in rows:
            assert row.p == 1.0
            assert row.d == 0.0
            assert row.change_pct == 0.0

    def test_two_system_row_matches_direct_computation(self):
        a = [0.2, 0.5, 0.9, 0.4]
        b = [0.1, 0.3, 0.6, 0.2]
        rows = comparison_report({"base": {"m": b}, "new": {"m": a}}, baseline="base")
        assert len(rows) == 1
        row = rows[0]
        t, df, p = welch_test(a, b)
        assert (row.t, row.df, row.p) == (t, df, p)
        assert row.d == cohens_d(a, b)
        assert row.change_pct == percent_change(np.mean(b), np.mean(a))

    def test_misaligned_vectors_rejected(self):
        scores = {"base": {"m": [0.1, 0.2]}, "new": {"m": [0.1, 0.2, 0.3]}}
        with pytest.raises(AlignmentError):
            comparison_report(scores, baseline="base")

    def test_differing_metrics_rejected(self):
        scores = {"base": {"m": [0.1, 0.2]}, "new": {"other": [0.1, 0.2]}}
        with pytest.raises(AlignmentError):
            comparison_report(scores, baseline="base")

    def test_unknown_baseline_rejected(self):
        with pytest.raises(AlignmentError):
            comparison_report({"a": {"m": [1, 2]}}, baseline="b")

    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(60)
        scores = {
            "base": {"m1": rng.random(8).tolist(), "m2": rng.random(8).tolist()},
            "new": {"m1": rng.random(8).tolist(), "m2": rng.random(8).tolist()},
        }
        rows = comparison_report(scores, baseline="base")
        path = tmp_path / "cmp.csv"
        write_comparison_csv(rows, path)
        with path.open() as fh:
            parsed = list(csv.DictReader(fh))
        assert len(parsed) == len(rows)
        for row, rec in zip(rows, parsed):
            assert float(rec["t"]) == row.t
            assert float(rec["p"]) == row.p
            assert float(rec["d"]) == row.d
            assert float(rec["mean_a"]) == row.a.mean
            assert float(rec["change_pct"]) == row.change_pct

    def test_render_text_stable(self):
        scores = {"base": {"m": [0.1, 0.2, 0.3]}, "new": {"m": [0.2, 0.3, 0.4]}}
        rows = comparison_report(scores, baseline="base")
        text = render_comparison_text(rows)
        assert text.splitlines()[0].startswith("Metric")
        assert "m" in text


class TestAgreementReport:
    def test_rows_and_subsetting(self):
        a = ["none", "minimizing", "none", "contradiction", "minimizing"]
        b = ["none", "none", "none", "minimizing", "minimizing"]
        rows = agreement_report(a, b)
        measures = [r.measure for r in rows]
        assert measures == ["Overall", "Incong. Detection", "Incong. Type"]
        overall, detection, typ = rows
        assert overall.agreement_pct == 60.0
        assert detection.agreement_pct == 80.0
        # both marked incongruence on positions 3 and 4; types agree once
        assert typ.n == 2
        assert typ.agreement_pct == 50.0

    def test_type_row_omitted_without_shared_incongruence(self):
        rows = agreement_report(["none", "minimizing"], ["contradiction", "none"])
        assert [r.measure for r in rows] == ["Overall", "Incong. Detection"]

    def test_render_text(self):
        rows = agreement_report(["none", "none"], ["none", "none"])
        text = render_agreement_text(rows)
        assert text.splitlines()[0].startswith("Measure")


class TestDisplayFormatting:
    def test_p_floor(self):
        assert fmt_p(0.0004) == "<0.001"
        assert fmt_p(0.0006) == "0.001"
        assert fmt_p(0.303) == "0.303"

    def test_d_two_decimals(self):
        assert fmt_d(-0.516) == "-0.52"

    def test_change_one_decimal(self):
        assert fmt_change(-8.661417) == "-8.7"
        assert fmt_change(-4.938) == "-4.9"

    def test_fraction_pct(self):
        assert fmt_fraction_pct(161 / 789) == "20.4"
