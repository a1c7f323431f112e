"""Summary statistics, Welch's t-test, effect sizes, agreement, and reports.

p-values come from the Student-t survival function evaluated through a
continued-fraction regularized incomplete beta (no statistics-library
dependency); the test suite pins it against an independent reference to
1e-8. Cohen's d uses the classic pooled-sd form. Agreement uses raw percent
matching and chance-corrected kappa; kappa is computed in integer count
arithmetic so textbook confusion-matrix examples come out exact.

Display rounding is centralized here (means x100 at 1 decimal, p at 3
decimals with a "<0.001" floor, d at 2, percent change at 1) so rendered
tables are stable for golden tests.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np


class AlignmentError(ValueError):
    """Score vectors that should align (same pairs, same metrics) do not."""


@dataclass(frozen=True)
class Summary:
    """Sample size, mean, and sample sd (n-1); sd is None below n=2."""

    n: int
    mean: float
    sd: Optional[float]


@dataclass(frozen=True)
class Comparison:
    """One metric row of a system-vs-baseline table."""

    metric: str
    system: str
    baseline: str
    a: Summary
    b: Summary
    t: float
    df: float
    p: float
    d: float
    change_pct: float


def summarize(xs: Sequence[float]) -> Summary:
    arr = np.asarray(xs, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample")
    sd = float(arr.std(ddof=1)) if arr.size >= 2 else None
    return Summary(n=int(arr.size), mean=float(arr.mean()), sd=sd)


# --- Student-t tail via regularized incomplete beta --------------------------

_BETA_EPS = 1e-14
_BETA_FPMIN = 1e-300
_BETA_MAXIT = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_FPMIN:
        d = _BETA_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if t == 0.0:
        return 0.5
    tail = 0.5 * betainc_reg(df / 2.0, 0.5, df / (df + t * t))
    return tail if t > 0 else 1.0 - tail


def welch_test(a: Sequence[float], b: Sequence[float]) -> tuple[float, float, float]:
    """Welch's unequal-variance t-test, two-sided.

    Returns (t, Welch-Satterthwaite df, p). With both variances zero the
    statistic degenerates: equal means give (0, na+nb-2, 1), unequal means
    give an infinite statistic and p = 0.
    """
    xa = np.asarray(a, dtype=np.float64)
    xb = np.asarray(b, dtype=np.float64)
    na, nb = xa.size, xb.size
    if na < 2 or nb < 2:
        raise ValueError("welch_test needs at least 2 observations per sample")
    va, vb = float(xa.var(ddof=1)), float(xb.var(ddof=1))
    mean_diff = float(xa.mean() - xb.mean())
    se2 = va / na + vb / nb
    if se2 == 0.0:
        if mean_diff == 0.0:
            return 0.0, float(na + nb - 2), 1.0
        return math.copysign(math.inf, mean_diff), float(na + nb - 2), 0.0
    t = mean_diff / math.sqrt(se2)
    df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    p = min(1.0, 2.0 * student_t_sf(abs(t), df))
    return float(t), float(df), float(p)


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float:
    """Pooled-sd Cohen's d; raises when the pooled sd is zero."""
    xa = np.asarray(a, dtype=np.float64)
    xb = np.asarray(b, dtype=np.float64)
    na, nb = xa.size, xb.size
    if na < 2 or nb < 2:
        raise ValueError("cohens_d needs at least 2 observations per sample")
    va, vb = float(xa.var(ddof=1)), float(xb.var(ddof=1))
    pooled = math.sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2))
    if pooled == 0.0:
        raise ValueError("pooled standard deviation is zero")
    return float((xa.mean() - xb.mean()) / pooled)


def percent_change(baseline_mean: float, variant_mean: float) -> float:
    """100 * (variant - baseline) / baseline."""
    if baseline_mean == 0:
        raise ValueError("percent change is undefined for a zero baseline")
    return 100.0 * (variant_mean - baseline_mean) / baseline_mean


def percent_agreement(a: Sequence, b: Sequence) -> float:
    """Percent of positions with identical labels, in [0, 100]."""
    if len(a) != len(b):
        raise ValueError(f"label lists differ in length: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValueError("empty label lists")
    matches = sum(1 for x, y in zip(a, b) if x == y)
    return 100.0 * matches / len(a)


def cohens_kappa(a: Sequence, b: Sequence) -> float:
    """Chance-corrected agreement between two label sequences.

    Computed in integer count arithmetic: kappa = (n*agree - chance) /
    (n^2 - chance) with chance = sum_k rowmarg_k * colmarg_k, which keeps
    rational results exact. Defined as 1 when chance agreement is total.
    """
    if len(a) != len(b):
        raise ValueError(f"label lists differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n == 0:
        raise ValueError("empty label lists")
    agree = sum(1 for x, y in zip(a, b) if x == y)
    ca, cb = Counter(a), Counter(b)
    chance = sum(ca[k] * cb.get(k, 0) for k in ca)
    denom = n * n - chance
    if denom == 0:
        return 1.0
    return (n * agree - chance) / denom


# --- report generation --------------------------------------------------------

def comparison_report(
    scores_by_system: Mapping[str, Mapping[str, Sequence[float]]],
    baseline: str,
) -> list[Comparison]:
    """Per-metric Welch/effect-size/percent-change rows against a baseline.

    Every system must carry the same metrics over the same number of pairs.
    Comparing the baseline against itself (the only-one-system case) yields
    the degenerate all-p=1, all-d=0 table.
    """
    if baseline not in scores_by_system:
        raise AlignmentError(f"baseline {baseline!r} not among systems")
    base = scores_by_system[baseline]
    variants = [s for s in scores_by_system if s != baseline] or [baseline]
    rows: list[Comparison] = []
    for system in variants:
        scores = scores_by_system[system]
        if set(scores) != set(base):
            raise AlignmentError(f"system {system!r} metrics differ from baseline")
        for metric in base:
            xs = np.asarray(scores[metric], dtype=np.float64)
            ys = np.asarray(base[metric], dtype=np.float64)
            if xs.size != ys.size:
                raise AlignmentError(
                    f"{system!r}/{metric}: {xs.size} scores vs baseline {ys.size}"
                )
            sa, sb = summarize(xs), summarize(ys)
            t, df, p = welch_test(xs, ys)
            try:
                d = cohens_d(xs, ys)
            except ValueError:
                d = 0.0 if sa.mean == sb.mean else math.nan
            if sa.mean == sb.mean:
                change = 0.0
            elif sb.mean != 0:
                change = percent_change(sb.mean, sa.mean)
            else:
                change = math.nan
            rows.append(Comparison(metric=metric, system=system, baseline=baseline,
                                   a=sa, b=sb, t=t, df=df, p=p, d=d, change_pct=change))
    return rows


@dataclass(frozen=True)
class AgreementRow:
    measure: str
    n: int
    agreement_pct: float
    kappa: float


def agreement_report(a: Sequence[str], b: Sequence[str], none_label: str = "none") -> list[AgreementRow]:
    """Overall / detection / type agreement rows for two annotators' labels.

    Detection binarizes to incongruent-vs-not; the type row restricts to
    positions where both annotators marked an incongruence and is omitted
    when no such positions exist.
    """
    rows = [AgreementRow("Overall", len(a), percent_agreement(a, b), cohens_kappa(a, b))]
    det_a = [x != none_label for x in a]
    det_b = [x != none_label for x in b]
    rows.append(
        AgreementRow("Incong. Detection", len(a), percent_agreement(det_a, det_b),
                     cohens_kappa(det_a, det_b))
    )
    both = [(x, y) for x, y in zip(a, b) if x != none_label and y != none_label]
    if both:
        ta = [x for x, _ in both]
        tb = [y for _, y in both]
        rows.append(
            AgreementRow("Incong. Type", len(both), percent_agreement(ta, tb),
                         cohens_kappa(ta, tb))
        )
    return rows


# --- display formatting ---------------------------------------------------------

def fmt_mean_sd_100(s: Summary) -> str:
    """Mean (and sd when defined) on the x100 display scale, 1 decimal."""
    if s.sd is None:
        return f"{100 * s.mean:.1f}"
    return f"{100 * s.mean:.1f} ± {100 * s.sd:.1f}"


def fmt_p(p: float) -> str:
    return "<0.001" if p < 0.0005 else f"{p:.3f}"


def fmt_d(d: float) -> str:
    return "--" if math.isnan(d) else f"{d:.2f}"


def fmt_change(change_pct: float) -> str:
    return "--" if math.isnan(change_pct) else f"{change_pct:.1f}"


def fmt_fraction_pct(fraction: float) -> str:
    """A [0,1] fraction on the percent display scale, 1 decimal."""
    return f"{100 * fraction:.1f}"


def render_comparison_text(rows: Sequence[Comparison]) -> str:
    """Aligned plain-text table: Metric, A, B, p-value, Cohen's d, Change (%)."""
    if not rows:
        return ""
    system, baseline = rows[0].system, rows[0].baseline
    header = ["Metric", system, baseline, "p-value", "Cohen's d", "Change (%)"]
    body = [
        [r.metric, fmt_mean_sd_100(r.a), fmt_mean_sd_100(r.b),
         fmt_p(r.p), fmt_d(r.d), fmt_change(r.change_pct)]
        for r in rows
    ]
    widths = [max(len(header[i]), *(len(row[i]) for row in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def write_comparison_csv(rows: Sequence[Comparison], path) -> None:
    """Full-precision comparison rows; reading back reproduces every value."""
    cols = ["metric", "system", "baseline", "n_a", "mean_a", "sd_a",
            "n_b", "mean_b", "sd_b", "t", "df", "p", "d", "change_pct"]
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for r in rows:
            writer.writerow([
                r.metric, r.system, r.baseline,
                r.a.n, repr(r.a.mean), "" if r.a.sd is None else repr(r.a.sd),
                r.b.n, repr(r.b.mean), "" if r.b.sd is None else repr(r.b.sd),
                repr(r.t), repr(r.df), repr(r.p), repr(r.d), repr(r.change_pct),
            ])


def render_agreement_text(rows: Sequence[AgreementRow]) -> str:
    """Aligned plain-text agreement table: Measure, Agree. (%), Cohen's k."""
    header = ["Measure", "Agree. (%)", "Cohen's k", "n"]
    body = [[r.measure, f"{r.agreement_pct:.1f}", f"{r.kappa:.2f}", str(r.n)] for r in rows]
    widths = [max(len(header[i]), *(len(row[i]) for row in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def write_agreement_csv(rows: Sequence[AgreementRow], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["measure", "n", "agreement_pct", "kappa"])
        for r in rows:
            writer.writerow([r.measure, r.n, repr(r.agreement_pct), repr(r.kappa)])
