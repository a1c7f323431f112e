"""Comparison tables and inter-annotator agreement.

Scores the two fixture response sets over the fixture corpus, renders the
system-vs-baseline table (Welch's p, Cohen's d, percent change), and
computes the annotation agreement rows.
"""

from pathlib import Path

from congruity import (
    agreement_report,
    comparison_report,
    load_corpus,
    load_marker_lexicons,
    load_vectors,
    read_responses,
    score_corpus,
)
from congruity.stats import render_agreement_text, render_comparison_text

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

corpus = load_corpus(FIXTURES / "corpus.jsonl")
lex = load_marker_lexicons()
store = load_vectors(FIXTURES / "vectors.txt")

scores = {
    name: score_corpus(read_responses(FIXTURES / f"responses_{name}.jsonl"),
                       corpus, lex, store)
    for name in ("tuned", "baseline")
}

headline = ("empathic_authenticity", "responsive_engagement",
            "therapeutic_concision", "pct_adherence", "semantic_f1")
by_system = {name: {m: s.columns[m] for m in headline} for name, s in scores.items()}
rows = comparison_report(by_system, baseline="baseline")
print(render_comparison_text(rows))

import json

labels = {}
for which in ("a", "b"):
    with open(FIXTURES / f"labels_{which}.jsonl", encoding="utf-8") as fh:
        labels[which] = [json.loads(line)["incongruence"] for line in fh]

print(render_agreement_text(agreement_report(labels["a"], labels["b"])))
