"""Context masking and deterministic epoch plans.

Masks emotion terms out of client utterances, strips VAD labels for
training export, and compiles two epoch plans from the same inputs to show
that the seed moves only the masking decisions, never the weights.
"""

import json
import tempfile
from pathlib import Path

from congruity import (
    WeightConfig,
    default_mask_lexicon,
    load_corpus,
    mask_context,
    plan_epoch,
    read_signals,
    strip_vad,
    write_plan,
)

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

lexicon = default_mask_lexicon()
for text in (
    "I feel sad and overwhelmed most mornings.",
    "The anxiety is worse before meetings.",
    "It rained all week.",
):
    masked, n = mask_context(text, lexicon)
    print(f"  {text!r}\n    -> {masked!r}  ({n} masked)")

corpus = load_corpus(FIXTURES / "corpus.jsonl")
signals = read_signals(FIXTURES / "signals.jsonl")

stripped = strip_vad(corpus.pairs[0])
print(f"\nVAD before export: {corpus.pairs[0].annotations.vad}")
print(f"VAD after strip_vad: {stripped.annotations.vad}")

config = WeightConfig(dropout_p=0.3)
plan_a = plan_epoch(corpus, signals, config, lexicon, seed=1, batch_size=4)
plan_b = plan_epoch(corpus, signals, config, lexicon, seed=2, batch_size=4)

print("\npair        weight  masked(seed 1)  masked(seed 2)")
for ea, eb in zip(plan_a.entries, plan_b.entries):
    print(f"{ea.pair_id}  {ea.weight:6.3f}  {str(ea.masked):14s}  {eb.masked}")

assert [e.weight for e in plan_a.entries] == [e.weight for e in plan_b.entries]
print("\nweights identical across seeds; only mask decisions moved")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "plan.jsonl"
    write_plan(plan_a, config, 4, path)
    header = json.loads(path.read_text().splitlines()[0])
    print(f"exported plan header: {header}")
