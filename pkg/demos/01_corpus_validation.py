"""Corpus ingestion and validation, end to end.

Builds a small dialogue corpus file (including two deliberately broken
records), loads it leniently with a violation report, then shows the
dataset statistics and engagement banding.
"""

import json
import tempfile
from pathlib import Path

from congruity import corpus_stats, engagement_band, load_corpus


def record(pair_id, turn, engagement, kind="none", valence=0.5):
    return {
        "pair_id": pair_id,
        "session_id": "demo",
        "client": {"text": "I haven't slept much this week.", "turn_index": turn},
        "counsellor": {"text": "What keeps you up?", "turn_index": turn + 1},
        "frame_ref": f"frames/{pair_id}.png",
        "vad": {"valence": valence, "arousal": 0.6, "dominance": 0.4},
        "incongruence": kind,
        "engagement": engagement,
    }


lines = [
    record("d-001", 0, 0.72),
    record("d-002", 2, 0.31, kind="minimizing"),
    record("d-003", 4, 1.40),                 # engagement out of range
    record("d-004", 6, 0.55, valence=-0.2),   # valence out of range
    record("d-005", 8, 0.12, kind="contradiction"),
]

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo_corpus.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in lines) + "\n")
    (Path(tmp) / "demo_corpus.jsonl.manifest.json").write_text(
        json.dumps({"recorded_hours": 0.25}))

    report = []
    corpus = load_corpus(path, strict=False, report=report)

    print(f"kept {len(corpus)} of {len(lines)} records; dropped with reasons:")
    for line in report:
        print(" ", line)

    stats = corpus_stats(corpus)
    print(f"\npairs={stats.n_pairs} utterances={stats.n_utterances} "
          f"annotations={stats.n_annotations}")
    print(f"incongruent: {stats.n_incongruent} "
          f"({100 * stats.incongruent_fraction:.1f}%)")
    print(f"annotations/hour: {stats.annotations_per_hour:.0f}")

    print("\nengagement bands:")
    for pair in corpus.pairs:
        e = pair.annotations.engagement
        print(f"  {pair.pair_id}: {e:.2f} -> {engagement_band(e).name}")
