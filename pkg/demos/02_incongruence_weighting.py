"""The continuous incongruence score and its bounded loss weights.

Walks the score construction for three hand-made samples (congruent,
mildly mismatched, fully contradictory), shows how gamma shapes the weight
curve, and compares the continuous, binary, and engagement schemes on one
batch.
"""

import numpy as np

from congruity import (
    SampleSignals,
    Scheme,
    WeightConfig,
    batch_tau,
    incongruence_score,
    normalize_batch,
    sample_weight,
    vad_mismatch,
    weigh_batch,
    weighted_objective,
)

e_x = np.array([1.0, 0.0, 0.0, 0.0])
e_y = np.array([0.0, 1.0, 0.0, 0.0])
mixed = np.array([1.0, 1.0, 0.0, 0.0]) / np.sqrt(2)

samples = [
    ("congruent", SampleSignals((0.5, 0.5, 0.5), (0.5, 0.5, 0.5), e_x, e_x)),
    ("mild mismatch", SampleSignals((0.7, 0.5, 0.5), (0.5, 0.5, 0.5), mixed, e_x)),
    ("contradictory", SampleSignals((0.9, 0.9, 0.8), (0.2, 0.3, 0.2), e_y, e_x)),
]

mismatches = [vad_mismatch(s.vad_visual, s.vad_textual) for _, s in samples]
print(f"VAD mismatches: {[round(m, 4) for m in mismatches]}  "
      f"(batch-median tau would be {batch_tau(mismatches):.4f})")

# Fixed tau for the walkthrough so the middle sample stays mid-scale; with
# median tau everything at or above the median saturates by construction.
tau = 0.6
for (label, s), m in zip(samples, mismatches):
    cos = float(np.dot(s.z_visual, s.z_textual))
    score = incongruence_score(m, tau, cos, lam=0.5)
    print(f"  {label:14s} mismatch={m:.3f} cos={cos:+.2f} -> s={score:.3f}")

print("\nweight law w = 1 + s^gamma over gamma:")
for gamma in (0.8, 1.0, 1.2):
    curve = [round(sample_weight(s, gamma), 3) for s in (0.0, 0.25, 0.5, 0.75, 1.0)]
    print(f"  gamma={gamma}: {curve}")

batch = [s for _, s in samples]
for scheme, extra in ((Scheme.CONTINUOUS, {}),
                      (Scheme.BINARY, {"flags": [0, 0, 1]}),
                      (Scheme.ENGAGEMENT, {"engagement": [0.8, 0.5, 0.2]})):
    if scheme is Scheme.BINARY:
        batch = [SampleSignals(s.vad_visual, s.vad_textual, s.z_visual, s.z_textual,
                               incongruence_flag=f)
                 for s, f in zip(batch, extra["flags"])]
    if scheme is Scheme.ENGAGEMENT:
        batch = [SampleSignals(s.vad_visual, s.vad_textual, s.z_visual, s.z_textual,
                               s.incongruence_flag, engagement=e)
                 for s, e in zip(batch, extra["engagement"])]
    out = weigh_batch(batch, WeightConfig(scheme=scheme))
    print(f"\n{scheme.value} scheme weights: {np.round(out.weights, 3).tolist()}")

weights = weigh_batch(batch, WeightConfig(scheme=Scheme.BINARY)).weights
losses = np.array([0.9, 1.1, 1.4])
print(f"\nobjective with weights {weights.tolist()}: "
      f"{weighted_objective(weights, losses):.4f}")
print(f"mean-normalized weights: {np.round(normalize_batch(weights), 4).tolist()} "
      f"(mean {normalize_batch(weights).mean():.6f})")
