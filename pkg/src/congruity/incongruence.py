"""Continuous incongruence scoring and bounded loss weights.

The per-sample score combines a scaled VAD mismatch with cross-modal
embedding misalignment and is clipped to [0,1]:

    s = clip(||e_v - e_t|| / tau  +  lam * (1 - <z_v, z_t>), 0, 1)

tau is either fixed or the batch median mismatch (floored at 1e-6 so an
all-congruent batch stays well-defined). The weight law w = 1 + s**gamma is
bounded in [1,2]; gamma in [0.8, 1.2] sharpens or softens mid-range
emphasis. Two fallback schemes cover sparser annotation: binary (s = I,
weights 1 vs 2) and engagement-linear (w = 1 + E).

All functions are pure; batches can be weighted concurrently. Batch-median
tau is computed per batch, so cross-batch parallelism has no ordering
hazards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .embeddings import cosine

TAU_EPSILON = 1e-6
GAMMA_RANGE = (0.8, 1.2)
Z_NORM_TOL = 1e-6


class SignalsError(ValueError):
    """Missing or malformed per-sample signals."""


class ConfigError(ValueError):
    """Invalid weighting configuration."""


class Scheme(Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    ENGAGEMENT = "engagement"


@dataclass(frozen=True)
class SampleSignals:
    """Externally produced per-sample signals feeding the continuous score.

    VAD triples are pre-scaled to [0,1] per component; z vectors are unit
    norm (within 1e-6) and share one dimension. The binary flag and
    engagement score are optional and only required by their schemes.
    """

    vad_visual: tuple[float, float, float]
    vad_textual: tuple[float, float, float]
    z_visual: np.ndarray
    z_textual: np.ndarray
    incongruence_flag: Optional[int] = None
    engagement: Optional[float] = None


@dataclass(frozen=True)
class WeightConfig:
    """All weighting knobs in one place.

    tau_mode is "median" (batch median mismatch) or "fixed" (tau_value > 0).
    invert_engagement switches the engagement scheme to w = 1 + (1 - E),
    the reading under which low engagement gets the extra emphasis; the
    default follows the linear form w = 1 + E verbatim.
    """

    scheme: Scheme = Scheme.CONTINUOUS
    tau_mode: str = "median"
    tau_value: Optional[float] = None
    lam: float = 0.5
    gamma: float = 1.0
    normalize: bool = False
    dropout_p: float = 0.3
    invert_engagement: bool = False

    def validate(self) -> None:
        if not isinstance(self.scheme, Scheme):
            raise ConfigError(f"unknown scheme: {self.scheme!r}")
        if self.tau_mode not in ("median", "fixed"):
            raise ConfigError(f"tau_mode must be 'median' or 'fixed', got {self.tau_mode!r}")
        if self.tau_mode == "fixed":
            if self.tau_value is None or self.tau_value <= 0:
                raise ConfigError("fixed tau requires tau_value > 0")
        if self.lam < 0:
            raise ConfigError(f"lambda must be non-negative, got {self.lam}")
        lo, hi = GAMMA_RANGE
        if not lo <= self.gamma <= hi:
            raise ConfigError(f"gamma must lie in [{lo}, {hi}], got {self.gamma}")
        if not 0.0 <= self.dropout_p <= 1.0:
            raise ConfigError(f"dropout_p must lie in [0,1], got {self.dropout_p}")


@dataclass(frozen=True)
class WeightedBatch:
    """Aligned scores and weights for one batch (losses optional)."""

    weights: np.ndarray
    scores: np.ndarray
    losses: Optional[np.ndarray] = None


def vad_mismatch(e_v, e_t) -> float:
    """Euclidean distance between the two VAD triples (bounded by sqrt(3))."""
    return float(np.linalg.norm(np.subtract(e_v, e_t, dtype=np.float64)))


def batch_tau(mismatches: Sequence[float]) -> float:
    """Batch-median mismatch, lower-middle for even lengths, floored at 1e-6."""
    if len(mismatches) == 0:
        raise SignalsError("batch_tau requires a non-empty batch")
    ordered = sorted(float(m) for m in mismatches)
    median = ordered[(len(ordered) - 1) // 2]
    return max(median, TAU_EPSILON)


def incongruence_score(mismatch: float, tau: float, cos_vt: float, lam: float) -> float:
    """clip(mismatch/tau + lam * (1 - cos_vt), 0, 1).

    cos_vt may reach -1 for anti-aligned embeddings; the term is passed
    through unclamped and the outer clip keeps the score in [0,1].
    """
    if tau <= 0:
        raise SignalsError(f"tau must be positive, got {tau}")
    if mismatch < 0:
        raise SignalsError(f"mismatch must be non-negative, got {mismatch}")
    if not -1.0 - 1e-9 <= cos_vt <= 1.0 + 1e-9:
        raise SignalsError(f"cosine out of [-1,1]: {cos_vt}")
    if lam < 0:
        raise ConfigError(f"lambda must be non-negative, got {lam}")
    raw = mismatch / tau + lam * (1.0 - cos_vt)
    return float(min(1.0, max(0.0, raw)))


def sample_weight(s: float, gamma: float) -> float:
    """Weight law w = 1 + s**gamma, bounded in [1,2]; s=1 maps to exactly 2."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"score out of [0,1]: {s}")
    lo, hi = GAMMA_RANGE
    if not lo <= gamma <= hi:
        raise ValueError(f"gamma out of [{lo},{hi}]: {gamma}")
    return 1.0 + s**gamma


def binary_weight(flag) -> float:
    """Binary fallback: weight 1 for congruent, 2 for incongruent samples."""
    if isinstance(flag, bool):
        flag = int(flag)
    if flag not in (0, 1):
        raise ValueError(f"binary flag must be 0 or 1, got {flag!r}")
    return 1.0 + float(flag)


def engagement_weight(engagement: float, invert: bool = False) -> float:
    """Engagement-linear weight w = 1 + E (or 1 + (1-E) when inverted)."""
    if not 0.0 <= engagement <= 1.0:
        raise ValueError(f"engagement out of [0,1]: {engagement}")
    e = 1.0 - engagement if invert else engagement
    return 1.0 + e


def normalize_batch(weights: Sequence[float]) -> np.ndarray:
    """Divide by the batch mean so the mean weight is 1; order is preserved."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise ValueError("cannot normalize an empty batch")
    if np.any(w <= 0):
        raise ValueError("weights must be positive for normalization")
    return w / w.mean()


def weighted_objective(weights: Sequence[float], losses: Sequence[float]) -> float:
    """Batch objective (1/|B|) * sum(w_i * loss_i)."""
    w = np.asarray(weights, dtype=np.float64)
    l = np.asarray(losses, dtype=np.float64)
    if w.size == 0:
        raise ValueError("empty batch")
    if w.shape != l.shape:
        raise ValueError(f"length mismatch: {w.shape} vs {l.shape}")
    return float(np.mean(w * l))


def validate_signals(signals: SampleSignals, label: str = "sample") -> None:
    """Raise SignalsError unless the continuous-scheme invariants hold."""
    for name, triple in (("vad_visual", signals.vad_visual), ("vad_textual", signals.vad_textual)):
        arr = np.asarray(triple, dtype=np.float64)
        if arr.shape != (3,):
            raise SignalsError(f"{label}: {name} must have 3 components")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise SignalsError(f"{label}: {name} out of [0,1]")
    zv = np.asarray(signals.z_visual, dtype=np.float64)
    zt = np.asarray(signals.z_textual, dtype=np.float64)
    if zv.shape != zt.shape:
        raise SignalsError(f"{label}: z vectors must share one dimension")
    for name, z in (("z_visual", zv), ("z_textual", zt)):
        if abs(float(np.linalg.norm(z)) - 1.0) > Z_NORM_TOL:
            raise SignalsError(f"{label}: {name} is not unit norm")


def weigh_batch(batch: Sequence[SampleSignals], config: WeightConfig) -> WeightedBatch:
    """Score and weight one batch under the configured scheme.

    Continuous: s per the clipped mismatch formula (tau per tau_mode,
    median computed over this batch), then w = 1 + s**gamma.
    Binary: s = I, so weights land on exactly 1 or 2.
    Engagement: w = 1 + E (inverted: 1 + (1-E)); s records w - 1.
    Mean-normalization is applied afterwards iff config.normalize.
    """
    config.validate()
    if len(batch) == 0:
        raise SignalsError("empty batch")

    if config.scheme is Scheme.BINARY:
        scores = []
        for i, sig in enumerate(batch):
            if sig.incongruence_flag is None:
                raise SignalsError(f"sample {i}: incongruence_flag required for the binary scheme")
            scores.append(binary_weight(sig.incongruence_flag) - 1.0)
        scores = np.asarray(scores, dtype=np.float64)
        weights = 1.0 + scores**config.gamma
    elif config.scheme is Scheme.ENGAGEMENT:
        scores = []
        for i, sig in enumerate(batch):
            if sig.engagement is None:
                raise SignalsError(f"sample {i}: engagement required for the engagement scheme")
            scores.append(engagement_weight(sig.engagement, config.invert_engagement) - 1.0)
        scores = np.asarray(scores, dtype=np.float64)
        weights = 1.0 + scores
    else:
        for i, sig in enumerate(batch):
            validate_signals(sig, label=f"sample {i}")
        mismatches = [vad_mismatch(s.vad_visual, s.vad_textual) for s in batch]
        tau = batch_tau(mismatches) if config.tau_mode == "median" else float(config.tau_value)
        scores = np.asarray(
            [
                incongruence_score(m, tau, cosine(s.z_visual, s.z_textual), config.lam)
                for m, s in zip(mismatches, batch)
            ],
            dtype=np.float64,
        )
        weights = 1.0 + scores**config.gamma

    if config.normalize:
        weights = normalize_batch(weights)
    return WeightedBatch(weights=weights, scores=scores)


# --- signals file I/O -------------------------------------------------------

def read_signals(path) -> dict[str, SampleSignals]:
    """Read a signals JSONL file into a pair_id -> SampleSignals map.

    Schema per line: {"pair_id", "vad_visual":[3], "vad_textual":[3],
    "z_visual":[d], "z_textual":[d], "incongruence_flag"?, "engagement"?}.
    One embedding dimension is enforced across the whole file.
    """
    path = Path(path)
    out: dict[str, SampleSignals] = {}
    dim: Optional[int] = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SignalsError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            missing = [k for k in ("pair_id", "vad_visual", "vad_textual", "z_visual", "z_textual")
                       if k not in obj]
            if missing:
                raise SignalsError(f"line {lineno}: missing fields: {', '.join(missing)}")
            zv = np.asarray(obj["z_visual"], dtype=np.float64)
            zt = np.asarray(obj["z_textual"], dtype=np.float64)
            if dim is None:
                dim = zv.size
            if zv.size != dim or zt.size != dim:
                raise SignalsError(f"line {lineno}: embedding dimension differs from {dim}")
            pid = obj["pair_id"]
            if pid in out:
                raise SignalsError(f"line {lineno}: duplicate pair_id {pid!r}")
            out[pid] = SampleSignals(
                vad_visual=tuple(float(x) for x in obj["vad_visual"]),
                vad_textual=tuple(float(x) for x in obj["vad_textual"]),
                z_visual=zv,
                z_textual=zt,
                incongruence_flag=obj.get("incongruence_flag"),
                engagement=obj.get("engagement"),
            )
    return out


def write_weights(pair_ids: Sequence[str], batch: WeightedBatch, path) -> None:
    """Emit one {"pair_id", "s", "w"} JSONL row per sample."""
    if len(pair_ids) != len(batch.weights):
        raise SignalsError("pair_ids and weights length mismatch")
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for pid, s, w in zip(pair_ids, batch.scores, batch.weights):
            fh.write(json.dumps({"pair_id": pid, "s": float(s), "w": float(w)}) + "\n")
