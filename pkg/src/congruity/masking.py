"""Context dropout, emotion-term masking, and deterministic epoch plans.

An epoch plan externalizes the per-sample training decisions a host trainer
replays: the loss weight and whether the sample's text context is masked
this epoch. Plans are a pure function of (corpus, signals, config, lexicon,
seed, batch_size): masking decisions come from per-sample random streams
keyed by pair_id, so results do not depend on execution order, and weights
consume no randomness at all.

Generator: PCG64 seeded from (seed, blake2b-64(pair_id)). The scheme is
named so exported plans can record how their randomness was derived.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus, DialoguePair
from .embeddings import tokenize
from .incongruence import SampleSignals, SignalsError, WeightConfig, weigh_batch

GENERATOR_NAME = "pcg64-blake2b64-v1"

_TOKEN_CASED = re.compile(r"[^\W_]+")

# Explicit emotional cues masked by default. The lexicon is configurable;
# this list is the shipped baseline, not a claim of completeness.
DEFAULT_EMOTION_TERMS = frozenset({
    "afraid", "anger", "angry", "anguish", "anxiety", "anxious", "ashamed",
    "calm", "cry", "crying", "depressed", "depression", "despair",
    "devastated", "disappointed", "disappointment", "distress", "distressed",
    "dread", "embarrassed", "emotion", "emotional", "emotions", "empty",
    "exhausted", "fear", "feel", "feeling", "feelings", "felt", "frustrated",
    "frustration", "furious", "grief", "grieving", "guilt", "guilty",
    "happiness", "happy", "heartbroken", "helpless", "hopeful", "hopeless",
    "hurt", "joy", "joyful", "lonely", "loneliness", "miserable", "mood",
    "nervous", "numb", "overwhelmed", "pain", "painful", "panic", "panicked",
    "relief", "relieved", "sad", "sadness", "scared", "shame", "stress",
    "stressed", "terrified", "upset", "worried", "worry", "worthless",
})

DEFAULT_VAD_FIELD_NAMES = frozenset({"valence", "arousal", "dominance"})


@dataclass(frozen=True)
class MaskLexicon:
    """Tokens replaced by the placeholder during context dropout."""

    emotion_terms: frozenset[str]
    vad_field_names: frozenset[str]
    placeholder: str = "[MASK]"

    def validate(self) -> None:
        if not self.emotion_terms or not self.vad_field_names:
            raise ValueError("mask lexicon sets must be non-empty")
        if not self.placeholder:
            raise ValueError("placeholder must be non-empty")
        terms = self.emotion_terms | self.vad_field_names
        for term in terms:
            toks = tokenize(term)
            if len(toks) != 1 or toks[0] != term:
                raise ValueError(f"mask term must be a single lowercase token: {term!r}")
        # Masking must be idempotent: the placeholder's own tokens may not
        # be maskable, or repeated application would rewrite its output.
        for tok in tokenize(self.placeholder):
            if tok in terms:
                raise ValueError(f"placeholder token {tok!r} collides with the lexicon")


def default_mask_lexicon() -> MaskLexicon:
    return MaskLexicon(
        emotion_terms=DEFAULT_EMOTION_TERMS,
        vad_field_names=DEFAULT_VAD_FIELD_NAMES,
    )


def load_mask_lexicon(path=None) -> MaskLexicon:
    """Read the "masking" section of a lexicons JSON file (defaults when None)."""
    if path is None:
        lex = default_mask_lexicon()
    else:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        section = obj.get("masking", {})
        lex = MaskLexicon(
            emotion_terms=frozenset(section.get("emotion_terms", DEFAULT_EMOTION_TERMS)),
            vad_field_names=frozenset(section.get("vad_field_names", DEFAULT_VAD_FIELD_NAMES)),
            placeholder=section.get("placeholder", "[MASK]"),
        )
    lex.validate()
    return lex


def mask_context(text: str, lexicon: MaskLexicon) -> tuple[str, int]:
    """Replace every lexicon token with the placeholder, keeping everything else.

    Matching uses the shared tokenizer's notion of a token (alphanumeric run,
    case-insensitive); punctuation and spacing survive untouched. Returns the
    masked text and the number of replacements.
    """
    terms = lexicon.emotion_terms | lexicon.vad_field_names
    n_masked = 0

    def _sub(match: re.Match) -> str:
        nonlocal n_masked
        if match.group(0).lower() in terms:
            n_masked += 1
            return lexicon.placeholder
        return match.group(0)

    return _TOKEN_CASED.sub(_sub, text), n_masked


def sample_stream(seed: int, pair_id: str) -> np.random.Generator:
    """Deterministic per-sample random stream keyed by (seed, pair_id)."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit non-negative integer, got {seed}")
    digest = hashlib.blake2b(pair_id.encode("utf-8"), digest_size=8).digest()
    key = int.from_bytes(digest, "big")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, key])))


def dropout_decision(rng: np.random.Generator, p: float) -> bool:
    """One Bernoulli(p) draw from the given stream (consumes exactly one draw)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"dropout probability out of [0,1]: {p}")
    return bool(rng.random() < p)


def strip_vad(record: DialoguePair) -> DialoguePair:
    """Withhold the VAD annotation for training export; everything else is kept.

    Idempotent: stripping an already-stripped record changes nothing.
    """
    if record.annotations.vad is None:
        return record
    return replace(record, annotations=replace(record.annotations, vad=None))


@dataclass(frozen=True)
class PlanEntry:
    pair_id: str
    weight: float
    masked: bool
    masked_text: Optional[str] = None


@dataclass(frozen=True)
class EpochPlan:
    """Per-sample weight and mask decisions for one epoch, in corpus order."""

    seed: int
    entries: tuple[PlanEntry, ...]


def plan_epoch(
    corpus: Corpus,
    signals: Mapping[str, SampleSignals],
    config: WeightConfig,
    lexicon: MaskLexicon,
    seed: int,
    batch_size: int,
) -> EpochPlan:
    """Compile the deterministic weight/mask plan for one pass over the corpus.

    Pairs are processed in corpus order in consecutive batches of batch_size
    (the last batch may be short); batch-median tau is computed within each
    batch. Masking decisions draw from per-pair streams, so changing the seed
    changes only mask outcomes, never weights.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    lexicon.validate()
    missing = [p.pair_id for p in corpus.pairs if p.pair_id not in signals]
    if missing:
        raise SignalsError(f"signals missing for pairs: {', '.join(missing[:5])}"
                           + (" ..." if len(missing) > 5 else ""))

    entries: list[PlanEntry] = []
    pairs = corpus.pairs
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start:start + batch_size]
        weighted = weigh_batch([signals[p.pair_id] for p in chunk], config)
        for pair, weight in zip(chunk, weighted.weights):
            rng = sample_stream(seed, pair.pair_id)
            masked = dropout_decision(rng, config.dropout_p)
            masked_text = mask_context(pair.client.text, lexicon)[0] if masked else None
            entries.append(
                PlanEntry(pair_id=pair.pair_id, weight=float(weight),
                          masked=masked, masked_text=masked_text)
            )
    return EpochPlan(seed=seed, entries=tuple(entries))


def write_plan(plan: EpochPlan, config: WeightConfig, batch_size: int, path) -> None:
    """Export a plan as JSONL: an audit header line, then one entry per pair."""
    tau = "median" if config.tau_mode == "median" else f"fixed:{config.tau_value}"
    header = {
        "seed": plan.seed,
        "generator": GENERATOR_NAME,
        "scheme": config.scheme.value,
        "gamma": config.gamma,
        "lambda": config.lam,
        "tau": tau,
        "normalize": config.normalize,
        "dropout_p": config.dropout_p,
        "batch_size": batch_size,
    }
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header) + "\n")
        for e in plan.entries:
            row: dict = {"pair_id": e.pair_id, "w": e.weight, "masked": e.masked}
            if e.masked:
                row["masked_text"] = e.masked_text
            fh.write(json.dumps(row) + "\n")
