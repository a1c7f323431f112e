"""Dialogue-pair corpus model: ingestion, validation, and dataset statistics.

The on-disk format is JSONL, one dialogue pair per line:

    {"pair_id": "s01-001", "session_id": "s01",
     "client": {"text": "...", "turn_index": 0, "timestamp_ms": 1500},
     "counsellor": {"text": "...", "turn_index": 1},
     "frame_ref": "frames/s01/0001.png",
     "vad": {"valence": 0.4, "arousal": 0.5, "dominance": 0.6},
     "incongruence": "none" | "minimizing" | "contradiction",
     "engagement": 0.55}

``timestamp_ms`` is optional. A sidecar manifest ``<corpus>.manifest.json``
may carry ``{"recorded_hours": <positive number>}``. Violation reports are
line-oriented text: ``LINE <n>: <field>: <rule>``.

Frames are referenced by opaque id only; nothing here decodes images.
Corpus objects are immutable after load and safe for concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from pathlib import Path
from typing import Optional


class CorpusError(ValueError):
    """Ingestion failure or strict-mode invariant violation."""


class Speaker(Enum):
    CLIENT = "client"
    COUNSELLOR = "counsellor"


class IncongruenceKind(Enum):
    NONE = "none"
    MINIMIZING = "minimizing"
    CONTRADICTION = "contradiction"


class EngagementBand(IntEnum):
    """Ordered so that comparisons follow LOW < MODERATE < HIGH."""

    LOW = 0
    MODERATE = 1
    HIGH = 2


@dataclass(frozen=True)
class Utterance:
    speaker: Speaker
    text: str
    turn_index: int
    timestamp_ms: Optional[int] = None


@dataclass(frozen=True)
class VadAnnotation:
    valence: float
    arousal: float
    dominance: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.valence, self.arousal, self.dominance)


@dataclass(frozen=True)
class AnnotationRecord:
    """The five annotation scalars attached to one dialogue pair.

    ``vad`` is None only on records produced by the training-export path
    (see masking.strip_vad); corpus ingestion requires it present.
    """

    vad: Optional[VadAnnotation]
    incongruence: IncongruenceKind
    engagement: float


@dataclass(frozen=True)
class DialoguePair:
    pair_id: str
    session_id: str
    client: Utterance
    counsellor: Utterance
    frame_ref: str
    annotations: AnnotationRecord


@dataclass(frozen=True)
class Corpus:
    pairs: tuple[DialoguePair, ...]
    sessions: frozenset[str]
    recorded_hours: Optional[float] = None

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class CorpusStats:
    n_pairs: int
    n_utterances: int
    n_incongruent: int
    incongruent_fraction: float
    n_annotations: int
    annotations_per_hour: Optional[float] = None


@dataclass(frozen=True)
class Violation:
    """One broken rule: which field, what we saw, which rule it breaks."""

    field: str
    value: object
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


def _in_unit(x: object) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and 0.0 <= x <= 1.0


def _check_utterance(utt: Utterance, prefix: str, expected: Speaker) -> list[Violation]:
    out = []
    if utt.speaker is not expected:
        out.append(Violation(f"{prefix}.speaker", utt.speaker, f"must be {expected.value}"))
    if not isinstance(utt.text, str) or not utt.text.strip():
        out.append(Violation(f"{prefix}.text", utt.text, "empty after trimming"))
    if not isinstance(utt.turn_index, int) or isinstance(utt.turn_index, bool) or utt.turn_index < 0:
        out.append(Violation(f"{prefix}.turn_index", utt.turn_index, "must be a non-negative integer"))
    if utt.timestamp_ms is not None and (
        not isinstance(utt.timestamp_ms, int) or isinstance(utt.timestamp_ms, bool) or utt.timestamp_ms < 0
    ):
        out.append(Violation(f"{prefix}.timestamp_ms", utt.timestamp_ms, "must be a non-negative integer"))
    return out


def validate_record(record: DialoguePair) -> list[Violation]:
    """Check every record-local invariant; empty list means the record is clean.

    Total function: never raises, reports everything it finds. Cross-record
    rules (pair_id uniqueness, turn ordering across pairs in a session) live
    in load_corpus.
    """
    out: list[Violation] = []
    if not isinstance(record.pair_id, str) or not record.pair_id:
        out.append(Violation("pair_id", record.pair_id, "must be a non-empty string"))
    if not isinstance(record.session_id, str) or not record.session_id:
        out.append(Violation("session_id", record.session_id, "must be a non-empty string"))
    out.extend(_check_utterance(record.client, "client", Speaker.CLIENT))
    out.extend(_check_utterance(record.counsellor, "counsellor", Speaker.COUNSELLOR))
    if (
        isinstance(record.client.turn_index, int)
        and isinstance(record.counsellor.turn_index, int)
        and record.counsellor.turn_index <= record.client.turn_index
    ):
        out.append(
            Violation("counsellor.turn_index", record.counsellor.turn_index, "must exceed client turn_index")
        )
    if not isinstance(record.frame_ref, str) or not record.frame_ref:
        out.append(Violation("frame_ref", record.frame_ref, "must be a non-empty reference"))

    ann = record.annotations
    if ann.vad is None:
        out.append(Violation("vad", None, "missing"))
    else:
        for name in ("valence", "arousal", "dominance"):
            val = getattr(ann.vad, name)
            if not _in_unit(val):
                out.append(Violation(f"vad.{name}", val, "out of [0,1]"))
    if not isinstance(ann.incongruence, IncongruenceKind):
        out.append(Violation("incongruence", ann.incongruence, "unknown kind"))
    if not _in_unit(ann.engagement):
        out.append(Violation("engagement", ann.engagement, "out of [0,1]"))
    return out


def engagement_band(score: float) -> EngagementBand:
    """Map a continuous engagement score onto Low/Moderate/High.

    Band edges: Low covers [0, 0.3], Moderate (0.3, 0.7], High (0.7, 1].
    The gaps the annotation bands leave open are closed at the lower band's
    upper edge so the mapping is total and monotone.
    """
    if not _in_unit(score):
        raise ValueError(f"engagement score out of [0,1]: {score!r}")
    if score <= 0.3:
        return EngagementBand.LOW
    if score <= 0.7:
        return EngagementBand.MODERATE
    return EngagementBand.HIGH


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Dataset-level counts. Fractions stay unrounded; rounding is display-only."""
    n = len(corpus.pairs)
    n_inc = sum(
        1 for p in corpus.pairs if p.annotations.incongruence is not IncongruenceKind.NONE
    )
    n_ann = 5 * n
    per_hour = None
    if corpus.recorded_hours is not None:
        per_hour = n_ann / corpus.recorded_hours
    return CorpusStats(
        n_pairs=n,
        n_utterances=2 * n,
        n_incongruent=n_inc,
        incongruent_fraction=(n_inc / n) if n else 0.0,
        n_annotations=n_ann,
        annotations_per_hour=per_hour,
    )


# --- JSONL ingestion -------------------------------------------------------

def _parse_utterance(obj: object, prefix: str, speaker: Speaker) -> Utterance:
    if not isinstance(obj, dict):
        raise CorpusError(f"{prefix}: must be an object")
    if "text" not in obj or "turn_index" not in obj:
        raise CorpusError(f"{prefix}: missing text or turn_index")
    return Utterance(
        speaker=speaker,
        text=obj["text"],
        turn_index=obj["turn_index"],
        timestamp_ms=obj.get("timestamp_ms"),
    )


def parse_pair(obj: object) -> DialoguePair:
    """Build a DialoguePair from one decoded JSONL object.

    Structural problems (missing keys, wrong shapes) raise CorpusError;
    value problems (ranges, unknown enum strings) are left in place for
    validate_record to report.
    """
    if not isinstance(obj, dict):
        raise CorpusError("record must be an object")
    missing = [k for k in ("pair_id", "session_id", "client", "counsellor", "frame_ref",
                           "incongruence", "engagement") if k not in obj]
    if missing:
        raise CorpusError(f"missing fields: {', '.join(missing)}")

    vad_obj = obj.get("vad")
    vad: Optional[VadAnnotation] = None
    if isinstance(vad_obj, dict) and all(k in vad_obj for k in ("valence", "arousal", "dominance")):
        vad = VadAnnotation(vad_obj["valence"], vad_obj["arousal"], vad_obj["dominance"])
    elif vad_obj is not None:
        raise CorpusError("vad: must be an object with valence/arousal/dominance")

    raw_kind = obj["incongruence"]
    try:
        kind = IncongruenceKind(raw_kind)
    except ValueError:
        kind = raw_kind  # flagged by validate_record as "unknown kind"

    return DialoguePair(
        pair_id=obj["pair_id"],
        session_id=obj["session_id"],
        client=_parse_utterance(obj["client"], "client", Speaker.CLIENT),
        counsellor=_parse_utterance(obj["counsellor"], "counsellor", Speaker.COUNSELLOR),
        frame_ref=obj["frame_ref"],
        annotations=AnnotationRecord(vad=vad, incongruence=kind, engagement=obj["engagement"]),
    )


def pair_to_obj(pair: DialoguePair) -> dict:
    """Inverse of parse_pair, in the corpus JSONL schema."""
    def utt(u: Utterance) -> dict:
        out = {"text": u.text, "turn_index": u.turn_index}
        if u.timestamp_ms is not None:
            out["timestamp_ms"] = u.timestamp_ms
        return out

    obj: dict = {
        "pair_id": pair.pair_id,
        "session_id": pair.session_id,
        "client": utt(pair.client),
        "counsellor": utt(pair.counsellor),
        "frame_ref": pair.frame_ref,
    }
    if pair.annotations.vad is not None:
        v = pair.annotations.vad
        obj["vad"] = {"valence": v.valence, "arousal": v.arousal, "dominance": v.dominance}
    kind = pair.annotations.incongruence
    obj["incongruence"] = kind.value if isinstance(kind, IncongruenceKind) else kind
    obj["engagement"] = pair.annotations.engagement
    return obj


def _manifest_path(path: Path) -> Path:
    return Path(str(path) + ".manifest.json")


def _read_recorded_hours(path: Path) -> Optional[float]:
    mpath = _manifest_path(path)
    if not mpath.exists():
        return None
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"manifest {mpath.name}: invalid JSON ({exc})") from exc
    hours = manifest.get("recorded_hours")
    if hours is None:
        return None
    if not isinstance(hours, (int, float)) or isinstance(hours, bool) or hours <= 0:
        raise CorpusError(f"manifest {mpath.name}: recorded_hours must be positive")
    return float(hours)


def load_corpus(path, strict: bool = True, report: Optional[list[str]] = None) -> Corpus:
    """Read a corpus JSONL file, checking every invariant.

    In strict mode (the default) the first violation aborts with CorpusError.
    In lenient mode violating records are dropped; if ``report`` is given,
    one ``LINE <n>: <field>: <rule>`` entry per drop is appended to it.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")

    def problem(lineno: int, field: str, rule: str) -> None:
        line = f"LINE {lineno}: {field}: {rule}"
        if strict:
            raise CorpusError(line)
        if report is not None:
            report.append(line)

    pairs: list[DialoguePair] = []
    seen_ids: set[str] = set()
    last_turn: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                problem(lineno, "json", f"malformed line ({exc.msg})")
                continue
            try:
                pair = parse_pair(obj)
            except CorpusError as exc:
                problem(lineno, "record", str(exc))
                continue

            violations = validate_record(pair)
            if violations:
                for v in violations:
                    problem(lineno, v.field, v.rule)
                continue
            if pair.pair_id in seen_ids:
                problem(lineno, "pair_id", f"duplicate id {pair.pair_id!r}")
                continue
            prev = last_turn.get(pair.session_id)
            if prev is not None and pair.client.turn_index <= prev:
                problem(lineno, "client.turn_index", "must increase within session")
                continue
            seen_ids.add(pair.pair_id)
            last_turn[pair.session_id] = pair.counsellor.turn_index
            pairs.append(pair)

    return Corpus(
        pairs=tuple(pairs),
        sessions=frozenset(p.session_id for p in pairs),
        recorded_hours=_read_recorded_hours(path),
    )


def write_corpus(corpus: Corpus, path) -> None:
    """Serialize back to JSONL (plus sidecar manifest when hours are known).

    load_corpus(write_corpus(c)) reproduces c structurally.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for pair in corpus.pairs:
            fh.write(json.dumps(pair_to_obj(pair)) + "\n")
    if corpus.recorded_hours is not None:
        _manifest_path(path).write_text(
            json.dumps({"recorded_hours": corpus.recorded_hours}) + "\n", encoding="utf-8"
        )
