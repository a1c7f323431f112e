"""Person-centered evaluation metrics over counsellor-style responses.

Every metric is marker-lexicon arithmetic on the shared tokenizer, with an
optional static-embedding channel when a vector store is supplied. All
values and sub-components lie in [0,1]; the x100 display scale is applied
only when reports are rendered. The scoring formulas are fixed here and
pinned by golden tests:

  empathic authenticity   0.5*sat2(ack) + 0.5*(1 - sat2(performative))
  responsive engagement   0.5*sat2(situational) + 0.5*mirror
  therapeutic concision   0.4*sat2(clarity) + 0.4*sat2(purpose) + 0.2*brevity
  adherence composite     mean(core-conditions mean, authenticity, concision)

where sat2(n) = min(1, n/2) and brevity falls linearly from 1 at <=10
tokens to 0 at >=60. The semantic scorer is greedy best-cosine token
matching with static vectors - a deliberately lightweight stand-in for
contextual-embedding matchers, not an equivalent.

Marker lexicons ship as editable JSON (data/default_lexicons.json); their
content is part of the versioned contract. Scorers are pure functions and
parallelize per pair over shared read-only lexicons and stores.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus
from .embeddings import VectorStore, cosine, embed_text, tokenize

# Function words excluded from the lexical-mirroring overlap. Includes the
# single-letter fragments the tokenizer produces from contractions.
STOPWORDS = frozenset("""
a an the and or but if then so to of in on at for with from by as is are was
were be been being am do does did done have has had i you he she it we they
me him her us them my your his its our their mine yours this that these those
there here what which who whom how when where why not no yes will would can
could should shall may might must about into over under again very just than
too also up down out off own only so such more most some any each both s t m
re ve ll d don didn isn aren wasn weren won wouldn couldn shouldn
""".split())

_SENTENCE = re.compile(r"([^.!?]+)([.!?]*)")


class LexiconError(ValueError):
    """Malformed or empty marker lexicons."""


@dataclass(frozen=True)
class MarkerLexicons:
    """Marker phrase sets, pre-tokenized for exact subsequence matching."""

    acknowledgment: tuple[tuple[str, ...], ...]
    performative: tuple[tuple[str, ...], ...]
    situational: tuple[tuple[str, ...], ...]
    clarity: tuple[tuple[str, ...], ...]
    purpose: tuple[tuple[str, ...], ...]
    empathy: tuple[tuple[str, ...], ...]
    curiosity: tuple[tuple[str, ...], ...]
    acceptance: tuple[tuple[str, ...], ...]
    directive: tuple[tuple[str, ...], ...]
    authenticity: tuple[tuple[str, ...], ...]
    congruence_concepts: tuple[str, ...]


@dataclass(frozen=True)
class MetricScore:
    """A metric value with its reproducible sub-scores and raw marker counts."""

    value: float
    components: dict[str, float]
    marker_hits: dict[str, int]


@dataclass(frozen=True)
class RogersScores:
    empathic_understanding: float
    positive_regard: float
    congruence: float
    mean: float


@dataclass(frozen=True)
class SemanticPRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class CorpusScores:
    """Aligned per-pair metric vectors plus the uncovered pair ids."""

    pair_ids: tuple[str, ...]
    columns: dict[str, np.ndarray]
    missing: tuple[str, ...]


def _tokenize_phrases(phrases: Sequence[str], name: str) -> tuple[tuple[str, ...], ...]:
    out = []
    for phrase in phrases:
        toks = tuple(tokenize(phrase))
        if not toks:
            raise LexiconError(f"{name}: phrase {phrase!r} has no tokens")
        out.append(toks)
    if not out:
        raise LexiconError(f"{name}: marker set must be non-empty")
    return tuple(out)


def load_marker_lexicons(path=None) -> MarkerLexicons:
    """Read the "markers" section of a lexicons JSON file (defaults when None)."""
    if path is None:
        raw = resources.files("congruity").joinpath("data/default_lexicons.json").read_text("utf-8")
        obj = json.loads(raw)
    else:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    section = obj.get("markers")
    if not isinstance(section, dict):
        raise LexiconError("lexicons file must contain a 'markers' object")
    kwargs = {}
    for f in fields(MarkerLexicons):
        if f.name not in section:
            raise LexiconError(f"markers section missing {f.name!r}")
        if f.name == "congruence_concepts":
            concepts = tuple(str(w).lower() for w in section[f.name])
            if not concepts:
                raise LexiconError("congruence_concepts must be non-empty")
            kwargs[f.name] = concepts
        else:
            kwargs[f.name] = _tokenize_phrases(section[f.name], f.name)
    return MarkerLexicons(**kwargs)


def count_hits(tokens: Sequence[str], phrases: Sequence[Sequence[str]]) -> int:
    """Count exact token-subsequence occurrences of any phrase (overlaps allowed)."""
    total = 0
    n = len(tokens)
    for phrase in phrases:
        k = len(phrase)
        if k == 0 or k > n:
            continue
        target = tuple(phrase)
        for start in range(n - k + 1):
            if tuple(tokens[start:start + k]) == target:
                total += 1
    return total


def _sat2(n: int) -> float:
    return min(1.0, n / 2.0)


def empathic_authenticity(response: str, lex: MarkerLexicons) -> MetricScore:
    """Natural-acknowledgment credit minus a saturating performative penalty.

    With no evidence either way (empty text) the score sits at 0.5.
    """
    tokens = tokenize(response)
    n_ack = count_hits(tokens, lex.acknowledgment)
    n_perf = count_hits(tokens, lex.performative)
    ack = _sat2(n_ack)
    restraint = 1.0 - _sat2(n_perf)
    return MetricScore(
        value=0.5 * ack + 0.5 * restraint,
        components={"acknowledgment": ack, "restraint": restraint},
        marker_hits={"acknowledgment": n_ack, "performative": n_perf},
    )


def _content_tokens(tokens: Sequence[str]) -> set[str]:
    return {t for t in tokens if t not in STOPWORDS}


def _mirror(response: str, client_text: str, store: Optional[VectorStore]) -> float:
    if store is not None:
        return max(0.0, cosine(embed_text(client_text, store).vector,
                               embed_text(response, store).vector))
    a = _content_tokens(tokenize(client_text))
    b = _content_tokens(tokenize(response))
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def responsive_engagement(
    response: str,
    client_text: str,
    lex: MarkerLexicons,
    store: Optional[VectorStore] = None,
) -> MetricScore:
    """Situational-responsiveness markers plus client-language mirroring.

    Mirroring is embedding cosine when a store is available, otherwise
    content-word Jaccard overlap.
    """
    tokens = tokenize(response)
    n_sit = count_hits(tokens, lex.situational)
    sit = _sat2(n_sit)
    mirror = _mirror(response, client_text, store)
    return MetricScore(
        value=0.5 * sit + 0.5 * mirror,
        components={"situational": sit, "mirror": mirror},
        marker_hits={"situational": n_sit},
    )


def therapeutic_concision(response: str, lex: MarkerLexicons) -> MetricScore:
    """Clarity and purpose markers plus a brevity term over the 10-60 token window."""
    tokens = tokenize(response)
    n_clarity = count_hits(tokens, lex.clarity)
    n_purpose = count_hits(tokens, lex.purpose)
    clarity = _sat2(n_clarity)
    purpose = _sat2(n_purpose)
    brevity = min(1.0, max(0.0, (60.0 - len(tokens)) / 50.0))
    return MetricScore(
        value=0.4 * clarity + 0.4 * purpose + 0.2 * brevity,
        components={"clarity": clarity, "purpose": purpose, "brevity": brevity},
        marker_hits={"clarity": n_clarity, "purpose": n_purpose},
    )


def rogers_conditions(
    response: str,
    lex: MarkerLexicons,
    store: Optional[VectorStore] = None,
) -> RogersScores:
    """Score the three core therapeutic conditions.

    empathic understanding: empathy + curiosity markers, saturating at 3.
    positive regard: acceptance markers with a judgment penalty for
    directive language, clamped to [0,1].
    congruence: authenticity markers, blended 50/50 with similarity to the
    concept-word embedding when a store is available.
    """
    tokens = tokenize(response)
    n_emp = count_hits(tokens, lex.empathy)
    n_cur = count_hits(tokens, lex.curiosity)
    n_acc = count_hits(tokens, lex.acceptance)
    n_dir = count_hits(tokens, lex.directive)
    n_auth = count_hits(tokens, lex.authenticity)

    understanding = min(1.0, (n_emp + n_cur) / 3.0)
    regard = min(1.0, max(0.0, _sat2(n_acc) - 0.5 * min(1.0, n_dir)))
    if store is not None:
        concept_vec = embed_text(" ".join(lex.congruence_concepts), store).vector
        concept_sim = max(0.0, cosine(embed_text(response, store).vector, concept_vec))
        congruence = 0.5 * _sat2(n_auth) + 0.5 * concept_sim
    else:
        congruence = _sat2(n_auth)
    return RogersScores(
        empathic_understanding=understanding,
        positive_regard=regard,
        congruence=congruence,
        mean=(understanding + regard + congruence) / 3.0,
    )


def pct_adherence(
    response: str,
    client_text: str,
    lex: MarkerLexicons,
    store: Optional[VectorStore] = None,
) -> MetricScore:
    """Composite adherence: mean of core-conditions mean, authenticity, concision."""
    rogers = rogers_conditions(response, lex, store)
    auth = empathic_authenticity(response, lex)
    concision = therapeutic_concision(response, lex)
    return MetricScore(
        value=(rogers.mean + auth.value + concision.value) / 3.0,
        components={
            "rogers_core_mean": rogers.mean,
            "authenticity": auth.value,
            "concision": concision.value,
        },
        marker_hits={},
    )


def _token_vectors(tokens: Sequence[str], store: VectorStore) -> list[Optional[np.ndarray]]:
    return [store.table.get(t) for t in tokens]


def semantic_prf(candidate: str, reference: str, store: VectorStore) -> SemanticPRF:
    """Greedy best-cosine token matching with static vectors.

    precision averages, over candidate tokens, the best cosine against any
    reference token (and symmetrically for recall); cosines are clamped to
    [0,1] and out-of-vocabulary tokens contribute 0. Identical tokens match
    at exactly 1.0.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return SemanticPRF(0.0, 0.0, 0.0)
    cand_vecs = _token_vectors(cand, store)
    ref_vecs = _token_vectors(ref, store)

    def best(token: str, vec: Optional[np.ndarray],
             others: Sequence[str], other_vecs: Sequence[Optional[np.ndarray]]) -> float:
        if vec is None:
            return 0.0
        score = 0.0
        for tok, ov in zip(others, other_vecs):
            if ov is None:
                continue
            sim = 1.0 if tok == token else min(1.0, max(0.0, float(np.dot(vec, ov))))
            if sim > score:
                score = sim
        return score

    precision = float(np.mean([best(t, v, ref, ref_vecs) for t, v in zip(cand, cand_vecs)]))
    recall = float(np.mean([best(t, v, cand, cand_vecs) for t, v in zip(ref, ref_vecs)]))
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return SemanticPRF(precision, recall, f1)


def question_density(response: str) -> MetricScore:
    """Fraction of sentences that are questions, capped at 1.

    Sentences split on terminal punctuation runs; a trailing unterminated
    chunk still counts as a sentence. A sentence is a question when its
    terminator run contains '?'.
    """
    sentences = 0
    questions = 0
    for m in _SENTENCE.finditer(response):
        if not m.group(1).strip():
            continue
        sentences += 1
        if "?" in m.group(2):
            questions += 1
    value = min(1.0, questions / max(1, sentences))
    return MetricScore(
        value=value,
        components={},
        marker_hits={"questions": questions, "sentences": sentences},
    )


# --- corpus-level scoring ----------------------------------------------------

METRIC_COLUMNS = (
    "empathic_authenticity",
    "responsive_engagement",
    "therapeutic_concision",
    "rogers_empathic_understanding",
    "rogers_positive_regard",
    "rogers_congruence",
    "rogers_core_mean",
    "pct_adherence",
    "question_density",
)

COMPONENT_COLUMNS = (
    "ea_acknowledgment",
    "ea_restraint",
    "re_situational",
    "re_mirror",
    "tc_clarity",
    "tc_purpose",
    "tc_brevity",
)

SEMANTIC_COLUMNS = ("semantic_precision", "semantic_recall", "semantic_f1")


class ResponsesError(ValueError):
    """Responses file problems, including ids not present in the corpus."""


def read_responses(path) -> dict[str, str]:
    """Read a {"pair_id", "response"} JSONL file into an ordered map."""
    out: dict[str, str] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ResponsesError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            if "pair_id" not in obj or "response" not in obj:
                raise ResponsesError(f"line {lineno}: needs pair_id and response")
            if obj["pair_id"] in out:
                raise ResponsesError(f"line {lineno}: duplicate pair_id {obj['pair_id']!r}")
            out[obj["pair_id"]] = obj["response"]
    return out


def score_response(
    response: str,
    client_text: str,
    lex: MarkerLexicons,
    store: Optional[VectorStore] = None,
    reference: Optional[str] = None,
) -> dict[str, float]:
    """All metric and component values for one response, keyed by column name."""
    ea = empathic_authenticity(response, lex)
    re_ = responsive_engagement(response, client_text, lex, store)
    tc = therapeutic_concision(response, lex)
    rogers = rogers_conditions(response, lex, store)
    pct = pct_adherence(response, client_text, lex, store)
    qd = question_density(response)
    row = {
        "empathic_authenticity": ea.value,
        "responsive_engagement": re_.value,
        "therapeutic_concision": tc.value,
        "rogers_empathic_understanding": rogers.empathic_understanding,
        "rogers_positive_regard": rogers.positive_regard,
        "rogers_congruence": rogers.congruence,
        "rogers_core_mean": rogers.mean,
        "pct_adherence": pct.value,
        "question_density": qd.value,
        "ea_acknowledgment": ea.components["acknowledgment"],
        "ea_restraint": ea.components["restraint"],
        "re_situational": re_.components["situational"],
        "re_mirror": re_.components["mirror"],
        "tc_clarity": tc.components["clarity"],
        "tc_purpose": tc.components["purpose"],
        "tc_brevity": tc.components["brevity"],
    }
    if store is not None and reference is not None:
        prf = semantic_prf(response, reference, store)
        row["semantic_precision"] = prf.precision
        row["semantic_recall"] = prf.recall
        row["semantic_f1"] = prf.f1
    return row


def score_corpus(
    responses: Mapping[str, str],
    corpus: Corpus,
    lex: MarkerLexicons,
    store: Optional[VectorStore] = None,
) -> CorpusScores:
    """Score every covered pair against its client utterance.

    Corpus pairs without a response are reported in ``missing`` and not
    scored; response ids that do not occur in the corpus are an error.
    When a store is present, semantic precision/recall/F1 against the
    corpus counsellor turn are included.
    """
    known = {p.pair_id for p in corpus.pairs}
    unknown = [pid for pid in responses if pid not in known]
    if unknown:
        raise ResponsesError(f"responses reference unknown pair ids: {', '.join(unknown[:5])}")

    columns = list(METRIC_COLUMNS) + list(COMPONENT_COLUMNS)
    if store is not None:
        columns += list(SEMANTIC_COLUMNS)
    rows: dict[str, list[float]] = {c: [] for c in columns}
    covered: list[str] = []
    missing: list[str] = []
    for pair in corpus.pairs:
        if pair.pair_id not in responses:
            missing.append(pair.pair_id)
            continue
        row = score_response(
            responses[pair.pair_id],
            pair.client.text,
            lex,
            store,
            reference=pair.counsellor.text if store is not None else None,
        )
        covered.append(pair.pair_id)
        for c in columns:
            rows[c].append(row[c])
    return CorpusScores(
        pair_ids=tuple(covered),
        columns={c: np.asarray(v, dtype=np.float64) for c, v in rows.items()},
        missing=tuple(missing),
    )


def write_scores_csv(scores: CorpusScores, path) -> None:
    """One row per scored pair, one column per metric and sub-component."""
    cols = list(scores.columns)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pair_id"] + cols)
        for i, pid in enumerate(scores.pair_ids):
            writer.writerow([pid] + [repr(float(scores.columns[c][i])) for c in cols])


def write_score_summary(scores: CorpusScores, path) -> None:
    """Per-metric mean/sd summary as JSON (sample sd, n-1 denominator)."""
    summary = {}
    for col, values in scores.columns.items():
        n = int(values.size)
        entry: dict = {"n": n}
        if n:
            entry["mean"] = float(values.mean())
            entry["sd"] = float(values.std(ddof=1)) if n >= 2 else None
        summary[col] = entry
    payload = {"metrics": summary, "missing": list(scores.missing)}
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
