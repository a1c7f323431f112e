"""Batch command-line surface: validate, stats, weights, plan, mask, score,
compare, agreement.

Configuration comes from an optional flat-key JSON file (--config) with
flags taking precedence; the ETHER_LEXICONS environment variable is the
fallback for --lexicons. All randomness flows through --seed. Every command
writes its artifacts under --out together with a manifest recording the
resolved configuration, its hash, and the toolkit version, and re-running
with identical inputs rewrites byte-identical artifacts.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 corpus
validation failure, 5 alignment error (ids or vectors that should match do
not).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import __version__
from .corpus import CorpusError, corpus_stats, load_corpus
from .embeddings import VectorStoreError, load_vectors
from .incongruence import (
    ConfigError,
    Scheme,
    SignalsError,
    WeightConfig,
    read_signals,
    weigh_batch,
    write_weights,
)
from .masking import load_mask_lexicon, mask_context, plan_epoch, write_plan
from .metrics import (
    LexiconError,
    ResponsesError,
    load_marker_lexicons,
    read_responses,
    score_corpus,
    write_score_summary,
    write_scores_csv,
)
from .stats import (
    AlignmentError,
    agreement_report,
    comparison_report,
    fmt_fraction_pct,
    render_agreement_text,
    render_comparison_text,
    write_agreement_csv,
    write_comparison_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_ALIGNMENT = 5

LEXICONS_ENV = "ETHER_LEXICONS"

# Metrics carried into comparison tables (sub-components stay in the CSVs).
_COMPARE_METRICS = (
    "empathic_authenticity",
    "responsive_engagement",
    "therapeutic_concision",
    "rogers_empathic_understanding",
    "rogers_positive_regard",
    "rogers_congruence",
    "rogers_core_mean",
    "pct_adherence",
    "question_density",
    "semantic_precision",
    "semantic_recall",
    "semantic_f1",
)


@dataclass
class RunConfig:
    corpus: Optional[str] = None
    signals: Optional[str] = None
    responses: dict = field(default_factory=dict)
    vectors: Optional[str] = None
    lexicons: Optional[str] = None
    labels_a: Optional[str] = None
    labels_b: Optional[str] = None
    scheme: str = "continuous"
    gamma: float = 1.0
    lam: float = 0.5
    tau: str = "median"
    normalize: bool = False
    invert_engagement: bool = False
    dropout_p: float = 0.3
    seed: Optional[int] = None
    batch_size: Optional[int] = None
    baseline: Optional[str] = None
    out: str = "out"
    strict: bool = True

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _parse_tau(tau: str) -> tuple[str, Optional[float]]:
    if tau == "median":
        return "median", None
    if tau.startswith("fixed:"):
        try:
            return "fixed", float(tau.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad --tau value: {tau!r}") from None
    raise ConfigError(f"--tau must be 'median' or 'fixed:<x>', got {tau!r}")


def weight_config(config: RunConfig) -> WeightConfig:
    try:
        scheme = Scheme(config.scheme)
    except ValueError:
        raise ConfigError(f"unknown scheme {config.scheme!r}") from None
    tau_mode, tau_value = _parse_tau(config.tau)
    wc = WeightConfig(
        scheme=scheme,
        tau_mode=tau_mode,
        tau_value=tau_value,
        lam=config.lam,
        gamma=config.gamma,
        normalize=config.normalize,
        dropout_p=config.dropout_p,
        invert_engagement=config.invert_engagement,
    )
    wc.validate()
    return wc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="congruity",
        description="Corpus validation, incongruence weighting, masking plans, "
                    "response scoring, and comparison reports.",
    )
    parser.add_argument("command", choices=[
        "validate", "stats", "weights", "plan", "mask", "score", "compare", "agreement",
    ])
    parser.add_argument("--config", help="JSON config file with flat RunConfig keys")
    parser.add_argument("--corpus", help="corpus JSONL path")
    parser.add_argument("--signals", help="per-pair signals JSONL path")
    parser.add_argument("--responses", action="append", default=None, metavar="NAME=PATH",
                        help="responses JSONL per system; repeatable")
    parser.add_argument("--vectors", help="word-vector text file")
    parser.add_argument("--lexicons", help=f"lexicons JSON (fallback: ${LEXICONS_ENV})")
    parser.add_argument("--labels-a", help="annotator A labels JSONL (agreement)")
    parser.add_argument("--labels-b", help="annotator B labels JSONL (agreement)")
    parser.add_argument("--scheme", choices=[s.value for s in Scheme])
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--tau", help="'median' or 'fixed:<x>'")
    parser.add_argument("--normalize", action="store_true", default=None)
    parser.add_argument("--invert-engagement", action="store_true", default=None)
    parser.add_argument("--dropout-p", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--baseline", help="baseline system name for compare")
    parser.add_argument("--out", help="output directory (default: out)")
    strictness = parser.add_mutually_exclusive_group()
    strictness.add_argument("--strict", dest="strict", action="store_true", default=None)
    strictness.add_argument("--lenient", dest="strict", action="store_false")
    return parser


def _parse_responses(items) -> dict:
    out = {}
    for item in items:
        if "=" in item:
            name, path = item.split("=", 1)
        else:
            name, path = Path(item).stem, item
        if not name or not path:
            raise ConfigError(f"bad --responses entry: {item!r}")
        if name in out:
            raise ConfigError(f"duplicate responses system name: {name!r}")
        out[name] = path
    return out


def resolve_config(args: argparse.Namespace, env: Optional[dict] = None) -> RunConfig:
    """Layer config file under flags, then apply environment fallbacks."""
    env = env if env is not None else dict(__import__("os").environ)
    config = RunConfig()
    if args.config:
        try:
            file_obj = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file: invalid JSON ({exc})") from exc
        known = {f.name for f in fields(RunConfig)} | {"lambda"}
        for key, value in file_obj.items():
            if key not in known:
                raise ConfigError(f"config file: unknown key {key!r}")
            setattr(config, "lam" if key == "lambda" else key, value)
    if isinstance(config.responses, list):
        config.responses = _parse_responses(config.responses)
    for name in ("corpus", "signals", "vectors", "lexicons", "labels_a", "labels_b",
                 "scheme", "gamma", "lam", "tau", "normalize", "invert_engagement",
                 "dropout_p", "seed", "batch_size", "baseline", "out", "strict"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if args.responses:
        config.responses = _parse_responses(args.responses)
    if config.lexicons is None and env.get(LEXICONS_ENV):
        config.lexicons = env[LEXICONS_ENV]
    return config


def _require(config: RunConfig, *names: str) -> None:
    for name in names:
        if not getattr(config, name):
            flag = "--" + name.replace("_", "-")
            raise ConfigError(f"{flag} is required for this command")
    for name in names:
        value = getattr(config, name)
        if name in ("corpus", "signals", "vectors", "lexicons", "labels_a", "labels_b"):
            if not Path(value).exists():
                raise ConfigError(f"--{name.replace('_', '-')}: no such file: {value}")
        if name == "responses":
            for sys_name, path in value.items():
                if not Path(path).exists():
                    raise ConfigError(f"--responses {sys_name}: no such file: {path}")


def _outdir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, config: RunConfig) -> None:
    resolved = config.as_dict()
    digest = hashlib.sha256(
        json.dumps(resolved, sort_keys=True).encode("utf-8")
    ).hexdigest()
    manifest = {
        "command": command,
        "version": __version__,
        "config": resolved,
        "config_sha256": digest,
    }
    with (out / "manifest.json").open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_store(config: RunConfig):
    return load_vectors(config.vectors) if config.vectors else None


# --- commands ----------------------------------------------------------------

def cmd_validate(config: RunConfig) -> int:
    _require(config, "corpus")
    out = _outdir(config)
    report: list[str] = []
    load_corpus(config.corpus, strict=False, report=report)
    with (out / "violations.txt").open("w", encoding="utf-8", newline="\n") as fh:
        for line in report:
            fh.write(line + "\n")
    _write_manifest(out, "validate", config)
    if report:
        print(f"{len(report)} violation(s); see {out / 'violations.txt'}")
        return EXIT_VALIDATION
    print("corpus clean")
    return EXIT_OK


def cmd_stats(config: RunConfig) -> int:
    _require(config, "corpus")
    out = _outdir(config)
    corpus = load_corpus(config.corpus, strict=config.strict)
    stats = corpus_stats(corpus)
    payload = {
        "n_pairs": stats.n_pairs,
        "n_utterances": stats.n_utterances,
        "n_incongruent": stats.n_incongruent,
        "incongruent_fraction": stats.incongruent_fraction,
        "n_annotations": stats.n_annotations,
        "annotations_per_hour": stats.annotations_per_hour,
        "n_sessions": len(corpus.sessions),
    }
    with (out / "corpus_stats.json").open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "stats", config)
    print(f"{stats.n_pairs} pairs, {stats.n_incongruent} incongruent "
          f"({fmt_fraction_pct(stats.incongruent_fraction)}%)")
    return EXIT_OK


def _batches(n: int, batch_size: Optional[int]):
    size = batch_size if batch_size and batch_size > 0 else n
    for start in range(0, n, size):
        yield start, min(start + size, n)


def cmd_weights(config: RunConfig) -> int:
    _require(config, "corpus", "signals")
    out = _outdir(config)
    corpus = load_corpus(config.corpus, strict=config.strict)
    signals = read_signals(config.signals)
    missing = [p.pair_id for p in corpus.pairs if p.pair_id not in signals]
    if missing:
        raise AlignmentError(f"signals missing for pairs: {', '.join(missing[:5])}")
    wc = weight_config(config)
    pair_ids = [p.pair_id for p in corpus.pairs]
    rows: list[tuple[str, float, float]] = []
    for start, stop in _batches(len(pair_ids), config.batch_size):
        chunk = pair_ids[start:stop]
        weighted = weigh_batch([signals[pid] for pid in chunk], wc)
        rows.extend(zip(chunk, weighted.scores, weighted.weights))
    with (out / "weights.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for pid, s, w in rows:
            fh.write(json.dumps({"pair_id": pid, "s": float(s), "w": float(w)}) + "\n")
    _write_manifest(out, "weights", config)
    print(f"wrote weights for {len(rows)} pairs")
    return EXIT_OK


def cmd_plan(config: RunConfig) -> int:
    _require(config, "corpus", "signals")
    if config.seed is None:
        raise ConfigError("--seed is required for plan")
    if not config.batch_size or config.batch_size < 1:
        raise ConfigError("--batch-size (>= 1) is required for plan")
    out = _outdir(config)
    corpus = load_corpus(config.corpus, strict=config.strict)
    signals = read_signals(config.signals)
    lexicon = load_mask_lexicon(config.lexicons)
    wc = weight_config(config)
    try:
        plan = plan_epoch(corpus, signals, wc, lexicon, config.seed, config.batch_size)
    except SignalsError as exc:
        raise AlignmentError(str(exc)) from exc
    write_plan(plan, wc, config.batch_size, out / "plan.jsonl")
    _write_manifest(out, "plan", config)
    masked = sum(1 for e in plan.entries if e.masked)
    print(f"planned {len(plan.entries)} entries, {masked} masked")
    return EXIT_OK


def cmd_mask(config: RunConfig) -> int:
    _require(config, "corpus")
    out = _outdir(config)
    corpus = load_corpus(config.corpus, strict=config.strict)
    lexicon = load_mask_lexicon(config.lexicons)
    with (out / "masked.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for pair in corpus.pairs:
            masked_text, n_masked = mask_context(pair.client.text, lexicon)
            fh.write(json.dumps({
                "pair_id": pair.pair_id,
                "masked_text": masked_text,
                "n_masked": n_masked,
            }) + "\n")
    _write_manifest(out, "mask", config)
    print(f"masked preview for {len(corpus.pairs)} pairs")
    return EXIT_OK


def _score_systems(config: RunConfig):
    corpus = load_corpus(config.corpus, strict=config.strict)
    lex = load_marker_lexicons(config.lexicons)
    store = _load_store(config)
    results = {}
    for name, path in config.responses.items():
        responses = read_responses(path)
        try:
            results[name] = score_corpus(responses, corpus, lex, store)
        except ResponsesError as exc:
            raise AlignmentError(f"system {name!r}: {exc}") from exc
    return results


def cmd_score(config: RunConfig) -> int:
    _require(config, "corpus", "responses")
    out = _outdir(config)
    for name, scores in _score_systems(config).items():
        write_scores_csv(scores, out / f"{name}_scores.csv")
        write_score_summary(scores, out / f"{name}_summary.json")
        note = f", {len(scores.missing)} missing" if scores.missing else ""
        print(f"{name}: scored {len(scores.pair_ids)} pairs{note}")
    _write_manifest(out, "score", config)
    return EXIT_OK


def cmd_compare(config: RunConfig) -> int:
    _require(config, "corpus", "responses")
    out = _outdir(config)
    results = _score_systems(config)
    baseline = config.baseline or next(iter(results))
    if baseline not in results:
        raise ConfigError(f"--baseline {baseline!r} is not a scored system")
    covered = {name: scores.pair_ids for name, scores in results.items()}
    base_ids = covered[baseline]
    for name, ids in covered.items():
        if ids != base_ids:
            raise AlignmentError(f"system {name!r} covers different pairs than {baseline!r}")
    scores_by_system = {
        name: {m: scores.columns[m] for m in _COMPARE_METRICS if m in scores.columns}
        for name, scores in results.items()
    }
    rows = comparison_report(scores_by_system, baseline)
    write_comparison_csv(rows, out / "comparison.csv")
    with (out / "comparison.txt").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_comparison_text(rows))
    _write_manifest(out, "compare", config)
    print(f"compared {len(results)} system(s) against {baseline!r}")
    return EXIT_OK


def _read_labels(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"LINE {lineno}: json: malformed line ({exc.msg})") from exc
            if "pair_id" not in obj or "incongruence" not in obj:
                raise CorpusError(f"LINE {lineno}: record: needs pair_id and incongruence")
            out[obj["pair_id"]] = obj["incongruence"]
    return out


def cmd_agreement(config: RunConfig) -> int:
    _require(config, "labels_a", "labels_b")
    out = _outdir(config)
    a = _read_labels(config.labels_a)
    b = _read_labels(config.labels_b)
    if set(a) != set(b):
        only_a = sorted(set(a) - set(b))[:5]
        only_b = sorted(set(b) - set(a))[:5]
        raise AlignmentError(f"label files cover different pairs (a-only {only_a}, b-only {only_b})")
    order = list(a)
    rows = agreement_report([a[k] for k in order], [b[k] for k in order])
    write_agreement_csv(rows, out / "agreement.csv")
    with (out / "agreement.txt").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_agreement_text(rows))
    _write_manifest(out, "agreement", config)
    for row in rows:
        print(f"{row.measure}: {row.agreement_pct:.1f}% agreement, kappa {row.kappa:.2f}")
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "weights": cmd_weights,
    "plan": cmd_plan,
    "mask": cmd_mask,
    "score": cmd_score,
    "compare": cmd_compare,
    "agreement": cmd_agreement,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return _COMMANDS[args.command](config)
    except (ConfigError, LexiconError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CorpusError,) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (AlignmentError, SignalsError, ResponsesError) as exc:
        print(f"alignment error: {exc}", file=sys.stderr)
        return EXIT_ALIGNMENT
    except (OSError, VectorStoreError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
