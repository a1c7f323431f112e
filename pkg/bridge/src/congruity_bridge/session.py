"""Session construction and the two binding calls."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from congruity.embeddings import VectorStore, load_vectors
from congruity.incongruence import (
    SampleSignals,
    Scheme,
    WeightConfig,
    weigh_batch,
)
from congruity.metrics import MarkerLexicons, load_marker_lexicons, score_response

_WEIGHT_KEYS = ("scheme", "gamma", "lambda", "tau", "normalize",
                "invert_engagement", "dropout_p", "lexicons", "vectors")


@dataclass(frozen=True)
class BridgeSession:
    """Immutable handle: weighting config + lexicons + optional vector store."""

    weight_config: WeightConfig
    markers: MarkerLexicons
    store: Optional[VectorStore]

    def weigh(self, *args, **kwargs):
        return weigh(self, *args, **kwargs)

    def score(self, *args, **kwargs):
        return score(self, *args, **kwargs)


def _parse_tau(tau: str) -> tuple[str, Optional[float]]:
    if tau == "median":
        return "median", None
    if isinstance(tau, str) and tau.startswith("fixed:"):
        return "fixed", float(tau.split(":", 1)[1])
    raise ValueError(f"tau must be 'median' or 'fixed:<x>', got {tau!r}")


def open_session(config_path) -> BridgeSession:
    """Build a session from a flat-key JSON run configuration.

    Recognized keys: scheme, gamma, lambda, tau, normalize,
    invert_engagement, dropout_p, lexicons, vectors. Unknown keys are
    rejected so typos fail loudly.
    """
    obj = json.loads(Path(config_path).read_text(encoding="utf-8"))
    unknown = [k for k in obj if k not in _WEIGHT_KEYS]
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    tau_mode, tau_value = _parse_tau(obj.get("tau", "median"))
    config = WeightConfig(
        scheme=Scheme(obj.get("scheme", "continuous")),
        tau_mode=tau_mode,
        tau_value=tau_value,
        lam=float(obj.get("lambda", 0.5)),
        gamma=float(obj.get("gamma", 1.0)),
        normalize=bool(obj.get("normalize", False)),
        dropout_p=float(obj.get("dropout_p", 0.3)),
        invert_engagement=bool(obj.get("invert_engagement", False)),
    )
    config.validate()
    markers = load_marker_lexicons(obj.get("lexicons"))
    store = load_vectors(obj["vectors"]) if obj.get("vectors") else None
    return BridgeSession(weight_config=config, markers=markers, store=store)


def weigh(
    session: BridgeSession,
    vad_visual,
    vad_textual,
    z_visual,
    z_textual,
    incongruence_flag=None,
    engagement=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch weights from flat arrays; returns (scores, weights).

    Shapes: vad arrays (n, 3), z arrays (n, d), optional flag/engagement
    arrays (n,). Values are identical to the batch tool on the same inputs.
    """
    vv = np.ascontiguousarray(vad_visual, dtype=np.float64)
    vt = np.ascontiguousarray(vad_textual, dtype=np.float64)
    zv = np.ascontiguousarray(z_visual, dtype=np.float64)
    zt = np.ascontiguousarray(z_textual, dtype=np.float64)
    if vv.ndim != 2 or vv.shape[1] != 3 or vt.shape != vv.shape:
        raise ValueError(f"vad arrays must both be (n, 3), got {vv.shape} and {vt.shape}")
    n = vv.shape[0]
    if zv.ndim != 2 or zv.shape[0] != n or zt.shape != zv.shape:
        raise ValueError(f"z arrays must both be ({n}, d), got {zv.shape} and {zt.shape}")
    flags = None if incongruence_flag is None else np.asarray(incongruence_flag)
    engagements = None if engagement is None else np.asarray(engagement, dtype=np.float64)
    for name, arr in (("incongruence_flag", flags), ("engagement", engagements)):
        if arr is not None and arr.shape != (n,):
            raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")

    batch = [
        SampleSignals(
            vad_visual=tuple(vv[i]),
            vad_textual=tuple(vt[i]),
            z_visual=zv[i],
            z_textual=zt[i],
            incongruence_flag=None if flags is None else int(flags[i]),
            engagement=None if engagements is None else float(engagements[i]),
        )
        for i in range(n)
    ]
    weighted = weigh_batch(batch, session.weight_config)
    return weighted.scores, weighted.weights


def score(
    session: BridgeSession,
    client_text: str,
    response_text: str,
    reference_text: Optional[str] = None,
) -> dict[str, float]:
    """Metric vector for one response, identical to the batch scorer.

    With a vector store in the session and a reference_text given, semantic
    precision/recall/F1 against the reference are included, matching the
    batch scorer's use of the recorded counsellor turn as reference.
    """
    return score_response(
        response_text,
        client_text,
        session.markers,
        session.store,
        reference=reference_text if session.store is not None else None,
    )
