"""In-process bindings for host training loops.

A session wraps the loaded weighting configuration, marker lexicons, and
optional vector store; calls through it reproduce the batch tool's outputs
bit for bit, without subprocess overhead. Data crosses the boundary as flat
contiguous numeric arrays plus UTF-8 strings.

    session = open_session("run_config.json")
    s, w = weigh(session, vad_visual, vad_textual, z_visual, z_textual)
    row = score(session, client_text, response_text)

Sessions are immutable after construction and safe to share across threads;
construction itself is not thread-safe.
"""

from .session import BridgeSession, open_session, score, weigh

__version__ = "0.1.0"

__all__ = ["BridgeSession", "open_session", "weigh", "score", "__version__"]
