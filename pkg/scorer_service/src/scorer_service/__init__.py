"""Model-serving sidecar for the mlmbias scorer wire protocol.

Wraps a masked language model behind four HTTP endpoints
(/v1/token_scores, /v1/fill_mask, /v1/embed, /v1/info) with
deterministic, inference-only outputs.
"""

__version__ = "0.1.0"
