from dataclasses import dataclass

ATTENTION_SPEC = "mean(layers,heads,queries)->to_token;norm=mean1"
LIKELIHOOD_SPEC = "unmasked_full_sentence"


@dataclass
class ServiceConfig:
    model: str
    host: str = "127.0.0.1"
    port: int = 8400
    max_tokens: int = 512
    device: str = "cpu"
    attention_spec: str = ATTENTION_SPEC

    def __post_init__(self):
        if self.max_tokens < 16:
            raise ValueError(f"max_tokens must be >= 16, got {self.max_tokens}")
