from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

from ..errors import ConfigError

ROLES = ("chat", "embed", "rerank")

# Per-role defaults; the 512 cap mirrors the evaluation-time truncation
# length for retrievers and rerankers. Chat prompts embed whole documents.
_DEFAULT_MAX_INPUT = {"chat": 32768, "embed": 512, "rerank": 512}
_DEFAULT_PATH = {"chat": "/chat/completions", "embed": "/embeddings", "rerank": "/rerank"}


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str = "http://localhost:8000/v1"
    api_key: str = field(default="", repr=False)
    model_name: str = ""
    timeout: float = 60.0
    max_retries: int = 3
    backoff_initial: float = 1.0
    backoff_multiplier: float = 2.0
    rate_limit: float = 600.0  # requests per minute
    max_input_tokens: int = 512
    max_concurrency: int = 8
    batch_size: int = 64
    path: str = ""

    def __post_init__(self):
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.rate_limit <= 0:
            raise ConfigError("rate_limit must be > 0")
        if self.max_input_tokens <= 0:
            raise ConfigError("max_input_tokens must be positive")
        if self.backoff_initial < 0 or self.backoff_multiplier < 1:
            raise ConfigError("backoff must be non-negative with multiplier >= 1")

    @classmethod
    def for_role(cls, role: str, env=None, **overrides) -> "ProviderConfig":
        """Build a config from ``AIRBENCH_*`` environment variables.

        ``AIRBENCH_<ROLE>_API_BASE`` / ``_API_KEY`` / ``_MODEL`` override the
        shared ``AIRBENCH_API_BASE`` / ``AIRBENCH_API_KEY`` / ``AIRBENCH_MODEL``.
        Explicit keyword overrides win over the environment.
        """
        if role not in ROLES:
            raise ConfigError(f"unknown provider role {role!r}")
        env = os.environ if env is None else env
        r = role.upper()

        def pick(key):
            return env.get(f"AIRBENCH_{r}_{key}") or env.get(f"AIRBENCH_{key}")

        kw = {"max_input_tokens": _DEFAULT_MAX_INPUT[role], "path": _DEFAULT_PATH[role]}
        if (v := pick("API_BASE")):
            kw["base_url"] = v
        if (v := pick("API_KEY")):
            kw["api_key"] = v
        if (v := pick("MODEL")):
            kw["model_name"] = v
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)

    def with_(self, **kw) -> "ProviderConfig":
        return replace(self, **kw)
