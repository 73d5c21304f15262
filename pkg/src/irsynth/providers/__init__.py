from .base import ChatProvider, EmbeddingProvider, RerankProvider
from .config import ProviderConfig
from .http import HttpChatClient, HttpEmbeddingClient, HttpRerankClient
from .mock import (
    ConstantReranker,
    EchoChat,
    FailingProvider,
    FunctionChat,
    FunctionReranker,
    HashingEmbedder,
    ScriptedChat,
    TableEmbedder,
    TokenOverlapReranker,
    stable_hash,
)
from .ratelimit import RateLimiter
from .synthetic import SyntheticChat
from .transcript import RecordingProvider, ReplayProvider, Transcript, fingerprint
