"""Synthesize and evaluate information-retrieval test collections with LLMs."""

from .errors import (
    ConfigError,
    IntegrityError,
    IrsynthError,
    ParseError,
    ProviderError,
)
from .records import (
    CandidateSets,
    DatasetBundle,
    Document,
    Origin,
    Qrel,
    Query,
    QueryAttributes,
    RankedList,
    Split,
    Task,
)

__version__ = "0.1.0"
