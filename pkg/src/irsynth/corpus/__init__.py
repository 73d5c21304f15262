from .io import (
    read_corpus,
    read_qrels,
    read_queries,
    read_split,
    write_corpus,
    write_qrels,
    write_queries,
    write_split,
)
from .prepare import (
    CorpusStats,
    chunk_long_document,
    chunk_windows,
    corpus_stats,
    filter_documents,
    redact,
    seed_documents,
)
from .tokenizers import Tokenizer, count_tokens, get_tokenizer, unicode_tokenizer, whitespace_tokenizer
