from .assemble import (
    assemble_dataset,
    dev_size,
    read_bundle,
    split_queries,
    write_bundle,
)
from .checkpoint import Checkpoint
from .judge import RelevanceLevel, filter_low_quality_queries, judge_relevance
from .labels import (
    Action,
    DocClass,
    EmbeddingIndex,
    PreLabel,
    QueryCorrection,
    RerankerVote,
    apply_action_matrix,
    classify_document,
    correct_labels,
    prelabel,
    recall_top_k,
    search_corpus,
)
from .report import QCReport
