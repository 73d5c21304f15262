from .bm25 import Bm25Index, bm25_build, bm25_run, bm25_search
from .diversity import (
    STYLE_LABELS,
    TYPE_LABELS,
    DiversityLabels,
    Facet,
    label_query_diversity,
    parse_label,
    similarity_matrix,
    token_frequencies,
    weighted_jaccard,
)
from .metrics import MetricReport, evaluate_run, ndcg_at_k, recall_at_k
from .rerank import rerank_eval
from .runs import read_run, write_run
from .stats import (
    ConsistencyReport,
    ResampleResult,
    consistency_analysis,
    rank_by_score,
    robustness_resample,
    spearman,
    spearman_permutation_pvalue,
)
