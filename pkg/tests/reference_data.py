"""Published leaderboard used as a reproduction target.

Seventeen retrievers scored with nDCG@10 on a human-labeled passage set
and on two generated counterparts (with and without quality control).
"""

MODELS = (
    "repllama-v1-7b-lora-passage", "e5-large-v2", "multilingual-e5-large",
    "multilingual-e5-base", "bge-large-en-v1.5", "e5-mistral-7b-instruct", "e5-small-v2",
    "e5-base-v2", "bge-small-en-v1.5", "bge-base-en-v1.5", "multilingual-e5-small",
    "simlm-base-msmarco-finetuned", "jina-embeddings-v3", "bge-m3", "contriever-msmarco",
    "msmarco-roberta-base-ance-firstp", "BM25",
)
HUMAN_NDCG = (48.000, 45.232, 45.119, 44.130, 44.122, 43.787, 43.104, 43.056, 42.553, 42.388,
              42.253, 41.675, 39.787, 39.565, 36.570, 33.637, 26.211)
GEN_QC_NDCG = (59.625, 55.260, 54.431, 52.581, 55.513, 59.015, 51.456, 51.438, 51.528, 54.292,
               47.989, 48.102, 51.098, 54.404, 47.127, 42.107, 34.155)
GEN_NOQC_NDCG = (33.434, 32.581, 32.099, 30.870, 33.119, 36.186, 30.471, 30.411, 30.155, 32.067,
                 28.579, 30.548, 30.297, 33.286, 29.231, 24.798, 22.582)
HUMAN_RANKS = tuple(range(1, 18))
GEN_QC_RANKS = (1, 4, 5, 8, 3, 2, 10, 11, 9, 7, 14, 13, 12, 6, 15, 16, 17)
GEN_NOQC_RANKS = (2, 5, 6, 8, 4, 1, 10, 11, 13, 7, 15, 9, 12, 3, 14, 16, 17)
RHO_QC, P_QC = 0.8211, 5e-5
RHO_NOQC, P_NOQC = 0.6912, 2e-3
