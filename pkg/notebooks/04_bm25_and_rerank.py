# %% [markdown]
# # End-to-end build, then BM25 and reranked evaluation
#
# Build a small dataset with the mock providers, score a BM25 run with
# nDCG@10, then rerank the BM25 top 100 and score again.

# %%
import tempfile
from pathlib import Path

import numpy as np

from irsynth import Document, Task
from irsynth.eval import bm25_build, bm25_run, evaluate_run, rerank_eval
from irsynth.generator import GenerationConfig
from irsynth.pipeline import Providers, run_pipeline
from irsynth.providers import HashingEmbedder, SyntheticChat, TokenOverlapReranker

rng = np.random.default_rng(2)
topics = [[f"t{t}w{i}" for i in range(30)] for t in range(8)]
common = [f"c{i}" for i in range(40)]
raw = [Document(f"doc-{i}", " ".join(list(rng.choice(topics[i % 8], 25)) + list(rng.choice(common, 15))))
       for i in range(120)]
providers = Providers(SyntheticChat(), HashingEmbedder(512),
                      [TokenOverlapReranker(f"rr{j}", jitter=0.3) for j in range(3)])

work = Path(tempfile.mkdtemp())
bundle = run_pipeline(raw, Task.QA, GenerationConfig(n_queries=40, rng_seed=3), providers,
                      workers=4, workspace=work / "ws", output=work / "bundle")
print(len(bundle.queries), "queries,", len(bundle.corpus), "docs,", len(bundle.qrels), "qrels")

# %%
index = bm25_build(bundle.corpus.values())
queries = {q.id: q.text for q in bundle.queries}
runs = bm25_run(index, queries, k=100)
print("BM25", evaluate_run(runs, bundle, split="test").mean)

# %%
texts = {d.id: d.text for d in bundle.corpus.values()}
reranked, failed = rerank_eval(runs, TokenOverlapReranker("judge"), queries, texts, depth=100)
print("BM25 + rerank", evaluate_run(reranked, bundle, split="test").mean, "failed:", failed)
