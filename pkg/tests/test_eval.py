import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irsynth import DatasetBundle, Document, Qrel, Query, RankedList, Split, Task
from irsynth.errors import EmptyInputError, ParseError
from irsynth.eval import (
    bm25_build,
    bm25_run,
    bm25_search,
    evaluate_run,
    ndcg_at_k,
    read_run,
    recall_at_k,
    rerank_eval,
    write_run,
)
from irsynth.providers import FailingProvider, FunctionReranker


def brute_ndcg(ranked, positives, k):
    """Reference nDCG: explicit gain vectors and a sorted ideal ranking."""
    gains = [1.0 if d in positives else 0.0 for d in ranked[:k]]
    dcg = sum(g / math.log2(i + 2) for i, g in enumerate(gains))
    ideal = sorted([1.0] * len(positives) + [0.0] * k, reverse=True)[:k]
    idcg = sum(g / math.log2(i + 2) for i, g in enumerate(ideal))
    return dcg / idcg


def brute_recall(ranked, positives, k):
    return sum(1 for d in positives if d in ranked[:k]) / len(positives)


def random_instance(rng):
    n = int(rng.integers(1, 51))
    corpus = [f"d{i}" for i in range(n)]
    run = list(rng.permutation(corpus)[: int(rng.integers(0, n + 1))])
    n_pos = int(rng.integers(1, n + 1))
    pos = set(rng.choice(corpus, n_pos, replace=False).tolist())
    return run, pos


def test_ndcg_worked_example():
    # positives at ranks 1 and 3 of 3 known positives
    run = ["a", "x", "b", "y"]
    v = ndcg_at_k(run, {"a": 1, "b": 1, "c": 1, "x": 0}, 10)
    expect = (1 + 1 / math.log2(4)) / (1 + 1 / math.log2(3) + 1 / math.log2(4))
    assert v == pytest.approx(expect, abs=1e-15)
    assert v == pytest.approx(0.7039, abs=1e-4)


def test_ndcg_boundaries():
    assert ndcg_at_k(["a", "b"], {"a": 1, "b": 1}) == 1.0
    assert ndcg_at_k([], {"a": 1}) == 0.0
    assert ndcg_at_k(["a"], {"a": 0}) is None
    assert recall_at_k(["a"], {}) is None
    assert ndcg_at_k(["x"] * 0 + ["z", "a"], {"a": 1}, k=1) == 0.0


def test_metrics_match_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        run, pos = random_instance(rng)
        assert abs(ndcg_at_k(run, pos, 10) - brute_ndcg(run, pos, 10)) <= 1e-12
        assert abs(recall_at_k(run, pos, 10) - brute_recall(run, pos, 10)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 30), unique=True), st.sets(st.integers(0, 30), min_size=1),
       st.integers(1, 20))
def test_metric_ranges(run, pos, k):
    run = [str(x) for x in run]
    pos = {str(x) for x in pos}
    n, r = ndcg_at_k(run, pos, k), recall_at_k(run, pos, k)
    assert 0.0 <= n <= 1.0 + 1e-15 and 0.0 <= r <= 1.0


def small_bundle():
    corpus = {f"d{i}": Document(f"d{i}", f"text {i}") for i in range(6)}
    queries = [Query("q1", "one"), Query("q2", "two"), Query("q3", "three")]
    qrels = {Qrel("q1", "d0", 1), Qrel("q1", "d1", 1), Qrel("q2", "d2", 1), Qrel("q2", "d3", 0),
             Qrel("q3", "d4", 1)}
    split = {"q1": Split.TEST, "q2": Split.TEST, "q3": Split.DEV}
    return DatasetBundle(corpus, queries, qrels, split)


def test_evaluate_run_oracle_and_missing():
    b = small_bundle()
    perfect = {q: RankedList.from_scores(q, {d: 1.0 for d, r in rels.items() if r})
               for q, rels in b.qrels_by_query().items()}
    rep = evaluate_run(perfect, b)
    assert rep.mean == 1.0 and rep.missing == []
    rep = evaluate_run({"q1": perfect["q1"]}, b, split="test")
    assert rep.per_query == {"q1": 1.0, "q2": 0.0} and rep.missing == ["q2"]
    assert rep.mean == 0.5 and rep.metric == "nDCG@10"
    rep = evaluate_run(perfect, b, task=Task.LONG_DOC, split="dev")
    assert rep.metric == "Recall@10" and rep.per_query == {"q3": 1.0}


def test_evaluate_run_unknown_docs_dropped():
    b = small_bundle()
    run = RankedList.from_scores("q3", {"ghost": 2.0, "d4": 1.0})
    rep = evaluate_run([run], b, split="dev")
    assert rep.per_query["q3"] == 1.0 and rep.unknown_docs == 1


def test_run_file_round_trip(tmp_path):
    runs = {"q1": RankedList.from_scores("q1", {"a": 0.5, "b": 0.5, "c": 0.9}),
            "q2": RankedList.from_scores("q2", {"z": 1e-17})}
    write_run(runs, tmp_path / "r.trec")
    assert read_run(tmp_path / "r.trec") == runs
    (tmp_path / "bad.trec").write_text("q1 Q0 a 1 0.5 x\nq1 Q0 b 2\n")
    with pytest.raises(ParseError) as e:
        read_run(tmp_path / "bad.trec")
    assert e.value.lineno == 2


# -- BM25 -----------------------------------------------------------------------

def bm25_oracle(docs_tokens, query_tokens, k1=0.9, b=0.4):
    """Direct formula evaluation over every (doc, query-token) pair."""
    N = len(docs_tokens)
    avgdl = sum(len(t) for t in docs_tokens.values()) / N
    out = {}
    for did, toks in docs_tokens.items():
        s = 0.0
        for term in query_tokens:  # duplicate query terms count each time
            tf = toks.count(term)
            if tf == 0:
                continue
            n = sum(1 for t in docs_tokens.values() if term in t)
            idf = math.log(1 + (N - n + 0.5) / (n + 0.5))
            # Lucene form: the constant (k1 + 1) numerator factor is omitted
            s += idf * tf / (tf + k1 * (1 - b + b * len(toks) / avgdl))
        if s:
            out[did] = s
    return out


def toy_corpus(seed=11, n_docs=30):
    rng = np.random.default_rng(seed)
    vocab = [f"w{i}" for i in range(40)]
    docs = [Document(f"d{i:02d}", " ".join(rng.choice(vocab, int(rng.integers(3, 25)))))
            for i in range(n_docs)]
    queries = {f"q{j:02d}": " ".join(rng.choice(vocab, int(rng.integers(1, 6)))) for j in range(20)}
    return docs, queries


def test_bm25_matches_formula():
    docs, queries = toy_corpus()
    idx = bm25_build(docs)
    toks = {d.id: d.text.split() for d in docs}
    for qid, q in queries.items():
        got = bm25_search(idx, q, k=10, query_id=qid)
        ref = bm25_oracle(toks, q.split())
        expect = sorted(ref, key=lambda d: (-ref[d], d))[:10]
        assert got.doc_ids == expect
        for d, s in got.entries:
            assert abs(s - ref[d]) <= 1e-9


def test_bm25_edge_cases():
    with pytest.raises(EmptyInputError):
        bm25_build([])
    idx = bm25_build([Document("a", "alpha beta"), Document("b", "gamma")])
    assert len(bm25_search(idx, "unseen")) == 0
    assert bm25_search(idx, "ALPHA").doc_ids == ["a"]  # lowercasing analyzer
    idx2 = bm25_build([Document("t", "body", "Title")])
    assert bm25_search(idx2, "title").doc_ids == ["t"]


def test_bm25_run_keys():
    docs, queries = toy_corpus()
    runs = bm25_run(bm25_build(docs), queries, k=5)
    assert sorted(runs) == sorted(queries) and all(len(r) <= 5 for r in runs.values())


# -- reranking ------------------------------------------------------------------

def test_rerank_identity_reverse_and_resort():
    docs, queries = toy_corpus()
    texts = {d.id: d.text for d in docs}
    first = bm25_run(bm25_build(docs), queries, k=100)
    # a reranker that reproduces first-stage scores keeps the order
    lookup = {(queries[q], texts[d]): s for q, r in first.items() for d, s in r.entries}
    same, failed = rerank_eval(first, FunctionReranker(lambda q, d: lookup[(q, d)]), queries, texts)
    assert failed == [] and same == first
    rev, _ = rerank_eval(first, FunctionReranker(lambda q, d: -lookup[(q, d)]), queries, texts)
    for q in first:
        assert sorted(rev[q].doc_ids) == sorted(first[q].doc_ids)
    # scripted scores: independent re-sort of the head
    out, _ = rerank_eval(first, FunctionReranker(lambda q, d: len(d) % 5), queries, texts, depth=4)
    for q, r in first.items():
        head = r.doc_ids[:4]
        expect = sorted(head, key=lambda d: (-(len(texts[d]) % 5), d))
        assert out[q].doc_ids == expect


def test_rerank_failure_keeps_first_stage():
    docs, queries = toy_corpus()
    first = bm25_run(bm25_build(docs), queries, k=10)
    out, failed = rerank_eval(first, FailingProvider(), queries, {d.id: d.text for d in docs},
                              depth=3)
    assert failed == sorted(first)
    assert all(out[q].entries == first[q].entries[:3] for q in first)
