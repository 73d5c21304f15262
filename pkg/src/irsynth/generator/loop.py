"""The repeated sample-document -> query -> hard-negative loop."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corpus import io as cio
from ..errors import ConfigError, IrsynthError
from ..prompts import TemplateSet, load_templates
from ..records import CandidateSets, Document, Qrel, Query
from .config import GenerationConfig, iteration_rng, sample_attributes
from .steps import (
    HardNegativeBatch,
    generate_characters,
    generate_hard_negatives,
    generate_query,
    generate_scenario,
    rewrite_query,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationResult:
    index: int
    query: Query | None
    positive: Document | None
    negatives: HardNegativeBatch | None
    error: str = ""


def positive_schedule(n_docs: int, n_queries: int, seed: int) -> list[int]:
    """Corpus index of the positive for each iteration.

    A seeded permutation covers the corpus without replacement; once it is
    exhausted each further iteration draws uniformly from its own stream.
    """
    perm = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF]).permutation(n_docs)
    out = [int(i) for i in perm[:n_queries]]
    for i in range(len(out), n_queries):
        out.append(int(iteration_rng(seed, i, stream=1).integers(n_docs)))
    return out


def run_iteration(index: int, doc: Document, config: GenerationConfig, chat,
                  templates: TemplateSet) -> IterationResult:
    rng = iteration_rng(config.rng_seed, index)
    qid = f"{config.query_id_prefix}-{index}"
    temp = config.temperature
    try:
        attrs = sample_attributes(config, rng)
        characters = generate_characters(doc, chat, templates, temp)
        character = characters[int(rng.integers(len(characters)))]
        scenario = generate_scenario(doc, character, chat, templates, temp)
        original = generate_query(doc, character, scenario, attrs, chat, templates,
                                  config.task, temp)
        rw = rewrite_query(original, doc, attrs.style, chat, config, templates)
        query = Query(
            id=qid,
            text=rw.final,
            original_text=original,
            attributes=attrs,
            character=character,
            scenario=scenario,
            positive_doc_id=doc.id,
            rewrite_history=rw.history,
        )
        negs = generate_hard_negatives(rw.final, doc, chat, config, rng, qid, templates)
    except (IrsynthError, ValueError) as e:
        log.warning("iteration %d (doc %s) skipped: %s", index, doc.id, e)
        return IterationResult(index, None, None, None, f"{type(e).__name__}: {e}")
    return IterationResult(index, query, doc, negs)


def run_generation_loop(corpus: Sequence[Document], config: GenerationConfig, chat,
                        templates: TemplateSet | None = None, workers: int = 8) -> CandidateSets:
    """Run ``config.n_queries`` generation iterations and collect the candidate sets.

    Iterations run on a thread pool but each one draws from its own random
    stream and results are assembled in iteration order, so the output does
    not depend on ``workers``.
    """
    corpus = list(corpus)
    if not corpus:
        raise ConfigError("cannot generate from an empty corpus")
    t = templates or load_templates()
    schedule = positive_schedule(len(corpus), config.n_queries, config.rng_seed)

    def work(i):
        return run_iteration(i, corpus[schedule[i]], config, chat, t)

    if workers <= 1:
        results = [work(i) for i in range(config.n_queries)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, range(config.n_queries)))

    cands = CandidateSets()
    for r in sorted(results, key=lambda r: r.index):
        if r.query is None:
            cands.skipped.append((r.index, r.error))
            continue
        cands.queries.append(r.query)
        cands.positives[r.positive.id] = r.positive
        cands.pos_qrels.add(Qrel(r.query.id, r.positive.id, 1))
        for d in r.negatives:
            cands.hard_negatives[d.id] = d
            cands.neg_qrels.add(Qrel(r.query.id, d.id, 0))
    return cands


# -- candidate files ---------------------------------------------------------

CANDIDATE_FILES = {
    "queries": "queries.jsonl",
    "positives": "positives.jsonl",
    "hard_negatives": "hard_negatives.jsonl",
    "qrels": "qrels.tsv",
}


def write_candidates(cands: CandidateSets, directory, template_version: str | None = None) -> None:
    d = Path(directory)
    extra = {"template_version": template_version} if template_version else None
    cio._write_lines(d / CANDIDATE_FILES["queries"],
                     (cio._dumps(cio.query_to_record(q, extra)) for q in cands.queries))
    cio.write_corpus([cands.positives[k] for k in sorted(cands.positives)],
                     d / CANDIDATE_FILES["positives"])
    cio.write_corpus([cands.hard_negatives[k] for k in sorted(cands.hard_negatives)],
                     d / CANDIDATE_FILES["hard_negatives"])
    cio.write_qrels(cands.pos_qrels | cands.neg_qrels, d / CANDIDATE_FILES["qrels"])


def read_candidates(directory) -> CandidateSets:
    d = Path(directory)
    qrels = cio.read_qrels(d / CANDIDATE_FILES["qrels"])
    return CandidateSets(
        queries=list(cio.read_queries(d / CANDIDATE_FILES["queries"])),
        positives={x.id: x for x in cio.read_corpus(d / CANDIDATE_FILES["positives"])},
        hard_negatives={x.id: x for x in cio.read_corpus(d / CANDIDATE_FILES["hard_negatives"])},
        pos_qrels={r for r in qrels if r.relevance == 1},
        neg_qrels={r for r in qrels if r.relevance == 0},
    )
