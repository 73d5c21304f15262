"""Stage functions shared by the command line and library users.

Each stage reads and writes files in a workspace directory:

    <workspace>/corpus.jsonl         prepared seed corpus
    <workspace>/candidates/          generation output
    <workspace>/qc/                  checkpoint + report
    <output>/                        final bundle
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import io as cio
from .corpus.prepare import (
    DEFAULT_CHUNK_OVERLAP,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_MAX_TOKENS,
    DEFAULT_MIN_TOKENS,
    chunk_long_document,
    filter_documents,
)
from .errors import IntegrityError
from .generator import GenerationConfig, run_generation_loop, write_candidates
from .generator.loop import read_candidates
from .prompts import load_templates
from .qc import (
    Checkpoint,
    QCReport,
    assemble_dataset,
    correct_labels,
    filter_low_quality_queries,
    split_queries,
    write_bundle,
)
from .qc.labels import HARD_NEGATIVE_THRESHOLD, OTHER_THRESHOLD, RECALL_DEPTH
from .records import DatasetBundle, Document, Split, Task

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QCConfig:
    recall_depth: int = RECALL_DEPTH
    threshold_hard_negative: int = HARD_NEGATIVE_THRESHOLD
    threshold_other: int = OTHER_THRESHOLD
    dev_fraction: float = 0.2
    long_doc_split: str = "test"
    judge_temperature: float = 0.0


@dataclass
class Providers:
    chat: object
    embedder: object = None
    rerankers: Sequence = field(default_factory=list)


def prepare_corpus(docs: Sequence[Document], task: Task, tokenizer=None,
                   min_tokens: int = DEFAULT_MIN_TOKENS, max_tokens: int | None = DEFAULT_MAX_TOKENS,
                   chunk_size: int = DEFAULT_CHUNK_SIZE, overlap: int = DEFAULT_CHUNK_OVERLAP
                   ) -> list[Document]:
    """QA: length-filter the documents. Long-doc: chunk each document."""
    if Task(task) is Task.QA:
        return list(filter_documents(docs, min_tokens, max_tokens, tokenizer))
    out = []
    for d in docs:
        out.extend(chunk_long_document(d.text, chunk_size, overlap, tokenizer, parent_id=d.id,
                                       title=d.title))
    return out


def generate(corpus: Sequence[Document], config: GenerationConfig, chat, out_dir=None,
             workers: int = 8, templates=None):
    t = templates or load_templates()
    cands = run_generation_loop(corpus, config, chat, t, workers)
    if out_dir is not None:
        write_candidates(cands, out_dir, t.version)
    return cands


def quality_control(seed_corpus: Sequence[Document], cands, providers: Providers, task: Task,
                    config: QCConfig = QCConfig(), rng_seed: int = 0, workers: int = 8,
                    workspace=None, templates=None) -> tuple[DatasetBundle, QCReport]:
    """Filter queries, correct labels, split and assemble the final bundle."""
    t = templates or load_templates()
    report = QCReport()
    ck_path = Path(workspace) / "checkpoint.jsonl" if workspace is not None else None
    ck = Checkpoint(ck_path)
    filtered = filter_low_quality_queries(cands, providers.chat, t, workers, report, ck,
                                          config.judge_temperature)
    corrected = correct_labels(filtered, seed_corpus, providers.embedder, providers.rerankers,
                               providers.chat, config.recall_depth, config.threshold_hard_negative,
                               config.threshold_other, t, workers, report, ck,
                               config.judge_temperature)
    if not corrected.queries:
        raise IntegrityError("quality control removed every query")
    split = split_queries(corrected.queries, task, config.dev_fraction, rng_seed,
                          Split(config.long_doc_split))
    bundle = assemble_dataset(seed_corpus, corrected, split)
    if workspace is not None:
        report.write(Path(workspace) / "qc_report.jsonl")
    return bundle, report


def run_pipeline(raw_docs: Sequence[Document], task: Task, gen_config: GenerationConfig,
                 providers: Providers, qc_config: QCConfig = QCConfig(), workers: int = 8,
                 workspace=None, output=None, **prepare_kw) -> DatasetBundle:
    """prepare -> generate -> quality control -> split -> assemble."""
    ws = Path(workspace) if workspace is not None else None
    corpus = prepare_corpus(raw_docs, task, **prepare_kw)
    if ws is not None:
        cio.write_corpus(corpus, ws / "corpus.jsonl")
    cands = generate(corpus, gen_config, providers.chat, ws / "candidates" if ws else None, workers)
    if ws is not None:
        cands = read_candidates(ws / "candidates")
    bundle, _ = quality_control(corpus, cands, providers, task, qc_config, gen_config.rng_seed,
                                workers, ws / "qc" if ws else None)
    if output is not None:
        write_bundle(bundle, output)
    return bundle
