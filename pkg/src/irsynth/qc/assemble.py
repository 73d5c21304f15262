"""Dev/test splitting and final bundle assembly."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable

import numpy as np

from ..corpus import io as cio
from ..errors import IntegrityError
from ..records import CandidateSets, DatasetBundle, Document, Query, Split, Task


def dev_size(n: int, dev_fraction: float = 0.2) -> int:
    """Round-half-up dev count (``n=1`` gives 0, ``n=100`` gives 20)."""
    return int(math.floor(n * dev_fraction + 0.5))


def split_queries(queries: Iterable[Query | str], task: Task = Task.QA, dev_fraction: float = 0.2,
                  rng_seed: int = 0, long_doc_split: Split | str = Split.TEST) -> dict[str, Split]:
    """Assign each query to dev or test.

    QA: a seeded uniformly random subset of ``dev_size(n)`` queries is dev.
    Long-doc datasets are split whole, so every query gets ``long_doc_split``.
    """
    ids = sorted(q.id if isinstance(q, Query) else q for q in queries)
    if not ids:
        raise ValueError("no queries to split")
    if Task(task) is Task.LONG_DOC:
        s = Split(long_doc_split)
        return {q: s for q in ids}
    n_dev = dev_size(len(ids), dev_fraction)
    perm = np.random.default_rng([rng_seed & 0xFFFFFFFFFFFFFFFF]).permutation(len(ids))
    dev = {ids[i] for i in perm[:n_dev]}
    return {q: (Split.DEV if q in dev else Split.TEST) for q in ids}


def assemble_dataset(seed_corpus: Iterable[Document], cands: CandidateSets,
                     split: dict[str, Split]) -> DatasetBundle:
    """Union corpus D0 + D+ + D- (seed order first) and validate the bundle."""
    corpus: dict[str, Document] = {}
    clashes = []

    def put(d: Document):
        prev = corpus.setdefault(d.id, d)
        if prev is not d and prev.text != d.text:
            clashes.append(d.id)

    for d in seed_corpus:
        put(d)
    for k in sorted(cands.positives):
        put(cands.positives[k])
    for k in sorted(cands.hard_negatives):
        put(cands.hard_negatives[k])
    if clashes:
        raise IntegrityError("different documents share an id", clashes)
    bundle = DatasetBundle(corpus, list(cands.queries), cands.pos_qrels | cands.neg_qrels, dict(split))
    bundle.validate()
    return bundle


BUNDLE_FILES = {
    "corpus": "corpus.jsonl",
    "queries": "queries.jsonl",
    "qrels": "qrels.tsv",
    "split": "split.tsv",
}


def write_bundle(bundle: DatasetBundle, directory) -> None:
    d = Path(directory)
    cio.write_corpus(bundle.corpus.values(), d / BUNDLE_FILES["corpus"])
    cio.write_queries(bundle.queries, d / BUNDLE_FILES["queries"])
    cio.write_qrels(bundle.qrels, d / BUNDLE_FILES["qrels"])
    cio.write_split(bundle.split, d / BUNDLE_FILES["split"])


def read_bundle(directory, validate: bool = True) -> DatasetBundle:
    d = Path(directory)
    split_path = d / BUNDLE_FILES["split"]
    queries = list(cio.read_queries(d / BUNDLE_FILES["queries"]))
    split = cio.read_split(split_path) if split_path.exists() else {q.id: Split.TEST for q in queries}
    bundle = DatasetBundle(
        {x.id: x for x in cio.read_corpus(d / BUNDLE_FILES["corpus"])},
        queries,
        set(cio.read_qrels(d / BUNDLE_FILES["qrels"])),
        split,
    )
    if validate:
        bundle.validate()
    return bundle
