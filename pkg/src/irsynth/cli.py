"""Command-line entry point: ``irsynth <command> [options]``.

Exit codes: 0 success, 2 usage/configuration, 3 input files, 4 provider,
5 integrity.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import os
import pickle
import sys
from pathlib import Path

from . import pipeline
from .corpus import io as cio
from .corpus.prepare import corpus_stats
from .errors import (
    ConfigError,
    EmptyInputError,
    GenerationError,
    InputError,
    IntegrityError,
    JudgingError,
    ParseError,
    ProviderError,
    UnsupportedInputError,
)
from .eval import (
    bm25_build,
    bm25_run,
    consistency_analysis,
    evaluate_run,
    label_query_diversity,
    read_run,
    rerank_eval,
    robustness_resample,
    similarity_matrix,
    spearman,
    write_run,
)
from .generator import GenerationConfig
from .generator.loop import read_candidates
from .prompts import load_templates
from .providers import (
    EchoChat,
    HashingEmbedder,
    HttpChatClient,
    HttpEmbeddingClient,
    HttpRerankClient,
    ProviderConfig,
    RecordingProvider,
    ReplayProvider,
    SyntheticChat,
    TokenOverlapReranker,
    Transcript,
)
from .qc import read_bundle, write_bundle
from .records import Document, Split, Task

log = logging.getLogger("irsynth")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_PROVIDER, EXIT_INTEGRITY = 0, 2, 3, 4, 5

DEFAULT_CONFIG = {
    "task": "qa",
    "seed": 0,
    "workers": 8,
    "tokenizer": "unicode",
    "paths": {"raw": None, "workspace": "workspace", "output": "bundle"},
    "prepare": {"min_tokens": 20, "max_tokens": 8192, "chunk_size": 200, "overlap": 50},
    "generation": {},
    "qc": {},
    "providers": {
        "chat": {"kind": "http"},
        "embed": {"kind": "http"},
        "rerank": [{"kind": "http"}],
    },
}


# -- config ----------------------------------------------------------------

def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = _merge(cfg, json.load(fh))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {args.config} is not valid JSON: {e}") from None
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.workers is not None:
        cfg["workers"] = args.workers
    if getattr(args, "task", None):
        cfg["task"] = args.task
    for key in ("workspace", "output"):
        if getattr(args, key, None):
            cfg["paths"][key] = getattr(args, key)
    if getattr(args, "n_queries", None):
        cfg["generation"]["n_queries"] = args.n_queries
    specs = [cfg["providers"].get("chat") or {}, cfg["providers"].get("embed") or {},
             *(cfg["providers"].get("rerank") or [])]
    if any("api_key" in sp for sp in specs):
        raise ConfigError("put secrets in AIRBENCH_*_API_KEY or reference them with 'api_key_env'")
    return cfg


def _effective(cfg: dict, command: str) -> None:
    print(json.dumps({"command": command, "config": cfg}, sort_keys=True), file=sys.stderr)


def _gen_config(cfg: dict) -> GenerationConfig:
    g = dict(cfg.get("generation", {}))
    g.setdefault("rng_seed", cfg["seed"])
    g["task"] = cfg["task"]
    return GenerationConfig.from_dict(g)


def _qc_config(cfg: dict) -> pipeline.QCConfig:
    return pipeline.QCConfig(**cfg.get("qc", {}))


def _provider_config(role: str, spec: dict) -> ProviderConfig:
    fields = {k: v for k, v in spec.items()
              if k in ProviderConfig.__dataclass_fields__ and k != "api_key"}
    if spec.get("api_key_env"):
        fields["api_key"] = os.environ.get(spec["api_key_env"], "")
    return ProviderConfig.for_role(role, **fields)


def _wrap_transcript(provider, spec: dict, recorders: list):
    if spec.get("record"):
        rec = RecordingProvider(provider, name=getattr(provider, "name", None))
        recorders.append((rec, spec["record"]))
        return rec
    return provider


def build_chat(spec: dict, recorders: list):
    kind = spec.get("kind", "http")
    if kind == "synthetic":
        p = SyntheticChat(noise_rate=spec.get("noise_rate", 0.1))
    elif kind == "echo":
        p = EchoChat()
    elif kind == "replay":
        p = ReplayProvider(Transcript.load(spec["transcript"]))
    elif kind == "http":
        p = HttpChatClient(_provider_config("chat", spec), temperature=spec.get("temperature", 0.8))
    else:
        raise ConfigError(f"unknown chat provider kind {kind!r}")
    return _wrap_transcript(p, spec, recorders)


def build_embedder(spec: dict, recorders: list):
    kind = spec.get("kind", "http")
    if kind == "hashing":
        p = HashingEmbedder(spec.get("dim", 256))
    elif kind == "replay":
        p = ReplayProvider(Transcript.load(spec["transcript"]))
    elif kind == "http":
        p = HttpEmbeddingClient(_provider_config("embed", spec), extra_body=spec.get("extra_body"))
    else:
        raise ConfigError(f"unknown embedding provider kind {kind!r}")
    return _wrap_transcript(p, spec, recorders)


def build_reranker(spec: dict, recorders: list, i: int = 0):
    kind = spec.get("kind", "http")
    name = spec.get("name", f"reranker-{i}")
    if kind == "overlap":
        p = TokenOverlapReranker(name, spec.get("jitter", 0.0))
    elif kind == "replay":
        p = ReplayProvider(Transcript.load(spec["transcript"]), name=name)
    elif kind == "http":
        p = HttpRerankClient(_provider_config("rerank", spec), name=name)
    else:
        raise ConfigError(f"unknown reranker kind {kind!r}")
    return _wrap_transcript(p, spec, recorders)


def build_providers(cfg: dict, recorders: list | None = None) -> pipeline.Providers:
    recorders = recorders if recorders is not None else []
    p = cfg["providers"]
    return pipeline.Providers(
        chat=build_chat(p.get("chat", {}), recorders),
        embedder=build_embedder(p.get("embed", {}), recorders),
        rerankers=[build_reranker(s, recorders, i) for i, s in enumerate(p.get("rerank", []))],
    )


def _save_recordings(recorders):
    for rec, path in recorders:
        rec.transcript.save(path)


# -- commands ----------------------------------------------------------------

def _read_raw(path) -> list[Document]:
    path = Path(path)
    if path.is_dir():
        docs = []
        for f in sorted(path.glob("*.txt")):
            docs.append(Document(f.stem, f.read_text(encoding="utf-8")))
        return docs
    if path.suffix == ".txt":
        return [Document(path.stem, path.read_text(encoding="utf-8"))]
    return list(cio.read_corpus(path))


def cmd_prepare(args, cfg):
    raw = args.input or cfg["paths"].get("raw")
    if not raw:
        raise ConfigError("prepare needs --input or paths.raw")
    pp = cfg["prepare"]
    docs = pipeline.prepare_corpus(_read_raw(raw), Task(cfg["task"]), cfg["tokenizer"],
                                   pp["min_tokens"], pp["max_tokens"], pp["chunk_size"],
                                   pp["overlap"])
    out = Path(args.out or Path(cfg["paths"]["workspace"]) / "corpus.jsonl")
    cio.write_corpus(docs, out)
    st = corpus_stats(docs, cfg["tokenizer"])
    print(json.dumps({"corpus": str(out), "doc_count": st.doc_count,
                      "avg_tokens": round(st.avg_tokens, 2), "histogram": st.token_histogram}))


def cmd_generate(args, cfg):
    gen = _gen_config(cfg)
    ws = Path(cfg["paths"]["workspace"])
    corpus_path = Path(args.corpus or ws / "corpus.jsonl")
    corpus = list(cio.read_corpus(corpus_path))
    out = Path(args.out or ws / "candidates")
    if args.dry_run:
        print(json.dumps({"dry_run": True, "corpus_docs": len(corpus), "iterations": gen.n_queries,
                          "generation": gen.to_dict(), "output": str(out)}))
        return
    recorders: list = []
    providers = build_providers(cfg, recorders)
    cands = pipeline.generate(corpus, gen, providers.chat, out, cfg["workers"])
    _save_recordings(recorders)
    print(json.dumps({"queries": len(cands.queries), "hard_negatives": len(cands.hard_negatives),
                      "skipped": len(cands.skipped), "output": str(out)}))


def cmd_qc(args, cfg):
    ws = Path(cfg["paths"]["workspace"])
    corpus = list(cio.read_corpus(args.corpus or ws / "corpus.jsonl"))
    cands = read_candidates(args.candidates or ws / "candidates")
    out = Path(cfg["paths"]["output"])
    if args.dry_run:
        print(json.dumps({"dry_run": True, "queries": len(cands.queries), "seed_docs": len(corpus),
                          "qc": vars(_qc_config(cfg)), "output": str(out)}))
        return
    recorders: list = []
    providers = build_providers(cfg, recorders)
    if providers.embedder is None or not providers.rerankers:
        raise ConfigError("qc needs an embedding provider and at least one reranker")
    bundle, report = pipeline.quality_control(corpus, cands, providers, Task(cfg["task"]),
                                              _qc_config(cfg), cfg["seed"], cfg["workers"],
                                              ws / "qc")
    write_bundle(bundle, out)
    report.write(out / "qc_report.jsonl")
    _save_recordings(recorders)
    n_dev = sum(1 for s in bundle.split.values() if s is Split.DEV)
    print(json.dumps({"queries": len(bundle.queries), "corpus": len(bundle.corpus),
                      "qrels": len(bundle.qrels), "dev": n_dev,
                      "test": len(bundle.split) - n_dev, "output": str(out)}))


def _queries_map(args, bundle=None) -> dict[str, str]:
    if getattr(args, "queries", None):
        return {q.id: q.text for q in cio.read_queries(args.queries)}
    return {q.id: q.text for q in bundle.queries}


def cmd_bm25(args, cfg):
    if args.action == "index":
        index = bm25_build(cio.read_corpus(args.corpus), args.analyzer, args.k1, args.b)
        out = Path(args.index)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "wb") as fh:
            pickle.dump(index, fh)
        print(json.dumps({"index": str(out), "docs": index.doc_count, "terms": len(index.postings)}))
        return
    if args.index and Path(args.index).exists():
        with open(args.index, "rb") as fh:
            index = pickle.load(fh)
    elif args.corpus:
        index = bm25_build(cio.read_corpus(args.corpus), args.analyzer, args.k1, args.b)
    else:
        raise ConfigError("bm25 search needs --index or --corpus")
    if not args.queries:
        raise ConfigError("bm25 search needs --queries")
    runs = bm25_run(index, _queries_map(args), args.k)
    write_run(runs, args.run, tag="bm25")
    print(json.dumps({"run": str(args.run), "queries": len(runs)}))


def _print_report(rep, args):
    print(f"{rep.metric:<12} {rep.mean:.4f}  (queries={len(rep.per_query)}, "
          f"missing={len(rep.missing)}, excluded={len(rep.excluded)})")
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        with open(args.report, "w", encoding="utf-8") as fh:
            for q, m, v in rep.rows():
                fh.write(json.dumps({"query_id": q, "metric": m, "value": v}) + "\n")
            fh.write(json.dumps({"query_id": None, "metric": rep.metric, "mean": rep.mean,
                                 "missing": rep.missing}) + "\n")
    if args.per_query_csv:
        with open(args.per_query_csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["query_id", "metric", "value"])
            w.writerows(rep.rows())


def _rerank(args, cfg, bundle, runs, depth):
    recorders: list = []
    specs = cfg["providers"].get("rerank") or []
    if not specs:
        raise ConfigError("reranking needs a reranker in providers.rerank")
    reranker = build_reranker(specs[0], recorders)
    texts = {d.id: d.text for d in bundle.corpus.values()}
    reranked, failed = rerank_eval(runs, reranker, _queries_map(args, bundle), texts, depth,
                                   workers=cfg["workers"])
    _save_recordings(recorders)
    if failed:
        log.warning("rerank kept first-stage order for %d queries", len(failed))
    return reranked


def cmd_eval(args, cfg):
    bundle = read_bundle(args.bundle)
    runs = read_run(args.run)
    if args.rerank_depth:
        runs = _rerank(args, cfg, bundle, runs, args.rerank_depth)
    rep = evaluate_run(runs, bundle, Task(cfg["task"]), args.split, args.k)
    _print_report(rep, args)


def cmd_rerank_eval(args, cfg):
    bundle = read_bundle(args.bundle)
    runs = _rerank(args, cfg, bundle, read_run(args.run), args.depth)
    if args.out:
        write_run(runs, args.out, tag="rerank")
    rep = evaluate_run(runs, bundle, Task(cfg["task"]), args.split, args.k)
    _print_report(rep, args)


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.replace(" ", "").split(",") if x]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {s!r}") from None


def _json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_consistency(args, cfg):
    if args.ranks_a and args.ranks_b:
        rho, p = spearman(_int_list(args.ranks_a), _int_list(args.ranks_b))
        print(f"spearman rho = {rho:.4f}  p = {p:.3g}")
    elif args.scores_a and args.scores_b:
        rep = consistency_analysis(_json(args.scores_a), _json(args.scores_b))
        print(f"{'model':<40} {'rank_a':>6} {'rank_b':>6}")
        for m, a, b in zip(rep.model_ids, rep.ranks_a, rep.ranks_b):
            print(f"{m:<40} {a:>6} {b:>6}")
        print(f"spearman rho = {rep.rho:.4f}  p = {rep.p_value:.3g}")
    elif not args.per_query:
        raise ConfigError("consistency needs --ranks-a/--ranks-b, --scores-a/--scores-b, "
                          "or --per-query with --reference")
    if args.per_query:
        if not args.reference:
            raise ConfigError("--per-query needs --reference")
        res = robustness_resample(_json(args.per_query), _json(args.reference), args.resample,
                                  args.trials, cfg["seed"])
        for i, (rho, p) in enumerate(res.trials):
            print(f"trial {i:>3}  rho = {rho:.4f}  p = {p:.3g}")
        print(f"full rho = {res.full_rho:.4f}  mean rho = {res.mean_rho:.4f}  std = {res.std_rho:.4f}")


def cmd_diversity(args, cfg):
    queries = list(cio.read_queries(args.queries))
    recorders: list = []
    chat = build_chat(cfg["providers"].get("chat", {}), recorders)
    labels = label_query_diversity(queries, chat, args.facet, workers=cfg["workers"])
    _save_recordings(recorders)
    for lab, share in labels.distribution().items():
        print(f"{lab:<14} {100 * share:5.1f}%")
    if labels.flagged:
        print(f"# {len(labels.flagged)} queries could not be labeled", file=sys.stderr)


def cmd_similarity(args, cfg):
    corpora = {}
    for item in args.corpus:
        name, _, path = item.partition("=")
        if not path:
            name, path = Path(item).stem, item
        corpora[name] = [d.text for d in cio.read_corpus(path)]
    mat = similarity_matrix(corpora, args.analyzer)
    names = list(corpora)
    width = max(8, *(len(n) for n in names))
    print(" " * width + "".join(f"{n:>{width + 2}}" for n in names))
    for a in names:
        print(f"{a:<{width}}" + "".join(f"{mat[a][b]:>{width + 2}.4f}" for b in names))


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--dry-run", action="store_true", help="plan only, no provider calls")
    common.add_argument("--task", choices=[t.value for t in Task])
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="irsynth", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("prepare", parents=[common], help="filter or chunk a raw corpus")
    s.add_argument("--input", help="raw corpus (.jsonl, .txt, or directory of .txt)")
    s.add_argument("--out")
    s.add_argument("--workspace")
    s.set_defaults(func=cmd_prepare)

    s = sub.add_parser("generate", parents=[common], help="run the candidate-generation loop")
    s.add_argument("--corpus")
    s.add_argument("--out")
    s.add_argument("--workspace")
    s.add_argument("--n-queries", type=int)
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("qc", parents=[common], help="quality control, split and assemble")
    s.add_argument("--corpus")
    s.add_argument("--candidates")
    s.add_argument("--workspace")
    s.add_argument("--output")
    s.set_defaults(func=cmd_qc)

    s = sub.add_parser("bm25", parents=[common], help="BM25 index and search")
    s.add_argument("action", choices=["index", "search"])
    s.add_argument("--corpus")
    s.add_argument("--index")
    s.add_argument("--queries")
    s.add_argument("--run", default="bm25.run")
    s.add_argument("--k", type=int, default=100)
    s.add_argument("--k1", type=float, default=0.9)
    s.add_argument("--b", type=float, default=0.4)
    s.add_argument("--analyzer", default="unicode-lower")
    s.set_defaults(func=cmd_bm25)

    for name, func in (("eval", cmd_eval), ("rerank-eval", cmd_rerank_eval)):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--bundle", required=True)
        s.add_argument("--run", required=True)
        s.add_argument("--split", choices=["dev", "test"])
        s.add_argument("--k", type=int, default=10)
        s.add_argument("--report", help="write per-query JSON lines here")
        s.add_argument("--per-query-csv")
        if name == "eval":
            s.add_argument("--rerank-depth", type=int, default=0)
        else:
            s.add_argument("--depth", type=int, default=100)
            s.add_argument("--out", help="write the re-ranked run here")
        s.set_defaults(func=func)

    s = sub.add_parser("consistency", parents=[common], help="Spearman agreement of two leaderboards")
    s.add_argument("--ranks-a")
    s.add_argument("--ranks-b")
    s.add_argument("--scores-a", help="JSON {model: score}")
    s.add_argument("--scores-b", help="JSON {model: score}")
    s.add_argument("--per-query", help="JSON {model: {query: score}} for resampling")
    s.add_argument("--reference", help="JSON {model: score} reference leaderboard")
    s.add_argument("--resample", type=int, default=2000)
    s.add_argument("--trials", type=int, default=30)
    s.set_defaults(func=cmd_consistency)

    s = sub.add_parser("diversity", parents=[common], help="label query types or styles")
    s.add_argument("--queries", required=True)
    s.add_argument("--facet", choices=["type", "style"], default="type")
    s.set_defaults(func=cmd_diversity)

    s = sub.add_parser("similarity", parents=[common], help="weighted Jaccard between corpora")
    s.add_argument("--corpus", action="append", required=True, help="name=path, repeatable")
    s.add_argument("--analyzer", default="unicode-lower")
    s.set_defaults(func=cmd_similarity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        _effective(cfg, args.command)
        args.func(args, cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, ParseError, EmptyInputError, InputError,
            UnsupportedInputError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ProviderError, GenerationError, JudgingError) as e:
        print(f"provider error: {e}", file=sys.stderr)
        return EXIT_PROVIDER
    except IntegrityError as e:
        print(f"integrity error: {e}", file=sys.stderr)
        return EXIT_INTEGRITY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
