import json

import pytest

from irsynth import cli
from irsynth.corpus import write_corpus, write_queries
from irsynth.eval import write_run
from irsynth.qc import read_bundle
from irsynth.records import Query, RankedList

import reference_data as ref
from conftest import make_corpus

MOCK_CONFIG = {
    "providers": {
        "chat": {"kind": "synthetic"},
        "embed": {"kind": "hashing", "dim": 512},
        "rerank": [{"kind": "overlap", "name": f"rr{i}", "jitter": 0.3} for i in range(3)],
    },
    "generation": {"n_queries": 20},
}


def write_config(path, cfg=MOCK_CONFIG):
    path.write_text(json.dumps(cfg))
    return str(path)


def run_full(tmp, workers):
    tmp.mkdir(parents=True, exist_ok=True)
    cfgp = write_config(tmp / "cfg.json")
    raw = tmp / "raw.jsonl"
    write_corpus(make_corpus(60), raw)
    ws, out = tmp / "ws", tmp / "bundle"
    common = ["--config", cfgp, "--seed", "3", "--workers", str(workers)]
    assert cli.main(["prepare", *common, "--input", str(raw), "--workspace", str(ws)]) == 0
    assert cli.main(["generate", *common, "--workspace", str(ws)]) == 0
    assert cli.main(["qc", *common, "--workspace", str(ws), "--output", str(out)]) == 0
    return out


def test_full_mock_pipeline_byte_identical(tmp_path):
    a = run_full(tmp_path / "a", 1)
    b = run_full(tmp_path / "b", 8)
    files = sorted(p.name for p in a.iterdir())
    assert {"corpus.jsonl", "queries.jsonl", "qrels.tsv", "split.tsv"} <= set(files)
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f
    read_bundle(a).validate()


def test_eval_oracle_run_scores_one(tmp_path, capsys):
    out = run_full(tmp_path, 4)
    bundle = read_bundle(out)
    runs = {q: RankedList.from_scores(q, {d: 1.0 for d, r in rels.items() if r})
            for q, rels in bundle.qrels_by_query().items()}
    write_run(runs, tmp_path / "oracle.run")
    capsys.readouterr()
    assert cli.main(["eval", "--bundle", str(out), "--run", str(tmp_path / "oracle.run"),
                     "--report", str(tmp_path / "rep.jsonl")]) == 0
    assert capsys.readouterr().out.startswith("nDCG@10      1.0000")
    last = json.loads((tmp_path / "rep.jsonl").read_text().splitlines()[-1])
    assert last["mean"] == 1.0


def test_bm25_and_rerank_eval(tmp_path, capsys):
    out = run_full(tmp_path, 2)
    cfgp = write_config(tmp_path / "cfg.json")
    idx, run = tmp_path / "bm25.idx", tmp_path / "bm25.run"
    assert cli.main(["bm25", "index", "--corpus", str(out / "corpus.jsonl"), "--index", str(idx)]) == 0
    assert cli.main(["bm25", "search", "--index", str(idx), "--queries", str(out / "queries.jsonl"),
                     "--run", str(run)]) == 0
    capsys.readouterr()
    assert cli.main(["rerank-eval", "--config", cfgp, "--bundle", str(out), "--run", str(run),
                     "--depth", "20", "--out", str(tmp_path / "rr.run")]) == 0
    assert capsys.readouterr().out.startswith("nDCG@10")
    assert (tmp_path / "rr.run").exists()


def test_consistency_ranks(capsys):
    a = ",".join(map(str, ref.HUMAN_RANKS))
    b = ",".join(map(str, ref.GEN_QC_RANKS))
    assert cli.main(["consistency", "--ranks-a", a, "--ranks-b", b]) == 0
    assert "rho = 0.8211" in capsys.readouterr().out


def test_consistency_scores(tmp_path, capsys):
    (tmp_path / "a.json").write_text(json.dumps(dict(zip(ref.MODELS, ref.HUMAN_NDCG))))
    (tmp_path / "b.json").write_text(json.dumps(dict(zip(ref.MODELS, ref.GEN_NOQC_NDCG))))
    assert cli.main(["consistency", "--scores-a", str(tmp_path / "a.json"),
                     "--scores-b", str(tmp_path / "b.json")]) == 0
    assert "rho = 0.6912" in capsys.readouterr().out


def test_diversity_and_similarity(tmp_path, capsys):
    cfgp = write_config(tmp_path / "cfg.json")
    write_queries([Query("a", "what is it?"), Query("b", "how to do it?")], tmp_path / "q.jsonl")
    assert cli.main(["diversity", "--config", cfgp, "--queries", str(tmp_path / "q.jsonl")]) == 0
    assert "what" in capsys.readouterr().out
    write_corpus(make_corpus(5, seed=1), tmp_path / "c1.jsonl")
    write_corpus(make_corpus(5, seed=2), tmp_path / "c2.jsonl")
    assert cli.main(["similarity", "--corpus", f"x={tmp_path / 'c1.jsonl'}",
                     "--corpus", f"y={tmp_path / 'c2.jsonl'}"]) == 0
    assert "1.0000" in capsys.readouterr().out


def test_dry_run_makes_no_provider_calls(tmp_path, monkeypatch):
    calls = []
    monkeypatch.setattr(cli, "build_providers", lambda *a, **k: calls.append(a))
    cfgp = write_config(tmp_path / "cfg.json", {"providers": MOCK_CONFIG["providers"]})
    write_corpus(make_corpus(10), tmp_path / "ws" / "corpus.jsonl")
    ws = str(tmp_path / "ws")
    assert cli.main(["generate", "--config", cfgp, "--workspace", ws, "--dry-run"]) == 0
    (tmp_path / "ws" / "candidates").mkdir()
    for f in ("queries.jsonl", "positives.jsonl", "hard_negatives.jsonl"):
        (tmp_path / "ws" / "candidates" / f).write_text("")
    (tmp_path / "ws" / "candidates" / "qrels.tsv").write_text("query-id\tcorpus-id\tscore\n")
    assert cli.main(["qc", "--config", cfgp, "--workspace", ws, "--dry-run"]) == 0
    assert calls == []


@pytest.mark.parametrize("argv,code", [
    (["consistency", "--ranks-a", "1,2,3"], 2),
    (["consistency", "--ranks-a", "1,1,2", "--ranks-b", "1,2,3"], 3),
    (["consistency", "--ranks-a", "1,2,x", "--ranks-b", "1,2,3"], 2),
    (["eval", "--bundle", "/nonexistent", "--run", "/nonexistent"], 3),
    (["prepare"], 2),
])
def test_exit_codes(argv, code):
    assert cli.main(argv) == code


def test_secret_in_config_rejected(tmp_path):
    bad = {"providers": {"chat": {"kind": "http", "api_key": "x"}}}
    assert cli.main(["generate", "--config", write_config(tmp_path / "c.json", bad)]) == 2


def test_provider_failure_exit_code(tmp_path, monkeypatch):
    from irsynth.pipeline import Providers
    from irsynth.providers import FailingProvider, SyntheticChat, TokenOverlapReranker

    cfgp = write_config(tmp_path / "cfg.json")
    ws = tmp_path / "ws"
    write_corpus(make_corpus(10), ws / "corpus.jsonl")
    assert cli.main(["generate", "--config", cfgp, "--workspace", str(ws)]) == 0
    monkeypatch.setattr(cli, "build_providers", lambda *a, **k: Providers(
        SyntheticChat(), FailingProvider(), [TokenOverlapReranker()]))
    assert cli.main(["qc", "--config", cfgp, "--workspace", str(ws)]) == 4


def test_integrity_exit_code(tmp_path):
    cfgp = write_config(tmp_path / "cfg.json")
    ws = tmp_path / "ws"
    write_corpus(make_corpus(3), ws / "corpus.jsonl")
    cand = ws / "candidates"
    cand.mkdir()
    write_queries([Query("q", "x", positive_doc_id="missing")], cand / "queries.jsonl")
    for f in ("positives.jsonl", "hard_negatives.jsonl"):
        (cand / f).write_text("")
    (cand / "qrels.tsv").write_text("query-id\tcorpus-id\tscore\n")
    assert cli.main(["qc", "--config", cfgp, "--workspace", str(ws)]) == 5


def test_effective_config_printed(capsys):
    cli.main(["consistency", "--ranks-a", "1,2,3", "--ranks-b", "3,2,1", "--seed", "9"])
    err = capsys.readouterr().err
    assert json.loads(err.splitlines()[0])["config"]["seed"] == 9


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as e:
        cli.main(["eval", "--no-such-flag"])
    assert e.value.code == 2
