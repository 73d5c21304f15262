import time
from collections import Counter

import numpy as np
import pytest

from irsynth import Document, Task
from irsynth.errors import ConfigError, GenerationError, ProviderError
from irsynth.generator import (
    GenerationConfig,
    attribute_probabilities,
    generate_characters,
    generate_hard_negatives,
    generate_query,
    generate_scenario,
    iteration_rng,
    positive_schedule,
    read_candidates,
    rewrite_query,
    run_generation_loop,
    sample_attributes,
    token_jaccard,
    write_candidates,
)
from irsynth.prompts import load_templates
from irsynth.providers import FunctionChat, ScriptedChat, SyntheticChat
from irsynth.records import (
    InfoType,
    LengthBucket,
    Origin,
    QueryAttributes,
    QueryType,
    Style,
)

from conftest import make_corpus

DOC = Document("d1", "the mitochondria is the powerhouse of the cell and makes energy")


# -- attribute sampling -------------------------------------------------------

def test_exact_length_probabilities_without_claims():
    cfg = GenerationConfig(type_ratio=(1, 1, 0))
    p = attribute_probabilities(cfg)["length"]
    assert p == pytest.approx({"under_5": 0.125, "5_to_9": 0.5, "10_to_20": 0.25, "over_20": 0.125})


def test_exact_length_probabilities_with_claim_redraw():
    # P(claim) = 1/5, renormalized long buckets 2/3 and 1/3
    p = attribute_probabilities(GenerationConfig())["length"]
    assert p["under_5"] == pytest.approx(0.8 * 0.125)
    assert p["5_to_9"] == pytest.approx(0.8 * 0.5)
    assert p["10_to_20"] == pytest.approx(0.8 * 0.25 + 0.2 * 2 / 3)
    assert p["over_20"] == pytest.approx(0.8 * 0.125 + 0.2 * 1 / 3)
    assert sum(p.values()) == pytest.approx(1.0)


def test_degenerate_weights_always_pick_one():
    cfg = GenerationConfig(length_ratio=(0, 0, 0, 1), type_ratio=(0, 0, 1), info_ratio=(1, 0),
                           style_ratio=(0, 0, 0, 0, 0, 0, 1))
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = sample_attributes(cfg, rng)
        assert a == QueryAttributes(LengthBucket.OVER_20, QueryType.CLAIM, InfoType.OVERALL,
                                    Style.ACADEMIC)


def test_sampling_reproducible():
    cfg = GenerationConfig()
    a = [sample_attributes(cfg, iteration_rng(5, i)) for i in range(50)]
    b = [sample_attributes(cfg, iteration_rng(5, i)) for i in range(50)]
    assert a == b


@pytest.mark.parametrize("bad", [
    dict(length_ratio=(1, 1, 1)),
    dict(style_ratio=(0,) * 7),
    dict(info_ratio=(-1, 2)),
    dict(length_ratio=(1, 1, 0, 0)),  # claims with no long bucket
    dict(hard_negative_range=(5, 2)),
    dict(rewrite_overlap_threshold=1.5),
    dict(n_queries=0),
    dict(task=Task.LONG_DOC, type_ratio=(1, 1, 1)),
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        GenerationConfig(**bad)


def test_config_round_trip():
    cfg = GenerationConfig(n_queries=7, rng_seed=3, hard_negative_range=(2, 4))
    assert GenerationConfig.from_dict(cfg.to_dict()) == cfg


def test_long_doc_defaults():
    cfg = GenerationConfig(task=Task.LONG_DOC)
    assert cfg.hard_negative_range == (0, 0)
    assert attribute_probabilities(cfg)["type"]["problem"] == 0


def test_distribution_100k_within_tolerance():
    cfg = GenerationConfig()
    exact = attribute_probabilities(cfg)
    rng = np.random.default_rng(12345)
    t0 = time.perf_counter()
    draws = [sample_attributes(cfg, rng) for _ in range(100_000)]
    assert time.perf_counter() - t0 < 5
    counts = {k: Counter() for k in exact}
    for a in draws:
        for k, v in a.to_dict().items():
            counts[k][v] += 1
        assert not (a.query_type is QueryType.CLAIM
                    and a.length_bucket in (LengthBucket.UNDER_5, LengthBucket.FROM_5_TO_9))
    for facet, probs in exact.items():
        for cat, p in probs.items():
            assert abs(counts[facet][cat] / 1e5 - p) <= 0.015, (facet, cat)


def test_claim_in_short_bucket_rejected():
    with pytest.raises(ConfigError):
        QueryAttributes(LengthBucket.UNDER_5, QueryType.CLAIM, InfoType.OVERALL, Style.CASUAL)


# -- single steps --------------------------------------------------------------

def test_generate_characters_parses_lines():
    chat = ScriptedChat(["```\n- a biology student\n- a nurse\n\n- a coach\n```"])
    assert generate_characters(DOC, chat) == ["a biology student", "a nurse", "a coach"]
    assert DOC.text in chat.prompts[0]


def test_scenario_and_query_prompts_carry_slots():
    t = load_templates()
    chat = ScriptedChat(["```\nstudying for an exam\n```", "```\nwhat powers the cell?\n```"])
    assert generate_scenario(DOC, "a student", chat) == "studying for an exam"
    attrs = QueryAttributes(LengthBucket.FROM_5_TO_9, QueryType.QUESTION, InfoType.PARTIAL,
                            Style.CASUAL)
    assert generate_query(DOC, "a student", "studying", attrs, chat) == "what powers the cell?"
    slots = t.parse("query", chat.prompts[1])
    assert slots["character"] == "a student" and slots["scenario"] == "studying"
    assert "5 and 9" in slots["length"]


def test_generate_query_long_doc_rejects_problem():
    attrs = QueryAttributes(LengthBucket.FROM_5_TO_9, QueryType.PROBLEM, InfoType.PARTIAL,
                            Style.CASUAL)
    with pytest.raises(ConfigError):
        generate_query(DOC, "c", "s", attrs, ScriptedChat(["x"]), task=Task.LONG_DOC)


def test_rewrite_threshold_one_accepts_first():
    chat = ScriptedChat(["the mitochondria powerhouse cell", "never used"])
    cfg = GenerationConfig(rewrite_overlap_threshold=1.0)
    r = rewrite_query("mitochondria energy", DOC, Style.CASUAL, chat, cfg)
    assert chat.calls == 1
    assert r.history == ("mitochondria energy", "the mitochondria powerhouse cell")


def test_rewrite_disjoint_vocabulary_stops_after_one():
    chat = ScriptedChat(["zebra xylophone quartz"])
    r = rewrite_query("mitochondria energy cell", DOC, Style.FORMAL, chat)
    assert chat.calls == 1 and r.overlap == 0.0 and r.final == "zebra xylophone quartz"


def test_rewrite_runs_all_iterations_when_overlap_stays_high():
    # each rewrite keeps most document words, so overlap stays above 0.3
    replies = ["the mitochondria is the powerhouse of the cell",
               "mitochondria is the powerhouse of the cell and makes energy",
               "the powerhouse of the cell makes energy"]
    chat = ScriptedChat(replies)
    cfg = GenerationConfig(rewrite_overlap_threshold=0.3)
    r = rewrite_query("mitochondria cell", DOC, Style.CASUAL, chat, cfg)
    assert chat.calls == 3
    assert r.history == ("mitochondria cell", *replies)
    assert r.overlap == pytest.approx(token_jaccard(replies[-1], DOC.text))
    assert "mitochondria is the powerhouse" in chat.prompts[2]  # rewrites the latest


def test_rewrite_empty_replies_fall_back():
    r = rewrite_query("q text", DOC, Style.CASUAL, ScriptedChat(["", "  ", "```\n```"]))
    assert r.fell_back and r.final == "q text" and r.history == ("q text",)
    with pytest.raises(GenerationError):
        rewrite_query("  ", DOC, Style.CASUAL, ScriptedChat([]))


def test_token_jaccard():
    assert token_jaccard("A b", "b a") == 1.0
    assert token_jaccard("a b", "c d") == 0.0
    assert token_jaccard("a b c", "b c d") == pytest.approx(0.5)


def test_hard_negatives_long_doc_empty():
    chat = ScriptedChat([])
    b = generate_hard_negatives("q", DOC, chat, GenerationConfig(task=Task.LONG_DOC),
                                np.random.default_rng(0))
    assert len(b) == 0 and chat.calls == 0


def test_hard_negatives_fixed_count_ids():
    chat = ScriptedChat(["```\nneg one\nneg two\nneg three\n```"])
    cfg = GenerationConfig(hard_negative_range=(3, 3))
    b = generate_hard_negatives("q", DOC, chat, cfg, np.random.default_rng(0), "q")
    assert [d.id for d in b] == ["q-hn-0", "q-hn-1", "q-hn-2"]
    assert all(d.origin is Origin.HARD_NEGATIVE for d in b)
    assert b.shortfall == 0


def test_hard_negatives_shortfall_and_dedup():
    chat = ScriptedChat(["```\nneg one\nneg one\n" + DOC.text + "\n```"])
    cfg = GenerationConfig(hard_negative_range=(3, 3))
    b = generate_hard_negatives("q", DOC, chat, cfg, np.random.default_rng(0), "q")
    assert [d.text for d in b] == ["neg one"] and b.shortfall == 2


def test_hard_negative_count_uniform():
    cfg = GenerationConfig()
    seen = Counter()
    chat = FunctionChat(lambda p: "x")
    rng = np.random.default_rng(9)
    # the requested count is what the rng decides; parse shortfall does not matter
    for _ in range(10_000):
        seen[generate_hard_negatives("q", DOC, chat, cfg, rng).requested] += 1
    assert set(seen) == {3, 4, 5, 6, 7}
    for v in seen.values():
        assert abs(v / 10_000 - 0.2) < 0.015


# -- loop -----------------------------------------------------------------------

def test_positive_schedule():
    s = positive_schedule(10, 10, 0)
    assert sorted(s) == list(range(10))
    s2 = positive_schedule(3, 8, 0)
    assert sorted(s2[:3]) == [0, 1, 2] and all(0 <= i < 3 for i in s2)
    assert positive_schedule(3, 8, 0) == s2


def test_single_iteration_bookkeeping():
    cfg = GenerationConfig(n_queries=1, hard_negative_range=(3, 3))
    cands = run_generation_loop([DOC], cfg, SyntheticChat())
    (q,) = cands.queries
    assert q.id == "q-0" and q.positive_doc_id == "d1"
    assert list(cands.positives) == ["d1"]
    assert {r.doc_id for r in cands.neg_qrels} == set(cands.hard_negatives)
    assert len(cands.hard_negatives) == 3
    assert cands.qrels_for("q-0") == {"d1": 1, "q-0-hn-0": 0, "q-0-hn-1": 0, "q-0-hn-2": 0}


def test_loop_skips_failed_iterations():
    def fn(prompt):
        raise ProviderError("down")
    cands = run_generation_loop([DOC], GenerationConfig(n_queries=2), FunctionChat(fn))
    assert cands.queries == [] and [i for i, _ in cands.skipped] == [0, 1]


def test_loop_workers_and_reruns_identical(tmp_path):
    corpus = make_corpus(40)
    cfg = GenerationConfig(n_queries=30, rng_seed=4)
    outs = []
    for workers in (1, 8, 8):
        d = tmp_path / f"w{workers}-{len(outs)}"
        d.mkdir()
        write_candidates(run_generation_loop(corpus, cfg, SyntheticChat(), workers=workers), d)
        outs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outs[0] == outs[1] == outs[2]


def test_candidates_round_trip(tmp_path):
    cands = run_generation_loop(make_corpus(10), GenerationConfig(n_queries=5), SyntheticChat())
    write_candidates(cands, tmp_path, template_version="1.0")
    back = read_candidates(tmp_path)
    assert back.queries == cands.queries
    assert back.positives == cands.positives and back.hard_negatives == cands.hard_negatives
    assert back.pos_qrels == cands.pos_qrels and back.neg_qrels == cands.neg_qrels


def test_different_seeds_differ():
    corpus = make_corpus(20)
    a = run_generation_loop(corpus, GenerationConfig(n_queries=5, rng_seed=1), SyntheticChat())
    b = run_generation_loop(corpus, GenerationConfig(n_queries=5, rng_seed=2), SyntheticChat())
    assert [q.text for q in a.queries] != [q.text for q in b.queries]
