# %% [markdown]
# # Quality control
#
# Two passes. First, a query whose own positive is judged irrelevant is
# removed. Second, for each surviving query an embedding model recalls
# candidates, several rerankers vote on them, and an LLM labels the
# survivors; the label and the document's class decide the action.

# %%
from irsynth import CandidateSets, Document, Origin, Qrel, Query
from irsynth.prompts import load_templates
from irsynth.providers import ConstantReranker, FunctionChat, HashingEmbedder
from irsynth.qc import QCReport, correct_labels, filter_low_quality_queries

templates = load_templates()
seed = [Document(f"s{i}", f"seed passage number {i}") for i in range(6)]
cands = CandidateSets(
    queries=[Query("q", "what does the passage say", positive_doc_id="s0")],
    positives={"s0": seed[0]},
    pos_qrels={Qrel("q", "s0", 1)},
)
for j in range(3):
    d = Document(f"q-hn-{j}", f"misleading passage {j}", origin=Origin.HARD_NEGATIVE)
    cands.hard_negatives[d.id] = d
    cands.neg_qrels.add(Qrel("q", d.id, 0))

# %% [markdown]
# A scripted judge: the positive, one hard negative and one unlabeled
# seed passage are relevant (level 3); everything else is level 0.

# %%
relevant = {"seed passage number 0", "misleading passage 2", "seed passage number 4"}


def judge(prompt):
    return "3" if templates.parse("judge", prompt)["doc"] in relevant else "0"


report = QCReport()
kept = filter_low_quality_queries(cands, FunctionChat(judge), report=report)
fixed = correct_labels(kept, seed, HashingEmbedder(64), [ConstantReranker(1.0)],
                       FunctionChat(judge), report=report)

# %%
print("hard negatives:", sorted(cands.hard_negatives), "->", sorted(fixed.hard_negatives))
print("new positives:", sorted(r.doc_id for r in fixed.pos_qrels - cands.pos_qrels))
for rec in report.records:
    if rec["action"] != "skip":
        print(rec["action"], rec["doc_id"], rec["doc_class"], rec["llm_level"])
