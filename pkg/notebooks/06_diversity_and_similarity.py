# %% [markdown]
# # Query diversity and corpus similarity
#
# Query types and styles are labeled by an LLM with a fixed label set;
# corpora are compared with weighted Jaccard over token frequencies.

# %%
from irsynth import Query
from irsynth.eval import label_query_diversity, parse_label, similarity_matrix
from irsynth.providers import SyntheticChat

queries = [Query("a", "what causes tides?"), Query("b", "how do I reset the router?"),
           Query("c", "is coffee bad for sleep?"), Query("d", "solar panels lose efficiency in heat"),
           Query("e", "why is the sky blue?")]
types = label_query_diversity(queries, SyntheticChat(), "type", workers=2)
print({k: f"{v:.0%}" for k, v in types.distribution().items() if v})

# %% [markdown]
# Free-text replies are normalized; anything outside the label set falls
# into `others`.

# %%
for reply in ("What", "yes or no", "The style is formal.", "hmm, hard to say"):
    print(repr(reply), "->", parse_label(reply, "type"), "/", parse_label(reply, "style"))

# %%
corpora = {
    "news": ["stocks fell as markets reacted", "the central bank raised rates"],
    "finance": ["rates and markets move together", "the bank reported earnings"],
    "cooking": ["simmer the onions in butter", "add salt and pepper to taste"],
}
for a, row in similarity_matrix(corpora).items():
    print(f"{a:<8}", "  ".join(f"{row[b]:.3f}" for b in corpora))
