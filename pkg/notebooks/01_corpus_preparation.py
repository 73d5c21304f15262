# %% [markdown]
# # Preparing a seed corpus
#
# QA datasets start from a length-filtered document collection; long-doc
# datasets are cut into overlapping windows. Both paths use the same
# deterministic tokenizer.

# %%
import numpy as np

from irsynth import Document, Task
from irsynth.corpus import chunk_long_document, corpus_stats, count_tokens, filter_documents
from irsynth.pipeline import prepare_corpus

rng = np.random.default_rng(0)
vocab = [f"term{i}" for i in range(300)]
raw = [Document(f"raw-{i}", " ".join(rng.choice(vocab, int(rng.integers(5, 400)))))
       for i in range(50)]
print("token counts:", [count_tokens(d.text) for d in raw[:8]], "...")

# %% [markdown]
# Filtering keeps documents within the configured token bounds. With the
# defaults (20 to 8192) the shortest documents are dropped.

# %%
kept = list(filter_documents(raw, min_tokens=20, max_tokens=8192))
st = corpus_stats(kept)
print(f"kept {st.doc_count}/{len(raw)} docs, mean length {st.avg_tokens:.1f} tokens")
print("histogram:", st.token_histogram)

# %% [markdown]
# Chunking: windows of 200 tokens with 50 tokens of overlap. Chunk text is
# sliced from the original string, so punctuation and spacing survive.

# %%
book = " ".join(f"w{i}," for i in range(500))
chunks = chunk_long_document(book, 200, 50, parent_id="book")
for c in chunks:
    print(c.id, c.source_meta["token_start"], c.source_meta["token_end"], c.text[:30], "...")

# %%
long_doc_corpus = prepare_corpus(raw[:5], Task.LONG_DOC)
print(len(long_doc_corpus), "chunks from 5 documents")
