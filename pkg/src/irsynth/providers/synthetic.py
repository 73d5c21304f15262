"""A rule-based stand-in for a chat model.

``SyntheticChat`` recognizes which template produced a prompt and answers
with text derived from the prompt content and a stable hash, so whole
pipeline runs are reproducible offline. Replies are pure functions of the
prompt, which keeps results independent of call order and thread count.
"""

from __future__ import annotations


from ..corpus.tokenizers import unicode_tokenizer
from ..prompts import TemplateSet, load_templates
from .mock import _Counting, stable_hash

_tok = unicode_tokenizer(lowercase=True)

_ROLES = ("student", "engineer", "journalist", "nurse", "lawyer", "teacher", "analyst",
          "researcher", "hobbyist", "manager")
_FILLER = ("regarding", "about", "concerning", "info", "details", "on", "the", "some",
           "explain", "tell")
_NOISE = ("alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "zeta", "theta", "lambda")
_STOP = frozenset("a an the of to and or in on for is are was were be by with as at it this that"
                  " from".split())
_LENGTH_WORDS = {"less than 5": 4, "between 5 and 9": 7, "between 10 and 20": 14, "at least 20": 22}


def _content_words(text: str) -> list[str]:
    return [w for w in _tok.tokenize(text) if w not in _STOP and not w.isdigit()]


def _pick(words: list[str], n: int, key: str) -> list[str]:
    if not words:
        return []
    start = stable_hash(key) % len(words)
    return [words[(start + 3 * i) % len(words)] for i in range(n)]


class SyntheticChat(_Counting):
    """Deterministic fake LLM covering every bundled template.

    ``noise_rate`` is the fraction of (query, doc) judgments flipped to
    "superficially relevant", which makes some generated queries fail the
    quality filter.
    """

    def __init__(self, templates: TemplateSet | None = None, noise_rate: float = 0.1):
        super().__init__()
        self.templates = templates or load_templates()
        self.noise_rate = noise_rate

    def chat_complete(self, prompt, temperature=None, max_tokens=None):
        self._tick()
        name = self.templates.identify(prompt)
        slots = self.templates.parse(name, prompt) if name else None
        if slots is None:
            return ""
        return getattr(self, f"_{name}")(slots)

    def _characters(self, s):
        h = stable_hash("chars", s["doc"])
        roles = [_ROLES[(h + 3 * i) % len(_ROLES)] for i in range(3)]
        return "```\n" + "\n".join(f"- a {r} reading about this topic" for r in roles) + "\n```"

    def _scenario(self, s):
        words = _pick(_content_words(s["doc"]), 3, "scn" + s["character"] + s["doc"])
        return f"```\n{s['character']} needs to understand {' '.join(words)} for work.\n```"

    def _query(self, s):
        n = next((v for k, v in _LENGTH_WORDS.items() if s["length"].startswith(k)), 7)
        words = _pick(_content_words(s["doc"]), n, "q" + s["scenario"] + s["doc"])
        if s["type"].startswith("a question"):
            return "```\nwhat " + " ".join(words[:-1] or words) + "?\n```"
        return "```\n" + " ".join(words) + "\n```"

    def _rewrite(self, s):
        words = _tok.tokenize(s["query"])
        h = stable_hash("rw", s["query"], s["style"])
        # drop every other word and pad with filler to lower overlap with the document
        kept = [w for i, w in enumerate(words) if (i + h) % 2 == 0] or words[:1]
        pad = [_FILLER[(h + i) % len(_FILLER)] for i in range(max(1, len(words) - len(kept)))]
        return "```\n" + " ".join(kept + pad) + "\n```"

    def _hard_negatives(self, s):
        n = int(s["n"])
        words = _content_words(s["doc"])
        lines = []
        for j in range(n):
            key = f"hn{j}" + s["query"]
            # topical but mostly off-target: a few document words among noise
            mix = _pick(words, max(3, len(words) // 6), key)
            noise = [f"{_NOISE[(stable_hash(key) + i) % len(_NOISE)]}{j}" for i in range(8)]
            lines.append(" ".join(noise[:4] + mix + noise[4:]))
        return "```\n" + "\n".join(lines) + "\n```"

    def _judge(self, s):
        q = set(_content_words(s["query"]))
        d = set(_content_words(s["doc"]))
        frac = len(q & d) / len(q) if q else 0.0
        if frac >= 0.5:
            level = 3
        elif frac >= 0.3:
            level = 2
        elif frac >= 0.15:
            level = 1
        else:
            level = 0
        if level >= 2 and (stable_hash("noise", s["query"], s["doc"]) % 1000) < self.noise_rate * 1000:
            level = 1
        return str(level)

    def _label_type(self, s):
        first = (_tok.tokenize(s["query"]) or ["others"])[0]
        if first in ("how", "what", "when", "where", "which", "who", "why"):
            return first
        if first in ("is", "are", "does", "do", "can", "was"):
            return "yes/no"
        return "claim" if not s["query"].rstrip().endswith("?") else "others"

    def _label_style(self, s):
        styles = ("formal", "informal", "professional", "casual", "complicated", "concise",
                  "academic")
        return styles[stable_hash("style", s["query"]) % len(styles)]


