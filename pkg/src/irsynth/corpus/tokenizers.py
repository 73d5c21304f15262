"""Deterministic text tokenizers.

A tokenizer maps text to an ordered token list and can also report the
character span of each token, which the chunker uses to cut windows out
of the original text without re-joining tokens.
"""

from __future__ import annotations

import re
from typing import Protocol

# CJK ideographs and kana become one token per character; everything else
# splits on whitespace and punctuation.
_CJK = r"\u3040-\u30ff\u3400-\u4dbf\u4e00-\u9fff\uf900-\ufaff"
_UNICODE_WORDS = re.compile(rf"[{_CJK}]|[^\W{_CJK}]+", re.UNICODE)
_WHITESPACE = re.compile(r"\S+")


class Tokenizer(Protocol):
    name: str

    def tokenize(self, text: str) -> list[str]: ...

    def spans(self, text: str) -> list[tuple[int, int]]: ...


class RegexTokenizer:
    def __init__(self, pattern: re.Pattern, name: str, lowercase: bool = False):
        self.pattern = pattern
        self.name = name
        self.lowercase = lowercase

    def tokenize(self, text: str) -> list[str]:
        toks = self.pattern.findall(text)
        if self.lowercase:
            toks = [t.lower() for t in toks]
        return toks

    def spans(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in self.pattern.finditer(text)]

    def __repr__(self):
        return f"RegexTokenizer(name={self.name!r}, lowercase={self.lowercase})"


def unicode_tokenizer(lowercase: bool = False) -> RegexTokenizer:
    """Word characters split on whitespace/punctuation; CJK per character."""
    name = "unicode-lower" if lowercase else "unicode"
    return RegexTokenizer(_UNICODE_WORDS, name, lowercase)


def whitespace_tokenizer(lowercase: bool = False) -> RegexTokenizer:
    name = "whitespace-lower" if lowercase else "whitespace"
    return RegexTokenizer(_WHITESPACE, name, lowercase)


_REGISTRY = {
    "unicode": lambda: unicode_tokenizer(False),
    "unicode-lower": lambda: unicode_tokenizer(True),
    "whitespace": lambda: whitespace_tokenizer(False),
    "whitespace-lower": lambda: whitespace_tokenizer(True),
}

DEFAULT_TOKENIZER = "unicode"


def get_tokenizer(name: str | Tokenizer | None = None) -> Tokenizer:
    if name is None:
        name = DEFAULT_TOKENIZER
    if not isinstance(name, str):
        return name
    try:
        return _REGISTRY[name]()
    except KeyError:
        from ..errors import ConfigError

        raise ConfigError(f"unknown tokenizer {name!r}; known: {sorted(_REGISTRY)}") from None


def count_tokens(text: str, tokenizer: Tokenizer | str | None = None) -> int:
    return len(get_tokenizer(tokenizer).tokenize(text))
