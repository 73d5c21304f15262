"""Prompt templates and reply parsing.

Templates are plain-text files with ``{{placeholder}}`` slots, listed in
``templates/manifest.json`` together with a version string. A different
template directory with the same manifest layout can be supplied.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .errors import ConfigError, ReplyParseError

TEMPLATE_DIR = Path(__file__).with_name("templates")
_SLOT = re.compile(r"\{\{\s*(\w+)\s*\}\}")
_FENCE = re.compile(r"```[^\n`]*\n(.*?)(?:```|'''|$)", re.DOTALL)
_BULLET = re.compile(r"^\s*(?:[-*•]|\d+[.)]|\(\d+\))\s+")


@dataclass(frozen=True)
class TemplateSet:
    version: str
    templates: dict[str, str]

    def render(self, name: str, **slots) -> str:
        try:
            text = self.templates[name]
        except KeyError:
            raise ConfigError(f"no template named {name!r}") from None

        def sub(m):
            key = m.group(1)
            if key not in slots:
                raise ConfigError(f"template {name!r} needs slot {key!r}")
            return str(slots[key])

        return _SLOT.sub(sub, text)

    def slots(self, name: str) -> set[str]:
        return set(_SLOT.findall(self.templates[name]))

    def parse(self, name: str, prompt: str) -> dict[str, str] | None:
        """Recover slot values from a prompt rendered with template ``name``."""
        text = self.templates[name]
        pieces = _SLOT.split(text)
        pattern = ""
        seen = set()
        for i, piece in enumerate(pieces):
            if i % 2 == 0:
                pattern += re.escape(piece)
            elif piece in seen:
                pattern += f"(?P={piece})"
            else:
                seen.add(piece)
                pattern += f"(?P<{piece}>.*?)"
        m = re.fullmatch(pattern, prompt, re.DOTALL)
        return m.groupdict() if m else None

    def identify(self, prompt: str) -> str | None:
        """Name of the template that rendered ``prompt`` (matched on its fixed prefix)."""
        best = None
        for name, text in self.templates.items():
            prefix = _SLOT.split(text, maxsplit=1)[0]
            if prompt.startswith(prefix) and (best is None or len(prefix) > best[1]):
                best = (name, len(prefix))
        return best[0] if best else None


def load_templates(directory: str | Path | None = None) -> TemplateSet:
    directory = Path(directory) if directory is not None else TEMPLATE_DIR
    return _load(str(directory.resolve()))


@lru_cache(maxsize=8)
def _load(directory: str) -> TemplateSet:
    root = Path(directory)
    try:
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"template manifest missing in {root}") from None
    templates = {
        name: (root / fname).read_text(encoding="utf-8").rstrip("\n")
        for name, fname in manifest["templates"].items()
    }
    return TemplateSet(str(manifest.get("version", "0")), templates)


def extract_block(reply: str) -> str:
    """Return the first fenced block of ``reply``, or the whole reply if none."""
    if reply is None:
        return ""
    m = _FENCE.search(reply)
    return (m.group(1) if m else reply).strip()


def parse_lines(reply: str) -> list[str]:
    """Non-empty lines of the fenced block, with list bullets stripped."""
    lines = []
    for line in extract_block(reply).splitlines():
        line = _BULLET.sub("", line).strip()
        if line:
            lines.append(line)
    if not lines:
        raise ReplyParseError("reply contains no items")
    return lines


def parse_single(reply: str) -> str:
    """The fenced block collapsed to one line of text."""
    text = " ".join(extract_block(reply).split())
    text = text.strip("\"'")
    if not text:
        raise ReplyParseError("reply is empty")
    return text
