"""Pronunciation lexicon: ``WORD ph1 ph2 ...`` per line."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

SILENCE = "SIL"


class LexiconError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class Lexicon:
    entries: dict[str, list[tuple[str, ...]]]
    silence: str = SILENCE
    warnings: list[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        for word, prons in self.entries.items():
            if not prons or any(len(p) == 0 for p in prons):
                raise LexiconError(f"word {word!r} has an empty pronunciation")

    @property
    def phones(self) -> list[str]:
        """Phone inventory, silence included, sorted."""
        inventory = {ph for prons in self.entries.values() for pron in prons for ph in pron}
        inventory.add(self.silence)
        return sorted(inventory)

    @property
    def words(self) -> list[str]:
        return sorted(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def pronunciations(self, word: str) -> list[tuple[str, ...]]:
        return self.entries[word]

    def to_text(self) -> str:
        return "".join(f"{w} {' '.join(p)}\n" for w in self.words for p in self.entries[w])


def parse_lexicon(text: str, silence: str = SILENCE) -> Lexicon:
    entries: dict[str, list[tuple[str, ...]]] = {}
    warnings = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) == 1:
            raise LexiconError(f"word {fields[0]!r} has an empty pronunciation", lineno)
        word, pron = fields[0], tuple(fields[1:])
        prons = entries.setdefault(word, [])
        if pron in prons:
            msg = f"line {lineno}: duplicate pronunciation for {word!r} dropped"
            log.warning(msg)
            warnings.append(msg)
            continue
        prons.append(pron)
    return Lexicon(entries, silence, warnings)


def read_lexicon(path, silence: str = SILENCE) -> Lexicon:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"), silence)
