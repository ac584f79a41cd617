"""Minimum-edit-distance alignment with csid counting."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

_PUNCT = re.compile(r"[^\w']+")


def normalize_text(text: str) -> list[str]:
    """Upper-case and drop punctuation, keeping apostrophes inside words."""
    tokens = []
    for raw in text.upper().split():
        tok = _PUNCT.sub("", raw).strip("'")
        if tok:
            tokens.append(tok)
    return tokens


@dataclass(frozen=True)
class AlignmentResult:
    pairs: tuple[tuple[str | None, str | None, str], ...]
    correct: int
    substitutions: int
    insertions: int
    deletions: int

    @property
    def csid(self) -> tuple[int, int, int, int]:
        return self.correct, self.substitutions, self.insertions, self.deletions

    @property
    def ref_len(self) -> int:
        return self.correct + self.substitutions + self.deletions

    @property
    def hyp_len(self) -> int:
        return self.correct + self.substitutions + self.insertions

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def pattern(self) -> str:
        return " ".join(label for _, _, label in self.pairs)


def align_transcripts(ref: Sequence[str], hyp: Sequence[str]) -> AlignmentResult:
    """Unit-cost Levenshtein alignment of word sequences.

    The backtrace runs from the end and prefers match, then substitution,
    then insertion, then deletion whenever costs tie.
    """
    ref, hyp = list(ref), list(hyp)
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i
    for j in range(1, m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ri = ref[i - 1]
        row, up = d[i], d[i - 1]
        for j in range(1, m + 1):
            diag = up[j - 1] + (0 if ri == hyp[j - 1] else 1)
            row[j] = min(diag, row[j - 1] + 1, up[j] + 1)

    pairs = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and d[i][j] == d[i - 1][j - 1]:
            pairs.append((ref[i - 1], hyp[j - 1], "C"))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + 1:
            pairs.append((ref[i - 1], hyp[j - 1], "S"))
            i, j = i - 1, j - 1
        elif j > 0 and d[i][j] == d[i][j - 1] + 1:
            pairs.append((None, hyp[j - 1], "I"))
            j -= 1
        else:
            pairs.append((ref[i - 1], None, "D"))
            i -= 1
    pairs.reverse()
    counts = {label: 0 for label in "CSID"}
    for _, _, label in pairs:
        counts[label] += 1
    return AlignmentResult(tuple(pairs), counts["C"], counts["S"], counts["I"], counts["D"])


def format_alignment(result: AlignmentResult) -> str:
    """Three aligned rows (REF, HYP, pattern), gaps shown as ***."""
    cols = []
    for r, h, label in result.pairs:
        r, h = r or "***", h or "***"
        width = max(len(r), len(h), 1)
        cols.append((r.ljust(width), h.ljust(width), label.ljust(width)))
    return "\n".join([
        "REF: " + " ".join(c[0] for c in cols),
        "HYP: " + " ".join(c[1] for c in cols),
        "     " + " ".join(c[2] for c in cols),
    ])
