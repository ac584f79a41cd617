"""N-gram counting over sentence-padded token lines."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .model import BOS, EOS, UNK


@dataclass
class CountsTable:
    order: int
    counts: list[Counter]

    def __getitem__(self, n: int) -> Counter:
        return self.counts[n - 1]


def _as_tokens(line) -> list[str]:
    tokens = line.split() if isinstance(line, str) else list(line)
    for tok in tokens:
        if not tok or any(ch.isspace() for ch in tok):
            raise ValueError(f"invalid token {tok!r}")
    return tokens


def count_ngrams(corpus: Iterable[Sequence[str] | str], order: int, add_unk: bool = False) -> CountsTable:
    """Count all 1..order-grams of ``<s> line </s>`` for each line.

    ``<s>`` is kept as a unigram for prefix closure but is never a
    prediction target. ``add_unk`` injects ``<unk>`` with count 1.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    counts = [Counter() for _ in range(order)]
    lines = 0
    for line in corpus:
        tokens = [BOS] + _as_tokens(line) + [EOS]
        lines += 1
        for end in range(1, len(tokens)):
            for n in range(1, order + 1):
                start = end - n + 1
                if start < 0:
                    break
                counts[n - 1][tuple(tokens[start:end + 1])] += 1
        counts[0][(BOS,)] += 1
    if lines == 0:
        raise ValueError("empty corpus")
    if add_unk and (UNK,) not in counts[0]:
        counts[0][(UNK,)] = 1
    return CountsTable(order, counts)


def read_corpus(path) -> list[list[str]]:
    """One sentence per line, whitespace-tokenized, upper-cased."""
    text = Path(path).read_text(encoding="utf-8")
    return [line.upper().split() for line in text.splitlines() if line.strip()]


def write_counts(counts: CountsTable, path) -> None:
    """``w1 .. wn<TAB>count`` lines, by order then lexicographically."""
    with open(path, "w", encoding="utf-8") as fh:
        for n in range(1, counts.order + 1):
            for key in sorted(counts[n]):
                fh.write(f"{' '.join(key)}\t{counts[n][key]}\n")


def read_counts(path) -> CountsTable:
    rows: list[tuple[tuple[str, ...], int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                ngram, count = line.rstrip("\n").split("\t")
                rows.append((tuple(ngram.split()), int(count)))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'ngram<TAB>count'") from None
    if not rows:
        raise ValueError(f"{path}: no counts")
    order = max(len(k) for k, _ in rows)
    counts = [Counter() for _ in range(order)]
    for key, c in rows:
        counts[len(key) - 1][key] = c
    return CountsTable(order, counts)
