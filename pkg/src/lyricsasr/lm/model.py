"""Backoff n-gram model held as per-order maps, queried in log10."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
ZERO_LOGPROB = -99.0


def log10_or_sentinel(p: float) -> float:
    if p <= 0.0:
        return ZERO_LOGPROB
    return max(math.log10(p), ZERO_LOGPROB)


def prob_from_log10(lp: float) -> float:
    return 0.0 if lp <= ZERO_LOGPROB else 10.0 ** lp


@dataclass
class NGramModel:
    """``entries[n-1]`` maps an n-tuple to ``(log10 prob, log10 backoff or None)``."""

    order: int
    entries: list[dict[tuple[str, ...], tuple[float, float | None]]]
    warnings: list[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        if self.order < 1 or len(self.entries) != self.order:
            raise ValueError(f"order {self.order} does not match {len(self.entries)} entry maps")

    @property
    def vocabulary(self) -> set[str]:
        return {key[0] for key in self.entries[0]}

    @property
    def predicted_vocabulary(self) -> list[str]:
        return sorted(w for w in self.vocabulary if w != BOS)

    def __contains__(self, word: str) -> bool:
        return (word,) in self.entries[0]

    def counts(self) -> list[int]:
        return [len(e) for e in self.entries]

    def same_as(self, other: "NGramModel") -> bool:
        return self.order == other.order and self.entries == other.entries

    def logprob(self, word: str, history: Sequence[str] = ()) -> float:
        """log10 p(word | history) under the standard backoff recursion."""
        history = tuple(history)
        keep = self.order - 1
        history = history[len(history) - keep:] if 0 < keep < len(history) else (history if keep else ())
        acc = 0.0
        while True:
            hit = self.entries[len(history)].get(history + (word,))
            if hit is not None:
                return acc + hit[0]
            if not history:
                return -math.inf
            ctx = self.entries[len(history) - 1].get(history)
            if ctx is not None and ctx[1] is not None:
                acc += ctx[1]
            history = history[1:]

    def prob(self, word: str, history: Sequence[str] = ()) -> float:
        lp = self.logprob(word, history)
        return 0.0 if lp <= ZERO_LOGPROB else 10.0 ** lp

    def sentence_logprob(self, words: Sequence[str]) -> float:
        """log10 probability of ``<s> words </s>`` (words must be in vocabulary)."""
        history = [BOS]
        total = 0.0
        for w in list(words) + [EOS]:
            total += self.logprob(w, history)
            history.append(w)
        return total

    def contexts(self) -> Iterable[tuple[str, ...]]:
        """Every history a prediction can be made from: () plus listed
        lower-order n-grams that do not end in </s>."""
        yield ()
        for n in range(1, self.order):
            for key in self.entries[n - 1]:
                if key[-1] != EOS:
                    yield key

    def truncate(self, order: int) -> "NGramModel":
        """Drop sections above ``order``; backoffs renormalized for the new top."""
        if order >= self.order:
            return NGramModel(self.order, [dict(e) for e in self.entries])
        entries = [dict(e) for e in self.entries[:order]]
        entries[-1] = {k: (lp, None) for k, (lp, _) in entries[-1].items()}
        model = NGramModel(order, entries)
        recompute_backoffs(model)
        return model


def children_index(model: NGramModel, n: int) -> dict[tuple[str, ...], list[str]]:
    """Map each (n-1)-gram context to the words listed after it at order n."""
    index: dict[tuple[str, ...], list[str]] = {}
    for key in model.entries[n - 1]:
        index.setdefault(key[:-1], []).append(key[-1])
    return index


def backoff_weight(model: NGramModel, context: tuple[str, ...], words: Iterable[str],
                   skip: str | None = None) -> tuple[float, float]:
    """Left-over mass (numerator, denominator) for ``context``.

    numerator = 1 - sum of listed p(w | context); denominator = same sum
    under the shortened context. ``skip`` leaves one listed word out.
    """
    n = len(context) + 1
    table = model.entries[n - 1]
    num, den = 1.0, 1.0
    for w in words:
        if w == skip:
            continue
        num -= prob_from_log10(table[context + (w,)][0])
        den -= model.prob(w, context[1:])
    return num, den


def _log_ratio(num: float, den: float) -> float:
    if den <= 1e-15 or num <= 1e-15:
        # no mass left to hand down: the context is closed
        return 0.0 if den <= 1e-15 else ZERO_LOGPROB
    return math.log10(num / den)


def recompute_backoffs(model: NGramModel) -> None:
    """Reset every backoff so each context normalizes, lowest order first."""
    for n in range(1, model.order):
        kids = children_index(model, n + 1)
        table = model.entries[n - 1]
        for key, (lp, _) in list(table.items()):
            table[key] = (lp, None)
        for ctx, words in kids.items():
            lp = table[ctx][0]
            num, den = backoff_weight(model, ctx, words)
            table[ctx] = (lp, _log_ratio(num, den))


def normalization_error(model: NGramModel) -> float:
    """Largest |sum_w p(w|h) - 1| over every context of ``model``."""
    vocab = model.predicted_vocabulary
    worst = 0.0
    for ctx in model.contexts():
        total = sum(model.prob(w, ctx) for w in vocab)
        worst = max(worst, abs(total - 1.0))
    return worst
