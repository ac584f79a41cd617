"""Interpolated Kneser-Ney estimation, emitted in backoff (ARPA) form."""

from __future__ import annotations

import logging
from collections import Counter

from .counts import CountsTable
from .model import BOS, NGramModel, log10_or_sentinel, ZERO_LOGPROB

log = logging.getLogger(__name__)

FALLBACK_DISCOUNT = 0.5


def modified_counts(counts: CountsTable) -> list[Counter]:
    """Raw counts at the top order, continuation counts below.

    An n-gram starting with ``<s>`` cannot be extended to the left and
    keeps its raw count; so does anything never seen with a left
    neighbour (an injected ``<unk>``).
    """
    top = counts.order
    out = [Counter(counts[top])]
    for n in range(top - 1, 0, -1):
        left = Counter()
        for key in counts[n + 1]:
            left[key[1:]] += 1
        cur = Counter()
        for key, raw in counts[n].items():
            if n == 1 and key == (BOS,):
                continue
            cur[key] = raw if key[0] == BOS or left[key] == 0 else left[key]
        out.insert(0, cur)
    if top == 1:
        out[0].pop((BOS,), None)
    return out


def estimate_discount(counts: Counter, n: int, warnings: list[str]) -> float:
    n1 = sum(1 for c in counts.values() if c == 1)
    n2 = sum(1 for c in counts.values() if c == 2)
    if n1 == 0 or n2 == 0:
        msg = f"order {n}: degenerate count-of-counts (n1={n1}, n2={n2}); using D={FALLBACK_DISCOUNT}"
        log.warning(msg)
        warnings.append(msg)
        return FALLBACK_DISCOUNT
    return n1 / (n1 + 2.0 * n2)


def train_kneser_ney(counts: CountsTable, discounts="estimate") -> NGramModel:
    """Interpolated KN with one absolute discount per order.

    ``discounts`` is "estimate", a single float, or one float per order.
    The lowest order interpolates with the uniform distribution over the
    predicted vocabulary (everything but ``<s>``).
    """
    order = counts.order
    mod = modified_counts(counts)
    warnings: list[str] = []
    if discounts == "estimate":
        ds = [estimate_discount(mod[n - 1], n, warnings) for n in range(1, order + 1)]
    elif isinstance(discounts, (int, float)):
        ds = [float(discounts)] * order
    else:
        ds = [float(d) for d in discounts]
        if len(ds) != order:
            raise ValueError(f"need {order} discounts, got {len(ds)}")

    entries: list[dict] = [dict() for _ in range(order)]
    model = NGramModel(order, entries, warnings)

    # unigrams
    vocab = sorted({k[0] for k in counts[1]} - {BOS})
    uni = mod[0]
    total = sum(uni[(w,)] for w in vocab)
    d = ds[0]
    gamma = d * sum(1 for w in vocab if uni[(w,)] > 0) / total
    for w in vocab:
        p = max(uni[(w,)] - d, 0.0) / total + gamma / len(vocab)
        entries[0][(w,)] = (log10_or_sentinel(p), None)
    entries[0][(BOS,)] = (ZERO_LOGPROB, None)

    for n in range(2, order + 1):
        table = mod[n - 1]
        d = ds[n - 1]
        totals: Counter = Counter()
        types: Counter = Counter()
        for key, c in table.items():
            totals[key[:-1]] += c
            if c > 0:
                types[key[:-1]] += 1
        lower = entries[n - 2]
        for ctx, tot in totals.items():
            lp = lower[ctx][0]
            lower[ctx] = (lp, log10_or_sentinel(d * types[ctx] / tot))
        for key, c in table.items():
            ctx = key[:-1]
            p = max(c - d, 0.0) / totals[ctx] + d * types[ctx] / totals[ctx] * model.prob(key[-1], ctx[1:])
            entries[n - 1][key] = (log10_or_sentinel(p), None)
    return model
