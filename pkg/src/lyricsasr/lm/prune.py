"""Relative-entropy pruning of backoff n-gram models."""

from __future__ import annotations

import math

from .model import BOS, NGramModel, backoff_weight, children_index, prob_from_log10, recompute_backoffs


def history_prob(model: NGramModel, history: tuple[str, ...]) -> float:
    """Chain-rule probability of a history; a leading ``<s>`` counts as 1."""
    p = 1.0
    for i, w in enumerate(history):
        if i == 0 and w == BOS:
            continue
        p *= model.prob(w, history[:i])
    return p


def entropy_increase(model: NGramModel, key: tuple[str, ...], kids: list[str],
                     mass: tuple[float, float] | None = None) -> float:
    """Weighted KL divergence (nats) caused by dropping ``key`` from ``model``.

    ``kids`` lists every word currently listed after ``key[:-1]``;
    ``mass`` is the context's precomputed (numerator, denominator).
    """
    h, w = key[:-1], key[-1]
    p = prob_from_log10(model.entries[len(key) - 1][key][0])
    p_low = model.prob(w, h[1:])
    num, den = mass if mass is not None else backoff_weight(model, h, kids)
    new_num, new_den = num + p, den + p_low
    if p <= 0.0:
        return 0.0
    new_bow = new_num / new_den if new_den > 0 else 0.0
    if new_bow <= 0.0 or p_low <= 0.0:
        return math.inf
    delta = p * (math.log(p) - math.log(new_bow * p_low))
    if num > 1e-15 and den > 1e-15:
        delta += num * (math.log(num / den) - math.log(new_bow))
    return history_prob(model, h) * delta


def prune_entropy(model: NGramModel, theta: float) -> NGramModel:
    """Remove n-grams (n >= 2) whose removal raises perplexity by less than
    a relative ``theta``; highest order first, backoffs recomputed after
    each order. N-grams that prefix a surviving longer n-gram are kept."""
    if model.order < 2:
        raise ValueError("pruning needs a model of order >= 2")
    if theta < 0:
        raise ValueError("theta must be non-negative")
    pruned = NGramModel(model.order, [dict(e) for e in model.entries])
    for n in range(model.order, 1, -1):
        kids = children_index(pruned, n)
        prefixes = set()
        if n < model.order:
            prefixes = {key[:-1] for key in pruned.entries[n]}
        masses = {h: backoff_weight(pruned, h, words) for h, words in kids.items()}
        doomed = []
        for key in pruned.entries[n - 1]:
            if key in prefixes:
                continue
            if math.isinf(theta):
                doomed.append(key)
                continue
            delta = entropy_increase(pruned, key, kids[key[:-1]], masses[key[:-1]])
            change = math.expm1(max(delta, 0.0)) if delta != math.inf else math.inf
            if change < theta:
                doomed.append(key)
        if not doomed:
            continue
        for key in doomed:
            del pruned.entries[n - 1][key]
        recompute_backoffs(pruned)
    return pruned
