"""Static linear interpolation, perplexity and interpolation-weight search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import BOS, EOS, UNK, NGramModel, ZERO_LOGPROB, log10_or_sentinel, recompute_backoffs


@dataclass(frozen=True)
class InterpolationConfig:
    weight: float = 0.5
    grid_step: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("interpolation weight must lie in [0, 1]")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")


def _p(model: NGramModel, word: str, history) -> float:
    return model.prob(word, history) if word in model else 0.0


def interpolate(a: NGramModel, b: NGramModel, cfg: InterpolationConfig | float) -> NGramModel:
    """Merge ``a`` and ``b`` into one backoff model with weight on ``a``.

    Every n-gram listed in either model gets the mixed probability; all
    backoff weights are then recomputed so each context normalizes.
    """
    lam = cfg.weight if isinstance(cfg, InterpolationConfig) else float(cfg)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("interpolation weight must lie in [0, 1]")
    if a.order != b.order:
        raise ValueError(f"order mismatch: {a.order} vs {b.order}")
    entries = []
    for n in range(1, a.order + 1):
        keys = set(a.entries[n - 1]) | set(b.entries[n - 1])
        table = {}
        for key in keys:
            if key == (BOS,):
                table[key] = (ZERO_LOGPROB, None)
                continue
            w, h = key[-1], key[:-1]
            p = lam * _p(a, w, h) + (1.0 - lam) * _p(b, w, h)
            table[key] = (log10_or_sentinel(p), None)
        entries.append(table)
    model = NGramModel(a.order, entries)
    recompute_backoffs(model)
    return model


def _prepare(line) -> list[str]:
    return line.split() if isinstance(line, str) else list(line)


def token_stream(vocab: set[str], text: Iterable, oov_policy: str, has_unk: bool):
    """Yield (word, history, is_oov) for each predicted token in ``text``.

    Under ``skip_oov`` out-of-vocabulary tokens are reported with
    ``word=None`` and must not be scored.
    """
    if oov_policy not in ("require_unk", "skip_oov"):
        raise ValueError(f"unknown oov_policy {oov_policy!r}")
    for line in text:
        history = [BOS]
        for w in _prepare(line) + [EOS]:
            if w in vocab:
                yield w, tuple(history), False
                history.append(w)
                continue
            if oov_policy == "require_unk":
                if not has_unk:
                    raise KeyError(f"OOV token {w!r} and the model has no {UNK}")
                yield UNK, tuple(history), True
                history.append(UNK)
            else:
                yield None, tuple(history), True
                history.append(w)


def perplexity(model: NGramModel, text: Sequence, oov_policy: str = "require_unk") -> tuple[float, int, int]:
    """Return (perplexity, oov_count, word_count).

    ``word_count`` counts scored tokens including ``</s>``.
    """
    text = list(text)
    if not text:
        raise ValueError("empty evaluation text")
    total = 0.0
    oovs = 0
    words = 0
    vocab = model.vocabulary - {BOS}
    for w, history, is_oov in token_stream(vocab, text, oov_policy, UNK in model):
        oovs += is_oov
        if w is None:
            continue
        total += model.logprob(w, history)
        words += 1
    if words == 0:
        return math.nan, oovs, 0
    return 10.0 ** (-total / words), oovs, words


def _token_probs(a: NGramModel, b: NGramModel, text) -> tuple[np.ndarray, np.ndarray]:
    vocab = (a.vocabulary | b.vocabulary) - {BOS}
    has_unk = UNK in vocab
    pa, pb = [], []
    for w, history, _ in token_stream(vocab, text, "require_unk" if has_unk else "skip_oov", has_unk):
        if w is None:
            continue
        pa.append(_p(a, w, history))
        pb.append(_p(b, w, history))
    return np.asarray(pa), np.asarray(pb)


def mixture_perplexity(pa: np.ndarray, pb: np.ndarray, lam: float) -> float:
    # written as pb + lam*(pa - pb) so identical models give identical values for every lam
    mixed = pb + lam * (pa - pb)
    with np.errstate(divide="ignore"):
        return float(10.0 ** (-np.mean(np.log10(mixed))))


def tune_weight(a: NGramModel, b: NGramModel, dev: Sequence, grid_step: float = 0.01) -> tuple[float, float]:
    """Grid-search the weight on ``a`` minimizing dev perplexity.

    Each dev token is scored with the per-token mixture
    ``lam * p_a + (1 - lam) * p_b``. Ties go to the larger weight.
    """
    if grid_step <= 0 or grid_step > 1:
        raise ValueError("grid_step must lie in (0, 1]")
    dev = list(dev)
    if not dev:
        raise ValueError("empty dev set")
    lams, ppls = dev_perplexity_curve(a, b, dev, grid_step)
    best = min(ppls)
    i = max(k for k, ppl in enumerate(ppls) if ppl <= best)
    return lams[i], ppls[i]


def dev_perplexity_curve(a: NGramModel, b: NGramModel, dev: Sequence, grid_step: float = 0.01):
    pa, pb = _token_probs(a, b, list(dev))
    steps = int(round(1.0 / grid_step))
    lams = [min(1.0, i * grid_step) for i in range(steps + 1)]
    return lams, [mixture_perplexity(pa, pb, lam) for lam in lams]
