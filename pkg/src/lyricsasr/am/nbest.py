"""N-best lists: rescoring, consensus word confidence and CTM output."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..eval.align import align_transcripts
from ..lm.model import BOS, EOS, UNK, ZERO_LOGPROB, NGramModel

LN10 = math.log(10.0)


@dataclass
class Hypothesis:
    words: list[str]
    spans: list[tuple[int, int]]  # inclusive frame ranges
    am_score: float  # acoustic + HMM transition log score
    lm_score: float  # natural-log LM probability, unscaled


@dataclass
class NBestList:
    hypotheses: list[Hypothesis]
    lm_scale: float
    word_insertion_penalty: float = 0.0
    subsampling: int = 1
    num_frames: int = 0
    meta: dict = field(default_factory=dict)

    def combined(self, hyp: Hypothesis) -> float:
        return hyp.am_score + self.lm_scale * hyp.lm_score + self.word_insertion_penalty * len(hyp.words)

    def scores(self) -> list[float]:
        return [self.combined(h) for h in self.hypotheses]

    @property
    def empty(self) -> bool:
        return not self.hypotheses

    @property
    def best(self) -> Hypothesis | None:
        return self.hypotheses[0] if self.hypotheses else None

    def sort(self) -> "NBestList":
        order = sorted(range(len(self.hypotheses)), key=lambda i: -self.combined(self.hypotheses[i]))
        return replace(self, hypotheses=[self.hypotheses[i] for i in order])


def lm_logprob_ln(lm: NGramModel, words: Sequence[str]) -> float:
    """Natural-log probability of ``<s> words </s>``; unknown words go to <unk>."""
    has_unk = UNK in lm
    history = [BOS]
    total = 0.0
    for w in list(words) + [EOS]:
        tok = w if w in lm or not has_unk else UNK
        lp = lm.logprob(tok, history) if tok in lm else ZERO_LOGPROB
        total += max(lp, ZERO_LOGPROB)
        history.append(tok)
    return total * LN10


def rescore_nbest(nbest: NBestList, lm: NGramModel, lm_scale: float | None = None) -> NBestList:
    """Replace LM scores with ``lm``'s full-order scores and re-rank."""
    if nbest.empty:
        raise ValueError("cannot rescore an empty N-best list")
    scale = nbest.lm_scale if lm_scale is None else lm_scale
    hyps = [replace(h, lm_score=lm_logprob_ln(lm, h.words)) for h in nbest.hypotheses]
    return replace(nbest, hypotheses=hyps, lm_scale=scale).sort()


def posteriors(nbest: NBestList) -> np.ndarray:
    """Hypothesis posteriors: softmax of combined scores scaled by 1/lm_scale."""
    scale = 1.0 / nbest.lm_scale if nbest.lm_scale > 0 else 1.0
    s = np.asarray(nbest.scores()) * scale
    s = np.exp(s - s.max())
    return s / s.sum()


def word_confidence(nbest: NBestList) -> list[tuple[str, float]]:
    """Consensus confidence for each word of the top hypothesis.

    A word's confidence is the posterior mass of hypotheses whose
    minimum-edit-distance alignment to the top hypothesis pairs that
    position with an identical word.
    """
    if nbest.empty:
        raise ValueError("empty N-best list")
    post = posteriors(nbest)
    top = nbest.hypotheses[0].words
    conf = np.zeros(len(top))
    for p, hyp in zip(post, nbest.hypotheses):
        result = align_transcripts(top, hyp.words)
        pos = 0
        for ref_tok, _, label in result.pairs:
            if ref_tok is None:
                continue
            if label == "C":
                conf[pos] += p
            pos += 1
    conf = np.clip(conf, 0.0, 1.0)
    return list(zip(top, conf.tolist()))


def ctm_lines(utt_id: str, nbest: NBestList, frame_shift_ms: float = 10.0, channel: str = "1") -> list[str]:
    """``utt-id channel start dur word confidence`` for the top hypothesis."""
    if nbest.empty:
        return []
    shift = frame_shift_ms / 1000.0
    lines = []
    for (word, conf), (s, e) in zip(word_confidence(nbest), nbest.hypotheses[0].spans):
        lines.append(f"{utt_id} {channel} {s * shift:.2f} {(e - s + 1) * shift:.2f} {word} {conf:.4f}")
    return lines


def nbest_to_dict(nbest: NBestList) -> dict:
    return {
        "lm_scale": nbest.lm_scale,
        "word_insertion_penalty": nbest.word_insertion_penalty,
        "subsampling": nbest.subsampling,
        "num_frames": nbest.num_frames,
        "hypotheses": [{"words": h.words, "spans": [list(s) for s in h.spans], "am_score": h.am_score,
                        "lm_score": h.lm_score} for h in nbest.hypotheses],
    }


def nbest_from_dict(raw: dict) -> NBestList:
    hyps = [Hypothesis(list(h["words"]), [tuple(s) for s in h["spans"]], float(h["am_score"]), float(h["lm_score"]))
            for h in raw["hypotheses"]]
    return NBestList(hyps, float(raw["lm_scale"]), float(raw.get("word_insertion_penalty", 0.0)),
                     int(raw.get("subsampling", 1)), int(raw.get("num_frames", 0)))
