"""Token-passing Viterbi decoding over a word loop with a bigram LM.

Each pronunciation of each word is a chain of phone-HMM states followed
by an optional silence chain; a leading optional silence precedes the
first word. Bigram scores are applied on word entry. Word-end events
form a lattice (word-pair approximation) from which distinct N-best word
sequences are read.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..features import FeatureMatrix
from ..lm.model import BOS, EOS, UNK, ZERO_LOGPROB, NGramModel
from .hmm import HmmGraph
from .nbest import Hypothesis, NBestList
from .scorer import AcousticScorer

LN10 = math.log(10.0)


@dataclass(frozen=True)
class DecodeConfig:
    beam: float = 16.0
    lm_scale: float = 8.0
    word_insertion_penalty: float = 0.0
    n_best: int = 50
    lattice_beam: float = 16.0
    optional_silence: bool = True

    def __post_init__(self):
        if not self.beam > 0:
            raise ValueError("beam must be positive")
        if self.n_best < 1:
            raise ValueError("n_best must be >= 1")


def bigram_matrix(lm: NGramModel | None, words: list[str]) -> np.ndarray:
    """Natural-log bigram scores; rows are histories [<s>, *words],
    columns are predictions [*words, </s>]. ``None`` means uniform."""
    n = len(words)
    if lm is None:
        return np.full((n + 1, n + 1), -math.log(n + 1))
    if lm.order > 2:
        lm = lm.truncate(2)
    has_unk = UNK in lm

    def mapped(w):
        return w if w in lm or not has_unk else UNK

    hist = [BOS] + [mapped(w) for w in words]
    pred = [mapped(w) for w in words] + [EOS]
    out = np.empty((n + 1, n + 1))
    for i, h in enumerate(hist):
        for j, w in enumerate(pred):
            lp = lm.logprob(w, (h,)) if w in lm else ZERO_LOGPROB
            out[i, j] = max(lp, ZERO_LOGPROB) * LN10
    return out


class _Layout:
    """Flat array of every decodable state."""

    def __init__(self, graph: HmmGraph, optional_silence: bool):
        lex = graph.lexicon
        self.words = lex.words
        ids, loop, fwd, prev, prev_w = [], [], [], [], []
        self.inst_word: list[int] = []
        self.heads: list[int] = []
        self.main_last: list[int] = []
        self.sil_last: list[int] = []

        def add_chain(phones, link_from: int | None, link_w: float):
            i, l, f = graph.chain(phones)
            start = len(ids)
            ids.extend(i)
            loop.extend(l)
            fwd.extend(f)
            for k in range(len(i)):
                if k == 0:
                    prev.append(-1 if link_from is None else link_from)
                    prev_w.append(link_w)
                else:
                    prev.append(start + k - 1)
                    prev_w.append(f[k - 1])
            return start, len(ids) - 1

        log_half = math.log(graph.silence_prob)
        self.lead = None
        if optional_silence:
            self.lead = add_chain([lex.silence], None, 0.0)
        for wi, w in enumerate(self.words):
            for pron in lex.pronunciations(w):
                head, last = add_chain(pron, None, 0.0)
                self.inst_word.append(wi)
                self.heads.append(head)
                self.main_last.append(last)
                if optional_silence:
                    _, s_last = add_chain([lex.silence], last, fwd[last] + log_half)
                    self.sil_last.append(s_last)
        self.ids = np.array(ids, dtype=np.int64)
        self.loop = np.array(loop)
        self.fwd = np.array(fwd)
        self.prev = np.array(prev, dtype=np.int64)
        self.prev_w = np.array(prev_w)
        self.inst_word = np.array(self.inst_word, dtype=np.int64)
        self.heads = np.array(self.heads, dtype=np.int64)
        self.main_last = np.array(self.main_last, dtype=np.int64)
        self.sil_last = np.array(self.sil_last, dtype=np.int64)
        self.optional_silence = optional_silence
        self.skip_w = log_half if optional_silence else 0.0
        self.has_prev = self.prev >= 0


@dataclass
class _Node:
    inst: int  # -1 for the leading silence
    start: int
    end: int
    seg: float  # acoustic + transition score inside the word (and its silence)


def viterbi_decode(features: FeatureMatrix, scorer: AcousticScorer, graph: HmmGraph,
                   lm: NGramModel | None, cfg: DecodeConfig = DecodeConfig()) -> NBestList:
    """Decode one utterance into an N-best list.

    Scores: acoustic log-likelihood (times the subsampling factor) plus
    HMM transition log-probabilities, ``lm_scale`` times the natural-log
    bigram probability per word and ``word_insertion_penalty`` per word.
    """
    if scorer.num_states != graph.num_states:
        raise ValueError(f"scorer has {scorer.num_states} states, graph needs {graph.num_states}")
    lay = _Layout(graph, cfg.optional_silence)
    bigram = bigram_matrix(lm, lay.words)
    k = max(1, int(getattr(scorer, "subsampling", 1)))
    full = scorer.score_matrix(features)
    total_frames = full.shape[0]
    am = full[::k][:, lay.ids] * k
    T = am.shape[0]
    empty = NBestList([], cfg.lm_scale, cfg.word_insertion_penalty, k, total_frames)
    if T == 0:
        return empty

    lm_s = cfg.lm_scale
    pen = cfg.word_insertion_penalty
    n_inst = len(lay.heads)
    inst_w = lay.inst_word
    # history rows: 0 is <s>, word w is row w + 1
    enter_from_inst = lm_s * bigram[inst_w + 1][:, inst_w]  # (from inst, to inst)
    enter_from_bos = lm_s * bigram[0, inst_w]
    leave = lm_s * bigram[inst_w + 1, -1]

    N = lay.ids.shape[0]
    delta = np.full(N, -np.inf)
    start = np.zeros(N, dtype=np.int64)
    entry = np.zeros(N)
    if lay.lead is not None:
        delta[lay.lead[0]] = lay.skip_w
        start[lay.lead[0]] = 0
        entry[lay.lead[0]] = 0.0
    init = lay.skip_w + enter_from_bos + pen
    delta[lay.heads] = init
    entry[lay.heads] = init
    delta = delta + am[0]

    nodes: list[_Node] = []
    nodes_at: list[list[int]] = []
    idx = np.arange(N)
    for t in range(T):
        if t > 0:
            stay = delta + lay.loop
            move = np.full(N, -np.inf)
            hp = lay.has_prev
            move[hp] = delta[lay.prev[hp]] + lay.prev_w[hp]
            take_move = move > stay
            new = np.where(take_move, move, stay)
            src = np.where(take_move, lay.prev, idx)
            new_start = start[src]
            new_entry = entry[src]
            # word entries from exits at t-1
            ex_val, ex_start, ex_entry = exits
            cand = ex_val[:, None] + enter_from_inst  # (from, to)
            best_from = np.argmax(cand, axis=0)
            best = cand[best_from, np.arange(n_inst)]
            if lead_exit > -np.inf:
                from_lead = lead_exit + enter_from_bos
                best = np.maximum(best, from_lead)
            best = best + pen
            better = best > new[lay.heads]
            h = lay.heads[better]
            new[h] = best[better]
            new_start[h] = t
            new_entry[h] = best[better]
            delta, start, entry = new + am[t], new_start, new_entry
        if math.isfinite(cfg.beam):
            top = delta.max()
            delta[delta < top - cfg.beam] = -np.inf

        # exits at t
        main_exit = delta[lay.main_last] + lay.fwd[lay.main_last] + lay.skip_w
        if lay.optional_silence:
            sil_exit = delta[lay.sil_last] + lay.fwd[lay.sil_last]
            use_sil = sil_exit > main_exit
            ex_val = np.where(use_sil, sil_exit, main_exit)
            ex_src = np.where(use_sil, lay.sil_last, lay.main_last)
        else:
            ex_val, ex_src = main_exit, lay.main_last
        exits = (ex_val, start[ex_src], entry[ex_src])
        lead_exit = -np.inf
        if lay.lead is not None:
            ll = lay.lead[1]
            lead_exit = delta[ll] + lay.fwd[ll]

        here = []
        finite = ex_val[np.isfinite(ex_val)]
        floor = (max(finite.max(), lead_exit) if finite.size else lead_exit) - cfg.lattice_beam
        for i in np.flatnonzero(ex_val >= floor) if math.isfinite(floor) else np.flatnonzero(np.isfinite(ex_val)):
            nodes.append(_Node(int(i), int(exits[1][i]), t, float(ex_val[i] - exits[2][i])))
            here.append(len(nodes) - 1)
        if lead_exit > -np.inf and lead_exit >= floor:
            nodes.append(_Node(-1, 0, t, float(lead_exit)))
            here.append(len(nodes) - 1)
        nodes_at.append(here)

    hyps = _nbest_from_lattice(nodes, nodes_at, T, lay, enter_from_inst, enter_from_bos, leave, bigram, cfg)
    if not hyps:
        return empty
    spans_scale = k
    out = []
    for total, am_score, lm_score, words, spans in hyps:
        frame_spans = [(s * spans_scale, min(total_frames - 1, e * spans_scale + spans_scale - 1)) for s, e in spans]
        out.append(Hypothesis(list(words), frame_spans, am_score, lm_score))
    return NBestList(out, cfg.lm_scale, cfg.word_insertion_penalty, k, total_frames)


def _nbest_from_lattice(nodes, nodes_at, T, lay, enter_from_inst, enter_from_bos, leave, bigram, cfg):
    """Top distinct word sequences through the word-end lattice.

    Each node keeps up to ``n_best`` partial paths (distinct word
    sequences) within ``lattice_beam`` of its best.
    """
    K = cfg.n_best
    lm_s, pen = cfg.lm_scale, cfg.word_insertion_penalty
    inst_w = lay.inst_word
    words = lay.words
    # path tuple: (total, am, lm, words, spans)
    paths: list[list[tuple]] = [[] for _ in nodes]
    for t in range(T):
        for ni in nodes_at[t]:
            node = nodes[ni]
            if node.inst == -1:
                paths[ni] = [(node.seg, node.seg, 0.0, (), ())]
                continue
            v = node.inst
            wv = words[inst_w[v]]
            span = (node.start, node.end)
            cands = []
            if node.start == 0:
                lm = bigram[0, inst_w[v]]
                am_part = lay.skip_w + node.seg
                cands.append((am_part + lm_s * lm + pen, am_part, lm, (wv,), (span,)))
            else:
                for pi in nodes_at[node.start - 1]:
                    pnode = nodes[pi]
                    if pnode.inst == -1:
                        lm = bigram[0, inst_w[v]]
                    else:
                        lm = bigram[inst_w[pnode.inst] + 1, inst_w[v]]
                    add = lm_s * lm + pen + node.seg
                    for total, am_s, lm_t, ws, sp in paths[pi]:
                        cands.append((total + add, am_s + node.seg, lm_t + lm, ws + (wv,), sp + (span,)))
            paths[ni] = _top_distinct(cands, K, cfg.lattice_beam)
    finals = []
    for ni in nodes_at[T - 1]:
        node = nodes[ni]
        if node.inst == -1:
            continue
        lm_end = bigram[inst_w[node.inst] + 1, -1]
        for total, am_s, lm_t, ws, sp in paths[ni]:
            finals.append((total + lm_s * lm_end, am_s, lm_t + lm_end, ws, sp))
    return _top_distinct(finals, K, math.inf)


def _top_distinct(cands, k: int, beam: float):
    if not cands:
        return []
    cands.sort(key=lambda c: -c[0])
    best = cands[0][0]
    seen = set()
    out = []
    for c in cands:
        if c[0] < best - beam:
            break
        if c[3] in seen:
            continue
        seen.add(c[3])
        out.append(c)
        if len(out) == k:
            break
    return out
