import math
import random
import time

import numpy as np
import pytest

from lyricsasr.am import DecodeConfig, HmmGraph, TableScorer, one_hot_scorer, parse_lexicon, viterbi_decode
from lyricsasr.features import FeatureMatrix
from lyricsasr.lm import count_ngrams, train_kneser_ney

from oracles import exhaustive_decode

LN10 = math.log(10.0)
EXACT = DecodeConfig(beam=math.inf, lattice_beam=math.inf, lm_scale=2.0, n_best=20)


def _feats(T):
    return FeatureMatrix(np.zeros((T, 1)))


def _lm_ln(lm):
    if lm is None:
        return lambda prev, w: -math.log(4)
    return lambda prev, w: max(lm.logprob(w, (prev,)), -99.0) * LN10


def test_one_hot_oracle_forces_path():
    lex = parse_lexicon("A a\nB b c\nC c a\n")
    g = HmmGraph(lex, 2)
    seq = []
    for ph, dur in [("SIL", 3), ("a", 4), ("b", 5), ("c", 4), ("SIL", 2), ("c", 3), ("a", 4), ("SIL", 2)]:
        s0, s1 = g.phone_states(ph)
        seq += [s0] * (dur // 2) + [s1] * (dur - dur // 2)
    nb = viterbi_decode(_feats(len(seq)), one_hot_scorer(seq, g.num_states), g, None, DecodeConfig())
    assert nb.best.words == ["A", "B", "C"]
    spans = nb.best.spans
    assert all(s <= e for s, e in spans) and all(a[1] < b[0] for a, b in zip(spans, spans[1:]))


def _instance(rng, with_lm):
    # single-phone words with 2 states: every word takes at least 2 frames,
    # so T <= 9 admits at most 4 words
    lex = parse_lexicon("A a\nB b\nB c\nC c\n")
    g = HmmGraph(lex, 2, rng.uniform(0.2, 0.8, (4, 2)))
    T = int(rng.integers(2, 10))
    table = rng.normal(0, 3, (T, g.num_states))
    lm = None
    if with_lm:
        corpus = [" ".join(rng.choice(["A", "B", "C"], size=int(rng.integers(1, 4)))) for _ in range(8)]
        lm = train_kneser_ney(count_ngrams(corpus, 2), discounts=0.6)
    return g, table, lm


def test_exhaustive_enumeration_oracle():
    rng = np.random.default_rng(0)
    t0 = time.time()
    for i in range(100):
        g, table, lm = _instance(rng, with_lm=i % 2 == 1)
        pen = float(rng.uniform(-2, 1))
        cfg = DecodeConfig(beam=math.inf, lattice_beam=math.inf, lm_scale=float(rng.uniform(0.5, 4)),
                           word_insertion_penalty=pen, n_best=5)
        nb = viterbi_decode(_feats(table.shape[0]), TableScorer(table), g, lm, cfg)
        best_score, best_words = exhaustive_decode(table, g, _lm_ln(lm), cfg.lm_scale, pen, max_words=4)
        if best_words is None:
            assert nb.empty
            continue
        assert nb.best.words == best_words, f"instance {i}"
        assert nb.combined(nb.best) == pytest.approx(best_score, abs=1e-8)
    assert time.time() - t0 < 30


def test_nbest_sorted_distinct_and_scored():
    rng = np.random.default_rng(1)
    g, table, lm = _instance(rng, with_lm=True)
    table = rng.normal(0, 1, (9, g.num_states))
    nb = viterbi_decode(_feats(9), TableScorer(table), g, lm, EXACT)
    scores = nb.scores()
    assert scores == sorted(scores, reverse=True)
    assert len({tuple(h.words) for h in nb.hypotheses}) == len(nb.hypotheses)
    exact, words = exhaustive_decode(table, g, _lm_ln(lm), EXACT.lm_scale, 0.0, max_words=4)
    assert nb.best.words == words
    assert all(nb.combined(h) <= exact + 1e-9 for h in nb.hypotheses)
    for h in nb.hypotheses:
        assert nb.combined(h) == pytest.approx(h.am_score + EXACT.lm_scale * h.lm_score)


def test_penalty_monotone_length():
    rng = np.random.default_rng(2)
    lex = parse_lexicon("A a\nB b\nC c\n")
    g = HmmGraph(lex, 1)
    table = rng.normal(0, 1, (30, g.num_states))
    lengths = []
    for pen in [5.0, 2.0, 0.0, -2.0, -5.0, -20.0, -1e6]:
        cfg = DecodeConfig(beam=math.inf, lattice_beam=math.inf, lm_scale=0.0, word_insertion_penalty=pen)
        lengths.append(len(viterbi_decode(_feats(30), TableScorer(table), g, None, cfg).best.words))
    assert all(a >= b for a, b in zip(lengths, lengths[1:]))
    assert lengths[-1] == 1


def test_deterministic():
    rng = np.random.default_rng(3)
    g, table, lm = _instance(rng, with_lm=True)
    a = viterbi_decode(_feats(table.shape[0]), TableScorer(table), g, lm, EXACT)
    b = viterbi_decode(_feats(table.shape[0]), TableScorer(table), g, lm, EXACT)
    assert a == b


def test_empty_decode():
    g = HmmGraph(parse_lexicon("A a b c\n"), 3)
    nb = viterbi_decode(_feats(2), TableScorer(np.zeros((2, g.num_states))), g, None, DecodeConfig())
    assert nb.empty and nb.best is None
    nb = viterbi_decode(_feats(0), TableScorer(np.zeros((0, g.num_states))), g, None, DecodeConfig())
    assert nb.empty


def test_state_count_mismatch():
    g = HmmGraph(parse_lexicon("A a\n"), 3)
    with pytest.raises(ValueError):
        viterbi_decode(_feats(3), TableScorer(np.zeros((3, 2))), g, None, DecodeConfig())


def test_subsampling_scores_every_kth_frame():
    lex = parse_lexicon("A a\nB b\n")
    g = HmmGraph(lex, 1)
    seq = [0] * 6 + [1] * 12 + [2] * 12 + [0] * 6
    dense = one_hot_scorer(seq, g.num_states)
    sub = TableScorer(dense.table, subsampling=3)
    nb = viterbi_decode(_feats(len(seq)), sub, g, None, DecodeConfig())
    assert nb.best.words == ["A", "B"] and nb.subsampling == 3
    # decoding on the kept frames with scores tripled gives the same result
    kept = TableScorer(dense.table[::3] * 3)
    ref = viterbi_decode(_feats(len(seq[::3])), kept, g, None, DecodeConfig())
    assert ref.best.am_score == pytest.approx(nb.best.am_score)
    assert nb.best.spans[-1][1] <= len(seq) - 1
