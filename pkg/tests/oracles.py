"""Straight-line reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np


def mfcc_oracle(samples, sample_rate, *, frame_ms=25.0, shift_ms=10.0, preemph=0.97, n_filters, n_ceps,
                low, high, floor=1e-10):
    """MFCC by direct DFT sums, explicit triangle weights and explicit DCT-II sums."""
    flen = int(round(sample_rate * frame_ms / 1000))
    hop = int(round(sample_rate * shift_ms / 1000))
    nfft = 1
    while nfft < flen:
        nfft *= 2
    n_frames = 0 if len(samples) < flen else 1 + (len(samples) - flen) // hop
    nbins = nfft // 2 + 1
    window = [math.pow(0.5 - 0.5 * math.cos(2 * math.pi * i / (flen - 1)), 0.85) for i in range(flen)]

    def mel(f):
        return 1127.0 * math.log(1.0 + f / 700.0)

    lo, hi = mel(low), mel(high)
    step = (hi - lo) / (n_filters + 1)
    weights = np.zeros((n_filters, nbins))
    for m in range(n_filters):
        left, centre, right = lo + m * step, lo + (m + 1) * step, lo + (m + 2) * step
        for k in range(nbins):
            b = mel(k * sample_rate / nfft)
            if left < b < right:
                weights[m, k] = (b - left) / (centre - left) if b <= centre else (right - b) / (right - centre)

    k_idx = np.arange(nbins)[:, None]
    n_idx = np.arange(nfft)[None, :]
    basis = np.exp(-2j * np.pi * k_idx * n_idx / nfft)
    out = np.zeros((n_frames, n_ceps))
    for t in range(n_frames):
        frame = list(samples[t * hop: t * hop + flen])
        mean = sum(frame) / flen
        frame = [v - mean for v in frame]
        emph = [frame[0] - preemph * frame[0]] + [frame[i] - preemph * frame[i - 1] for i in range(1, flen)]
        padded = np.zeros(nfft)
        padded[:flen] = [e * w for e, w in zip(emph, window)]
        power = np.abs(basis @ padded) ** 2
        logmel = [math.log(max(float(weights[m] @ power), floor)) for m in range(n_filters)]
        for c in range(n_ceps):
            scale = math.sqrt(1.0 / n_filters) if c == 0 else math.sqrt(2.0 / n_filters)
            out[t, c] = scale * sum(logmel[m] * math.cos(math.pi * c * (2 * m + 1) / (2 * n_filters))
                                    for m in range(n_filters))
    return out


def delta_oracle(x, window=2):
    """Regression deltas evaluated term by term with edge replication."""
    T = x.shape[0]
    out = np.zeros_like(x)
    denom = 2 * sum(n * n for n in range(1, window + 1))
    for t in range(T):
        acc = np.zeros(x.shape[1])
        for n in range(1, window + 1):
            acc += n * (x[min(T - 1, t + n)] - x[max(0, t - n)])
        out[t] = acc / denom
    return out


def linear_graph_best(scores, chains, *, optional_silence, sil_chain, log_half=math.log(0.5)):
    """Best path score through ``chains`` (a list of (ids, loop, fwd)) via a dense transition matrix.

    Layout: [SIL?] c1 [SIL?] c2 ... cn [SIL?], each optional silence entered
    or skipped with probability 1/2.
    """
    blocks = []  # (ids, loop, fwd, kind)
    if optional_silence:
        blocks.append((*sil_chain, "sil"))
    for c in chains:
        blocks.append((*c, "word"))
        if optional_silence:
            blocks.append((*sil_chain, "sil"))
    offsets = np.cumsum([0] + [len(b[0]) for b in blocks])
    N = offsets[-1]
    A = np.full((N, N), -np.inf)
    init = np.full(N, -np.inf)
    final = np.full(N, -np.inf)
    ids = np.concatenate([b[0] for b in blocks])
    for bi, (bid, loop, fwd, _) in enumerate(blocks):
        o = offsets[bi]
        for k in range(len(bid)):
            A[o + k, o + k] = loop[k]
            if k + 1 < len(bid):
                A[o + k, o + k + 1] = fwd[k]
    heads = offsets[:-1]
    lasts = offsets[1:] - 1
    word_blocks = [i for i, b in enumerate(blocks) if b[3] == "word"]
    for n, bi in enumerate(word_blocks):
        last_fwd = blocks[bi][2][-1]
        # arrive at this word
        if n == 0:
            if optional_silence:
                init[heads[0]] = log_half
                init[heads[bi]] = log_half
                A[lasts[0], heads[bi]] = blocks[0][2][-1]
            else:
                init[heads[bi]] = 0.0
        # leave this word
        nxt = word_blocks[n + 1] if n + 1 < len(word_blocks) else None
        if optional_silence:
            sil = bi + 1
            A[lasts[bi], heads[sil]] = last_fwd + log_half
            sil_fwd = blocks[sil][2][-1]
            if nxt is None:
                final[lasts[bi]] = last_fwd + log_half
                final[lasts[sil]] = sil_fwd
            else:
                A[lasts[bi], heads[nxt]] = last_fwd + log_half
                A[lasts[sil], heads[nxt]] = sil_fwd
        else:
            if nxt is None:
                final[lasts[bi]] = last_fwd
            else:
                A[lasts[bi], heads[nxt]] = last_fwd
    delta = init + scores[0, ids]
    for t in range(1, scores.shape[0]):
        delta = (delta[:, None] + A).max(axis=0) + scores[t, ids]
    return float((delta + final).max())


def exhaustive_decode(scores, graph, lm_ln, lm_scale, penalty, max_words, optional_silence=True):
    """Best (score, words) over every word sequence and pronunciation choice up to ``max_words``.

    ``lm_ln(prev, word)`` returns a natural-log bigram score; prev is "<s>"
    at the start and word is "</s>" at the end.
    """
    lex = graph.lexicon
    sil_chain = graph.chain([lex.silence])
    best = (-math.inf, None)
    for n in range(1, max_words + 1):
        for words in itertools.product(lex.words, repeat=n):
            lm = 0.0
            prev = "<s>"
            for w in list(words) + ["</s>"]:
                lm += lm_ln(prev, w)
                prev = w
            for prons in itertools.product(*(lex.pronunciations(w) for w in words)):
                chains = [graph.chain(p) for p in prons]
                ac = linear_graph_best(scores, chains, optional_silence=optional_silence, sil_chain=sil_chain)
                total = ac + lm_scale * lm + penalty * n
                if total > best[0]:
                    best = (total, list(words))
    return best


def kn_bigram_oracle(lines, discount):
    """Interpolated Kneser-Ney bigram probabilities from first principles.

    Returns p(w | h) as a function; unigrams use continuation counts
    interpolated with a uniform distribution over the predicted vocabulary.
    """
    bigrams = {}
    for line in lines:
        toks = ["<s>"] + line.split() + ["</s>"]
        for a, b in zip(toks, toks[1:]):
            bigrams[(a, b)] = bigrams.get((a, b), 0) + 1
    vocab = sorted({b for _, b in bigrams})
    cont = {w: len({a for (a, b) in bigrams if b == w}) for w in vocab}
    total_cont = sum(cont.values())
    types_cont = sum(1 for w in vocab if cont[w] > 0)

    def p_uni(w):
        return max(cont[w] - discount, 0) / total_cont + discount * types_cont / total_cont / len(vocab)

    def p(w, h):
        ch = {b: c for (a, b), c in bigrams.items() if a == h}
        tot = sum(ch.values())
        if tot == 0:
            return p_uni(w)
        return max(ch.get(w, 0) - discount, 0) / tot + discount * len(ch) / tot * p_uni(w)

    return p, vocab
