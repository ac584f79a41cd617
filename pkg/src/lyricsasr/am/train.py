"""Flat-start GMM-HMM training with Viterbi realignment and mixture splitting."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg

from ..features import FeatureMatrix
from .hmm import HmmGraph, align_units, utterance_units
from .lexicon import Lexicon
from .scorer import GmmScorer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    states_per_phone: int = 3
    max_gaussians: int = 4
    em_iterations: int = 20
    realign_every: int = 4
    optional_silence: bool = True
    var_floor_frac: float = 0.01
    initial_loop_prob: float = 0.6
    min_loop_prob: float = 0.05
    max_loop_prob: float = 0.95
    split_perturb: float = 0.2
    subsampling: int = 1
    lda_dim: int = 0  # > 0: estimate an LDA projection from the first-pass alignment and retrain


@dataclass
class TrainLogEntry:
    iteration: int
    log_likelihood: float
    event: str = ""  # "flat", "realign", "split", or "realign+split"


@dataclass
class TrainResult:
    scorer: GmmScorer
    graph: HmmGraph
    history: list[TrainLogEntry] = field(default_factory=list)
    alignments: list[np.ndarray] = field(default_factory=list)


class TrainingError(ValueError):
    pass


def _flat_alignment(graph: HmmGraph, words, num_frames: int, optional_silence: bool) -> np.ndarray:
    sil = graph.lexicon.silence
    phones = [ph for w in words for ph in graph.lexicon.pronunciations(w)[0]]
    if optional_silence:
        phones = [sil] + phones + [sil]
    states = np.array([s for ph in phones for s in graph.phone_states(ph)])
    if num_frames < len(states):
        states = states[np.linspace(0, len(states) - 1, num_frames).round().astype(int)]
    bounds = np.linspace(0, num_frames, len(states) + 1).round().astype(int)
    return np.repeat(states, np.diff(bounds))


def _em_step(frames: np.ndarray, w: np.ndarray, mu: np.ndarray, var: np.ndarray, floor: np.ndarray):
    """One EM iteration for one state's diagonal GMM.

    Returns the log-likelihood of ``frames`` under the incoming
    parameters, and the updated parameters.
    """
    active = w > 0
    logw = np.log(w[active])
    m, v = mu[active], var[active]
    comp = logw[None, :] - 0.5 * (
        np.log(2 * np.pi * v).sum(axis=1)[None, :]
        + (((frames[:, None, :] - m[None]) ** 2) / v[None]).sum(axis=2)
    )
    top = comp.max(axis=1, keepdims=True)
    lse = top[:, 0] + np.log(np.exp(comp - top).sum(axis=1))
    ll = float(lse.sum())
    post = np.exp(comp - lse[:, None])
    occ = post.sum(axis=0)
    new_w, new_mu, new_var = w.copy(), mu.copy(), var.copy()
    idx = np.flatnonzero(active)
    for j, k in enumerate(idx):
        if occ[j] < 1e-8:
            continue
        mean = post[:, j] @ frames / occ[j]
        second = post[:, j] @ (frames * frames) / occ[j]
        new_mu[k] = mean
        new_var[k] = np.maximum(second - mean * mean, floor)
    new_w[idx] = occ / occ.sum()
    return ll, new_w, new_mu, new_var


def _split(w: np.ndarray, mu: np.ndarray, var: np.ndarray, target: int, perturb: float):
    """Split heaviest components until ``target`` are active."""
    w, mu, var = w.copy(), mu.copy(), var.copy()
    while np.count_nonzero(w > 0) < target:
        k = int(np.argmax(w))
        free = int(np.flatnonzero(w == 0)[0])
        offset = perturb * np.sqrt(var[k])
        mu[free], var[free] = mu[k] + offset, var[k].copy()
        mu[k] = mu[k] - offset
        w[k] /= 2.0
        w[free] = w[k]
    return w, mu, var


def lda_transform(features: np.ndarray, labels: np.ndarray, dim: int, ridge: float = 1e-6) -> np.ndarray:
    """Columns are the ``dim`` leading discriminants of ``labels`` (within-class whitened)."""
    d = features.shape[1]
    if not 0 < dim <= d:
        raise ValueError(f"lda dim must lie in [1, {d}]")
    mean = features.mean(axis=0)
    within = np.zeros((d, d))
    between = np.zeros((d, d))
    for c in np.unique(labels):
        xc = features[labels == c]
        mc = xc.mean(axis=0)
        centred = xc - mc
        within += centred.T @ centred
        between += len(xc) * np.outer(mc - mean, mc - mean)
    within /= len(features)
    between /= len(features)
    within += ridge * np.trace(within) / d * np.eye(d)
    _, vecs = scipy.linalg.eigh(between, within)
    return vecs[:, ::-1][:, :dim].copy()


def train_gmm_hmm(data: Sequence[tuple[FeatureMatrix, Sequence[str]]], lexicon: Lexicon,
                  cfg: TrainConfig = TrainConfig()) -> TrainResult:
    """Train a GMM-HMM acoustic model from (features, transcript) pairs.

    Flat start from uniform segmentation, EM on the Gaussians for a fixed
    alignment, Viterbi realignment every ``realign_every`` iterations; at
    each realignment the mixture count doubles (up to ``max_gaussians``).
    ``history`` holds the total log-likelihood before each EM update.

    With ``lda_dim`` set, the final alignment of that pass labels frames by
    HMM state, an LDA projection is estimated from them, and a second pass
    trains on the projected features. The scorer carries the projection.
    """
    data = list(data)
    if not data:
        raise TrainingError("no training data")
    dims = {fm.dims for fm, _ in data}
    if len(dims) != 1:
        raise TrainingError(f"features have inconsistent dims {sorted(dims)}")
    for _, words in data:
        for w in words:
            if w not in lexicon:
                raise TrainingError(f"transcript word {w!r} is not in the lexicon")
    (dim,) = dims
    if cfg.lda_dim > dim:
        raise TrainingError(f"lda_dim {cfg.lda_dim} exceeds feature dims {dim}")
    first = _train_pass(data, lexicon, cfg)
    if cfg.lda_dim <= 0:
        return first
    everything = np.concatenate([fm.values for fm, _ in data])
    proj = lda_transform(everything, np.concatenate(first.alignments), cfg.lda_dim)
    projected = [(replace(fm, values=fm.values @ proj), words) for fm, words in data]
    second = _train_pass(projected, lexicon, cfg)
    second.scorer.transform = proj
    second.history[0].event = "lda"
    second.history = first.history + second.history
    return second


def _train_pass(data, lexicon: Lexicon, cfg: TrainConfig) -> TrainResult:

    graph = HmmGraph(lexicon, cfg.states_per_phone)
    graph.loop_prob[:] = cfg.initial_loop_prob
    S, M = graph.num_states, cfg.max_gaussians
    feats = [fm.values for fm, _ in data]
    everything = np.concatenate(feats)
    g_mean, g_var = everything.mean(axis=0), everything.var(axis=0) + 1e-8
    floor = cfg.var_floor_frac * g_var
    weights = np.zeros((S, M))
    weights[:, 0] = 1.0
    means = np.tile(g_mean, (S, M, 1))
    variances = np.tile(np.maximum(g_var, floor), (S, M, 1))

    aligns = [_flat_alignment(graph, words, fm.num_frames, cfg.optional_silence) for fm, words in data]
    history: list[TrainLogEntry] = []
    event = "flat"
    active = 1
    for it in range(1, cfg.em_iterations + 1):
        if it > 1 and (it - 1) % cfg.realign_every == 0:
            scorer = GmmScorer(weights, means, variances, floor)
            new_aligns = []
            for (fm, words), old in zip(data, aligns):
                units = utterance_units(graph, words, cfg.optional_silence)
                score, states, _ = align_units(scorer.score_matrix(fm), units, np.log(graph.silence_prob))
                new_aligns.append(states if states is not None else old)
            aligns = new_aligns
            _update_transitions(graph, aligns, cfg)
            event = "realign"
            if active < M:
                active = min(M, active * 2)
                for s in range(S):
                    weights[s], means[s], variances[s] = _split(weights[s], means[s], variances[s], active,
                                                                 cfg.split_perturb)
                event = "realign+split"

        state_frames = _gather(feats, aligns, S)
        total = 0.0
        for s, frames in enumerate(state_frames):
            if frames is None:
                continue
            ll, weights[s], means[s], variances[s] = _em_step(frames, weights[s], means[s], variances[s], floor)
            total += ll
        history.append(TrainLogEntry(it, total, event))
        log.debug("iteration %d: log-likelihood %.3f %s", it, total, event)
        event = ""

    scorer = GmmScorer(weights, means, variances, floor, cfg.subsampling)
    return TrainResult(scorer, graph, history, aligns)


def _gather(feats, aligns, num_states):
    buckets: list[list[np.ndarray]] = [[] for _ in range(num_states)]
    for x, a in zip(feats, aligns):
        order = np.argsort(a, kind="stable")
        sorted_states = a[order]
        cuts = np.flatnonzero(np.diff(sorted_states)) + 1
        for chunk in np.split(order, cuts):
            if chunk.size:
                buckets[a[chunk[0]]].append(x[chunk])
    return [np.concatenate(b) if b else None for b in buckets]


def _update_transitions(graph: HmmGraph, aligns, cfg: TrainConfig) -> None:
    stays = np.zeros(graph.num_states)
    visits = np.zeros(graph.num_states)
    for a in aligns:
        change = np.flatnonzero(np.diff(a)) + 1
        starts = np.concatenate([[0], change])
        lengths = np.diff(np.concatenate([starts, [len(a)]]))
        np.add.at(visits, a[starts], 1)
        np.add.at(stays, a[starts], lengths - 1)
    seen = visits > 0
    loop = graph.loop_prob.reshape(-1).copy()
    loop[seen] = stays[seen] / (stays[seen] + visits[seen])
    graph.loop_prob = np.clip(loop, cfg.min_loop_prob, cfg.max_loop_prob).reshape(graph.loop_prob.shape)


def segment_means(features: np.ndarray, alignment: np.ndarray) -> dict[int, np.ndarray]:
    """Mean feature vector of every state in an alignment."""
    return {int(s): features[alignment == s].mean(axis=0) for s in np.unique(alignment)}
