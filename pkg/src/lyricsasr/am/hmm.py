"""Left-to-right phone HMMs and forced alignment over linear word graphs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lexicon import Lexicon, parse_lexicon

LOG_HALF = math.log(0.5)


@dataclass
class HmmGraph:
    """Phone HMM topology plus the lexicon it was built for.

    Every phone has ``states_per_phone`` emitting states; state ``k`` of
    phone ``p`` has acoustic id ``p * states_per_phone + k``. Each state
    either loops (``loop_prob``) or moves on; leaving the last state exits
    the phone.
    """

    lexicon: Lexicon
    states_per_phone: int = 3
    loop_prob: np.ndarray | None = None  # (phones, states_per_phone)
    silence_prob: float = 0.5

    def __post_init__(self):
        if self.states_per_phone < 1:
            raise ValueError("states_per_phone must be >= 1")
        self.phones = self.lexicon.phones
        self.phone_index = {p: i for i, p in enumerate(self.phones)}
        if self.loop_prob is None:
            self.loop_prob = np.full((len(self.phones), self.states_per_phone), 0.5)
        self.loop_prob = np.asarray(self.loop_prob, dtype=np.float64)
        if self.loop_prob.shape != (len(self.phones), self.states_per_phone):
            raise ValueError(f"loop_prob shape {self.loop_prob.shape} does not match topology")

    @property
    def num_states(self) -> int:
        return len(self.phones) * self.states_per_phone

    def phone_states(self, phone: str) -> list[int]:
        base = self.phone_index[phone] * self.states_per_phone
        return list(range(base, base + self.states_per_phone))

    def chain(self, phones) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """State ids, log self-loop and log forward probabilities for a phone string."""
        ids = np.array([s for ph in phones for s in self.phone_states(ph)], dtype=np.int64)
        loop = self.loop_prob.reshape(-1)[ids]
        return ids, np.log(loop), np.log1p(-loop)

    def state_label(self, state: int) -> str:
        return f"{self.phones[state // self.states_per_phone]}_{state % self.states_per_phone}"

    def transition_check(self) -> float:
        """Largest deviation from 1 of any state's outgoing probability mass."""
        return float(np.abs(self.loop_prob + (1.0 - self.loop_prob) - 1.0).max())

    def save(self, path) -> None:
        Path(path).write_text(json.dumps({
            "states_per_phone": self.states_per_phone,
            "silence": self.lexicon.silence,
            "silence_prob": self.silence_prob,
            "phones": self.phones,
            "loop_prob": self.loop_prob.tolist(),
            "lexicon": self.lexicon.to_text(),
        }, indent=1))

    @classmethod
    def load(cls, path) -> "HmmGraph":
        raw = json.loads(Path(path).read_text())
        lex = parse_lexicon(raw["lexicon"], raw["silence"])
        graph = cls(lex, raw["states_per_phone"], np.array(raw["loop_prob"]), raw["silence_prob"])
        if graph.phones != raw["phones"]:
            raise ValueError("stored phone inventory does not match lexicon")
        return graph


@dataclass
class Unit:
    """A run of HMM states in a linear graph; optional units may be skipped."""

    label: str
    ids: np.ndarray
    loop: np.ndarray
    fwd: np.ndarray
    optional: bool = False


def utterance_units(graph: HmmGraph, words, optional_silence: bool = True) -> list[Unit]:
    """[SIL?] w1 [SIL?] w2 ... wn [SIL?] using each word's first pronunciation."""
    sil = graph.lexicon.silence
    units = []
    if optional_silence:
        units.append(Unit(sil, *graph.chain([sil]), optional=True))
    for w in words:
        units.append(Unit(w, *graph.chain(graph.lexicon.pronunciations(w)[0])))
        if optional_silence:
            units.append(Unit(sil, *graph.chain([sil]), optional=True))
    return units


def align_units(scores: np.ndarray, units: list[Unit], skip_logp: float = LOG_HALF):
    """Viterbi alignment of frames to a linear sequence of units.

    An optional unit is entered or skipped with log probability
    ``skip_logp`` each. Returns (best log score, per-frame state ids,
    per-frame position in the expanded graph) or (-inf, None, None)
    when no path fits.
    """
    T = scores.shape[0]
    ids = np.concatenate([u.ids for u in units])
    loop = np.concatenate([u.loop for u in units])
    fwd = np.concatenate([u.fwd for u in units])
    N = ids.shape[0]
    starts = np.cumsum([0] + [len(u.ids) for u in units])
    heads = starts[:-1]
    lasts = starts[1:] - 1

    # entry candidates for each unit head: (source last state or -1 for <start>, log weight)
    entries: list[list[tuple[int, float]]] = []
    reach = [(-1, 0.0)]  # ways to arrive just before unit k
    for k, u in enumerate(units):
        entry_w = skip_logp if u.optional else 0.0
        entries.append([(src, w + entry_w) for src, w in reach])
        after = [(lasts[k], 0.0)]
        if u.optional:
            after += [(src, w + skip_logp) for src, w in reach]
        reach = after
    finals = reach  # ways to leave the last unit

    is_head = np.zeros(N, dtype=bool)
    is_head[heads] = True
    am = scores[:, ids]
    delta = np.full(N, -np.inf)
    back = np.zeros((T, N), dtype=np.int64)
    for k, h in enumerate(heads):
        for src, w in entries[k]:
            if src == -1 and w > delta[h]:
                delta[h] = w
                back[0, h] = -1
    delta = delta + am[0]
    prev_idx = np.arange(N) - 1
    for t in range(1, T):
        stay = delta + loop
        move = np.full(N, -np.inf)
        move[~is_head] = delta[prev_idx[~is_head]] + fwd[prev_idx[~is_head]]
        best = np.where(move > stay, move, stay)
        arg = np.where(move > stay, prev_idx, np.arange(N))
        for k, h in enumerate(heads):
            for src, w in entries[k]:
                if src < 0:
                    continue
                cand = delta[src] + fwd[src] + w
                if cand > best[h]:
                    best[h] = cand
                    arg[h] = src
        back[t] = arg
        delta = best + am[t]
    final = -np.inf
    end = -1
    for src, w in finals:
        if src < 0:
            continue
        cand = delta[src] + fwd[src] + w
        if cand > final:
            final, end = cand, src
    if not np.isfinite(final):
        return -np.inf, None, None
    path = np.empty(T, dtype=np.int64)
    path[-1] = end
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return float(final), ids[path], path
