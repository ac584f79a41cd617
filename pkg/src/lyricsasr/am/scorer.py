"""Acoustic scorers: the contract, diagonal GMMs, and table-driven scorers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from ..features import FeatureMatrix

LOG_2PI = float(np.log(2.0 * np.pi))


@runtime_checkable
class AcousticScorer(Protocol):
    """Anything that scores feature frames against HMM states.

    ``score_matrix`` returns a (frames, num_states) array of log scores;
    ``subsampling`` is the frame subsampling factor the decoder applies.
    """

    num_states: int
    subsampling: int

    def score_matrix(self, fm: FeatureMatrix) -> np.ndarray: ...

    def log_likelihood(self, fm: FeatureMatrix, frame: int, state: int) -> float: ...


@dataclass
class GmmScorer:
    """Per-state mixtures of diagonal Gaussians.

    Arrays are padded to a common component count; unused components
    carry zero weight.
    """

    weights: np.ndarray  # (states, M)
    means: np.ndarray  # (states, M, D)
    variances: np.ndarray  # (states, M, D)
    var_floor: np.ndarray  # (D,)
    subsampling: int = 1
    transform: np.ndarray | None = None  # (input dims, D) projection applied before scoring

    @property
    def num_states(self) -> int:
        return self.weights.shape[0]

    @property
    def dims(self) -> int:
        """Input feature dimension."""
        return self.means.shape[2] if self.transform is None else self.transform.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        return x if self.transform is None else x @ self.transform

    def num_components(self, state: int) -> int:
        return int(np.count_nonzero(self.weights[state] > 0))

    def component_loglik(self, x: np.ndarray) -> np.ndarray:
        """log w_m + log N(x; mu_m, var_m) for every frame, state and component."""
        s, m, d = self.means.shape
        inv = 1.0 / self.variances.reshape(s * m, d)
        mu = self.means.reshape(s * m, d)
        const = -0.5 * (d * LOG_2PI + np.log(self.variances.reshape(s * m, d)).sum(axis=1) + (mu * mu * inv).sum(axis=1))
        quad = -0.5 * (x * x) @ inv.T + x @ (mu * inv).T
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights.reshape(s * m))
        return (quad + const + logw).reshape(x.shape[0], s, m)

    def score_matrix(self, fm: FeatureMatrix) -> np.ndarray:
        if fm.dims != self.dims:
            raise ValueError(f"feature dims {fm.dims} do not match scorer dims {self.dims}")
        comp = self.component_loglik(self.project(fm.values))
        top = comp.max(axis=2, keepdims=True)
        return (top + np.log(np.exp(comp - top).sum(axis=2, keepdims=True)))[:, :, 0]

    def log_likelihood(self, fm: FeatureMatrix, frame: int, state: int) -> float:
        x = self.project(fm.values[frame])
        w = self.weights[state]
        keep = w > 0
        mu, var = self.means[state][keep], self.variances[state][keep]
        terms = np.log(w[keep]) - 0.5 * (np.log(2 * np.pi * var) + (x - mu) ** 2 / var).sum(axis=1)
        top = terms.max()
        return float(top + np.log(np.exp(terms - top).sum()))

    def save(self, path) -> None:
        extra = {} if self.transform is None else {"transform": self.transform}
        np.savez(path, weights=self.weights, means=self.means, variances=self.variances,
                 var_floor=self.var_floor, subsampling=self.subsampling, **extra)

    @classmethod
    def load(cls, path) -> "GmmScorer":
        with np.load(path) as z:
            transform = z["transform"] if "transform" in z.files else None
            return cls(z["weights"], z["means"], z["variances"], z["var_floor"], int(z["subsampling"]), transform)


@dataclass
class TableScorer:
    """Scores read from a fixed (frames, states) table; handy for oracles."""

    table: np.ndarray
    subsampling: int = 1

    @property
    def num_states(self) -> int:
        return self.table.shape[1]

    def score_matrix(self, fm: FeatureMatrix) -> np.ndarray:
        if fm.num_frames != self.table.shape[0]:
            raise ValueError(f"table has {self.table.shape[0]} frames, features have {fm.num_frames}")
        return self.table

    def log_likelihood(self, fm: FeatureMatrix, frame: int, state: int) -> float:
        return float(self.table[frame, state])


def one_hot_scorer(state_sequence, num_states: int, on: float = 0.0, off: float = -50.0) -> TableScorer:
    """A scorer that strongly prefers a given per-frame state sequence."""
    table = np.full((len(state_sequence), num_states), off)
    table[np.arange(len(state_sequence)), np.asarray(state_sequence)] = on
    return TableScorer(table)
