"""Lexicon, GMM-HMM acoustic models, Viterbi decoding and N-best lists."""

from .decoder import DecodeConfig, bigram_matrix, viterbi_decode
from .hmm import HmmGraph, align_units, utterance_units
from .lexicon import SILENCE, Lexicon, LexiconError, parse_lexicon, read_lexicon
from .nbest import (
    Hypothesis, NBestList, ctm_lines, nbest_from_dict, nbest_to_dict, posteriors, rescore_nbest, word_confidence,
)
from .scorer import AcousticScorer, GmmScorer, TableScorer, one_hot_scorer
from .train import TrainConfig, TrainingError, TrainResult, lda_transform, segment_means, train_gmm_hmm

__all__ = [
    "AcousticScorer", "DecodeConfig", "GmmScorer", "HmmGraph", "Hypothesis", "Lexicon", "LexiconError",
    "NBestList", "SILENCE", "TableScorer", "TrainConfig", "TrainResult", "TrainingError", "align_units",
    "bigram_matrix", "ctm_lines", "lda_transform", "nbest_from_dict", "nbest_to_dict", "one_hot_scorer", "parse_lexicon", "posteriors", "read_lexicon",
    "rescore_nbest", "segment_means", "train_gmm_hmm", "utterance_units", "viterbi_decode", "word_confidence",
]
