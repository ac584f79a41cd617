"""N-gram language models: counting, Kneser-Ney, ARPA, mixing, pruning."""

from .arpa import ArpaCountMismatch, ArpaError, parse_arpa, read_arpa, serialize_arpa, write_arpa
from .counts import CountsTable, count_ngrams, read_corpus, read_counts, write_counts
from .kneser_ney import train_kneser_ney
from .mixing import InterpolationConfig, interpolate, perplexity, tune_weight
from .model import BOS, EOS, UNK, NGramModel, normalization_error, recompute_backoffs
from .prune import prune_entropy

__all__ = [
    "ArpaCountMismatch", "ArpaError", "BOS", "CountsTable", "EOS", "InterpolationConfig", "NGramModel", "UNK",
    "count_ngrams", "interpolate", "normalization_error", "parse_arpa", "perplexity", "prune_entropy",
    "read_arpa", "read_corpus", "read_counts", "recompute_backoffs", "serialize_arpa", "train_kneser_ney", "tune_weight",
    "write_arpa", "write_counts",
]
