"""Scoring: alignments, WER, error and genre tables, confidence bins, segmentation."""

from .align import AlignmentResult, align_transcripts, format_alignment, normalize_text
from .reports import (
    ConfidenceBin, ErrorRow, EvalReport, GenreTable, ZeroReferenceError, aggregate_errors, bins_csv,
    confidence_bins, format_error_table, genre_counts_table, genre_report, merge_bins, percent,
    read_genre_map, read_transcripts, wer, write_transcripts,
)
from .segment import LineAnnotation, Segment, segment_lines

__all__ = [
    "AlignmentResult", "ConfidenceBin", "ErrorRow", "EvalReport", "GenreTable", "LineAnnotation", "Segment",
    "ZeroReferenceError", "aggregate_errors", "align_transcripts", "bins_csv", "confidence_bins",
    "format_alignment", "format_error_table", "genre_counts_table", "genre_report", "merge_bins",
    "normalize_text", "percent", "read_genre_map", "read_transcripts", "segment_lines", "wer",
    "write_transcripts",
]
