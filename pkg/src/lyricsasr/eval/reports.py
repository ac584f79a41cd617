"""Corpus-level scoring: WER, error tables, genre breakdowns, confidence bins."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from .align import AlignmentResult

GENRES = ("metal", "pop", "hiphop")


@dataclass
class EvalReport:
    utterances: dict[str, AlignmentResult] = field(default_factory=dict)
    genre: str | None = None

    def add(self, utt_id: str, result: AlignmentResult) -> None:
        self.utterances[utt_id] = result

    @property
    def correct(self) -> int:
        return sum(r.correct for r in self.utterances.values())

    @property
    def substitutions(self) -> int:
        return sum(r.substitutions for r in self.utterances.values())

    @property
    def insertions(self) -> int:
        return sum(r.insertions for r in self.utterances.values())

    @property
    def deletions(self) -> int:
        return sum(r.deletions for r in self.utterances.values())

    @property
    def ref_words(self) -> int:
        return sum(r.ref_len for r in self.utterances.values())

    @classmethod
    def merge(cls, reports: Sequence["EvalReport"]) -> "EvalReport":
        out = cls()
        for rep in reports:
            for utt, res in rep.utterances.items():
                if utt in out.utterances:
                    raise ValueError(f"utterance {utt!r} appears in more than one report")
                out.add(utt, res)
        return out


class ZeroReferenceError(ValueError):
    pass


def wer(result: AlignmentResult | EvalReport) -> float:
    """100 * (S + I + D) / N with counts pooled over all utterances."""
    if isinstance(result, AlignmentResult):
        errors, n = result.errors, result.ref_len
    else:
        errors = result.substitutions + result.insertions + result.deletions
        n = result.ref_words
    if n == 0:
        raise ZeroReferenceError("WER undefined: no reference words")
    return 100.0 * errors / n


def percent(count: int, total: int) -> Decimal:
    """100 * count / total rounded half-up to two decimals."""
    return (Decimal(100 * count) / Decimal(total)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


@dataclass
class ErrorRow:
    name: str
    insertions: int
    deletions: int
    substitutions: int
    ref_words: int

    @property
    def percentages(self) -> tuple[Decimal, Decimal, Decimal]:
        return (percent(self.insertions, self.ref_words), percent(self.deletions, self.ref_words),
                percent(self.substitutions, self.ref_words))


def error_row(name: str, report: EvalReport) -> ErrorRow:
    return ErrorRow(name, report.insertions, report.deletions, report.substitutions, report.ref_words)


def aggregate_errors(rows: Mapping[str, EvalReport | ErrorRow]) -> list[ErrorRow]:
    """Per-set insertion/deletion/substitution counts plus an "All" row of column sums."""
    if not rows:
        raise ValueError("need at least one report")
    out = [r if isinstance(r, ErrorRow) else error_row(name, r) for name, r in rows.items()]
    out.append(ErrorRow(
        "All",
        sum(r.insertions for r in out),
        sum(r.deletions for r in out),
        sum(r.substitutions for r in out),
        sum(r.ref_words for r in out),
    ))
    return out


def format_error_table(rows: Sequence[ErrorRow]) -> str:
    lines = []
    for r in rows:
        ins, dele, sub = r.percentages if r.ref_words else (None, None, None)
        line = f"{r.name:<16} {r.insertions} ins, {r.deletions} del, {r.substitutions} sub"
        if ins is not None:
            line += f"  |  {ins}% ins, {dele}% del, {sub}% sub  (N={r.ref_words})"
        lines.append(line)
    return "\n".join(lines)


@dataclass
class GenreTable:
    songs_per_set: dict[str, dict[str, int]]  # set -> genre -> count
    song_totals: dict[str, int]
    wer: dict[str, float]
    genres: tuple[str, ...]


def genre_report(song_reports: Mapping[str, EvalReport], genres: Mapping[str, str],
                 song_sets: Mapping[str, str] | None = None) -> GenreTable:
    """Pool songs by genre; song counts per test set and overall.

    Totals are computed from the per-set counts, never supplied.
    """
    missing = [s for s in song_reports if s not in genres]
    if missing:
        raise KeyError(f"songs without a genre: {missing}")
    order = [g for g in GENRES if g in set(genres.values())]
    order += sorted(set(genres[s] for s in song_reports) - set(order))
    per_set: dict[str, dict[str, int]] = defaultdict(lambda: {g: 0 for g in order})
    pooled: dict[str, list[EvalReport]] = defaultdict(list)
    for song, rep in song_reports.items():
        g = genres[song]
        per_set[(song_sets or {}).get(song, "all")][g] += 1
        pooled[g].append(rep)
    totals = {g: sum(counts[g] for counts in per_set.values()) for g in order}
    rates = {}
    for g in order:
        merged = EvalReport.merge(pooled[g])
        rates[g] = wer(merged) if merged.ref_words else float("nan")
    return GenreTable(dict(per_set), totals, rates, tuple(order))


def genre_counts_table(per_set: Mapping[str, Mapping[str, int]]) -> dict[str, int]:
    """Column sums of a set x genre song-count table."""
    totals: dict[str, int] = defaultdict(int)
    for counts in per_set.values():
        for g, c in counts.items():
            totals[g] += c
    return dict(totals)


@dataclass
class ConfidenceBin:
    low: float
    high: float
    correct: int = 0
    incorrect: int = 0


def confidence_bin_index(conf: float, bins: int) -> int:
    if not 0.0 <= conf <= 1.0:
        raise ValueError(f"confidence {conf} outside [0, 1]")
    return min(int(conf * bins), bins - 1)


def confidence_bins(words: Sequence[tuple[str, float]], alignment: AlignmentResult,
                    bins: int = 10) -> list[ConfidenceBin]:
    """Histogram of decoded-word confidences split by correctness.

    Equal-width bins over [0, 1]; the top bin is closed on the right. A
    decoded word counts as correct iff its alignment label is C.
    """
    labels = [label for _, hyp, label in alignment.pairs if hyp is not None]
    if len(labels) != len(words):
        raise ValueError(f"{len(words)} decoded words but {len(labels)} hypothesis tokens in the alignment")
    out = [ConfidenceBin(i / bins, (i + 1) / bins) for i in range(bins)]
    for (_, conf), label in zip(words, labels):
        b = out[confidence_bin_index(conf, bins)]
        if label == "C":
            b.correct += 1
        else:
            b.incorrect += 1
    return out


def merge_bins(tables: Sequence[Sequence[ConfidenceBin]]) -> list[ConfidenceBin]:
    out = [ConfidenceBin(b.low, b.high) for b in tables[0]]
    for table in tables:
        for acc, b in zip(out, table):
            acc.correct += b.correct
            acc.incorrect += b.incorrect
    return out


def bins_csv(bins: Sequence[ConfidenceBin]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["low", "high", "correct", "incorrect"])
    for b in bins:
        writer.writerow([f"{b.low:.2f}", f"{b.high:.2f}", b.correct, b.incorrect])
    return buf.getvalue()


def read_transcripts(path) -> dict[str, list[str]]:
    """``utt-id TOKEN TOKEN ...`` per line; tokens normalized."""
    from .align import normalize_text

    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.strip().split(maxsplit=1)
            if not parts:
                continue
            out[parts[0]] = normalize_text(parts[1]) if len(parts) > 1 else []
    return out


def write_transcripts(path, transcripts: Mapping[str, Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for utt in sorted(transcripts):
            fh.write(" ".join([utt, *transcripts[utt]]) + "\n")


def read_genre_map(path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] == ["song_id", "genre"]:
        rows = rows[1:]
    return {r[0]: r[1] for r in rows if r}
