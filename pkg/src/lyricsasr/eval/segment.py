"""Greedy grouping of timed lyric lines into 20-30 s utterances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class LineAnnotation:
    text: str
    start_sec: float
    end_sec: float

    def __post_init__(self):
        if not 0 <= self.start_sec < self.end_sec:
            raise ValueError(f"bad line span [{self.start_sec}, {self.end_sec}]")


@dataclass
class Segment:
    lines: list[LineAnnotation]
    oversize: bool = False
    undersize: bool = False

    @property
    def start_sec(self) -> float:
        return self.lines[0].start_sec

    @property
    def end_sec(self) -> float:
        return self.lines[-1].end_sec

    @property
    def span(self) -> float:
        return self.end_sec - self.start_sec

    @property
    def text(self) -> str:
        return " ".join(line.text for line in self.lines)


def segment_lines(lines: Sequence[LineAnnotation], min_sec: float = 20.0, max_sec: float = 30.0) -> list[Segment]:
    """Merge consecutive lines left to right while the span stays <= max_sec.

    A line longer than ``max_sec`` on its own is flagged oversize; any
    segment shorter than ``min_sec`` is flagged undersize.
    """
    for a, b in zip(lines, lines[1:]):
        if b.start_sec < a.start_sec:
            raise ValueError(f"lines are not sorted: {b.start_sec} follows {a.start_sec}")
        if b.start_sec < a.end_sec:
            raise ValueError(f"lines overlap: [{a.start_sec}, {a.end_sec}] and [{b.start_sec}, {b.end_sec}]")
    segments: list[Segment] = []
    current: list[LineAnnotation] = []
    for line in lines:
        if current and line.end_sec - current[0].start_sec > max_sec:
            segments.append(Segment(current))
            current = []
        current.append(line)
    if current:
        segments.append(Segment(current))
    for seg in segments:
        seg.oversize = seg.span > max_sec
        seg.undersize = seg.span < min_sec
    return segments
