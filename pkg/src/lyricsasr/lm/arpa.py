"""ARPA text format, read and canonical write."""

from __future__ import annotations

import io
import re
from typing import Iterable, TextIO

from .model import NGramModel

_NGRAM_LINE = re.compile(r"^ngram\s+(\d+)\s*=\s*(\d+)$")
_SECTION = re.compile(r"^\\(\d+)-grams:$")


class ArpaError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class ArpaCountMismatch(ArpaError):
    def __init__(self, order: int, declared: int, found: int):
        super().__init__(f"order {order}: header declares {declared} n-grams, section has {found}")
        self.order = order
        self.declared = declared
        self.found = found


def _lines(text) -> Iterable[str]:
    if isinstance(text, str):
        return io.StringIO(text)
    return text


def parse_arpa(text: str | TextIO) -> NGramModel:
    declared: dict[int, int] = {}
    entries: dict[int, dict] = {}
    state = "start"
    order = 0
    ended = False
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if state == "start":
            if line == "\\data\\":
                state = "header"
            continue
        if line == "\\end\\":
            ended = True
            break
        m = _SECTION.match(line)
        if m:
            order = int(m.group(1))
            if order not in declared:
                raise ArpaError(f"section \\{order}-grams: not declared in header", lineno)
            entries[order] = {}
            state = "body"
            continue
        if state == "header":
            m = _NGRAM_LINE.match(line)
            if not m:
                raise ArpaError(f"bad header line {line!r}", lineno)
            declared[int(m.group(1))] = int(m.group(2))
            continue
        fields = line.split()
        if len(fields) < order + 1:
            raise ArpaError(f"expected at least {order + 1} fields, got {len(fields)}", lineno)
        try:
            lp = float(fields[0])
        except ValueError:
            raise ArpaError(f"non-numeric log probability {fields[0]!r}", lineno) from None
        words = tuple(fields[1:order + 1])
        bo = None
        if len(fields) == order + 2:
            try:
                bo = float(fields[-1])
            except ValueError:
                raise ArpaError(f"non-numeric backoff weight {fields[-1]!r}", lineno) from None
        elif len(fields) > order + 2:
            raise ArpaError(f"too many fields for a {order}-gram", lineno)
        entries[order][words] = (lp, bo)
    if state == "start":
        raise ArpaError("missing \\data\\ header")
    if not ended:
        raise ArpaError("missing \\end\\ marker")
    if not declared:
        raise ArpaError("header declares no n-gram orders")
    top = max(declared)
    for n in range(1, top + 1):
        found = len(entries.get(n, {}))
        if declared.get(n, 0) != found:
            raise ArpaCountMismatch(n, declared.get(n, 0), found)
    return NGramModel(top, [entries.get(n, {}) for n in range(1, top + 1)])


def read_arpa(path) -> NGramModel:
    with open(path, encoding="utf-8") as fh:
        return parse_arpa(fh)


def serialize_arpa(model: NGramModel) -> str:
    """Canonical ARPA: ascending sections, sorted n-grams, 6-decimal logs."""
    out = ["\\data\\"]
    out += [f"ngram {n}={len(model.entries[n - 1])}" for n in range(1, model.order + 1)]
    for n in range(1, model.order + 1):
        out.append("")
        out.append(f"\\{n}-grams:")
        for key in sorted(model.entries[n - 1]):
            lp, bo = model.entries[n - 1][key]
            row = f"{lp:.6f}\t{' '.join(key)}"
            if bo is not None and not (n == model.order and bo == 0.0):
                row += f"\t{bo:.6f}"
            out.append(row)
    out += ["", "\\end\\", ""]
    return "\n".join(out)


def write_arpa(model: NGramModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_arpa(model))
