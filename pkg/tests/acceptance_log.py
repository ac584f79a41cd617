"""Shared record of acceptance outcomes, printed by conftest at the end of the run."""

RESULTS: dict[int, tuple[bool, str, str]] = {}


def record(number: int, title: str, ok: bool, detail: str) -> bool:
    RESULTS[number] = (bool(ok), title, detail)
    print(f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {title}: {detail}")
    return bool(ok)
