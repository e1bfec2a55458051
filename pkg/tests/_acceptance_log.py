"""Collects one pass/fail line per acceptance criterion."""

LINES: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line, flush=True)
