"""Collects one pass/fail line per acceptance criterion."""

import time
from contextlib import contextmanager

RESULTS: dict = {}
TABLES: list = []   # (title, rows) shown after the criteria


@contextmanager
def criterion(number: int, title: str):
    t0 = time.perf_counter()
    detail = {"note": ""}
    try:
        yield detail
    except BaseException as e:
        RESULTS[number] = (title, False, time.perf_counter() - t0, f"{type(e).__name__}: {e}".splitlines()[0])
        raise
    else:
        RESULTS[number] = (title, True, time.perf_counter() - t0, detail["note"])
    finally:
        n = number
        title_, ok, secs, note = RESULTS[n]
        print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} {title_} ({secs:.2f} s) {note}")


def lines():
    out = []
    for n in sorted(RESULTS):
        title, ok, secs, note = RESULTS[n]
        out.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  [{secs:.2f} s]  {note}".rstrip())
    return out


def table(title: str, rows: list[str]):
    TABLES.append((title, rows))
