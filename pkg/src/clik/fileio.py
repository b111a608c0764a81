"""Atomic CSV output with round-trippable float formatting."""

from __future__ import annotations

import csv
import os
import tempfile


def fmt(value: float) -> str:
    """Shortest decimal representation that reads back bit-exactly."""
    return repr(float(value))


def atomic_csv(path, header, rows) -> None:
    """Write a CSV via a temp file and rename, so readers never see a
    partial file."""
    tmp = tempfile.NamedTemporaryFile(
        "w", dir=os.path.dirname(os.path.abspath(path)) or ".",
        suffix=".tmp", delete=False, newline="")
    try:
        writer = csv.writer(tmp)
        writer.writerow(header)
        writer.writerows(rows)
        tmp.close()
        os.replace(tmp.name, path)
    except BaseException:
        tmp.close()
        os.unlink(tmp.name)
        raise
