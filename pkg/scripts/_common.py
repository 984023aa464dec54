import csv
import sys
from pathlib import Path


def writer(path: str | None):
    """CSV writer on a file (or stdout when path is None)."""
    if path is None:
        return csv.writer(sys.stdout), None
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fh = open(path, "w", newline="")
    return csv.writer(fh), fh


def fmt(x):
    return f"{x:.17g}" if isinstance(x, float) else x
