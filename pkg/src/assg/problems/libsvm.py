"""LibSVM sparse text format: ``label idx:val idx:val ...`` with 1-based indices."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, ParseError
from .objective import Dataset


def _parse_float(tok, lineno, what):
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"invalid {what} {tok!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite {what} {tok!r}", lineno)
    return v


def parse_libsvm_lines(lines):
    """Parse an iterable of text lines into (labels, rows, dim).

    Blank lines and ``#`` comments are skipped.  Indices must be positive and
    strictly ascending within a line.
    """
    labels = []
    rows = []
    dim = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        labels.append(_parse_float(toks[0], lineno, "label"))
        row = {}
        prev = 0
        for tok in toks[1:]:
            key, sep, val = tok.partition(":")
            if not sep:
                raise ParseError(f"expected index:value, got {tok!r}", lineno)
            try:
                i = int(key)
            except ValueError:
                raise ParseError(f"invalid feature index {key!r}", lineno) from None
            if i < 1:
                raise ParseError(f"feature index must be >= 1, got {i}", lineno)
            if i <= prev:
                raise ParseError(f"feature indices not ascending at {i}", lineno)
            prev = i
            row[i] = _parse_float(val, lineno, "feature value")
        dim = max(dim, prev)
        rows.append(row)
    return labels, rows, dim


def load_libsvm(path) -> Dataset:
    """Read a LibSVM file into a dense Dataset with dim = largest index seen."""
    with open(path, encoding="utf-8") as fh:
        labels, rows, dim = parse_libsvm_lines(fh)
    if not labels:
        raise ConfigurationError(f"{path}: no samples")
    # an all-label file still has one (zero) feature so the Dataset is well formed
    X = np.zeros((len(rows), max(dim, 1)))
    for r, row in enumerate(rows):
        for i, v in row.items():
            X[r, i - 1] = v
    return Dataset(X, labels)


def write_libsvm(dataset: Dataset, path) -> None:
    """Write `dataset`, omitting zeros; floats use repr so reloading is exact."""
    d = dataset.dim
    out = []
    for r, (x, y) in enumerate(zip(dataset.X, dataset.y)):
        parts = [repr(float(y))]
        parts += [f"{i + 1}:{float(v)!r}" for i, v in enumerate(x) if v != 0.0]
        if r == 0 and x[d - 1] == 0.0:
            # pin the dimension when trailing columns are all zero
            parts.append(f"{d}:0.0")
        out.append(" ".join(parts))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")
