"""Loader for the LIBSVM sparse text format.

Grammar per line: `<label> <idx>:<val> <idx>:<val> ...` with 1-based,
strictly increasing indices; `#` starts a comment; blank lines are skipped.
Files ending in .gz are decompressed transparently.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp


class ParseError(ValueError):
    """Malformed LIBSVM input, with location."""

    def __init__(self, message: str, line: int, column: int = 0,
                 path: Optional[str] = None):
        self.line = line
        self.column = column
        self.path = path
        loc = f"{path or '<input>'}:{line}"
        if column:
            loc += f":{column}"
        super().__init__(f"{loc}: {message}")


@dataclass(frozen=True)
class Dataset:
    """Sparse design matrix plus labels; indices stored 0-based internally."""

    n: int
    d: int
    X: sp.csr_matrix
    labels: np.ndarray

    def row(self, i: int) -> List[Tuple[int, float]]:
        s, e = self.X.indptr[i], self.X.indptr[i + 1]
        return list(zip(self.X.indices[s:e].tolist(), self.X.data[s:e].tolist()))


def parse_line(line: str, lineno: int = 1,
               path: Optional[str] = None) -> Tuple[float, List[Tuple[int, float]]]:
    """Parse one non-comment line into (label, [(1-based index, value), ...])."""
    body = line.split("#", 1)[0]
    tokens = body.split()
    if not tokens:
        raise ParseError("empty line", lineno, path=path)
    col = body.index(tokens[0]) + 1
    try:
        label = float(tokens[0])
    except ValueError:
        raise ParseError(f"unparseable label {tokens[0]!r}", lineno, col, path) from None
    features: List[Tuple[int, float]] = []
    prev_idx = 0
    pos = col + len(tokens[0])
    for tok in tokens[1:]:
        col = body.index(tok, pos - 1) + 1
        pos = col + len(tok)
        if ":" not in tok:
            raise ParseError(f"malformed feature token {tok!r} (missing ':')",
                             lineno, col, path)
        idx_s, val_s = tok.split(":", 1)
        try:
            idx = int(idx_s)
        except ValueError:
            raise ParseError(f"unparseable feature index {idx_s!r}",
                             lineno, col, path) from None
        if idx < 1:
            raise ParseError(f"feature index {idx} < 1", lineno, col, path)
        if idx <= prev_idx:
            raise ParseError(
                f"non-increasing feature index {idx} after {prev_idx}",
                lineno, col, path)
        try:
            val = float(val_s)
        except ValueError:
            raise ParseError(f"unparseable feature value {val_s!r}",
                             lineno, col, path) from None
        features.append((idx, val))
        prev_idx = idx
    return label, features


def _open_text(path: str):
    if str(path).endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def load_dataset(path: str, binarize_labels: bool = True,
                 subsample: Optional[int] = None, seed: int = 0,
                 stratify: bool = False, d_override: Optional[int] = None) -> Dataset:
    """Load a LIBSVM file into a Dataset.

    With binarize_labels, labels <= 0 map to -1 and > 0 to +1 (some
    distributions ship {0, 1} labels). subsample keeps k rows chosen by a
    seeded shuffle, optionally stratified by label so class proportions are
    preserved within one count per class.
    """
    labels: List[float] = []
    rows: List[List[Tuple[int, float]]] = []
    with _open_text(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            body = raw.split("#", 1)[0]
            if not body.strip():
                continue
            label, feats = parse_line(raw, lineno, path=str(path))
            labels.append(label)
            rows.append(feats)
    if not rows:
        raise ParseError("no data rows", 1, path=str(path))

    max_idx = max((f[-1][0] for f in rows if f), default=0)
    if d_override is not None:
        if d_override < max_idx:
            raise ValueError(
                f"d_override={d_override} is below the largest observed "
                f"feature index {max_idx}")
        d = d_override
    else:
        d = max_idx

    lab = np.asarray(labels, dtype=np.float64)
    if binarize_labels:
        lab = np.where(lab > 0, 1.0, -1.0)

    if subsample is not None and subsample < len(rows):
        rng = np.random.default_rng(seed)
        if stratify:
            keep: List[int] = []
            idx_all = np.arange(len(rows))
            for cls in np.unique(lab):
                cls_idx = idx_all[lab == cls]
                k = int(round(subsample * cls_idx.size / len(rows)))
                k = min(max(k, 0), cls_idx.size)
                keep.extend(rng.permutation(cls_idx)[:k].tolist())
            keep = sorted(keep)[:subsample]
        else:
            keep = sorted(rng.permutation(len(rows))[:subsample].tolist())
        rows = [rows[i] for i in keep]
        lab = lab[keep]

    indptr = [0]
    indices: List[int] = []
    data: List[float] = []
    for feats in rows:
        for idx, val in feats:
            indices.append(idx - 1)
            data.append(val)
        indptr.append(len(indices))
    X = sp.csr_matrix(
        (np.asarray(data, dtype=np.float64),
         np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int32)),
        shape=(len(rows), d))
    return Dataset(n=len(rows), d=d, X=X, labels=lab)


def serialize(dataset: Dataset) -> str:
    """Render a Dataset back to LIBSVM text (1-based indices, LF endings)."""
    out = []
    for i in range(dataset.n):
        parts = [_fmt(dataset.labels[i])]
        parts.extend(f"{idx + 1}:{_fmt(val)}" for idx, val in dataset.row(i))
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def _fmt(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))
