"""Feature tables to graphs: CSV loading, z-scoring, exact k-NN graphs."""
from __future__ import annotations

import csv
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .graph import Graph, from_arrays

_ROW_CHUNK = 256


class FeatureError(ValueError):
    """Raised for unknown columns or non-numeric cells."""


def load_features(path, columns: Sequence[str] | None = None) -> np.ndarray:
    """Read numeric ``columns`` (all columns if ``None``) from a headed CSV.

    Row numbers in error messages count the header as line 1.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FeatureError(f"{path}: empty file") from None
        names = list(header) if columns is None else list(columns)
        missing = [c for c in names if c not in header]
        if missing:
            raise FeatureError(f"unknown column(s): {', '.join(missing)}")
        idx = [header.index(c) for c in names]
        rows, bad = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not x.strip() for x in rec):
                continue
            try:
                rows.append([float(rec[i]) for i in idx])
            except (ValueError, IndexError):
                bad.append(lineno)
    if bad:
        shown = ", ".join(map(str, bad[:10])) + (" ..." if len(bad) > 10 else "")
        raise FeatureError(f"non-numeric value in selected columns at line(s) {shown}")
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), len(idx))


def standardize(X) -> np.ndarray:
    """Column z-scores with the population standard deviation; constant
    columns become zeros."""
    X = np.asarray(X, dtype=np.float64)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    out = np.zeros_like(X)
    ok = sd > 0
    out[:, ok] = (X[:, ok] - mu[ok]) / sd[ok]
    return out


def sample_rows(X, n: int, seed: int = 0) -> np.ndarray:
    """Uniform sample of ``n`` rows without replacement, original order kept."""
    X = np.asarray(X)
    if n >= len(X):
        return X
    rng = np.random.default_rng(seed)
    return X[np.sort(rng.choice(len(X), size=n, replace=False))]


def knn_indices(X, k: int) -> np.ndarray:
    """``(n, k)`` indices of each point's nearest neighbours.

    Exact squared Euclidean distances; ties go to the lower index.
    """
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _ROW_CHUNK):
        D = cdist(X[start:start + _ROW_CHUNK], X, "sqeuclidean")
        rows = np.arange(len(D))
        D[rows, start + rows] = np.inf
        kth = np.partition(D, k - 1, axis=1)[:, k - 1]
        for r in rows:
            cand = np.flatnonzero(D[r] <= kth[r])
            out[start + r] = cand[np.argsort(D[r, cand], kind="stable")[:k]]
    return out


def knn_graph(X, k: int = 10) -> Graph:
    """Unweighted k-NN graph, symmetrised by union."""
    nbrs = knn_indices(X, k)
    src = np.repeat(np.arange(len(nbrs)), k)
    dst = nbrs.ravel()
    pairs = np.unique(np.stack([np.minimum(src, dst), np.maximum(src, dst)], axis=1), axis=0)
    return from_arrays(len(nbrs), pairs[:, 0], pairs[:, 1])


def write_features(X, path, names: Sequence[str] | None = None) -> None:
    X = np.asarray(X)
    names = [f"f{i}" for i in range(X.shape[1])] if names is None else list(names)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        w.writerows([repr(float(v)) for v in row] for row in X)
