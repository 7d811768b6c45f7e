"""Sparse undirected weighted graphs and their directed counterpart.

A :class:`Graph` stores each undirected edge once as ``(i, j, w)`` with
``i < j``.  Self-loops are forbidden for observed graphs; the only producer
of diagonal weight is :func:`symmetrize_directed`, which needs it to express
a directed network with loops as an equivalent undirected one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised when an edge list cannot be parsed into a valid graph."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected weighted graph on vertices ``0..n-1``.

    Attributes
    ----------
    n : int
        Number of vertices.
    rows, cols : ndarray of int64
        Edge endpoints with ``rows < cols``, sorted lexicographically.
    weights : ndarray of float64
        Positive edge weights aligned with ``rows``/``cols``.
    loops : ndarray of float64 or None
        Diagonal adjacency entries. ``None`` for every observed graph.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    loops: np.ndarray | None = None
    degree: np.ndarray = field(init=False, repr=False)
    total_weight_m: float = field(init=False)

    def __post_init__(self):
        deg = np.zeros(self.n, dtype=np.float64)
        np.add.at(deg, self.rows, self.weights)
        np.add.at(deg, self.cols, self.weights)
        if self.loops is not None:
            deg += self.loops
        object.__setattr__(self, "degree", deg)
        object.__setattr__(self, "total_weight_m", float(deg.sum()) / 2.0)
        for arr in (self.rows, self.cols, self.weights, deg):
            arr.flags.writeable = False

    @property
    def m(self) -> float:
        return self.total_weight_m

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR adjacency; the diagonal holds ``loops`` if present."""
        r = np.concatenate([self.rows, self.cols])
        c = np.concatenate([self.cols, self.rows])
        w = np.concatenate([self.weights, self.weights])
        if self.loops is not None:
            idx = np.flatnonzero(self.loops)
            r = np.concatenate([r, idx])
            c = np.concatenate([c, idx])
            w = np.concatenate([w, self.loops[idx]])
        return sp.csr_matrix((w, (r, c)), shape=(self.n, self.n))

    def edges(self) -> Iterable[tuple[int, int, float]]:
        for i, j, w in zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist()):
            yield i, j, w

    def is_weighted(self) -> bool:
        return bool(np.any(self.weights != 1.0))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        same_loops = (self.loops is None and other.loops is None) or (
            self.loops is not None
            and other.loops is not None
            and np.array_equal(self.loops, other.loops)
        )
        return (
            self.n == other.n
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.weights, other.weights)
            and same_loops
        )

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.n_edges}, m={self.m:g})"


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Immutable directed weighted graph; self-loops permitted.

    ``m_directed`` is the total arc weight, which equals both the in-degree
    sum and the out-degree sum.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    weights: np.ndarray
    in_degree: np.ndarray = field(init=False, repr=False)
    out_degree: np.ndarray = field(init=False, repr=False)
    m_directed: float = field(init=False)

    def __post_init__(self):
        kin = np.bincount(self.dst, weights=self.weights, minlength=self.n).astype(np.float64)
        kout = np.bincount(self.src, weights=self.weights, minlength=self.n).astype(np.float64)
        object.__setattr__(self, "in_degree", kin)
        object.__setattr__(self, "out_degree", kout)
        object.__setattr__(self, "m_directed", float(self.weights.sum()))

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weights, (self.src, self.dst)), shape=(self.n, self.n))


def from_edges(n: int, edges: Iterable[Sequence[float]]) -> Graph:
    """Build a :class:`Graph` from ``(u, v)`` or ``(u, v, w)`` tuples.

    Raises ``GraphFormatError`` on self-loops, duplicates, non-positive weights
    or vertex ids outside ``0..n-1``.
    """
    seen: dict[tuple[int, int], float] = {}
    for e in edges:
        u, v = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) > 2 else 1.0
        _check_edge(u, v, w, n, seen)
        seen[(min(u, v), max(u, v))] = w
    return _build(n, seen)


def _check_edge(u, v, w, n, seen, where=""):
    if u == v:
        raise GraphFormatError(f"{where}self-loop on vertex {u}")
    if u < 0 or v < 0 or (n is not None and max(u, v) >= n):
        raise GraphFormatError(f"{where}vertex id out of range: {u} {v}")
    if not (w > 0) or not np.isfinite(w):
        raise GraphFormatError(f"{where}edge weight must be positive, got {w}")
    if (min(u, v), max(u, v)) in seen:
        raise GraphFormatError(f"{where}duplicate edge {u} {v}")


def _build(n: int, pairs: dict[tuple[int, int], float]) -> Graph:
    keys = sorted(pairs)
    rows = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
    cols = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
    w = np.fromiter((pairs[k] for k in keys), dtype=np.float64, count=len(keys))
    return Graph(n, rows, cols, w)


def from_arrays(n, rows, cols, weights=None) -> Graph:
    """Vectorised constructor; pairs are canonicalised and validated."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    weights = np.ones(len(rows)) if weights is None else np.asarray(weights, dtype=np.float64)
    if np.any(rows == cols):
        raise GraphFormatError("self-loops are not allowed")
    if len(rows) and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= n):
        raise GraphFormatError("vertex id out of range")
    if np.any(~(weights > 0)) or not np.all(np.isfinite(weights)):
        raise GraphFormatError("edge weights must be positive and finite")
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    order = np.lexsort((hi, lo))
    lo, hi, weights = lo[order], hi[order], weights[order]
    if len(lo) > 1 and np.any((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])):
        raise GraphFormatError("duplicate edges")
    return Graph(int(n), lo, hi, weights)


def from_adjacency(adj) -> Graph:
    """Build a graph from a symmetric dense or sparse adjacency matrix."""
    a = sp.csr_matrix(adj, dtype=np.float64)
    if a.shape[0] != a.shape[1]:
        raise GraphFormatError("adjacency matrix must be square")
    if (abs(a - a.T) > 1e-12 * max(1.0, abs(a).max())).nnz:
        raise GraphFormatError("adjacency matrix must be symmetric")
    if a.diagonal().any():
        raise GraphFormatError("self-loops are not allowed")
    upper = sp.triu(a, k=1).tocoo()
    keep = upper.data != 0
    return from_arrays(a.shape[0], upper.row[keep], upper.col[keep], upper.data[keep])


def load_edge_list(text: str, n: int | None = None) -> Graph:
    """Parse ``u v [w]`` lines (``#`` comments) into a :class:`Graph`.

    ``n`` defaults to the ``# n=`` header written by :func:`dump_edge_list`
    if present, else one more than the largest vertex id.
    """
    if n is None:
        n = header_vertex_count(text)
    pairs: dict[tuple[int, int], float] = {}
    top = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        where = f"line {lineno}: "
        if len(toks) not in (2, 3):
            raise GraphFormatError(f"{where}expected 'u v [w]', got {raw!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
            w = float(toks[2]) if len(toks) == 3 else 1.0
        except ValueError:
            raise GraphFormatError(f"{where}non-numeric token in {raw!r}") from None
        _check_edge(u, v, w, None, pairs, where)
        pairs[(min(u, v), max(u, v))] = w
        top = max(top, u, v)
    if n is None:
        n = top + 1
    elif top >= n:
        raise GraphFormatError(f"vertex id {top} out of range for n={n}")
    return _build(n, pairs)


def read_edge_list(path, n: int | None = None) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh.read(), n)


def dump_edge_list(g: Graph) -> str:
    """Canonical serialisation, sorted by ``(i, j)``; weights only if not all 1.

    Isolated trailing vertices are recorded in a ``# n=`` header so that
    the vertex count survives a round trip.
    """
    weighted = g.is_weighted()
    lines = [f"# n={g.n}"]
    for i, j, w in g.edges():
        lines.append(f"{i} {j} {w!r}" if weighted else f"{i} {j}")
    return "\n".join(lines) + "\n"


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_edge_list(g))


def header_vertex_count(text: str) -> int | None:
    for raw in text.splitlines():
        s = raw.strip()
        if s.startswith("# n="):
            return int(s[4:])
        if s and not s.startswith("#"):
            break
    return None


def scale_weights(g: Graph, c: float) -> Graph:
    if not c > 0:
        raise ValueError(f"scale factor must be positive, got {c}")
    loops = None if g.loops is None else g.loops * c
    return Graph(g.n, g.rows.copy(), g.cols.copy(), g.weights * c, loops)


def permute_vertices(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel vertex ``i`` as ``perm[i]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (g.n,) or not np.array_equal(np.sort(perm), np.arange(g.n)):
        raise ValueError("perm must be a bijection on 0..n-1")
    out = from_arrays(g.n, perm[g.rows], perm[g.cols], g.weights)
    if g.loops is not None:
        loops = np.zeros(g.n)
        loops[perm] = g.loops
        out = Graph(out.n, out.rows, out.cols, out.weights, loops)
    return out


def symmetrize_directed(dg: DirectedGraph) -> Graph:
    """Collapse a reciprocal digraph into its equivalent undirected graph.

    Each arc pair ``(i, j), (j, i)`` becomes one edge of the same weight and a
    loop arc of weight ``w`` becomes a diagonal entry ``w`` -- half an edge --
    so that degrees equal in-degrees and ``2m`` equals the total arc weight.
    """
    a = dg.adjacency
    if (abs(a - a.T) > 0).nnz:
        raise ValueError("directed graph is not reciprocal with equal weights")
    loops = a.diagonal().astype(np.float64)
    upper = sp.triu(a, k=1).tocoo()
    g = from_arrays(dg.n, upper.row, upper.col, upper.data)
    return Graph(g.n, g.rows, g.cols, g.weights, loops if loops.any() else None)


def to_directed(g: Graph) -> DirectedGraph:
    """Replace each undirected edge by two opposite arcs; loops stay single arcs."""
    src = [g.rows, g.cols]
    dst = [g.cols, g.rows]
    w = [g.weights, g.weights]
    if g.loops is not None:
        idx = np.flatnonzero(g.loops)
        src.append(idx)
        dst.append(idx)
        w.append(g.loops[idx])
    return DirectedGraph(g.n, np.concatenate(src), np.concatenate(dst), np.concatenate(w))


def protected_group_network(group_of: Sequence[int]) -> DirectedGraph:
    """Materialise the protected-group digraph: a complete digraph with
    self-loops on every group.  Quadratic in group size; testing only.
    """
    group_of = np.asarray(group_of)
    src, dst = [], []
    for gid in np.unique(group_of):
        members = np.flatnonzero(group_of == gid)
        s, d = np.meshgrid(members, members, indexing="ij")
        src.append(s.ravel())
        dst.append(d.ravel())
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    return DirectedGraph(len(group_of), src, dst, np.ones(len(src)))
