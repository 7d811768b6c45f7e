"""Input coercion shared by the estimators."""
from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .graph import Graph, from_adjacency
from .groups import GroupAssignment, build_groups


def check_graph(X) -> Graph:
    """Accept a :class:`Graph`, a symmetric (sparse) adjacency matrix, or a
    networkx graph with integer nodes ``0..n-1``."""
    if isinstance(X, Graph):
        return X
    if hasattr(X, "nodes") and hasattr(X, "edges") and not sp.issparse(X):
        import networkx as nx

        nodes = sorted(X.nodes)
        if nodes != list(range(len(nodes))):
            raise ValueError("networkx graph nodes must be the integers 0..n-1")
        return from_adjacency(nx.to_scipy_sparse_array(X, nodelist=nodes, weight="weight"))
    if sp.issparse(X) or isinstance(X, np.ndarray):
        return from_adjacency(X)
    raise TypeError(f"cannot interpret {type(X).__name__} as a graph")


def check_groups(groups, n: int) -> GroupAssignment:
    if isinstance(groups, GroupAssignment):
        ga = groups
    else:
        groups = np.asarray(groups)
        if groups.ndim != 1:
            raise ValueError("groups must be a 1-d array of labels")
        ga = build_groups(groups)
    if ga.n != n:
        raise ValueError(f"groups have {ga.n} labels but the graph has {n} vertices")
    return ga


def check_alpha(alpha) -> float:
    if not isinstance(alpha, numbers.Real) or not np.isfinite(alpha) or alpha < 0:
        raise ValueError(f"alpha must be a finite nonnegative number, got {alpha!r}")
    return float(alpha)
