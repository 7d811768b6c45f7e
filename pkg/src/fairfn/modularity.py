"""From-scratch modularity evaluators.

These are the reference values the incremental merge engine is checked
against, so none of them share code with :mod:`fairfn.agglomerate`.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .graph import DirectedGraph, Graph
from .groups import GroupAssignment, Partition, _check_same_n, group_counts


def _check_graph_partition(n: int, p: Partition):
    if n != p.n:
        raise ValueError(f"graph has {n} vertices but partition has {p.n}")


def modularity_q(g: Graph, p: Partition) -> float:
    """Newman modularity ``sum_u (e_uu - a_u^2)`` of ``p`` on ``g``."""
    _check_graph_partition(g.n, p)
    if g.m <= 0:
        raise ValueError("modularity is undefined for a graph without edges")
    two_m = 2.0 * g.m
    lab = p.community_of
    same = lab[g.rows] == lab[g.cols]
    internal = np.bincount(lab[g.rows[same]], weights=2.0 * g.weights[same], minlength=p.k)
    if g.loops is not None:
        internal += np.bincount(lab, weights=g.loops, minlength=p.k)
    vol = np.bincount(lab, weights=g.degree, minlength=p.k)
    a = vol / two_m
    return float(np.sum(internal / two_m - a * a))


def directed_modularity(dg: DirectedGraph, p: Partition) -> float:
    """Directed modularity normalised by the total arc weight.

    ``Q = (1/M) sum_ij [A_ij - kin_i kout_j / M] delta(c_i, c_j)`` with
    ``M = sum_i kin_i = sum_i kout_i``.  With this normalisation a reciprocal
    digraph has the same modularity as its undirected collapse.
    """
    _check_graph_partition(dg.n, p)
    M = dg.m_directed
    if M <= 0:
        raise ValueError("directed modularity is undefined without arcs")
    lab = p.community_of
    same = lab[dg.src] == lab[dg.dst]
    internal = np.bincount(lab[dg.src[same]], weights=dg.weights[same], minlength=p.k)
    kin = np.bincount(lab, weights=dg.in_degree, minlength=p.k)
    kout = np.bincount(lab, weights=dg.out_degree, minlength=p.k)
    return float(np.sum(internal / M - kin * kout / (M * M)))


def _qp_numerator(counts: np.ndarray, sizes: np.ndarray) -> tuple[int, int]:
    """Exact integer ``(num, den)`` with ``Q^P = num / den``."""
    two_mp = int(np.dot(sizes, sizes))
    sq = sum(int(x) * int(x) for x in counts.ravel())
    vol = counts @ sizes
    vol_sq = sum(int(v) * int(v) for v in vol)
    return two_mp * sq - vol_sq, two_mp * two_mp


def qp_from_counts(counts, sizes):
    """Fairness-modularity from a ``k x r`` count matrix.

    Leading axes are treated as a batch (zero rows stand for absent
    communities), which is how exhaustive enumerations evaluate many
    partitions at once.  Values are exact up to a single final rounding.
    """
    counts = np.asarray(counts)
    sizes = np.asarray(sizes)
    if counts.ndim == 2:
        num, den = _qp_numerator(counts, sizes)
        return float(Fraction(num, den))
    # int64 keeps every intermediate exact while n^4 fits in a double mantissa
    dtype = np.int64 if int(sizes.sum()) ** 4 < 2**53 else object
    c, s = counts.astype(dtype), sizes.astype(dtype)
    two_mp = (s * s).sum()
    vol = c @ s
    num = two_mp * (c * c).sum(axis=(-2, -1)) - (vol * vol).sum(axis=-1)
    return np.asarray(num / (two_mp * two_mp), dtype=np.float64)


def fairness_modularity_qp(ga: GroupAssignment, p: Partition) -> float:
    """Modularity of ``p`` on the protected-group network, from group counts.

    ``Q^P = (1/2m^P) [sum_uw c_uw^2 - (1/2m^P) sum_u (sum_w c_uw |P_w|)^2]``,
    evaluated exactly in integers and rounded once, so fair partitions give
    exactly ``0.0``.
    """
    _check_same_n(p, ga)
    return qp_from_counts(group_counts(p, ga), ga.sizes)


def qp_bounds(ga: GroupAssignment) -> tuple[float, float, float]:
    """``(lower, upper, singleton_value)`` for fairness-modularity.

    ``upper = 1 - 1/(2m^P)`` is a valid bound but is not attained in general;
    the partition into protected groups reaches ``1 - sum|P_w|^4/(2m^P)^2``
    (see :func:`qp_of_groups`).
    """
    two_mp = ga.two_m_p
    cube = int(np.sum(ga.sizes.astype(object) ** 3))
    upper = float(Fraction(two_mp - 1, two_mp))
    singleton = float(Fraction(ga.n * two_mp - cube, two_mp * two_mp))
    return 0.0, upper, singleton


def qp_of_groups(ga: GroupAssignment) -> float:
    """Fairness-modularity of the partition whose communities are the groups."""
    two_mp = ga.two_m_p
    quart = int(np.sum(ga.sizes.astype(object) ** 4))
    return float(Fraction(two_mp * two_mp - quart, two_mp * two_mp))
