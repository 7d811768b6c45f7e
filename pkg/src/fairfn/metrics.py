"""Fairness and agreement metrics for partitions."""
from __future__ import annotations

import numpy as np

from .groups import GroupAssignment, Partition, group_counts
from .modularity import fairness_modularity_qp, modularity_q


def fairness_ratio_from_counts(counts, sizes):
    """``(per_community, overall)`` FR from count matrices.

    Leading axes of ``counts`` form a batch; all-zero rows are absent
    communities, reported as ``nan`` and ignored by the overall minimum.
    """
    counts = np.asarray(counts, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.float64)
    csize = counts.sum(axis=-1, keepdims=True)
    r_w = sizes / sizes.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        r_u = counts / csize
        ratio = np.minimum(r_u / r_w, np.where(r_u > 0, r_w / r_u, 0.0))
    live = csize[..., 0] > 0
    per = np.where(live, ratio.min(axis=-1), np.nan)
    overall = np.where(live, per, np.inf).min(axis=-1)
    return per, (float(overall) if overall.ndim == 0 else overall)


def fairness_ratio(p: Partition, ga: GroupAssignment) -> tuple[np.ndarray, float]:
    """Per-community and overall fairness ratio (FR).

    For community ``u`` and group ``w`` let ``r_uw`` be the share of ``u``
    belonging to ``w`` and ``r_w`` the global share.  ``FR(u)`` is the
    worst ``min(r_uw / r_w, r_w / r_uw)`` over groups and is 0 as soon as a
    group is missing from ``u``; the overall FR is the worst community.
    """
    return fairness_ratio_from_counts(group_counts(p, ga), ga.sizes)


def wasserstein_1d(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """1-Wasserstein distance on unit-spaced categories, along the last axis."""
    d = np.cumsum(np.asarray(x) - np.asarray(y), axis=-1)[..., :-1]
    return np.abs(d).sum(axis=-1)


def awd_from_counts(counts, sizes):
    """AWD from count matrices; batches and empty rows as in
    :func:`fairness_ratio_from_counts`."""
    counts = np.asarray(counts, dtype=np.float64)
    csize = counts.sum(axis=-1)
    n = csize.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_u = np.where(csize[..., None] > 0, counts / csize[..., None], 0.0)
    p = np.asarray(sizes, dtype=np.float64) / np.sum(sizes)
    out = (csize * wasserstein_1d(p_u, p)).sum(axis=-1) / n
    return float(out) if out.ndim == 0 else out


def awd(p: Partition, ga: GroupAssignment) -> float:
    """Size-weighted mean Wasserstein distance between each community's
    group distribution and the global one."""
    return awd_from_counts(group_counts(p, ga), ga.sizes)


def _entropy(counts: np.ndarray, n: int) -> float:
    pr = counts[counts > 0] / n
    return float(-np.sum(pr * np.log(pr)))


def nmi(p: Partition, truth: Partition) -> float:
    """Normalised mutual information, arithmetic-mean normalisation.

    Two single-cluster partitions count as identical (1.0).
    """
    if p.n != truth.n:
        raise ValueError(f"partitions have {p.n} and {truth.n} vertices")
    n = p.n
    table = np.zeros((p.k, truth.k))
    np.add.at(table, (p.community_of, truth.community_of), 1)
    h_p = _entropy(table.sum(axis=1), n)
    h_t = _entropy(table.sum(axis=0), n)
    if h_p == 0.0 and h_t == 0.0:
        return 1.0
    nz = table > 0
    outer = np.outer(table.sum(axis=1), table.sum(axis=0))
    mi = float(np.sum(table[nz] / n * np.log(table[nz] * n / outer[nz])))
    return float(np.clip(mi / ((h_p + h_t) / 2.0), 0.0, 1.0))


def max_proportion_deviation(p: Partition, ga: GroupAssignment) -> float:
    """Largest ``|r_uw - r_w|`` over communities and groups."""
    counts = group_counts(p, ga)
    r_u = counts / counts.sum(axis=1, keepdims=True)
    return float(np.abs(r_u - ga.proportions[None, :]).max())


REPORT_KEYS = ("num_communities", "q", "qp", "qp_x100", "fr", "awd", "nmi")


def partition_report(g, ga: GroupAssignment, p: Partition, truth: Partition | None = None) -> dict:
    """Flat metric record with keys from ``REPORT_KEYS`` (``nmi`` only with ``truth``)."""
    qp = fairness_modularity_qp(ga, p)
    out = {
        "num_communities": p.k,
        "q": modularity_q(g, p),
        "qp": qp,
        "qp_x100": qp * 100.0,
        "fr": fairness_ratio(p, ga)[1],
        "awd": awd(p, ga),
    }
    if truth is not None:
        out["nmi"] = nmi(p, truth)
    return out
