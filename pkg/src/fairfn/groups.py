"""Protected-group assignments, partitions, and group-count tables."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_FAIR_TOL = 1e-9


def _dense_labels(labels) -> np.ndarray:
    """Relabel to ``0..k-1`` in order of first appearance."""
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.ravel()]


@dataclass(frozen=True, eq=False)
class GroupAssignment:
    """Per-vertex protected-group labels and the derived protected-group
    network quantities (group sizes, per-vertex degree ``k_p``, edge count
    ``m_p``).  The network's adjacency is implied by ``group_of`` and never
    stored.
    """

    group_of: np.ndarray
    sizes: np.ndarray = field(init=False)
    k_p: np.ndarray = field(init=False, repr=False)
    m_p: float = field(init=False)

    def __post_init__(self):
        sizes = np.bincount(self.group_of).astype(np.int64)
        if np.any(sizes == 0):
            raise ValueError("every protected group must be nonempty")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "k_p", sizes[self.group_of])
        object.__setattr__(self, "m_p", float(np.dot(sizes, sizes)) / 2.0)
        for arr in (self.group_of, sizes, self.k_p):
            arr.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.group_of)

    @property
    def r(self) -> int:
        return len(self.sizes)

    @property
    def two_m_p(self) -> int:
        """``2 m^P`` as an exact integer (sum of squared group sizes)."""
        return int(np.dot(self.sizes, self.sizes))

    @property
    def proportions(self) -> np.ndarray:
        return self.sizes / self.n


def build_groups(labels: Sequence[int]) -> GroupAssignment:
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("group labels must be nonempty")
    return GroupAssignment(_dense_labels(labels))


@dataclass(frozen=True, eq=False)
class Partition:
    """Community membership; ids are dense ``0..k-1``, all nonempty."""

    community_of: np.ndarray

    def __post_init__(self):
        c = self.community_of
        if c.ndim != 1:
            raise ValueError("community_of must be one-dimensional")
        if c.size and (c.min() < 0 or np.any(np.bincount(c) == 0)):
            raise ValueError("community ids must be dense 0..k-1 and nonempty")
        c.flags.writeable = False

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        return cls(_dense_labels(labels))

    @classmethod
    def from_communities(cls, communities: Sequence[Sequence[int]], n: int | None = None) -> "Partition":
        """Build from a list of vertex collections covering ``0..n-1``."""
        if n is None:
            n = sum(len(c) for c in communities)
        out = np.full(n, -1, dtype=np.int64)
        for cid, members in enumerate(communities):
            members = np.asarray(list(members), dtype=np.int64)
            if np.any(out[members] != -1):
                raise ValueError("communities overlap")
            out[members] = cid
        if np.any(out == -1):
            raise ValueError("communities do not cover every vertex")
        return cls.from_labels(out)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def whole(cls, n: int) -> "Partition":
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.community_of)

    @property
    def k(self) -> int:
        return int(self.community_of.max()) + 1 if self.n else 0

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.community_of, minlength=self.k)

    def communities(self) -> list[np.ndarray]:
        order = np.argsort(self.community_of, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1])

    def relabel_vertices(self, perm) -> "Partition":
        """Partition after vertex ``i`` is renamed ``perm[i]``."""
        out = np.empty(self.n, dtype=np.int64)
        out[np.asarray(perm)] = self.community_of
        return Partition.from_labels(out)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.community_of, other.community_of)


def _check_same_n(p: Partition, ga: GroupAssignment):
    if p.n != ga.n:
        raise ValueError(f"partition has {p.n} vertices but groups have {ga.n}")


def group_counts(p: Partition, ga: GroupAssignment) -> np.ndarray:
    """``k x r`` integer matrix of ``|C_u ∩ P_w|``."""
    _check_same_n(p, ga)
    counts = np.zeros((p.k, ga.r), dtype=np.int64)
    np.add.at(counts, (p.community_of, ga.group_of), 1)
    return counts


def is_fair_counts(counts, sizes, tol: float = DEFAULT_FAIR_TOL):
    """:func:`is_fair` on count matrices; leading axes form a batch and
    all-zero rows (absent communities) are ignored."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    counts = np.asarray(counts)
    sizes = np.asarray(sizes)
    n = sizes.sum()
    csize = counts.sum(axis=-1, keepdims=True)
    if tol == 0:
        # c_uw / |C_u| == |P_w| / n  <=>  c_uw * n == |P_w| * |C_u|
        ok = counts * n == sizes * csize
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            dev = np.abs(counts / csize - sizes / n)
        ok = (dev <= tol) | (csize == 0)
    out = ok.all(axis=(-2, -1))
    return bool(out) if out.ndim == 0 else out


def is_fair(p: Partition, ga: GroupAssignment, tol: float = DEFAULT_FAIR_TOL) -> bool:
    """True when every community reproduces the global group proportions
    to within ``tol`` (absolute, on ratios).  ``tol=0`` is checked exactly
    in integer arithmetic.
    """
    return is_fair_counts(group_counts(p, ga), ga.sizes, tol)


def read_groups(path) -> GroupAssignment:
    """One integer label per line; blank lines and ``#`` comments skipped."""
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: group label must be an integer, got {line!r}") from None
    return build_groups(labels)


def write_groups(labels, path) -> None:
    labels = labels.group_of if isinstance(labels, GroupAssignment) else np.asarray(labels)
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{int(x)}\n" for x in labels)


def dump_partition(p: Partition) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["vertex_id", "community_id"])
    w.writerows(enumerate(p.community_of.tolist()))
    return buf.getvalue()


def write_partition(p: Partition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_partition(p))


def read_partition(path) -> Partition:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "vertex_id" not in rows[0] or "community_id" not in rows[0]:
        raise ValueError(f"{path}: expected header 'vertex_id,community_id'")
    vid = np.array([int(r["vertex_id"]) for r in rows])
    cid = np.array([int(r["community_id"]) for r in rows])
    if not np.array_equal(np.sort(vid), np.arange(len(vid))):
        raise ValueError(f"{path}: vertex ids must cover 0..n-1 exactly once")
    labels = np.empty(len(vid), dtype=np.int64)
    labels[vid] = cid
    return Partition.from_labels(labels)
