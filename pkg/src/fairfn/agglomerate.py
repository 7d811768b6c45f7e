"""Greedy agglomerative modularity maximisation (Fast Newman) with an
optional protected-group fairness constraint.

Every vertex starts in its own community.  Each step merges the pair of
communities with the largest modularity gain ``dQ``; in fair mode only pairs
whose merge lowers the fairness-modularity (``dQ^P < 0``) are eligible.  The
loop stops once no eligible pair has ``dQ > -alpha / (2m)``.

Internally gains are kept in *alpha units*, ``score = 2m * dQ =
2 w_uv - K_u K_v / m`` where ``w_uv`` is the edge weight between the two
communities and ``K`` their degree sums, so the stopping rule reads
``score > -alpha`` and ``score`` is exactly the per-step alpha threshold.

Eligibility is decided in exact integer arithmetic:
``dQ^P < 0  <=>  2m^P * (c_u . c_v) < (c_u . s) (c_v . s)`` with ``c`` the
per-community group counts and ``s`` the group sizes.  It therefore never
depends on edge weights.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graph import Graph
from .groups import GroupAssignment, Partition
from .metrics import awd_from_counts, fairness_ratio_from_counts

MODES = ("fn", "fairfn")
# int64 products in the eligibility test stay exact below this size
MAX_VERTICES = 40_000
_CHUNK = 512


@dataclass(eq=False)
class MergeState:
    """Live agglomeration state, indexed by community id ``0..n-1``.

    A community keeps the id of the vertex it started from; merged-away ids
    are marked inactive.
    """

    n: int
    m: float
    K: np.ndarray  # degree sum per community
    W: np.ndarray  # dense inter-community weight, zero diagonal
    internal: np.ndarray  # internal weight, both orientations, plus loops
    C: np.ndarray  # group counts, shape (n, r)
    vol_p: np.ndarray  # C @ sizes
    two_mp: int
    active: np.ndarray
    members: list
    q: float
    qp: float
    sizes: np.ndarray = field(repr=False)

    @property
    def two_m(self) -> float:
        return 2.0 * self.m

    @property
    def a(self) -> np.ndarray:
        return self.K / self.two_m

    @property
    def a_p(self) -> np.ndarray:
        return self.vol_p / self.two_mp

    @property
    def c(self) -> np.ndarray:
        return self.C

    def e(self, u: int, v: int) -> float:
        """Fraction of edge ends joining ``u`` and ``v`` (ordered-pair convention)."""
        if u == v:
            return float(self.internal[u] / self.two_m)
        return float(self.W[u, v] / self.two_m)

    def e_p(self, u: int, v: int) -> float:
        return float(np.dot(self.C[u], self.C[v])) / self.two_mp

    def active_ids(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    @property
    def num_communities(self) -> int:
        return int(self.active.sum())

    def partition(self) -> Partition:
        labels = np.empty(self.n, dtype=np.int64)
        for cid in self.active_ids():
            labels[self.members[cid]] = cid
        return Partition.from_labels(labels)

    def active_counts(self) -> np.ndarray:
        return self.C[self.active]


def init_state(g: Graph, ga: GroupAssignment) -> MergeState:
    """Singleton communities with ``e_ij = w_ij / 2m`` and ``a_i = k_i / 2m``."""
    if g.n != ga.n:
        raise ValueError(f"graph has {g.n} vertices but groups have {ga.n}")
    if g.n < 1:
        raise ValueError("graph must have at least one vertex")
    if g.n > MAX_VERTICES:
        raise ValueError(f"merge engine supports at most {MAX_VERTICES} vertices")
    if g.m <= 0:
        raise ValueError("graph has no edge weight; modularity is undefined")
    n = g.n
    W = np.zeros((n, n))
    W[g.rows, g.cols] = g.weights
    W[g.cols, g.rows] = g.weights
    internal = np.zeros(n) if g.loops is None else np.array(g.loops, dtype=np.float64)
    K = np.array(g.degree, dtype=np.float64)
    C = np.zeros((n, ga.r), dtype=np.int64)
    C[np.arange(n), ga.group_of] = 1
    sizes = np.asarray(ga.sizes, dtype=np.int64)
    two_mp = ga.two_m_p
    a = K / (2.0 * g.m)
    q0 = float(np.sum(internal / (2.0 * g.m) - a * a))
    cube = int(np.sum(sizes.astype(object) ** 3))
    qp0 = (n * two_mp - cube) / (two_mp * two_mp)
    return MergeState(
        n=n,
        m=float(g.m),
        K=K,
        W=W,
        internal=internal,
        C=C,
        vol_p=C @ sizes,
        two_mp=two_mp,
        active=np.ones(n, dtype=bool),
        members=[[i] for i in range(n)],
        q=q0,
        qp=qp0,
        sizes=sizes,
    )


def _check_pair(s: MergeState, u: int, v: int):
    if u == v:
        raise ValueError("cannot merge a community with itself")
    for x in (u, v):
        if not (0 <= x < s.n) or not s.active[x]:
            raise ValueError(f"community {x} is not active")


def _delta_qp(s: MergeState, cc, vu, vv):
    # 2 (cc / 2m^P - vu vv / (2m^P)^2), one rounding on an exact numerator
    return 2.0 * (cc * s.two_mp - vu * vv) / float(s.two_mp * s.two_mp)


def pair_deltas(s: MergeState, u: int, v: int) -> tuple[float, float]:
    """``(dQ, dQ^P)`` for merging communities ``u`` and ``v``."""
    _check_pair(s, u, v)
    dq = _score_pair(s, u, v) / s.two_m
    cc = int(np.dot(s.C[u], s.C[v]))
    dqp = _delta_qp(s, cc, int(s.vol_p[u]), int(s.vol_p[v]))
    return dq, dqp


def _score_pair(s: MergeState, u, v) -> float:
    return 2.0 * s.W[u, v] - (s.K[u] * s.K[v]) / s.m


def _score_rows(s: MergeState, rows: np.ndarray, fairness_on: bool) -> np.ndarray:
    """Scores of ``rows`` against every community; ineligible entries ``-inf``."""
    S = 2.0 * s.W[rows] - (s.K[rows][:, None] * s.K[None, :]) / s.m
    S[:, ~s.active] = -np.inf
    S[np.arange(len(rows)), rows] = -np.inf
    if fairness_on:
        cc = s.C[rows] @ s.C.T
        ok = s.two_mp * cc < s.vol_p[rows][:, None] * s.vol_p[None, :]
        S[~ok] = -np.inf
    return S


def _eligible(s: MergeState, x: np.ndarray, u: int) -> np.ndarray:
    cc = s.C[x] @ s.C[u]
    return s.two_mp * cc < s.vol_p[x] * s.vol_p[u]


class Merge(NamedTuple):
    u: int
    v: int
    delta_q: float
    delta_qp: float
    score: float


def _as_merge(s: MergeState, u: int, v: int, score: float) -> Merge:
    cc = int(np.dot(s.C[u], s.C[v]))
    dqp = _delta_qp(s, cc, int(s.vol_p[u]), int(s.vol_p[v]))
    return Merge(int(u), int(v), score / s.two_m, dqp, float(score))


def _top_pair(s: MergeState, fairness_on: bool):
    ids = s.active_ids()
    if len(ids) < 2:
        return None
    S = _score_rows(s, ids, fairness_on)[:, ids]
    best = S.max()
    if best == -np.inf:
        return None
    # first hit in row-major order is the lexicographically smallest pair
    i, j = np.argwhere(S == best)[0]
    return int(ids[i]), int(ids[j]), float(best)


def best_feasible_merge(s: MergeState, alpha: float, fairness_on: bool) -> Merge | None:
    """Exhaustive scan for the best eligible merge, or ``None`` to stop.

    Quadratic in the number of active communities; :func:`run` uses an
    incremental equivalent.
    """
    top = _top_pair(s, fairness_on)
    if top is None or not top[2] > -alpha:
        return None
    return _as_merge(s, *top)


def apply_merge(s: MergeState, u: int, v: int) -> tuple[float, float]:
    """Fold community ``v`` into ``u`` in place; returns ``(dQ, dQ^P)``."""
    dq, dqp = pair_deltas(s, u, v)
    s.q += dq
    s.qp += dqp
    s.internal[u] += s.internal[v] + 2.0 * s.W[u, v]
    s.internal[v] = 0.0
    s.W[u, :] += s.W[v, :]
    s.W[:, u] += s.W[:, v]
    s.W[u, u] = 0.0
    s.W[v, :] = 0.0
    s.W[:, v] = 0.0
    s.K[u] += s.K[v]
    s.K[v] = 0.0
    s.C[u] += s.C[v]
    s.C[v] = 0
    s.vol_p[u] += s.vol_p[v]
    s.vol_p[v] = 0
    s.active[v] = False
    s.members[u].extend(s.members[v])
    s.members[v] = []
    return dq, dqp


class _BestPartner:
    """Per-community best eligible partner, repaired after each merge.

    Only pairs involving the two merged communities change, so a row is
    recomputed only when its cached partner was one of them.
    """

    def __init__(self, s: MergeState, fairness_on: bool):
        self.s = s
        self.fair = fairness_on
        self.val = np.full(s.n, -np.inf)
        self.arg = np.full(s.n, -1, dtype=np.int64)
        self._recompute(s.active_ids())

    def _recompute(self, rows: np.ndarray):
        for start in range(0, len(rows), _CHUNK):
            chunk = rows[start:start + _CHUNK]
            S = _score_rows(self.s, chunk, self.fair)
            j = np.argmax(S, axis=1)
            self.val[chunk] = S[np.arange(len(chunk)), j]
            self.arg[chunk] = np.where(np.isfinite(self.val[chunk]), j, -1)

    def after_merge(self, u: int, v: int):
        s = self.s
        self.val[v] = -np.inf
        self.arg[v] = -1
        stale = s.active & ((self.arg == u) | (self.arg == v))
        stale[u] = True
        rest = np.flatnonzero(s.active & ~stale)
        if len(rest):
            sc = 2.0 * s.W[rest, u] - (s.K[rest] * s.K[u]) / s.m
            if self.fair:
                sc = np.where(_eligible(s, rest, u), sc, -np.inf)
            better = (sc > self.val[rest]) | ((sc == self.val[rest]) & (u < self.arg[rest]) & np.isfinite(sc))
            hit = rest[better]
            self.val[hit] = sc[better]
            self.arg[hit] = u
        self._recompute(np.flatnonzero(stale))

    def top(self):
        vals = np.where(self.s.active, self.val, -np.inf)
        best = vals.max()
        if best == -np.inf:
            return None
        rows = np.flatnonzero(vals == best)
        partners = self.arg[rows]
        lo = np.minimum(rows, partners)
        hi = np.maximum(rows, partners)
        k = np.lexsort((hi, lo))[0]
        return int(lo[k]), int(hi[k]), float(best)


TRACE_HEADER = (
    "step", "merged_a", "merged_b", "delta_q", "delta_qp", "q", "qp",
    "num_communities", "fr", "awd", "alpha_threshold",
)


class MergeRecord(NamedTuple):
    step: int
    merged_a: int
    merged_b: int
    delta_q: float
    delta_qp: float
    q: float
    qp: float
    num_communities: int
    fr: float
    awd: float
    alpha_threshold: float


@dataclass
class MergeTrace:
    """Per-merge history of a run.

    ``initial`` holds ``(q, qp, fr, awd)`` of the singleton start;
    ``stop_threshold`` is the best eligible score when the loop stopped
    (``None`` if nothing was eligible or one community remained).
    """

    n: int
    two_m: float
    mode: str
    alpha: float
    initial: tuple[float, float, float, float]
    records: list[MergeRecord] = field(default_factory=list)
    stop_threshold: float | None = None

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        idx = TRACE_HEADER.index(name)
        return np.array([r[idx] for r in self.records])

    def merges(self) -> list[tuple[int, int]]:
        return [(r.merged_a, r.merged_b) for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in self.records:
            w.writerow([
                r.step, r.merged_a, r.merged_b,
                *(f"{x:.12g}" for x in (r.delta_q, r.delta_qp, r.q, r.qp)),
                r.num_communities,
                *(f"{x:.12g}" for x in (r.fr, r.awd, r.alpha_threshold)),
            ])
        return buf.getvalue()

    def best_q_step(self) -> int:
        """Number of merges after which ``q`` peaked (0 = singletons)."""
        qs = [self.initial[0]] + [r.q for r in self.records]
        return int(np.argmax(qs))


def partition_at(trace: MergeTrace, step: int) -> Partition:
    """Partition after the first ``step`` merges of ``trace``."""
    if not 0 <= step <= len(trace):
        raise ValueError(f"step must lie in 0..{len(trace)}")
    parent = list(range(trace.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r in trace.records[:step]:
        parent[find(r.merged_b)] = find(r.merged_a)
    return Partition.from_labels([find(i) for i in range(trace.n)])


def _fr_awd(s: MergeState) -> tuple[float, float]:
    counts = s.active_counts()
    return fairness_ratio_from_counts(counts, s.sizes)[1], awd_from_counts(counts, s.sizes)


def run(
    g: Graph,
    ga: GroupAssignment,
    alpha: float = 0.0,
    mode: str = "fairfn",
    callback=None,
) -> tuple[Partition, MergeTrace]:
    """Run Fast Newman (``mode="fn"``) or its fair variant (``"fairfn"``).

    ``callback(state, record)`` is invoked after every merge; tests use it to
    audit the live state.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not alpha >= 0 or math.isinf(alpha):
        raise ValueError("alpha must be a finite nonnegative number")
    fair = mode == "fairfn"
    s = init_state(g, ga)
    trace = MergeTrace(n=s.n, two_m=s.two_m, mode=mode, alpha=float(alpha),
                       initial=(s.q, s.qp, *_fr_awd(s)))
    finder = _BestPartner(s, fair)
    k = s.n
    while k > 1:
        top = finder.top()
        if top is None:
            break
        u, v, score = top
        if not score > -alpha:
            trace.stop_threshold = score
            break
        dq, dqp = apply_merge(s, u, v)
        k -= 1
        finder.after_merge(u, v)
        fr, wd = _fr_awd(s)
        rec = MergeRecord(len(trace.records) + 1, u, v, dq, dqp, s.q, s.qp, k, fr, wd, score)
        trace.records.append(rec)
        if callback is not None:
            callback(s, rec)
    return s.partition(), trace


def alpha_threshold_curve(trace: MergeTrace) -> list[tuple[int, float]]:
    """``(communities before the merge, 2m * dQ_max)`` per step, in merge order."""
    if not trace.records:
        raise ValueError("trace has no merges")
    return [(r.num_communities + 1, r.alpha_threshold) for r in trace.records]
