"""Synthetic benchmarks: LFR-style graphs, protected-group assignments and
Gaussian blob feature tables.  Every generator is a pure function of its seed.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.datasets import make_blobs

from .graph import Graph, from_arrays
from .groups import GroupAssignment, Partition


class GenerationError(RuntimeError):
    """Raised when a generator cannot satisfy its constraints."""


def _powerlaw_ints(rng, exponent: float, lo: int, hi: int, size: int) -> np.ndarray:
    support = np.arange(lo, hi + 1)
    w = support.astype(np.float64) ** -exponent
    return rng.choice(support, size=size, p=w / w.sum())


def _community_sizes(rng, n, tau2, lo, hi) -> list[int]:
    sizes: list[int] = []
    total = 0
    while total < n:
        s = int(_powerlaw_ints(rng, tau2, lo, hi, 1)[0])
        if total + s <= n:
            sizes.append(s)
            total += s
            continue
        rest = n - total
        if rest >= lo or not sizes:
            sizes.append(rest)
        else:
            # spread the remainder over existing communities
            for _ in range(rest):
                sizes[int(rng.integers(len(sizes)))] += 1
        total = n
    return sizes


def _match_stubs(stubs, rng, same_block=None, max_rounds=50, repair_factor=200, strict=True):
    """Pair stubs into a simple edge set (no loops, no repeats).

    Shuffled rounds re-pair the rejected stubs; whatever is still unmatched is
    repaired by swapping against random accepted edges.  ``same_block``, if
    given, maps vertices to a label whose equal values must not be joined.
    Returns ``(edges, unmatched)``; with ``strict`` unmatched stubs raise.
    """

    def bad(a, b):
        return a == b or (same_block is not None and same_block[a] == same_block[b]) \
            or (min(a, b), max(a, b)) in present

    present: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    pending = list(stubs)
    for _ in range(max_rounds):
        if not pending:
            break
        pending = [pending[i] for i in rng.permutation(len(pending))]
        left = []
        for a, b in zip(pending[0::2], pending[1::2]):
            if bad(a, b):
                left += [a, b]
            else:
                present.add((min(a, b), max(a, b)))
                edges.append((a, b))
        if len(left) == len(pending):
            pending = left
            break
        pending = left
    budget = repair_factor * (len(pending) + 1)
    while pending and budget > 0 and edges:
        budget -= 1
        a, b = pending[-2], pending[-1]
        idx = int(rng.integers(len(edges)))
        c, d = edges[idx]
        if rng.random() < 0.5:
            c, d = d, c
        old = (min(c, d), max(c, d))
        present.discard(old)
        e1, e2 = (min(a, c), max(a, c)), (min(b, d), max(b, d))
        if e1 != e2 and not bad(a, c) and not bad(b, d):
            present.update((e1, e2))
            edges[idx] = (a, c)
            edges.append((b, d))
            del pending[-2:]
        else:
            present.add(old)
    if pending and strict:
        raise GenerationError(f"could not wire {len(pending)} stubs without loops or repeats")
    return edges, pending


def lfr(
    n: int = 1000,
    tau1: float = 2.0,
    tau2: float = 1.1,
    mu: float = 0.1,
    min_deg: int = 20,
    max_deg: int = 100,
    seed: int = 0,
    min_community: int | None = None,
    max_community: int | None = None,
    community_sizes: Sequence[int] | None = None,
    max_tries: int = 20,
) -> tuple[Graph, Partition]:
    """LFR-style benchmark graph with planted communities.

    Degrees follow a truncated discrete power law (exponent ``tau1``) on
    ``[min_deg, max_deg]``; community sizes a power law (exponent ``tau2``)
    on ``[min_community, max_community]``.  Each vertex keeps
    ``ceil((1 - mu) k)`` of its stubs inside its community and the rest are
    matched across communities.

    Community sizes default to the degree range, ``[min_deg, max_deg]``;
    vertices are placed only in communities larger than their internal
    degree.  Passing ``community_sizes`` fixes the planted sizes instead.
    """
    if not (2 <= min_deg <= max_deg < n):
        raise ValueError("need 2 <= min_deg <= max_deg < n")
    if not (tau1 > 1 and tau2 > 1):
        raise ValueError("power-law exponents must exceed 1")
    if not 0 <= mu < 1:
        raise ValueError("mu must lie in [0, 1)")
    lo = min_deg if min_community is None else int(min_community)
    hi = max_deg if max_community is None else int(max_community)
    if community_sizes is None and not (1 <= lo <= hi):
        raise ValueError("need min_community <= max_community")
    if community_sizes is not None and sum(community_sizes) != n:
        raise ValueError("community_sizes must sum to n")

    rng = np.random.default_rng(seed)
    last = None
    for _ in range(max_tries):
        try:
            return _lfr_once(rng, n, tau1, tau2, mu, min_deg, max_deg, lo, hi, community_sizes)
        except GenerationError as exc:
            last = exc
    raise GenerationError(f"LFR generation failed after {max_tries} attempts: {last}")


def _can_host(kin, sizes) -> bool:
    """Hall's condition for nested eligibility: for every threshold t, the
    vertices with internal degree >= t fit into communities larger than t."""
    for t in np.unique(kin):
        if (kin >= t).sum() > sizes[sizes > t].sum():
            return False
    return True


def _lfr_once(rng, n, tau1, tau2, mu, min_deg, max_deg, lo, hi, fixed_sizes):
    deg = _powerlaw_ints(rng, tau1, min_deg, max_deg, n)
    kin = np.ceil((1 - mu) * deg - 1e-9).astype(np.int64)
    for _ in range(200):
        sizes = list(fixed_sizes) if fixed_sizes is not None else _community_sizes(rng, n, tau2, lo, hi)
        sizes = np.asarray(sizes, dtype=np.int64)
        if _can_host(kin, sizes):
            break
    else:
        raise GenerationError("community sizes cannot host the internal degrees")

    # place high internal degrees first, each into a random community with room
    comm = np.full(n, -1, dtype=np.int64)
    free = sizes.copy()
    order = np.lexsort((rng.random(n), -kin))
    for v in order:
        ok = np.flatnonzero((free > 0) & (sizes > kin[v]))
        if len(ok) == 0:
            raise GenerationError("no community can host a vertex's internal degree")
        c = ok[int(rng.integers(len(ok)))]
        comm[v] = c
        free[c] -= 1

    # parity: every community's internal stubs and the external stubs must be even
    for c in range(len(sizes)):
        members = np.flatnonzero(comm == c)
        if kin[members].sum() % 2:
            grow = members[(kin[members] < sizes[c] - 1) & (deg[members] < max_deg)]
            if len(grow):
                v = grow[0]
                kin[v] += 1
                deg[v] += 1
            else:
                shrink = members[(kin[members] > 0) & (deg[members] > min_deg)]
                if not len(shrink):
                    raise GenerationError("cannot fix internal degree parity")
                kin[shrink[0]] -= 1
                deg[shrink[0]] -= 1
    kext = deg - kin
    if kext.sum() % 2:
        grow = np.flatnonzero(deg < max_deg)
        if len(grow):
            kext[grow[0]] += 1
            deg[grow[0]] += 1
        else:
            shrink = np.flatnonzero((kext > 0) & (deg > min_deg))
            if not len(shrink):
                raise GenerationError("cannot fix external degree parity")
            kext[shrink[0]] -= 1
            deg[shrink[0]] -= 1

    edges = []
    ext = np.repeat(np.arange(n), kext).tolist()
    for c in range(len(sizes)):
        members = np.flatnonzero(comm == c)
        stubs = np.repeat(members, kin[members]).tolist()
        inner, unmatched = _match_stubs(stubs, rng, strict=False)
        edges += inner
        # a near-complete community may not be graphical; spill to external
        ext += unmatched
    outer, _ = _match_stubs(ext, rng, same_block=comm.tolist())
    edges += outer
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    g = from_arrays(n, e[:, 0], e[:, 1])
    return g, Partition.from_labels(comm)


def _check_dist(dist) -> np.ndarray:
    dist = np.asarray(dist, dtype=np.float64)
    if dist.ndim != 1 or dist.size == 0 or np.any(dist <= 0):
        raise ValueError("group distribution entries must be positive")
    if abs(dist.sum() - 1.0) > 1e-9:
        raise ValueError(f"group distribution must sum to 1, got {dist.sum()!r}")
    return dist


def assign_groups_iid(n: int, dist: Sequence[float], seed: int = 0, max_tries: int = 1000) -> GroupAssignment:
    """I.i.d. labels from ``dist``; label ``w`` has probability ``dist[w]``.

    A draw leaving some group empty is discarded and redrawn with ``seed + 1``,
    ``seed + 2``, ... so every group is represented.
    """
    dist = _check_dist(dist)
    if n < len(dist):
        raise ValueError("fewer vertices than groups")
    for t in range(max_tries):
        rng = np.random.default_rng(seed + t)
        labels = rng.choice(len(dist), size=n, p=dist)
        if np.all(np.bincount(labels, minlength=len(dist)) > 0):
            return GroupAssignment(labels.astype(np.int64))
    raise GenerationError("could not populate every group")


def assign_groups_biased(
    truth: Partition, p_low: float = 0.2, p_high: float = 0.8, seed: int = 0, max_tries: int = 1000
) -> GroupAssignment:
    """Binary groups whose share varies by community.

    Community ``k`` draws ``p_k ~ U[p_low, p_high]`` and each member joins
    group 1 with probability ``p_k``.
    """
    if not (0 < p_low <= p_high < 1):
        raise ValueError("need 0 < p_low <= p_high < 1")
    if truth.n < 2:
        raise ValueError("need at least two vertices for two groups")
    for t in range(max_tries):
        rng = np.random.default_rng(seed + t)
        p_k = rng.uniform(p_low, p_high, size=truth.k)
        labels = (rng.random(truth.n) < p_k[truth.community_of]).astype(np.int64)
        if 0 < labels.sum() < truth.n:
            return GroupAssignment(labels)
    raise GenerationError("could not populate both groups")


def gaussian_blobs(
    n: int = 3000, k_centers: int = 5, dims: int = 2, spread: float = 1.0, seed: int = 0,
    return_labels: bool = False,
):
    """Isotropic Gaussian clusters around centres drawn in ``[-10, 10]^dims``.

    Points are split evenly over the centres.
    """
    if not (n >= k_centers >= 1) or dims < 1:
        raise ValueError("need n >= k_centers >= 1 and dims >= 1")
    if not spread > 0:
        raise ValueError("spread must be positive")
    X, y = make_blobs(
        n_samples=n, centers=k_centers, n_features=dims, cluster_std=spread,
        center_box=(-10.0, 10.0), shuffle=True, random_state=seed,
    )
    return (X, y) if return_labels else X
