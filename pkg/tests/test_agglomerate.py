import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fairfn.agglomerate import (
    TRACE_HEADER, alpha_threshold_curve, apply_merge, best_feasible_merge, init_state,
    pair_deltas, partition_at, run,
)
from fairfn.graph import from_arrays, from_edges, scale_weights
from fairfn.groups import GroupAssignment, Partition, build_groups, is_fair
from fairfn.metrics import awd, fairness_ratio
from fairfn.modularity import fairness_modularity_qp, modularity_q

from conftest import random_graph

GA22 = build_groups([0, 0, 1, 1])
K4 = from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


def reference_run(g, ga, alpha, mode):
    """Exhaustive-scan loop: the obvious implementation of the merge rule."""
    s = init_state(g, ga)
    merges = []
    while s.num_communities > 1:
        best = best_feasible_merge(s, alpha, mode == "fairfn")
        if best is None:
            break
        dq, dqp = apply_merge(s, best.u, best.v)
        merges.append((best.u, best.v, dq, dqp, best.score))
    return merges


def random_groups(rng, n, r):
    while True:
        labels = rng.integers(0, r, n)
        if len(np.unique(labels)) == r:
            return GroupAssignment(labels)


# ---- initialization -------------------------------------------------------

def test_init_e1(e1):
    s = init_state(e1, build_groups([0, 0, 0, 1, 1, 1]))
    np.testing.assert_allclose(s.a, e1.degree / 14)
    assert s.q == pytest.approx(-17 / 98, abs=1e-15)
    assert s.q == pytest.approx(modularity_q(e1, Partition.singletons(6)), abs=1e-15)


def test_init_qp_singletons():
    s = init_state(from_edges(4, [(0, 1), (2, 3)]), GA22)
    assert s.qp == 0.25


def test_init_single_edge():
    s = init_state(from_edges(2, [(0, 1)]), build_groups([0, 1]))
    assert s.e(0, 1) == 0.5
    np.testing.assert_array_equal(s.a, [0.5, 0.5])


def test_init_rejects():
    with pytest.raises(ValueError):
        init_state(from_edges(3, []), build_groups([0, 1, 0]))
    with pytest.raises(ValueError):
        init_state(K4, build_groups([0, 1, 0]))


# ---- pair deltas ------------------------------------------------------------

def test_pair_deltas_groups():
    s = init_state(K4, GA22)
    assert pair_deltas(s, 0, 1)[1] == 1 / 8
    assert pair_deltas(s, 0, 2)[1] == -1 / 8


def test_pair_deltas_e1(e1):
    s = init_state(e1, build_groups([0, 1, 0, 1, 0, 1]))
    dq, _ = pair_deltas(s, 0, 1)
    assert dq == pytest.approx(5 / 49, abs=1e-15)
    merged = Partition.from_labels([0, 0, 1, 2, 3, 4])
    assert dq == pytest.approx(modularity_q(e1, merged) - modularity_q(e1, Partition.singletons(6)), abs=1e-15)


def test_pair_deltas_rejects(e1):
    s = init_state(e1, build_groups([0, 1] * 3))
    with pytest.raises(ValueError):
        pair_deltas(s, 1, 1)
    apply_merge(s, 0, 1)
    with pytest.raises(ValueError):
        pair_deltas(s, 1, 2)
    with pytest.raises(ValueError):
        apply_merge(s, 2, 1)


# ---- selection ----------------------------------------------------------------

def test_best_merge_k4_fair():
    s = init_state(K4, GA22)
    best = best_feasible_merge(s, 0.0, True)
    assert (best.u, best.v) == (0, 2)
    assert best.delta_qp == -1 / 8
    same_group = [(0, 1), (2, 3)]
    assert all(pair_deltas(s, u, v)[1] == 1 / 8 for u, v in same_group)


def test_best_merge_unconstrained_is_plain_fn():
    s = init_state(K4, GA22)
    best = best_feasible_merge(s, 0.0, False)
    assert (best.u, best.v) == (0, 1)


def test_stop_rule_boundary():
    # two isolated-in-effect communities with m = 1 and dQ = -0.1
    s = init_state(from_edges(2, [(0, 1)]), build_groups([0, 1]))
    r = math.sqrt(0.8)
    s.W[:] = 0.0
    s.K[:] = [1 + r, 1 - r]
    dq, _ = pair_deltas(s, 0, 1)
    assert dq == pytest.approx(-0.1, abs=1e-12)
    assert best_feasible_merge(s, 0.1, False) is None
    assert best_feasible_merge(s, 0.21, False) is not None


def test_stop_rule_is_strict(e1):
    ga = build_groups([0] * 6)
    _, trace = run(e1, ga, 0.0, "fn")
    threshold = trace.stop_threshold
    assert threshold < 0
    # alpha exactly at -threshold still stops; any slack beyond it allows one more merge
    assert len(run(e1, ga, -threshold, "fn")[1]) == len(trace)
    assert len(run(e1, ga, -threshold * (1 + 1e-9), "fn")[1]) == len(trace) + 1


def test_fairness_blocks_everything_for_one_group(e1):
    part, trace = run(e1, build_groups([0] * 6), alpha=100.0, mode="fairfn")
    assert len(trace) == 0 and part.k == 6
    s = init_state(e1, build_groups([0] * 6))
    assert all(pair_deltas(s, u, v)[1] == 0.0 for u in range(6) for v in range(u + 1, 6))


# ---- apply_merge --------------------------------------------------------------

def test_apply_merge_consistency(e1):
    ga = build_groups([0, 1, 0, 1, 0, 1])
    s = init_state(e1, ga)
    q0, expected = s.q, pair_deltas(s, 2, 3)
    c2, c3 = s.C[2].copy(), s.C[3].copy()
    assert apply_merge(s, 2, 3) == expected
    assert s.q - q0 == pytest.approx(expected[0], abs=1e-12)
    np.testing.assert_array_equal(s.C[2], c2 + c3)
    assert not s.active[3] and s.num_communities == 5
    assert s.q == pytest.approx(modularity_q(e1, s.partition()), abs=1e-12)


def test_cross_group_merges_reach_zero_qp():
    s = init_state(K4, GA22)
    apply_merge(s, 0, 2)
    apply_merge(s, 1, 3)
    assert s.qp == pytest.approx(0.0, abs=1e-15)
    assert is_fair(s.partition(), GA22, 0)
    apply_merge(s, 0, 1)
    assert s.qp == pytest.approx(0.0, abs=1e-15)


# ---- run ------------------------------------------------------------------------

def audit(g, ga):
    seen = []

    def check(s, rec):
        p = s.partition()
        assert rec.q == pytest.approx(modularity_q(g, p), abs=1e-9)
        assert rec.qp == pytest.approx(fairness_modularity_qp(ga, p), abs=1e-9)
        assert rec.fr == pytest.approx(fairness_ratio(p, ga)[1], abs=1e-12)
        assert rec.awd == pytest.approx(awd(p, ga), abs=1e-12)
        seen.append(rec)

    return check, seen


@pytest.mark.parametrize("mode", ["fn", "fairfn"])
@pytest.mark.parametrize("seed", range(6))
def test_incremental_matches_oracles(mode, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 60))
    g = random_graph(rng, n, p=0.12, weighted=seed % 2 == 1)
    ga = random_groups(rng, n, 2 + seed % 2)
    check, seen = audit(g, ga)
    part, trace = run(g, ga, alpha=float(seed), mode=mode, callback=check)
    assert len(seen) == len(trace)
    assert part == partition_at(trace, len(trace))


@pytest.mark.parametrize("mode", ["fn", "fairfn"])
@given(st.integers(4, 40), st.integers(0, 2**32 - 1), st.sampled_from([0.0, 1.0, 8.0]), st.booleans())
def test_cached_selection_equals_exhaustive_scan(mode, n, seed, alpha, weighted):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p=0.2, weighted=weighted)
    ga = random_groups(rng, n, 2)
    _, trace = run(g, ga, alpha, mode)
    ref = reference_run(g, ga, alpha, mode)
    got = [(r.merged_a, r.merged_b, r.delta_q, r.delta_qp, r.alpha_threshold) for r in trace.records]
    assert got == ref


def test_fairfn_qp_strictly_decreasing(rng):
    for _ in range(5):
        g = random_graph(rng, 50, p=0.1)
        ga = random_groups(rng, 50, 3)
        _, trace = run(g, ga, 4.0, "fairfn")
        assert np.all(trace.column("delta_qp") < 0)
        qp = np.concatenate([[trace.initial[1]], trace.column("qp")])
        assert np.all(np.diff(qp) < 0)


def test_trace_invariants(rng):
    g = random_graph(rng, 40, p=0.15)
    ga = random_groups(rng, 40, 2)
    _, trace = run(g, ga, 2.0, "fairfn")
    q = np.concatenate([[trace.initial[0]], trace.column("q")])
    np.testing.assert_allclose(np.diff(q), trace.column("delta_q"), atol=1e-12)
    k = trace.column("num_communities")
    np.testing.assert_array_equal(k, np.arange(39, 39 - len(trace), -1))
    np.testing.assert_allclose(trace.column("alpha_threshold"), trace.two_m * trace.column("delta_q"), atol=1e-9)


@pytest.mark.parametrize("c", [0.25, 3.0, 50.0])
def test_weight_scale_argmax_invariance(rng, c):
    for weighted in (False, True):
        g = random_graph(rng, 40, p=0.15, weighted=weighted)
        ga = random_groups(rng, 40, 2)
        for mode in ("fn", "fairfn"):
            _, t1 = run(g, ga, 2.0, mode)
            _, t2 = run(scale_weights(g, c), ga, 2.0 * c, mode)
            assert t1.merges() == t2.merges()


def test_delta_qp_independent_of_weights(rng):
    g = random_graph(rng, 60, p=0.1, weighted=True)
    plain = from_arrays(g.n, g.rows, g.cols)
    ga = random_groups(rng, 60, 2)
    _, trace = run(g, ga, 4.0, "fairfn")
    s = init_state(plain, ga)
    replay = [apply_merge(s, u, v)[1] for u, v in trace.merges()]
    assert replay == list(trace.column("delta_qp"))


def test_determinism(rng):
    g = random_graph(rng, 80, p=0.08)
    ga = random_groups(rng, 80, 2)
    a = run(g, ga, 4.0, "fairfn")[1].to_csv()
    b = run(g, ga, 4.0, "fairfn")[1].to_csv()
    assert a == b


def test_fn_alpha_zero_stops_at_nonpositive_gain(e1):
    part, trace = run(e1, build_groups([0] * 6), 0.0, "fn")
    assert part == Partition.from_labels([0, 0, 0, 1, 1, 1])
    assert trace.stop_threshold is not None and trace.stop_threshold <= 0
    assert trace.records[-1].q == pytest.approx(5 / 14, abs=1e-12)


def test_run_rejects_bad_arguments(e1):
    ga = build_groups([0, 1] * 3)
    with pytest.raises(ValueError):
        run(e1, ga, mode="louvain")
    with pytest.raises(ValueError):
        run(e1, ga, alpha=-1.0)
    with pytest.raises(ValueError):
        run(e1, ga, alpha=math.inf)


# ---- trace helpers --------------------------------------------------------------

def test_threshold_curve_single_merge():
    g = from_edges(2, [(0, 1)])
    _, trace = run(g, build_groups([0, 1]), 0.0, "fairfn")
    curve = alpha_threshold_curve(trace)
    assert curve == [(2, trace.records[0].alpha_threshold)]
    assert curve[0][1] == pytest.approx(2 * g.m * trace.records[0].delta_q, abs=1e-12)


def test_threshold_curve_empty_trace_rejected(e1):
    _, trace = run(e1, build_groups([0] * 6), 0.0, "fairfn")
    with pytest.raises(ValueError):
        alpha_threshold_curve(trace)


def test_best_q_prefix(rng):
    g = random_graph(rng, 50, p=0.1)
    ga = random_groups(rng, 50, 2)
    _, trace = run(g, ga, 50.0, "fn")
    step = trace.best_q_step()
    qs = [trace.initial[0]] + list(trace.column("q"))
    assert qs[step] == max(qs)
    assert modularity_q(g, partition_at(trace, step)) == pytest.approx(qs[step], abs=1e-9)


def test_trace_csv_format(e1):
    _, trace = run(e1, build_groups([0, 1] * 3), 4.0, "fairfn")
    lines = trace.to_csv().splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert lines[0] == "step,merged_a,merged_b,delta_q,delta_qp,q,qp,num_communities,fr,awd,alpha_threshold"
    assert len(lines) == len(trace) + 1
    first = lines[1].split(",")
    assert float(first[3]) == pytest.approx(trace.records[0].delta_q, rel=1e-11)
