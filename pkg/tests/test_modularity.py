from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fairfn.graph import DirectedGraph, from_edges, protected_group_network, to_directed
from fairfn.groups import Partition, build_groups, is_fair
from fairfn.modularity import (
    directed_modularity, fairness_modularity_qp, modularity_q, qp_bounds, qp_of_groups,
)

from conftest import random_graph
from oracles import q_directed_double_sum, q_double_sum, qp_exact, qp_trace_form

GA22 = build_groups([0, 0, 1, 1])
TRIANGLES = Partition.from_labels([0, 0, 0, 1, 1, 1])


def test_whole_partition_is_zero(e1):
    assert modularity_q(e1, Partition.whole(6)) == 0.0


def test_e1_two_triangles(e1):
    assert modularity_q(e1, TRIANGLES) == pytest.approx(5 / 14, abs=1e-15)
    assert q_double_sum(e1.adjacency.toarray(), TRIANGLES.community_of) == pytest.approx(5 / 14, abs=1e-15)


def test_e1_singletons(e1):
    assert modularity_q(e1, Partition.singletons(6)) == pytest.approx(-17 / 98, abs=1e-15)


def test_modularity_rejects_edgeless():
    with pytest.raises(ValueError):
        modularity_q(from_edges(3, []), Partition.whole(3))


def test_modularity_size_mismatch(e1):
    with pytest.raises(ValueError):
        modularity_q(e1, Partition.whole(5))


def test_directed_examples(e1):
    assert directed_modularity(to_directed(e1), TRIANGLES) == pytest.approx(5 / 14, abs=1e-15)
    single = DirectedGraph(2, np.array([0, 1]), np.array([1, 0]), np.ones(2))
    assert directed_modularity(single, Partition.whole(2)) == 0.0
    with pytest.raises(ValueError):
        directed_modularity(DirectedGraph(2, np.array([], int), np.array([], int), np.array([])), Partition.whole(2))


def test_directed_protected_network_groups_partition():
    # two K2 blocks with loops, partition = groups: e_uu = 1/2, a_u = 1/2 each,
    # so Q = 2 * (1/2 - 1/4) = 1/2
    dg = protected_group_network(GA22.group_of)
    p = Partition.from_labels(GA22.group_of)
    assert directed_modularity(dg, p) == pytest.approx(0.5, abs=1e-15)
    assert q_directed_double_sum(dg.adjacency.toarray(), p.community_of) == pytest.approx(0.5, abs=1e-15)


def test_directed_asymmetric_against_oracle(rng):
    n = 12
    A = (rng.random((n, n)) < 0.3) * rng.uniform(0.5, 2, (n, n))
    src, dst = np.nonzero(A)
    dg = DirectedGraph(n, src, dst, A[src, dst])
    labels = rng.integers(0, 3, n)
    p = Partition.from_labels(labels)
    assert directed_modularity(dg, p) == pytest.approx(q_directed_double_sum(A, p.community_of), abs=1e-13)


def test_qp_examples():
    assert fairness_modularity_qp(GA22, Partition.from_communities([[0, 2], [1, 3]])) == 0.0
    assert fairness_modularity_qp(GA22, Partition.singletons(4)) == pytest.approx(0.25, abs=1e-15)


def test_qp_partition_equals_groups():
    # exact value is 1 - sum |P_w|^4 / (2mP)^2 = 1 - 32/64
    p = Partition.from_communities([[0, 1], [2, 3]])
    assert fairness_modularity_qp(GA22, p) == pytest.approx(0.5, abs=1e-15)
    assert qp_exact([0, 0, 1, 1], p.community_of) == Fraction(1, 2)
    assert qp_of_groups(GA22) == pytest.approx(0.5, abs=1e-15)


def test_qp_size_mismatch():
    with pytest.raises(ValueError):
        fairness_modularity_qp(GA22, Partition.whole(3))


def test_qp_bounds_examples():
    assert qp_bounds(GA22) == pytest.approx((0.0, 0.875, 0.25), abs=1e-15)
    assert qp_bounds(build_groups([0])) == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)
    assert qp_bounds(build_groups([0, 0, 0, 1])) == pytest.approx((0.0, 0.9, 0.12), abs=1e-15)


def test_qp_whole_is_exactly_zero(rng):
    for _ in range(20):
        ga = build_groups(rng.integers(0, 3, 30))
        assert fairness_modularity_qp(ga, Partition.whole(30)) == 0.0


labels_st = st.integers(1, 12).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 2), min_size=n, max_size=n),
                        st.lists(st.integers(0, 4), min_size=n, max_size=n)))


@given(labels_st)
def test_qp_matches_trace_form_and_exact(pair):
    groups, comms = pair
    ga = build_groups(groups)
    p = Partition.from_labels(comms)
    qp = fairness_modularity_qp(ga, p)
    assert qp == pytest.approx(qp_trace_form(ga.group_of, p.community_of), abs=1e-12)
    assert qp == float(qp_exact(ga.group_of, p.community_of))
    lo, hi, _ = qp_bounds(ga)
    assert lo - 1e-12 <= qp <= hi + 1e-12
    assert (qp == 0.0) == is_fair(p, ga, 0)


@given(labels_st)
def test_qp_equals_directed_modularity_of_group_network(pair):
    groups, comms = pair
    ga = build_groups(groups)
    p = Partition.from_labels(comms)
    dg = protected_group_network(ga.group_of)
    assert fairness_modularity_qp(ga, p) == pytest.approx(directed_modularity(dg, p), abs=1e-10)


@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_q_against_double_sum(n, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, weighted=bool(seed % 2))
    p = Partition.from_labels(rng.integers(0, 4, n))
    q = modularity_q(g, p)
    assert q == pytest.approx(q_double_sum(g.adjacency.toarray(), p.community_of), abs=1e-12)
    assert directed_modularity(to_directed(g), p) == pytest.approx(q, abs=1e-12)
    assert -1 <= q < 1
