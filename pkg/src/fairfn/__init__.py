"""Fairness-constrained modularity community detection."""
from .agglomerate import MergeTrace, alpha_threshold_curve, partition_at, run
from .estimators import FairFastNewman, FastNewman, KNNGraph
from .graph import DirectedGraph, Graph, from_edges, load_edge_list, read_edge_list
from .groups import GroupAssignment, Partition, build_groups, group_counts, is_fair
from .metrics import awd, fairness_ratio, nmi
from .modularity import directed_modularity, fairness_modularity_qp, modularity_q, qp_bounds

__all__ = [
    "DirectedGraph", "FairFastNewman", "FastNewman", "Graph", "GroupAssignment", "KNNGraph",
    "MergeTrace", "Partition", "alpha_threshold_curve", "awd", "build_groups", "directed_modularity",
    "fairness_modularity_qp", "fairness_ratio", "from_edges", "group_counts", "is_fair",
    "load_edge_list", "modularity_q", "nmi", "partition_at", "qp_bounds", "read_edge_list", "run",
]
