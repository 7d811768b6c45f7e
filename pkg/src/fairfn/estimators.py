"""scikit-learn compatible front ends."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .agglomerate import partition_at, run
from .groups import GroupAssignment
from .ingest import knn_graph, standardize
from .validation import check_alpha, check_graph, check_groups


class FastNewman(ClusterMixin, BaseEstimator):
    """Greedy agglomerative modularity maximisation.

    Parameters
    ----------
    alpha : float, default=0.0
        Stopping slack: merging continues while the best gain exceeds
        ``-alpha / (2m)``.
    best_q : bool, default=False
        Report the highest-modularity prefix of the merge sequence instead of
        the partition where merging stopped.

    Attributes
    ----------
    labels_ : ndarray of shape (n,)
    trace_ : MergeTrace
    modularity_ : float
    fairness_modularity_ : float
        Only meaningful when ``groups`` were passed to ``fit``.
    n_communities_ : int
    """

    _mode = "fn"

    def __init__(self, alpha=0.0, best_q=False):
        self.alpha = alpha
        self.best_q = best_q

    def _groups(self, groups, n) -> GroupAssignment:
        if groups is None:
            return GroupAssignment(np.zeros(n, dtype=np.int64))
        return check_groups(groups, n)

    def fit(self, X, y=None, groups=None):
        """Detect communities in graph ``X``.

        ``X`` may be a :class:`~fairfn.graph.Graph`, a symmetric adjacency
        matrix, or a networkx graph.  ``groups`` holds protected-group labels.
        """
        alpha = check_alpha(self.alpha)
        g = check_graph(X)
        ga = self._groups(groups, g.n)
        partition, trace = run(g, ga, alpha, self._mode)
        if self.best_q:
            partition = partition_at(trace, trace.best_q_step())
            step = trace.best_q_step()
        else:
            step = len(trace)
        last = trace.records[step - 1] if step else None
        self.trace_ = trace
        self.partition_ = partition
        self.labels_ = np.asarray(partition.community_of)
        self.n_communities_ = partition.k
        self.modularity_ = last.q if last else trace.initial[0]
        self.fairness_modularity_ = last.qp if last else trace.initial[1]
        self.n_features_in_ = g.n
        return self

    def fit_predict(self, X, y=None, groups=None):
        return self.fit(X, groups=groups).labels_


class FairFastNewman(FastNewman):
    """Fast Newman restricted to merges that lower the fairness-modularity.

    Parameters
    ----------
    alpha : float, default=4.0
    best_q : bool, default=False
    """

    _mode = "fairfn"

    def __init__(self, alpha=4.0, best_q=False):
        super().__init__(alpha=alpha, best_q=best_q)

    def _groups(self, groups, n):
        if groups is None:
            raise ValueError("FairFastNewman.fit requires protected-group labels via groups=")
        return check_groups(groups, n)


class KNNGraph(TransformerMixin, BaseEstimator):
    """Feature matrix to union-symmetrised k-nearest-neighbour graph."""

    def __init__(self, n_neighbors=10, standardize=True):
        self.n_neighbors = n_neighbors
        self.standardize = standardize

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self.standardize:
            X = standardize(X)
        return knn_graph(X, self.n_neighbors)
