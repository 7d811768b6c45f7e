import numpy as np
import pytest
from hypothesis import settings

from fairfn.graph import from_edges, from_arrays

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

E1_EDGES = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]


@pytest.fixture
def e1():
    """Two triangles {0,1,2} and {3,4,5} bridged by 2-3."""
    return from_edges(6, E1_EDGES)


def random_graph(rng, n, p=0.15, weighted=False):
    """Erdos-Renyi graph with a spanning path so that m > 0."""
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    keep |= ju == iu + 1
    w = rng.uniform(0.5, 3.0, keep.sum()) if weighted else None
    return from_arrays(n, iu[keep], ju[keep], w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        ok, detail = results[num]
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'} | {detail}")
