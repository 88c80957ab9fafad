import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from plandis.graph import build_graph

settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repro")


def random_connected_graph(rng, n, extra=None, boundary=()):
    """Random spanning tree plus ``extra`` chords, random weights and measures."""
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges[(u, v)] = float(rng.uniform(0.2, 2.0))
    extra = n if extra is None else extra
    for _ in range(extra):
        x, y = sorted(int(t) for t in rng.choice(n, 2, replace=False))
        edges.setdefault((x, y), float(rng.uniform(0.2, 2.0)))
    measures = rng.uniform(0.3, 2.0, size=n).tolist()
    return build_graph([(x, y, b) for (x, y), b in edges.items()], measures,
                       boundary=boundary)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path3():
    # o - a - c with unit weights and measures
    return build_graph([(0, 1, 1.0), (1, 2, 1.0)], [1.0, 1.0, 1.0])
