import random

import pytest

from gcf.graph import Graph


def random_connected_graph(seed: int, n: int, extra_edges: int = 2) -> Graph:
    """Random spanning tree plus a few extra edges; deterministic per seed."""
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n):
        a = order[rng.randrange(i)]
        b = order[i]
        edges.add((min(a, b), max(a, b)))
    attempts = 0
    while extra_edges > 0 and attempts < 50 * extra_edges:
        attempts += 1
        a, b = rng.randrange(n), rng.randrange(n)
        if a == b:
            continue
        e = (min(a, b), max(a, b))
        if e not in edges:
            edges.add(e)
            extra_edges -= 1
    return Graph.from_edges(n, sorted(edges))


def grid_shift(v: int, height: int, width: int, di: int, dj: int):
    i, j = divmod(v, width)
    i, j = i + di, j + dj
    return i * width + j if 0 <= i < height and 0 <= j < width else None


def expected_grid_family(height: int, width: int) -> list[tuple]:
    """Identity plus the four cardinal shift maps, in kernel slot order."""
    n = height * width
    return [
        tuple(range(n)),
        tuple(grid_shift(v, height, width, -1, 0) for v in range(n)),
        tuple(grid_shift(v, height, width, 0, -1) for v in range(n)),
        tuple(grid_shift(v, height, width, 0, 1) for v in range(n)),
        tuple(grid_shift(v, height, width, 1, 0) for v in range(n)),
    ]


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240811)
