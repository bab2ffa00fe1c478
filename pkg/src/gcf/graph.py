"""Core graph representation, neighborhoods, induced subgraphs, connectivity.

Vertices are dense 0-based integers and every deterministic choice downstream
keys off ascending vertex id. Graphs are undirected, simple, and immutable
after construction, so they are safe to share across workers.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import InputError, ValidationError

VertexSet = tuple[int, ...]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``edges`` is canonical: each pair stored as ``(u, v)`` with ``u < v``,
    sorted ascending. Use :meth:`from_edges` instead of the raw constructor
    so validation and canonicalization happen.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    @staticmethod
    def from_edges(n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        if n <= 0:
            raise InputError("graph needs at least one vertex")
        canon: set[tuple[int, int]] = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InputError(f"self-loop on vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            canon.add((u, v) if u < v else (v, u))
        return Graph(n, tuple(sorted(canon)))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def adjacency_bits(self) -> tuple[int, ...]:
        """Per-vertex neighbor sets as int bitmasks, for fast pair checks."""
        bits = []
        for a in self.adjacency:
            m = 0
            for w in a:
                m |= 1 << w
            bits.append(m)
        return tuple(bits)

    @cached_property
    def d(self) -> int:
        """Maximum degree."""
        return max((len(a) for a in self.adjacency), default=0)

    def degree(self, v: int) -> int:
        self.check_vertex(v)
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        self.check_vertex(v)
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency_bits[u] >> v & 1)

    def check_vertex(self, v: int) -> None:
        if not (0 <= v < self.n):
            raise InputError(f"vertex {v} out of range for n={self.n}")


def neighborhood(g: Graph, v: int, r: int) -> VertexSet:
    """Vertices at graph distance at most ``r`` from ``v``, including ``v``."""
    g.check_vertex(v)
    if r < 0:
        raise InputError("hop radius must be >= 0")
    seen = {v}
    frontier = [v]
    for _ in range(r):
        nxt = []
        for u in frontier:
            for w in g.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return tuple(sorted(seen))


def bfs_distances(g: Graph, v: int, cutoff: int | None = None) -> dict[int, int]:
    """Distances from ``v`` to every vertex within ``cutoff`` hops (all if None)."""
    g.check_vertex(v)
    dist = {v: 0}
    q = deque([v])
    while q:
        u = q.popleft()
        if cutoff is not None and dist[u] >= cutoff:
            continue
        for w in g.adjacency[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def induced_subgraph(g: Graph, s: Iterable[int]) -> tuple[Graph, VertexSet]:
    """Subgraph induced by ``s`` plus the relabeling map.

    Returns ``(sub, vertices)`` where ``vertices[new_id] = old_id``; new ids
    are assigned in ascending old-id order, so the relabeling is a bijection.
    """
    verts = tuple(sorted(set(s)))
    if not verts:
        raise InputError("cannot induce a subgraph on an empty vertex set")
    for v in verts:
        g.check_vertex(v)
    local = {old: new for new, old in enumerate(verts)}
    edges = [
        (local[u], local[w])
        for u in verts
        for w in g.adjacency[u]
        if u < w and w in local
    ]
    return Graph.from_edges(len(verts), edges), verts


def connected_components(g: Graph) -> list[VertexSet]:
    """Partition of the vertices into connected components.

    Components are ordered by their smallest vertex id.
    """
    seen = [False] * g.n
    comps: list[VertexSet] = []
    for start in range(g.n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        q = deque([start])
        while q:
            u = q.popleft()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    q.append(w)
        comps.append(tuple(sorted(comp)))
    return comps


def require_connected(g: Graph) -> None:
    """Pipeline gate: reject disconnected graphs with a component report."""
    comps = connected_components(g)
    if len(comps) > 1:
        sizes = ", ".join(str(len(c)) for c in comps)
        raise ValidationError(
            f"graph is disconnected: {len(comps)} components of sizes [{sizes}]; "
            f"run the pipeline on each component separately. "
            f"Components: {[list(c) for c in comps]}"
        )


# ---------------------------------------------------------------------------
# Constructors for common shapes (used by the CLI verifier and tests).

def grid_graph(height: int, width: int) -> Graph:
    """2D 4-neighbor grid, row-major vertex ids."""
    if height < 1 or width < 1:
        raise InputError("grid dimensions must be >= 1")
    edges = []
    for i in range(height):
        for j in range(width):
            v = i * width + j
            if j + 1 < width:
                edges.append((v, v + 1))
            if i + 1 < height:
                edges.append((v, v + width))
    return Graph.from_edges(height * width, edges)


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InputError("cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    """Star with center 0 and ``leaves`` leaf vertices."""
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


# ---------------------------------------------------------------------------
# File format: {"n": <int>, "edges": [[u, v], ...]} with u < v per edge.

def graph_to_json(g: Graph) -> str:
    payload = {"n": g.n, "edges": [list(e) for e in g.edges]}
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def graph_from_json(text: str) -> Graph:
    try:
        payload = json.loads(text)
        n = payload["n"]
        edges = payload["edges"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"malformed graph file: {exc}") from exc
    return Graph.from_edges(n, edges)


def save_graph(g: Graph, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(graph_to_json(g))


def load_graph(path: str) -> Graph:
    with open(path) as fh:
        return graph_from_json(fh.read())
