"""Finding translations: exact enumeration on small graphs, local search on large ones.

A partial vertex map is a *candidate translation* when it is injective,
edge-constrained (every vertex maps to one of its neighbors), and strongly
neighborhood-preserving (it neither creates nor destroys adjacency between
domain vertices). A candidate is a *translation* when no already-established
translation of strictly smaller loss agrees with it anywhere; the identity is
always a translation. Loss counts the vertices of the ambient graph left out
of the domain.

Global enumeration is exponential, so it is guarded by a size cap; the local
finder searches only the closed 1-hop kernel around a center inside its 2-hop
induced context, which keeps the per-vertex cost bounded by the degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

from .errors import ValidationError
from .graph import Graph, VertexSet, induced_subgraph, neighborhood

DEFAULT_ENUMERATION_CAP = 12
DEFAULT_DENSE_CAP = 64


@dataclass(frozen=True)
class PartialMap:
    """Partial vertex map over a context graph; ``None`` marks "not in domain".

    ``mapping[v]`` is the image of ``v``. The map knows nothing about the
    graph it lives in; candidate properties are checked by
    :func:`is_candidate_translation`.
    """

    mapping: tuple

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(self.mapping))

    @cached_property
    def domain(self) -> VertexSet:
        return tuple(v for v, w in enumerate(self.mapping) if w is not None)

    @property
    def loss(self) -> int:
        """Vertices of the context left unmapped."""
        return len(self.mapping) - len(self.domain)

    @cached_property
    def is_identity(self) -> bool:
        return all(w == v for v, w in enumerate(self.mapping))

    def __call__(self, v: int):
        return self.mapping[v]

    def aligned(self, other: "PartialMap") -> bool:
        """True when both maps send some vertex to the same image."""
        return any(
            x is not None and x == y
            for x, y in zip(self.mapping, other.mapping)
        )

    def inverse(self) -> "PartialMap":
        inv = [None] * len(self.mapping)
        for v, w in enumerate(self.mapping):
            if w is not None:
                inv[w] = v
        return PartialMap(tuple(inv))

    def as_dict(self) -> dict[int, int]:
        return {v: w for v, w in enumerate(self.mapping) if w is not None}

    def sort_key(self) -> tuple:
        n = len(self.mapping)
        return (self.loss, tuple(n if x is None else x for x in self.mapping))

    @staticmethod
    def identity(n: int) -> "PartialMap":
        return PartialMap(tuple(range(n)))


def is_candidate_translation(g: Graph, m: PartialMap) -> bool:
    """Check injectivity, edge constraint, and strong neighborhood preservation.

    The identity is accepted by convention even though it is not
    edge-constrained on a simple graph.
    """
    if len(m.mapping) != g.n:
        raise ValidationError(
            f"map length {len(m.mapping)} does not match graph order {g.n}"
        )
    if m.is_identity:
        return True
    dom = m.domain
    if not dom:
        return False
    images = [m.mapping[v] for v in dom]
    if len(set(images)) != len(images):
        return False
    bits = g.adjacency_bits
    for v in dom:
        if not bits[v] >> m.mapping[v] & 1:
            return False
    for i, v in enumerate(dom):
        mv = m.mapping[v]
        for vp in dom[i + 1:]:
            if (bits[v] >> vp & 1) != (bits[mv] >> m.mapping[vp] & 1):
                return False
    return True


def _keep_aligned_minimal(candidates: list[tuple], n: int) -> list[PartialMap]:
    """Aligned-minimality filter, processing candidates in nondecreasing loss.

    A candidate survives unless a survivor of strictly smaller loss agrees
    with it on some vertex. Smaller-loss candidates are settled first, so
    rejection only ever comes from genuine translations.
    """
    def loss(m):
        return sum(1 for x in m if x is None)

    def lex(m):
        return tuple(n if x is None else x for x in m)

    ordered = sorted(candidates, key=lambda m: (loss(m), lex(m)))
    kept: list[tuple] = []
    kept_losses: list[int] = []
    for m in ordered:
        lm = loss(m)
        ok = True
        for a, la in zip(kept, kept_losses):
            if la >= lm:
                break  # sorted: no smaller-loss survivors further on
            if any(x is not None and x == y for x, y in zip(a, m)):
                ok = False
                break
        if ok:
            kept.append(m)
            kept_losses.append(lm)
    return [PartialMap(m) for m in kept]


def enumerate_translations(g: Graph, cap: int = DEFAULT_ENUMERATION_CAP) -> list[PartialMap]:
    """All translations of ``g``, identity included.

    Backtracking assigns each vertex a neighbor or leaves it out, pruning on
    injectivity and neighborhood preservation as it goes. Output is sorted by
    (loss, lexicographic mapping), undefined entries sorting last.

    Refuses graphs above ``cap`` vertices: the search space is exponential,
    use :func:`find_local_translations` per vertex instead.
    """
    n = g.n
    if n > cap:
        raise ValidationError(
            f"enumerate_translations is capped at n={cap} (got {n}); "
            f"use find_local_translations for large graphs"
        )
    bits = g.adjacency_bits
    mapping: list = [None] * n
    assigned: list[int] = []
    out: list[tuple] = []

    def place(v: int, used: int) -> None:
        if v == n:
            if assigned:
                out.append(tuple(mapping))
            return
        mapping[v] = None
        place(v + 1, used)
        for w in g.adjacency[v]:
            if used >> w & 1:
                continue
            ok = True
            for u in assigned:
                if (bits[v] >> u & 1) != (bits[w] >> mapping[u] & 1):
                    ok = False
                    break
            if ok:
                mapping[v] = w
                assigned.append(v)
                place(v + 1, used | 1 << w)
                assigned.pop()
                mapping[v] = None

    place(0, 0)
    result = _keep_aligned_minimal(out, n)
    result.append(PartialMap.identity(n))
    result.sort(key=PartialMap.sort_key)
    return result


@dataclass(frozen=True)
class LocalTranslationSet:
    """Translations found around one center, expressed in its 2-hop context.

    ``context_vertices[local_id] = original_id``; every map is a
    :class:`PartialMap` over the context graph and (identity aside) has its
    domain inside the closed 1-hop kernel of the center.

    ``maps`` holds the translations proper: candidates surviving the
    aligned-minimality rule, plus the identity. ``kernel_moves`` holds the
    per-direction move set used to relocate indexing kernels: for each
    neighbor the center can step to, the minimal-loss candidates toward it
    (all maps toward one target agree at the center, so this is the
    aligned-minimality rule applied per target), keeping on ties only maps
    that re-occupy the least of their own domain. Cross-direction
    elimination would otherwise discard a direction's best map near
    irregular regions and strand the kernel.
    """

    center: int
    context: Graph
    context_vertices: VertexSet
    maps: tuple[PartialMap, ...]
    kernel_moves: tuple[PartialMap, ...]

    @cached_property
    def center_local(self) -> int:
        return self.context_vertices.index(self.center)

    def moves(self) -> Iterator[tuple[int, int, dict[int, int]]]:
        """Kernel moves as ``(target_original_id, loss, original_id_map)``."""
        verts = self.context_vertices
        for m in self.kernel_moves:
            target = verts[m.mapping[self.center_local]]
            original = {
                verts[v]: verts[w]
                for v, w in enumerate(m.mapping)
                if w is not None
            }
            yield target, m.loss, original

    def to_json_obj(self) -> dict:
        def dump(maps):
            return [
                {
                    "loss": m.loss,
                    "domain": [self.context_vertices[v] for v in m.domain],
                    "map": [
                        [self.context_vertices[v], self.context_vertices[w]]
                        for v, w in enumerate(m.mapping)
                        if w is not None
                    ],
                }
                for m in maps
            ]

        return {
            "center": self.center,
            "context": list(self.context_vertices),
            "maps": dump(self.maps),
            "moves": dump(self.kernel_moves),
        }


def _search_kernel_maps(context: Graph, kernel: Sequence[int], center: int) -> list[tuple]:
    """Enumerate candidate maps with domain inside ``kernel`` (center required).

    Kernel vertices are processed in ascending local id; images come from the
    context adjacency, so the edge constraint holds by construction.
    Injectivity and neighborhood preservation are pruned on assignment.
    """
    bits = context.adjacency_bits
    n = context.n
    mapping: list = [None] * n
    assigned: list[int] = []
    out: list[tuple] = []
    kernel = list(kernel)
    k = len(kernel)

    def place(i: int, used: int) -> None:
        if i == k:
            if mapping[center] is not None:
                out.append(tuple(mapping))
            return
        u = kernel[i]
        if u != center:
            place(i + 1, used)
        for w in context.adjacency[u]:
            if used >> w & 1:
                continue
            ok = True
            for a in assigned:
                if (bits[u] >> a & 1) != (bits[w] >> mapping[a] & 1):
                    ok = False
                    break
            if ok:
                mapping[u] = w
                assigned.append(u)
                place(i + 1, used | 1 << w)
                assigned.pop()
                mapping[u] = None

    place(0, 0)
    return out


def _keep_direction_minimal(candidates: list[tuple], center: int, n: int) -> list[PartialMap]:
    """Minimal-loss candidates per target of the center, displacement-pruned.

    Within one target group, ties on loss are broken by how little of its own
    domain a map re-occupies, then by how few vertices sit on cycles of its
    functional graph: a translation should push the kernel off itself, not
    permute inside it. Every map still tied after that is kept.
    """
    def loss(m):
        return sum(1 for x in m if x is None)

    def overlap(m):
        dom = {v for v, w in enumerate(m) if w is not None}
        return sum(1 for w in m if w is not None and w in dom)

    def cyclic(m):
        count = 0
        for start, w in enumerate(m):
            cur = w
            while cur is not None and cur != start:
                cur = m[cur]
            if cur == start:
                count += 1
        return count

    groups: dict[int, list[tuple]] = {}
    for m in candidates:
        groups.setdefault(m[center], []).append(m)
    kept: list[PartialMap] = []
    for target in sorted(groups):
        scored = [((loss(m), overlap(m), cyclic(m)), m) for m in groups[target]]
        best = min(s for s, _ in scored)
        kept.extend(PartialMap(m) for s, m in scored if s == best)
    kept.sort(key=PartialMap.sort_key)
    return kept


def _assemble_local_set(g: Graph, v: int, dense_cap: int,
                        cache: dict | None = None) -> LocalTranslationSet:
    ctx_verts = neighborhood(g, v, 2)
    if len(ctx_verts) > dense_cap:
        raise ValidationError(
            f"graph too dense: |N_2({v})| = {len(ctx_verts)} exceeds cap {dense_cap}"
        )
    context, verts = induced_subgraph(g, ctx_verts)
    to_local = {old: new for new, old in enumerate(verts)}
    kernel = tuple(sorted(to_local[u] for u in neighborhood(g, v, 1)))
    center = to_local[v]
    key = (context.n, context.edges, kernel, center)
    entry = cache.get(key) if cache is not None else None
    if entry is None:
        raw = _search_kernel_maps(context, kernel, center)
        maps = _keep_aligned_minimal(raw, context.n)
        maps.append(PartialMap.identity(context.n))
        maps.sort(key=PartialMap.sort_key)
        entry = (tuple(maps), tuple(_keep_direction_minimal(raw, center, context.n)))
        if cache is not None:
            cache[key] = entry
    return LocalTranslationSet(v, context, verts, entry[0], entry[1])


def find_local_translations(g: Graph, v: int,
                            dense_cap: int = DEFAULT_DENSE_CAP) -> LocalTranslationSet:
    """Local translations of center ``v`` inside its 2-hop induced context.

    Candidate domains are subsets of the closed 1-hop neighborhood of ``v``
    that contain ``v``; candidate properties and losses are evaluated in the
    induced subgraph over the 2-hop neighborhood. The identity over the
    context is always included.
    """
    g.check_vertex(v)
    return _assemble_local_set(g, v, dense_cap)


def _sweep_chunk(payload) -> list[LocalTranslationSet]:
    g, lo, hi, dense_cap = payload
    cache: dict = {}
    return [_assemble_local_set(g, v, dense_cap, cache) for v in range(lo, hi)]


def find_all_local_translations(g: Graph, dense_cap: int = DEFAULT_DENSE_CAP,
                                threads: int = 1) -> list[LocalTranslationSet]:
    """Local translation sets for every vertex, with structural caching.

    Vertices whose relabeled contexts coincide exactly (same local adjacency,
    kernel, and center position) share one search; on regular graphs this
    collapses the sweep to a handful of searches. With ``threads > 1`` the
    vertex range is split into contiguous chunks over a process pool; chunk
    results merge back in vertex order, so output does not depend on the
    worker count. Results are returned in vertex id order.
    """
    if threads <= 1 or g.n < 4 * threads:
        return _sweep_chunk((g, 0, g.n, dense_cap))
    from concurrent.futures import ProcessPoolExecutor

    step = -(-g.n // threads)
    payloads = [
        (g, lo, min(lo + step, g.n), dense_cap)
        for lo in range(0, g.n, step)
    ]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(_sweep_chunk, payloads))
    return [ls for part in parts for ls in part]
