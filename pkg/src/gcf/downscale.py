"""Stride plans: kept-vertex selection and the translations induced on them.

Striding by ``r`` keeps a maximal set of vertices pairwise at least ``r``
apart, grown outward from a seed: a vertex is admitted when its distance to
the already-kept set is exactly ``r``. Admission is sequential in (distance
from the seed, ascending id) order; admitting simultaneously, as a set-valued
fixed point would, can let two new vertices violate the separation.

Sliding an r-hop kernel (each proxy map composed with itself r times) over
the kept vertices then yields the induced translations of the strided layer,
which repackage as a proxy family so deeper layers compile unchanged.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .errors import InputError, ValidationError
from .graph import Graph, VertexSet, bfs_distances, require_connected
from .propagate import ProxyFamily


@dataclass(frozen=True)
class DownscalePlan:
    """Stride-``r`` layer plan: kept vertices plus induced translations.

    ``induced[p][i]`` is the original-id image of kept vertex ``kept[i]``
    under the index-``p`` induced translation (None when undefined). Index 0
    is the identity on the kept set.
    """

    r: int
    seed: int
    kept: VertexSet
    induced: tuple[tuple, ...]

    @cached_property
    def kept_positions(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.kept)}

    @property
    def kappa(self) -> int:
        return len(self.induced)


def select_kept(g: Graph, v0: int, r: int) -> VertexSet:
    """Grow the stride-``r`` kept set from ``v0`` to its fixed point.

    A vertex qualifies while its distance to the kept set is exactly ``r``;
    candidates are admitted one at a time, nearest to the seed first (ties by
    ascending id), re-checking the distance after every admission. The result
    is stationary: no further vertex qualifies.
    """
    g.check_vertex(v0)
    if r < 1:
        raise InputError("stride must be >= 1")
    require_connected(g)

    dist0 = bfs_distances(g, v0)
    far = r + 1
    dist_to_kept = [far] * g.n

    def relax(source: int) -> list[int]:
        """BFS to depth r from a newly kept vertex; returns new candidates."""
        fresh = []
        dist_to_kept[source] = 0
        seen = {source: 0}
        q = deque([source])
        while q:
            u = q.popleft()
            if seen[u] >= r:
                continue
            for w in g.adjacency[u]:
                if w not in seen:
                    seen[w] = seen[u] + 1
                    q.append(w)
                    if seen[w] < dist_to_kept[w]:
                        dist_to_kept[w] = seen[w]
                        if seen[w] == r:
                            fresh.append(w)
        return fresh

    kept = [v0]
    heap = [(dist0[w], w) for w in relax(v0)]
    heapq.heapify(heap)
    while heap:
        _, w = heapq.heappop(heap)
        if dist_to_kept[w] != r:
            continue  # a later admission pulled it inside the exclusion zone
        kept.append(w)
        for c in relax(w):
            heapq.heappush(heap, (dist0[c], c))
    return tuple(sorted(kept))


def _compose(f: ProxyFamily, p: int, c: int, times: int):
    cur = c
    for _ in range(times):
        if cur is None:
            return None
        cur = f.psi_value(p, cur)
    return cur


def induce_translations(g: Graph, f: ProxyFamily, kept: VertexSet, r: int) -> DownscalePlan:
    """Bind kept vertices to r-hop kernel indices at every kept placement.

    The r-hop kernel at a center places index ``p`` on the r-fold
    self-composition of proxy map ``p``; a kept vertex landing there becomes
    the image of the placement center under the induced index-``p``
    translation. Index 0 composes to the identity, so column 0 is the
    identity on the kept set.
    """
    if r < 1:
        raise InputError("stride must be >= 1")
    kept = tuple(sorted(set(kept)))
    kept_set = set(kept)
    for v in kept:
        g.check_vertex(v)
    induced = [[None] * len(kept) for _ in range(f.kappa)]
    involved = set()
    for i, c in enumerate(kept):
        for p in range(f.kappa):
            t = _compose(f, p, c, r)
            if t is not None and t in kept_set:
                induced[p][i] = t
                if p > 0:
                    involved.add(c)
                    involved.add(t)
    uncovered = [c for c in kept if c not in involved]
    if uncovered and len(kept) > 1:
        import warnings
        warnings.warn(
            f"kept vertices never covered by any kernel placement: {uncovered}",
            stacklevel=2,
        )
    return DownscalePlan(r, f.v0, kept, tuple(tuple(col) for col in induced))


def make_plan(g: Graph, f: ProxyFamily, r: int, v0: int | None = None) -> DownscalePlan:
    """Full stride plan: kept-vertex selection plus induced translations."""
    seed = f.v0 if v0 is None else v0
    kept = select_kept(g, seed, r)
    plan = induce_translations(g, f, kept, r)
    return DownscalePlan(r, seed, plan.kept, plan.induced)


def chain(plan: DownscalePlan) -> tuple[ProxyFamily, Graph]:
    """Repackage a plan as inputs for the next level.

    Returns a proxy family over the kept vertices relabeled ``0..|kept|-1``
    (so scheme compilation works unchanged) and the graph whose edges join
    each kept vertex to its induced images (the support for further
    downscaling; it may be disconnected, in which case deeper levels run per
    component).
    """
    pos = plan.kept_positions
    m = len(plan.kept)
    slots_by_center = []
    for i in range(m):
        slots = tuple(
            None if plan.induced[p][i] is None else pos[plan.induced[p][i]]
            for p in range(plan.kappa)
        )
        slots_by_center.append(slots)
    seed_pos = pos.get(plan.seed)
    if seed_pos is None:
        raise ValidationError("plan seed is not among its kept vertices")
    fam = ProxyFamily(
        kappa=plan.kappa,
        v0=seed_pos,
        n=m,
        slots_by_center=tuple(slots_by_center),
        cost_by_center=tuple(0 for _ in range(m)),
    )
    edges = set()
    for i in range(m):
        for p in range(1, plan.kappa):
            j = slots_by_center[i][p]
            if j is not None and j != i:
                edges.add((min(i, j), max(i, j)))
    return fam, Graph.from_edges(m, sorted(edges))


# ---------------------------------------------------------------------------
# File format:
# {"r": r, "seed": v0, "kept": [...], "induced": [[...] per index]}, -1 = undefined.

def plan_to_json(plan: DownscalePlan) -> str:
    payload = {
        "r": plan.r,
        "seed": plan.seed,
        "kept": list(plan.kept),
        "induced": [
            [-1 if e is None else e for e in col] for col in plan.induced
        ],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def plan_from_json(text: str) -> DownscalePlan:
    try:
        payload = json.loads(text)
        plan = DownscalePlan(
            r=payload["r"],
            seed=payload["seed"],
            kept=tuple(payload["kept"]),
            induced=tuple(
                tuple(None if e == -1 else e for e in col)
                for col in payload["induced"]
            ),
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"malformed downscale plan file: {exc}") from exc
    return plan


def save_plan(plan: DownscalePlan, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(plan_to_json(plan))


def load_plan(path: str) -> DownscalePlan:
    with open(path) as fh:
        return plan_from_json(fh.read())
