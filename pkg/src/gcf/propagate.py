"""Moving the indexing kernel across the graph to build proxy translation maps.

Seed an indexing kernel on the closed 1-hop neighborhood of a start vertex,
then push it through non-identity local translations. Each move from center
``c`` via a local translation ``phi`` with ``phi(c) = c'`` relocates every
kernel slot to its image (slots whose vertex left the domain become undefined
and stay undefined) and accumulates the translation's loss, measured against
the whole graph: ``n - |domain|``. Context-relative losses would undercharge
moves in low-degree regions, letting border-hugging routes beat direct ones
and deliver kernels with needlessly dead slots. Every center keeps the
indexing reached with the minimum accumulated loss; the search is a min-cost
frontier expansion, so each center is finalized exactly once.

Index ``p`` of the final table defines the proxy map: ``psi_p(c)`` is slot
``p`` of the indexing at ``c``. ``psi_0`` is the identity on reached centers.
The proxy maps are global but only locally validated, so nothing guarantees
they are injective or neighborhood-preserving as whole-graph maps.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .errors import InputError, ValidationError
from .graph import Graph
from .translate import LocalTranslationSet, PartialMap


@dataclass(frozen=True)
class KernelIndexing:
    """One placement of the indexing kernel: slot 0 is always the center."""

    center: int
    slots: tuple
    cost: int

    def __post_init__(self):
        if self.slots[0] != self.center:
            raise InputError("slot 0 of a kernel indexing must be its center")


@dataclass(frozen=True)
class ProxyFamily:
    """Per-center kernel indexings plus the proxy maps they induce.

    ``slots_by_center[c]`` is the winning indexing at ``c`` (None when ``c``
    was never reached); ``cost_by_center[c]`` is its accumulated loss.
    """

    kappa: int
    v0: int
    n: int
    slots_by_center: tuple
    cost_by_center: tuple

    @cached_property
    def reached(self) -> tuple[int, ...]:
        return tuple(c for c in range(self.n) if self.slots_by_center[c] is not None)

    @cached_property
    def unreached(self) -> tuple[int, ...]:
        return tuple(c for c in range(self.n) if self.slots_by_center[c] is None)

    def psi_value(self, p: int, c: int):
        slots = self.slots_by_center[c]
        return None if slots is None else slots[p]

    @cached_property
    def total_cost(self) -> int:
        return sum(self.cost_by_center[c] for c in self.reached)

    @cached_property
    def undefined_entries(self) -> int:
        full = self.n * self.kappa
        defined = sum(
            1
            for slots in self.slots_by_center
            if slots is not None
            for s in slots
            if s is not None
        )
        return full - defined


def seed_kernel(g: Graph, v0: int) -> KernelIndexing:
    """Initial indexing: the center followed by its neighbors in ascending id."""
    g.check_vertex(v0)
    return KernelIndexing(v0, (v0,) + g.neighbors(v0), 0)


def _slots_key(slots: tuple, n: int) -> tuple:
    undefined = sum(1 for s in slots if s is None)
    return (undefined, tuple(n if s is None else s for s in slots))


def propagate(g: Graph, locals_by_vertex: Sequence[LocalTranslationSet],
              v0: int) -> ProxyFamily:
    """Best-cost kernel indexing for every center reachable from ``v0``.

    Expands a priority frontier in nondecreasing accumulated loss; cost ties
    are broken in favor of the indexing with the fewest undefined slots, then
    the lexicographically smallest slot array (undefined slots sorting last),
    then insertion order, so two runs produce identical families. Centers no
    chain of kernel moves reaches stay undefined and are listed in
    ``ProxyFamily.unreached``.
    """
    if len(locals_by_vertex) != g.n:
        raise InputError("need one local translation set per vertex")
    seed = seed_kernel(g, v0)
    kappa = len(seed.slots)

    slots_final: list = [None] * g.n
    cost_final: list = [None] * g.n
    counter = 0
    heap = [(0, _slots_key(seed.slots, g.n), counter, v0, seed.slots)]
    while heap:
        cost, _, _, center, slots = heapq.heappop(heap)
        if slots_final[center] is not None:
            continue
        slots_final[center] = slots
        cost_final[center] = cost
        for target, _, phi in locals_by_vertex[center].moves():
            if slots_final[target] is not None:
                continue
            moved = tuple(
                None if s is None else phi.get(s)
                for s in slots
            )
            counter += 1
            heapq.heappush(
                heap,
                (cost + g.n - len(phi), _slots_key(moved, g.n),
                 counter, target, moved),
            )

    return ProxyFamily(kappa, v0, g.n, tuple(slots_final), tuple(cost_final))


def family_as_maps(f: ProxyFamily) -> list[PartialMap]:
    """The kappa proxy maps as partial maps over the whole vertex set.

    These propagate only local structure, so candidate-translation properties
    are not guaranteed globally (injectivity included).
    """
    maps = []
    for p in range(f.kappa):
        maps.append(PartialMap(tuple(f.psi_value(p, c) for c in range(f.n))))
    return maps


def select_seed_auto(g: Graph, locals_by_vertex: Sequence[LocalTranslationSet],
                     tries: int, seed: int = 0) -> tuple[int, ProxyFamily]:
    """Try several start vertices and keep the structurally best family.

    Candidates are the smallest max-degree vertex plus ``tries`` seeded random
    draws. Families are ranked by (unreached count, widest kernel first, total
    cost, undefined entries, start vertex), smallest first; preferring wide
    kernels keeps low-degree seeds from winning just because fewer slots mean
    fewer entries to leave undefined.
    """
    import random

    rng = random.Random(seed)
    best_deg = max(g.degree(v) for v in range(g.n))
    candidates = {min(v for v in range(g.n) if g.degree(v) == best_deg)}
    for _ in range(max(tries, 0)):
        candidates.add(rng.randrange(g.n))

    ranked = []
    for v0 in sorted(candidates):
        fam = propagate(g, locals_by_vertex, v0)
        ranked.append(
            ((len(fam.unreached), -fam.kappa, fam.total_cost,
              fam.undefined_entries, v0), fam)
        )
    key, fam = min(ranked, key=lambda kv: kv[0])
    return key[4], fam


# ---------------------------------------------------------------------------
# File format: {"kappa": k, "v0": v, "psi": [[...] per index], "cost": [...]},
# -1 encoding "undefined" / "unreached".

def family_to_json(f: ProxyFamily) -> str:
    psi = [
        [-1 if f.psi_value(p, c) is None else f.psi_value(p, c) for c in range(f.n)]
        for p in range(f.kappa)
    ]
    cost = [
        -1 if f.cost_by_center[c] is None else f.cost_by_center[c]
        for c in range(f.n)
    ]
    payload = {"kappa": f.kappa, "v0": f.v0, "psi": psi, "cost": cost}
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def family_from_json(text: str) -> ProxyFamily:
    try:
        payload = json.loads(text)
        kappa = payload["kappa"]
        v0 = payload["v0"]
        psi = payload["psi"]
        cost = payload["cost"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"malformed proxy family file: {exc}") from exc
    if len(psi) != kappa:
        raise InputError("psi row count does not match kappa")
    n = len(cost)
    slots_by_center = []
    cost_by_center = []
    for c in range(n):
        if psi[0][c] == -1:
            slots_by_center.append(None)
            cost_by_center.append(None)
        else:
            slots_by_center.append(
                tuple(None if psi[p][c] == -1 else psi[p][c] for p in range(kappa))
            )
            cost_by_center.append(cost[c])
    fam = ProxyFamily(kappa, v0, n, tuple(slots_by_center), tuple(cost_by_center))
    if fam.slots_by_center[v0] is None:
        raise ValidationError("family does not cover its own start vertex")
    return fam


def save_family(f: ProxyFamily, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(family_to_json(f))


def load_family(path: str) -> ProxyFamily:
    with open(path) as fh:
        return family_from_json(fh.read())
