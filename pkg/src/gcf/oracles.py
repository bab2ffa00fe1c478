"""Independent brute-force oracles for the test suite.

Everything here trades speed for obviousness and shares no logic with the
optimized modules: adjacency is consulted directly, enumeration is exhaustive,
and path search is plain depth-first. Size guards keep the exponential blowups
honest. Maps are represented as plain tuples of ``int | None`` (None meaning
"undefined at this vertex") so comparisons against subject output go through
:func:`canonical_maps`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .graph import Graph

MapTuple = tuple  # tuple[int | None, ...]


@dataclass(frozen=True)
class OracleReport:
    case_id: str
    oracle_output: object
    subject_output: object
    match: bool
    first_divergence: str | None


def compare_outputs(case_id: str, oracle_output, subject_output) -> OracleReport:
    """Build a report; outputs must already be canonicalized by the caller."""
    if oracle_output == subject_output:
        return OracleReport(case_id, oracle_output, subject_output, True, None)
    divergence = None
    try:
        for i, (a, b) in enumerate(zip(oracle_output, subject_output)):
            if a != b:
                divergence = f"index {i}: oracle={a!r} subject={b!r}"
                break
        else:
            divergence = (
                f"length mismatch: oracle={len(oracle_output)} "
                f"subject={len(subject_output)}"
            )
    except TypeError:
        divergence = f"oracle={oracle_output!r} subject={subject_output!r}"
    return OracleReport(case_id, oracle_output, subject_output, False, divergence)


def canonical_maps(maps: Sequence[Sequence]) -> list[tuple]:
    """Sort maps into a canonical order for equality checks (None sorts last)."""
    def key(m):
        return tuple(len(m) if x is None else x for x in m)
    return sorted((tuple(m) for m in maps), key=key)


# ---------------------------------------------------------------------------
# Translation enumeration.

def _is_injective(m) -> bool:
    imgs = [x for x in m if x is not None]
    return len(imgs) == len(set(imgs))

def _is_edge_constrained(g: Graph, m) -> bool:
    for v, w in enumerate(m):
        if w is not None and w not in g.adjacency[v]:
            return False
    return True

def _is_strongly_neighborhood_preserving(g: Graph, m) -> bool:
    dom = [v for v, w in enumerate(m) if w is not None]
    for v, vp in itertools.combinations(dom, 2):
        if (vp in g.adjacency[v]) != (m[vp] in g.adjacency[m[v]]):
            return False
    return True

def _is_identity(m) -> bool:
    return all(w == v for v, w in enumerate(m))

def _aligned(a, b) -> bool:
    return any(x is not None and x == y for x, y in zip(a, b))


def _minimal_among_aligned(candidates: list[MapTuple], n: int) -> list[MapTuple]:
    """Keep candidates with no accepted aligned map of strictly smaller loss.

    Processing in nondecreasing loss order makes the 'no smaller-loss aligned
    translation' rule well-defined: a map is rejected only by maps that have
    themselves been accepted.
    """
    def loss(m):
        return sum(1 for x in m if x is None)

    ordered = sorted(candidates, key=lambda m: (loss(m), tuple(n if x is None else x for x in m)))
    accepted: list[MapTuple] = []
    for m in ordered:
        lm = loss(m)
        if not any(loss(a) < lm and _aligned(a, m) for a in accepted):
            accepted.append(m)
    return accepted


def oracle_translations(g: Graph, max_n: int = 9) -> list[MapTuple]:
    """All translations of ``g`` by full enumeration.

    Enumerates every partial injective map (every nonempty domain, every
    injective image assignment), filters by the three candidate properties,
    applies the aligned-minimality rule, and appends the identity.

    For n <= 6 image assignments are drawn from all vertices; above that the
    assignment per domain vertex is restricted to its own neighbors, which
    discards only maps that would fail the edge constraint anyway.
    """
    n = g.n
    if n > max_n:
        raise ValidationError(f"oracle_translations capped at n={max_n}, got {n}")

    candidates: list[MapTuple] = []
    vertices = list(range(n))
    if n <= 6:
        for k in range(1, n + 1):
            for dom in itertools.combinations(vertices, k):
                for images in itertools.permutations(vertices, k):
                    m = [None] * n
                    for v, w in zip(dom, images):
                        m[v] = w
                    m = tuple(m)
                    if (
                        _is_edge_constrained(g, m)
                        and _is_strongly_neighborhood_preserving(g, m)
                    ):
                        candidates.append(m)
    else:
        choice_sets = [list(g.adjacency[v]) + [None] for v in vertices]
        for assignment in itertools.product(*choice_sets):
            m = tuple(assignment)
            if all(x is None for x in m):
                continue
            if _is_injective(m) and _is_strongly_neighborhood_preserving(g, m):
                candidates.append(m)

    result = _minimal_among_aligned(candidates, n)
    result.append(tuple(vertices))
    return canonical_maps(result)


def _enumerate_kernel_candidates(context: Graph, kernel: Sequence[int],
                                 center: int) -> list[MapTuple]:
    """Every injective neighbor-assignment over the kernel (center mapped)."""
    n = context.n
    kernel = list(kernel)
    out: list[MapTuple] = []

    def assign(i: int, m: list, used: set) -> None:
        if i == len(kernel):
            t = tuple(m)
            if _is_strongly_neighborhood_preserving(context, t):
                out.append(t)
            return
        u = kernel[i]
        if u != center:
            assign(i + 1, m, used)
        for w in context.adjacency[u]:
            if w not in used:
                m[u] = w
                used.add(w)
                assign(i + 1, m, used)
                used.remove(w)
                m[u] = None

    assign(0, [None] * n, set())
    return out


def oracle_local_translations(context: Graph, kernel: Sequence[int],
                              center: int) -> list[MapTuple]:
    """Translations of ``context`` with domain inside ``kernel`` containing ``center``.

    ``kernel`` and ``center`` are in context-local ids. Enumeration assigns
    each kernel vertex either a context neighbor or None (injectively, which
    only skips maps the injectivity filter would drop), filters the remaining
    candidate properties, applies aligned-minimality within this restricted
    pool, and appends the context identity. Losses are measured against the
    full context order, matching the restricted search the optimized finder
    performs.
    """
    n = context.n
    candidates = _enumerate_kernel_candidates(context, kernel, center)
    result = _minimal_among_aligned(candidates, n)
    result.append(tuple(range(n)))
    return canonical_maps(result)


def oracle_kernel_moves(context: Graph, kernel: Sequence[int],
                        center: int) -> list[MapTuple]:
    """Move set per the displacement rule, from the same naive enumeration.

    Groups candidates by the center's image and keeps, per group, the maps
    minimizing (loss, how much of the own domain is re-occupied, vertices on
    functional-graph cycles).
    """
    def loss(m):
        return sum(1 for x in m if x is None)

    def overlap(m):
        dom = {v for v, w in enumerate(m) if w is not None}
        return len(dom & {w for w in m if w is not None})

    def cyclic(m):
        total = 0
        for start, w in enumerate(m):
            seen = 0
            cur = w
            while cur is not None and cur != start and seen <= len(m):
                cur = m[cur]
                seen += 1
            if cur == start:
                total += 1
        return total

    groups: dict[int, list[MapTuple]] = {}
    for m in _enumerate_kernel_candidates(context, kernel, center):
        groups.setdefault(m[center], []).append(m)
    kept: list[MapTuple] = []
    for target in groups:
        scored = [((loss(m), overlap(m), cyclic(m)), m) for m in groups[target]]
        best = min(s for s, _ in scored)
        kept.extend(m for s, m in scored if s == best)
    return canonical_maps(kept)


# ---------------------------------------------------------------------------
# Minimum-cost kernel paths.

def oracle_min_loss_paths(g: Graph, moves: dict[int, list[tuple[int, int]]],
                          v0: int, max_n: int = 12) -> dict[int, int]:
    """Exact min sum-of-losses from ``v0`` to every reachable center.

    ``moves[c]`` lists ``(target, loss)`` pairs available at center ``c``.
    Exhaustive depth-first search over simple paths; with nonnegative losses an
    optimal walk never needs to revisit a center, so simple paths suffice.
    """
    if g.n > max_n:
        raise ValidationError(f"oracle_min_loss_paths capped at n={max_n}, got {g.n}")
    best: dict[int, int] = {v0: 0}

    def dfs(c: int, cost: int, on_path: set[int]) -> None:
        for target, loss in moves.get(c, []):
            if target in on_path:
                continue
            nxt = cost + loss
            if target not in best or nxt < best[target]:
                best[target] = nxt
            # Descend even on ties: a costlier prefix cannot improve anything.
            if nxt <= best[target]:
                on_path.add(target)
                dfs(target, nxt, on_path)
                on_path.remove(target)

    dfs(v0, 0, {v0})
    return best


# ---------------------------------------------------------------------------
# 2D stencil reference for grid layer checks.

def oracle_2d_stencil(image, weights, bias: float = 0.0, *, step: int = 1,
                      keep=None, activation: str = "identity"):
    """Plus-stencil cross-correlation with zero padding, by nested loops.

    ``weights`` is (center, up, left, right, down); taps sit ``step`` pixels
    away. ``keep`` optionally restricts output pixels to a list of (i, j)
    positions (e.g. one parity class); otherwise every pixel is evaluated.
    Returns a flat list in row-major order over the evaluated pixels.
    """
    rows = len(image)
    cols = len(image[0])
    w0, wu, wl, wr, wd = weights

    def px(i, j):
        if 0 <= i < rows and 0 <= j < cols:
            return image[i][j]
        return 0.0

    positions = keep if keep is not None else [
        (i, j) for i in range(rows) for j in range(cols)
    ]
    out = []
    for i, j in positions:
        acc = (
            w0 * px(i, j)
            + wu * px(i - step, j)
            + wl * px(i, j - step)
            + wr * px(i, j + step)
            + wd * px(i + step, j)
            + bias
        )
        if activation == "relu":
            acc = max(acc, 0.0)
        out.append(acc)
    return out


def oracle_2d_shift(image, direction: str, steps: int = 1, fill: float = 0.0):
    """Shift an image by whole pixels with constant fill, by nested loops."""
    rows = len(image)
    cols = len(image[0])
    di, dj = {
        "up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1),
    }[direction]
    di, dj = di * steps, dj * steps
    out = [[fill] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            ti, tj = i + di, j + dj
            if 0 <= ti < rows and 0 <= tj < cols:
                out[ti][tj] = image[i][j]
    return out
