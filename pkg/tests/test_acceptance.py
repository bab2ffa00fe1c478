"""Acceptance checks, one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report; every tolerance is pinned here.
"""

import json
import time

import numpy as np
import pytest

from gcf.cli import main as cli_main
from gcf.graph import Graph, grid_graph, save_graph
from gcf.inference import save_signals_csv
from gcf.oracles import (canonical_maps, oracle_2d_shift, oracle_2d_stencil,
                         oracle_local_translations, oracle_min_loss_paths,
                         oracle_translations)
from gcf.propagate import family_as_maps, propagate
from gcf.downscale import chain, make_plan, select_kept
from gcf.scheme import ConvLayerParams, compile_scheme, forward
from gcf.augment import translate_signal
from gcf.translate import (enumerate_translations, find_all_local_translations,
                           find_local_translations)

from conftest import expected_grid_family, grid_shift, random_connected_graph


def report(name: str) -> None:
    print(f"[PASS] {name}")


def grid_family(height, width):
    g = grid_graph(height, width)
    v0 = (height // 2) * width + width // 2
    return g, propagate(g, find_all_local_translations(g), v0)


def run_cli(*argv):
    return cli_main([str(a) for a in argv])


# ---------------------------------------------------------------------------

def test_grid_translation_recovery():
    """Every grid in 3..10 x 3..10 yields exactly the cardinal shift family."""
    t0 = time.perf_counter()
    for height in range(3, 11):
        for width in range(3, 11):
            g, fam = grid_family(height, width)
            assert fam.kappa == 5, (height, width)
            maps = [m.mapping for m in family_as_maps(fam)]
            assert maps == expected_grid_family(height, width), (height, width)
            sizes = sorted(sum(1 for e in m if e is not None) for m in maps[1:])
            horiz, vert = height * (width - 1), width * (height - 1)
            assert sizes == sorted([horiz, horiz, vert, vert])
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0, f"took {elapsed:.2f}s, budget is 5s"
    report(f"grid translation recovery: 64 grids exact in {elapsed:.2f}s")


def _atlas_graphs():
    import networkx as nx
    from networkx.generators.atlas import graph_atlas_g

    out = []
    for G in graph_atlas_g():
        if 1 <= G.number_of_nodes() <= 6 and nx.is_connected(G):
            mapping = {u: i for i, u in enumerate(sorted(G.nodes()))}
            out.append(Graph.from_edges(
                G.number_of_nodes(),
                [(mapping[u], mapping[v]) for u, v in G.edges()],
            ))
    return out


def _check_against_oracles(g: Graph) -> None:
    got = canonical_maps([m.mapping for m in enumerate_translations(g)])
    assert got == oracle_translations(g)
    for v in range(g.n):
        lts = find_local_translations(g, v)
        kernel = sorted(
            lts.context_vertices.index(u)
            for u in lts.context_vertices
            if u == lts.center or g.has_edge(u, lts.center)
        )
        local_got = canonical_maps([m.mapping for m in lts.maps])
        assert local_got == oracle_local_translations(
            lts.context, kernel, lts.center_local)


def test_oracle_equivalence():
    """Exhaustive n<=6 list plus 50 seeded random graphs n<=9, exact match."""
    t0 = time.perf_counter()
    atlas = _atlas_graphs()
    assert len(atlas) == 143  # connected graphs up to isomorphism, n <= 6
    for g in atlas:
        _check_against_oracles(g)
    for seed in range(50):
        g = random_connected_graph(seed, 5 + seed % 5, 2 + seed % 3)
        _check_against_oracles(g)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"took {elapsed:.2f}s, budget is 60s"
    report(f"oracle equivalence: 143 exhaustive + 50 random graphs in {elapsed:.1f}s")


def test_min_cost_propagation():
    """Propagation costs equal exhaustive path search on 20 seeded graphs."""
    for seed in range(20):
        n = 5 + seed % 5
        g = random_connected_graph(seed * 13 + 5, n, 2 + seed % 3)
        locs = find_all_local_translations(g)
        v0 = (seed * 3) % n
        fam = propagate(g, locs, v0)
        moves = {c: [(t, g.n - len(phi)) for t, _, phi in locs[c].moves()]
                 for c in range(g.n)}
        want = oracle_min_loss_paths(g, moves, v0)
        got = {c: fam.cost_by_center[c] for c in fam.reached}
        assert got == want, f"seed {seed}"
    report("min-cost propagation: 20 random graphs, costs exact")


def test_downscale_checkerboard():
    """6x5 parity class exact; 8x8 stride-2 induced maps are 2-pixel shifts."""
    g = grid_graph(6, 5)
    v0 = 3 * 5 + 2
    kept = select_kept(g, v0, 2)
    parity = (v0 // 5 + v0 % 5) % 2
    assert kept == tuple(v for v in range(30) if (v // 5 + v % 5) % 2 == parity)

    g, fam = grid_family(8, 8)
    plan = make_plan(g, fam, 2)
    dirs = [(0, 0), (-2, 0), (0, -2), (0, 2), (2, 0)]
    for p in range(5):
        for i, c in enumerate(plan.kept):
            want = grid_shift(c, 8, 8, *dirs[p]) if p else c
            assert plan.induced[p][i] == want
    report("downscale checkerboard: parity class and 2-pixel shifts exact")


def test_layer_equivalence():
    """Reference forward equals the 2D stencil on 100 random cases, <1e-6."""
    rng = np.random.default_rng(1234)
    worst = 0.0
    families = {}
    for _ in range(100):
        height = int(rng.integers(3, 17))
        width = int(rng.integers(3, 17))
        if (height, width) not in families:
            families[(height, width)] = grid_family(height, width)
        g, fam = families[(height, width)]
        w = rng.normal(size=5)
        b = float(rng.normal())
        x = rng.normal(size=g.n)
        s = compile_scheme(fam, range(g.n))
        got = forward(s, ConvLayerParams(weights=tuple(w), bias=b), x)
        want = oracle_2d_stencil(x.reshape(height, width).tolist(), w.tolist(), b)
        worst = max(worst, float(np.max(np.abs(got - np.array(want)))))
    assert worst < 1e-6

    # strided variant: outputs restricted to the stride-2 kept set
    worst_strided = 0.0
    for (height, width), (g, fam) in list(families.items())[:20]:
        plan = make_plan(g, fam, 2)
        s = compile_scheme(fam, plan.kept)
        w = rng.normal(size=5)
        b = float(rng.normal())
        x = rng.normal(size=g.n)
        got = forward(s, ConvLayerParams(weights=tuple(w), bias=b), x)
        want = oracle_2d_stencil(
            x.reshape(height, width).tolist(), w.tolist(), b,
            keep=[divmod(c, width) for c in plan.kept],
        )
        worst_strided = max(worst_strided,
                            float(np.max(np.abs(got - np.array(want)))))
    assert worst_strided < 1e-6
    report(f"layer equivalence: 100 cases, max abs err {worst:.2e}; "
           f"strided max {worst_strided:.2e}")


def test_augmentation_equivalence():
    """Pushing a grid signal along each cardinal index is a zero-fill shift."""
    g, fam = grid_family(7, 9)
    rng = np.random.default_rng(55)
    img = rng.normal(size=(7, 9))
    for p, direction in ((1, "up"), (2, "left"), (3, "right"), (4, "down")):
        got = translate_signal(fam, p, img.reshape(-1))
        want = np.array(oracle_2d_shift(img.tolist(), direction)).reshape(-1)
        assert np.array_equal(got, want), direction
    report("augmentation equivalence: four directions, exact")


def test_linearity_of_pipeline_cost(tmp_path, capsys):
    """Local search and propagation scale ~linearly on 1k/4k/16k grids."""
    out = tmp_path / "linearity.json"
    code = run_cli("stats", "--linearity", "1024,4096,16384", "--json", out)
    assert code == 0
    capsys.readouterr()
    payload = json.loads(out.read_text())
    for ratio in payload["ratios"]:
        assert ratio["factor"] == 4.0
        assert ratio["local_search_ratio"] <= 6.0, ratio
        assert ratio["propagation_ratio"] <= 6.0, ratio
    summary = ", ".join(
        f"{r['n_from']}->{r['n_to']}: local x{r['local_search_ratio']:.2f}, "
        f"prop x{r['propagation_ratio']:.2f}"
        for r in payload["ratios"]
    )
    report(f"linearity: {summary} (budget x6)")


def test_cli_determinism(tmp_path, capsys):
    """Every stage re-run with identical inputs writes identical bytes."""
    height, width = 5, 6
    save_graph(grid_graph(height, width), tmp_path / "graph.json")
    rng = np.random.default_rng(99)
    signals = rng.normal(size=(40, height * width))
    save_signals_csv(signals, tmp_path / "signals.csv")

    def stage(tag):
        arts = {
            "graph": tmp_path / f"g{tag}.json",
            "family": tmp_path / f"f{tag}.json",
            "scheme": tmp_path / f"s{tag}.json",
            "binary": tmp_path / f"s{tag}.gsch",
            "plan": tmp_path / f"p{tag}.json",
            "chain": tmp_path / f"c{tag}.json",
            "aug": tmp_path / f"a{tag}.csv",
            "fwd": tmp_path / f"w{tag}.csv",
        }
        assert run_cli("infer-graph", tmp_path / "signals.csv", "-o",
                       arts["graph"], "-k", 4) == 0
        assert run_cli("find-translations", tmp_path / "graph.json", "-o",
                       arts["family"], "--auto", 3, "--seed", 7) == 0
        assert run_cli("build-scheme", arts["family"], "-o", arts["scheme"],
                       "--binary", arts["binary"]) == 0
        assert run_cli("downscale", tmp_path / "graph.json", arts["family"],
                       "-r", 2, "-o", arts["plan"],
                       "--emit-family", arts["chain"]) == 0
        assert run_cli("augment", tmp_path / "signals.csv", arts["family"],
                       "-o", arts["aug"], "--indices", "1,2,3,4",
                       "--draws", 2, "--seed", 31) == 0
        assert run_cli("forward", arts["scheme"], tmp_path / "signals.csv",
                       "-o", arts["fwd"], "--weights", "0.5,1,-1,0.25,2") == 0
        return arts

    first = stage("1")
    second = stage("2")
    capsys.readouterr()
    for key in first:
        assert first[key].read_bytes() == second[key].read_bytes(), key
    report("determinism: 6 CLI stages byte-identical across reruns")
