import json

import numpy as np
import pytest

from gcf.cli import main
from gcf.graph import Graph, grid_graph, load_graph, save_graph
from gcf.inference import load_signals_csv, save_signals_csv
from gcf.propagate import load_family
from gcf.scheme import load_scheme, scheme_stats


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def grid_files(tmp_path):
    """Grid graph file plus smooth random signals over it."""
    height, width = 5, 6
    save_graph(grid_graph(height, width), tmp_path / "graph.json")
    rng = np.random.default_rng(77)
    base = rng.normal(size=(120, height + 2, width + 2))
    smooth = (
        base[:, 1:-1, 1:-1]
        + 0.5 * (base[:, :-2, 1:-1] + base[:, 2:, 1:-1]
                 + base[:, 1:-1, :-2] + base[:, 1:-1, 2:])
    ).reshape(120, -1)
    save_signals_csv(smooth, tmp_path / "signals.csv")
    return tmp_path


def test_full_pipeline_stage_by_stage(grid_files, capsys):
    t = grid_files
    assert run("infer-graph", t / "signals.csv", "-o", t / "inferred.json", "-k", 4) == 0
    assert load_graph(t / "inferred.json").n == 30

    assert run("find-translations", t / "graph.json", "-o", t / "family.json",
               "--v0", "15") == 0
    fam = load_family(t / "family.json")
    assert fam.kappa == 5

    assert run("build-scheme", t / "family.json", "-o", t / "scheme.json",
               "--binary", t / "scheme.gsch") == 0
    scheme = load_scheme(t / "scheme.json")
    assert scheme.rows == 30

    assert run("downscale", t / "graph.json", t / "family.json", "-r", 2,
               "-o", t / "plan.json", "--emit-family", t / "fam2.json",
               "--emit-graph", t / "g2.json") == 0
    assert run("build-scheme", t / "family.json", "--plan", t / "plan.json",
               "-o", t / "strided.json") == 0
    assert load_scheme(t / "strided.json").rows == 15

    assert run("build-scheme", t / "fam2.json", "-o", t / "level2.json") == 0

    assert run("augment", t / "signals.csv", t / "family.json",
               "-o", t / "aug.csv", "--indices", "1,2,3,4", "--draws", 1,
               "--seed", 5) == 0
    assert load_signals_csv(t / "aug.csv").shape == (240, 30)

    assert run("forward", t / "scheme.json", t / "signals.csv",
               "-o", t / "fwd.csv", "--weights", "0.2,0.1,0.3,0.25,0.15",
               "--bias", "0.5") == 0
    assert load_signals_csv(t / "fwd.csv").shape == (120, 30)
    capsys.readouterr()


def stage_artifacts(t, suffix):
    out = {}
    out["family"] = t / f"family{suffix}.json"
    out["scheme"] = t / f"scheme{suffix}.json"
    out["plan"] = t / f"plan{suffix}.json"
    out["aug"] = t / f"aug{suffix}.csv"
    run("find-translations", t / "graph.json", "-o", out["family"], "--auto", 3,
        "--seed", 4)
    run("build-scheme", out["family"], "-o", out["scheme"])
    run("downscale", t / "graph.json", out["family"], "-r", 2, "-o", out["plan"])
    run("augment", t / "signals.csv", out["family"], "-o", out["aug"],
        "--indices", "1,2", "--draws", 2, "--seed", 21)
    return out


def test_stages_are_byte_deterministic(grid_files, capsys):
    t = grid_files
    first = stage_artifacts(t, "_a")
    second = stage_artifacts(t, "_b")
    for key in first:
        assert first[key].read_bytes() == second[key].read_bytes(), key
    capsys.readouterr()


def test_outputs_round_trip(grid_files, capsys):
    from gcf.downscale import load_plan, plan_to_json
    from gcf.propagate import family_to_json
    from gcf.scheme import scheme_to_json

    t = grid_files
    arts = stage_artifacts(t, "")
    fam = load_family(arts["family"])
    assert family_to_json(fam) == arts["family"].read_text()
    scheme = load_scheme(arts["scheme"])
    assert scheme_to_json(scheme) == arts["scheme"].read_text()
    plan = load_plan(arts["plan"])
    assert plan_to_json(plan) == arts["plan"].read_text()
    capsys.readouterr()


def test_infer_graph_disconnected_exit_code(tmp_path, capsys):
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=30), rng.normal(size=30)
    x = np.stack([a, a, b, b], axis=1)
    save_signals_csv(x, tmp_path / "sig.csv")
    with pytest.warns(UserWarning):
        code = run("infer-graph", tmp_path / "sig.csv",
                   "-o", tmp_path / "g.json", "-k", 1)
    assert code == 3
    err = capsys.readouterr().err
    assert "component" in err
    assert (tmp_path / "g.json").exists()


def test_find_translations_rejects_disconnected_graph(tmp_path, capsys):
    save_graph(Graph.from_edges(4, [(0, 1), (2, 3)]), tmp_path / "g.json")
    assert run("find-translations", tmp_path / "g.json",
               "-o", tmp_path / "f.json", "--v0", "0") == 3
    assert "disconnected" in capsys.readouterr().err


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        run("no-such-command")
    assert exc.value.code == 2
    capsys.readouterr()


def test_k_too_large_is_validation_error(grid_files, capsys):
    t = grid_files
    assert run("infer-graph", t / "signals.csv", "-o", t / "g2.json",
               "-k", 30) == 3
    capsys.readouterr()


def test_verify_grid_passes(capsys):
    assert run("verify-grid", 6, 5, "--stride", 2) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_verify_grid_smallest_interior(capsys):
    assert run("verify-grid", 3, 3) == 0
    capsys.readouterr()


def test_verify_grid_detects_corrupted_scheme(grid_files, capsys):
    t = grid_files
    run("find-translations", t / "graph.json", "-o", t / "family.json", "--v0", "15")
    run("build-scheme", t / "family.json", "-o", t / "scheme.json")
    payload = json.loads((t / "scheme.json").read_text())
    payload["index"][3][1] = (payload["index"][3][1] + 1) % 30
    (t / "bad.json").write_text(json.dumps(payload))
    assert run("verify-grid", 5, 6, "--scheme", t / "bad.json") == 1
    out = capsys.readouterr().out
    assert "first mismatching row 3" in out


def test_verify_grid_accepts_generated_scheme(grid_files, capsys):
    t = grid_files
    run("find-translations", t / "graph.json", "-o", t / "family.json", "--v0", "15")
    run("build-scheme", t / "family.json", "-o", t / "scheme.json")
    assert run("verify-grid", 5, 6, "--scheme", t / "scheme.json") == 0
    capsys.readouterr()


def test_stats_matches_scheme_stats(grid_files, capsys):
    t = grid_files
    run("find-translations", t / "graph.json", "-o", t / "family.json", "--v0", "15")
    run("build-scheme", t / "family.json", "-o", t / "scheme.json")
    capsys.readouterr()
    assert run("stats", t / "scheme.json") == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads(json.dumps(scheme_stats(load_scheme(t / "scheme.json"))))


def test_stats_requires_an_argument(capsys):
    assert run("stats") == 3
    capsys.readouterr()


def test_forward_cli_matches_library(grid_files, capsys):
    from gcf.scheme import ConvLayerParams, forward as lib_forward

    t = grid_files
    run("find-translations", t / "graph.json", "-o", t / "family.json", "--v0", "15")
    run("build-scheme", t / "family.json", "-o", t / "scheme.json")
    assert run("forward", t / "scheme.json", t / "signals.csv",
               "-o", t / "out.csv", "--weights", "1,-0.5,0.25,2,0",
               "--bias", "0.125", "--activation", "relu") == 0
    got = load_signals_csv(t / "out.csv")
    scheme = load_scheme(t / "scheme.json")
    params = ConvLayerParams(weights=(1, -0.5, 0.25, 2, 0), bias=0.125,
                             activation="relu")
    signals = load_signals_csv(t / "signals.csv")
    want = np.array([lib_forward(scheme, params, row) for row in signals])
    assert np.max(np.abs(got - want)) < 1e-8
    capsys.readouterr()


def test_dump_locals_is_valid_json(grid_files, capsys):
    t = grid_files
    assert run("find-translations", t / "graph.json", "-o", t / "fam.json",
               "--v0", "15", "--dump-locals", t / "locals.json") == 0
    payload = json.loads((t / "locals.json").read_text())
    assert len(payload) == 30
    assert payload[15]["center"] == 15
    assert all("maps" in entry and "moves" in entry for entry in payload)
    capsys.readouterr()


def test_gcf_threads_env_override(grid_files, capsys, monkeypatch):
    t = grid_files
    monkeypatch.setenv("GCF_THREADS", "2")
    assert run("find-translations", t / "graph.json", "-o", t / "f2.json",
               "--v0", "15") == 0
    monkeypatch.delenv("GCF_THREADS")
    run("find-translations", t / "graph.json", "-o", t / "f1.json", "--v0", "15")
    assert (t / "f1.json").read_bytes() == (t / "f2.json").read_bytes()
    capsys.readouterr()
