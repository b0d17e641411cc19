import csv
import io

import numpy as np
import pytest

from gwmds.reproduce import (
    GridResult,
    GridSettings,
    _check_bands,
    _summarise,
    cells_csv,
    checks_csv,
    load_bands,
    markdown_report,
    run_manifold_grid,
    summary_csv,
)

TINY = GridSettings(n=40, k=6, seeds=2, restarts=1, max_epochs=30, only=("s_curve",))


def _rows(values):
    """Synthetic per-seed records: ``values[method] = [(v1, v2), ...]`` per seed."""
    rows = []
    for method, per_seed in values.items():
        for seed, views in enumerate(per_seed):
            rows.append(
                {
                    "table": "t",
                    "manifold": "s_curve",
                    "method": method,
                    "seed": seed,
                    "views": list(views),
                    "mean": float(np.mean(views)),
                    "selected": None,
                }
            )
    return rows


BANDS = {
    "t": {
        "cells": [
            {"manifold": "s_curve", "method": "a", "row": "mean", "min": 0.5},
            {"manifold": "s_curve", "method": "b", "row": "view2", "min": 0.1, "max": 0.3},
            {"manifold": "mobius", "method": "a", "row": "mean", "min": 0.99},
        ],
        "trends": [{"manifold": "s_curve", "row": "mean", "better": ["a"], "worse": "b", "min_seeds": 3}],
    }
}


def test_settings_manifold_filter():
    assert GridSettings().manifolds() == ["s_curve", "swiss_roll", "mobius", "torus"]
    assert GridSettings(only=("Swiss-Roll", "torus")).manifolds() == ["swiss_roll", "torus"]
    assert GridSettings(seed=7, seeds=3).seed_list() == [7, 8, 9]
    with pytest.raises(ValueError, match="unknown"):
        GridSettings(only=("sphere",)).manifolds()


def test_bands_file_is_versioned():
    bands = load_bands()
    assert bands["version"] >= 1
    for table in ("table1", "table2"):
        for cell in bands[table]["cells"]:
            assert {"manifold", "method", "row"} <= set(cell)
            assert "min" in cell or "max" in cell


def test_summary_and_band_checks():
    settings = GridSettings(seeds=3, only=("s_curve",))
    res = GridResult("t", rows=_rows({"a": [(0.6, 0.8), (0.4, 0.6), (0.9, 0.9)], "b": [(0.1, 0.2), (0.2, 0.2), (0.0, 0.4)]}))
    _summarise(res, ["a", "b"], settings)
    a_mean = next(s for s in res.summary if s["method"] == "a" and s["row"] == "mean")
    assert a_mean["mean"] == pytest.approx(np.mean([0.7, 0.5, 0.9]))
    assert a_mean["std"] == pytest.approx(np.std([0.7, 0.5, 0.9], ddof=1))
    _check_bands(res, BANDS, settings)
    status = [c["status"] for c in res.checks]
    # mobius cell is skipped because the grid did not run it
    assert len(res.checks) == 3
    assert status == ["PASS", "PASS", "PASS"]
    assert res.passed


def test_band_and_trend_failures():
    settings = GridSettings(seeds=3, only=("s_curve",))
    res = GridResult("t", rows=_rows({"a": [(0.1, 0.1), (0.9, 0.9), (0.2, 0.2)], "b": [(0.5, 0.5), (0.1, 0.1), (0.0, 0.5)]}))
    _summarise(res, ["a", "b"], settings)
    _check_bands(res, BANDS, settings)
    by_name = {c["check"].split()[1] + c["check"].split()[2]: c for c in res.checks}
    assert by_name["amean"]["status"] == "FAIL"
    assert by_name["bview2"]["status"] == "FAIL"
    trend = res.checks[-1]
    assert trend["value"] == 1.0 and trend["status"] == "FAIL"
    assert not res.passed


def test_tiny_grid_reports_are_consistent():
    res = run_manifold_grid("table2", TINY)
    assert len(res.rows) == 2 * 3
    cells = list(csv.DictReader(io.StringIO(cells_csv(res))))
    assert [r["seed"] for r in cells] == ["0", "0", "0", "1", "1", "1"]
    for r in cells:
        vals = [float(r["view1"]), float(r["view2"])]
        assert float(r["mean"]) == pytest.approx(np.mean(vals), abs=1e-6)
    multi = [r for r in cells if r["method"] == "multi-gwmds"]
    assert all(r["selected"] in ("1", "2") for r in multi)
    summary = list(csv.DictReader(io.StringIO(summary_csv(res))))
    assert len(summary) == 3 * 3
    checks = list(csv.DictReader(io.StringIO(checks_csv(res))))
    assert {c["status"] for c in checks} <= {"PASS", "FAIL"}
    assert len(checks) == len(res.checks)
    md = markdown_report(res)
    assert "s_curve" in md and "multi-isomap" in md


def test_tiny_grid_is_deterministic():
    a = run_manifold_grid("table1", TINY)
    b = run_manifold_grid("table1", TINY)
    assert cells_csv(a) == cells_csv(b)
    assert summary_csv(a) == summary_csv(b)


def test_unknown_table():
    with pytest.raises(ValueError):
        run_manifold_grid("table9", TINY)
