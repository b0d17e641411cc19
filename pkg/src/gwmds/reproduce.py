"""Seeded experiment grids behind ``gwmds reproduce``.

Each grid cell is a (manifold, method, seed) run on the two-view
construction. Per-view numbers follow the table convention:

* Mean-GWMDS and Multi-Isomap: correlation of the view's relational
  matrix with the embedding's distances.
* Multi-GWMDS: the candidate score of each view's aligned embedding
  (mean correlation with all views); the selected view is the argmax.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .geometry import dataset_distances, generate_manifold, make_views, multi_isomap
from .gw import GwConfig, MdsConfig
from .multiview import mean_gwmds, multi_gwmds
from .relational import distance_correlation, pairwise_euclidean

logger = logging.getLogger(__name__)

MANIFOLD_ORDER = ("s_curve", "swiss_roll", "mobius", "torus")
TABLE_METRIC = {"table1": "euclidean", "table2": "geodesic"}
TABLE_METHODS = {
    "table1": ("multi-gwmds", "mean-gwmds"),
    "table2": ("multi-gwmds", "mean-gwmds", "multi-isomap"),
}

# published values: (view 1, view 2, mean)
REFERENCE = {
    "table1": {
        ("s_curve", "multi-gwmds"): (0.8484, 0.8530, 0.8507),
        ("s_curve", "mean-gwmds"): (0.7750, 0.9334, 0.8542),
        ("swiss_roll", "multi-gwmds"): (0.7762, 0.9289, 0.8525),
        ("swiss_roll", "mean-gwmds"): (0.8095, 0.9055, 0.8575),
        ("mobius", "multi-gwmds"): (0.9205, 0.9660, 0.9433),
        ("mobius", "mean-gwmds"): (0.9231, 0.9644, 0.9437),
        ("torus", "multi-gwmds"): (0.6481, 0.9431, 0.7956),
        ("torus", "mean-gwmds"): (0.7970, 0.8284, 0.8127),
    },
    "table2": {
        ("s_curve", "multi-gwmds"): (0.9556, 0.9811, 0.9684),
        ("s_curve", "mean-gwmds"): (0.9788, 0.9765, 0.9777),
        ("s_curve", "multi-isomap"): (0.8009, 0.8197, 0.8103),
        ("swiss_roll", "multi-gwmds"): (0.9771, 0.3002, 0.6387),
        ("swiss_roll", "mean-gwmds"): (0.8507, 0.6452, 0.7480),
        ("swiss_roll", "multi-isomap"): (0.7472, 0.6833, 0.7153),
        ("mobius", "multi-gwmds"): (0.9406, 0.9714, 0.9560),
        ("mobius", "mean-gwmds"): (0.9412, 0.9711, 0.9562),
        ("mobius", "multi-isomap"): (0.9386, 0.9568, 0.9477),
        ("torus", "multi-gwmds"): (0.7430, 0.9261, 0.8346),
        ("torus", "mean-gwmds"): (0.7546, 0.9348, 0.8447),
        ("torus", "multi-isomap"): (0.7500, 0.9068, 0.8284),
    },
}


def load_bands(path=None) -> dict:
    if path is None:
        text = resources.files("gwmds").joinpath("data/bands.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


@dataclass
class GridSettings:
    n: int = 500
    k: int = 10
    dim: int = 2
    restarts: int = 3
    seeds: int = 5
    seed: int = 0
    noise: float = 0.0
    learning_rate: float = 1.0
    max_epochs: int = 200
    ot_solver: str = "exact"
    epsilon: float | None = None
    only: tuple = ()

    def seed_list(self):
        return [self.seed + s for s in range(self.seeds)]

    def manifolds(self):
        if not self.only:
            return list(MANIFOLD_ORDER)
        keep = {m.lower().replace("-", "_") for m in self.only}
        unknown = keep - set(MANIFOLD_ORDER)
        if unknown:
            raise ValueError(f"unknown manifold(s) {sorted(unknown)}")
        return [m for m in MANIFOLD_ORDER if m in keep]


def _configs(settings: GridSettings, seed: int):
    mds = MdsConfig(
        embed_dim=settings.dim,
        learning_rate=settings.learning_rate,
        max_epochs=settings.max_epochs,
        seed=seed,
    )
    gw = GwConfig(
        inner_ot=settings.ot_solver,
        epsilon=settings.epsilon,
        n_restarts=settings.restarts,
        seed=seed,
    )
    return mds, gw


def method_rows(method, Ds, views, settings: GridSettings, seed: int, metric: str) -> dict:
    """Per-view values and their mean for one method on one dataset."""
    mds, gw = _configs(settings, seed)
    out = {"selected": None}
    if method == "mean-gwmds":
        emb = mean_gwmds(Ds, mds, gw)
        vals = list(emb.info["view_correlations"])
        out["embedding"] = emb
    elif method == "multi-gwmds":
        res = multi_gwmds(Ds, None, mds, gw)
        vals = [float(s) for s in res.scores]
        out["selected"] = res.selected_view
        out["embedding"] = res.embedding
        out["result"] = res
    elif method == "multi-isomap":
        emb = multi_isomap(views, settings.k, settings.dim)
        DY = pairwise_euclidean(emb.coords)
        vals = [distance_correlation(D, DY) for D in Ds]
        out["embedding"] = emb
    else:
        raise ValueError(f"unknown method {method!r}")
    out["views"] = [float(v) for v in vals]
    out["mean"] = float(np.mean(vals))
    return out


@dataclass
class GridResult:
    table: str
    rows: list = field(default_factory=list)  # per-seed records
    summary: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c["status"] == "PASS" for c in self.checks)


def run_manifold_grid(table: str, settings: GridSettings | None = None) -> GridResult:
    settings = settings or GridSettings()
    if table not in TABLE_METRIC:
        raise ValueError(f"no manifold grid for {table!r}")
    metric = TABLE_METRIC[table]
    methods = TABLE_METHODS[table]
    result = GridResult(table)
    t0 = time.perf_counter()
    for manifold in settings.manifolds():
        for seed in settings.seed_list():
            sample = generate_manifold(manifold, settings.n, settings.noise, seed)
            views = make_views(sample)
            Ds = dataset_distances(views, metric, settings.k)
            for method in methods:
                rows = method_rows(method, Ds, views, settings, seed, metric)
                result.rows.append(
                    {
                        "table": table,
                        "manifold": manifold,
                        "method": method,
                        "seed": seed,
                        "views": rows["views"],
                        "mean": rows["mean"],
                        "selected": rows["selected"],
                    }
                )
                logger.info("%s %s %s seed %d: %.4f", table, manifold, method, seed, rows["mean"])
    result.elapsed = time.perf_counter() - t0
    _summarise(result, methods, settings)
    _check_bands(result, load_bands(), settings)
    return result


def _row_value(rec, row):
    if row == "mean":
        return rec["mean"]
    return rec["views"][int(row[4:]) - 1]


def _summarise(result: GridResult, methods, settings, manifolds=None):
    for manifold in manifolds or settings.manifolds():
        for method in methods:
            recs = [r for r in result.rows if r["manifold"] == manifold and r["method"] == method]
            ref_vals = REFERENCE.get(result.table, {}).get((manifold, method))
            n_views = len(recs[0]["views"])
            names = [f"view{v + 1}" for v in range(n_views)] + ["mean"]
            for j, row in enumerate(names):
                vals = np.array([_row_value(r, row) for r in recs])
                result.summary.append(
                    {
                        "table": result.table,
                        "manifold": manifold,
                        "method": method,
                        "row": row,
                        "mean": float(vals.mean()),
                        "std": float(vals.std(ddof=1)) if vals.size > 1 else 0.0,
                        "reference": None if ref_vals is None else ref_vals[j],
                    }
                )


def _check_bands(result: GridResult, bands: dict, settings):
    table_bands = bands.get(result.table, {})
    present = set(settings.manifolds())
    for cell in table_bands.get("cells", []):
        if cell["manifold"] not in present:
            continue
        s = next(
            x
            for x in result.summary
            if x["manifold"] == cell["manifold"] and x["method"] == cell["method"] and x["row"] == cell["row"]
        )
        lo = cell.get("min", -np.inf)
        hi = cell.get("max", np.inf)
        ok = lo <= s["mean"] <= hi
        band = f">= {lo:g}" if not np.isfinite(hi) else f"[{lo:g}, {hi:g}]"
        result.checks.append(
            {
                "check": f"{cell['manifold']} {cell['method']} {cell['row']} {band}",
                "value": s["mean"],
                "status": "PASS" if ok else "FAIL",
            }
        )
    for trend in table_bands.get("trends", []):
        if trend["manifold"] not in present:
            continue
        wins = 0
        seeds = settings.seed_list()
        for seed in seeds:
            def val(method):
                return next(
                    _row_value(r, trend["row"])
                    for r in result.rows
                    if r["manifold"] == trend["manifold"] and r["method"] == method and r["seed"] == seed
                )

            worse = val(trend["worse"])
            if all(val(b) > worse for b in trend["better"]):
                wins += 1
        ok = wins >= min(trend["min_seeds"], len(seeds))
        result.checks.append(
            {
                "check": f"{trend['manifold']} {'/'.join(trend['better'])} > {trend['worse']} "
                f"in >= {trend['min_seeds']} of {len(seeds)} seeds",
                "value": float(wins),
                "status": "PASS" if ok else "FAIL",
            }
        )


def _fmt(x):
    return "" if x is None else f"{x:.6f}"


def summary_csv(result: GridResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "manifold", "method", "row", "mean", "std", "reference"])
    for s in result.summary:
        w.writerow([s["table"], s["manifold"], s["method"], s["row"], _fmt(s["mean"]), _fmt(s["std"]), _fmt(s["reference"])])
    return buf.getvalue()


def cells_csv(result: GridResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n_views = max((len(r["views"]) for r in result.rows), default=0)
    w.writerow(["table", "manifold", "method", "seed"] + [f"view{v + 1}" for v in range(n_views)] + ["mean", "selected"])
    for r in result.rows:
        sel = "" if r["selected"] is None else r["selected"] + 1
        vals = [_fmt(x) for x in r["views"]] + [""] * (n_views - len(r["views"]))
        w.writerow([r["table"], r["manifold"], r["method"], r["seed"]] + vals + [_fmt(r["mean"]), sel])
    return buf.getvalue()


def checks_csv(result: GridResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "value", "status"])
    for c in result.checks:
        w.writerow([c["check"], _fmt(c["value"]), c["status"]])
    return buf.getvalue()


def markdown_report(result: GridResult) -> str:
    lines = [f"# {result.table}: correlation per view (mean ± std over seeds)", ""]
    methods = []
    for s in result.summary:
        if s["method"] not in methods:
            methods.append(s["method"])
    lines.append("| manifold | row | " + " | ".join(methods) + " |")
    lines.append("|---|---|" + "---|" * len(methods))
    manifolds = []
    for s in result.summary:
        if s["manifold"] not in manifolds:
            manifolds.append(s["manifold"])
    for m in manifolds:
        rows = []
        for s in result.summary:
            if s["manifold"] == m and s["row"] not in rows:
                rows.append(s["row"])
        for row in rows:
            cells = []
            for method in methods:
                s = next(
                    (x for x in result.summary if x["manifold"] == m and x["method"] == method and x["row"] == row),
                    None,
                )
                if s is None:
                    cells.append("n/a")
                    continue
                ref = "" if s["reference"] is None else f" (reference {s['reference']:.4f})"
                cells.append(f"{s['mean']:.4f} ± {s['std']:.4f}{ref}")
            lines.append(f"| {m} | {row} | " + " | ".join(cells) + " |")
    if result.checks:
        lines += ["", "## Acceptance bands", "", "| check | value | status |", "|---|---|---|"]
        for c in result.checks:
            lines.append(f"| {c['check']} | {c['value']:.4f} | {c['status']} |")
    return "\n".join(lines) + "\n"


# ELD ---------------------------------------------------------------------------


def eld_run(data, metric: str, k: int, mds: MdsConfig, gw: GwConfig, bridge_components: bool = True) -> dict:
    """Multi-GWMDS, Mean-GWMDS (and Multi-Isomap when geodesic) on daily views."""
    Ds = dataset_distances(data, metric, k, bridge_components)
    out = {}
    res = multi_gwmds(Ds, None, mds, gw)
    out["multi-gwmds"] = {
        "views": [float(s) for s in res.scores],
        "selected": res.selected_view,
        "result": res,
    }
    emb = mean_gwmds(Ds, mds, gw)
    out["mean-gwmds"] = {"views": list(emb.info["view_correlations"]), "embedding": emb}
    if metric == "geodesic":
        iso = multi_isomap(data, k, mds.embed_dim, bridge_components)
        DY = pairwise_euclidean(iso.coords)
        out["multi-isomap"] = {"views": [distance_correlation(D, DY) for D in Ds], "embedding": iso}
    out["distances"] = Ds
    return out


def eld_checks(run: dict) -> list:
    """Substitute properties for the ELD table: selection and spread contrast."""
    res = run["multi-gwmds"]["result"]
    Ds = run["distances"]
    # recompute candidate scores independently of select_representative
    scores = []
    for emb in res.aligned_embeddings:
        Y = np.asarray(emb.coords)
        diff = Y[:, None, :] - Y[None, :, :]
        DY = np.sqrt((diff**2).sum(-1))
        iu = np.triu_indices(len(Y), 1)
        scores.append(np.mean([np.corrcoef(np.asarray(D)[iu], DY[iu])[0, 1] for D in Ds]))
    scores = np.array(scores)
    selected_ok = bool(scores[res.selected_view] >= scores.max() - 1e-12)
    spread_mean = float(np.ptp(run["mean-gwmds"]["views"]))
    spread_multi = float(np.ptp(run["multi-gwmds"]["views"]))
    return [
        {
            "check": "selected view has the maximum mean cross-view correlation",
            "value": float(scores[res.selected_view]),
            "status": "PASS" if selected_ok else "FAIL",
        },
        {
            "check": "Mean-GWMDS per-view spread < Multi-GWMDS per-view spread",
            "value": spread_multi - spread_mean,
            "status": "PASS" if spread_mean < spread_multi else "FAIL",
        },
    ]


ELD_BLOCKS = ("geodesic", "euclidean")


def run_eld_grid(data, settings: GridSettings | None = None, bridge_components: bool = True) -> GridResult:
    """Table-3 shaped grid on daily ELD views: a geodesic and a Euclidean block.

    Substitute checks (selection optimality and the spread contrast) are
    evaluated on every seed of the geodesic block.
    """
    settings = settings or GridSettings()
    result = GridResult("table3")
    t0 = time.perf_counter()
    blocks = []
    for metric in ELD_BLOCKS:
        block = f"eld-{metric}"
        blocks.append(block)
        for seed in settings.seed_list():
            mds, gw = _configs(settings, seed)
            run = eld_run(data, metric, settings.k, mds, gw, bridge_components)
            for method in ("multi-gwmds", "mean-gwmds", "multi-isomap"):
                if method not in run:
                    continue
                vals = [float(v) for v in run[method]["views"]]
                result.rows.append(
                    {
                        "table": "table3",
                        "manifold": block,
                        "method": method,
                        "seed": seed,
                        "views": vals,
                        "mean": float(np.mean(vals)),
                        "selected": run[method].get("selected"),
                    }
                )
            if metric == "geodesic":
                for c in eld_checks(run):
                    c["check"] = f"seed {seed}: {c['check']}"
                    result.checks.append(c)
    result.elapsed = time.perf_counter() - t0
    for block in blocks:
        methods = []
        for r in result.rows:
            if r["manifold"] == block and r["method"] not in methods:
                methods.append(r["method"])
        _summarise(result, methods, settings, manifolds=[block])
    return result


def skipped_report(table: str, reason: str) -> str:
    return f"# {table}: SKIPPED\n\n{reason}\n"
