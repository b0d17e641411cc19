"""``gwmds`` command line: generate, embed, eval, reproduce.

Exit codes: 0 success, 1 numerical failure, 2 usage or input error.

Every option defaults to ``None`` in argparse so that the effective value
can be resolved as built-in default < ``--config`` file < command line.
The resolved configuration is written to ``<out>/config.json`` and can be
passed back through ``--config`` to replay a run.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .geometry import (
    DisconnectedGraphError,
    Embedding,
    classical_mds,
    dataset_distances,
    generate_manifold,
    make_views,
    multi_isomap,
)
from .gw import ConvergenceError, GwConfig, MdsConfig
from .ingest import daily_views, default_dates, load_eld
from .io import dump_json, read_embedding_csv, scatter_svg, write_embedding, write_embedding_csv, write_multi_result
from .multiview import mean_gwmds, multi_gwmds
from .ot import OTError
from .relational import (
    DegenerateInputError,
    MultiViewDataset,
    RelationalMatrix,
    SampleMatrix,
    distance_correlation,
    mean_relational,
    pairwise_euclidean,
)
from . import reproduce as rep

logger = logging.getLogger("gwmds")

METHODS = ("mean-gwmds", "multi-gwmds", "multi-isomap", "mds")
MANIFOLD_CHOICES = ("s-curve", "s_curve", "swiss-roll", "swiss_roll", "mobius", "torus")

COMMON = {"seed": 0, "out": "gwmds-out"}
DEFAULTS = {
    "generate": {
        "manifold": "s-curve",
        "n": 500,
        "noise": 0.0,
        "metric": "euclidean",
        "k": 10,
        "bridge_components": False,
    },
    "embed": {
        "manifold": None,
        "n": 500,
        "noise": 0.0,
        "views": None,
        "eld": None,
        "dates": None,
        "normalize": "none",
        "fill": None,
        "delimiter": ";",
        "decimal": ",",
        "metric": "euclidean",
        "k": 10,
        "bridge_components": False,
        "method": "mean-gwmds",
        "dim": 2,
        "lr": 1.0,
        "epochs": 200,
        "tol": 1e-6,
        "restarts": 3,
        "init": "cmds",
        "ot_solver": "exact",
        "epsilon": None,
        "weights": None,
        "selection": "max-corr",
        "aggregate": "mean",
        "raw_shared": False,
    },
    "eval": {"embedding": None, "view_files": None, "record": None},
    "reproduce": {
        "table": None,
        "seeds": 5,
        "n": 500,
        "k": 10,
        "dim": 2,
        "lr": 1.0,
        "epochs": 200,
        "restarts": 3,
        "ot_solver": "exact",
        "epsilon": None,
        "only": None,
        "eld": None,
        "dates": None,
        "normalize": "none",
        "fill": None,
        "delimiter": ";",
        "decimal": ",",
        "strict": False,
    },
}


class UsageError(ValueError):
    pass


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _float_list(text):
    try:
        return [float(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_common(p, top=False):
    p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    p.add_argument("--out", default=None, help="output directory (default ./gwmds-out)")
    p.add_argument("--config", default=None, help="JSON config to replay; command-line flags win")
    if top:
        p.add_argument("-v", "--verbose", action="count", default=0)
        p.add_argument("--version", action="version", version=f"gwmds {__version__}")


def _add_solver(p):
    p.add_argument("--dim", type=int, default=None, help="embedding dimension q (default 2)")
    p.add_argument("--lr", type=float, default=None, help="majorisation step fraction in (0, 1] (default 1.0)")
    p.add_argument("--epochs", type=int, default=None, help="maximum epochs (default 200)")
    p.add_argument("--restarts", type=int, default=None, help="restarts, best objective kept (default 3)")
    p.add_argument("--ot-solver", choices=("exact", "entropic"), default=None)
    p.add_argument("--epsilon", type=float, default=None, help="entropic regularisation")


def _add_eld(p):
    p.add_argument("--eld", default=None, help="load-diagram text file")
    p.add_argument("--dates", type=_csv_list, default=None, help="comma-separated days, one view each")
    p.add_argument("--normalize", choices=("none", "zscore", "max"), default=None)
    p.add_argument("--fill", choices=("zero", "previous"), default=None, help="treatment of empty cells")
    p.add_argument("--delimiter", default=None)
    p.add_argument("--decimal", default=None, help="decimal mark (default ',')")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gwmds", description="Gromov-Wasserstein multi-view MDS")
    _add_common(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a manifold, its two views and their distance matrices")
    _add_common(g)
    g.add_argument("--manifold", choices=MANIFOLD_CHOICES, default=None)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--noise", type=float, default=None)
    g.add_argument("--metric", choices=("euclidean", "geodesic"), default=None)
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--bridge-components", action="store_true", default=None)

    e = sub.add_parser("embed", help="embed a multi-view dataset")
    _add_common(e)
    e.add_argument("--method", choices=METHODS, default=None)
    e.add_argument("--manifold", choices=MANIFOLD_CHOICES, default=None)
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--noise", type=float, default=None)
    e.add_argument(
        "--views",
        type=_csv_list,
        default=None,
        help="comma-separated view CSVs (features with an id column, or distance matrices with --metric precomputed)",
    )
    _add_eld(e)
    e.add_argument("--metric", choices=("euclidean", "geodesic", "precomputed"), default=None)
    e.add_argument("--k", type=int, default=None)
    e.add_argument("--bridge-components", action="store_true", default=None)
    _add_solver(e)
    e.add_argument("--tol", type=float, default=None, help="relative objective change to stop")
    e.add_argument("--init", choices=("cmds", "gaussian"), default=None)
    e.add_argument("--lambda", dest="weights", type=_float_list, default=None, help="view weights w1,w2,...")
    e.add_argument("--selection", choices=("max-corr", "min-rho"), default=None)
    e.add_argument("--aggregate", choices=("mean", "median", "maxmin"), default=None)
    e.add_argument("--raw-shared", action="store_true", default=None, help="also write the unaligned shared embedding")

    v = sub.add_parser("eval", help="correlate an embedding with view distance matrices")
    _add_common(v)
    v.add_argument("embedding", nargs="?", default=None)
    v.add_argument("view_files", nargs="*", default=None)
    v.add_argument("--record", default=None, help="result.json to replay and verify")

    r = sub.add_parser("reproduce", help="seeded table grids with acceptance bands")
    _add_common(r)
    r.add_argument("table", choices=("table1", "table2", "table3", "1", "2", "3"), nargs="?", default=None)
    r.add_argument("--seeds", type=int, default=None, help="number of seeds (default 5)")
    r.add_argument("--n", type=int, default=None)
    r.add_argument("--k", type=int, default=None)
    _add_solver(r)
    r.add_argument("--only", type=_csv_list, default=None, help="restrict to manifolds, e.g. s-curve,mobius")
    _add_eld(r)
    r.add_argument("--strict", action="store_true", default=None, help="exit 1 when a band fails")
    return parser


def resolve(args) -> dict:
    """Built-in defaults, then the config file, then explicit flags."""
    cmd = args.command
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[cmd])
    config_path = getattr(args, "config", None) or getattr(args, "_top_config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file {config_path} not found") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {config_path} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        loaded.pop("version", None)
        loaded_cmd = loaded.pop("command", cmd)
        if loaded_cmd != cmd:
            raise UsageError(f"config was written by '{loaded_cmd}', not '{cmd}'")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key in cfg:
        val = getattr(args, key, None)
        if val is None and key in ("seed", "out"):
            val = getattr(args, f"_top_{key}", None)
        if val is not None:
            cfg[key] = val
    return cfg


def _write_config(out: Path, cmd: str, cfg: dict):
    out.mkdir(parents=True, exist_ok=True)
    dump_json({"command": cmd, "version": __version__, **cfg}, out / "config.json")


# generate ------------------------------------------------------------------------


def _write_points(path, X, ids, cols):
    df = pd.DataFrame(np.asarray(X), columns=cols)
    df.insert(0, "id", list(ids))
    df.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def cmd_generate(cfg: dict) -> int:
    out = Path(cfg["out"])
    _write_config(out, "generate", cfg)
    sample = generate_manifold(cfg["manifold"], cfg["n"], cfg["noise"], cfg["seed"])
    ids = range(sample.points.shape[0])
    _write_points(out / "points.csv", sample.points, ids, ["x", "y", "z"])
    t = sample.intrinsic.shape[1]
    _write_points(out / "intrinsic.csv", sample.intrinsic, ids, [f"t{i + 1}" for i in range(t)])
    data = make_views(sample)
    Ds = dataset_distances(data, cfg["metric"], cfg["k"], cfg["bridge_components"])
    files = ["points.csv", "intrinsic.csv"]
    for v, (view, D) in enumerate(zip(data.views, Ds)):
        _write_points(out / f"view{v + 1}.csv", view.values, ids, ["x", "y", "z"])
        D.to_csv(out / f"D_view{v + 1}.csv")
        files += [f"view{v + 1}.csv", f"D_view{v + 1}.csv"]
    dump_json({"manifold": sample.kind, "n": len(ids), "metric": cfg["metric"], "k": cfg["k"], "files": files}, out / "manifest.json")
    print(f"wrote {len(files)} files to {out}")
    return 0


# embed ---------------------------------------------------------------------------


def _read_feature_csv(path):
    df = pd.read_csv(path)
    if df.shape[1] < 2 or str(df.columns[0]).lower() != "id":
        raise UsageError(f"{path}: expected a header starting with 'id' and at least one feature column")
    return tuple(str(i) for i in df.iloc[:, 0]), df.iloc[:, 1:].to_numpy(dtype=float)


def load_dataset(cfg: dict):
    """Return (views-or-None, relational matrices, ids, color, metadata)."""
    sources = [cfg["manifold"] is not None, bool(cfg["views"]), cfg["eld"] is not None]
    if sum(sources) != 1:
        raise UsageError("pass exactly one of --manifold, --views or --eld")
    meta = {"metric": cfg["metric"], "k": cfg["k"]}
    if cfg["manifold"] is not None:
        if cfg["metric"] == "precomputed":
            raise UsageError("--metric precomputed needs --views")
        sample = generate_manifold(cfg["manifold"], cfg["n"], cfg["noise"], cfg["seed"])
        data = make_views(sample)
        color = sample.intrinsic[:, 0]
        ids = tuple(range(sample.points.shape[0]))
        meta.update(manifold=sample.kind, n=len(ids))
    elif cfg["views"]:
        if cfg["metric"] == "precomputed":
            Ds = [RelationalMatrix.from_csv(p) for p in cfg["views"]]
            n = Ds[0].n
            for v, D in enumerate(Ds):
                if D.n != n:
                    raise UsageError(f"view {v}: {D.n} samples, expected {n}")
            meta.update(views=list(cfg["views"]), n=n)
            return None, Ds, tuple(range(n)), None, meta
        loaded = [_read_feature_csv(p) for p in cfg["views"]]
        ids = loaded[0][0]
        data = MultiViewDataset(tuple(SampleMatrix(X, row_ids) for row_ids, X in loaded), ids)
        color = None
        meta.update(views=list(cfg["views"]), n=len(ids))
    else:
        if cfg["metric"] == "precomputed":
            raise UsageError("--metric precomputed needs --views")
        series = load_eld(cfg["eld"], cfg["delimiter"], cfg["decimal"], cfg["fill"])
        dates = cfg["dates"] or default_dates(series)
        data = daily_views(series, dates, cfg["normalize"])
        ids = data.row_ids
        color = None
        meta.update(eld=str(cfg["eld"]), **data.meta)
    Ds = dataset_distances(data, cfg["metric"], cfg["k"], cfg["bridge_components"])
    return data, Ds, ids, color, meta


def _configs(cfg: dict):
    mds = MdsConfig(
        embed_dim=cfg["dim"],
        learning_rate=cfg["lr"],
        max_epochs=cfg["epochs"],
        epoch_tol=cfg.get("tol", 1e-6),
        init=cfg.get("init", "cmds"),
        seed=cfg["seed"],
    )
    gw = GwConfig(inner_ot=cfg["ot_solver"], epsilon=cfg["epsilon"], n_restarts=cfg["restarts"], seed=cfg["seed"])
    return mds, gw


def _correlations(Ds, Y):
    DY = pairwise_euclidean(Y)
    return [distance_correlation(D, DY) for D in Ds]


def cmd_embed(cfg: dict) -> int:
    out = Path(cfg["out"])
    _write_config(out, "embed", cfg)
    t0 = time.perf_counter()
    data, Ds, ids, color, meta = load_dataset(cfg)
    mds, gw = _configs(cfg)
    method = cfg["method"]
    artifacts = {}
    record = {"method": method, "selected_view": None, "scores": None}
    if cfg["weights"] is not None and method != "multi-gwmds" and len(cfg["weights"]) != len(Ds):
        raise UsageError(f"{len(cfg['weights'])} weights for {len(Ds)} views")

    if method == "mean-gwmds":
        if cfg["weights"] is not None:
            Dbar = mean_relational(Ds, cfg["weights"])
            from .gw import gwmds_embed

            emb = gwmds_embed(Dbar, mds, gw)
            emb = Embedding(emb.coords, method="mean-gwmds", seed=emb.seed, info=emb.info)
        else:
            emb = mean_gwmds(Ds, mds, gw)
    elif method == "multi-gwmds":
        res = multi_gwmds(
            Ds,
            cfg["weights"],
            mds,
            gw,
            selection=cfg["selection"].replace("-", "_"),
            aggregate=cfg["aggregate"],
        )
        emb = res.embedding
        paths = write_multi_result(out / "multi", res, ids)
        artifacts["multi"] = {
            "views": [str(Path(p).relative_to(out)) for p in paths["views"]],
            "couplings": str(Path(paths["couplings"]).relative_to(out)),
            "scores": str(Path(paths["scores"]).relative_to(out)),
        }
        record.update(
            selected_view=int(res.selected_view),
            scores=[float(s) for s in res.scores],
            criterion=res.criterion,
            aggregate=res.aggregate,
            objective_trace=list(res.objective_trace),
        )
        if cfg["raw_shared"]:
            write_embedding_csv(out / "shared_raw.csv", res.shared_embedding.coords)
            artifacts["shared_raw"] = "shared_raw.csv"
            logger.warning("shared_raw.csv is unaligned debug output, not a result")
    elif method == "multi-isomap":
        if data is None:
            emb = classical_mds(mean_relational(Ds), cfg["dim"])
            emb = Embedding(emb.coords, method="multi-isomap", seed=cfg["seed"], info=emb.info)
        else:
            emb = multi_isomap(data, cfg["k"], cfg["dim"], cfg["bridge_components"])
    elif method == "mds":
        emb = classical_mds(mean_relational(Ds), cfg["dim"])
    else:
        raise UsageError(f"unknown method {method!r}")

    corrs = _correlations(Ds, emb.coords)
    wall = time.perf_counter() - t0

    write_embedding(out / "embedding.csv", emb, ids, extra={"k": cfg["k"], "metric": cfg["metric"]})
    artifacts.update(embedding="embedding.csv", sidecar="embedding.json")
    scatter_svg(out / "embedding.svg", emb.coords, color, title=method)
    artifacts["figure"] = "embedding.svg"
    dist = []
    for v, D in enumerate(Ds):
        name = f"D_view{v + 1}.csv"
        D.to_csv(out / name)
        dist.append(name)
    artifacts["distances"] = dist

    record.update(
        view_correlations=[float(c) for c in corrs],
        mean_correlation=float(np.mean(corrs)),
        wall_time=wall,
        data=meta,
        config={"command": "embed", **cfg},
        artifacts=artifacts,
    )
    dump_json(record, out / "result.json")
    print(_table_row(method, corrs))
    if record["selected_view"] is not None:
        print(f"selected view: {record['selected_view'] + 1}")
    return 0


# eval ----------------------------------------------------------------------------


def _table_row(label, corrs):
    head = "method".ljust(14) + "".join(f"view{v + 1}".rjust(9) for v in range(len(corrs))) + "mean".rjust(9)
    row = label.ljust(14) + "".join(f"{c:9.4f}" for c in corrs) + f"{np.mean(corrs):9.4f}"
    return head + "\n" + row


def cmd_eval(cfg: dict) -> int:
    if cfg["record"]:
        rec_path = Path(cfg["record"])
        try:
            record = json.loads(rec_path.read_text())
        except FileNotFoundError:
            raise UsageError(f"record {rec_path} not found") from None
        base = rec_path.parent
        emb_path = base / record["artifacts"]["embedding"]
        view_paths = [base / p for p in record["artifacts"]["distances"]]
        label = record.get("method", "embedding")
    else:
        if not cfg["embedding"] or not cfg["view_files"]:
            raise UsageError("eval needs an embedding CSV and at least one distance-matrix CSV, or --record")
        emb_path = Path(cfg["embedding"])
        view_paths = [Path(p) for p in cfg["view_files"]]
        label = emb_path.stem
        record = None
    for p in [emb_path, *view_paths]:
        if not p.exists():
            raise UsageError(f"{p} not found")
    _, Y = read_embedding_csv(emb_path)
    Ds = [RelationalMatrix.from_csv(p) for p in view_paths]
    for v, D in enumerate(Ds):
        if D.n != Y.shape[0]:
            raise UsageError(f"view {v}: {D.n} samples but the embedding has {Y.shape[0]} rows")
    corrs = _correlations(Ds, Y)
    print(_table_row(label, corrs))
    out = Path(cfg["out"])
    _write_config(out, "eval", cfg)
    summary = {"view_correlations": corrs, "mean_correlation": float(np.mean(corrs))}
    status = 0
    if record is not None:
        stored = np.asarray(record["view_correlations"], dtype=float)
        diff = float(np.max(np.abs(stored - np.asarray(corrs)))) if stored.size == len(corrs) else np.inf
        summary["max_abs_diff"] = diff
        if diff <= 1e-9:
            print(f"replay OK (max |diff| = {diff:.3g})")
        else:
            print(f"replay MISMATCH (max |diff| = {diff:.3g})", file=sys.stderr)
            status = 1
    dump_json(summary, out / "eval.json")
    return status


# reproduce -----------------------------------------------------------------------


def cmd_reproduce(cfg: dict) -> int:
    table = cfg["table"]
    if table is None:
        raise UsageError("reproduce needs a table: table1, table2 or table3")
    if table in ("1", "2", "3"):
        table = f"table{table}"
        cfg["table"] = table
    out = Path(cfg["out"])
    _write_config(out, "reproduce", cfg)
    settings = rep.GridSettings(
        n=cfg["n"],
        k=cfg["k"],
        dim=cfg["dim"],
        restarts=cfg["restarts"],
        seeds=cfg["seeds"],
        seed=cfg["seed"],
        learning_rate=cfg["lr"],
        max_epochs=cfg["epochs"],
        ot_solver=cfg["ot_solver"],
        epsilon=cfg["epsilon"],
        only=tuple(cfg["only"] or ()),
    )
    if settings.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    if table == "table3":
        if not cfg["eld"]:
            text = rep.skipped_report("table3", "No load-diagram file supplied (pass --eld PATH).")
            (out / "report.md").write_text(text)
            print("table3: SKIPPED (no --eld file)")
            return 0
        series = load_eld(cfg["eld"], cfg["delimiter"], cfg["decimal"], cfg["fill"])
        dates = cfg["dates"] or default_dates(series)
        data = daily_views(series, dates, cfg["normalize"])
        dump_json(data.meta, out / "manifest.json")
        result = rep.run_eld_grid(data, settings)
    else:
        result = rep.run_manifold_grid(table, settings)

    (out / "cells.csv").write_text(rep.cells_csv(result))
    (out / "report.csv").write_text(rep.summary_csv(result))
    (out / "checks.csv").write_text(rep.checks_csv(result))
    md = rep.markdown_report(result)
    (out / "report.md").write_text(md)
    dump_json({"table": table, "elapsed_seconds": result.elapsed}, out / "runtime.json")
    print(md, end="")
    print(f"elapsed: {result.elapsed:.1f} s")
    if cfg["strict"] and not result.passed:
        return 1
    return 0


COMMANDS = {"generate": cmd_generate, "embed": cmd_embed, "eval": cmd_eval, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    # global flags may come before the subcommand; keep them apart from the
    # subcommand's copies so neither shadows the other
    argv = list(sys.argv[1:] if argv is None else argv)
    top_parser = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _add_common(top_parser)
    top_parser.add_argument("-v", "--verbose", action="count", default=0)
    try:
        known, rest = top_parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if not rest or rest[0] not in COMMANDS:
            parser.parse_args(argv)
            return 2
        args = parser.parse_args(rest)
    except SystemExit as exc:
        return int(exc.code or 0)
    args._top_seed, args._top_out, args._top_config = known.seed, known.out, known.config
    verbose = known.verbose
    logging.basicConfig(
        level=logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (ConvergenceError, OTError, DegenerateInputError, DisconnectedGraphError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"gwmds: numerical failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"gwmds: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
