"""File formats: embedding CSVs with JSON sidecars, result directories,
and SVG scatter plots."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

# viridis sampled at 9 stops
_RAMP = [
    (68, 1, 84),
    (71, 44, 122),
    (59, 81, 139),
    (44, 113, 142),
    (33, 144, 141),
    (39, 173, 129),
    (92, 200, 99),
    (170, 220, 50),
    (253, 231, 37),
]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_embedding_csv(path, coords, ids=None) -> None:
    Y = np.asarray(coords, dtype=float)
    ids = list(range(Y.shape[0])) if ids is None else list(ids)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"y{c + 1}" for c in range(Y.shape[1])])
        for i, row in zip(ids, Y):
            w.writerow([i] + [repr(float(x)) for x in row])


def read_embedding_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "id":
        raise ValueError(f"{path}: expected header starting with 'id'")
    ids = [r[0] for r in body]
    Y = np.array([[float(x) for x in r[1:]] for r in body])
    return ids, Y


def write_embedding(path, embedding, ids=None, extra=None) -> None:
    """CSV coordinates plus a ``.json`` sidecar with run metadata."""
    path = Path(path)
    write_embedding_csv(path, embedding.coords, ids)
    info = dict(embedding.info or {})
    info.pop("coupling", None)
    info.pop("raw", None)
    side = {
        "method": embedding.method,
        "seed": embedding.seed,
        "view": embedding.view,
        "gw_sq": info.pop("gw_sq", None),
        "iterations": info.pop("iterations", None),
        "config": info.pop("config", None),
        "info": info,
    }
    if extra:
        side.update(extra)
    dump_json(side, path.with_suffix(".json"))


def write_multi_result(out_dir, result, ids=None) -> dict:
    """Per-view aligned embeddings, couplings and scores under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"views": []}
    for v, emb in enumerate(result.aligned_embeddings):
        p = out / f"aligned_view{v + 1}.csv"
        write_embedding_csv(p, emb.coords, ids)
        paths["views"].append(str(p))
    couplings = [json.loads(c.to_json()) for c in result.couplings]
    (out / "couplings.json").write_text(json.dumps(couplings) + "\n")
    dump_json(
        {
            "scores": [float(s) for s in result.scores],
            "selected": int(result.selected_view),
            "criterion": result.criterion,
            "aggregate": result.aggregate,
            "degenerate": list(result.degenerate),
        },
        out / "scores.json",
    )
    paths["couplings"] = str(out / "couplings.json")
    paths["scores"] = str(out / "scores.json")
    return paths


def _color(t: float) -> str:
    t = min(1.0, max(0.0, t)) * (len(_RAMP) - 1)
    i = min(int(t), len(_RAMP) - 2)
    f = t - i
    c = [round(a + f * (b - a)) for a, b in zip(_RAMP[i], _RAMP[i + 1])]
    return "#%02x%02x%02x" % tuple(c)


def scatter_svg(path, coords, color=None, title: str = "", size: int = 480) -> None:
    """Two-dimensional scatter; 1-D embeddings are drawn on a line."""
    Y = np.asarray(coords, dtype=float)
    if Y.shape[1] == 1:
        Y = np.column_stack([Y[:, 0], np.zeros(len(Y))])
    Y = Y[:, :2]
    if color is None:
        color = np.arange(len(Y), dtype=float)
    c = np.asarray(color, dtype=float)
    span = np.ptp(c)
    c = (c - c.min()) / span if span > 0 else np.zeros_like(c)
    pad = 24
    lo, hi = Y.min(axis=0), Y.max(axis=0)
    ext = float(max(hi - lo)) or 1.0
    mid = (lo + hi) / 2
    scale = (size - 2 * pad) / ext
    px = size / 2 + (Y[:, 0] - mid[0]) * scale
    py = size / 2 - (Y[:, 1] - mid[1]) * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{size / 2:.1f}" y="16" font-family="sans-serif" font-size="13" text-anchor="middle">{title}</text>')
    for x, y, t in zip(px, py, c):
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{_color(t)}" fill-opacity="0.85"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
