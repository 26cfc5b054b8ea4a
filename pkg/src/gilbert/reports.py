"""Serialization: tessellation JSON, tabular CSV, and run manifests.

Floats in CSV are written with 17 significant digits (lossless for
doubles); JSON uses the shortest round-trip representation.  Infinite
branch lengths serialize as the string ``"inf"`` since JSON has no
infinity literal.  Identical inputs always produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from typing import Any, Mapping, Sequence

from .engine import CollisionEvent, MarkedConfig, Tessellation
from .geom import MarkedPoint, Rect


def fmt17(v: float) -> str:
    return format(float(v), ".17g")


def jsonable(obj: Any) -> Any:
    """Recursively convert to JSON-encodable values; non-finite floats
    become the strings "inf" / "-inf" / "nan"."""
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if hasattr(obj, "item") and not hasattr(obj, "__len__"):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if hasattr(obj, "tolist"):
        return jsonable(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _parse_ext(v: Any) -> float:
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    if v == "nan":
        return math.nan
    return float(v)


def write_json(path: str, payload: Any) -> None:
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path: str, columns: Sequence[str],
              rows: Sequence[Mapping[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            out = []
            for c in columns:
                v = row.get(c, "")
                if isinstance(v, float):
                    out.append(fmt17(v))
                else:
                    out.append(v)
            writer.writerow(out)


def read_csv(path: str) -> tuple[list[str], list[dict[str, Any]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for raw in reader:
            row: dict[str, Any] = {}
            for key, v in zip(header, raw):
                try:
                    row[key] = _parse_ext(v)
                except (TypeError, ValueError):
                    row[key] = v
            rows.append(row)
    return header, rows


TABLE_COLUMNS = ("lambda", "estimate", "std_error", "target", "n_rep",
                 "certified_fraction", "master_seed")


def report_rows(report: Any) -> list[dict[str, Any]]:
    """Normalize an estimator report or experiment row list to the
    canonical table schema."""
    from .stats import CltReport, EstimatorReport, ExperimentRow

    if isinstance(report, EstimatorReport):
        return [{"lambda": "", "estimate": report.estimate,
                 "std_error": report.std_error, "target": "",
                 "n_rep": report.n_rep,
                 "certified_fraction": report.certified_fraction,
                 "master_seed": report.metadata.get("master_seed", "")}]
    if isinstance(report, CltReport):
        return [{"lambda": report.metadata.get("lambda", ""),
                 "estimate": report.ks_statistic, "std_error": "",
                 "target": report.p_value,
                 "n_rep": report.metadata.get("n_rep", ""),
                 "certified_fraction": "",
                 "master_seed": report.metadata.get("master_seed", "")}]
    rows = []
    for r in report:
        if isinstance(r, ExperimentRow):
            rows.append({"lambda": r.lam, "estimate": r.estimate,
                         "std_error": r.std_error, "target": r.target,
                         "n_rep": r.n_rep,
                         "certified_fraction": r.certified_fraction,
                         "master_seed": ""})
        else:
            rows.append(dict(r))
    return rows


def export_report(report: Any, path: str, format: str) -> None:
    """Write an estimator report or experiment table as CSV or JSON."""
    if format == "csv":
        write_csv(path, TABLE_COLUMNS, report_rows(report))
    elif format == "json":
        from dataclasses import asdict, is_dataclass
        if is_dataclass(report) and not isinstance(report, type):
            payload = asdict(report)
        elif isinstance(report, (list, tuple)):
            payload = [asdict(r) if is_dataclass(r) else r for r in report]
        else:
            payload = report
        write_json(path, payload)
    else:
        raise ValueError(f"unknown report format {format!r}")


def tessellation_to_dict(tess: Tessellation) -> dict:
    win = tess.config.window
    return {
        "seeds": [{"id": p.id, "x": p.x, "y": p.y, "alpha": p.alpha}
                  for p in tess.config.points],
        "window": None if win is None else {
            "x0": win.x0, "y0": win.y0,
            "width": win.width, "height": win.height},
        "branches": [
            {"seed": key[0], "sign": key[1],
             "length": length if math.isfinite(length) else "inf",
             "blocker": (None if tess.blocker_of[key] is None
                         else {"seed": tess.blocker_of[key][0],
                               "sign": tess.blocker_of[key][1]})}
            for key, length in tess.branch_lengths.items()],
        "events": [
            {"time": ev.time,
             "blocked": {"seed": ev.blocked[0], "sign": ev.blocked[1]},
             "blocker": {"seed": ev.blocker[0], "sign": ev.blocker[1]},
             "point": [ev.point[0], ev.point[1]]}
            for ev in tess.events],
    }


def write_tessellation_json(path: str, tess: Tessellation) -> None:
    write_json(path, tessellation_to_dict(tess))


def tessellation_from_dict(data: Mapping[str, Any]) -> Tessellation:
    """Rebuild a Tessellation value from its JSON form (no re-simulation)."""
    import numpy as np

    pts = tuple(MarkedPoint(s["x"], s["y"], s["alpha"], s["id"])
                for s in data["seeds"])
    win = data.get("window")
    window = None if win is None else Rect(win["x0"], win["y0"],
                                           win["width"], win["height"])
    config = MarkedConfig(pts, window)
    lengths = np.full(2 * len(pts), math.inf)
    for b in data["branches"]:
        idx = 2 * config.index_of(b["seed"]) + (0 if b["sign"] > 0 else 1)
        lengths[idx] = _parse_ext(b["length"])
    events = tuple(
        CollisionEvent(
            time=float(ev["time"]),
            blocked=(ev["blocked"]["seed"], ev["blocked"]["sign"]),
            blocker=(ev["blocker"]["seed"], ev["blocker"]["sign"]),
            point=(float(ev["point"][0]), float(ev["point"][1])))
        for ev in data["events"])
    return Tessellation(config, lengths, events)


def read_seeds_json(path: str) -> MarkedConfig:
    """Load a finite seed configuration: a JSON list of {x, y, alpha}."""
    data = read_json(path)
    if not isinstance(data, list):
        raise ValueError("seed file must be a JSON list of {x, y, alpha}")
    pts = tuple(MarkedPoint(float(s["x"]), float(s["y"]), float(s["alpha"]), k)
                for k, s in enumerate(data))
    return MarkedConfig(pts)
