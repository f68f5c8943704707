"""Scenario files and reports.

A scenario is a JSON document naming a model, a branch, a path and the
computations to run. :func:`run_scenario` executes it and returns a report
dictionary; CSV outputs are returned alongside as text so the caller decides
where they go.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
import warnings
from pathlib import Path

import jsonschema
import numpy as np

from .eigenbundle import track_branch
from .errors import InputError
from .gauge import classify_bundle, default_section
from .geometry import make_path
from .models import BranchDescriptor, ZOO, make_model, make_tabulated
from .paths import from_nodes
from .transport import connection_rows, holonomy, transport_ode, wilson_line_oracle

OUTPUT_KINDS = ("holonomy", "topology", "connection_csv", "track_csv")

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "berrybundle scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "branch", "path", "outputs"],
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"type": "string", "enum": sorted(ZOO) + ["tabulated"]},
                "params": {"type": "object"},
            },
        },
        "branch": {"type": ["string", "number"]},
        "path": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["preset"],
                    "properties": {
                        "preset": {"type": "string"},
                        "params": {"type": "object"},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["nodes"],
                    "properties": {
                        "nodes": {
                            "type": "array",
                            "minItems": 2,
                            "items": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                        },
                        "closed": {"type": "boolean"},
                    },
                },
            ]
        },
        "method": {"enum": ["ode", "wilson", "both"], "default": "ode"},
        "steps": {"type": "integer", "minimum": 2, "default": 1024},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gap_tol": {"type": "number", "exclusiveMinimum": 0},
                "richardson_tol": {"type": "number", "exclusiveMinimum": 0},
                "equator_samples": {"type": "integer", "minimum": 8},
            },
        },
        "outputs": {
            "type": "array",
            "minItems": 1,
            "uniqueItems": True,
            "items": {"enum": list(OUTPUT_KINDS)},
        },
    },
}


class SchemaError(InputError):
    """Scenario file does not parse or does not match the schema."""


def validate_scenario(scenario) -> dict:
    try:
        jsonschema.validate(scenario, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise SchemaError(f"scenario invalid at {where}: {exc.message}") from None
    return scenario


def load_scenario(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read scenario: {exc}") from None
    try:
        scenario = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from None
    return validate_scenario(scenario)


def build_model(spec: dict, base_dir: Path | None = None):
    params = dict(spec.get("params", {}))
    if spec["name"] != "tabulated":
        try:
            return make_model(spec["name"], **params)
        except TypeError as exc:
            raise SchemaError(f"bad model parameters: {exc}") from None
    # tabulated: an .npz holding axis0..axis{d-1} and matrices
    if "file" not in params or "branches" not in params:
        raise SchemaError("tabulated model needs params 'file' and 'branches'")
    file = Path(params["file"])
    if base_dir is not None and not file.is_absolute():
        file = base_dir / file
    try:
        data = np.load(file)
    except OSError as exc:
        raise SchemaError(f"cannot read tabulated model: {exc}") from None
    axes = [data[f"axis{i}"] for i in range(sum(k.startswith("axis") for k in data.files))]
    branches = [BranchDescriptor(str(b["label"]), int(b["degeneracy"]), int(b["start"])) for b in params["branches"]]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return make_tabulated(axes, data["matrices"], branches)


def build_path(spec: dict, dim: int):
    if "preset" in spec:
        path = make_path(spec["preset"], spec.get("params", {}))
    else:
        path = from_nodes(spec["nodes"], spec.get("closed"))
    if path.dim != dim:
        raise SchemaError(f"path has dimension {path.dim}, model expects {dim}")
    return path


def _finite(value):
    """Recursively convert to JSON types; non-finite floats become ``None``."""
    if isinstance(value, dict):
        return {str(k): _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, np.ndarray):
        return _finite(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    return value


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def versions() -> dict:
    from importlib import metadata

    import scipy

    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"artifact": own, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _holonomy_results(model, path, branch, method, steps, tol) -> dict:
    gap_tol = tol.get("gap_tol")
    out = {}
    if method in ("ode", "both"):
        if path.closed:
            res = holonomy(model, path, branch, "ode", steps, gap_tol=gap_tol, tol=tol.get("richardson_tol"))
        else:
            res = transport_ode(model, path, branch, steps, gap_tol=gap_tol, tol=tol.get("richardson_tol"))
        out["ode"] = res.to_dict()
    if method in ("wilson", "both"):
        res = wilson_line_oracle(model, path, branch, steps, gap_tol=gap_tol)
        out["wilson"] = res.to_dict()
    if method == "both":
        a = np.array([[complex(*z) for z in row] for row in out["ode"]["unitary"]])
        b = np.array([[complex(*z) for z in row] for row in out["wilson"]["unitary"]])
        out["max_difference"] = float(np.max(np.abs(a - b)))
    out["closed"] = bool(path.closed)
    return out


def _connection_csv(model, path, branch) -> tuple[str, dict]:
    d = model.param_dim
    k = model.branch(branch).degeneracy
    rows, patches = [], []
    for p in path.nodes:
        patch = "+" if model.param_dim != 3 or p[2] >= 0 else "-"
        section = default_section(model, branch, patch)
        patches.append(section.patch)
        rows.extend(connection_rows(section, p[None, :]))
    coords = [f"b{i}" for i in range(d)]
    entries = [f"{j}{i}" for j in range(k) for i in range(k)]
    header = coords + ["k"] + [f"re_A{e}" for e in entries] + [f"im_A{e}" for e in entries]
    return _csv_text(header, rows), {"rows": len(rows), "patches": sorted(set(patches))}


def _track_csv(model, path, branch, tol) -> tuple[str, dict]:
    track = track_branch(model, path, branch, gap_tol=tol.get("gap_tol"))
    header = ["node"] + [f"b{i}" for i in range(model.param_dim)] + ["energy", "gap"]
    return _csv_text(header, track.rows()), {"rows": len(path.nodes), "min_gap": track.min_gap}


def run_scenario(scenario: dict, base_dir: Path | None = None) -> tuple[dict, dict[str, str]]:
    """Execute a validated scenario.

    Returns ``(report, csv_files)`` where ``csv_files`` maps the output kind
    to CSV text.
    """
    validate_scenario(scenario)
    start = time.perf_counter()
    model = build_model(scenario["model"], base_dir)
    branch = model.branch(scenario["branch"]).label
    path = build_path(scenario["path"], model.param_dim)
    method = scenario.get("method", "ode")
    steps = int(scenario.get("steps", 1024))
    tol = scenario.get("tolerances", {})

    results, csvs = {}, {}
    for kind in scenario["outputs"]:
        if kind == "holonomy":
            results["holonomy"] = _holonomy_results(model, path, branch, method, steps, tol)
        elif kind == "topology":
            rep = classify_bundle(model, branch, tol.get("equator_samples", 256))
            results["topology"] = rep.to_dict()
        elif kind == "connection_csv":
            csvs[kind], results[kind] = _connection_csv(model, path, branch)
        elif kind == "track_csv":
            csvs[kind], results[kind] = _track_csv(model, path, branch, tol)
    report = {
        "scenario": scenario,
        "model": {"name": model.name, "params": model.params, "branch": branch},
        "results": results,
        "versions": versions(),
        "timing": {"seconds": round(time.perf_counter() - start, 6)},
    }
    return _finite(report), csvs


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
