"""Deterministic CSV/JSON serialization.

Floats are rendered with 17 significant digits and keys sorted, so identical
inputs re-serialize byte-identically; JSON summaries carry a schema_version
field starting at "1".
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dmatrix import Channel, NaturalOrbitalEnsemble
from .grid import RadialGrid, build_log_grid

SCHEMA_VERSION = "1"


def format_float(x: float) -> str:
    if isinstance(x, float) and (x != x):  # NaN
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def dumps_canonical(obj, indent: int = 0) -> str:
    """JSON with fixed float formatting and sorted keys."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj, key=str):
            items.append(
                f'{pad}  {json.dumps(str(key))}: {dumps_canonical(obj[key], indent + 1)}'
            )
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            return "[" + ", ".join(_scalar(v) for v in seq) + "]"
        items = [f"{pad}  {dumps_canonical(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _scalar(obj)


def _scalar(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return json.dumps(str(v))


def write_json(path, obj) -> None:
    payload = dict(obj)
    payload.setdefault("schema_version", SCHEMA_VERSION)
    Path(path).write_text(dumps_canonical(payload) + "\n")


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                format_float(v) if isinstance(v, (float, np.floating)) else str(v)
                for v in row
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv_columns(path) -> dict:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    cols = {h: [] for h in header}
    for line in lines[1:]:
        for h, val in zip(header, line.split(",")):
            try:
                cols[h].append(float(val))
            except ValueError:
                cols[h].append(val)
    return {h: np.array(v) if v and isinstance(v[0], float) else v for h, v in cols.items()}


# ---------------------------------------------------------------------------
# domain objects


def grid_to_json(grid: RadialGrid) -> dict:
    return {"r_min": grid.r_min, "r_max": grid.r_max, "n_points": grid.n_points}


def grid_from_json(payload: dict) -> RadialGrid:
    return build_log_grid(payload["r_min"], payload["r_max"], int(payload["n_points"]))


def ensemble_to_json(ens: NaturalOrbitalEnsemble) -> dict:
    return {
        "grid": grid_to_json(ens.grid),
        "channels": [
            {
                "ell": ch.ell,
                "orbitals": [
                    {"occupation": float(n), "u": list(map(float, u))}
                    for n, u in zip(ch.occupations, ch.orbitals)
                ],
            }
            for ch in ens.channels
        ],
    }


def ensemble_from_json(payload: dict) -> NaturalOrbitalEnsemble:
    grid = grid_from_json(payload["grid"])
    channels = []
    for ch in payload["channels"]:
        orbs = ch["orbitals"]
        channels.append(
            Channel(
                ell=int(ch["ell"]),
                occupations=np.array([o["occupation"] for o in orbs]),
                orbitals=np.array([o["u"] for o in orbs])
                if orbs
                else np.zeros((0, grid.n_points)),
            )
        )
    return NaturalOrbitalEnsemble(grid=grid, channels=channels)


def write_density_csv(path, grid: RadialGrid, rho_values) -> None:
    write_csv(path, ["r", "rho"], zip(grid.nodes.tolist(), map(float, rho_values)))


def write_tf_csv(path, sol) -> None:
    grid = sol.rho.grid
    write_csv(
        path,
        ["r", "rho", "phi"],
        zip(grid.nodes.tolist(), sol.rho.values.tolist(), sol.phi.values.tolist()),
    )
