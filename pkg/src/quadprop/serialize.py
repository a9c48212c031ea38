"""Deterministic CSV/JSON writers for tables produced by the pipeline.

Numbers are written with 17 significant digits (``%.17g``) so files round-trip
exactly. Every file starts with a header block of ``# key: value`` lines (CSV)
or a ``"meta"`` object (JSON). Non-finite values are written as empty CSV
fields and as ``null`` in JSON.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classical import CausticChart
from .emp import EmpSolution
from .propagator import PropagatorValue, WavePacket

FLOAT_FMT = "%.17g"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return FLOAT_FMT % v if math.isfinite(v) else ""


def _json_value(v):
    if isinstance(v, Mapping):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        # repr is the shortest exact round-trip form
        return v if math.isfinite(v) else None
    return v


def header_lines(meta: Mapping) -> list[str]:
    lines = []
    for key, value in meta.items():
        if isinstance(value, Mapping):
            value = ", ".join(f"{k}={_scalar_text(v)}" for k, v in value.items())
        else:
            value = _scalar_text(value)
        lines.append(f"# {key}: {value}")
    return lines


def _scalar_text(v) -> str:
    if isinstance(v, (float, np.floating, int, np.integer, bool, np.bool_)):
        return format_value(v)
    return str(v)


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence], meta: Mapping | None = None) -> Path:
    path = Path(path)
    out = header_lines(meta or {})
    out.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(columns)}")
        out.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def write_json(path: str | Path, payload: Mapping, meta: Mapping | None = None) -> Path:
    path = Path(path)
    doc = {"meta": _json_value(dict(meta or {}))}
    doc.update(_json_value(dict(payload)))
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    return path


def write_table(path, columns, rows, fmt: str = "csv", meta: Mapping | None = None) -> Path:
    """Columnar table as CSV, or as JSON ``{"columns": [...], "rows": [[...]]}``."""
    if fmt == "csv":
        return write_csv(path, columns, rows, meta)
    if fmt == "json":
        return write_json(path, {"columns": list(columns), "rows": [list(r) for r in rows]}, meta)
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(path: str | Path) -> tuple[dict, list[str], np.ndarray]:
    """Inverse of :func:`write_csv`: ``(meta, columns, data)``; empty fields become ``nan``."""
    meta, columns, rows = {}, None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        elif columns is None:
            columns = line.split(",")
        elif line:
            rows.append([float(f) if f else np.nan for f in line.split(",")])
    return meta, columns or [], np.array(rows, dtype=float).reshape(len(rows), len(columns or []))


EMP_COLUMNS = ("t", "rho", "rho_dot", "tau", "tau_dot")
SCAN_COLUMNS = ("t", "modulus", "phase", "maslov_index", "at_caustic")
PACKET_COLUMNS = ("x", "re_psi", "im_psi", "abs2_psi")


def emp_rows(sol: EmpSolution, t) -> list[tuple]:
    t = np.asarray(t, dtype=float)
    y = sol.dense(t)
    td = sol.tau_dot(t)
    return [(ti, *yi, tdi) for ti, yi, tdi in zip(t, y, td)]


def write_emp_table(path, sol: EmpSolution, t, fmt: str = "csv", meta: Mapping | None = None) -> Path:
    return write_table(path, EMP_COLUMNS, emp_rows(sol, t), fmt, meta)


def scan_rows(t, values: Sequence[PropagatorValue]) -> list[tuple]:
    return [
        (ti, v.modulus, v.phase, v.maslov_index, v.at_caustic)
        for ti, v in zip(np.asarray(t, dtype=float), values)
    ]


def write_scan(path, t, values: Sequence[PropagatorValue], fmt: str = "csv", meta: Mapping | None = None) -> Path:
    return write_table(path, SCAN_COLUMNS, scan_rows(t, values), fmt, meta)


def packet_rows(psi: WavePacket) -> list[tuple]:
    a = psi.amplitudes
    return list(zip(psi.positions, a.real, a.imag, np.abs(a) ** 2))


def write_packet(path, psi: WavePacket, fmt: str = "csv", meta: Mapping | None = None) -> Path:
    meta = {**(meta or {}), "time": psi.time, "hbar": psi.hbar, "norm": psi.norm()}
    return write_table(path, PACKET_COLUMNS, packet_rows(psi), fmt, meta)


def read_packet(path) -> WavePacket:
    meta, cols, data = read_csv(path)
    idx = {c: i for i, c in enumerate(cols)}
    psi = data[:, idx["re_psi"]] + 1j * data[:, idx["im_psi"]]
    return WavePacket(data[:, idx["x"]], psi, float(meta["time"]), float(meta["hbar"]))


def write_chart(path, chart: CausticChart, meta: Mapping | None = None) -> Path:
    return write_json(path, chart.to_dict(), meta)


def read_chart(path) -> CausticChart:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return CausticChart.from_dict(doc)
