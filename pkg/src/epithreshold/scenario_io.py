"""Scenario files, CSV formats, and the JSON run report.

Scenario files are TOML with sections [domain], [coefficients], [initial] and
an optional [numerics]; coefficient specs are inline tables tagged by ``kind``
(constant | cosine | gauss_bump | table).  Unknown sections or keys are
rejected rather than ignored.  All floating-point output is printed with 17
significant digits so that repeated runs with identical configuration produce
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import sys
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .errors import InvalidConfigError
from .grids import (
    CoefficientSpec,
    Numerics,
    ScalarField,
    Scenario,
    ScenarioSpec,
    Table,
    spec_from_dict,
)
from .pde import TRACE_COLUMNS, Trace

__all__ = [
    "parse_scenario",
    "parse_scenario_spec",
    "serialize_scenario",
    "scenario_hash",
    "read_table_csv",
    "write_field_csv",
    "write_trace_csv",
    "write_ode_csv",
    "write_comparison_csv",
    "write_sweep_csv",
    "make_report",
    "render_report",
    "REPORT_SCHEMA_VERSION",
]

REPORT_SCHEMA_VERSION = 1

_REPORT_KEYS = (
    "schema_version",
    "scenario_hash",
    "lambda1",
    "classification",
    "averaged_r0",
    "averaged_classification",
    "d_star",
    "s_infinity",
    "s_infinity_averaged",
    "epsilon_empirical",
    "trace_path",
    "field_paths",
    "timings",
)

_SECTIONS = ("domain", "coefficients", "initial", "numerics")
_DOMAIN_KEYS = {"dim", "length", "lengths", "cells"}
_COEFF_KEYS = ("alpha", "mu", "d_S", "d_I")
_INITIAL_KEYS = ("S0", "I0")
_NUMERICS_KEYS = {
    "dt": "dt",
    "t_max": "t_max",
    "tol_I": "tol_i",
    "tol_S": "tol_s",
    "eigen_tol": "eigen_tol",
    "eigen_max_iter": "eigen_max_iter",
    "ellipticity_floor": "ellipticity_floor",
}


def fmt(x: float) -> str:
    """Canonical 17-significant-digit rendering of a float."""
    return f"{float(x):.17g}"


# ---------------------------------------------------------------------------
# Table CSV
# ---------------------------------------------------------------------------


def read_table_csv(path: str) -> Table:
    """Load a tabulated field: header ``x,value`` or ``x,y,value`` (row-major by y)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise InvalidConfigError(f"table file {path} is empty") from None
        rows = [row for row in reader if row]
    if header == ["x", "value"]:
        dim = 1
    elif header == ["x", "y", "value"]:
        dim = 2
    else:
        raise InvalidConfigError(
            f"table file {path} must start with 'x,value' or 'x,y,value', got {header}"
        )
    try:
        data = np.asarray([[float(c) for c in row] for row in rows])
    except ValueError as exc:
        raise InvalidConfigError(f"non-numeric entry in table file {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != dim + 1:
        raise InvalidConfigError(f"table file {path} has malformed rows")

    if dim == 1:
        order = np.argsort(data[:, 0], kind="stable")
        data = data[order]
        return Table(coords=(data[:, 0],), values=data[:, 1])

    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if len(xs) * len(ys) != len(data):
        raise InvalidConfigError(
            f"table file {path} is not a full grid: {len(xs)}x{len(ys)} "
            f"coordinates but {len(data)} rows"
        )
    expected_x = np.tile(xs, len(ys))
    expected_y = np.repeat(ys, len(xs))
    if not (np.array_equal(data[:, 0], expected_x) and np.array_equal(data[:, 1], expected_y)):
        raise InvalidConfigError(f"table file {path} must be row-major by y then x")
    return Table(coords=(xs, ys), values=data[:, 2])


def write_field_csv(path: str, field: ScalarField) -> None:
    grid = field.grid
    coords = grid.centers()
    with open(path, "w", newline="") as fh:
        if grid.dim == 1:
            fh.write("x,value\n")
            for x, v in zip(coords[0], field.values):
                fh.write(f"{fmt(x)},{fmt(v)}\n")
        else:
            fh.write("x,y,value\n")
            for x, y, v in zip(coords[0], coords[1], field.values):
                fh.write(f"{fmt(x)},{fmt(y)},{fmt(v)}\n")


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------


def _reject_unknown(mapping: dict, allowed, where: str) -> None:
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise InvalidConfigError(f"unknown key {unknown[0]!r} in {where}")


def _coeff_spec(value: Any, key: str, base_dir: str) -> CoefficientSpec:
    if not isinstance(value, dict):
        raise InvalidConfigError(
            f"{key} must be a table like {{ kind = \"constant\", value = 1.0 }}"
        )
    value = dict(value)
    if value.get("kind") == "table":
        _reject_unknown(value, {"kind", "path", "x", "y", "values"}, key)
        if "path" in value:
            path = value["path"]
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            if not os.path.exists(path):
                raise InvalidConfigError(f"{key}: table path {value['path']!r} not found")
            return read_table_csv(path)
        try:
            coords = (value["x"],) if "y" not in value else (value["x"], value["y"])
            return Table(coords=coords, values=value["values"])
        except KeyError as exc:
            raise InvalidConfigError(f"{key}: inline table needs x (and y) plus values") from exc
    try:
        return spec_from_dict(value)
    except InvalidConfigError as exc:
        raise InvalidConfigError(f"{key}: {exc}") from exc


def _coeff_spec_list(value: Any, key: str, base_dir: str) -> tuple[CoefficientSpec, ...]:
    if isinstance(value, list):
        if not value:
            raise InvalidConfigError(f"{key} must not be an empty list")
        return tuple(_coeff_spec(v, key, base_dir) for v in value)
    return (_coeff_spec(value, key, base_dir),)


def parse_scenario_spec(path: str) -> ScenarioSpec:
    """Parse and validate a scenario file into its declarative form."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise InvalidConfigError(f"scenario file {path} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise InvalidConfigError(f"scenario file {path} is not valid TOML: {exc}") from exc
    base_dir = os.path.dirname(os.path.abspath(path))

    _reject_unknown(doc, _SECTIONS, "scenario file")
    for section in ("domain", "coefficients", "initial"):
        if section not in doc:
            raise InvalidConfigError(f"missing [{section}] section")

    domain = doc["domain"]
    _reject_unknown(domain, _DOMAIN_KEYS, "[domain]")
    if "lengths" in domain and "length" in domain:
        raise InvalidConfigError("[domain] must give either length or lengths, not both")
    if "lengths" in domain:
        lengths = tuple(float(v) for v in domain["lengths"])
    elif "length" in domain:
        lengths = (float(domain["length"]),)
    else:
        raise InvalidConfigError("[domain] needs length or lengths")
    if "cells" not in domain:
        raise InvalidConfigError("[domain] needs cells")
    cells_raw = domain["cells"]
    cells = (
        tuple(int(v) for v in cells_raw)
        if isinstance(cells_raw, list)
        else (int(cells_raw),) * len(lengths)
    )
    if "dim" in domain and int(domain["dim"]) != len(lengths):
        raise InvalidConfigError(
            f"[domain] dim={domain['dim']} contradicts {len(lengths)} length(s)"
        )
    if len(cells) != len(lengths):
        raise InvalidConfigError("[domain] cells and lengths disagree on the dimension")

    coeffs = doc["coefficients"]
    _reject_unknown(coeffs, _COEFF_KEYS, "[coefficients]")
    for key in _COEFF_KEYS:
        if key not in coeffs:
            raise InvalidConfigError(f"missing key {key!r} in [coefficients]")
    initial = doc["initial"]
    _reject_unknown(initial, _INITIAL_KEYS, "[initial]")
    for key in _INITIAL_KEYS:
        if key not in initial:
            raise InvalidConfigError(f"missing key {key!r} in [initial]")

    numerics_doc = doc.get("numerics", {})
    _reject_unknown(numerics_doc, _NUMERICS_KEYS, "[numerics]")
    numerics_kwargs = {
        _NUMERICS_KEYS[k]: (int(v) if k == "eigen_max_iter" else float(v))
        for k, v in numerics_doc.items()
    }

    return ScenarioSpec(
        lengths=lengths,
        cells=cells,
        alpha=_coeff_spec(coeffs["alpha"], "alpha", base_dir),
        mu=_coeff_spec(coeffs["mu"], "mu", base_dir),
        s0=_coeff_spec(initial["S0"], "S0", base_dir),
        i0=_coeff_spec(initial["I0"], "I0", base_dir),
        d_s=_coeff_spec_list(coeffs["d_S"], "d_S", base_dir),
        d_i=_coeff_spec_list(coeffs["d_I"], "d_I", base_dir),
        numerics=Numerics(**numerics_kwargs),
    )


def parse_scenario(path: str, cells: int | None = None) -> Scenario:
    """Parse a scenario file and sample it onto its grid.

    ``cells`` overrides the per-axis resolution (the CLI's --grid-n).
    """
    spec = parse_scenario_spec(path)
    if cells is not None:
        spec = spec.with_cells(cells)
    return spec.realize()


def _toml_value(v: Any) -> str:
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        out = fmt(v)
        # a bare integer rendering would change the TOML type on re-parse
        if "." not in out and "e" not in out and "E" not in out:
            out += ".0"
        return out
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise InvalidConfigError(f"cannot serialize value {v!r}")


def _toml_inline_spec(spec: CoefficientSpec) -> str:
    d = spec.to_dict()
    if d["kind"] == "table":
        items = {"kind": "table", "x": d["coords"][0]}
        if len(d["coords"]) == 2:
            items["y"] = d["coords"][1]
        items["values"] = d["values"]
    else:
        items = d
    body = ", ".join(f"{k} = {_toml_value(v)}" for k, v in items.items())
    return "{ " + body + " }"


def serialize_scenario(spec: ScenarioSpec | Scenario) -> str:
    """Render a scenario back to canonical TOML text (re-parses to an equal spec)."""
    if isinstance(spec, Scenario):
        if spec.spec is None:
            raise InvalidConfigError("scenario was built programmatically without a spec")
        spec = spec.spec
    lines = ["[domain]"]
    if len(spec.lengths) == 1:
        lines.append(f"length = {_toml_value(float(spec.lengths[0]))}")
        lines.append(f"cells = {spec.cells[0]}")
    else:
        lines.append(f"lengths = {_toml_value([float(v) for v in spec.lengths])}")
        lines.append(f"cells = {_toml_value(list(spec.cells))}")
    lines.append("")
    lines.append("[coefficients]")
    lines.append(f"alpha = {_toml_inline_spec(spec.alpha)}")
    lines.append(f"mu = {_toml_inline_spec(spec.mu)}")
    for key, specs in (("d_S", spec.d_s), ("d_I", spec.d_i)):
        if len(specs) == 1:
            lines.append(f"{key} = {_toml_inline_spec(specs[0])}")
        else:
            lines.append(f"{key} = [" + ", ".join(_toml_inline_spec(s) for s in specs) + "]")
    lines.append("")
    lines.append("[initial]")
    lines.append(f"S0 = {_toml_inline_spec(spec.s0)}")
    lines.append(f"I0 = {_toml_inline_spec(spec.i0)}")
    lines.append("")
    lines.append("[numerics]")
    num = spec.numerics
    if num.dt is not None:
        lines.append(f"dt = {_toml_value(float(num.dt))}")
    lines.append(f"t_max = {_toml_value(float(num.t_max))}")
    lines.append(f"tol_I = {_toml_value(float(num.tol_i))}")
    lines.append(f"tol_S = {_toml_value(float(num.tol_s))}")
    lines.append(f"eigen_tol = {_toml_value(float(num.eigen_tol))}")
    lines.append(f"eigen_max_iter = {num.eigen_max_iter}")
    lines.append(f"ellipticity_floor = {_toml_value(float(num.ellipticity_floor))}")
    return "\n".join(lines) + "\n"


def scenario_hash(spec: ScenarioSpec | Scenario) -> str:
    """Stable hash of the declarative scenario content."""
    if isinstance(spec, Scenario):
        if spec.spec is None:
            raise InvalidConfigError("scenario was built programmatically without a spec")
        spec = spec.spec
    canonical = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Result CSVs and the JSON report
# ---------------------------------------------------------------------------


def write_trace_csv(path: str, trace: Trace) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for row in trace.rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_ode_csv(path: str, run) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,S,I\n")
        for t, s, i in zip(run.times, run.s, run.i):
            fh.write(f"{fmt(t)},{fmt(s)},{fmt(i)}\n")


def write_comparison_csv(path: str, report) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(
            "i0_scale,s_infinity_pde,s_infinity_averaged,"
            "s_infinity_averaged_exact,gap,loss,termination\n"
        )
        for r in report.rows:
            fh.write(
                f"{fmt(r.i0_scale)},{fmt(r.s_infinity_pde)},{fmt(r.s_infinity_averaged)},"
                f"{fmt(r.s_infinity_averaged_exact)},{fmt(r.gap)},{fmt(r.loss)},{r.termination}\n"
            )


def write_sweep_csv(path: str, sweep) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"{sweep.axis},lambda1\n")
        for v, lam in zip(sweep.values, sweep.eigenvalues):
            fh.write(f"{fmt(v)},{fmt(lam)}\n")


def make_report(**fields) -> dict:
    """Run report with the full key set; unset keys become null."""
    unknown = sorted(set(fields) - set(_REPORT_KEYS))
    if unknown:
        raise InvalidConfigError(f"unknown report key {unknown[0]!r}")
    report = {key: None for key in _REPORT_KEYS}
    report["schema_version"] = REPORT_SCHEMA_VERSION
    report.update(fields)
    return report


def _render_json(value: Any, indent: int) -> str:
    pad = "  " * indent
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return "null"
        return fmt(value)
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        inner = ",\n".join(pad + "  " + _render_json(v, indent + 1) for v in value)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        inner = ",\n".join(
            pad + "  " + json.dumps(str(k)) + ": " + _render_json(v, indent + 1)
            for k, v in value.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise InvalidConfigError(f"cannot render report value {value!r}")


def render_report(report: dict) -> str:
    """Render the run report as a UTF-8, newline-terminated JSON document.

    Floats are printed with 17 significant digits and non-finite values become
    null, so identical configurations yield byte-identical reports.
    """
    return _render_json(report, 0) + "\n"
