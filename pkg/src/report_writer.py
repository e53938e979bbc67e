"""Deterministic report, body and coefficient files."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .body import ConvexBody, apply_linear, ball, ellipsoid
from .bp_experiments import radon_curve_build
from .errors import UsageError
from .harmonics import HarmonicCoeffs, index_of
from .logger import ExperimentLogger
from .path_manager import PathManager
from .sphere_core import SphericalGrid


def format_float(value: float) -> str:
    """17 significant digits; non-finite values have no JSON spelling and become null"""
    if not math.isfinite(value):
        return "null"
    return format(value, ".17g")


def dumps(payload: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with sorted keys and 17-significant-digit floats."""
    pad = " " * (indent * (_level + 1))
    close = " " * (indent * _level)
    if isinstance(payload, dict):
        if not payload:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
            for k, v in sorted(payload.items(), key=lambda kv: str(kv[0]))
        ]
        return "{\n" + ",\n".join(items) + f"\n{close}}}"
    if isinstance(payload, list | tuple | np.ndarray):
        if len(payload) == 0:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in payload]
        return "[\n" + ",\n".join(items) + f"\n{close}]"
    if isinstance(payload, bool | np.bool_):
        return "true" if payload else "false"
    if isinstance(payload, int | np.integer):
        return str(int(payload))
    if isinstance(payload, float | np.floating):
        return format_float(float(payload))
    if payload is None:
        return "null"
    return json.dumps(str(payload), ensure_ascii=False)


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float | np.floating):
        return format(float(value), ".17g")
    return str(value)


class ReportWriter:
    """Writes report files into the output tree and logs every write"""

    def __init__(self, paths: PathManager, logger: ExperimentLogger):
        self.paths = paths
        self.logger = logger

    def _write(self, name: str, kind: str, content: str, operation: str) -> dict[str, Any]:
        try:
            resolved_path = self.paths.resolve(name, kind)
            resolved_path.parent.mkdir(parents=True, exist_ok=True)
            with open(resolved_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(content)

            result = {
                "path": str(resolved_path),
                "size": resolved_path.stat().st_size,
                "lines": len(content.splitlines()),
            }
            self.logger.log_operation(
                operation,
                {"name": name, "kind": kind, "relative_path": self.paths.get_relative_path(resolved_path)},
                result,
            )
            return result

        except Exception as e:
            self.logger.log_operation(operation, {"name": name, "kind": kind}, error=str(e))
            raise

    def write_json(self, name: str, payload: Any, kind: str = "reports") -> dict[str, Any]:
        return self._write(name, kind, dumps(payload) + "\n", "write_json")

    def write_csv(
        self, name: str, header: list[str], rows: list[list[Any]], kind: str = "reports"
    ) -> dict[str, Any]:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])
        return self._write(name, kind, buffer.getvalue(), "write_csv")


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


def load_json(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise UsageError(f"File {path} not found") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"File {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise UsageError(f"File {path} must hold a JSON object")
    return data


def coeffs_to_record(coeffs: HarmonicCoeffs, key: str = "coeffs") -> dict[str, Any]:
    """Nonzero coefficients as (m, k, value) triples"""
    nonzero = np.flatnonzero(coeffs.values)
    return {
        "dim_n": coeffs.dim_n,
        "band_limit": coeffs.band_limit,
        key: [
            [int(coeffs.degrees[i]), int(coeffs.orders[i]), float(coeffs.values[i])] for i in nonzero
        ],
    }


def coeffs_from_record(record: dict[str, Any], key: str = "coeffs") -> HarmonicCoeffs:
    try:
        dim_n = int(record["dim_n"])
        band_limit = int(record["band_limit"])
        coeffs = HarmonicCoeffs.zeros(dim_n, band_limit)
        values = coeffs.values.copy()
        for m, k, value in record.get(key, []):
            if int(m) > band_limit:
                raise UsageError(f"coefficient degree {m} exceeds band limit {band_limit}")
            values[index_of(dim_n, int(m), int(k))] = float(value)
    except UsageError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise UsageError(f"malformed coefficient record: {e}") from e
    return HarmonicCoeffs(dim_n, band_limit, values)


def body_to_record(body: ConvexBody, matrix: np.ndarray | None = None) -> dict[str, Any]:
    record = coeffs_to_record(body.radial_coeffs, key="radial_coeffs")
    record["label"] = body.label
    if matrix is not None:
        record["matrix"] = np.asarray(matrix, dtype=float).tolist()
    return record


def body_from_record(record: dict[str, Any], grid: SphericalGrid) -> ConvexBody:
    """
    Rebuild a body on ``grid``.

    A "matrix" field gives the exact ellipsoid M·B, "radon_arc" the exact
    Radon curve, "radius" the exact ball; otherwise the radial coefficients
    are synthesized.
    """
    if int(record.get("dim_n", grid.dim_n)) != grid.dim_n:
        raise UsageError(f"body dimension {record.get('dim_n')} does not match n={grid.dim_n}")
    band_limit = int(record.get("band_limit", grid.max_band_limit))
    label = str(record.get("label", ""))
    if band_limit > grid.max_band_limit:
        raise UsageError(
            f"aliasing risk: body band limit {band_limit} exceeds {grid.max_band_limit}"
        )
    if "matrix" in record:
        return ellipsoid(grid, band_limit, matrix=np.asarray(record["matrix"], dtype=float))
    if "radius" in record:
        return ball(grid, band_limit, float(record["radius"]))
    if "radon_arc" in record:
        return radon_curve_build(grid, record["radon_arc"], band_limit)
    if "transform" in record and "base" in record:
        base = body_from_record(record["base"], grid)
        return apply_linear(base, np.asarray(record["transform"], dtype=float), band_limit)
    coeffs = coeffs_from_record(record, key="radial_coeffs")
    return ConvexBody.from_coeffs(grid, coeffs, label=label)
