"""File I/O for reports, time series and lattice fields.

Reports are JSON, time series are CSV, lattice fields are a flat little-endian
float64 binary with a JSON header next to it.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from app.core.errors import ConfigError
from app.core.logger import logger


FIELD_DTYPE = "<f8"


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def dumps_json(payload: Any) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True)


def write_json(path: Path | str, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(payload) + "\n", encoding="utf-8")
    logger.debug(f"json written path={path}")
    return path


def read_json(path: Path | str) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def format_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(header, rows), encoding="utf-8")
    logger.debug(f"csv written path={path}")
    return path


def read_csv(path: Path | str) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return [], []
    return rows[0], rows[1:]


def write_field(
    path: Path | str,
    data: np.ndarray,
    spacing: Sequence[float],
    origin: Sequence[float],
    extra: dict[str, Any] | None = None,
) -> tuple[Path, Path]:
    """Write a lattice field as raw float64 plus a JSON header.

    Complex data is stored interleaved (re, im); the header records the
    spatial dims, the per-site component count and whether the data is complex.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    array = np.asarray(data)
    is_complex = np.iscomplexobj(array)
    spatial = list(array.shape[: len(spacing)])
    components = int(np.prod(array.shape[len(spacing):], dtype=int)) if array.ndim > len(spacing) else 1

    flat = array.reshape(-1)
    raw = np.column_stack([flat.real, flat.imag]).reshape(-1) if is_complex else flat.astype(float)
    raw.astype(FIELD_DTYPE).tofile(path)

    header = {
        "dims": spatial,
        "shape": list(array.shape),
        "spacing": [float(s) for s in spacing],
        "origin": [float(o) for o in origin],
        "components": components,
        "complex": bool(is_complex),
        "dtype": "float64-le",
    }
    if extra:
        header.update(extra)
    header_path = path.with_suffix(".json")
    write_json(header_path, header)
    logger.debug(f"field written path={path} shape={tuple(array.shape)} complex={is_complex}")
    return path, header_path


def read_field(path: Path | str) -> tuple[np.ndarray, dict[str, Any]]:
    path = Path(path)
    header = read_json(path.with_suffix(".json"))
    raw = np.fromfile(path, dtype=FIELD_DTYPE)
    shape = tuple(int(s) for s in header["shape"])
    if header.get("complex"):
        data = (raw[0::2] + 1j * raw[1::2]).reshape(shape)
    else:
        data = raw.reshape(shape)
    return data, header
