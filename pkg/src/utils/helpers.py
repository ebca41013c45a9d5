"""
Helper functions for run files: vector/matrix input, CSV and JSON output
"""

import json
import os
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from utils.errors import ConfigError, DimensionError, ParseError


def format_duration(seconds: float) -> str:
    """
    Format duration in seconds to human-readable format

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted duration string
    """
    seconds = int(round(seconds))
    if seconds <= 0:
        return "0:00"

    minutes, seconds = divmod(seconds, 60)
    hours, minutes = divmod(minutes, 60)

    if hours > 0:
        return f"{hours}:{minutes:02d}:{seconds:02d}"
    else:
        return f"{minutes}:{seconds:02d}"


def _data_lines(path: str) -> Iterable:
    if not os.path.isfile(path):
        raise ConfigError(f"File not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        for line_no, line in enumerate(f, start=1):
            text = line.strip()
            # blank lines and '#' headers carry no data
            if text and not text.startswith('#'):
                yield line_no, text


def _parse_row(path: str, line_no: int, text: str) -> List[float]:
    values = []
    for cell in text.split(','):
        cell = cell.strip()
        try:
            value = float(cell)
        except ValueError:
            raise ParseError(path, line_no, f"not a number: '{cell}'")
        if not np.isfinite(value):
            raise ParseError(path, line_no, f"non-finite value: '{cell}'")
        values.append(value)
    return values


def read_vector(path: str) -> np.ndarray:
    """
    Read a headerless CSV vector (one value per line, or comma separated)

    Args:
        path: File path

    Returns:
        1-D float array
    """
    values = []
    for line_no, text in _data_lines(path):
        values.extend(_parse_row(path, line_no, text))
    if not values:
        raise ParseError(path, 0, "no values")
    return np.array(values, dtype=float)


def sidecar_path(path: str) -> str:
    """Path of the JSON file holding a matrix's dimensions"""
    return f"{path}.json"


def read_matrix(path: str) -> np.ndarray:
    """
    Read a headerless row-major CSV matrix whose dimensions are in <path>.json

    Args:
        path: File path

    Returns:
        2-D float array with {"rows": n, "cols": p} from the sidecar
    """
    dims = read_json(sidecar_path(path))
    try:
        rows, cols = int(dims['rows']), int(dims['cols'])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"{sidecar_path(path)} must hold integer 'rows' and 'cols'")

    data = []
    for line_no, text in _data_lines(path):
        row = _parse_row(path, line_no, text)
        if len(row) != cols:
            raise ParseError(path, line_no, f"expected {cols} columns, got {len(row)}")
        data.append(row)
    if len(data) != rows:
        raise DimensionError(f"{path}: expected {rows} rows, got {len(data)}")
    return np.array(data, dtype=float).reshape(rows, cols)


def read_json(path: str) -> dict:
    """
    Load a JSON object

    Args:
        path: File path

    Returns:
        Parsed dictionary
    """
    if not os.path.isfile(path):
        raise ConfigError(f"File not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(path, e.lineno, e.msg)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_vector(path: str, values: np.ndarray, header: Optional[str] = None) -> str:
    """
    Write one value per line with full double precision

    Args:
        path: Output file
        values: Vector
        header: Optional '#'-prefixed first line

    Returns:
        The path written
    """
    np.savetxt(path, np.asarray(values, dtype=float).ravel(), fmt='%.17g',
               header=header or '', comments='# ' if header else '')
    return path


def write_matrix(path: str, matrix: np.ndarray) -> str:
    """Write a row-major CSV matrix plus its dimension sidecar"""
    matrix = np.asarray(matrix, dtype=float)
    np.savetxt(path, matrix, fmt='%.17g', delimiter=',')
    write_json(sidecar_path(path), {'rows': matrix.shape[0], 'cols': matrix.shape[1]})
    return path


def write_frame(path: str, frame: pd.DataFrame) -> str:
    frame.to_csv(path, index=False)
    return path


def _to_builtin(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(path: str, data: dict) -> str:
    """Write a dictionary as indented JSON (numpy values converted)"""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, default=_to_builtin)
        f.write('\n')
    return path
