"""File ingestion and export.

Series: single-column CSV, optional header row. Images: plain CSV matrices.
Manifests: CSV with a header naming x,y[,control...] or a,b[,control...] columns,
paths relative to the manifest. Outputs are written atomically (temporary file in
the target directory, then rename), UTF-8 with LF line endings. CSV floats carry 17
significant digits; JSON floats use the shortest repr that reads back to the same
double.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from logutils import get_logger
from src.errors import InputFormatError, ManifestError

logger = get_logger(__name__)

SCHEMA_VERSION = "1.0"
FLOAT_FORMAT = "%.17g"

_PAIR_COLUMNS = (("x", "y"), ("a", "b"))


def _read_numeric_frame(path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except FileNotFoundError:
        raise
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as error:
        raise InputFormatError(f"Cannot parse {path}: {error}") from error

    frame = frame.apply(lambda column: column.str.strip())
    first_row = pd.to_numeric(frame.iloc[0], errors="coerce")
    if first_row.isna().any():
        logger.debug("Dropping header row of %s", path)
        frame = frame.iloc[1:]
    if frame.empty:
        raise InputFormatError(f"{path} holds no numeric rows")

    try:
        numeric = frame.apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError) as error:
        raise InputFormatError(f"Non-numeric value in {path}: {error}") from error
    if numeric.isna().any().any():
        raise InputFormatError(f"Missing values in {path}")
    if not np.isfinite(numeric.to_numpy(dtype=float)).all():
        raise InputFormatError(f"Non-finite values in {path}")
    return numeric


def read_series(path) -> np.ndarray:
    """Reads a single-column numeric series.

    Raises:
        InputFormatError: On several columns, non-numeric or missing values.
    """
    frame = _read_numeric_frame(path)
    if frame.shape[1] != 1:
        raise InputFormatError(
            f"{path} must hold a single column (got {frame.shape[1]})"
        )
    return frame.iloc[:, 0].to_numpy(dtype=float)


def read_matrix(path) -> np.ndarray:
    """Reads a comma-separated numeric matrix."""
    return _read_numeric_frame(path).to_numpy(dtype=float)


def read_manifest(path) -> List[Dict]:
    """Reads an averaging manifest.

    Returns:
        list: One record per row: {"x": Path, "y": Path, "controls": [Path, ...],
            "control_names": [str, ...]}.

    Raises:
        ManifestError: On missing columns or an empty manifest.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, skip_blank_lines=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise ManifestError(f"Cannot parse manifest {path}: {error}") from error

    frame.columns = [str(column).strip().lower() for column in frame.columns]
    pair = next(
        (columns for columns in _PAIR_COLUMNS if set(columns) <= set(frame.columns)),
        None,
    )
    if pair is None:
        raise ManifestError(
            f"Manifest {path} needs columns x,y or a,b (got {list(frame.columns)})"
        )
    if frame.empty:
        raise ManifestError(f"Manifest {path} lists no records")

    control_columns = [column for column in frame.columns if column not in pair]
    base = path.parent
    records = []
    for index, row in frame.iterrows():
        missing = [column for column in frame.columns if pd.isna(row[column])]
        if missing:
            raise ManifestError(f"Manifest {path} row {index + 1} misses {missing}")
        records.append(
            {
                "x": base / row[pair[0]].strip(),
                "y": base / row[pair[1]].strip(),
                "controls": [base / row[column].strip() for column in control_columns],
                "control_names": control_columns,
            }
        )
    logger.debug("Manifest %s: %d records", path, len(records))
    return records


def atomic_write(path, text: str) -> Path:
    """Writes text to path through a temporary file and a rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w",
        encoding="utf-8",
        newline="\n",
        dir=directory,
        prefix=f".{path.name}.",
        suffix=".tmp",
        delete=False,
    )
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, path)
    except BaseException:
        if os.path.exists(handle.name):
            os.unlink(handle.name)
        raise
    return path


def _jsonable(value):
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path, payload: Dict, schema: str) -> Path:
    """Writes a JSON document tagged with its schema name and version.

    Python floats serialize with their shortest round-tripping repr; NaN and
    infinities are rejected.
    """
    document = {"schema": schema, "schema_version": SCHEMA_VERSION}
    document.update(_jsonable(payload))
    text = json.dumps(document, indent=2, allow_nan=False) + "\n"
    return atomic_write(path, text)


def table_to_csv(rows: Sequence[Dict], columns: Sequence[str]) -> str:
    frame = pd.DataFrame(list(rows), columns=list(columns))
    return frame.to_csv(
        index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n"
    )


def write_table(path, rows: Sequence[Dict], columns: Sequence[str]) -> Path:
    """Writes rows as a CSV table with a fixed header."""
    return atomic_write(path, table_to_csv(rows, columns))


def write_series(path, values, header: str) -> Path:
    """Writes a series as a single-column CSV with a header row."""
    values = np.asarray(values, dtype=float).ravel()
    return write_table(path, [{header: value} for value in values], [header])


def write_matrix(path, matrix) -> Path:
    """Writes a matrix as a header-less CSV."""
    frame = pd.DataFrame(np.asarray(matrix, dtype=float))
    text = frame.to_csv(
        index=False, header=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return atomic_write(path, text)
