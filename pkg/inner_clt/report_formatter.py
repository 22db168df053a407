# report_formatter.py
import csv
import json
import math
from dataclasses import asdict, is_dataclass

FORMATS = ("csv", "json")


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def format_cell(value):
    """Text for one CSV cell: floats at 17 significant digits, booleans lower-case."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, complex):
        return f"{format_float(value.real)}{'+' if value.imag >= 0 else '-'}{format_float(abs(value.imag))}j"
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


def _plain(value):
    if is_dataclass(value) and not isinstance(value, type):
        return _plain(asdict(value))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, "tolist"):
        return _plain(value.tolist())
    return value


def to_json(value):
    """JSON text with insertion-ordered keys; floats use their shortest round-tripping repr."""
    return json.dumps(_plain(value), indent=2)


def write_json(path, value):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(to_json(value))
        handle.write("\n")
    return path


def write_csv(path, fields, rows):
    """Header plus one line per row; rows are dicts keyed by the header fields."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([format_cell(row.get(name)) for name in fields])
    return path


def emit(records, fmt, path, fields=None):
    """Writes records (dicts or dataclasses) as CSV or JSON with a fixed field order.

    Returns the path written; I/O errors propagate unchanged.
    """
    if fmt not in FORMATS:
        raise ValueError(f"Invalid format: {fmt}")
    rows = [asdict(r) if is_dataclass(r) else dict(r) for r in records]
    if fields is None:
        fields = list(rows[0].keys()) if rows else []
    if fmt == "csv":
        return write_csv(path, fields, rows)
    return write_json(path, [{name: row.get(name) for name in fields} for row in rows])
