"""Deterministic JSON and CSV writers.

Floats are always written with 17 significant digits so that output files
round-trip exactly and are byte-identical between runs.  Non-finite floats
become ``null`` in JSON and ``nan``/``inf`` in CSV.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

SCHEMA_PREFIX = "holocircles"


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _scalar(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value) if math.isfinite(value) else "null"
    if isinstance(value, (complex, np.complexfloating)):
        return "[%s, %s]" % (_scalar(value.real), _scalar(value.imag))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _emit(value, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}"
                 for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        if len(value) == 0:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in value):
            return "[" + ", ".join(_scalar(v) for v in value) + "]"
        items = [pad + _emit(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar(value)


def dumps(payload: dict, schema: str, indent: int = 2) -> str:
    """Serialize ``payload`` with a ``schema`` key on the header line.

    The first line of the result is ``{"schema": "holocircles.<schema>",``
    so the format version can be read without parsing the whole document.
    """
    body = {"schema": f"{SCHEMA_PREFIX}.{schema}"}
    body.update(payload)
    text = _emit(body, indent, 0)
    # pull the schema key up onto the opening line
    first, rest = text.split("\n", 1)
    return first + rest.lstrip(" ") + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()
