"""Deterministic report serialization and spectrum file I/O.

Floats are written as 17-significant-digit strings so reports are
byte-identical across platforms; infinities become ``"+infinity"``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from pathlib import Path

import numpy as np

from .channels import ChannelSpec
from .errors import DomainError
from .norms import NormReport

INFINITY = "+infinity"


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return INFINITY if x > 0 else "-infinity"
    return format(x, ".17g")


def to_jsonable(obj):
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return bool(obj) if isinstance(obj, np.bool_) else obj
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, ChannelSpec):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, NormReport):
        return to_jsonable(norm_report_dict(obj))
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return to_jsonable({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def norm_report_dict(r: NormReport, timing: bool = False) -> dict:
    return {
        "channel": r.channel.to_dict(),
        "p": r.p,
        "q": r.q,
        "method": r.method,
        "z_star": r.z_star,
        "value": r.value,
        "residuals": r.residuals,
        "runtime_ms": r.runtime_ms if timing else 0,
    }


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2) + "\n"


def flatten(obj, prefix: str = "") -> list[tuple[str, str]]:
    """key,value rows for CSV output; nested keys joined with dots, list items by index."""
    data = to_jsonable(obj)
    rows: list[tuple[str, str]] = []

    def walk(v, key):
        if isinstance(v, dict):
            for k, w in v.items():
                walk(w, f"{key}.{k}" if key else k)
        elif isinstance(v, list):
            for i, w in enumerate(v):
                walk(w, f"{key}.{i}" if key else str(i))
        else:
            rows.append((key, "" if v is None else str(v).lower() if isinstance(v, bool) else v))

    walk(data, prefix)
    return rows


def dumps_csv(obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    w.writerows(flatten(obj))
    return buf.getvalue()


def spectrum_csv(x) -> str:
    return "".join(fmt_float(float(v)) + "\n" for v in np.asarray(x, dtype=np.float64))


def parse_spectrum(text: str, fmt: str) -> np.ndarray:
    """Parse a JSON array or one-number-per-line CSV; blank lines and '#' comments are skipped."""
    try:
        if fmt == "json":
            vals = json.loads(text)
            if not isinstance(vals, list):
                raise DomainError("JSON spectrum must be an array")
            return np.array([float(v) for v in vals], dtype=np.float64)
        vals = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip().rstrip(",")
            if line:
                vals.append(float(line))
        return np.array(vals, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise DomainError(f"malformed spectrum: {exc}") from exc


def read_spectrum(path) -> np.ndarray:
    path = Path(path)
    text = path.read_text()
    fmt = "json" if path.suffix.lower() == ".json" or text.lstrip().startswith("[") else "csv"
    return parse_spectrum(text, fmt)
