"""Text formats: parameter JSON, angle CSV with a JSON sidecar, and tables."""

from __future__ import annotations

import csv
import io as _io
import json
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .core import EwcParams
from .sphere import SphereParams

PathLike = Union[str, Path]


class ParamsError(ValueError):
    pass


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _load_json(path: PathLike) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParamsError(f"{path}: {e.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParamsError(f"{path}:{e.lineno}: invalid JSON ({e.msg})") from None
    if not isinstance(obj, dict):
        raise ParamsError(f"{path}:1: expected a JSON object")
    return obj


def read_params(path: PathLike) -> EwcParams:
    obj = _load_json(path)
    try:
        return EwcParams.from_dict(obj)
    except (TypeError, ValueError) as e:
        raise ParamsError(f"{path}: {e}") from None


def read_sphere_params(path: PathLike) -> SphereParams:
    obj = _load_json(path)
    try:
        return SphereParams.from_dict(obj)
    except (TypeError, ValueError) as e:
        raise ParamsError(f"{path}: {e}") from None


def params_json(p: Union[EwcParams, SphereParams]) -> str:
    return dumps(p.to_dict())


def write_params(path: PathLike, p) -> None:
    Path(path).write_text(params_json(p))


def _encode(obj, indent: int) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [inner + _encode(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan; emit them as strings
        return fmt(v) if np.isfinite(v) else json.dumps(str(v))
    return json.dumps(obj)


def dumps(obj) -> str:
    """Indented JSON with floats at 17 significant digits."""
    return _encode(obj, 0) + "\n"


def table_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) else v for v in r])
    return buf.getvalue()


def table_json(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return dumps([dict(zip(header, r)) for r in rows])


def emit(text: str, out: Optional[PathLike] = None) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def write_angles(angles, meta: dict, out: Optional[PathLike] = None) -> None:
    """``theta`` CSV plus a ``<out>.json`` sidecar (sidecar skipped on stdout)."""
    emit(table_csv(["theta"], ([a] for a in np.asarray(angles))), out)
    if out is not None and str(out) != "-":
        Path(str(out) + ".json").write_text(dumps(meta))


def write_vectors(x, meta: dict, out: Optional[PathLike] = None) -> None:
    x = np.asarray(x)
    header = [f"x{i + 1}" for i in range(x.shape[1])]
    emit(table_csv(header, x.tolist()), out)
    if out is not None and str(out) != "-":
        Path(str(out) + ".json").write_text(dumps(meta))
