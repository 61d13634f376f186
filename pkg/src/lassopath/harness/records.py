"""JSON record format for instances, paths, and run results.

Scalars are stored as hexadecimal strings so extended-precision values
round-trip exactly: float64 values use ``float.hex`` and 113-bit values use
``[-]0x<integer mantissa>p<binary exponent>``.  Both forms are accepted by
``float.fromhex``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import gmpy2
import numpy as np

from ..homotopy import PathSegment, RegularizationPath
from ..precision import Precision, extended_context, mode_of
from ..problem import ProblemInstance

SCHEMA_VERSION = 1
OUT_ENV = "LASSOPATH_OUT"


def default_out_dir():
    """Output directory from ``$LASSOPATH_OUT``, else ``./lassopath-out``."""
    return Path(os.environ.get(OUT_ENV, "lassopath-out"))


def encode_scalar(x):
    if isinstance(x, float) or not isinstance(x, type(gmpy2.mpfr(0))):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x.hex()
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0x0p+0"
    m, e = x.as_mantissa_exp()
    sign = "-" if m < 0 else ""
    return f"{sign}0x{abs(int(m)):x}p{int(e):+d}"


def decode_scalar(text, precision):
    if precision is Precision.STANDARD:
        return float.fromhex(text) if "inf" not in text else float(text)
    with extended_context():
        if "inf" in text:
            return gmpy2.mpfr(text)
        sign = -1 if text.startswith("-") else 1
        mant, exp = text.lstrip("-+")[2:].split("p")
        return sign * gmpy2.mul_2exp(gmpy2.mpfr(int(mant, 16)), int(exp))


def encode_array(a):
    return [encode_scalar(v) for v in np.asarray(a).ravel()]


def decode_array(items, precision, shape=None):
    vals = [decode_scalar(t, precision) for t in items]
    if precision is Precision.EXTENDED:
        arr = np.empty(len(vals), dtype=object)
        arr[:] = vals
    else:
        arr = np.array(vals, dtype=np.float64)
    return arr.reshape(shape) if shape is not None else arr


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, type(gmpy2.mpfr(0))):
        return float(obj)
    return obj


def instance_to_record(inst: ProblemInstance):
    mode = inst.precision
    return {
        "schema": "lassopath.instance",
        "schema_version": SCHEMA_VERSION,
        "precision": mode.value,
        "n": inst.n,
        "d": inst.d,
        "X": encode_array(inst.X),
        "y": encode_array(inst.y),
        "meta": _jsonable(inst.meta),
    }


def instance_from_record(rec):
    mode = Precision.parse(rec["precision"])
    X = decode_array(rec["X"], mode, (rec["n"], rec["d"]))
    y = decode_array(rec["y"], mode, (rec["n"],))
    return ProblemInstance(X, y, dict(rec.get("meta", {})))


def path_to_record(path: RegularizationPath):
    segs = []
    for seg in path.segments:
        segs.append({
            "lambda_hi": encode_scalar(seg.lambda_hi),
            "lambda_lo": encode_scalar(seg.lambda_lo),
            "signs": [int(s) for s in seg.sign_vector],
            "active": list(seg.active),
            "a": encode_array(seg.a),
            "b": encode_array(seg.b),
            "p": encode_array(seg.p),
            "q": encode_array(seg.q),
        })
    return {
        "schema": "lassopath.path",
        "schema_version": SCHEMA_VERSION,
        "precision": path.precision.value,
        "lambda_min": encode_scalar(path.lambda_min),
        "count": path.count,
        "segments": segs,
        "diagnostics": _jsonable(path.diagnostics),
    }


def path_from_record(rec):
    mode = Precision.parse(rec["precision"])
    segs = []
    for s in rec["segments"]:
        segs.append(PathSegment(
            lambda_hi=decode_scalar(s["lambda_hi"], mode),
            lambda_lo=decode_scalar(s["lambda_lo"], mode),
            sign_vector=np.array(s["signs"], dtype=np.int8),
            active=tuple(s["active"]),
            a=decode_array(s["a"], mode),
            b=decode_array(s["b"], mode),
            p=decode_array(s["p"], mode),
            q=decode_array(s["q"], mode),
        ))
    return RegularizationPath(segs, mode, lambda_min=decode_scalar(rec["lambda_min"], mode),
                              diagnostics=rec.get("diagnostics", {}))


def save_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n")
    return path


def load_json(path):
    return json.loads(Path(path).read_text())


def save_instance(inst, path):
    return save_json(instance_to_record(inst), path)


def load_instance(path):
    return instance_from_record(load_json(path))


def save_path(path_obj, path):
    return save_json(path_to_record(path_obj), path)


def load_path(path):
    return path_from_record(load_json(path))


@dataclass
class RunRecord:
    experiment: str
    meta: dict
    segment_count: int | None
    breakpoint_count: int | None
    wall_time: float
    precision: str
    kkt_max_violation: float | None
    error: str | None = None
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    @property
    def failed(self):
        return self.error is not None

    def to_dict(self):
        return _jsonable(asdict(self))
