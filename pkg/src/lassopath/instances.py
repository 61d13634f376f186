"""Instance generators: worst-case construction, Gaussian designs, smoothing.

Randomness comes from a counter-based stream: a Philox key is derived from
``(seed, *stream)`` where ``stream`` names the trial, so every draw depends
only on its key and its position, never on execution order.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .homotopy import solve_path
from .precision import Precision, extended_context, mode_of, to_float
from .problem import ProblemInstance

#: Fraction of the admissible bound used for each new column's scale.
ADVERSARIAL_SHRINK = 0.8


class ConstructionUnverified(AssertionError):
    """The generated worst-case instance does not have (3^d + 1) / 2 segments."""


class ZeroTarget(ValueError):
    pass


class VarianceMode(enum.Enum):
    PER_ENTRY = "per-entry"  # variance sigma^2
    SCALED = "scaled"  # variance sigma^2 / n


@dataclass(frozen=True)
class SmoothingSpec:
    sigma: float
    variance_mode: VarianceMode = VarianceMode.PER_ENTRY
    seed: int = 0
    stream: tuple = ()


def philox_key(seed, *stream):
    """128-bit Philox key for ``(seed, *stream)``; stream items are non-negative ints."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *[int(s) for s in stream]])
    return ss.generate_state(2, dtype=np.uint64)


def uniforms(count, seed, *stream):
    """``count`` doubles in ``(0, 1]``; entry ``k`` sits at counter position ``k``."""
    bitgen = np.random.Philox(key=philox_key(seed, *stream))
    return 1.0 - np.random.Generator(bitgen).random(count)


def standard_normals(count, seed, *stream):
    """Box-Muller transform of the counter stream.

    Entries ``2m`` and ``2m + 1`` are the cosine and sine branches of the
    uniform pair at positions ``2m``, ``2m + 1``.
    """
    pairs = (count + 1) // 2
    u = uniforms(2 * pairs, seed, *stream).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log(u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = radius * np.cos(theta)
    z[:, 1] = radius * np.sin(theta)
    return z.ravel()[:count]


_STREAM_GAUSSIAN_X = 1
_STREAM_GAUSSIAN_Y = 2
_STREAM_SMOOTH = 3


def gen_gaussian(n, d, seed, precision=Precision.STANDARD):
    """Entries i.i.d. N(0, 1/n); ``y`` uniform on the unit sphere."""
    if n < d:
        raise ValueError(f"need n >= d, got n={n}, d={d}")
    X = standard_normals(n * d, seed, _STREAM_GAUSSIAN_X).reshape(n, d) / math.sqrt(n)
    g = standard_normals(n, seed, _STREAM_GAUSSIAN_Y)
    y = g / np.linalg.norm(g)
    meta = {"generator": "gaussian", "seed": int(seed), "sigma": None, "normalized": True, "scale": 1.0}
    return ProblemInstance(X, y, meta).astype(precision)


def smooth(inst: ProblemInstance, spec: SmoothingSpec):
    """``X + G`` with ``G`` i.i.d. Gaussian; ``y`` is left untouched.

    ``sigma == 0`` returns the instance's arrays unchanged.
    """
    mode = VarianceMode(spec.variance_mode)
    meta = {**inst.meta, "sigma": float(spec.sigma), "variance_mode": mode.value,
            "seed": int(spec.seed), "stream": list(spec.stream)}
    if spec.sigma == 0:
        return ProblemInstance(inst.X, inst.y, meta)
    n, d = inst.X.shape
    std = float(spec.sigma) if mode is VarianceMode.PER_ENTRY else float(spec.sigma) / math.sqrt(n)
    G = standard_normals(n * d, spec.seed, _STREAM_SMOOTH, *spec.stream).reshape(n, d)
    if inst.precision is Precision.STANDARD:
        X = inst.X + std * G
    else:
        with extended_context():
            X = inst.X + gmpy2.mpfr(std) * Precision.EXTENDED.asarray(G)
    return ProblemInstance(X, inst.y, meta)


def normalize(inst: ProblemInstance):
    """Scale ``y`` to unit norm; the factor applied is stored as ``meta['scale']``."""
    with extended_context():
        y = inst.y
        norm = gmpy2.sqrt(y.dot(y)) if mode_of(y) is Precision.EXTENDED else float(np.linalg.norm(y))
        if norm == 0:
            raise ZeroTarget("target vector is zero")
        if norm == 1:
            return inst.with_meta(normalized=True, scale=inst.meta.get("scale", 1.0))
        scale = 1 / norm
        return ProblemInstance(inst.X, y * scale, {**inst.meta, "normalized": True, "scale": float(scale)})


@functools.lru_cache(maxsize=16)
def _adversarial_extended(d, shrink):
    one = gmpy2.mpfr(1)
    X = np.array([[one]], dtype=object)
    y = np.array([one], dtype=object)
    scales = [one]
    for k in range(1, d):
        path = solve_path(ProblemInstance(X, y), Precision.EXTENDED, verify=False)
        # the new column must enter below every breakpoint of the current path
        last = path.breakpoints[-1]
        alpha = gmpy2.mpfr(shrink) * last / (2 * y.dot(y) + 1)
        X_new = Precision.EXTENDED.zeros((k + 1, k + 1))
        X_new[:k, :k] = X
        X_new[:k, k] = 2 * alpha * y
        X_new[k, k] = alpha
        X = X_new
        y = np.append(y, one).astype(object)
        scales.append(alpha)
    return X, y, tuple(scales)


def gen_adversarial(d, precision=Precision.EXTENDED, shrink=ADVERSARIAL_SHRINK, verify=True):
    """Upper-triangular ``d x d`` design whose path has ``(3^d + 1) / 2`` segments.

    Built by repeatedly appending a row and a column to a smaller worst-case
    instance: with ``y`` all ones, the new column is ``2 a y`` above the
    diagonal and ``a`` on it, where ``a`` is ``shrink`` times the largest
    value that keeps the new coordinate inactive until the previous path is
    exhausted.  The new coordinate then drives the old ones back to zero and
    out again with flipped signs, tripling the count less one.  The largest
    entry is the leading 1.

    ``verify`` re-solves the result at extended precision and raises
    :class:`ConstructionUnverified` if the count is off.
    """
    if not 1 <= d <= 12:
        raise ValueError(f"d must be in 1..12, got {d}")
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie in (0, 1)")
    with extended_context():
        X, y, scales = _adversarial_extended(d, float(shrink))
        X, y = X.copy(), y.copy()
        expected = (3**d + 1) // 2
        if verify:
            count = solve_path(ProblemInstance(X, y), Precision.EXTENDED, verify=False).count
            if count != expected:
                raise ConstructionUnverified(f"d={d}: path has {count} segments, expected {expected}")
    meta = {
        "generator": "adversarial",
        "d": d,
        "shrink": float(shrink),
        "column_scales": [float(a) for a in scales],
        "seed": None,
        "sigma": 0.0,
        "normalized": False,
        "scale": 1.0,
    }
    return ProblemInstance(X, y, meta).astype(precision)


def expected_adversarial_count(d):
    return (3**d + 1) // 2

