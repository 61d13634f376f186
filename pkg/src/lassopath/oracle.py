"""Brute-force references for small instances.

:func:`enumerate_sign_patterns` scores all ``3^d`` sign vectors directly:
because a sign vector determines its linear piece, each KKT-consistent
pattern owns exactly one interval of the path.  :func:`grid_solve` is a
fixed-lambda coordinate descent that never looks at the path.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import precision as pk
from .homotopy import PathSegment, RegularizationPath, kkt_check
from .precision import Precision, with_extended
from .problem import ProblemInstance

MAX_ORACLE_DIM = 14


class TilingViolation(ArithmeticError):
    """Oracle intervals overlap or leave a gap on ``(0, lam_max]``."""


class NoConvergence(RuntimeError):
    pass


def _gauss_solve(A, B):
    """Dense Gaussian elimination with partial pivoting; ``B`` may be a matrix."""
    A = np.array(A, dtype=A.dtype, copy=True)
    B = np.array(B, dtype=B.dtype, copy=True)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    n = A.shape[0]
    for k in range(n):
        piv = max(range(k, n), key=lambda i: abs(A[i, k]))
        if A[piv, k] == 0:
            raise np.linalg.LinAlgError("singular matrix")
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
            B[[k, piv]] = B[[piv, k]]
        for i in range(k + 1, n):
            f = A[i, k] / A[k, k]
            A[i, k:] = A[i, k:] - f * A[k, k:]
            B[i] = B[i] - f * B[k]
    X = np.empty_like(B)
    for k in range(n - 1, -1, -1):
        X[k] = (B[k] - A[k, k + 1:].dot(X[k + 1:])) / A[k, k]
    return X[:, 0] if vec else X


@with_extended
def _pattern_interval(G, c, s):
    """Interval ``(lo, hi)`` where sign vector ``s`` is KKT-consistent, or ``None``."""
    d = len(s)
    A = [i for i in range(d) if s[i]]
    mode = pk.mode_of(G)
    if A:
        s_A = mode.asarray(np.array([float(s[i]) for i in A]))
        sol = _gauss_solve(G[np.ix_(A, A)], np.stack([c[A], -s_A], axis=1))
        a, b = sol[:, 0], sol[:, 1]
        p = G[:, A].dot(a) - c
        q = G[:, A].dot(b)
    else:
        a = b = mode.zeros(0)
        p, q = -c, mode.zeros(d)
    # each constraint reads coef * lam + const >= 0 (> 0 for active signs)
    cons = [(s[i] * b[k], s[i] * a[k], True) for k, i in enumerate(A)]
    in_active = set(A)
    for j in range(d):
        if j not in in_active:
            cons.append((1 - q[j], -p[j], False))
            cons.append((1 + q[j], p[j], False))
    lo, hi = 0, math.inf
    for coef, const, strict in cons:
        if coef > 0:
            lo = max(lo, -const / coef)
        elif coef < 0:
            hi = min(hi, -const / coef)
        elif const < 0 or (strict and const == 0):
            return None
    return lo, hi, A, a, b, p, q


@with_extended
def enumerate_sign_patterns(inst: ProblemInstance, precision=None, gap_tol=None, empty_tol=None):
    """Path assembled from every sign vector whose KKT interval is nonempty.

    Intervals shorter than ``empty_tol`` (default ``1e4 * eps * lam_max``)
    are rounding artefacts and discarded.  The survivors must tile
    ``(0, lam_max]`` to within ``gap_tol`` (default ``1e-9 * lam_max``),
    otherwise :class:`TilingViolation` is raised.
    """
    mode = Precision.parse(precision) if precision is not None else inst.precision
    if inst.d > MAX_ORACLE_DIM:
        raise ValueError(f"oracle limited to d <= {MAX_ORACLE_DIM}, got {inst.d}")
    inst = inst.astype(mode)
    G = inst.X.T.dot(inst.X)
    c = inst.X.T.dot(inst.y)
    lam_max = pk.vmax(pk.vabs(c))
    if gap_tol is None:
        gap_tol = 1e-9 * lam_max
    if empty_tol is None:
        empty_tol = 1e4 * mode.eps * lam_max
    segments = []
    for s in itertools.product((-1, 0, 1), repeat=inst.d):
        found = _pattern_interval(G, c, s)
        if found is None:
            continue
        lo, hi, A, a, b, p, q = found
        if hi - lo <= empty_tol:
            continue
        segments.append(
            PathSegment(
                lambda_hi=hi,
                lambda_lo=lo,
                sign_vector=np.array(s, dtype=np.int8),
                active=tuple(A),
                a=a,
                b=b,
                p=p,
                q=q,
            )
        )
    segments.sort(key=lambda seg: -seg.lambda_lo)
    if not segments or segments[0].lambda_hi != math.inf:
        raise TilingViolation("no pattern covers lambda >= lam_max")
    for upper, lower in zip(segments, segments[1:]):
        if abs(upper.lambda_lo - lower.lambda_hi) > gap_tol:
            raise TilingViolation(
                f"gap/overlap of {float(upper.lambda_lo - lower.lambda_hi):.3e} at lambda={float(upper.lambda_lo):.6g}"
            )
    if segments[-1].lambda_lo > gap_tol:
        raise TilingViolation(f"path stops at lambda={float(segments[-1].lambda_lo):.6g}")
    return RegularizationPath(segments, mode, lambda_min=0.0, diagnostics={"source": "oracle"})


def _soft(x, t):
    return math.copysign(max(abs(x) - t, 0.0), x)


def grid_solve(inst: ProblemInstance, lam, tol=1e-12, max_iter=100_000, w0=None):
    """Lasso solution at a single ``lam`` by cyclic coordinate minimization.

    Each coordinate step is the exact soft-threshold minimizer of the
    objective along that axis.  Stops once :func:`kkt_check` reports a
    violation of at most ``tol``; raises :class:`NoConvergence` otherwise.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    X, y = inst.to_float()
    lam = float(lam)
    G = X.T @ X
    c = X.T @ y
    d = G.shape[0]
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=float)
    u = G @ w - c
    plain = ProblemInstance(X, y, inst.meta)
    for it in range(max_iter):
        for j in range(d):
            old = w[j]
            new = _soft(G[j, j] * old - u[j], lam) / G[j, j]
            if new != old:
                u += G[:, j] * (new - old)
                w[j] = new
        if it % 10 == 9 or d <= 2:
            if kkt_check(plain, lam, w, tol=tol).passed:
                return w
    report = kkt_check(plain, lam, w, tol=tol)
    if report.passed:
        return w
    raise NoConvergence(f"KKT violation {report.max_violation:.3e} after {max_iter} sweeps")
