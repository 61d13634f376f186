"""Precision-parametric dense linear algebra.

Two arithmetic modes are supported.  ``Precision.STANDARD`` works on plain
``float64`` arrays.  ``Precision.EXTENDED`` works on numpy object arrays whose
entries are :class:`gmpy2.mpfr` values carrying a 113-bit significand (the
binary128 significand width), so the same array code runs in both modes.

gmpy2 rounds every operation to the precision of the calling thread's
context.  Every public routine that does arithmetic on extended arrays
therefore runs under :func:`extended_context`.
"""

from __future__ import annotations

import enum
import functools
from contextlib import nullcontext

import gmpy2
import numpy as np
import scipy.linalg

EXTENDED_BITS = 113

#: Unit roundoff for each mode.
EPS_STANDARD = float(np.finfo(np.float64).eps)
EPS_EXTENDED = 2.0 ** (1 - EXTENDED_BITS)

REFACTOR_EVERY = 50


class SingularActiveSet(ArithmeticError):
    """A Cholesky pivot fell below the rank tolerance."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


def extended_context():
    """Context manager raising gmpy2 working precision to ``EXTENDED_BITS``."""
    if gmpy2.get_context().precision >= EXTENDED_BITS:
        return nullcontext()
    return gmpy2.context(gmpy2.get_context(), precision=EXTENDED_BITS)


def with_extended(func):
    """Run ``func`` with at least ``EXTENDED_BITS`` of gmpy2 precision."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with extended_context():
            return func(*args, **kwargs)

    return wrapper


class Precision(enum.Enum):
    STANDARD = "standard"
    EXTENDED = "extended"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())

    @property
    def eps(self):
        return EPS_STANDARD if self is Precision.STANDARD else EPS_EXTENDED

    @property
    def bits(self):
        return 53 if self is Precision.STANDARD else EXTENDED_BITS

    @with_extended
    def asarray(self, x):
        """Convert ``x`` (floats, ints, strings or mpfr) to this mode's array type."""
        if self is Precision.STANDARD:
            if isinstance(x, np.ndarray) and x.dtype == object:
                return np.vectorize(float, otypes=[np.float64])(x)
            return np.array(x, dtype=np.float64)
        arr = np.asarray(x)
        out = np.empty(arr.shape, dtype=object)
        flat_in = arr.ravel()
        flat_out = out.reshape(-1)
        for k, v in enumerate(flat_in):
            if isinstance(v, (np.floating, np.integer)):
                v = v.item()
            flat_out[k] = gmpy2.mpfr(v)
        return out

    @with_extended
    def scalar(self, x):
        if self is Precision.STANDARD:
            return float(x)
        return gmpy2.mpfr(x)

    def zeros(self, shape):
        if self is Precision.STANDARD:
            return np.zeros(shape)
        return self.asarray(np.zeros(shape))


def mode_of(arr):
    """Infer the precision mode from an array's dtype."""
    if isinstance(arr, np.ndarray) and arr.dtype == object:
        return Precision.EXTENDED
    if isinstance(arr, type(gmpy2.mpfr(0))):
        return Precision.EXTENDED
    return Precision.STANDARD


def to_float(x):
    """Round a scalar or array of either mode to float64."""
    if isinstance(x, np.ndarray):
        if x.dtype == object:
            return np.vectorize(float, otypes=[np.float64])(x)
        return x.astype(np.float64, copy=False)
    return float(x)


def sqrt(x):
    if isinstance(x, float):
        return np.sqrt(x)
    return gmpy2.sqrt(x)


def vabs(v):
    """Elementwise absolute value that works on object arrays."""
    return np.abs(v) if v.dtype != object else np.array([abs(t) for t in v], dtype=object)


def vmax(v):
    """Maximum of a 1-d array; 0 for empty input."""
    if len(v) == 0:
        return 0.0 if v.dtype != object else gmpy2.mpfr(0)
    return max(v) if v.dtype == object else v.max()


def _forward(L, b):
    n = L.shape[0]
    if L.dtype != object:
        return scipy.linalg.solve_triangular(L, b, lower=True, check_finite=False)
    x = np.empty(n, dtype=object)
    for i in range(n):
        x[i] = (b[i] - L[i, :i].dot(x[:i])) / L[i, i] if i else b[i] / L[i, i]
    return x


def _backward_t(L, b):
    """Solve ``L.T x = b`` for lower-triangular ``L``."""
    n = L.shape[0]
    if L.dtype != object:
        return scipy.linalg.solve_triangular(L, b, lower=True, trans="T", check_finite=False)
    x = np.empty(n, dtype=object)
    for i in range(n - 1, -1, -1):
        s = b[i]
        if i + 1 < n:
            s = s - L[i + 1:, i].dot(x[i + 1:])
        x[i] = s / L[i, i]
    return x


class ActiveSetFactor:
    """Cholesky factor of ``G[A, A]`` for a growing/shrinking index set ``A``.

    ``gram`` is the full Gram matrix ``X.T @ X`` in either precision mode.
    Adding an index appends a row to the factor.  Removing one drops the
    row/column and repairs the trailing block with a rank-one Cholesky
    update.  The factor is rebuilt from ``gram`` every ``refactor_every``
    modifications.
    """

    def __init__(self, gram, active=(), pivot_tol=None, refactor_every=REFACTOR_EVERY):
        self.gram = gram
        self.mode = mode_of(gram)
        if pivot_tol is None:
            diag = to_float(np.diag(gram))
            pivot_tol = 1e6 * self.mode.eps * float(diag.max()) if diag.size else 0.0
        self.pivot_tol = pivot_tol
        self.refactor_every = refactor_every
        self.active = []
        self.L = self.mode.zeros((0, 0))
        self._updates = 0
        for j in active:
            self.add(j)

    def __len__(self):
        return len(self.active)

    def copy(self):
        new = object.__new__(ActiveSetFactor)
        new.__dict__.update(self.__dict__)
        new.active = list(self.active)
        new.L = self.L.copy()
        return new

    @with_extended
    def add(self, j):
        if j in self.active:
            raise ValueError(f"index {j} already active")
        k = len(self.active)
        g = self.gram[self.active, j] if k else self.mode.zeros(0)
        ell = _forward(self.L, g) if k else g
        pivot = self.gram[j, j] - (ell.dot(ell) if k else 0)
        if not pivot > self.pivot_tol:
            raise SingularActiveSet(
                f"pivot {float(pivot):.3e} <= {self.pivot_tol:.3e} adding column {j}", index=j
            )
        L = self.mode.zeros((k + 1, k + 1))
        L[:k, :k] = self.L
        L[k, :k] = ell
        L[k, k] = sqrt(pivot)
        self.L = L
        self.active.append(j)
        self._tick()

    @with_extended
    def remove(self, j):
        k = self.active.index(j)
        L = self.L
        m = L.shape[0]
        # rows below k keep their leading part; trailing block absorbs column k
        x = L[k + 1:, k].copy()
        T = L[k + 1:, k + 1:].copy()
        _chol_update(T, x)
        new = self.mode.zeros((m - 1, m - 1))
        new[:k, :k] = L[:k, :k]
        new[k:, :k] = L[k + 1:, :k]
        new[k:, k:] = T
        self.L = new
        del self.active[k]
        self._tick()

    def _tick(self):
        self._updates += 1
        if self._updates >= self.refactor_every:
            self.refactor()

    @with_extended
    def refactor(self):
        active = list(self.active)
        self.active = []
        self.L = self.mode.zeros((0, 0))
        self._updates = -len(active)
        for j in active:
            self.add(j)
        self._updates = 0

    @with_extended
    def gram_active(self):
        idx = self.active
        return self.gram[np.ix_(idx, idx)]

    @with_extended
    def solve(self, rhs, refine=1):
        """Solve ``G[A, A] z = rhs`` with ``refine`` steps of iterative refinement."""
        rhs = np.asarray(rhs)
        if not self.active:
            return rhs[:0].copy()
        z = _backward_t(self.L, _forward(self.L, rhs))
        G = self.gram_active()
        for _ in range(refine):
            r = rhs - G.dot(z)
            z = z + _backward_t(self.L, _forward(self.L, r))
        return z


def _chol_update(L, x):
    """In-place rank-one update: ``L L^T + x x^T``."""
    n = L.shape[0]
    for k in range(n):
        r = sqrt(L[k, k] * L[k, k] + x[k] * x[k])
        c = r / L[k, k]
        s = x[k] / L[k, k]
        L[k, k] = r
        if k + 1 < n:
            L[k + 1:, k] = (L[k + 1:, k] + s * x[k + 1:]) / c
            x[k + 1:] = c * x[k + 1:] - s * L[k + 1:, k]


def solve_spd(factor, rhs):
    """Solve against an :class:`ActiveSetFactor` (one refinement step)."""
    return factor.solve(rhs, refine=1)


@with_extended
def least_squares_residual(X_sub, y):
    """Return ``min_v ||X_sub v - y||_2`` via a Householder QR factorization.

    An empty column set gives ``||y||_2``.
    """
    y = np.asarray(y)
    mode = mode_of(y) if y.dtype == object else mode_of(X_sub)
    if X_sub.ndim == 1:
        X_sub = X_sub[:, None]
    if X_sub.shape[1] == 0:
        return sqrt(y.dot(y))
    if mode is Precision.STANDARD:
        Q, _ = np.linalg.qr(np.asarray(X_sub, dtype=np.float64))
        r = y - Q @ (Q.T @ y)
        return float(np.linalg.norm(r))
    R = np.array(X_sub, dtype=object, copy=True)
    r = np.array(y, dtype=object, copy=True)
    n, m = R.shape
    for k in range(m):
        col = R[k:, k]
        norm = sqrt(col.dot(col))
        if norm == 0:
            continue
        alpha = -norm if col[0] >= 0 else norm
        v = col.copy()
        v[0] = v[0] - alpha
        vv = v.dot(v)
        if vv == 0:
            continue
        R[k:, k:] = R[k:, k:] - np.outer(v, (2 * v.dot(R[k:, k:])) / vv)
        r[k:] = r[k:] - v * ((2 * v.dot(r[k:])) / vv)
    tail = r[m:]
    return sqrt(tail.dot(tail)) if len(tail) else gmpy2.mpfr(0)


@with_extended
def gram(X):
    return X.T.dot(X)


@with_extended
def extremal_singular_values(X):
    """Smallest and largest right singular values ``(alpha, beta)`` of ``X``.

    Extended inputs are rounded to float64 first, so the result carries
    float64 relative accuracy in either mode.
    """
    Xf = to_float(np.asarray(X))
    if Xf.ndim == 1:
        Xf = Xf[:, None]
    s = np.linalg.svd(Xf, compute_uv=False)
    return float(s.min()), float(s.max())
