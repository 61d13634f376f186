"""Exact Lasso regularization path by event-driven homotopy.

The solver follows ``w[lam] = argmin 0.5 ||X w - y||^2 + lam ||w||_1`` from
``lam_max = ||X^T y||_inf`` down to ``lambda_min``.  On a segment with active
set ``A`` and signs ``s_A`` the solution is affine in ``lam``::

    w_A(lam) = a + lam * b,     a = G_AA^{-1} c_A,   b = -G_AA^{-1} s_A
    u(lam)   = p + lam * q,     u = X^T (X w - y)

with ``G = X^T X`` and ``c = X^T y``.  A segment ends when an active
coordinate crosses zero or an inactive correlation ``|u_j|`` reaches ``lam``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from . import precision as pk
from .precision import ActiveSetFactor, Precision, with_extended
from .problem import ProblemInstance

DEFAULT_KKT_TOL = {Precision.STANDARD: 1e-8, Precision.EXTENDED: 1e-10}


class SegmentBudgetExceeded(RuntimeError):
    """Raised when ``max_segments`` is reached; carries the partial path."""

    def __init__(self, message, path):
        super().__init__(message)
        self.path = path


class DegenerateTie(ArithmeticError):
    """Simultaneous events that no application order resolves."""


class OutOfRange(ValueError):
    """Evaluation below the end of a truncated path."""


@dataclass(eq=False)
class PathSegment:
    """Maximal interval ``[lambda_lo, lambda_hi)`` with a constant sign vector.

    ``a`` and ``b`` give ``w_A = a + lam * b`` on ``active``; ``p`` and ``q``
    give the full correlation vector ``u = p + lam * q``.
    """

    lambda_hi: object
    lambda_lo: object
    sign_vector: np.ndarray
    active: tuple
    a: np.ndarray
    b: np.ndarray
    p: np.ndarray
    q: np.ndarray

    @property
    def d(self):
        return len(self.sign_vector)

    def midpoint(self):
        """Interior evaluation point; ``2 * lambda_lo`` on the unbounded segment."""
        if self.lambda_hi == math.inf:
            return 2 * self.lambda_lo
        return (self.lambda_hi + self.lambda_lo) / 2

    @with_extended
    def weights(self, lam):
        w = pk.mode_of(self.p).zeros(self.d)
        if self.active:
            w[list(self.active)] = self.a + lam * self.b
        return w

    @with_extended
    def correlations(self, lam):
        return self.p + lam * self.q


@dataclass(eq=False)
class RegularizationPath:
    segments: list
    precision: Precision
    lambda_min: object = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def count(self):
        return len(self.segments)

    @property
    def breakpoints(self):
        """Strictly decreasing sign-change locations, ``lam_max`` first."""
        return [seg.lambda_lo for seg in self.segments[:-1]]

    @property
    def lambda_max(self):
        return self.segments[0].lambda_lo

    @property
    def sign_sequence(self):
        return [tuple(int(t) for t in seg.sign_vector) for seg in self.segments]

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)


@dataclass
class KktReport:
    u: np.ndarray
    violation: np.ndarray
    max_violation: float
    tol: float

    @property
    def passed(self):
        return self.max_violation <= self.tol


@dataclass
class PathSlopes:
    w_slopes: list
    u_slopes: list
    L_w: float
    L_u: float


def _sign(x):
    return 1 if x > 0 else (-1 if x < 0 else 0)


@with_extended
def lambda_max(inst: ProblemInstance):
    """``||X^T y||_inf``: the smallest ``lam`` with ``w[lam] = 0``."""
    return pk.vmax(pk.vabs(inst.X.T.dot(inst.y)))


@with_extended
def kkt_check(inst: ProblemInstance, lam, w, tol=None):
    """Violations of the Lasso optimality conditions at ``(lam, w)``.

    Active coordinates contribute ``|u_i + lam sign(w_i)|``; inactive ones
    ``max(0, |u_i| - lam)``, where ``u = X^T (X w - y)``.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    mode = inst.precision
    if tol is None:
        tol = DEFAULT_KKT_TOL[mode]
    w = mode.asarray(w) if pk.mode_of(np.asarray(w)) is not mode else np.asarray(w)
    lam = mode.scalar(lam)
    u = inst.X.T.dot(inst.X.dot(w) - inst.y)
    viol = np.empty(inst.d)
    for i in range(inst.d):
        si = _sign(w[i])
        if si:
            viol[i] = float(abs(u[i] + lam * si))
        else:
            viol[i] = max(0.0, float(abs(u[i]) - lam))
    return KktReport(u=u, violation=viol, max_violation=float(viol.max(initial=0.0)), tol=tol)


class _State:
    """Active set, signs, and affine laws for one segment."""

    def __init__(self, factor, signs, G, c, just_entered=(), just_left=None):
        self.factor = factor
        self.signs = signs
        self.just_entered = set(just_entered)
        self.just_left = dict(just_left or {})
        A = list(factor.active)
        s_A = np.array([signs[j] for j in A], dtype=np.int64)
        mode = factor.mode
        if A:
            self.a = factor.solve(c[A])
            self.b = -factor.solve(mode.asarray(s_A.astype(float)))
            GA = G[:, A]
            self.p = GA.dot(self.a) - c
            self.q = GA.dot(self.b)
        else:
            self.a = mode.zeros(0)
            self.b = mode.zeros(0)
            self.p = -c
            self.q = mode.zeros(len(c))

    def events(self, lam0, lam_floor):
        """Per-coordinate largest event strictly inside ``(lam_floor, lam0)``.

        Returns a dict ``j -> (lam, new_sign)``.
        """
        out = {}

        def offer(j, lam, new_sign):
            if lam_floor < lam < lam0:
                if j not in out or lam > out[j][0]:
                    out[j] = (lam, new_sign)

        active = self.factor.active
        for k, j in enumerate(active):
            bk = self.b[k]
            if j in self.just_entered or bk == 0:
                continue
            offer(j, -self.a[k] / bk, 0)
        in_active = set(active)
        for j in range(len(self.signs)):
            if j in in_active:
                continue
            pj, qj = self.p[j], self.q[j]
            left_sign = self.just_left.get(j, 0)
            # u_j reaches +lam: coordinate enters with sign -1
            if qj != 1 and left_sign != -1:
                offer(j, pj / (1 - qj), -1)
            if qj != -1 and left_sign != 1:
                offer(j, -pj / (1 + qj), 1)
        return out

    def consistent_at(self, lam, rel_tol):
        """Sign and box conditions of the segment law at ``lam``."""
        A = self.factor.active
        w_A = self.a + lam * self.b
        for k, j in enumerate(A):
            if _sign(w_A[k]) != self.signs[j]:
                return False
        u = self.p + lam * self.q
        bound = lam * (1 + rel_tol)
        in_active = set(A)
        return all(abs(u[j]) <= bound for j in range(len(self.signs)) if j not in in_active)

    def segment(self, lam_hi, lam_lo):
        return PathSegment(
            lambda_hi=lam_hi,
            lambda_lo=lam_lo,
            sign_vector=np.array(self.signs, dtype=np.int8),
            active=tuple(self.factor.active),
            a=self.a,
            b=self.b,
            p=self.p,
            q=self.q,
        )


def _apply(state, changes, G, c):
    factor = state.factor.copy()
    signs = list(state.signs)
    entered, left = [], {}
    for j, new_sign in changes:
        if new_sign == 0:
            left[j] = signs[j]
            factor.remove(j)
        else:
            factor.add(j)
            entered.append(j)
        signs[j] = new_sign
    return _State(factor, signs, G, c, just_entered=entered, just_left=left)


def _next_event(state, lam0, lam_floor, tie_tol):
    events = state.events(lam0, lam_floor)
    if not events:
        return None, []
    lam1 = max(ev[0] for ev in events.values())
    thresh = lam1 - tie_tol * abs(lam1)
    group = sorted((j, ev[1]) for j, ev in events.items() if ev[0] >= thresh)
    return lam1, group


@with_extended
def solve_path(
    inst: ProblemInstance,
    precision=None,
    lambda_min=0.0,
    max_segments=None,
    tie_tol=None,
    kkt_tol=None,
    verify=True,
):
    """Enumerate every linear segment of the Lasso path.

    Parameters
    ----------
    inst : ProblemInstance
        Full-column-rank design.
    precision : Precision or str, optional
        Arithmetic mode; defaults to the instance's own.
    lambda_min : float
        Stop once no event lies above this value.
    max_segments : int, optional
        Raise :class:`SegmentBudgetExceeded` (carrying the partial path)
        when the path would exceed this many segments.
    tie_tol : float, optional
        Relative window for simultaneous events, default ``100 * eps``.
    kkt_tol : float, optional
        Threshold recorded alongside the per-segment KKT check.
    verify : bool
        Run :func:`kkt_check` at every segment midpoint and record the worst
        violation in ``path.diagnostics``.

    Returns
    -------
    RegularizationPath
        Segments ordered by decreasing ``lam``; the first is the zero
        solution on ``[lam_max, inf)``.
    """
    mode = Precision.parse(precision) if precision is not None else inst.precision
    inst = inst.astype(mode)
    if inst.n < inst.d:
        raise ValueError(f"need n >= d, got n={inst.n}, d={inst.d}")
    if tie_tol is None:
        tie_tol = 1e2 * mode.eps
    if kkt_tol is None:
        kkt_tol = DEFAULT_KKT_TOL[mode]
    X, y = inst.X, inst.y
    G = pk.gram(X)
    c = X.T.dot(y)
    lam_floor = mode.scalar(lambda_min)

    factor = ActiveSetFactor(G)
    state = _State(factor, [0] * inst.d, G, c)
    lam0 = math.inf
    segments = []
    ties = []
    diagnostics = {"precision": mode.value, "tie_events": ties}

    def finish():
        path = RegularizationPath(segments, mode, lambda_min=lam_floor, diagnostics=diagnostics)
        if verify:
            worst = 0.0
            for seg in segments:
                lam = seg.midpoint()
                worst = max(worst, kkt_check(inst, lam, seg.weights(lam), tol=kkt_tol).max_violation)
            diagnostics["max_kkt_violation"] = worst
            diagnostics["kkt_tol"] = kkt_tol
            diagnostics["kkt_passed"] = worst <= kkt_tol
        return path

    lam1, group = _next_event(state, lam0, lam_floor, tie_tol)
    while True:
        if lam1 is None:
            segments.append(state.segment(lam0, lam_floor))
            return finish()
        segments.append(state.segment(lam0, lam1))
        if max_segments is not None and len(segments) >= max_segments:
            raise SegmentBudgetExceeded(
                f"segment budget {max_segments} reached at lambda={float(lam1):.6g}", finish()
            )
        if len(group) == 1:
            state = _apply(state, group, G, c)
            lam0 = lam1
            lam1, group = _next_event(state, lam0, lam_floor, tie_tol)
            continue
        # simultaneous events: all at once, then one at a time by coordinate
        for attempt in [group] + [[ev] for ev in group]:
            trial = _apply(state, attempt, G, c)
            nxt, nxt_group = _next_event(trial, lam1, lam_floor, tie_tol)
            probe = (lam1 + (nxt if nxt is not None else lam_floor)) / 2
            if trial.consistent_at(probe, 1e3 * mode.eps):
                ties.append({"lambda": float(lam1), "events": group, "applied": attempt})
                state, lam0, lam1, group = trial, lam1, nxt, nxt_group
                break
        else:
            raise DegenerateTie(f"cannot resolve simultaneous events {group} at lambda={float(lam1):.17g}")


@with_extended
def eval_path(path: RegularizationPath, lam):
    """Solution vector ``w[lam]`` from the containing segment."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if lam < path.lambda_min or (path.lambda_min > 0 and lam <= path.lambda_min):
        raise OutOfRange(f"lambda={float(lam):.6g} below path end {float(path.lambda_min):.6g}")
    lam = path.precision.scalar(lam)
    # breakpoints decrease; segment k covers [bp[k], bp[k-1])
    asc = path.breakpoints[::-1]
    k = len(asc) - bisect.bisect_right(asc, lam)
    return path.segments[k].weights(lam)


@with_extended
def path_slopes(path: RegularizationPath):
    """Per-segment derivatives of ``w`` and ``u`` and their coordinatewise maxima.

    Breakpoints themselves are excluded: each segment contributes its
    interior slope only.
    """
    w_slopes, u_slopes = [], []
    L_w = L_u = 0.0
    for seg in path.segments:
        dw = np.zeros(seg.d)
        if seg.active:
            dw[list(seg.active)] = pk.to_float(seg.b)
        du = pk.to_float(seg.q)
        w_slopes.append(dw)
        u_slopes.append(du)
        L_w = max(L_w, float(np.abs(dw).max(initial=0.0)))
        L_u = max(L_u, float(np.abs(du).max(initial=0.0)))
    return PathSlopes(w_slopes=w_slopes, u_slopes=u_slopes, L_w=L_w, L_u=L_u)
