"""Quantities entering the smoothed-complexity bounds, and the bounds themselves.

All universal constants hidden by the ``<~`` notation are set to 1, so every
evaluated bound is "up to an unspecified constant" and only meaningful as a
ratio or trend.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .homotopy import path_slopes, solve_path
from .instances import uniforms
from .precision import extremal_singular_values, least_squares_residual
from .problem import ProblemInstance

GAMMA_EXACT_LIMIT = 10_000
DEFAULT_DELTA = 0.1
_STREAM_GAMMA = 11


class DomainError(ValueError):
    pass


class BoundViolation(AssertionError):
    pass


def estimate_gamma_s(inst: ProblemInstance, s, trials=1000, seed=0):
    """Smallest residual of ``y`` against ``d - s`` columns, over removed sets of size ``s``.

    All ``C(d, s)`` subsets are scanned when there are at most
    ``GAMMA_EXACT_LIMIT`` of them; otherwise ``trials`` uniformly random
    subsets are drawn.  Computed in float64.
    """
    d = inst.d
    if not 1 <= s <= d:
        raise ValueError(f"s must lie in 1..{d}, got {s}")
    X, y = inst.to_float()
    if math.comb(d, s) <= GAMMA_EXACT_LIMIT:
        subsets = itertools.combinations(range(d), s)
    else:
        u = uniforms(trials * d, seed, _STREAM_GAMMA, s).reshape(trials, d)
        subsets = (np.argsort(row)[:s] for row in u)
    best = math.inf
    for S in subsets:
        keep = np.setdiff1d(np.arange(d), np.asarray(S, dtype=int))
        best = min(best, float(least_squares_residual(X[:, keep], y)))
    return best


def gamma_s_scale(n, d, sigma, delta, s):
    """``sigma * delta^(1/s) / sqrt(d n)``, the smoothed lower-bound scale for gamma_s."""
    return sigma * delta ** (1.0 / s) / math.sqrt(d * n)


def theorem1_bound(n, d, sigma, delta):
    """``n^1.1 (d / (delta sigma))^6`` with unit constant."""
    for name, v in (("n", n), ("d", d), ("sigma", sigma), ("delta", delta)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    if sigma > 1 or delta > 1:
        raise DomainError("sigma and delta must not exceed 1")
    return n**1.1 * (d / (delta * sigma)) ** 6


def theorem2_bound(s, n, d, L_w, L_u, alpha, sigma, delta, gamma_s):
    """``3^s (sqrt(s n) d (L_w / alpha^2 + L_u) / (delta^2 sigma gamma_s))^(s / (s - 1))``.

    Only defined for ``s >= 2``.
    """
    if s < 2:
        raise DomainError(f"exponent s/(s-1) requires s >= 2, got {s}")
    for name, v in (("n", n), ("d", d), ("alpha", alpha), ("sigma", sigma), ("delta", delta), ("gamma_s", gamma_s)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    if L_w < 0 or L_u < 0:
        raise DomainError("Lipschitz constants must be nonnegative")
    ratio = math.sqrt(s * n) * d * (L_w / alpha**2 + L_u) / (delta**2 * sigma * gamma_s)
    try:
        return 3.0**s * ratio ** (s / (s - 1))
    except OverflowError:
        return math.inf


@dataclass
class BoundReport:
    n: int
    d: int
    sigma: float | None
    delta: float
    alpha: float
    beta: float
    L_w: float
    L_u: float
    L_w_bound: float
    L_u_bound: float
    measured_count: int
    gamma_s: dict = field(default_factory=dict)
    gamma_s_ratio: dict = field(default_factory=dict)
    thm1_value: float | None = None
    thm2_value: dict = field(default_factory=dict)
    alpha_ratio: float | None = None

    @property
    def deterministic_ok(self):
        return self.L_w <= self.L_w_bound and self.L_u <= self.L_u_bound

    def to_dict(self):
        out = asdict(self)
        out["deterministic_ok"] = self.deterministic_ok
        out["constants"] = "all universal constants set to 1"
        return out


def instance_bound_report(inst: ProblemInstance, delta=DEFAULT_DELTA, s_list=(2,), precision=None,
                          gamma_trials=1000, seed=0, rel_slack=1e-9, path=None):
    """Measure everything the complexity bounds refer to on one instance.

    Raises :class:`BoundViolation` if either deterministic Lipschitz bound
    (``L_w <= sqrt(d) / alpha^2``, ``L_u <= beta^2 sqrt(d) / alpha^2``)
    fails beyond ``rel_slack``.  Probabilistic quantities are recorded only.
    """
    if path is None:
        path = solve_path(inst, precision=precision)
    slopes = path_slopes(path)
    alpha, beta = extremal_singular_values(inst.X)
    n, d = inst.n, inst.d
    L_w_bound = math.sqrt(d) / alpha**2 if alpha > 0 else math.inf
    L_u_bound = beta**2 * L_w_bound
    sigma = inst.meta.get("sigma") or None
    report = BoundReport(
        n=n, d=d, sigma=sigma, delta=delta, alpha=alpha, beta=beta,
        L_w=slopes.L_w, L_u=slopes.L_u,
        L_w_bound=L_w_bound * (1 + rel_slack), L_u_bound=L_u_bound * (1 + rel_slack),
        measured_count=path.count,
    )
    for s in s_list:
        g = estimate_gamma_s(inst, s, trials=gamma_trials, seed=seed)
        report.gamma_s[s] = g
        if sigma:
            report.gamma_s_ratio[s] = g / gamma_s_scale(n, d, sigma, delta, s)
            if s >= 2 and g > 0 and alpha > 0 and sigma <= 1:
                report.thm2_value[s] = theorem2_bound(s, n, d, slopes.L_w, slopes.L_u, alpha, sigma, delta, g)
    if sigma and sigma <= 1:
        report.thm1_value = theorem1_bound(n, d, sigma, delta)
        report.alpha_ratio = alpha / (delta * sigma / d)
    if not report.deterministic_ok:
        raise BoundViolation(
            f"L_w={report.L_w:.6g} (bound {L_w_bound:.6g}), L_u={report.L_u:.6g} (bound {L_u_bound:.6g})"
        )
    return report
