import math

import numpy as np
import pytest

from lassopath import homotopy
from lassopath.homotopy import (DegenerateTie, OutOfRange, SegmentBudgetExceeded, eval_path, kkt_check,
                                lambda_max, path_slopes, solve_path)
from lassopath.instances import gen_adversarial, gen_gaussian
from lassopath.oracle import enumerate_sign_patterns, grid_solve
from lassopath.precision import Precision, extremal_singular_values, to_float
from lassopath.problem import ProblemInstance

# exact rational sign-pattern enumeration of gen_gaussian(8, 5, seed=1)
SEED1_SIGNS = [(0, 0, 0, 0, 0), (0, 0, -1, 0, 0), (0, 0, -1, 1, 0), (0, 0, -1, 1, 1), (0, 0, -1, 0, 1),
               (0, -1, -1, 0, 1), (-1, -1, -1, 0, 1), (-1, -1, -1, -1, 1)]
SEED1_BREAKPOINTS = [0.8159418485177453, 0.18927260274687482, 0.17948370788197524, 0.17284581673657717,
                     0.13399359808019468, 0.07233953192715024, 0.04009403595107755]


def inst_of(X, y):
    return ProblemInstance(np.asarray(X, float), np.asarray(y, float))


def test_lambda_max_identity():
    assert lambda_max(inst_of(np.eye(2), [1, 0.5])) == pytest.approx(1.0)


def test_lambda_max_diagonal():
    assert lambda_max(inst_of(np.diag([1.0, 2.0]), [1, 1])) == pytest.approx(2.0)


def test_lambda_max_adversarial_matches_oracle():
    inst = gen_adversarial(4)
    top = enumerate_sign_patterns(inst).breakpoints[0]
    assert float(abs(lambda_max(inst) - top) / top) <= 1e-12


def test_identity_soft_thresholding_path():
    path = solve_path(inst_of(np.eye(3), [0.9, 0.5, 0.1]))
    assert path.count == 4
    np.testing.assert_allclose(path.breakpoints, [0.9, 0.5, 0.1])
    assert path.sign_sequence == [(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)]
    assert path.segments[-1].lambda_lo == 0


def test_adversarial_d4_extended():
    assert solve_path(gen_adversarial(4), Precision.EXTENDED).count == 41


def test_frozen_gaussian_path():
    path = solve_path(gen_gaussian(8, 5, 1))
    assert path.sign_sequence == SEED1_SIGNS
    np.testing.assert_allclose(path.breakpoints, SEED1_BREAKPOINTS, rtol=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_random_path_matches_oracle(seed):
    inst = gen_gaussian(8, 5, 1000 + seed)
    hp, op = solve_path(inst), enumerate_sign_patterns(inst)
    assert hp.sign_sequence == op.sign_sequence
    np.testing.assert_allclose(hp.breakpoints, op.breakpoints, rtol=1e-9)


def test_kkt_zero_at_lambda_max():
    inst = gen_gaussian(8, 5, 2)
    lm = lambda_max(inst)
    rep = kkt_check(inst, lm, np.zeros(5))
    assert rep.passed and rep.max_violation == 0


def test_kkt_zero_below_lambda_max():
    inst = gen_gaussian(8, 5, 2)
    lm = lambda_max(inst)
    rep = kkt_check(inst, lm / 2, np.zeros(5))
    assert not rep.passed
    assert rep.max_violation == pytest.approx(lm / 2)


def test_kkt_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        kkt_check(inst_of(np.eye(2), [1, 1]), 0.0, np.zeros(2))


def test_midpoints_pass_kkt_on_100_instances():
    worst = 0.0
    for seed in range(100):
        d = 2 + seed % 6
        inst = gen_gaussian(d + 4, d, 500 + seed)
        path = solve_path(inst)
        for seg in path:
            lam = seg.midpoint()
            worst = max(worst, kkt_check(inst, lam, eval_path(path, lam)).max_violation)
    assert worst <= 1e-8


def test_eval_above_lambda_max_is_zero():
    inst = gen_gaussian(8, 5, 3)
    path = solve_path(inst)
    assert np.all(eval_path(path, 2 * path.lambda_max) == 0)


def test_eval_soft_threshold():
    path = solve_path(inst_of(np.eye(2), [1, 0.5]))
    np.testing.assert_allclose(eval_path(path, 0.25), [0.75, 0.25])


def test_eval_matches_coordinate_descent(rng):
    inst = gen_gaussian(12, 6, 4)
    path = solve_path(inst)
    for lam in rng.uniform(0.01, float(path.lambda_max), 10):
        np.testing.assert_allclose(eval_path(path, lam), grid_solve(inst, lam), atol=1e-7)


def test_eval_at_breakpoint_is_continuous():
    inst = gen_gaussian(8, 5, 1)
    path = solve_path(inst)
    for seg_hi, seg_lo in zip(path.segments, path.segments[1:]):
        bp = seg_hi.lambda_lo
        np.testing.assert_allclose(seg_hi.weights(bp), seg_lo.weights(bp), atol=1e-12)


def test_truncated_path_out_of_range():
    inst = gen_gaussian(8, 5, 1)
    path = solve_path(inst, lambda_min=0.1)
    assert path.segments[-1].lambda_lo == pytest.approx(0.1)
    assert all(bp > 0.1 for bp in path.breakpoints)
    with pytest.raises(OutOfRange):
        eval_path(path, 0.05)
    eval_path(path, 0.15)


def test_segment_budget_keeps_partial_path():
    inst = gen_adversarial(4, Precision.EXTENDED)
    with pytest.raises(SegmentBudgetExceeded) as info:
        solve_path(inst, max_segments=10)
    partial = info.value.path
    assert partial.count == 10
    full = solve_path(inst)
    assert partial.sign_sequence == full.sign_sequence[:10]


def test_simultaneous_entry_is_applied_together():
    path = solve_path(inst_of(np.eye(2), [1.0, 1.0]))
    assert path.count == 2
    assert path.sign_sequence == [(0, 0), (1, 1)]
    assert len(path.diagnostics["tie_events"]) == 1


def test_tie_falls_back_to_single_event(monkeypatch):
    def reject_pairs(self, lam, tol):
        return len(self.factor.active) < 2

    monkeypatch.setattr(homotopy._State, "consistent_at", reject_pairs)
    path = solve_path(inst_of(np.diag([1.0, 1.0, 0.5]), [1.0, 1.0, 0.1]), lambda_min=0.5)
    tie = path.diagnostics["tie_events"][0]
    assert tie["applied"] == [(0, 1)]
    assert path.sign_sequence[1] == (1, 0, 0)


def test_degenerate_tie_raises(monkeypatch):
    monkeypatch.setattr(homotopy._State, "consistent_at", lambda self, lam, tol: False)
    with pytest.raises(DegenerateTie):
        solve_path(inst_of(np.eye(2), [1.0, 1.0]))


def test_slopes_identity():
    s = path_slopes(solve_path(inst_of(np.eye(3), [0.9, 0.5, 0.1])))
    assert s.L_w == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(20))
def test_lipschitz_bounds_hold(seed):
    inst = gen_gaussian(10, 6, 70 + seed)
    s = path_slopes(solve_path(inst))
    a, b = extremal_singular_values(inst.X)
    assert s.L_w <= math.sqrt(6) / a**2
    assert s.L_u <= b**2 * math.sqrt(6) / a**2


def test_slopes_match_finite_differences():
    inst = gen_gaussian(10, 5, 9)
    path = solve_path(inst)
    slopes = path_slopes(path)
    for seg, dw in zip(path.segments[1:], slopes.w_slopes[1:]):
        lam = seg.midpoint()
        h = 1e-4 * (seg.lambda_hi - seg.lambda_lo)
        fd = (eval_path(path, lam + h) - eval_path(path, lam - h)) / (2 * h)
        np.testing.assert_allclose(fd, dw, atol=1e-6)


def test_u_slope_matches_finite_differences():
    inst = gen_gaussian(10, 5, 9)
    path = solve_path(inst)
    slopes = path_slopes(path)

    def u(lam):
        return inst.X.T @ (inst.X @ eval_path(path, lam) - inst.y)

    for seg, du in zip(path.segments[1:], slopes.u_slopes[1:]):
        lam = seg.midpoint()
        h = 1e-4 * (seg.lambda_hi - seg.lambda_lo)
        np.testing.assert_allclose((u(lam + h) - u(lam - h)) / (2 * h), du, atol=1e-6)


@pytest.mark.parametrize("seed", range(25))
def test_path_invariants(seed):
    d = 2 + seed % 5
    inst = gen_gaussian(d + 3, d, 9000 + seed)
    path = solve_path(inst)
    bps = path.breakpoints
    assert all(a > b for a, b in zip(bps, bps[1:]))
    assert path.count == len(bps) + 1
    assert path.segments[0].lambda_hi == math.inf and not path.segments[0].active
    for up, lo in zip(path.segments, path.segments[1:]):
        assert up.lambda_lo == lo.lambda_hi
        assert np.sum(up.sign_vector != lo.sign_vector) == 1
    assert len(set(path.sign_sequence)) == path.count
    ynorm = np.linalg.norm(inst.y)
    l1 = []
    for lam in np.linspace(float(path.lambda_max) * 1.1, 1e-3, 60):
        w = eval_path(path, lam)
        assert np.linalg.norm(inst.X @ w - inst.y) <= ynorm + 1e-12
        u = inst.X.T @ (inst.X @ w - inst.y)
        assert np.max(np.abs(u)) <= lam * (1 + 1e-9)
        l1.append(np.abs(w).sum())
    # lambda decreases along the grid, so the l1 norm must not decrease
    assert all(b >= a - 1e-12 for a, b in zip(l1, l1[1:]))


def test_midpoint_signs_match_segment():
    path = solve_path(gen_gaussian(9, 6, 77))
    for seg in path.segments:
        w = seg.weights(seg.midpoint())
        assert tuple(np.sign(w).astype(int)) == tuple(seg.sign_vector)


def test_slope_is_closed_form():
    inst = gen_gaussian(9, 6, 78)
    path = solve_path(inst)
    G = inst.X.T @ inst.X
    for seg in path.segments[1:]:
        A = list(seg.active)
        expected = -np.linalg.solve(G[np.ix_(A, A)], seg.sign_vector[A].astype(float))
        np.testing.assert_allclose(seg.b, expected, rtol=1e-9, atol=1e-12)


def test_ols_limit():
    inst = gen_gaussian(9, 4, 5)
    path = solve_path(inst)
    ols = np.linalg.lstsq(inst.X, inst.y, rcond=None)[0]
    last = path.segments[-1]
    if len(last.active) == 4:
        np.testing.assert_allclose(to_float(last.a), ols[list(last.active)], rtol=1e-9)


def test_standard_precision_reports_failure_on_adversarial():
    inst = gen_adversarial(8, Precision.STANDARD)
    try:
        path = solve_path(inst, Precision.STANDARD)
    except Exception:
        return
    assert path.count != 3281 or not path.diagnostics["kkt_passed"]
