import math

import numpy as np
import pytest

from lassopath import instances
from lassopath.homotopy import solve_path
from lassopath.instances import (ConstructionUnverified, SmoothingSpec, VarianceMode, ZeroTarget,
                                 expected_adversarial_count, gen_adversarial, gen_gaussian, normalize, smooth,
                                 standard_normals, uniforms)
from lassopath.precision import Precision, extremal_singular_values, to_float
from lassopath.problem import ProblemInstance


def test_count_formula():
    assert [expected_adversarial_count(d) for d in range(1, 11)] == [2, 5, 14, 41, 122, 365, 1094, 3281, 9842, 29525]


@pytest.mark.parametrize("d", range(1, 8))
def test_adversarial_counts(d):
    inst = gen_adversarial(d)
    assert solve_path(inst).count == (3**d + 1) // 2


def test_adversarial_shape():
    inst = gen_adversarial(5)
    X = to_float(inst.X)
    assert X.shape == (5, 5)
    assert np.all(np.tril(X, -1) == 0)
    assert X.max() == 1.0
    assert np.all(to_float(inst.y) == 1.0)
    assert inst.precision is Precision.EXTENDED


def test_adversarial_standard_copy():
    inst = gen_adversarial(3, precision=Precision.STANDARD)
    assert inst.X.dtype == np.float64


@pytest.mark.slow
def test_adversarial_d10():
    assert solve_path(gen_adversarial(10, verify=False), verify=False).count == 29525


def test_adversarial_unverified(monkeypatch):
    class Fake:
        count = 0

    instances._adversarial_extended.cache_clear()
    gen_adversarial(2)  # warm the cache with correct construction calls
    monkeypatch.setattr(instances, "solve_path", lambda *a, **k: Fake())
    with pytest.raises(ConstructionUnverified):
        gen_adversarial(2)


def test_adversarial_domain():
    with pytest.raises(ValueError):
        gen_adversarial(0)
    with pytest.raises(ValueError):
        gen_adversarial(13)


@pytest.mark.parametrize("mode", list(Precision))
def test_smooth_zero_sigma_identity(mode):
    base = gen_adversarial(4, precision=mode)
    out = smooth(base, SmoothingSpec(0.0, seed=3))
    assert out.X is base.X and out.y is base.y


def test_smooth_deterministic_and_seed_sensitive():
    base = gen_gaussian(10, 4, 0)
    a = smooth(base, SmoothingSpec(0.1, seed=5, stream=(1, 2)))
    b = smooth(base, SmoothingSpec(0.1, seed=5, stream=(1, 2)))
    c = smooth(base, SmoothingSpec(0.1, seed=5, stream=(1, 3)))
    assert np.array_equal(a.X, b.X)
    assert not np.array_equal(a.X, c.X)
    assert np.array_equal(a.y, base.y)
    assert a.meta["sigma"] == 0.1 and a.meta["variance_mode"] == "per-entry"


def test_smooth_extended_keeps_tiny_noise():
    base = gen_adversarial(4)
    out = smooth(base, SmoothingSpec(1e-20, seed=1))
    diff = to_float(out.X - base.X)
    assert np.all(diff != 0)
    assert np.max(np.abs(diff)) < 1e-18


def test_scaled_variance():
    n = 100
    base = ProblemInstance(np.zeros((n, 1000)), np.ones(n))
    out = smooth(base, SmoothingSpec(2.0, VarianceMode.SCALED, seed=9))
    var = out.X.var()
    assert abs(var - 4.0 / n) <= 0.05 * 4.0 / n


def test_per_entry_variance():
    base = ProblemInstance(np.zeros((100, 1000)), np.ones(100))
    out = smooth(base, SmoothingSpec(0.5, VarianceMode.PER_ENTRY, seed=9))
    assert abs(out.X.var() - 0.25) <= 0.05 * 0.25
    assert abs(out.X.mean()) < 0.01


def test_counter_stream_is_position_stable():
    long = uniforms(1000, 7, 1, 2)
    short = uniforms(10, 7, 1, 2)
    assert np.array_equal(long[:10], short)
    z_long = standard_normals(101, 7, 4)
    assert np.array_equal(z_long[:50], standard_normals(50, 7, 4))
    assert np.all((long > 0) & (long <= 1))


def test_box_muller_moments():
    z = standard_normals(200_000, 1)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1) < 0.01
    assert abs(np.mean(z**4) - 3) < 0.05


def test_smoothing_d4_mean_near_table():
    base = gen_adversarial(4)
    counts = [solve_path(smooth(base, SmoothingSpec(1e-2, seed=0, stream=(4, 2, t))), verify=False).count
              for t in range(100)]
    assert 10 / 2.5 <= np.mean(counts) <= 10 * 2.5


def test_gaussian_determinism_and_norm():
    a, b = gen_gaussian(12, 5, 42), gen_gaussian(12, 5, 42)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert abs(np.linalg.norm(a.y) - 1) <= 1e-12
    assert not np.array_equal(a.X, gen_gaussian(12, 5, 43).X)


def test_gaussian_entry_variance():
    inst = gen_gaussian(400, 300, 1)
    assert abs(inst.X.var() * 400 - 1) < 0.02


def test_square_gaussian_spectrum_recorded():
    medians = []
    for n, d in [(200, 50), (100, 50), (50, 50)]:
        alphas = [extremal_singular_values(gen_gaussian(n, d, s).X)[0] for s in range(20)]
        medians.append(float(np.median(alphas)))
    print("median smallest singular value for d/n = 0.25, 0.5, 1:", medians)
    assert all(m >= 0 for m in medians)


def test_normalize_records_scale():
    inst = ProblemInstance(np.eye(2), np.array([0.0, 2.0]))
    out = normalize(inst)
    assert out.meta["scale"] == pytest.approx(0.5)
    np.testing.assert_allclose(out.y, [0.0, 1.0])
    assert out.X is inst.X


def test_normalize_unit_is_identity():
    inst = gen_gaussian(6, 3, 0)
    out = normalize(inst)
    assert np.array_equal(out.y, inst.y)


def test_normalize_zero_target():
    with pytest.raises(ZeroTarget):
        normalize(ProblemInstance(np.eye(2), np.zeros(2)))


def test_target_scaling_preserves_count():
    inst = gen_gaussian(9, 5, 8)
    scaled = ProblemInstance(inst.X, inst.y / 3)
    p, q = solve_path(inst), solve_path(scaled)
    assert p.count == q.count and p.sign_sequence == q.sign_sequence
    np.testing.assert_allclose(np.array(q.breakpoints), np.array(p.breakpoints) / 3, rtol=1e-12)
