import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcur.noise import (
    RNG_ALGORITHM,
    CovarianceSpec,
    NoisePath,
    WindowError,
    flux_at_boundary,
    sample_path,
    standard_normals,
    trace,
    wiener_shift,
)


def test_paths_are_reproducible_and_keyed():
    cov = CovarianceSpec.power_law(0.1, K=4)
    a = sample_path(cov, 1e-3, 0.0, 50, seed=3, replicate=1)
    b = sample_path(cov, 1e-3, 0.0, 50, seed=3, replicate=1)
    c = sample_path(cov, 1e-3, 0.0, 50, seed=3, replicate=2)
    assert np.array_equal(a.increments, b.increments)
    assert not np.array_equal(a.increments, c.increments)
    assert a.meta["rng"] == RNG_ALGORITHM


def test_windows_agree_where_they_overlap():
    a = sample_path(3, 0.01, -1.0, 300, seed=9)
    b = sample_path(3, 0.01, 0.5, 20, seed=9)
    assert np.array_equal(a.window(50, 20), b.increments)
    assert np.array_equal(a.window(-100, 5), standard_normals(9, 0, -100, 5, [1, 2, 3]) * 0.1)


def test_increment_moments():
    dt, n = 1e-2, 100_000
    p = sample_path(2, dt, 0.0, n, seed=11)
    mean = p.increments.mean(axis=0)
    var = p.increments.var(axis=0, ddof=1)
    assert np.all(np.abs(mean) <= 4 * np.sqrt(dt / n))
    assert np.all(np.abs(var / dt - 1) <= 0.05)


def test_standard_normals_are_gaussian():
    from scipy import stats

    z = standard_normals(1, 0, 0, 20_000, [1])[:, 0]
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_shift_identity_inverse_and_flow():
    p = sample_path(2, 0.1, -2.0, 60, seed=4)
    assert np.array_equal(wiener_shift(p, 0.0).window(0, 10), p.window(0, 10))
    back = wiener_shift(wiener_shift(p, 0.7), -0.7)
    assert np.array_equal(back.window(-20, 40), p.window(-20, 40))
    st = wiener_shift(wiener_shift(p, 0.3), 0.5)
    direct = wiener_shift(p, 0.8)
    assert np.array_equal(st.window(-10, 20), direct.window(-10, 20))
    # new increment i equals old increment i + t/dt
    assert np.array_equal(wiener_shift(p, 0.5).window(0, 5), p.window(5, 5))
    with pytest.raises(ValueError):
        wiener_shift(p, 0.05)


@settings(max_examples=30, deadline=None)
@given(st.integers(-30, 30), st.integers(-30, 30))
def test_shift_group_property(s, t):
    p = sample_path(1, 1.0, -100.0, 200, seed=1)
    lhs = wiener_shift(wiener_shift(p, float(s)), float(t))
    rhs = wiener_shift(p, float(s + t))
    assert np.array_equal(lhs.window(-20, 40), rhs.window(-20, 40))


def test_window_errors_and_lazy_extension():
    p = sample_path(2, 0.1, 0.0, 10, seed=5)
    with pytest.raises(WindowError):
        p.window(8, 5)
    e = p.extend(-10, 30)
    assert np.array_equal(e.window(0, 10), p.increments)
    assert e.covers(-10, 40)
    manual = NoisePath(0.1, 0, np.zeros((10, 2)))
    with pytest.raises(WindowError):
        manual.extend(0, 20)


def test_coarsen_sums_increments():
    p = sample_path(2, 0.01, 0.0, 40, seed=2)
    c = p.coarsen(4)
    assert c.dt == pytest.approx(0.04)
    assert np.allclose(c.increments, p.increments.reshape(10, 4, 2).sum(axis=1), rtol=0, atol=0)
    assert not c.generable


def test_trace_examples():
    k = np.arange(1, 10_001, dtype=float)
    assert abs(trace(CovarianceSpec(k**-2.0, [])) - np.pi**2 / 6) <= 1e-4
    assert trace(CovarianceSpec.zero(5)) == 0
    q = np.zeros(12)
    q[:5] = 0.3**2
    assert trace(CovarianceSpec(q, [])) == pytest.approx(5 * 0.09)
    assert trace(CovarianceSpec.power_law(2.0, 1.0, 3)) == pytest.approx(4 * (1 + 1 / 4 + 1 / 9))


def test_covariance_validation():
    with pytest.raises(ValueError):
        CovarianceSpec([-1.0], [])
    with pytest.raises(ValueError):
        CovarianceSpec([np.inf], [])
    c = CovarianceSpec([1.0], [0.0, 2.0])
    assert c.K == 2 and c.flux[1] == 2.0


def test_flux_at_boundary_examples():
    zero = NoisePath(0.01, 0, np.zeros((3, 4)))
    f = np.zeros(4)
    f[0] = 1.0
    cov = CovarianceSpec(np.zeros(4), f)
    assert np.allclose(flux_at_boundary(cov, zero, 1), [0.01, 0, 0, 0])
    q = np.zeros(4)
    q[0] = 4.0
    p = sample_path(4, 0.01, 0.0, 3, seed=8)
    out = flux_at_boundary(CovarianceSpec(q, []), p, 2)
    assert out[0] == 2 * p.window(2)[0, 0] and np.all(out[1:] == 0)
    with pytest.raises(WindowError):
        flux_at_boundary(cov, zero, 3)


def test_boundary_flux_has_zero_mean_along_inlet():
    cov = CovarianceSpec.power_law(0.5, K=8, flux_amplitude=0.3)
    p = sample_path(cov, 0.01, 0.0, 5, seed=1)
    g = flux_at_boundary(cov, p, 0)
    z, w = np.polynomial.legendre.leggauss(40)
    z, w = 0.5 * (z + 1), 0.5 * w
    k = np.arange(1, 9)
    profile = (np.sqrt(2) * np.cos(np.pi * np.outer(z, k))) @ g
    assert abs(np.sum(w * profile)) <= 1e-14


def test_empirical_covariance_kernel():
    cov = CovarianceSpec.power_law(1.0, K=4)
    dt, n = 1.0, 40_000
    p = sample_path(cov, dt, 0.0, n, seed=21)
    z = np.array([0.1, 0.4, 0.8])
    k = np.arange(1, 5)
    E = np.sqrt(2) * np.cos(np.pi * np.outer(z, k))
    w = (p.increments * np.sqrt(cov.eigenvalues)) @ E.T
    emp = w.T @ w / n
    exact = (E * cov.eigenvalues) @ E.T
    assert np.max(np.abs(emp - exact)) <= 5 * np.sqrt(2 / n) * np.max(np.abs(exact))
