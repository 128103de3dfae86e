import json

import numpy as np
import pytest

from gcur.experiments import (
    absorbing_alpha,
    absorbing_experiment,
    default_small_config,
    dumps,
    enstrophy_asymptotics,
    enstrophy_sweep,
    ergodicity_gap,
    fit_decay,
    perturbed_state,
    pullback_forward_consistency,
    pullback_run,
    regime_report,
    run_ensemble,
    summary_document,
    synchronization_batch,
    synchronization_test,
    threads,
    zero_noise,
)
from gcur.integrator import initial_state
from gcur.noise import sample_path
from gcur.spectral import StateU


def small(**kw):
    base = dict(nx=8, nz=8, dt=2e-3)
    base.update(kw)
    return default_small_config(**base)


def test_default_regime_is_small():
    rep = regime_report(default_small_config())
    assert rep["small"] and rep["margin"] >= rep["margin_threshold"]
    assert rep["trace_Q"] <= 0.01 and rep["flux_norm"] <= 0.1 + 1e-15
    assert absorbing_alpha(default_small_config()) == pytest.approx(np.pi**2 / 2)
    assert not regime_report(default_small_config(Ra=20.0))["small"]


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("GCUR_THREADS", "3")
    assert threads() == 3
    monkeypatch.setenv("GCUR_THREADS", "x")
    with pytest.raises(ValueError):
        threads()


def test_ensemble_without_noise_has_zero_variance():
    e = run_ensemble(zero_noise(small()), M=3, T=0.2)
    # replicates are bitwise identical; the variance is zero up to the rounding
    # of the mean
    assert np.all(np.ptp(e.columns["enstrophy"], axis=1) == 0)
    assert np.all(e.var["enstrophy"] <= 1e-30)
    assert e.M == 3 and not e.failed.any()
    with pytest.raises(ValueError):
        run_ensemble(small(), M=1, T=0.1)


def test_ensemble_determinism_and_distinct_replicates():
    a = run_ensemble(small(), M=2, T=0.2, seed=4)
    b = run_ensemble(small(), M=2, T=0.2, seed=4)
    for c in a.columns:
        assert np.array_equal(a.columns[c], b.columns[c], equal_nan=True)
    assert not np.array_equal(a.columns["enstrophy"][:, 0], a.columns["enstrophy"][:, 1])
    assert len(set(a.replicates.tolist())) == a.M


def test_ensemble_threads_do_not_change_results(monkeypatch):
    import gcur.experiments as ex

    monkeypatch.setattr(ex, "GROUP_SIZE", 2)
    a = run_ensemble(small(), M=5, T=0.1, seed=2, workers=1)
    b = run_ensemble(small(), M=5, T=0.1, seed=2, workers=3)
    assert np.array_equal(a.columns["h_norm_sq"], b.columns["h_norm_sq"])


def test_ensemble_stationarity():
    e = run_ensemble(small(), M=32, T=6.0, seed=0)
    i3 = np.argmin(np.abs(e.times - 3.0))
    a, b = e.columns["enstrophy"][i3], e.columns["enstrophy"][-1]
    gap = abs(a.mean() - b.mean())
    half = e.half_width["enstrophy"][i3] + e.half_width["enstrophy"][-1]
    assert gap <= half


def test_plateau_zero_without_noise():
    e = run_ensemble(zero_noise(small()), M=2, T=6.0)
    p = enstrophy_asymptotics(e, burn_in=2.0)
    assert p.finite and p.estimate.mean < 1e-12
    with pytest.raises(ValueError):
        enstrophy_asymptotics(e, burn_in=2.5)


def test_sweep_is_nondecreasing_and_affine():
    s = enstrophy_sweep(small(), [0.0, 0.005, 0.01], M=8, T=6.0, burn_in=2.0)
    assert s.passed and s.slope > 0
    json.loads(dumps(s.summary()))


def test_synchronization_identical_initial_conditions():
    cfg = small()
    u = initial_state(cfg)
    r = synchronization_test(cfg, u, u, sample_path(cfg.covariance(), cfg.dt, 0.0, 10, 0), 1.0)
    assert np.all(r.distance == 0)


def test_linear_regime_rate():
    cfg = zero_noise(small(Ra=0.0))
    a = initial_state(cfg)
    S = a.S.coeffs.copy()
    S[1, 0] += 0.5 / np.sqrt(2)
    b = StateU.from_arrays(a.q.coeffs, S)
    p = sample_path(cfg.covariance(), cfg.dt, 0.0, 1500, 0)
    r = synchronization_test(cfg, a, b, p, 3.0, fit_start=1.0)
    assert r.rho == pytest.approx(-np.pi**2, rel=0.1)


def test_small_regime_synchronizes():
    cfg = small()
    a = initial_state(cfg)
    b = perturbed_state(a, seed=9)
    paths = [sample_path(cfg.covariance(), cfg.dt, 0.0, 1500, s, 0) for s in range(3)]
    for r in synchronization_batch(cfg, a, b, paths, 3.0):
        assert r.decays and r.distance[0] > 0
        assert np.isfinite(r.rho_se)


def test_fit_decay_exact_exponential():
    t = np.linspace(0, 2, 21)
    r = fit_decay(t, 3 * np.exp(-2.5 * t))
    assert r.rho == pytest.approx(-2.5, rel=1e-12) and r.fit_residual < 1e-12
    with pytest.raises(ValueError):
        fit_decay(t, np.zeros_like(t))


def test_pullback_without_noise_converges_to_zero():
    cfg = zero_noise(small())
    p = sample_path(cfg.covariance(), cfg.dt, -8.0, 4000, 0)
    r = pullback_run(cfg, [1.0, 2.0, 4.0], p)
    norms = np.sqrt(np.sum(r.states_q**2 + r.states_S**2, axis=(-2, -1)))[0]
    assert np.all(np.diff(norms) < 0) and norms[-1] < 1e-6


def test_pullback_singleton_in_small_regime():
    cfg = small()
    p = sample_path(cfg.covariance(), cfg.dt, -8.0, 4000, 0)
    a = initial_state(cfg)
    r = pullback_run(cfg, [1.0, 2.0, 4.0, 8.0], p, [a, perturbed_state(a, 3)])
    assert r.spread[-1] <= 1e-6
    assert np.all(np.diff(r.successive, axis=1) < 0)
    with pytest.raises(ValueError):
        pullback_run(cfg, [1.0005], p)


def test_pullback_forward_consistency():
    cfg = small()
    p = sample_path(cfg.covariance(), cfg.dt, -8.0, 5000, 0)
    assert pullback_forward_consistency(cfg, 8.0, p, t=1.0) <= 1e-6


def test_ergodicity_without_noise():
    rep = ergodicity_gap(zero_noise(small(initial={"kind": "zero"})), T_long=4.0, M=2,
                         t_obs=2.0, burn_in=1.0)
    e = rep.quantities["enstrophy"]
    assert e["time_average"]["mean"] == 0 and e["ensemble_average"]["mean"] == 0
    assert e["time_vs_ensemble"]["gap"] == 0 and rep.passed
    with pytest.raises(ValueError):
        ergodicity_gap(small(), T_long=4.0, M=1, t_obs=2.0, burn_in=1.0)


def test_absorbing_experiment_small():
    r = absorbing_experiment(small(), seeds=[0], h_norms=[0.1, 2.0], horizon=4.0)
    assert r.passed and r.entry_times[0, 0] <= r.entry_times[0, 1]
    json.loads(dumps(summary_document("absorbing", small(), [0], r, r.passed)))
