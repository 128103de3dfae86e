import numpy as np
import pytest

from gcur.config import InitialCondition, NoiseConfig, SimConfig
from gcur.diagnostics import (
    CSV_COLUMNS,
    absorbing_check,
    energy_envelope,
    energy_residual,
    lyapunov_weight,
    record,
    record_arrays,
    residual_report,
)
from gcur.experiments import default_small_config, run_ensemble
from gcur.integrator import simulate
from gcur.noise import sample_path, trace
from gcur.spectral import PhysicalParams, StateU, discretization

LAM1, LAM2 = np.sqrt(2) * np.pi, np.pi


def test_column_order():
    assert CSV_COLUMNS == ("t", "enstrophy", "ms_salinity", "h_norm_sq", "v_norm_sq",
                           "salinity_integral", "lyapunov", "eta_norm_sq", "energy_residual")


def test_zero_state_records_zero():
    r = record(StateU.zeros(6, 6), PhysicalParams(Ra=1.0))
    assert all(getattr(r, c) == 0 for c in CSV_COLUMNS if c not in ("energy_residual",))


def test_first_mode_parseval():
    q = np.zeros((6, 6))
    q[0, 0] = 0.5
    r = record(StateU.from_arrays(q, np.zeros((6, 6))), PhysicalParams(Ra=1.0))
    assert r.enstrophy == pytest.approx(1 / 8, abs=1e-15)
    assert r.lyapunov == pytest.approx(0.25 / np.pi**2, rel=1e-14)
    assert not r.lyapunov_partial


def test_zero_rayleigh_flags_partial_lyapunov():
    S = np.zeros((4, 4))
    S[1, 0] = 1.0
    r = record(StateU.from_arrays(np.ones((4, 4)), S), PhysicalParams(Ra=0.0))
    assert r.lyapunov_partial and r.lyapunov == pytest.approx(2.0)
    assert lyapunov_weight(0.0, LAM2) is None


def test_parseval_against_grid_quadrature():
    rng = np.random.default_rng(0)
    n = 14
    q, S = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    S[0, 0] = 0
    eta = rng.standard_normal((n, n)) * 0.1
    eta[0, 0] = 0
    r = record_arrays(0.0, q, S, eta)
    d = discretization(n, n)
    w = d.quad_weights
    qg, sg, eg = d.sine_to_grid(q), d.cosine_to_grid(S), d.cosine_to_grid(eta)
    assert r["enstrophy"] == pytest.approx(0.5 * np.sum(w * qg**2), rel=1e-10)
    assert r["ms_salinity"] == pytest.approx(np.sum(w * sg**2), rel=1e-10)
    assert r["eta_norm_sq"] == pytest.approx(np.sum(w * eg**2), rel=1e-10)
    vt = sg - eg
    assert r["lyapunov"] == pytest.approx(2 * np.sum(w * vt**2) + np.sum(w * qg**2) / np.pi**2, rel=1e-10)
    assert abs(r["salinity_integral"]) <= 1e-12 * np.sqrt(r["ms_salinity"])


def test_batched_records_match_single():
    rng = np.random.default_rng(1)
    q, S = rng.standard_normal((3, 5, 5)), rng.standard_normal((3, 5, 5))
    S[:, 0, 0] = 0
    batch = record_arrays(0.5, q, S)
    for j in range(3):
        one = record_arrays(0.5, q[j], S[j])
        for c in CSV_COLUMNS:
            assert np.array_equal(batch[c][j], one[c], equal_nan=True)


def _run(cfg, seed=0):
    tr = simulate(cfg, sample_path(cfg.covariance(), cfg.dt, 0.0, cfg.n_steps, seed=seed))
    return tr.diagnostics


def test_residual_zero_for_zero_state():
    cfg = SimConfig(Ra=1.0, nx=8, nz=8, n_steps=20)
    d = _run(cfg)
    assert np.all(d["energy_residual"][1:] == 0)
    assert np.isnan(d["energy_residual"][0])


def test_residual_negative_on_heat_decay():
    cfg = SimConfig(Ra=0.1, nx=8, nz=8, n_steps=200,
                    initial=InitialCondition(kind="eigenmode", field="q", m=1, k=1))
    r = _run(cfg)["energy_residual"][1:]
    assert np.all(r <= 1e-8)


def test_residual_report_in_small_regime():
    cfg = default_small_config(n_steps=2000, output_every=1)
    d = _run(cfg)
    rep = residual_report(d, cfg.Ra, LAM1, LAM2)
    assert rep.violation_fraction <= 0.01
    assert rep.n_steps == 2000 and rep.tolerance > 0


def test_residual_needs_two_records():
    with pytest.raises(ValueError):
        energy_residual({c: np.zeros(1) for c in ("t", "lyapunov", "grad_vt_sq", "grad_q_sq", "eta_norm_sq")},
                        1.0, LAM1, LAM2)


def test_absorbing_check_synthetic():
    t = np.linspace(0, 10, 101)
    L = np.stack([np.exp(-t), 3 * np.exp(-t), 0.1 + 0 * t, 5 * np.exp(-t) + 1.0 * (t > 6)], axis=1)
    rep = absorbing_check(t, L, 0.5)
    assert rep.entry_times[0] == pytest.approx(0.7)
    assert rep.entry_times[1] == pytest.approx(1.8)
    assert rep.entry_times[2] == 0.0
    assert list(rep.remained) == [True, True, True, False]
    assert not rep.all_ok
    late = absorbing_check(t, L[:, :2], 0.5, deadline=1.0)
    assert np.isinf(late.entry_times[1]) and not late.all_entered


def test_absorbing_check_inside_without_forcing():
    cfg = SimConfig(Ra=1.0, nx=8, nz=8, n_steps=500, output_every=10,
                    initial=InitialCondition(kind="random", h_norm=0.1))
    d = _run(cfg)
    rep = absorbing_check(d["t"], d["lyapunov"], d["lyapunov"][0])
    assert rep.all_ok and rep.entry_times[0] == 0.0


def test_mean_energy_affine_envelope():
    cfg = default_small_config(nx=12, nz=12)
    e = run_ensemble(cfg, M=8, T=4.0, seed=0)
    fit = energy_envelope(e.times, e.mean["h_norm_sq"], e.mean["v_norm_sq"], trace(cfg.covariance()))
    assert fit.bounded and fit.slope > 0
    zero = energy_envelope(np.arange(10.0), np.zeros(10), np.zeros(10), 0.0)
    assert zero.slope == 0 and zero.c == 0 and zero.bounded
