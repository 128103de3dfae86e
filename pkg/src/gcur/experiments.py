"""Experiment suite: ensembles, enstrophy plateaus, synchronization, pullback, ergodicity.

Every experiment is a pure function of its configuration and seeds.  Noise
for replicate ``r`` of master seed ``s`` is the keyed path ``(s, r)``, so
results do not depend on how replicates are grouped or scheduled.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, is_dataclass, replace

import numpy as np
from scipy import stats as sps

from . import diagnostics as diag
from . import stats
from .config import Formulation, from_dict
from .integrator import LAMBDA1, LAMBDA2, initial_state, simulate_batch
from .noise import RNG_ALGORITHM, CovarianceSpec, sample_path, trace, wiener_shift
from .ou import absorbing_radius, dissipativity_margin, radius_series, stationary_stats
from .spectral import StateU

# replicates advanced together in one vectorised batch
GROUP_SIZE = 64


def threads():
    """Worker cap from ``GCUR_THREADS`` (default 1)."""
    try:
        n = int(os.environ.get("GCUR_THREADS", "1"))
    except ValueError:
        raise ValueError("GCUR_THREADS must be an integer") from None
    return max(n, 1)


def default_small_config(**overrides):
    """Operational small regime used by the statistical experiments."""
    base = {
        "Ra": 1.0,
        "nx": 16,
        "nz": 16,
        "dt": 2e-3,
        "n_steps": 10000,
        "output_every": 5,
        "noise": {"sigma": 0.055, "decay": 1.0, "K": 32, "flux_amplitude": 0.1},
        "initial": {"kind": "random", "h_norm": 0.5},
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            base[key] = {**base[key], **value}
        else:
            base[key] = value
    return from_dict(base)


def regime_report(config):
    """Smallness checks: margin, tr Q and |F| against the operational thresholds."""
    cov = config.covariance()
    margin = dissipativity_margin(config.params, cov, LAMBDA1, LAMBDA2, config.nx, config.nz)
    need = 0.5 / (config.Ra**2 * LAMBDA2**2) if config.Ra > 0 else 0.0
    tq, fn = trace(cov), cov.flux_norm()
    return {
        "margin": float(margin),
        "margin_threshold": need,
        "trace_Q": tq,
        "flux_norm": fn,
        "E_eta_sq": stationary_stats(cov, config.nx, config.nz, config.Pr).mean_sq_norm,
        "covariance_family": cov.family,
        "small": bool(margin >= need and tq <= 0.01 and fn <= 0.1 + 1e-15),
    }


def absorbing_alpha(config):
    """Decay rate of the Lyapunov functional implied by the energy inequality.

    ``min(lambda2^2 / 2, lambda1^2 * margin * Ra^2 lambda2^2)``, using the mean
    of ``|eta|^2`` inside the margin.
    """
    a = LAMBDA2**2 / 2
    if config.Ra == 0:
        return a
    margin = regime_report(config)["margin"]
    if margin <= 0:
        raise ValueError("dissipativity margin is not positive")
    return min(a, LAMBDA1**2 * margin * config.Ra**2 * LAMBDA2**2)


def _paths(config, n_steps, replicates, seed, first_step=0):
    cov = config.covariance()
    return [sample_path(cov, config.dt, first_step * config.dt, max(n_steps, 1), seed, r)
            for r in replicates]


def _u0_arrays(u0, B):
    if isinstance(u0, StateU):
        return (np.broadcast_to(u0.q.coeffs, (B,) + u0.q.coeffs.shape).copy(),
                np.broadcast_to(u0.S.coeffs, (B,) + u0.S.coeffs.shape).copy())
    return tuple(np.asarray(a, dtype=float) for a in u0)


# ensembles --------------------------------------------------------------------


@dataclass(eq=False)
class EnsembleResult:
    times: np.ndarray
    columns: dict
    failed: np.ndarray
    fail_reason: list
    replicates: np.ndarray
    seed: int
    level: float = 0.95
    mean: dict = field(default_factory=dict)
    var: dict = field(default_factory=dict)
    half_width: dict = field(default_factory=dict)

    @property
    def M(self):
        return len(self.replicates)

    def summary(self):
        return {
            "M": self.M,
            "seed": self.seed,
            "replicates": self.replicates.tolist(),
            "failed": [int(r) for r, f in zip(self.replicates, self.failed) if f],
            "level": self.level,
            "final": {c: {"mean": float(self.mean[c][-1]), "half_width": float(self.half_width[c][-1])}
                      for c in self.mean},
        }


def run_ensemble(config, M, T=None, u0=None, seed=None, level=0.95, workers=None,
                 replicates=None):
    """``M`` replicates of ``config`` to horizon ``T``; statistics over survivors."""
    if M < 2:
        raise ValueError("ensemble needs M >= 2")
    seed = config.seed if seed is None else seed
    reps = np.arange(M) if replicates is None else np.asarray(replicates)
    n = config.n_steps if T is None else int(round(T / config.dt))
    cfg = config.replace(n_steps=n)
    u0 = initial_state(cfg) if u0 is None else u0
    groups = [reps[i : i + GROUP_SIZE] for i in range(0, len(reps), GROUP_SIZE)]

    def work(g):
        return simulate_batch(cfg, _paths(cfg, n, g, seed), u0)

    with ThreadPoolExecutor(max_workers=workers or threads()) as pool:
        results = list(pool.map(work, groups))
    cols = {c: np.concatenate([r.diagnostics[c] for r in results], axis=1)
            for c in results[0].diagnostics}
    failed = np.concatenate([r.failed for r in results])
    reasons = sum((r.fail_reason for r in results), [])
    res = EnsembleResult(results[0].times, cols, failed, reasons, reps, seed, level)
    ok = ~failed
    k = int(ok.sum())
    q = sps.t.ppf(0.5 + level / 2, k - 1) if k > 1 else np.nan
    for c, x in cols.items():
        x = x[:, ok]
        res.mean[c] = x.mean(axis=1) if k else np.full(x.shape[0], np.nan)
        res.var[c] = x.var(axis=1, ddof=1) if k > 1 else np.full(x.shape[0], np.nan)
        res.half_width[c] = q * np.sqrt(res.var[c] / k) if k > 1 else res.var[c]
    return res


# enstrophy plateau ------------------------------------------------------------


@dataclass(frozen=True)
class PlateauEstimate:
    quantity: str
    estimate: stats.Estimate
    drift: stats.Estimate
    plateaued: bool
    finite: bool
    per_replicate: np.ndarray

    def summary(self):
        return {
            "quantity": self.quantity,
            "plateau": self.estimate.as_dict(),
            "half_drift": self.drift.as_dict(),
            "plateaued": self.plateaued,
            "finite": self.finite,
        }


def enstrophy_asymptotics(ensemble, burn_in, quantity="enstrophy", level=0.95):
    """Plateau of the ensemble mean after ``burn_in``.

    Each surviving replicate contributes its time average, so replicates are
    independent samples.  The drift estimate compares the two halves of the
    window replicate by replicate; a drift outside its interval flags a
    series that has not plateaued.
    """
    t = ensemble.times
    if t[-1] < 3 * burn_in:
        raise ValueError("horizon must be at least three times the burn-in")
    x = ensemble.columns[quantity][:, ~ensemble.failed]
    w = x[t >= burn_in]
    per = w.mean(axis=0)
    h = w.shape[0] // 2
    drift_r = w[h:].mean(axis=0) - w[:h].mean(axis=0)
    finite = bool(np.all(np.isfinite(per)))
    if per.size > 1:
        est = stats.sample_mean(per, level)
        drift = stats.sample_mean(drift_r, level)
    else:
        est = stats.Estimate(float(per.mean()), 0.0, 0.0, level)
        drift = stats.Estimate(float(drift_r.mean()), 0.0, 0.0, level)
    if drift.se == 0.0:
        plateaued = abs(drift.mean) <= 1e-12 * max(abs(est.mean), 1e-300)
    else:
        plateaued = abs(drift.mean) <= drift.half_width
    return PlateauEstimate(quantity, est, drift, bool(plateaued), finite, per)


@dataclass(frozen=True)
class SweepResult:
    traces: np.ndarray
    plateaus: list
    increments: list
    nondecreasing: bool
    slope: float
    intercept: float
    r_squared: float
    finite: bool

    @property
    def passed(self):
        return self.finite and self.nondecreasing and self.r_squared >= 0.9

    def summary(self):
        return {
            "trace_Q": self.traces.tolist(),
            "plateaus": [p.summary() for p in self.plateaus],
            "paired_increments": [i.as_dict() for i in self.increments],
            "nondecreasing": self.nondecreasing,
            "affine_fit": {"intercept": self.intercept, "slope": self.slope,
                           "r_squared": self.r_squared},
            "finite": self.finite,
            "passed": self.passed,
        }


def enstrophy_sweep(config, traces, M, T, burn_in, quantity="enstrophy", level=0.95):
    """Plateaus over a sweep of tr Q, with common random numbers across points.

    Monotonicity is tested on paired per-replicate differences between
    successive sweep points: each mean increment must not be significantly
    negative.
    """
    traces = np.asarray(traces, dtype=float)
    base = config.covariance()
    decay = config.noise.decay
    k = np.arange(1, base.K + 1, dtype=float)
    norm = float(np.sum(k ** (-2.0 * decay)))
    plateaus = []
    for tq in traces:
        sigma = float(np.sqrt(tq / norm))
        cfg = config.replace(noise=_replace_noise(config.noise, sigma=sigma))
        ens = run_ensemble(cfg, M, T, level=level)
        plateaus.append(enstrophy_asymptotics(ens, burn_in, quantity, level))
    incs = [stats.sample_mean(b.per_replicate - a.per_replicate, level)
            for a, b in zip(plateaus, plateaus[1:])]
    nondec = all(i.mean >= -i.half_width for i in incs)
    y = np.array([p.estimate.mean for p in plateaus])
    fit = sps.linregress(traces, y)
    return SweepResult(traces, plateaus, incs, bool(nondec), float(fit.slope),
                       float(fit.intercept), float(fit.rvalue**2),
                       all(p.finite for p in plateaus))


def _replace_noise(noise, **changes):
    return replace(noise, **changes)


# synchronization -------------------------------------------------------------


@dataclass(frozen=True)
class SyncResult:
    times: np.ndarray
    distance: np.ndarray
    rho: float
    rho_se: float
    fit_residual: float
    n_fit: int
    threshold: float

    @property
    def decays(self):
        return bool(self.rho < -self.threshold)

    def summary(self):
        return {"rho": self.rho, "rho_se": self.rho_se, "fit_residual": self.fit_residual,
                "n_fit": self.n_fit, "d0": float(self.distance[0]),
                "d_final": float(self.distance[-1]), "decays": self.decays,
                "threshold": self.threshold}


def fit_decay(times, d, fit_start=0.0, floor=1e-12, threshold=0.0):
    """Least-squares fit of ``log d(t)`` after ``fit_start``, above ``floor * d(0)``."""
    times, d = np.asarray(times), np.asarray(d)
    if not d[0] > 0:
        raise ValueError("initial distance must be positive")
    use = (times >= fit_start) & (d > floor * d[0])
    if use.sum() < 3:
        raise ValueError("too few points above the floor to fit a rate")
    fit = sps.linregress(times[use], np.log(d[use]))
    resid = np.log(d[use]) - (fit.intercept + fit.slope * times[use])
    return SyncResult(times, d, float(fit.slope), float(fit.stderr),
                      float(np.sqrt(np.mean(resid**2))), int(use.sum()), threshold)


def synchronization_batch(config, u0_a, u0_b, paths, horizon, fit_start=None,
                          floor=1e-12, threshold=0.0):
    """Pairs of trajectories sharing one path each; returns one :class:`SyncResult` per path."""
    n = int(round(horizon / config.dt))
    cfg = config.replace(n_steps=n)
    P = len(paths)
    qa, Sa = _u0_arrays(u0_a, 1)
    qb, Sb = _u0_arrays(u0_b, 1)
    q = np.concatenate([np.repeat(qa, P, 0), np.repeat(qb, P, 0)])
    S = np.concatenate([np.repeat(Sa, P, 0), np.repeat(Sb, P, 0)])
    dist = []

    def observe(step, t, q, S):
        dist.append(np.sqrt(np.sum((q[:P] - q[P:]) ** 2 + (S[:P] - S[P:]) ** 2, axis=(-2, -1))))

    res = simulate_batch(cfg, list(paths) * 2, (q, S), observer=observe)
    dist = np.array(dist)
    start = 0.1 * horizon if fit_start is None else fit_start
    out = []
    for j in range(P):
        if res.failed[j] or res.failed[P + j]:
            out.append(SyncResult(res.times, dist[:, j], float("nan"), float("nan"),
                                  float("nan"), 0, threshold))
        else:
            out.append(fit_decay(res.times, dist[:, j], start, floor, threshold))
    return out


def synchronization_test(config, u0_a, u0_b, path, horizon, **kw):
    if np.array_equal(_u0_arrays(u0_a, 1)[0], _u0_arrays(u0_b, 1)[0]) and np.array_equal(
            _u0_arrays(u0_a, 1)[1], _u0_arrays(u0_b, 1)[1]):
        n = int(round(horizon / config.dt)) // config.output_every + 1
        t = config.dt * config.output_every * np.arange(n)
        return SyncResult(t, np.zeros(n), float("-inf"), 0.0, 0.0, 0, kw.get("threshold", 0.0))
    return synchronization_batch(config, u0_a, u0_b, [path], horizon, **kw)[0]


def synchronization_sweep(config, name, values, seeds, horizon, u0_a=None, u0_b=None):
    """Fraction of seeds whose two trajectories synchronise, per parameter value."""
    rows = []
    for v in values:
        cfg = config.replace(**{name: v})
        a = initial_state(cfg) if u0_a is None else u0_a
        b = perturbed_state(a) if u0_b is None else u0_b
        n = int(round(horizon / cfg.dt))
        ps = [sample_path(cfg.covariance(), cfg.dt, 0.0, n, s, 0) for s in seeds]
        res = synchronization_batch(cfg, a, b, ps, horizon)
        rows.append({name: v, "fraction": float(np.mean([r.decays for r in res])),
                     "rho": [r.rho for r in res]})
    return rows


def perturbed_state(u, seed=1, h_norm=None):
    """A second initial condition with independent random content of equal H-norm."""
    norm = float(np.sqrt(u.q.norm_sq() + u.S.norm_sq())) if h_norm is None else h_norm
    cfg = from_dict({"Ra": 0.0, "nx": u.nx, "nz": u.nz,
                     "initial": {"kind": "random", "h_norm": norm or 1.0, "seed": seed}})
    return initial_state(cfg)


# pullback ---------------------------------------------------------------------


@dataclass(frozen=True)
class PullbackResult:
    windows: np.ndarray
    states_q: np.ndarray
    states_S: np.ndarray
    successive: np.ndarray
    spread: np.ndarray
    obs_time: float

    def summary(self):
        return {"windows": self.windows.tolist(), "obs_time": self.obs_time,
                "successive_distances": self.successive.tolist(),
                "initial_condition_spread": self.spread.tolist()}


def pullback_run(config, windows, path, u0s=None, obs_step=0):
    """States ``phi(T_j + t, theta_{-T_j} w, u0)`` at observation time ``t = obs_step dt``.

    One batched run from ``-T_max``: trajectory ``j`` is (re)started from
    ``u0`` when the clock reaches ``-T_j``.  ``successive[i, j]`` is the
    H-distance between windows ``j`` and ``j + 1`` for initial condition
    ``i``; ``spread[j]`` is the largest distance between initial conditions.
    """
    windows = np.sort(np.asarray(windows, dtype=float))
    steps = np.rint(windows / config.dt).astype(int)
    if np.any(np.abs(steps * config.dt - windows) > 1e-9 * np.maximum(windows, config.dt)):
        raise ValueError("windows must be multiples of dt")
    u0s = [initial_state(config)] if u0s is None else list(u0s)
    nmax = int(steps[-1])
    n_w, n_u = len(steps), len(u0s)
    B = n_w * n_u
    q0 = np.stack([u.q.coeffs for u in u0s for _ in steps])
    S0 = np.stack([u.S.coeffs for u in u0s for _ in steps])
    activate = {}
    for i, u in enumerate(u0s):
        for j, n in enumerate(steps):
            activate.setdefault(nmax - int(n), []).append((i * n_w + j, u.q.coeffs, u.S.coeffs))
    cfg = config.replace(n_steps=nmax + obs_step)
    res = simulate_batch(cfg, [path] * B, (q0, S0), t0=-nmax * config.dt, first_step=-nmax,
                         strict=True, activate=activate)
    qs = res.final_q.reshape(n_u, n_w, config.nx, config.nz)
    Ss = res.final_S.reshape(n_u, n_w, config.nx, config.nz)

    def dist(a, b, c, d):
        return np.sqrt(np.sum((a - b) ** 2 + (c - d) ** 2, axis=(-2, -1)))

    succ = dist(qs[:, 1:], qs[:, :-1], Ss[:, 1:], Ss[:, :-1])
    spread = np.zeros(n_w)
    for a in range(n_u):
        for b in range(a + 1, n_u):
            spread = np.maximum(spread, dist(qs[a], qs[b], Ss[a], Ss[b]))
    return PullbackResult(windows, qs, Ss, succ, spread, obs_step * config.dt)


def pullback_forward_consistency(config, window, path, u0=None, t=1.0):
    """``|phi(t, w, v*(w)) - v*(theta_t w)|_H`` with ``v*`` the pullback state for ``window``."""
    n_t = int(round(t / config.dt))
    u0s = None if u0 is None else [u0]
    star = pullback_run(config, [window], path, u0s)
    star = StateU.from_arrays(star.states_q[0, 0], star.states_S[0, 0])
    fwd = simulate_batch(config.replace(n_steps=n_t), [path], star, strict=True)
    later = pullback_run(config, [window], wiener_shift(path, n_t * config.dt), u0s)
    return float(np.sqrt(np.sum((fwd.final_q[0] - later.states_q[0, 0]) ** 2
                                + (fwd.final_S[0] - later.states_S[0, 0]) ** 2)))


# ergodicity ------------------------------------------------------------------


@dataclass(frozen=True)
class ErgodicityReport:
    quantities: dict
    T_long: float
    M: int
    t_obs: float
    burn_in: float
    n_batches: int
    seed: int

    @property
    def passed(self):
        e = self.quantities["enstrophy"]
        return e["time_vs_ensemble"]["within"] and e["halves"]["within"]

    def summary(self):
        return {"T_long": self.T_long, "M": self.M, "t_obs": self.t_obs,
                "burn_in": self.burn_in, "n_batches": self.n_batches, "seed": self.seed,
                "quantities": self.quantities, "passed": self.passed}


def ergodicity_gap(config, T_long, M, t_obs, burn_in, n_batches=20, level=0.95,
                   quantities=("enstrophy", "ms_salinity")):
    """Time average over one long path against the ensemble average at ``t_obs``.

    The long path is replicate ``M`` of the master seed, disjoint from the
    ensemble's replicates ``0..M-1``.
    """
    if M < 2:
        raise ValueError("ensemble CI needs M >= 2")
    if t_obs < burn_in or T_long <= burn_in:
        raise ValueError("burn-in must precede the observation windows")
    n_long = int(round(T_long / config.dt))
    cfg = config.replace(n_steps=n_long)
    long_run = simulate_batch(cfg, _paths(cfg, n_long, [M], config.seed), initial_state(cfg),
                              strict=True)
    ens = run_ensemble(config, M, t_obs, level=level)
    keep = long_run.times >= burn_in
    out = {}
    for c in quantities:
        series = long_run.diagnostics[c][keep, 0]
        ta = stats.batch_means(series, n_batches, level)
        ea = stats.sample_mean(ens.columns[c][-1][~ens.failed], level)
        h = series.size // 2
        first = stats.batch_means(series[:h], n_batches // 2, level)
        second = stats.batch_means(series[h:], n_batches // 2, level)
        out[c] = {
            "time_average": ta.as_dict(),
            "ensemble_average": ea.as_dict(),
            "time_vs_ensemble": stats.compare(ta, ea, level).as_dict(),
            "halves": stats.compare(first, second, level).as_dict(),
        }
    return ErgodicityReport(out, T_long, M, t_obs, burn_in, n_batches, config.seed)


# dissipativity -----------------------------------------------------------------


@dataclass(frozen=True)
class AbsorbingExperiment:
    alpha: float
    seeds: list
    h_norms: list
    entry_times: np.ndarray
    remained: np.ndarray
    radius0: np.ndarray
    horizon: float
    band: float

    @property
    def passed(self):
        return bool(np.all(self.entry_times <= self.horizon) and np.all(self.remained))

    def summary(self):
        return {"alpha": self.alpha, "seeds": list(self.seeds), "h_norms": list(self.h_norms),
                "entry_times": self.entry_times.tolist(), "remained": self.remained.tolist(),
                "radius0": self.radius0.tolist(), "horizon": self.horizon, "band": self.band,
                "passed": self.passed}


def absorbing_experiment(config, seeds, h_norms, horizon=20.0, band=0.05, alpha=None,
                         pre_window=None):
    """Every ``(seed, initial condition)`` run must enter ``{L <= R(t)}`` and stay in the band.

    ``R(t)`` is the pathwise pullback radius, started from its value at ``t = 0``
    (quadrature over ``[-pre_window, 0]``) and propagated along the sampled
    ``|eta|^2`` series.  All initial conditions of one seed share its path.
    """
    alpha = absorbing_alpha(config) if alpha is None else alpha
    pre = pre_window or 40.0 / alpha
    n = int(round(horizon / config.dt))
    cfg = config.replace(n_steps=n)
    cov = cfg.covariance()
    u0s = [initial_state(cfg.replace(initial=_replace_noise(cfg.initial, kind="random",
                                                            h_norm=h, seed=i)))
           for i, h in enumerate(h_norms)]
    entry = np.empty((len(seeds), len(h_norms)))
    remained = np.empty((len(seeds), len(h_norms)), dtype=bool)
    r0s = []
    for si, s in enumerate(seeds):
        p = sample_path(cov, cfg.dt, 0.0, n, s, 0)
        r0, _ = absorbing_radius(p, cov, alpha, pre,
                                 cfg.nx, cfg.nz, cfg.Pr, LAMBDA2)
        r0s.append(r0)
        q = np.stack([u.q.coeffs for u in u0s])
        S = np.stack([u.S.coeffs for u in u0s])
        res = simulate_batch(cfg, [p] * len(u0s), (q, S), strict=True)
        dt_out = cfg.dt * cfg.output_every
        R = radius_series(res.diagnostics["eta_norm_sq"][:, 0], dt_out, alpha, LAMBDA2, r0)
        rep = diag.absorbing_check(res.times, res.diagnostics["lyapunov"], R, band, horizon)
        entry[si] = rep.entry_times
        remained[si] = rep.remained
    return AbsorbingExperiment(float(alpha), list(seeds), list(h_norms), entry, remained,
                               np.array(r0s), horizon, band)


# JSON ---------------------------------------------------------------------------


def _plain(obj):
    if is_dataclass(obj):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def summary_document(experiment, config, seeds, result, passed=None):
    """JSON-ready summary: config echo, seeds, estimates and the verdict."""
    doc = {
        "experiment": experiment,
        "config": config.to_dict(),
        "rng": RNG_ALGORITHM,
        "covariance_family": config.covariance().family,
        "seeds": list(seeds),
        "result": result.summary() if hasattr(result, "summary") else result,
    }
    if passed is not None:
        doc["passed"] = bool(passed)
    return _plain(doc)


def dumps(doc):
    return json.dumps(_plain(doc), indent=2, sort_keys=True)


def zero_noise(config):
    """``config`` with Q = 0 and F = 0."""
    return config.replace(noise=_replace_noise(config.noise, sigma=0.0, flux_amplitude=0.0,
                                               eigenvalues=None, flux=None))


def direct(config):
    return config.replace(formulation=Formulation.DirectU)


__all__ = [
    "CovarianceSpec",
    "EnsembleResult",
    "SyncResult",
    "PullbackResult",
    "ErgodicityReport",
    "SweepResult",
    "PlateauEstimate",
    "AbsorbingExperiment",
    "default_small_config",
    "regime_report",
    "absorbing_alpha",
    "run_ensemble",
    "enstrophy_asymptotics",
    "enstrophy_sweep",
    "fit_decay",
    "synchronization_test",
    "synchronization_batch",
    "synchronization_sweep",
    "perturbed_state",
    "pullback_run",
    "pullback_forward_consistency",
    "ergodicity_gap",
    "absorbing_experiment",
    "summary_document",
    "dumps",
    "zero_noise",
    "threads",
]
