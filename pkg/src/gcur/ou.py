"""Ornstein-Uhlenbeck boundary homogenizer for the salinity flux.

``eta`` solves the heat equation ``d eta/dt = (1/Pr) Laplacian eta`` with the
stochastic inlet flux and homogeneous Neumann data elsewhere.  In the cosine
Galerkin basis, integration by parts against ``c_m(x) c_k(z)`` turns the
inlet flux ``g(z) = sum_k g_k e_k(z)`` into the forcing ``gamma_m g_k`` with
``gamma_m = -c_m(0)``, i.e. ``-1`` for ``m = 0`` and ``-sqrt(2)`` otherwise.
Every coefficient is then a scalar OU process, and all ``m`` sharing the same
``k`` are driven by the same Brownian motion ``beta_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, signal

from .noise import WindowError
from .spectral import Basis, SpectralField, discretization

__all__ = [
    "boundary_gamma",
    "neumann_map",
    "OuState",
    "OuStationaryStats",
    "OuStepper",
    "ou_exact_step",
    "stationary_stats",
    "dissipativity_margin",
    "absorbing_radius",
    "radius_series",
    "stationary_burn_time",
]


def boundary_gamma(nx):
    g = np.full(nx, -np.sqrt(2.0))
    g[0] = -1.0
    return g


def _resolved(cov, nz):
    """Eigenvalues and flux restricted to modes representable in ``nz`` cosines."""
    kmax = min(cov.K, nz - 1)
    q = np.zeros(nz)
    f = np.zeros(nz)
    q[1 : kmax + 1] = cov.eigenvalues[:kmax]
    f[1 : kmax + 1] = cov.flux[:kmax]
    return q, f, kmax


def neumann_map(g, nx, nz):
    """Zero-mean harmonic field whose inlet flux ``d_x h(0, z)`` is ``g``.

    ``g[k]`` is the coefficient against ``c_k(z)``, ``k = 0, 1, ...``; the
    remaining three sides carry zero flux.  The returned coefficients are the
    exact L2 projections ``gamma_m g_k / ((m^2 + k^2) pi^2)`` of the harmonic
    function, obtained from Green's identity against each basis mode.
    """
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if g.size and g[0] != 0.0:
        raise ValueError("flux has a nonzero mean component (k = 0); no Neumann solution")
    d = discretization(nx, nz)
    gk = np.zeros(nz)
    n = min(nz, g.size)
    gk[:n] = g[:n]
    mu = d.mu_cosine.copy()
    mu[0, 0] = 1.0
    h = boundary_gamma(nx)[:, None] * gk[None, :] / mu
    h[0, 0] = 0.0
    return SpectralField(Basis.NeumannCosine, h)


@dataclass(frozen=True, eq=False)
class OuState:
    eta1: SpectralField
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class OuStationaryStats:
    mean: SpectralField
    variances: np.ndarray
    mean_sq_norm: float


class OuStepper:
    """Exact per-mode OU transition for one ``(nx, nz, Pr, dt, cov)``.

    The deterministic flux enters through the exact heat-semigroup integral.
    The stochastic term uses one shared increment per ``k`` with a per-mode
    weight that reproduces the exact transition variance of every coefficient.
    """

    def __init__(self, disc, cov, Pr, dt):
        self.disc, self.cov, self.Pr, self.dt = disc, cov, float(Pr), float(dt)
        kappa = 1.0 / self.Pr
        q, f, self.kmax = _resolved(cov, disc.nz)
        mu = kappa * disc.mu_cosine
        a = np.exp(-mu * dt)
        safe = np.where(mu > 0, mu, 1.0)
        det = np.where(mu > 0, -np.expm1(-mu * dt) / safe, dt)
        sto = np.where(mu > 0, np.sqrt(-np.expm1(-2 * mu * dt) / (2 * safe * dt)), 1.0)
        coupling = kappa * boundary_gamma(disc.nx)[:, None]
        self.decay = a
        self.mean_drive = coupling * f[None, :] * det
        self.noise_gain = coupling * np.sqrt(q)[None, :] * sto
        # only k = 1..kmax columns are driven; column 0 never is
        self.noise_gain[:, 0] = 0.0
        self.mean_drive[:, 0] = 0.0
        self.mu = mu

    def drive(self, dbeta):
        """Forcing part of one step for increments ``dbeta`` of shape ``(..., K)``."""
        db = np.zeros(dbeta.shape[:-1] + (self.disc.nz,))
        db[..., 1 : self.kmax + 1] = dbeta[..., : self.kmax]
        return self.mean_drive + self.noise_gain * db[..., None, :]

    def step(self, eta, dbeta):
        return self.decay * eta + self.drive(dbeta)

    def run(self, eta, path, first_step, n_steps, chunk=4096):
        """Advance ``eta`` over ``n_steps`` steps of ``path`` (batched over paths)."""
        paths = path if isinstance(path, (list, tuple)) else None
        done = 0
        while done < n_steps:
            n = min(chunk, n_steps - done)
            if paths is None:
                inc = path.window(first_step + done, n)
                for i in range(n):
                    eta = self.step(eta, inc[i])
            else:
                inc = np.stack([p.window(first_step + done, n) for p in paths], axis=1)
                for i in range(n):
                    eta = self.step(eta, inc[i])
            done += n
        return eta

    def series(self, path, first_step, n_steps, modes, eta0=None):
        """Coefficient time series for selected ``(m, k)`` modes by linear filtering.

        Returns an array ``(n_steps + 1, len(modes))`` starting at ``eta0``.
        """
        inc = path.window(first_step, n_steps)
        out = np.empty((n_steps + 1, len(modes)))
        for j, (m, k) in enumerate(modes):
            if not 1 <= k <= self.kmax:
                drive = np.full(n_steps, self.mean_drive[m, k])
            else:
                drive = self.mean_drive[m, k] + self.noise_gain[m, k] * inc[:, k - 1]
            x0 = 0.0 if eta0 is None else float(eta0[m, k])
            a = self.decay[m, k]
            y, _ = signal.lfilter([1.0], [1.0, -a], drive, zi=[a * x0])
            out[0, j] = x0
            out[1:, j] = y
        return out


def stationary_burn_time(Pr, rel=1e-17):
    """Pre-history length after which the slowest OU mode has forgotten its start."""
    return -np.log(rel) * Pr / np.pi**2


def ou_exact_step(state, cov, path, step, dt, Pr=1.0):
    if abs(path.dt - dt) > 1e-15 * dt:
        raise ValueError("path and step use different dt")
    if not path.covers(step):
        raise WindowError(f"step {step} outside path window")
    d = state.eta1.disc
    st = OuStepper(d, cov, Pr, dt)
    eta = st.step(state.eta1.coeffs, path.window(step, 1)[0])
    return OuState(SpectralField(Basis.NeumannCosine, eta), state.t + dt)


def stationary_stats(cov, nx, nz, Pr=1.0):
    """Stationary mean ``h_F``, per-coefficient variances and ``E |eta|^2``.

    ``v_mk = gamma_m^2 q_k / (2 mu_mk)``, with the ``1/Pr`` diffusivity folded
    into both ``gamma`` and ``mu``.  Coefficients are orthonormal, so
    ``E |eta|^2 = |h_F|^2 + sum v_mk``.
    """
    d = discretization(nx, nz)
    q, f, _ = _resolved(cov, nz)
    h = neumann_map(np.concatenate([[0.0], f[1:]]), nx, nz)
    kappa = 1.0 / Pr
    mu = kappa * d.mu_cosine.copy()
    mu[0, 0] = 1.0
    var = (kappa * boundary_gamma(nx)[:, None]) ** 2 * q[None, :] / (2.0 * mu)
    var[0, 0] = 0.0
    return OuStationaryStats(h, var, float(h.norm_sq() + var.sum()))


def dissipativity_margin(params, cov, lambda1, lambda2, nx=64, nz=64):
    """``1/(Ra^2 lambda2^2) - 2 lambda1^2 E|eta|^2``; ``inf`` when Ra = 0."""
    if params.Ra == 0:
        return np.inf
    e = stationary_stats(cov, nx, nz, params.Pr).mean_sq_norm
    return 1.0 / (params.Ra**2 * lambda2**2) - 2.0 * lambda1**2 * e


def radius_series(eta_norm_sq, dt, alpha, lambda2, r0=0.0):
    """Running pullback radius ``R(t) = 2 int_{-inf}^t e^{-alpha(t-s)} |eta(s)|^2 / lambda2^2 ds``.

    Trapezoidal rule on the sampled series; ``r0`` is the radius at the first
    sample.
    """
    e = np.asarray(eta_norm_sq, dtype=float)
    a = np.exp(-alpha * dt)
    w = 2.0 / lambda2**2 * 0.5 * dt
    drive = w * (a * e[:-1] + e[1:])
    out = np.empty(e.shape)
    out[0] = r0
    if e.shape[0] > 1:
        zi = np.asarray(a * r0).reshape((1,) + e.shape[1:])
        out[1:], _ = signal.lfilter([1.0], [1.0, -a], drive, axis=0, zi=zi)
    return out


def absorbing_radius(path, cov, alpha, T, nx, nz, Pr=1.0, lambda2=np.pi, tail_tol=None):
    """Finite-window quadrature of ``R_1(omega) = 2 int_{-T}^0 e^{alpha s} |eta(s)|^2 / lambda2^2 ds``.

    ``eta`` is the stationary OU field along the two-sided ``path``, started
    from its own pre-history.  Returns ``(R, tail_bound)`` where the bound
    covers the discarded part ``s < -T``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    n = int(round(T / path.dt))
    d = discretization(nx, nz)
    st = OuStepper(d, cov, Pr, path.dt)
    nb = int(np.ceil(stationary_burn_time(Pr) / path.dt))
    if not path.covers(-n - nb, n + nb):
        if not path.generable:
            raise WindowError(f"path must cover [{-n - nb}, 0) including the burn-in")
        path = path.extend(-n - nb, 0)
    eta = st.run(np.zeros((nx, nz)), path, -n - nb, nb)
    norms = np.empty(n + 1)
    norms[0] = np.sum(eta**2)
    inc = path.window(-n, n)
    for i in range(n):
        eta = st.step(eta, inc[i])
        norms[i + 1] = np.sum(eta**2)
    s = path.dt * np.arange(-n, 1)
    wts = np.exp(alpha * s)
    R = 2.0 / lambda2**2 * integrate.trapezoid(wts * norms, dx=path.dt)
    tail = 2.0 * np.exp(-alpha * n * path.dt) * norms.max() / (alpha * lambda2**2)
    if tail_tol is not None and tail > tail_tol * max(R, np.finfo(float).tiny):
        raise ValueError(f"window T={T} too short: tail bound {tail:.3e} exceeds tolerance")
    return R, tail
