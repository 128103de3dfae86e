"""Time stepping in the homogenized (v) and direct (u) formulations.

Both schemes integrate diffusion exactly with the factor ``exp(-mu dt)`` and
treat advection and buoyancy explicitly (integrating-factor Euler).  The
direct form adds the inlet flux as a Galerkin boundary forcing with an
Euler-Maruyama increment; the homogenized form moves that forcing into the
exact OU process ``eta`` and advances ``v = u - eta``.

Internally every state is a pair of coefficient arrays with a leading batch
axis, so a single trajectory is a batch of one.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics as diag
from .config import Formulation
from .noise import CovarianceSpec, WindowError, wiener_shift
from .ou import OuState, OuStepper, boundary_gamma, stationary_burn_time
from .spectral import StateU, discretization

__all__ = [
    "BlowUpError",
    "CFLError",
    "Stepper",
    "Trajectory",
    "BatchResult",
    "step_v",
    "step_u_direct",
    "initial_state",
    "stationary_eta",
    "simulate",
    "simulate_batch",
    "verify_cocycle",
]

LAMBDA1 = np.sqrt(2.0) * np.pi
LAMBDA2 = np.pi
BLOWUP_FACTOR = 1e6


class BlowUpError(RuntimeError):
    def __init__(self, message, step=None, t=None, norm=None):
        super().__init__(message)
        self.step, self.t, self.norm = step, t, norm


class CFLError(RuntimeError):
    """Advective CFL bound ``dt * max|u| <= cfl * min(dx, dz)`` violated."""


class Stepper:
    """Precomputed factors for one ``(resolution, params, covariance, dt)``."""

    def __init__(self, nx, nz, params, cov, dt, cfl=1.0):
        self.disc = d = discretization(nx, nz)
        self.params, self.cov, self.dt, self.cfl = params, cov, float(dt), float(cfl)
        kappa = 1.0 / params.Pr
        self.aq = np.exp(-d.mu_sine * dt)
        self.aS = np.exp(-kappa * d.mu_cosine * dt)
        self.ou = OuStepper(d, cov, params.Pr, dt)
        kmax = self.ou.kmax
        self.kmax = kmax
        self.coupling = kappa * boundary_gamma(nx)[:, None]
        self.flux = np.zeros(nz)
        self.flux[1 : kmax + 1] = cov.flux[:kmax]
        self.sqrt_q = np.zeros(nz)
        self.sqrt_q[1 : kmax + 1] = np.sqrt(cov.eigenvalues[:kmax])
        self.speed_limit = self.cfl * min(1.0 / d.Mx, 1.0 / d.Mz) / self.dt

    def _tendency(self, q, S):
        nq, ns, speed = self.disc.f1(q, S)
        nq = nq + self.disc.f2(S, self.params.Ra)
        return nq, ns, speed

    def boundary_increment(self, dbeta):
        """``kappa gamma_m (f_k dt + sqrt(q_k) dbeta_k)`` for increments ``(..., K)``."""
        db = np.zeros(dbeta.shape[:-1] + (self.disc.nz,))
        db[..., 1 : self.kmax + 1] = dbeta[..., : self.kmax]
        g = self.flux * self.dt + self.sqrt_q * db
        return self.coupling * g[..., None, :]

    def step_v(self, vq, vS, eta):
        """Returns ``(vq, vS, speed)`` after one step with ``u = v + eta``."""
        nq, ns, speed = self._tendency(vq, vS + eta)
        return self.aq * (vq + self.dt * nq), self.aS * (vS + self.dt * ns), speed

    def step_u(self, q, S, dbeta):
        nq, ns, speed = self._tendency(q, S)
        S = self.aS * (S + self.dt * ns + self.boundary_increment(dbeta))
        return self.aq * (q + self.dt * nq), S, speed

    def cfl_ok(self, speed):
        return np.asarray(speed) <= self.speed_limit


def _require_cfl(stepper, speed):
    if not np.all(stepper.cfl_ok(speed)):
        raise CFLError(
            f"max speed {float(np.max(speed)):.3e} exceeds CFL limit "
            f"{stepper.speed_limit:.3e} (cfl={stepper.cfl}, dt={stepper.dt})"
        )


def step_v(v, eta, params, dt, cfl=1.0):
    """One homogenized step of ``v`` given the boundary homogenizer ``eta``."""
    e = eta.eta1.coeffs if isinstance(eta, OuState) else getattr(eta, "coeffs", eta)
    st = _stepper(v.nx, v.nz, params, None, dt, cfl)
    q, S, speed = st.step_v(v.q.coeffs, v.S.coeffs, e)
    _require_cfl(st, speed)
    return StateU.from_arrays(q, S)


def step_u_direct(u, cov, path, step, params, dt, cfl=1.0):
    """One direct step driven by increment ``step`` of ``path``."""
    if abs(path.dt - dt) > 1e-15 * dt:
        raise ValueError("path and step use different dt")
    db = path.window(step, 1)[0]
    st = _stepper(u.nx, u.nz, params, cov, dt, cfl)
    q, S, speed = st.step_u(u.q.coeffs, u.S.coeffs, db)
    _require_cfl(st, speed)
    return StateU.from_arrays(q, S)


def _stepper(nx, nz, params, cov, dt, cfl):
    return Stepper(nx, nz, params, cov if cov is not None else CovarianceSpec.zero(), dt, cfl)


# initial conditions ---------------------------------------------------------


def initial_state(cfg):
    """Build ``u0`` from ``cfg.initial`` at the configured resolution."""
    ic, nx, nz = cfg.initial, cfg.nx, cfg.nz
    q = np.zeros((nx, nz))
    S = np.zeros((nx, nz))
    if ic.kind == "eigenmode":
        if ic.field == "q":
            # amplitude of A sin(m pi x) sin(k pi z); basis functions carry a factor 2
            q[ic.m - 1, ic.k - 1] = 0.5 * ic.amplitude
        else:
            w = (np.sqrt(2.0) if ic.m else 1.0) * (np.sqrt(2.0) if ic.k else 1.0)
            S[ic.m, ic.k] = ic.amplitude / w
    elif ic.kind == "random":
        rng = np.random.default_rng(ic.seed)
        b = ic.bandwidth
        ms = np.arange(1, nx + 1)[:, None]
        ks = np.arange(1, nz + 1)[None, :]
        env = ((ms <= b) & (ks <= b)) / (ms**2 + ks**2)
        q = rng.standard_normal((nx, nz)) * env
        mc = np.arange(nx)[:, None]
        kc = np.arange(nz)[None, :]
        envc = ((mc < b) & (kc < b)) / (1.0 + mc**2 + kc**2)
        S = rng.standard_normal((nx, nz)) * envc
        S[0, 0] = 0.0
        norm = np.sqrt(np.sum(q**2) + np.sum(S**2))
        q, S = q * ic.h_norm / norm, S * ic.h_norm / norm
    return StateU.from_arrays(q, S)


def stationary_eta(stepper, path, chunk=4096):
    """``eta`` at relative step 0, integrated from zero over the path's own pre-history.

    The result depends on the noise only, so ``eta(theta_t omega)`` is a
    functional of the shifted path as the cocycle structure requires.
    Accepts a single path or a list (batched result).
    """
    nb = int(np.ceil(stationary_burn_time(stepper.params.Pr) / stepper.dt))
    paths = path if isinstance(path, (list, tuple)) else [path]
    paths = [_ensure(p, -nb, 0) for p in paths]
    eta = np.zeros((len(paths), stepper.disc.nx, stepper.disc.nz))
    eta = stepper.ou.run(eta, list(paths), -nb, nb, chunk=chunk)
    return eta if isinstance(path, (list, tuple)) else eta[0]


def _ensure(path, lo, hi):
    if path.covers(lo, hi - lo):
        return path
    if not path.generable:
        raise WindowError(f"path does not cover steps [{lo}, {hi}) and cannot be extended")
    return path.extend(lo, hi)


# trajectories ---------------------------------------------------------------


@dataclass(eq=False)
class Trajectory:
    """Output of :func:`simulate`; ``states`` holds ``u`` at the recorded times."""

    times: np.ndarray
    diagnostics: dict
    states: list
    etas: list
    final: StateU
    final_eta: np.ndarray | None
    config_hash: str
    seed: int
    replicate: int
    formulation: str
    meta: dict = field(default_factory=dict)

    def records(self):
        n = len(self.times)
        partial = self.meta.get("lyapunov_partial", False)
        for i in range(n):
            yield diag.DiagnosticsRecord(
                **{c: float(self.diagnostics[c][i]) for c in diag.CSV_COLUMNS},
                lyapunov_partial=partial,
            )

    def digest(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.times).tobytes())
        for c in diag.CSV_COLUMNS:
            h.update(np.ascontiguousarray(self.diagnostics[c]).tobytes())
        for s in self.states:
            h.update(s.q.coeffs.tobytes())
            h.update(s.S.coeffs.tobytes())
        h.update(self.final.q.coeffs.tobytes())
        h.update(self.final.S.coeffs.tobytes())
        return h.hexdigest()


@dataclass(eq=False)
class BatchResult:
    """Vectorised run: diagnostic columns have shape ``(n_records, B)``."""

    times: np.ndarray
    diagnostics: dict
    final_q: np.ndarray
    final_S: np.ndarray
    final_eta: np.ndarray | None
    failed: np.ndarray
    fail_reason: list
    fail_time: np.ndarray
    snapshots: dict = field(default_factory=dict)

    def final_state(self, j):
        return StateU.from_arrays(self.final_q[j], self.final_S[j])


def _increments(paths, step, n):
    return np.stack([p.window(step, n) for p in paths], axis=1)


def _run(stepper, formulation, q, S, eta, paths, n_steps, output_every, t0=0.0,
         first_step=0, strict=True, snapshot_steps=(), chunk=2048, activate=None,
         observer=None):
    """Core loop over a batch; returns a :class:`BatchResult`.

    ``strict`` raises on blow-up or CFL violation; otherwise the affected
    replicate is frozen and flagged.  ``activate`` maps a relative step to a
    list of ``(index, q0, S0)`` tuples whose states are (re)set at that step.
    ``observer(step, t, q, S)`` is called at every recorded step.
    """
    B = q.shape[0]
    dt = stepper.dt
    Ra = stepper.params.Ra
    homog = formulation == Formulation.HomogenizedV
    if homog:
        vq, vS = q, S - eta
    scale0 = np.maximum(np.sqrt(np.sum(q**2 + S**2, axis=(-2, -1))), 1.0)
    failed = np.zeros(B, dtype=bool)
    reason = [""] * B
    fail_time = np.full(B, np.nan)
    n_rec = n_steps // output_every + 1
    cols = {c: np.empty((n_rec, B)) for c in diag.CSV_COLUMNS + diag.AUX_COLUMNS}
    snaps = {}

    def store(i, t, uq, uS, e):
        rec = diag.record_arrays(t, uq, uS, e, Ra, LAMBDA2)
        for c in cols:
            cols[c][i] = rec[c]

    store(0, t0, q, S, eta if homog else None)
    if observer is not None:
        observer(0, t0, q, S)
    if 0 in snapshot_steps:
        snaps[0] = (q.copy(), S.copy())
    done = 0
    while done < n_steps:
        n = min(chunk, n_steps - done)
        inc = _increments(paths, first_step + done, n)
        for i in range(n):
            step = done + i
            if activate and step in activate:
                for j, q0, S0 in activate[step]:
                    if homog:
                        vq[j], vS[j] = q0, S0 - eta[j]
                    else:
                        q[j], S[j] = q0, S0
            if homog:
                nvq, nvS, speed = stepper.step_v(vq, vS, eta)
                neta = stepper.ou.step(eta, inc[i])
                nq, nS = nvq, nvS + neta
            else:
                nq, nS, speed = stepper.step_u(q, S, inc[i])
            bad_cfl = ~stepper.cfl_ok(speed) & ~failed
            norm = np.sqrt(np.sum(nq**2 + nS**2, axis=(-2, -1)))
            bad_blow = ~(norm <= BLOWUP_FACTOR * scale0) & ~failed
            t_new = t0 + (step + 1) * dt
            if np.any(bad_cfl | bad_blow):
                if strict:
                    j = int(np.flatnonzero(bad_cfl | bad_blow)[0])
                    if bad_blow[j]:
                        raise BlowUpError(
                            f"|u|_H = {norm[j]:.3e} exceeds {BLOWUP_FACTOR:g} x initial scale "
                            f"at t = {t_new:.6g} (step {step + 1})",
                            step=step + 1, t=t_new, norm=float(norm[j]))
                    _require_cfl(stepper, speed[j])
                for j in np.flatnonzero(bad_cfl | bad_blow):
                    failed[j] = True
                    reason[j] = "blowup" if bad_blow[j] else "cfl"
                    fail_time[j] = t_new
            keep = failed[:, None, None]
            if homog:
                vq = np.where(keep, vq, nvq)
                vS = np.where(keep, vS, nvS)
                eta = np.where(keep, eta, neta)
                q, S = vq, vS + eta
            else:
                q = np.where(keep, q, nq)
                S = np.where(keep, S, nS)
            if (step + 1) % output_every == 0:
                store((step + 1) // output_every, t_new, q, S, eta if homog else None)
                if observer is not None:
                    observer(step + 1, t_new, q, S)
            if step + 1 in snapshot_steps:
                snaps[step + 1] = (q.copy(), S.copy())
        done += n
    if n_rec > 1 and homog:
        cols["energy_residual"] = diag.energy_residual(cols, Ra, LAMBDA1, LAMBDA2)
    dead = cols["t"][:, failed] >= fail_time[failed]
    for c in cols:
        cols[c][:, failed] = np.where(dead, np.nan, cols[c][:, failed])
    times = t0 + dt * output_every * np.arange(n_rec)
    return BatchResult(times, cols, q, S, eta if homog else None, failed, reason,
                       fail_time, snaps)


def simulate(config, path, u0=None, eta0=None, keep_states=False, chunk=2048):
    """Deterministic map ``(config, path, u0) -> Trajectory``.

    ``eta0`` overrides the configured initial homogenizer (homogenized form
    only).  ``keep_states`` stores ``u`` at every recorded time.
    """
    if u0 is None:
        u0 = initial_state(config)
    if (u0.nx, u0.nz) != (config.nx, config.nz):
        u0 = u0.embed(config.nx, config.nz)
    st = Stepper(config.nx, config.nz, config.params, config.covariance(), config.dt, config.cfl)
    if abs(path.dt - config.dt) > 1e-15 * config.dt:
        raise ValueError(f"path dt {path.dt} differs from config dt {config.dt}")
    n = config.n_steps
    path = _ensure(path, 0, n) if n else path
    homog = config.formulation == Formulation.HomogenizedV
    eta = None
    if homog:
        if eta0 is not None:
            eta = np.asarray(getattr(eta0, "coeffs", eta0), dtype=float)[None]
        elif config.eta_init == "stationary":
            eta = stationary_eta(st, [path], chunk=chunk)
        else:
            eta = np.zeros((1, config.nx, config.nz))
    q = u0.q.coeffs[None].copy()
    S = u0.S.coeffs[None].copy()
    want = range(0, n + 1, config.output_every) if keep_states else ()
    res = _run(st, config.formulation, q, S, eta, [path], n, config.output_every,
               strict=True, snapshot_steps=set(want), chunk=chunk)
    diagn = {c: res.diagnostics[c][:, 0] for c in res.diagnostics}
    states = [StateU.from_arrays(res.snapshots[k][0][0], res.snapshots[k][1][0])
              for k in sorted(res.snapshots)]
    return Trajectory(
        times=res.times,
        diagnostics=diagn,
        states=states,
        etas=[],
        final=StateU.from_arrays(res.final_q[0], res.final_S[0]),
        final_eta=None if res.final_eta is None else res.final_eta[0],
        config_hash=config.digest(),
        seed=path.seed,
        replicate=path.replicate,
        formulation=config.formulation.value,
        meta={"lyapunov_partial": config.Ra == 0, "rng": path.meta.get("rng")},
    )


def simulate_batch(config, paths, u0, eta0=None, t0=0.0, first_step=0, strict=False,
                   snapshot_steps=(), chunk=1024, activate=None, observer=None):
    """Vectorised counterpart of :func:`simulate` over paths and/or initial states.

    ``u0`` is a :class:`StateU` (shared) or a pair of arrays ``(B, nx, nz)``.
    Failures freeze the replicate unless ``strict``.
    """
    st = Stepper(config.nx, config.nz, config.params, config.covariance(), config.dt, config.cfl)
    B = len(paths)
    if isinstance(u0, StateU):
        q = np.broadcast_to(u0.q.coeffs, (B, config.nx, config.nz)).copy()
        S = np.broadcast_to(u0.S.coeffs, (B, config.nx, config.nz)).copy()
    else:
        q, S = (np.array(a, dtype=float) for a in u0)
    n = config.n_steps
    paths = [_ensure(p, first_step, first_step + n) if n else p for p in paths]
    eta = None
    if config.formulation == Formulation.HomogenizedV:
        if eta0 is not None:
            eta = np.broadcast_to(eta0, q.shape).copy()
        elif config.eta_init == "stationary":
            shifted = [p if first_step == 0 else _shift_steps(p, first_step) for p in paths]
            eta = stationary_eta(st, shifted, chunk=chunk)
        else:
            eta = np.zeros_like(q)
    return _run(st, config.formulation, q, S, eta, paths, n, config.output_every, t0=t0,
                first_step=first_step, strict=strict, snapshot_steps=set(snapshot_steps),
                chunk=chunk, activate=activate, observer=observer)


def _shift_steps(path, n):
    return replace(path, origin=path.origin + n)


def verify_cocycle(config, path, u0, t, tau):
    """``|phi(t + tau, w, u0) - phi(t, theta_tau w, phi(tau, w, u0))|_H``."""
    dt = config.dt
    nt, ntau = int(round(t / dt)), int(round(tau / dt))
    if abs(nt * dt - t) > 1e-9 * max(dt, t) or abs(ntau * dt - tau) > 1e-9 * max(dt, tau):
        raise ValueError("t and tau must be multiples of dt")
    path = _ensure(path, 0, nt + ntau)
    whole = simulate(config.replace(n_steps=nt + ntau), path, u0).final
    first = simulate(config.replace(n_steps=ntau), path, u0).final
    shifted = wiener_shift(path, ntau * dt)
    second = simulate(config.replace(n_steps=nt), shifted, first).final
    diff = whole - second
    return float(np.sqrt(diff.q.norm_sq() + diff.S.norm_sq()))
