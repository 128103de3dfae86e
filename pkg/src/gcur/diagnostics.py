"""Per-step scalar diagnostics and the energy-inequality machinery.

All functions accept coefficient arrays with optional leading batch axes and
return arrays of matching batch shape, so the same code serves a single
trajectory and a vectorised ensemble.

The Lyapunov functional is ``2 |S - eta|^2 + c |q|^2`` with
``c = 1 / (Ra^2 lambda2^2)``.  When ``Ra = 0`` the ``c`` term is dropped and
the record is flagged.  The residual

    r = dL/dt + |grad(S - eta)|^2 + (c - 2 lambda1^2 |eta|^2) |grad q|^2
        - |eta|^2 / lambda2^2

is the combined inequality for ``(S - eta, q)`` written literally, with unit
diffusivities.  It should be non-positive up to time-discretisation error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import discretization

__all__ = [
    "CSV_COLUMNS",
    "DiagnosticsRecord",
    "lyapunov_weight",
    "record",
    "record_arrays",
    "energy_residual",
    "residual_report",
    "absorbing_check",
    "AbsorbingReport",
    "EnvelopeFit",
    "energy_envelope",
]

CSV_COLUMNS = (
    "t",
    "enstrophy",
    "ms_salinity",
    "h_norm_sq",
    "v_norm_sq",
    "salinity_integral",
    "lyapunov",
    "eta_norm_sq",
    "energy_residual",
)

# auxiliary per-step quantities needed by the residual but not written to CSV
AUX_COLUMNS = ("grad_q_sq", "grad_vt_sq")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    enstrophy: float
    ms_salinity: float
    h_norm_sq: float
    v_norm_sq: float
    salinity_integral: float
    lyapunov: float
    eta_norm_sq: float
    energy_residual: float = float("nan")
    lyapunov_partial: bool = False

    def row(self):
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


def lyapunov_weight(Ra, lambda2):
    """``1 / (Ra^2 lambda2^2)``, or ``None`` when Ra = 0."""
    if Ra == 0:
        return None
    return 1.0 / (Ra**2 * lambda2**2)


def _salinity_integral(S):
    d = discretization(S.shape[-2], S.shape[-1])
    return np.sum(d.cosine_to_grid(S) * d.quad_weights, axis=(-2, -1))


def record_arrays(t, q, S, eta=None, Ra=1.0, lambda2=np.pi):
    """Dict of diagnostic columns (CSV columns plus ``AUX_COLUMNS``).

    ``q`` and ``S`` are the components of ``u``; ``eta`` is the boundary
    homogenizer, taken as zero when absent.  ``energy_residual`` is NaN here:
    it needs two consecutive records.
    """
    q = np.asarray(q, dtype=float)
    S = np.asarray(S, dtype=float)
    d = discretization(q.shape[-2], q.shape[-1])
    vt = S if eta is None else S - eta
    qq = np.sum(q * q, axis=(-2, -1))
    ss = np.sum(S * S, axis=(-2, -1))
    gq = np.sum(d.mu_sine * q * q, axis=(-2, -1))
    gs = np.sum(d.mu_cosine * S * S, axis=(-2, -1))
    ee = np.zeros_like(qq) if eta is None else np.sum(eta * eta, axis=(-2, -1))
    c = lyapunov_weight(Ra, lambda2)
    lyap = 2.0 * np.sum(vt * vt, axis=(-2, -1))
    if c is not None:
        lyap = lyap + c * qq
    return {
        "t": np.broadcast_to(np.asarray(t, dtype=float), qq.shape).copy(),
        "enstrophy": 0.5 * qq,
        "ms_salinity": ss,
        "h_norm_sq": qq + ss,
        "v_norm_sq": gq + gs,
        "salinity_integral": _salinity_integral(S),
        "lyapunov": lyap,
        "eta_norm_sq": ee,
        "energy_residual": np.full(qq.shape, np.nan),
        "grad_q_sq": gq,
        "grad_vt_sq": np.sum(d.mu_cosine * vt * vt, axis=(-2, -1)),
    }


def record(u, params, lambda2=np.pi, eta=None, t=0.0):
    """Diagnostics of one state ``u`` (a :class:`StateU`), optionally with ``eta``."""
    e = None if eta is None else getattr(eta, "coeffs", eta)
    cols = record_arrays(t, u.q.coeffs, u.S.coeffs, e, params.Ra, lambda2)
    return DiagnosticsRecord(
        **{c: float(cols[c]) for c in CSV_COLUMNS}, lyapunov_partial=params.Ra == 0
    )


def energy_residual(cols, Ra, lambda1, lambda2):
    """Residual series over consecutive records; the first entry is NaN.

    ``cols`` is a dict of arrays as produced by :func:`record_arrays`, stacked
    along axis 0 in time.  Integrated terms use the trapezoidal average of the
    two endpoints.
    """
    t = np.asarray(cols["t"], dtype=float)
    if t.shape[0] < 2:
        raise ValueError("energy residual needs at least two records")
    L = np.asarray(cols["lyapunov"])
    gv = np.asarray(cols["grad_vt_sq"])
    gq = np.asarray(cols["grad_q_sq"])
    ee = np.asarray(cols["eta_norm_sq"])
    c = lyapunov_weight(Ra, lambda2)

    def avg(x):
        return 0.5 * (x[1:] + x[:-1])

    dt = np.diff(t, axis=0)
    r = np.diff(L, axis=0) / dt + avg(gv) - avg(ee) / lambda2**2
    if c is not None:
        r = r + avg((c - 2.0 * lambda1**2 * ee) * gq)
    out = np.full(L.shape, np.nan)
    out[1:] = r
    return out


@dataclass(frozen=True)
class ResidualReport:
    violation_fraction: float
    tolerance: float
    max_residual: float
    n_steps: int


def residual_report(cols, Ra, lambda1, lambda2, tol_factor=10.0):
    """Fraction of steps with residual above ``tol_factor * dt * scale``.

    ``scale`` is the largest dissipation-plus-forcing magnitude seen in the
    window, a first-order model of the quadrature error.
    """
    r = energy_residual(cols, Ra, lambda1, lambda2)[1:]
    t = np.asarray(cols["t"], dtype=float)
    dt = float(np.max(np.diff(t, axis=0)))
    c = lyapunov_weight(Ra, lambda2) or 0.0
    scale = np.max(
        np.asarray(cols["grad_vt_sq"])
        + c * np.asarray(cols["grad_q_sq"])
        + np.asarray(cols["eta_norm_sq"]) / lambda2**2
    )
    tol = tol_factor * dt * float(scale)
    return ResidualReport(
        violation_fraction=float(np.mean(r > tol)),
        tolerance=tol,
        max_residual=float(np.max(r)),
        n_steps=int(r.size),
    )


@dataclass(frozen=True)
class AbsorbingReport:
    entry_times: np.ndarray
    remained: np.ndarray
    band: float

    @property
    def all_entered(self):
        return bool(np.all(np.isfinite(self.entry_times)))

    @property
    def all_ok(self):
        return self.all_entered and bool(np.all(self.remained))


def absorbing_check(t, lyapunov, radius, band=0.05, deadline=None):
    """Entry time into ``{L <= R}`` and forward invariance within ``(1 + band) R``.

    ``lyapunov`` has shape ``(n_times, n_traj)``; ``radius`` is a scalar, a
    series ``(n_times,)`` or a per-trajectory array ``(n_times, n_traj)``.
    Entries after ``deadline`` count as not entered.
    """
    t = np.asarray(t, dtype=float)
    L = np.asarray(lyapunov, dtype=float)
    if L.ndim == 1:
        L = L[:, None]
    R = np.broadcast_to(np.asarray(radius, dtype=float).reshape(
        np.shape(radius) + (1,) * (L.ndim - np.ndim(radius))), L.shape)
    inside = L <= R
    entry = np.full(L.shape[1], np.inf)
    remained = np.zeros(L.shape[1], dtype=bool)
    for j in range(L.shape[1]):
        hits = np.flatnonzero(inside[:, j])
        if hits.size == 0:
            continue
        n = hits[0]
        if deadline is not None and t[n] > deadline:
            continue
        entry[j] = t[n]
        remained[j] = bool(np.all(L[n:, j] <= (1.0 + band) * R[n:, j]))
    return AbsorbingReport(entry, remained, band)


@dataclass(frozen=True)
class EnvelopeFit:
    intercept: float
    slope: float
    c: float
    max_excess: float
    bounded: bool


def energy_envelope(t, h_mean, v_mean, trace_q, alpha=1.0, tol=0.05):
    """Affine envelope of ``E(t) = E|u|_H^2 + alpha E int_0^t |u|_V^2``.

    The slope is fitted by least squares on the first half of the window and
    the intercept raised until the line bounds that half.  ``bounded`` checks
    the envelope out of sample on the second half, within relative ``tol``.
    ``c`` is the fitted slope less ``tr Q``, floored at zero.
    """
    t = np.asarray(t, dtype=float)
    h = np.asarray(h_mean, dtype=float)
    v = np.asarray(v_mean, dtype=float)
    if t.size < 4:
        raise ValueError("envelope fit needs at least four records")
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))])
    E = h + alpha * integral
    half = t.size // 2
    slope = float(np.polyfit(t[:half], E[:half], 1)[0]) if np.ptp(E[:half]) > 0 else 0.0
    slope = max(slope, 0.0)
    intercept = float(np.max(E[:half] - slope * t[:half]))
    line = intercept + slope * t[half:]
    excess = float(np.max((E[half:] - line) / np.maximum(np.abs(line), 1e-300)))
    return EnvelopeFit(intercept, slope, max(slope - trace_q, 0.0), excess, bool(excess <= tol))
