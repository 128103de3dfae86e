"""Galerkin spectral representation of fields on the unit square.

Vorticity and streamfunction live in the orthonormal sine basis
``2 sin(m pi x) sin(k pi z)`` (m, k >= 1), which carries the homogeneous
Dirichlet data.  Salinity lives in the orthonormal cosine basis
``c_m(x) c_k(z)`` with ``c_0 = 1`` and ``c_m = sqrt(2) cos(m pi x)``; the
(0, 0) coefficient is the spatial mean and is pinned to zero.

Coefficient arrays have shape ``(..., nx, nz)``, the leading axes being an
optional batch of independent fields.  Products are formed on a
``(2 nx + 1) x (2 nz + 1)`` collocation grid including the boundary, which
keeps every retained mode below two thirds of the grid cutoff.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft

__all__ = [
    "Basis",
    "SpectralField",
    "StateU",
    "PhysicalParams",
    "PoincareConstants",
    "Discretization",
    "discretization",
    "solve_streamfunction",
    "laplacian",
    "jacobian",
    "apply_F1",
    "apply_F2",
    "h_norm_sq",
    "v_norm_sq",
    "enstrophy",
    "poincare_constants",
    "verify_poincare",
    "arakawa",
]


class Basis(enum.IntEnum):
    DirichletSine = 1
    NeumannCosine = 2


class GridMismatchError(ValueError):
    pass


def _cosine_weights(n):
    w = np.full(n, np.sqrt(2.0))
    w[0] = 1.0
    return w


class Discretization:
    """Mode bookkeeping, transforms and operator tables for one resolution.

    Obtain instances through :func:`discretization`, which caches them.
    """

    def __init__(self, nx, nz):
        if nx < 1 or nz < 1:
            raise ValueError("mode counts must be positive")
        self.nx, self.nz = int(nx), int(nz)
        self.Mx, self.Mz = 2 * self.nx, 2 * self.nz
        self.x = np.linspace(0.0, 1.0, self.Mx + 1)
        self.z = np.linspace(0.0, 1.0, self.Mz + 1)

        ms, ks = np.arange(1, nx + 1), np.arange(1, nz + 1)
        mc, kc = np.arange(nx), np.arange(nz)
        self.sine_modes = (ms, ks)
        self.cosine_modes = (mc, kc)
        self.mu_sine = np.pi**2 * (ms[:, None] ** 2 + ks[None, :] ** 2).astype(float)
        self.mu_cosine = np.pi**2 * (mc[:, None] ** 2 + kc[None, :] ** 2).astype(float)

        # trapezoidal quadrature weights on the collocation grid
        wx = np.full(self.Mx + 1, 1.0 / self.Mx)
        wx[[0, -1]] *= 0.5
        wz = np.full(self.Mz + 1, 1.0 / self.Mz)
        wz[[0, -1]] *= 0.5
        self.quad_weights = wx[:, None] * wz[None, :]

        self._cw_x = _cosine_weights(nx)
        self._cw_z = _cosine_weights(nz)
        # DCT-I input scaling: 2 for the constant mode, sqrt(2) otherwise
        self._dct_x = 2.0 / self._cw_x
        self._dct_z = 2.0 / self._cw_z
        self.f2_matrix = _cos_to_sin_matrix(nz)

    def mu(self, basis):
        return self.mu_sine if basis == Basis.DirichletSine else self.mu_cosine

    # grid transforms ----------------------------------------------------

    def sine_to_grid(self, c):
        c = np.asarray(c, dtype=float)
        lead = c.shape[:-2]
        pad = np.zeros(lead + (self.Mx - 1, self.Mz - 1))
        pad[..., : self.nx, : self.nz] = c
        g = np.zeros(lead + (self.Mx + 1, self.Mz + 1))
        g[..., 1:-1, 1:-1] = 0.5 * fft.dstn(pad, type=1, axes=(-2, -1))
        return g

    def grid_to_sine(self, g):
        g = np.asarray(g, dtype=float)
        c = fft.dstn(g[..., 1:-1, 1:-1], type=1, axes=(-2, -1))
        return c[..., : self.nx, : self.nz] / (2.0 * self.Mx * self.Mz)

    def cosine_to_grid(self, c):
        c = np.asarray(c, dtype=float)
        lead = c.shape[:-2]
        pad = np.zeros(lead + (self.Mx + 1, self.Mz + 1))
        pad[..., : self.nx, : self.nz] = c * (self._dct_x[:, None] * self._dct_z[None, :])
        return 0.25 * fft.dctn(pad, type=1, axes=(-2, -1))

    def grid_to_cosine(self, g):
        g = np.asarray(g, dtype=float)
        c = fft.dctn(g, type=1, axes=(-2, -1))[..., : self.nx, : self.nz]
        return c * (self._cw_x[:, None] * self._cw_z[None, :]) / (4.0 * self.Mx * self.Mz)

    def to_grid(self, c, basis):
        if basis == Basis.DirichletSine:
            return self.sine_to_grid(c)
        return self.cosine_to_grid(c)

    def from_grid(self, g, basis):
        if basis == Basis.DirichletSine:
            return self.grid_to_sine(g)
        return self.grid_to_cosine(g)

    # operators on coefficient arrays -------------------------------------

    def jacobian_grid(self, g, basis_g, h, basis_h):
        """Arakawa Jacobian of two coefficient arrays, returned on the grid."""
        a = _pad_reflect(self.to_grid(g, basis_g), basis_g)
        b = _pad_reflect(self.to_grid(h, basis_h), basis_h)
        return arakawa(a, b, 1.0 / self.Mx, 1.0 / self.Mz)

    def f1(self, q, S, psi=None):
        """Explicit advection increments ``(-J(q, psi), -J(S, psi))``.

        Returns the two coefficient arrays and the maximum grid speed, the
        latter estimated from centred differences of ``psi``.
        """
        if psi is None:
            psi = q / self.mu_sine
        pp = _pad_reflect(self.sine_to_grid(psi), Basis.DirichletSine)
        qp = _pad_reflect(self.sine_to_grid(q), Basis.DirichletSine)
        sp = _pad_reflect(self.cosine_to_grid(S), Basis.NeumannCosine)
        dx, dz = 1.0 / self.Mx, 1.0 / self.Mz
        jq = arakawa(qp, pp, dx, dz)
        js = arakawa(sp, pp, dx, dz)
        nq = -self.grid_to_sine(jq)
        ns = -self.grid_to_cosine(js)
        ns[..., 0, 0] = 0.0
        u = (pp[..., 1:-1, 2:] - pp[..., 1:-1, :-2]) / (2 * dz)
        w = (pp[..., 2:, 1:-1] - pp[..., :-2, 1:-1]) / (2 * dx)
        speed = np.sqrt(u * u + w * w).max(axis=(-2, -1)) if u.size else np.zeros(q.shape[:-2])
        return nq, ns, speed

    def f2(self, S, Ra):
        """Buoyancy forcing ``-Ra d_x S`` projected onto the sine basis."""
        out = np.zeros(S.shape[:-2] + (self.nx, self.nz))
        if Ra == 0.0 or self.nx < 2:
            return out
        m = np.arange(1, self.nx)
        # d_x c_m(x) = -m pi sqrt(2) sin(m pi x): cosine mode m feeds sine mode m
        dxs = -(m * np.pi)[:, None] * S[..., 1:, :]
        out[..., : self.nx - 1, :] = -Ra * (dxs @ self.f2_matrix.T)
        return out


def _cos_to_sin_matrix(n):
    """Exact L2 inner products of sine modes 1..n (rows) with cosine modes 0..n-1."""
    kp = np.arange(1, n + 1)[:, None].astype(float)
    k = np.arange(n)[None, :].astype(float)
    odd = (kp + k) % 2 == 1
    with np.errstate(divide="ignore", invalid="ignore"):
        mat = np.where(odd, 4.0 * kp / ((kp**2 - k**2) * np.pi), 0.0)
    mat[:, 0] /= np.sqrt(2.0)
    return mat


def _pad_reflect(g, basis):
    """One ghost layer: odd reflection for sine fields, even for cosine."""
    width = [(0, 0)] * (g.ndim - 2) + [(1, 1), (1, 1)]
    kind = "odd" if basis == Basis.DirichletSine else "even"
    return np.pad(g, width, mode="reflect", reflect_type=kind)


def arakawa(a, b, dx, dz):
    """Arakawa (1966) nine-point Jacobian ``a_x b_z - a_z b_x``.

    ``a`` and ``b`` carry one ghost layer on each side of the last two axes;
    the result covers the interior of the padded arrays.
    """
    c, p, m = slice(1, -1), slice(2, None), slice(None, -2)
    jpp = (a[..., p, c] - a[..., m, c]) * (b[..., c, p] - b[..., c, m]) - (
        a[..., c, p] - a[..., c, m]
    ) * (b[..., p, c] - b[..., m, c])
    return (jpp + _j_plus_cross(a, b) - _j_plus_cross(b, a)) / (12.0 * dx * dz)


def _j_plus_cross(a, b):
    c, p, m = slice(1, -1), slice(2, None), slice(None, -2)
    return (
        a[..., p, c] * (b[..., p, p] - b[..., p, m])
        - a[..., m, c] * (b[..., m, p] - b[..., m, m])
        - a[..., c, p] * (b[..., p, p] - b[..., m, p])
        + a[..., c, m] * (b[..., p, m] - b[..., m, m])
    )


@lru_cache(maxsize=16)
def discretization(nx, nz):
    return Discretization(nx, nz)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients of a scalar field in one of the two orthonormal bases."""

    basis: Basis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim < 2:
            raise ValueError("coefficients need at least two axes")
        if self.basis == Basis.NeumannCosine:
            c[..., 0, 0] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "basis", Basis(self.basis))
        object.__setattr__(self, "coeffs", c)

    @property
    def nx(self):
        return self.coeffs.shape[-2]

    @property
    def nz(self):
        return self.coeffs.shape[-1]

    @property
    def disc(self):
        return discretization(self.nx, self.nz)

    @classmethod
    def zeros(cls, basis, nx, nz):
        return cls(basis, np.zeros((nx, nz)))

    @classmethod
    def from_grid(cls, basis, values):
        values = np.asarray(values, dtype=float)
        nx, nz = (values.shape[-2] - 1) // 2, (values.shape[-1] - 1) // 2
        return cls(basis, discretization(nx, nz).from_grid(values, basis))

    def grid(self):
        """Values on the ``(2 nx + 1) x (2 nz + 1)`` collocation grid."""
        return self.disc.to_grid(self.coeffs, self.basis)

    def evaluate(self, x, z, dx=0, dz=0):
        """Pointwise (derivative) values by direct summation of the series."""
        x, z = np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(z, float))
        kind = "sin" if self.basis == Basis.DirichletSine else "cos"
        X = _basis_1d(kind, self.nx, x, dx)
        Z = _basis_1d(kind, self.nz, z, dz)
        return np.einsum("...mk,xm,zk->...xz", self.coeffs, X, Z)

    def embed(self, nx, nz):
        """Zero-pad (or truncate) to another resolution."""
        out = np.zeros(self.coeffs.shape[:-2] + (nx, nz))
        a, b = min(nx, self.nx), min(nz, self.nz)
        out[..., :a, :b] = self.coeffs[..., :a, :b]
        return SpectralField(self.basis, out)

    def __add__(self, other):
        _check_compatible(self, other)
        return SpectralField(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_compatible(self, other)
        return SpectralField(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.basis, -self.coeffs)

    def dot(self, other):
        _check_compatible(self, other)
        return np.sum(self.coeffs * other.coeffs, axis=(-2, -1))

    def norm_sq(self):
        return np.sum(self.coeffs**2, axis=(-2, -1))


def _basis_1d(kind, n, x, order):
    """Table ``(len(x), n)`` of d^order/dx^order of the normalised 1D modes."""
    if kind == "sin":
        m = np.arange(1, n + 1)
        scale = np.full(n, np.sqrt(2.0))
        phase = 0.0
    else:
        m = np.arange(n)
        scale = _cosine_weights(n)
        phase = np.pi / 2
    arg = np.pi * x[:, None] * m[None, :] + phase + order * np.pi / 2
    return scale * (np.pi * m) ** order * np.sin(arg)


def _check_compatible(a, b):
    if a.basis != b.basis:
        raise ValueError(f"basis mismatch: {a.basis.name} vs {b.basis.name}")
    if a.coeffs.shape[-2:] != b.coeffs.shape[-2:]:
        raise GridMismatchError("mode counts differ")


@dataclass(frozen=True, eq=False)
class StateU:
    """Phase-space point ``u = (q, S)``: sine vorticity, zero-mean cosine salinity."""

    q: SpectralField
    S: SpectralField

    def __post_init__(self):
        if self.q.basis != Basis.DirichletSine or self.S.basis != Basis.NeumannCosine:
            raise ValueError("StateU needs a sine q and a cosine S")
        if self.q.coeffs.shape != self.S.coeffs.shape:
            raise GridMismatchError("q and S mode counts differ")

    @classmethod
    def from_arrays(cls, q, S):
        return cls(SpectralField(Basis.DirichletSine, q), SpectralField(Basis.NeumannCosine, S))

    @classmethod
    def zeros(cls, nx, nz):
        return cls.from_arrays(np.zeros((nx, nz)), np.zeros((nx, nz)))

    @property
    def nx(self):
        return self.q.nx

    @property
    def nz(self):
        return self.q.nz

    def __add__(self, other):
        return StateU(self.q + other.q, self.S + other.S)

    def __sub__(self, other):
        return StateU(self.q - other.q, self.S - other.S)

    def __mul__(self, scalar):
        return StateU(self.q * scalar, self.S * scalar)

    __rmul__ = __mul__

    def dot(self, other):
        return self.q.dot(other.q) + self.S.dot(other.S)

    def embed(self, nx, nz):
        return StateU(self.q.embed(nx, nz), self.S.embed(nx, nz))


@dataclass(frozen=True)
class PhysicalParams:
    Ra: float = 0.0
    Pr: float = 1.0

    def __post_init__(self):
        if not self.Pr > 0:
            raise ValueError("Pr must be positive")
        if not self.Ra >= 0:
            raise ValueError("Ra must be non-negative")


@dataclass(frozen=True)
class PoincareConstants:
    lambda1: float
    lambda2: float
    verified: dict = field(default_factory=dict, compare=False)


def solve_streamfunction(q):
    """Invert ``-Laplacian psi = q`` with ``psi = 0`` on the boundary."""
    if q.basis != Basis.DirichletSine:
        raise ValueError("vorticity must be in the sine basis")
    return SpectralField(q.basis, q.coeffs / q.disc.mu_sine)


def laplacian(f):
    """Spectral Laplacian (homogeneous boundary data of the field's basis)."""
    return SpectralField(f.basis, -f.coeffs * f.disc.mu(f.basis))


def jacobian(g, h):
    """Arakawa ``J(g, h) = g_x h_z - g_z h_x`` projected onto the basis of ``g``."""
    if g.coeffs.shape[-2:] != h.coeffs.shape[-2:]:
        raise GridMismatchError("g and h live on different grids")
    d = g.disc
    jg = d.jacobian_grid(g.coeffs, g.basis, h.coeffs, h.basis)
    return SpectralField(g.basis, d.from_grid(jg, g.basis))


def apply_F1(u):
    nq, ns, _ = u.q.disc.f1(u.q.coeffs, u.S.coeffs)
    return StateU.from_arrays(nq, ns)


def apply_F2(u, params):
    fq = u.q.disc.f2(u.S.coeffs, params.Ra)
    return StateU.from_arrays(fq, np.zeros_like(u.S.coeffs))


def h_norm_sq(u):
    return u.q.norm_sq() + u.S.norm_sq()


def v_norm_sq(u):
    d = u.q.disc
    return np.sum(d.mu_sine * u.q.coeffs**2, axis=(-2, -1)) + np.sum(
        d.mu_cosine * u.S.coeffs**2, axis=(-2, -1)
    )


def enstrophy(u):
    return 0.5 * u.q.norm_sq()


def poincare_constants(nx, nz):
    """First Dirichlet and zero-mean Neumann eigenvalue roots on the unit square.

    The returned ``verified`` entry holds the minimum of ``|grad e| / |e|``
    over every resolved basis field, which must reproduce the constants.
    """
    if nx < 1 or nz < 1:
        raise ValueError("mode counts must be at least 1")
    lam1, lam2 = np.sqrt(2.0) * np.pi, np.pi
    return PoincareConstants(lam1, lam2, verified=verify_poincare(nx, nz))


def verify_poincare(nx, nz):
    d = discretization(nx, nz)
    mu_c = d.mu_cosine.copy()
    mu_c[0, 0] = np.inf
    return {
        "lambda1_min_ratio": float(np.sqrt(d.mu_sine.min())),
        "lambda2_min_ratio": float(np.sqrt(mu_c.min())) if np.isfinite(mu_c.min()) else np.inf,
    }
