"""Inlet-boundary flux: mean profile, trace-class covariance, Wiener paths.

The flux at ``x = 0`` is expanded in the zero-mean modes
``e_k(z) = sqrt(2) cos(k pi z)``, ``k = 1..K``.  There is no ``k = 0`` mode,
so the boundary flux integrates to zero along the inlet for every sample.

Brownian increments are drawn from a counter-based generator keyed by
``(seed, replicate, k)`` with the step index as counter.  Any window of any
path, including negative times, can therefore be regenerated on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

RNG_ALGORITHM = "numpy-philox4x64/box-muller/v1"

# counter offset that maps negative step indices onto non-negative counters
_COUNTER_OFFSET = 1 << 62
_MASK64 = (1 << 64) - 1


class WindowError(IndexError):
    """Requested steps fall outside the stored window of a noise path."""


@dataclass(frozen=True, eq=False)
class CovarianceSpec:
    """Eigenvalues ``q_k`` of Q and mean-flux coefficients ``f_k``, k = 1..K.

    ``family`` records how the spectrum was built; it is echoed in every
    report because the covariance law is a modelling choice.
    """

    eigenvalues: np.ndarray
    flux: np.ndarray
    family: str = "explicit"

    def __post_init__(self):
        q = np.array(self.eigenvalues, dtype=float).ravel()
        f = np.zeros(q.size)
        flux = np.array(self.flux, dtype=float).ravel()
        if flux.size > q.size:
            q = np.concatenate([q, np.zeros(flux.size - q.size)])
            f = np.zeros(q.size)
        f[: flux.size] = flux
        if np.any(q < 0) or not np.all(np.isfinite(q)):
            raise ValueError("covariance eigenvalues must be finite and non-negative")
        q.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "eigenvalues", q)
        object.__setattr__(self, "flux", f)

    @property
    def K(self):
        return self.eigenvalues.size

    @classmethod
    def power_law(cls, sigma=0.0, decay=1.0, K=32, flux_amplitude=0.0):
        """``q_k = sigma^2 k^(-2 decay)`` and mean flux ``a sqrt(2) cos(pi z)``."""
        k = np.arange(1, K + 1, dtype=float)
        f = np.zeros(K)
        if K:
            f[0] = flux_amplitude
        return cls(sigma**2 * k ** (-2.0 * decay), f, family=f"power_law(decay={decay})")

    @classmethod
    def zero(cls, K=1):
        return cls(np.zeros(K), np.zeros(K), family="zero")

    def with_sigma(self, sigma, decay=1.0):
        k = np.arange(1, self.K + 1, dtype=float)
        return replace(self, eigenvalues=sigma**2 * k ** (-2.0 * decay))

    def flux_norm(self):
        return float(np.sqrt(np.sum(self.flux**2)))


def trace(cov):
    return float(np.sum(cov.eigenvalues))


def standard_normals(seed, replicate, first_step, n_steps, modes):
    """Keyed standard normals, array ``(n_steps, len(modes))``.

    Entry ``(i, j)`` depends only on ``(seed, replicate, modes[j],
    first_step + i)``.
    """
    modes = np.atleast_1d(np.asarray(modes, dtype=np.int64))
    out = np.empty((n_steps, modes.size))
    if n_steps == 0:
        return out
    counter = first_step + _COUNTER_OFFSET
    if counter < 0:
        raise WindowError("step index below generable range")
    for j, k in enumerate(modes):
        key = np.array([seed & _MASK64, ((replicate & 0xFFFFFFFF) << 32) | (int(k) & 0xFFFFFFFF)],
                       dtype=np.uint64)
        words = np.random.Philox(key=key, counter=counter).random_raw(4 * n_steps)
        words = words.reshape(n_steps, 4)
        u1 = ((words[:, 0] >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53
        u2 = (words[:, 1] >> np.uint64(11)).astype(float) * 2.0**-53
        out[:, j] = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return out


@dataclass(frozen=True, eq=False)
class NoisePath:
    """A window of Brownian increments, one column per covariance mode.

    ``increments[i, k - 1]`` is the increment of ``beta_k`` over the step
    starting at absolute index ``start + i``.  ``origin`` is the absolute
    step that plays the role of time zero; shifting the path moves it.
    """

    dt: float
    start: int
    increments: np.ndarray
    seed: int = 0
    replicate: int = 0
    origin: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=float)
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)

    @property
    def K(self):
        return self.increments.shape[1]

    @property
    def generable(self):
        return self.meta.get("rng") == RNG_ALGORITHM

    @property
    def n_steps(self):
        return self.increments.shape[0]

    @property
    def first_step(self):
        """First stored step, relative to the path's time origin."""
        return self.start - self.origin

    @property
    def t0(self):
        return self.first_step * self.dt

    @property
    def last_step(self):
        return self.first_step + self.n_steps

    def covers(self, step, n=1):
        return self.first_step <= step and step + n <= self.last_step

    def window(self, step, n=1):
        """Increments for relative steps ``step .. step + n - 1``."""
        if not self.covers(step, n):
            raise WindowError(
                f"steps [{step}, {step + n}) outside stored window "
                f"[{self.first_step}, {self.last_step})"
            )
        i = step - self.first_step
        return self.increments[i : i + n]

    def extend(self, first_step, last_step):
        """Regenerate from the key so the window spans the given relative steps."""
        lo = min(first_step, self.first_step)
        hi = max(last_step, self.last_step)
        if lo == self.first_step and hi == self.last_step:
            return self
        if not self.generable:
            raise WindowError("path was not drawn from a key and cannot be extended")
        inc = np.sqrt(self.dt) * standard_normals(
            self.seed, self.replicate, lo + self.origin, hi - lo, np.arange(1, self.K + 1)
        )
        return replace(self, start=lo + self.origin, increments=inc)

    def coarsen(self, factor):
        """Path at ``factor * dt`` whose increments sum consecutive fine ones."""
        if self.start % factor or self.n_steps % factor or self.origin % factor:
            raise ValueError("window not aligned with the coarsening factor")
        inc = self.increments.reshape(-1, factor, self.K).sum(axis=1)
        return NoisePath(self.dt * factor, self.start // factor, inc, self.seed,
                         self.replicate, self.origin // factor,
                         meta={"coarsened": factor})


def sample_path(cov, dt, t0, n_steps, seed=0, replicate=0):
    """Increments with variance ``dt`` per mode; scaling by ``sqrt(q_k)`` is deferred."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    K = cov.K if isinstance(cov, CovarianceSpec) else int(cov)
    first = int(round(t0 / dt))
    inc = np.sqrt(dt) * standard_normals(seed, replicate, first, n_steps, np.arange(1, K + 1))
    return NoisePath(dt, first, inc, seed, replicate, 0, meta={"rng": RNG_ALGORITHM})


def wiener_shift(path, t):
    """Path of ``theta_t omega``: new increment ``i`` is old increment ``i + t/dt``."""
    steps = t / path.dt
    n = int(round(steps))
    if abs(steps - n) > 1e-9 * max(1.0, abs(steps)):
        raise ValueError("shift must be a multiple of dt")
    return replace(path, origin=path.origin + n)


def flux_at_boundary(cov, path, step):
    """Step-integrated flux ``f_k dt + sqrt(q_k) dbeta_k`` for each mode k."""
    db = path.window(step, 1)[0]
    return cov.flux * path.dt + np.sqrt(cov.eigenvalues) * db
