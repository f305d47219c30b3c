"""Special-function numerics used by the sampling kernels.

Everything here is a pure, deterministic evaluation:

* physicists' Hermite polynomials H_n(x),
* harmonic-oscillator eigenfunctions psi_n(x) via the normalized
  three-term recurrence (stable up to n of several hundred, where the
  naive H_n / sqrt(2^n n! sqrt(pi)) form overflows),
* the confluent hypergeometric function Phi(a, b, z) for the parameter
  families needed by the kernels, restricted to z <= 0,
* the modified Bessel function I_0(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class RangeError(ValueError):
    """Evaluation left the representable range (overflow)."""


class ConvergenceError(RuntimeError):
    """A series or quadrature failed to reach the requested tolerance."""


class UnsupportedParameterError(ValueError):
    """Parameters outside the validated range of an approximation."""


def hermite(n, x):
    """Physicists' Hermite polynomial H_n(x) by upward recurrence.

    Accepts scalar or array ``x``; raises :class:`RangeError` if the
    recurrence overflows instead of returning silent infinities.
    """
    if n < 0:
        raise ValueError(f"order must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for j in range(1, n):
        h, h_prev = 2.0 * x * h - 2.0 * j * h_prev, h
    if not np.all(np.isfinite(h)):
        raise RangeError(f"H_{n} overflowed for |x| up to {np.max(np.abs(x))}")
    return h if h.ndim else float(h)


def hermite_table(n_max, x):
    """Rows H_0(x) .. H_n_max(x) over an array ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((n_max + 1, x.size))
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 * x
    for j in range(1, n_max):
        out[j + 1] = 2.0 * x * out[j] - 2.0 * j * out[j - 1]
    if not np.all(np.isfinite(out[n_max])):
        raise RangeError(f"H_{n_max} overflowed on the requested grid")
    return out


def osc_eigenfunction(n, x):
    """Harmonic-oscillator eigenfunction psi_n(x).

    Uses the normalized recurrence
    psi_{n+1} = x sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1},
    which stays bounded where the Hermite-times-factorial form would
    overflow long before n = 500.
    """
    if n < 0:
        raise ValueError(f"index must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    p_prev = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = math.sqrt(2.0) * x * p_prev
    for j in range(1, n):
        p, p_prev = x * math.sqrt(2.0 / (j + 1)) * p - math.sqrt(j / (j + 1)) * p_prev, p
    return p if p.ndim else float(p)


def osc_eigenfunction_table(max_index, x):
    """Rows psi_0(x) .. psi_max_index(x) over an array ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((max_index + 1, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if max_index >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for j in range(1, max_index):
        out[j + 1] = x * math.sqrt(2.0 / (j + 1)) * out[j] - math.sqrt(j / (j + 1)) * out[j - 1]
    return out


def default_grid(max_index, step=0.01, pad=5.0):
    """Symmetric quadrature grid covering the classically allowed region.

    Spans +-(sqrt(2 max_index) + pad) so that every psi_n with
    n <= max_index has negligible mass outside.
    """
    x_max = math.sqrt(2.0 * max(max_index, 1)) + pad
    n_half = int(math.ceil(x_max / step))
    return step * np.arange(-n_half, n_half + 1)


@dataclass(frozen=True)
class OscillatorBasisCache:
    """Immutable table of psi_n(x) for n <= max_index over a fixed grid."""

    max_index: int
    grid: np.ndarray
    values: np.ndarray

    @classmethod
    def build(cls, max_index, grid=None):
        if grid is None:
            grid = default_grid(max_index)
        grid = np.asarray(grid, dtype=float)
        values = osc_eigenfunction_table(max_index, grid)
        grid.setflags(write=False)
        values.setflags(write=False)
        return cls(max_index=max_index, grid=grid, values=values)


# Parameter pairs for which kummer_phi is validated to 1e-10 relative
# accuracy over z in [-2000, 0].
_PHI_SUPPORTED = {(1.0, 0.5), (2.0, 0.5), (2.0, 1.5), (1.0, 1.0)}


def kummer_phi(a, b, z, switch=60.0):
    """Confluent hypergeometric function Phi(a, b, z) for z <= 0.

    For moderate |z| the Kummer transform Phi(a,b,z) = e^z Phi(b-a,b,-z)
    is used: with -z >= 0 the transformed series has no sign
    cancellation.  Beyond ``switch`` the large-argument expansion
    Phi(a,b,z) ~ Gamma(b)/Gamma(b-a) (-z)^(-a) [1 + ...] takes over.
    The default crossover keeps both branches at better than 1e-13
    relative agreement in the overlap.

    Supported parameter pairs: (1, 1/2), (2, 1/2), (2, 3/2) and (1, 1);
    anything else raises :class:`UnsupportedParameterError`.
    """
    a, b = float(a), float(b)
    if (a, b) not in _PHI_SUPPORTED:
        raise UnsupportedParameterError(f"Phi({a}, {b}, z) is outside the validated range")
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z > 0.0):
        raise UnsupportedParameterError("kummer_phi requires z <= 0")
    out = np.empty_like(z)

    small = -z <= switch
    if np.any(small):
        y = -z[small]
        total = np.ones_like(y)
        term = np.ones_like(y)
        converged = False
        for m in range(800):
            term = term * (b - a + m) / ((b + m) * (m + 1)) * y
            total += term
            if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
                converged = True
                break
        if not converged:
            raise ConvergenceError("transformed Kummer series did not converge")
        out[small] = np.exp(z[small]) * total

    if np.any(~small):
        y = -z[~small]
        try:
            prefactor = math.gamma(b) / math.gamma(b - a)
        except ValueError:  # Gamma pole at b - a = 0, -1, ...: leading term vanishes
            prefactor = 0.0
        total = np.ones_like(y)
        term = np.ones_like(y)
        smallest = np.full_like(y, np.inf)
        for m in range(200):
            term = term * (a + m) * (a - b + 1 + m) / ((m + 1) * y)
            growing = np.abs(term) > smallest  # past the optimal truncation point
            smallest = np.minimum(smallest, np.abs(term))
            total = np.where(growing, total, total + term)
            if np.all(np.abs(term) <= 1e-17):
                break
        if np.any(smallest > 1e-11) and prefactor != 0.0:
            raise ConvergenceError("asymptotic expansion stalled above tolerance; raise `switch`")
        out[~small] = prefactor * y ** (-a) * total

    return float(out[0]) if scalar else out


def bessel_i0(t):
    """Modified Bessel function I_0(t) for t >= 0.

    Power series (all terms positive, no cancellation) up to t = 40,
    asymptotic expansion e^t / sqrt(2 pi t) [1 + 1/(8t) + ...] beyond.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(t < 0.0):
        raise ValueError("bessel_i0 requires t >= 0")
    if np.any(t > 709.0):
        raise RangeError("I_0(t) overflows double precision for t > 709")
    out = np.empty_like(t)

    small = t <= 40.0
    if np.any(small):
        q = t[small] ** 2 / 4.0
        total = np.ones_like(q)
        term = np.ones_like(q)
        for m in range(400):
            term = term * q / (m + 1) ** 2
            total += term
            if np.all(term <= 1e-17 * total):
                break
        out[small] = total

    if np.any(~small):
        y = t[~small]
        total = np.ones_like(y)
        term = np.ones_like(y)
        for m in range(60):
            term = term * (2 * m + 1) ** 2 / (8.0 * y * (m + 1))
            total += term
            if np.all(np.abs(term) <= 1e-17):
                break
        out[~small] = np.exp(y) / np.sqrt(2.0 * np.pi * y) * total

    return float(out[0]) if scalar else out
