"""Sampling kernels for balanced-homodyne estimation.

A target quantity A is recovered from quadrature data as

    A = int dtheta int dx K_A(x, theta) p(x, theta),

so each quantity needs its kernel K_A.  Implemented here:

* vacuum probability rho_00:      K_00(x) = Phi(1, 1/2, -x^2) / pi,
* photon number and its square:   polynomial kernels in x,
* normally ordered moments <a^dag^n a^m>,
* exponential-phase moments Psi_k = <E^k>, where the radial factor
  K_k(x) is given in closed integral form for k = 1, 2 and as a
  Hermite series for general k,
* the classical (large-|x|) limits of K_k, and
* the kernels for <C^2>, <S^2> built from K_2.

K_k is only defined up to functions of parity (-1)^(k+1) and
polynomials of degree < k; the representative fixed here follows the
closed integral forms, with the k = 2 additive constant calibrated to
the classical asymptote (1/pi) log|x| at x = 10.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .specfun import (
    ConvergenceError,
    UnsupportedParameterError,
    bessel_i0,
    hermite_table,
    kummer_phi,
)

TARGETS = (
    "vacuum_prob",
    "photon_number",
    "photon_number_sq",
    "moment",
    "exp_phase",
    "exp_phase_classical",
    "trig_sq",
)

EVAL_STRATEGIES = ("integral", "series", "classical", "hybrid")


class KernelDomainError(ValueError):
    """Kernel evaluated at a point where it is singular."""


@dataclass(frozen=True)
class KernelSpec:
    """Identifies one sampling kernel.

    ``k`` is the exponential-phase order, ``n``/``m`` the moment orders,
    ``sign`` '+' or '-' selects the <C^2> or <S^2> kernel.  ``x_switch``
    is the quadrature value beyond which the classical limit replaces
    the exact evaluation.
    """

    target: str
    k: int | None = None
    n: int | None = None
    m: int | None = None
    sign: str | None = None
    x_switch: float = 6.0
    eval_strategy: str = "hybrid"

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown kernel target {self.target!r}")
        if self.eval_strategy not in EVAL_STRATEGIES:
            raise ValueError(f"unknown eval strategy {self.eval_strategy!r}")
        if self.x_switch < 3.0:
            raise ValueError("x_switch must be >= 3 (classical limit not reached below)")
        if self.target in ("exp_phase", "exp_phase_classical"):
            if self.k is None or self.k < 1:
                raise ValueError(f"{self.target} requires k >= 1")
        if self.target == "moment":
            if self.n is None or self.m is None or self.n < 0 or self.m < 0:
                raise ValueError("moment requires n, m >= 0")
        if self.target == "trig_sq" and self.sign not in ("+", "-"):
            raise ValueError("trig_sq requires sign '+' or '-'")

    @classmethod
    def parse(cls, text, x_switch=6.0):
        """Parse a CLI-style spec such as ``exp_phase:1``, ``moment:1,1``,
        ``trig_sq:+`` or ``vacuum_prob``."""
        name, _, arg = text.partition(":")
        name = name.strip()
        if name in ("vacuum_prob", "photon_number", "photon_number_sq"):
            return cls(target=name, x_switch=x_switch)
        if name in ("exp_phase", "exp_phase_classical"):
            return cls(target=name, k=int(arg), x_switch=x_switch)
        if name == "moment":
            n, m = (int(v) for v in arg.split(","))
            return cls(target=name, n=n, m=m, x_switch=x_switch)
        if name == "trig_sq":
            return cls(target=name, sign=arg.strip(), x_switch=x_switch)
        raise ValueError(f"cannot parse kernel spec {text!r}")

    def label(self):
        if self.target in ("exp_phase", "exp_phase_classical"):
            return f"{self.target}:{self.k}"
        if self.target == "moment":
            return f"moment:{self.n},{self.m}"
        if self.target == "trig_sq":
            return f"trig_sq:{self.sign}"
        return self.target

    @property
    def phase_dependent(self):
        return self.target in ("moment", "exp_phase", "exp_phase_classical", "trig_sq")


@dataclass(frozen=True)
class KernelTable:
    """Radial kernel samples on a fixed grid, linearly interpolable."""

    spec: KernelSpec
    grid: np.ndarray
    values: np.ndarray
    calibration_offset: float = 0.0

    def __call__(self, x):
        return np.interp(x, self.grid, self.values)


# ---------------------------------------------------------------------------
# closed-form kernels


def kernel_vacuum_prob(x):
    """K_00(x) = Phi(1, 1/2, -x^2) / pi; phase independent."""
    x = np.asarray(x, dtype=float)
    return kummer_phi(1, 0.5, -(x * x)) / np.pi


def kernel_photon_number(x):
    """Kernel for <n>: (x^2 - 1/2) / (2 pi)."""
    x = np.asarray(x, dtype=float)
    out = (x * x - 0.5) / (2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def kernel_photon_number_sq(x):
    """Kernel for <n^2>: (2/3 x^4 - x^2) / (2 pi)."""
    x = np.asarray(x, dtype=float)
    out = (2.0 / 3.0 * x ** 4 - x * x) / (2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def kernel_moment(n, m, x, theta):
    """Kernel for the normally ordered moment <a^dag^n a^m>.

    e^{i(m-n)theta} H_{n+m}(x) / (2 pi sqrt(2^{n+m}) binom(n+m, m)).
    The phase sign is fixed by the quadrature convention
    x(theta) = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2), under
    which (n, m) = (0, 1) recovers <a> (not its conjugate).
    """
    if n < 0 or m < 0:
        raise ValueError("moment orders must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = np.asarray(theta, dtype=float)
    h = hermite_table(n + m, x)[n + m]
    norm = 2.0 * np.pi * math.sqrt(2.0 ** (n + m)) * math.comb(n + m, m)
    out = np.exp(1j * (m - n) * theta) * h / norm
    return complex(out[0]) if out.size == 1 and out.ndim <= 1 and np.ndim(theta) == 0 else out


def kernel_exp_phase_classical(k, x):
    """Classical-limit radial kernel.

    Odd k = 2m+1: (1/4)(-1)^m (2m+1) sign(x).
    Even k = 2m:  (1/pi)(-1)^(m+1) m log|x|  (singular at x = 0).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    m, rem = divmod(k, 2)
    if rem:
        out = 0.25 * (-1.0) ** m * (2 * m + 1) * np.sign(x)
    else:
        if np.any(x == 0.0):
            raise KernelDomainError(f"classical kernel for even k={k} diverges at x = 0")
        out = (-1.0) ** (m + 1) * m * np.log(np.abs(x)) / np.pi
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# exact integral forms for k = 1, 2


@lru_cache(maxsize=None)
def _gl_nodes(panels, order=80):
    xs, ws = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in panels:
        nodes.append(0.5 * (b - a) * xs + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * ws)
    return np.concatenate(nodes), np.concatenate(weights)


def _k1_exact(x):
    # t = s^2 removes the 1/sqrt(t) endpoint: integrand 2 / cosh^2(s^2)
    # * Phi(2, 3/2, -x^2 tanh s^2); tail beyond s = 5 (t = 25) is < 1e-20.
    s, w = _gl_nodes(((0.0, 1.0), (1.0, 2.2), (2.2, 3.5), (3.5, 5.0)))
    t = s * s
    base = 2.0 / np.cosh(t) ** 2 * w
    z = -np.outer(x * x, np.tanh(t))
    phi = kummer_phi(2, 1.5, z.ravel()).reshape(z.shape)
    return np.pi ** -1.5 * x * (phi @ base)


def _k2_raw(x):
    # The bare integrand has an x-independent -1/t pole at t -> 0;
    # adding e^{-t}/t makes it absolutely convergent, shifting K_2 by a
    # constant that the calibration below absorbs.
    t, w = _gl_nodes(((1e-12, 0.5), (0.5, 1.5), (1.5, 4.0), (4.0, 10.0), (10.0, 25.0)))
    base = -bessel_i0(t) / (np.cosh(t) ** 2 * np.sinh(t))
    z = -np.outer(x * x, np.tanh(t))
    phi = kummer_phi(2, 0.5, z.ravel()).reshape(z.shape)
    regularized = phi * base + np.exp(-t) / t
    return (regularized @ w) / (2.0 * np.pi)


K2_CALIBRATION_POINT = 10.0


@lru_cache(maxsize=1)
def k2_calibration_offset():
    """Additive constant fixing K_2 to the classical asymptote at x = 10."""
    return float(
        math.log(K2_CALIBRATION_POINT) / math.pi - _k2_raw(np.array([K2_CALIBRATION_POINT]))[0]
    )


def kernel_exp_phase_exact(k, x):
    """Radial kernel K_k(x) from the closed integral forms (k = 1, 2 only)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if k == 1:
        out = _k1_exact(x)
    elif k == 2:
        out = _k2_raw(x) + k2_calibration_offset()
    else:
        raise UnsupportedParameterError(
            "closed integral forms exist only for k = 1, 2; use kernel_exp_phase_series"
        )
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Hermite-series form, valid for any k at small |x|


@lru_cache(maxsize=None)
def series_coefficient(k, l):
    """Coefficient C_l^(k) of H_{2l+k} in the series kernel (log-factorial form)."""
    pref = math.exp(
        math.lgamma(l + k + 1) - (l + k / 2.0) * math.log(2.0) - math.lgamma(2 * l + k + 1)
    )
    total = 0.0
    for n in range(l + 1):
        root = math.exp(0.5 * (math.lgamma(n + k + 1) - math.lgamma(n + 1)))
        total += math.comb(l, n) * (-1.0) ** (l - n) / root
    return pref * total


def kernel_exp_phase_series(k, x, l_max=60):
    """Partial-sum series kernel; returns (value, last_term_magnitude).

    Validation regime only: |x| <= 2 and l_max <= 80.  The last-term
    magnitude serves as a convergence indicator; a
    :class:`ConvergenceError` is raised when it exceeds 1e-10.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if l_max < 1 or l_max > 80:
        raise UnsupportedParameterError("l_max must be in [1, 80]")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(np.abs(x) > 2.0):
        raise UnsupportedParameterError("series kernel is validated only for |x| <= 2")
    h = hermite_table(2 * l_max + k, x)
    total = np.zeros_like(x)
    for l in range(l_max + 1):
        last = series_coefficient(k, l) * h[2 * l + k]
        total += last
    total /= 2.0 * np.pi
    last_mag = float(np.max(np.abs(last))) / (2.0 * np.pi)
    if last_mag > 1e-10:
        raise ConvergenceError(f"series kernel not converged at l_max={l_max} (last term {last_mag:.2e})")
    if scalar:
        return float(total[0]), last_mag
    return total, last_mag


def _series_unchecked(k, x, l_max=80):
    # internal: no |x| <= 2 restriction; float64 stays reliable to |x| ~ 7
    h = hermite_table(2 * l_max + k, np.atleast_1d(x))
    total = np.zeros(np.atleast_1d(x).shape)
    for l in range(l_max + 1):
        total += series_coefficient(k, l) * h[2 * l + k]
    return total / (2.0 * np.pi)


@lru_cache(maxsize=None)
def _series_tail_polynomial(k):
    """Degree-(k-1) polynomial separating the series kernel from the classical limit.

    The series representative differs from the classical form by a
    member of the ambiguity class (a polynomial of degree < k with the
    parity of k), fitted on 4.5 <= x <= 6 where both evaluations hold.
    Returns (degrees, coefficients).
    """
    xs = np.arange(4.5, 6.0 + 1e-9, 0.01)
    resid = _series_unchecked(k, xs) - kernel_exp_phase_classical(k, xs)
    degrees = tuple(d for d in range(k) if d % 2 == k % 2)
    design = np.stack([xs ** d for d in degrees], axis=1)
    coef, *_ = np.linalg.lstsq(design, resid, rcond=None)
    return degrees, tuple(coef)


def kernel_exp_phase(k, x, x_switch=6.0):
    """Radial kernel K_k(x) with hybrid exact/classical dispatch.

    For k = 1, 2 the exact integral form is used for |x| <= x_switch and
    the classical limit beyond.  For k >= 3 no closed integral form
    exists; the Hermite series is used inside |x| <= 6 and, beyond, the
    classical limit plus the fitted ambiguity polynomial (so the k >= 3
    representative is series-validated, not certified).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    if k in (1, 2):
        inner = np.abs(x) <= x_switch
        if np.any(inner):
            out[inner] = kernel_exp_phase_exact(k, x[inner])
        if np.any(~inner):
            out[~inner] = kernel_exp_phase_classical(k, x[~inner])
    else:
        switch = min(x_switch, 6.0)  # series loses digits past |x| ~ 7
        inner = np.abs(x) <= switch
        if np.any(inner):
            out[inner] = _series_unchecked(k, x[inner])
        if np.any(~inner):
            degrees, coef = _series_tail_polynomial(k)
            xt = x[~inner]
            tail = kernel_exp_phase_classical(k, xt)
            for c, d in zip(coef, degrees):
                tail = tail + c * xt ** d
            out[~inner] = tail
    return float(out[0]) if scalar else out


@lru_cache(maxsize=None)
def exp_phase_evaluator(k, x_switch=6.0, step=0.0025):
    """Fast vectorized evaluator for K_k(x): interpolated table inside
    the switch, classical limit (plus ambiguity polynomial for k >= 3)
    outside.  Cached per (k, x_switch, step)."""
    switch = min(x_switch, 6.0) if k >= 3 else x_switch
    grid = step * np.arange(-int(math.ceil(switch / step)), int(math.ceil(switch / step)) + 1)
    table = kernel_exp_phase(k, grid, x_switch=np.inf if k in (1, 2) else 6.0)
    if k >= 3:
        degrees, coef = _series_tail_polynomial(k)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        inner = np.abs(x) <= switch
        out = np.where(inner, np.interp(x, grid, table), 0.0)
        if np.any(~inner):
            xt = np.where(inner, 1.0, x)  # dodge the even-k log singularity at masked points
            tail = kernel_exp_phase_classical(k, xt)
            if k >= 3:
                for c, d in zip(coef, degrees):
                    tail = tail + c * xt ** d
            out = np.where(inner, out, tail)
        return out

    return evaluate


def kernel_trig_sq(sign, x, theta, x_switch=6.0):
    """Kernels for <C^2> (sign '+') and <S^2> (sign '-'):

    K_+-(x, theta) = (1/4pi)[1 - Phi(1, 1/2, -x^2)] +- (1/2) cos(2 theta) K_2(x).
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    scalar = x.ndim == 0 and theta.ndim == 0
    common = (1.0 - kummer_phi(1, 0.5, -np.atleast_1d(x) ** 2)) / (4.0 * np.pi)
    k2 = exp_phase_evaluator(2, x_switch)(np.atleast_1d(x))
    s = 1.0 if sign == "+" else -1.0
    out = common + s * 0.5 * np.cos(2.0 * theta) * k2
    return float(out.ravel()[0]) if scalar else out


# ---------------------------------------------------------------------------
# tables and export


def build_kernel_table(spec, x_min=-8.0, x_max=8.0, step=0.05):
    """Tabulate a phase-independent (radial) kernel over a grid."""
    grid = np.arange(x_min, x_max + step / 2, step)
    offset = 0.0
    if spec.target == "vacuum_prob":
        values = kernel_vacuum_prob(grid)
    elif spec.target == "photon_number":
        values = kernel_photon_number(grid)
    elif spec.target == "photon_number_sq":
        values = kernel_photon_number_sq(grid)
    elif spec.target == "exp_phase":
        if spec.eval_strategy == "classical":
            values = kernel_exp_phase_classical(spec.k, grid)
        elif spec.eval_strategy == "series":
            values, _ = kernel_exp_phase_series(spec.k, grid)
        elif spec.eval_strategy == "integral":
            values = kernel_exp_phase_exact(spec.k, grid)
        else:
            values = kernel_exp_phase(spec.k, grid, x_switch=spec.x_switch)
        if spec.k == 2:
            offset = k2_calibration_offset()
    elif spec.target == "exp_phase_classical":
        values = kernel_exp_phase_classical(spec.k, grid)
    else:
        raise ValueError(f"{spec.target} is phase dependent; tabulate slices via export_kernel_csv")
    grid.setflags(write=False)
    values = np.asarray(values)
    values.setflags(write=False)
    return KernelTable(spec=spec, grid=grid, values=values, calibration_offset=offset)


def export_kernel_csv(path, spec, x_min=-8.0, x_max=8.0, step=0.05, thetas=None):
    """Write kernel samples as CSV.

    Radial kernels: header ``x,value`` plus a ``classical`` comparison
    column for exp_phase targets.  Phase-dependent kernels (trig_sq,
    moment): header ``x,theta,value`` with one block per theta.
    Values are formatted to 1e-6 absolute.
    """
    grid = np.arange(x_min, x_max + step / 2, step)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if spec.target == "trig_sq":
            thetas = [0.0] if thetas is None else list(thetas)
            writer.writerow(["x", "theta", "value"])
            for theta in thetas:
                vals = kernel_trig_sq(spec.sign, grid, theta, x_switch=spec.x_switch)
                for xv, v in zip(grid, vals):
                    writer.writerow([f"{xv:.6f}", f"{theta:.6f}", f"{v:.6f}"])
        elif spec.target == "moment":
            thetas = [0.0] if thetas is None else list(thetas)
            writer.writerow(["x", "theta", "value_re", "value_im"])
            for theta in thetas:
                vals = np.atleast_1d(kernel_moment(spec.n, spec.m, grid, theta))
                for xv, v in zip(grid, vals):
                    writer.writerow([f"{xv:.6f}", f"{theta:.6f}", f"{v.real:.6f}", f"{v.imag:.6f}"])
        elif spec.target == "exp_phase":
            table = build_kernel_table(spec, x_min, x_max, step)
            nonzero = grid if spec.k % 2 else np.where(grid == 0.0, np.nan, grid)
            with np.errstate(divide="ignore", invalid="ignore"):
                classical = np.where(
                    np.isnan(nonzero), np.nan,
                    kernel_exp_phase_classical(spec.k, np.where(np.isnan(nonzero), 1.0, nonzero)),
                )
            writer.writerow(["x", "value", "classical"])
            for xv, v, c in zip(grid, table.values, classical):
                writer.writerow([f"{xv:.6f}", f"{v:.6f}", "" if np.isnan(c) else f"{c:.6f}"])
        else:
            table = build_kernel_table(spec, x_min, x_max, step)
            writer.writerow(["x", "value"])
            for xv, v in zip(grid, table.values):
                writer.writerow([f"{xv:.6f}", f"{v:.6f}"])
    return path
