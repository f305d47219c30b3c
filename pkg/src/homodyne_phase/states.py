"""Exact quantum-state oracles in a truncated Fock basis.

States are represented by density matrices rho_{nn'} with n, n' up to
an adaptive cutoff chosen so the truncated trace is >= 1 - 1e-10.
Every quantity the sampling pipeline estimates has an exact counterpart
here, computed directly from rho:

* quadrature distribution  p(x, theta) = sum e^{i(n'-n)theta} psi_n psi_n' rho_{nn'},
* exponential phase moments  Psi_k = sum_n rho_{n+k, n},
* photon moments and the phase / trigonometric uncertainty measures.

Phase convention: x(theta) = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2),
so a coherent state |alpha| e^{i phi} has mean quadrature
sqrt(2)|alpha| cos(theta - phi) and mean phase arg Psi_1 = phi.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .specfun import osc_eigenfunction_table

TRACE_TARGET = 1.0 - 1e-10
N_MAX_CAP = 512


class TruncationError(RuntimeError):
    """The Fock cutoff cap cannot capture the requested trace."""


@dataclass(frozen=True)
class DensityMatrix:
    """Truncated Fock-basis density matrix (immutable)."""

    elements: np.ndarray

    def __post_init__(self):
        rho = np.ascontiguousarray(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        if not np.allclose(rho, rho.conj().T, atol=1e-12, rtol=0):
            raise ValueError("density matrix must be Hermitian")
        rho = 0.5 * (rho + rho.conj().T)  # exact Hermiticity
        tr = float(np.trace(rho).real)
        if not (TRACE_TARGET - 1e-12 <= tr <= 1.0 + 1e-12):
            raise ValueError(f"trace {tr} outside [1 - 1e-10, 1]")
        if np.any(rho.diagonal().real < -1e-14):
            raise ValueError("negative diagonal element")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def dim(self):
        return self.elements.shape[0]

    @property
    def n_max(self):
        return self.dim - 1

    @property
    def trace(self):
        return float(np.trace(self.elements).real)


def _from_amplitudes(c):
    return DensityMatrix(np.outer(c, c.conj()))


def fock_state(n, n_max=None):
    if n < 0:
        raise ValueError("Fock index must be non-negative")
    dim = (n if n_max is None else n_max) + 1
    if dim < n + 1:
        raise ValueError("n_max below Fock index")
    c = np.zeros(dim, dtype=complex)
    c[n] = 1.0
    return _from_amplitudes(c)


def coherent_state(alpha, n_max=None):
    """Coherent state |alpha>; cutoff grown until the Poisson trace target holds."""
    alpha = complex(alpha)
    a2 = abs(alpha) ** 2
    if n_max is None:
        n_max = 16
        while True:
            weights = _poisson_log_weights(a2, n_max)
            if math.fsum(np.exp(weights)) >= TRACE_TARGET:
                break
            if n_max >= N_MAX_CAP:
                raise TruncationError(f"coherent({alpha}) needs more than {N_MAX_CAP} Fock terms")
            n_max = min(2 * n_max, N_MAX_CAP)
    n = np.arange(n_max + 1)
    log_mag = 0.5 * _poisson_log_weights(a2, n_max)
    c = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha) if alpha != 0 else 0.0)
    if (np.abs(c) ** 2).sum() < TRACE_TARGET:
        raise TruncationError("coherent-state cutoff misses the trace target")
    return _from_amplitudes(c)


def _poisson_log_weights(a2, n_max):
    n = np.arange(n_max + 1)
    if a2 == 0.0:
        out = np.full(n_max + 1, -np.inf)
        out[0] = 0.0
        return out
    return -a2 + n * math.log(a2) - np.array([math.lgamma(i + 1) for i in n])


def thermal_state(nbar, n_max=None):
    """Thermal state, diagonal weights nbar^n / (1 + nbar)^(n+1)."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if nbar == 0:
        return fock_state(0, n_max=n_max)
    q = nbar / (1.0 + nbar)
    if n_max is None:
        # residual tail mass is q^(n_max + 1)
        n_max = int(math.ceil(-10.0 * math.log(10.0) / math.log(q))) + 1
        if n_max > N_MAX_CAP:
            raise TruncationError(f"thermal({nbar}) needs more than {N_MAX_CAP} Fock terms")
    n = np.arange(n_max + 1)
    p = q ** n / (1.0 + nbar)
    if p.sum() < TRACE_TARGET:
        raise TruncationError("thermal-state cutoff misses the trace target")
    return DensityMatrix(np.diag(p.astype(complex)))


def squeezed_vacuum_state(r, n_max=None):
    """Squeezed vacuum: even amplitudes
    c_{2m} = sqrt(sech r) (-tanh r)^m sqrt((2m)!) / (2^m m!)."""
    if n_max is None:
        n_max = 16
        while True:
            c = _squeezed_amplitudes(r, n_max)
            if (np.abs(c) ** 2).sum() >= TRACE_TARGET:
                break
            if n_max >= N_MAX_CAP:
                raise TruncationError(f"squeezed({r}) needs more than {N_MAX_CAP} Fock terms")
            n_max = min(2 * n_max, N_MAX_CAP)
    c = _squeezed_amplitudes(r, n_max)
    if (np.abs(c) ** 2).sum() < TRACE_TARGET:
        raise TruncationError("squeezed-vacuum cutoff misses the trace target")
    return _from_amplitudes(c)


def _squeezed_amplitudes(r, n_max):
    c = np.zeros(n_max + 1, dtype=complex)
    th = math.tanh(r)
    c[0] = math.sqrt(1.0 / math.cosh(r))
    if th != 0.0:
        for m in range(1, n_max // 2 + 1):
            log_mag = (
                0.5 * math.log(1.0 / math.cosh(r))
                + m * math.log(abs(th))
                + 0.5 * math.lgamma(2 * m + 1)
                - m * math.log(2.0)
                - math.lgamma(m + 1)
            )
            c[2 * m] = math.copysign(1.0, -th) ** m * math.exp(log_mag)
    return c


def make_state(spec, n_max=None):
    """Build a state from a CLI-style spec string.

    Examples: ``fock:3``, ``coherent:1.0+0.5i``, ``thermal:0.5``,
    ``squeezed:0.8``.
    """
    kind, _, arg = spec.partition(":")
    kind = kind.strip()
    if kind == "fock":
        return fock_state(int(arg), n_max=n_max)
    if kind == "coherent":
        return coherent_state(complex(arg.replace("i", "j")), n_max=n_max)
    if kind == "thermal":
        return thermal_state(float(arg), n_max=n_max)
    if kind in ("squeezed", "squeezed_vacuum"):
        return squeezed_vacuum_state(float(arg), n_max=n_max)
    raise ValueError(f"unknown state spec {spec!r}")


def rotate_phase(rho, phi0):
    """Apply the phase rotation e^{i phi0 n}: rho -> U rho U^dag."""
    n = np.arange(rho.dim)
    u = np.exp(1j * phi0 * n)
    return DensityMatrix(u[:, None] * rho.elements * u.conj()[None, :])


# ---------------------------------------------------------------------------
# quadrature distribution


def quadrature_pdf(rho, x, theta):
    """p(x, theta) for scalar theta; vectorized over x."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    psi = osc_eigenfunction_table(rho.n_max, np.atleast_1d(x))
    n = np.arange(rho.dim)
    v = np.exp(1j * n * theta)[:, None] * psi
    p = np.einsum("nx,nm,mx->x", v.conj(), rho.elements, v).real
    p = np.maximum(p, 0.0)  # clip 1e-12-level imaginary/rounding residue
    return float(p[0]) if scalar else p


def quadrature_pdf_table(rho, x, thetas):
    """p(x, theta) as a (len(thetas), len(x)) table.

    Uses the spectral decomposition of rho so the cost scales with the
    state's rank; diagonal states collapse to a single phase-independent
    row.
    """
    x = np.asarray(x, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    psi = osc_eigenfunction_table(rho.n_max, x)
    off_diag = rho.elements - np.diag(rho.elements.diagonal())
    if np.max(np.abs(off_diag)) < 1e-15:
        row = rho.elements.diagonal().real @ psi ** 2
        return np.broadcast_to(row, (thetas.size, x.size)).copy()
    w, vecs = np.linalg.eigh(rho.elements)
    keep = np.nonzero(w > 1e-14)[0]
    n = np.arange(rho.dim)
    # |x, theta> = e^{i theta n} |x>, so the row vector carries e^{-i theta n}
    phase = np.exp(-1j * np.outer(thetas, n))
    p = np.zeros((thetas.size, x.size))
    for j in keep:
        u = (phase * vecs[:, j]) @ psi
        p += w[j] * (u.real ** 2 + u.imag ** 2)
    return p


# ---------------------------------------------------------------------------
# oracles


def exp_phase_moment_oracle(rho, k):
    """Psi_k = <E^k> = sum_n rho_{n+k, n}."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > rho.n_max:
        return 0j
    return complex(np.trace(rho.elements, offset=-k))


def photon_moments_oracle(rho):
    """(mean_n, mean_n2, delta_n) from the diagonal of rho."""
    n = np.arange(rho.dim)
    p = rho.elements.diagonal().real
    mean_n = float((n * p).sum())
    mean_n2 = float((n * n * p).sum())
    return mean_n, mean_n2, math.sqrt(max(mean_n2 - mean_n ** 2, 0.0))


@dataclass(frozen=True)
class TrigStatistics:
    """First and second moments of the Susskind-Glogower operators."""

    mean_c: float
    mean_s: float
    mean_c2: float
    mean_s2: float
    delta_c: float
    delta_s: float
    rho00: float


def trig_statistics_oracle(rho):
    """<C>, <S>, <C^2>, <S^2> from Psi_1, Psi_2 and rho_00:

    C^2 = 1/2 + (E^2 + E^dag^2)/4 - |0><0|/4  (and S^2 with a minus sign).
    """
    psi1 = exp_phase_moment_oracle(rho, 1)
    psi2 = exp_phase_moment_oracle(rho, 2) if rho.n_max >= 2 else 0j
    rho00 = float(rho.elements[0, 0].real)
    mean_c = psi1.real
    mean_s = psi1.imag
    mean_c2 = 0.5 + 0.5 * psi2.real - 0.25 * rho00
    mean_s2 = 0.5 - 0.5 * psi2.real - 0.25 * rho00
    return TrigStatistics(
        mean_c=mean_c,
        mean_s=mean_s,
        mean_c2=mean_c2,
        mean_s2=mean_s2,
        delta_c=math.sqrt(max(mean_c2 - mean_c ** 2, 0.0)),
        delta_s=math.sqrt(max(mean_s2 - mean_s ** 2, 0.0)),
        rho00=rho00,
    )


@dataclass(frozen=True)
class PhaseStatistics:
    """Exponential phase moments and the derived uncertainty measures.

    ``sigma_h`` is ``math.inf`` when delta_phi = pi/2 (|Psi_1| = 0),
    marking the Holevo dispersion as indeterminate rather than huge.
    """

    psi: tuple
    mean_phase: float
    delta_phi: float
    sigma_bp: float
    sigma_h: float


def phase_statistics_oracle(rho, k_max=4):
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    psi = tuple(exp_phase_moment_oracle(rho, k) for k in range(1, k_max + 1))
    mag = abs(psi[0])
    delta_phi = math.acos(min(mag, 1.0))
    sigma_h = math.inf if mag == 0.0 else math.tan(delta_phi)
    return PhaseStatistics(
        psi=psi,
        mean_phase=float(np.angle(psi[0])) if mag > 0 else 0.0,
        delta_phi=delta_phi,
        sigma_bp=math.sin(delta_phi),
        sigma_h=sigma_h,
    )


# ---------------------------------------------------------------------------
# JSON round-trip (row-major complex pairs)


def to_json(rho):
    flat = [[float(v.real), float(v.imag)] for v in rho.elements.ravel()]
    return json.dumps({"dim": rho.dim, "elements": flat})


def from_json(text):
    payload = json.loads(text)
    dim = payload["dim"]
    flat = np.array([complex(re, im) for re, im in payload["elements"]])
    return DensityMatrix(flat.reshape(dim, dim))
