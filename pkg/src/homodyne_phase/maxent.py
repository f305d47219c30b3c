"""Maximum-entropy reconstruction of a phase distribution from moments.

Given a finite set of exponential moments Psi_1..Psi_K, the
least-biased compatible distribution has the exponential-family form

    p(phi) = exp( sum_k a_k cos(k phi) + b_k sin(k phi) - log Z ),

and the multipliers solve a smooth convex dual problem:
minimize log Z(lambda) - lambda . target, whose gradient is
(model moments - target) and whose Hessian is the covariance matrix of
the trigonometric features under the current density (positive definite
in the interior of the moment body).  A damped Newton iteration on a
periodic grid converges in a handful of steps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


class InfeasibleMomentsError(ValueError):
    """Some |Psi_k| >= 1: outside the open moment body."""


class MaxentConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class PhaseDistribution:
    """Reconstructed phase density on an equidistant grid over [0, 2 pi).

    ``lambdas`` stores the 2K multipliers as [a_1..a_K, b_1..b_K].
    """

    grid: np.ndarray
    density: np.ndarray
    lambdas: np.ndarray
    log_z: float
    iterations: int = 0
    residual: float = 0.0
    flags: tuple = ()

    def __post_init__(self):
        self.grid.setflags(write=False)
        self.density.setflags(write=False)
        self.lambdas.setflags(write=False)

    @property
    def n_moments(self):
        return self.lambdas.size // 2

    def entropy(self):
        dphi = 2.0 * np.pi / self.grid.size
        p = np.maximum(self.density, 1e-300)
        return float(-(p * np.log(p)).sum() * dphi)


def _features(grid, k_max):
    """(2K, n_phi) rows: cos(k phi), sin(k phi) for k = 1..K."""
    k = np.arange(1, k_max + 1)
    angles = np.outer(k, grid)
    return np.concatenate([np.cos(angles), np.sin(angles)])


def _density_and_logz(lambdas, feats, dphi):
    g = lambdas @ feats
    g_max = g.max()
    w = np.exp(g - g_max)
    z = w.sum() * dphi
    return w / z, math.log(z) + g_max


def reconstruct_phase_dist(moments, n_phi=1024, tol=1e-10, max_iter=100, clamp_boundary=False):
    """Entropy-maximizing density matching the given complex moments.

    ``moments`` is the sequence Psi_1..Psi_K; K = 0 returns the uniform
    density.  Moments on or outside the unit circle raise
    :class:`InfeasibleMomentsError` unless ``clamp_boundary`` is set, in
    which case they are shrunk just inside and the result is flagged.
    """
    moments = [complex(mk) for mk in moments]
    k_max = len(moments)
    grid = 2.0 * np.pi * np.arange(n_phi) / n_phi
    dphi = 2.0 * np.pi / n_phi
    flags = []
    for i, mk in enumerate(moments):
        if abs(mk) >= 1.0:
            if not clamp_boundary:
                raise InfeasibleMomentsError(f"|Psi_{i + 1}| = {abs(mk)} >= 1")
            moments[i] = mk * (1.0 - 1e-9) / abs(mk)
            flags.append(f"moment_{i + 1}_shrunk")

    if k_max == 0:
        density = np.full(n_phi, 1.0 / (2.0 * np.pi))
        return PhaseDistribution(
            grid=grid, density=density, lambdas=np.zeros(0), log_z=math.log(2.0 * np.pi),
        )

    target = np.concatenate([[mk.real for mk in moments], [mk.imag for mk in moments]])
    feats = _features(grid, k_max)
    lambdas = np.zeros(2 * k_max)
    density, log_z = _density_and_logz(lambdas, feats, dphi)

    def dual(lam):
        _, lz = _density_and_logz(lam, feats, dphi)
        return lz - lam @ target

    objective = dual(lambdas)
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        model = (feats * density).sum(axis=1) * dphi
        gradient = model - target
        residual = float(np.max(np.abs(gradient)))
        if residual < tol:
            return PhaseDistribution(
                grid=grid, density=density, lambdas=lambdas, log_z=log_z,
                iterations=iteration - 1, residual=residual, flags=tuple(flags),
            )
        hessian = (feats * density) @ feats.T * dphi - np.outer(model, model)
        try:
            chol = np.linalg.cholesky(hessian)
        except np.linalg.LinAlgError:
            raise MaxentConvergenceError("Hessian lost positive definiteness", residual)
        step = -np.linalg.solve(chol.T, np.linalg.solve(chol, gradient))
        scale = 1.0
        for _ in range(40):  # halve until the dual objective decreases
            trial = lambdas + scale * step
            trial_objective = dual(trial)
            if trial_objective <= objective + 1e-14:
                break
            scale *= 0.5
        else:
            raise MaxentConvergenceError("line search failed", residual)
        lambdas = lambdas + scale * step
        objective = trial_objective
        density, log_z = _density_and_logz(lambdas, feats, dphi)

    raise MaxentConvergenceError(
        f"no convergence in {max_iter} Newton iterations (residual {residual:.2e})", residual
    )


def distribution_to_csv(dist, path):
    """Write ``phi,p`` rows."""
    with open(path, "w") as fh:
        fh.write("phi,p\n")
        for phi, p in zip(dist.grid, dist.density):
            fh.write(f"{float(phi)!r},{float(p)!r}\n")
    return path


def distribution_diagnostics_json(dist):
    payload = {
        "lambdas": [float(v) for v in dist.lambdas],
        "log_z": dist.log_z,
        "residuals": dist.residual,
        "iterations": dist.iterations,
        "flags": list(dist.flags),
    }
    return json.dumps(payload, indent=2, sort_keys=True)
