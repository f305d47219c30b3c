"""Balanced-homodyne data simulation and the direct-sampling estimator.

The measurement record is a list of (theta, x) pairs: the local
oscillator phase and the observed quadrature value.  Sampling draws x
from the exact quadrature distribution by inverse-CDF lookup on
per-phase tables.  Estimation averages 2 pi K(x_i, theta_i) over the
record, which converges to the target quantity with a 1/sqrt(m)
standard error.

Phases come either from a uniform grid theta_j = 2 pi j / n_theta
visited round-robin, or "uniform_random": each sample picks a phase
uniformly at random from a fine equidistant set of ``n_nodes`` values.
The discrete set makes the per-phase CDF tables precomputable and is
statistically exact here: the theta-dependence of p(x, theta) (and of
every kernel used) is a trigonometric polynomial of degree at most
n_max + 2 < n_nodes, which a uniform discrete phase average integrates
without bias.

Reproducibility: sampling is chunked with a fixed chunk size; chunk c
uses the RNG seeded by SeedSequence(entropy=seed, spawn_key=(c,)).
Chunks may be mapped over threads, but results are assembled in chunk
order, so the output is bit-identical for any thread count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .specfun import default_grid
from .states import quadrature_pdf_table

CHUNK_SIZE = 1 << 16
THREADS_ENV_VAR = "HOMODYNE_PHASE_THREADS"


class CdfBuildError(RuntimeError):
    """Too much probability mass falls outside the tabulated x grid."""


class EmptyDatasetError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseSchedule:
    """Phase schedule: 'grid' with n_theta phases, or 'uniform_random'
    over n_nodes equidistant candidate phases."""

    mode: str = "uniform_random"
    n_theta: int | None = None
    n_nodes: int = 2048

    def __post_init__(self):
        if self.mode not in ("uniform_random", "grid"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.mode == "grid" and (self.n_theta is None or self.n_theta < 1):
            raise ValueError("grid schedule requires n_theta >= 1")
        if self.mode == "uniform_random" and self.n_nodes < 3:
            raise ValueError("uniform_random schedule requires n_nodes >= 3")

    def phases(self):
        count = self.n_theta if self.mode == "grid" else self.n_nodes
        return 2.0 * np.pi * np.arange(count) / count

    @classmethod
    def parse(cls, text):
        """Parse ``uniform`` / ``uniform_random`` or ``grid:16``."""
        name, _, arg = text.partition(":")
        if name in ("uniform", "uniform_random"):
            return cls(mode="uniform_random", n_nodes=int(arg) if arg else 2048)
        if name == "grid":
            return cls(mode="grid", n_theta=int(arg))
        raise ValueError(f"cannot parse schedule {text!r}")

    def to_dict(self):
        return {"mode": self.mode, "n_theta": self.n_theta, "n_nodes": self.n_nodes}

    @classmethod
    def from_dict(cls, d):
        return cls(mode=d["mode"], n_theta=d.get("n_theta"), n_nodes=d.get("n_nodes", 2048))


@dataclass(frozen=True)
class QuadratureDataset:
    """Simulated measurement record, reproducible from (state, schedule, n, seed)."""

    thetas: np.ndarray
    xs: np.ndarray
    state_label: str
    seed: int
    schedule: PhaseSchedule

    def __post_init__(self):
        self.thetas.setflags(write=False)
        self.xs.setflags(write=False)

    @property
    def n(self):
        return self.xs.size


@dataclass(frozen=True)
class MomentEstimate:
    """One sampled quantity: complex value with component-wise standard errors."""

    target: kernels.KernelSpec
    value: complex
    std_error_re: float
    std_error_im: float
    n_samples: int
    flags: tuple = ()

    @property
    def std_error(self):
        return max(self.std_error_re, self.std_error_im)


def default_thread_count():
    env = os.environ.get(THREADS_ENV_VAR)
    return max(int(env), 1) if env else 1


def _chunk_rng(seed, chunk_index):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,)))


def build_cdf_tables(rho, schedule, step=0.01, pad=5.0):
    """Per-phase inverse-CDF tables for x | theta.

    Returns (x_grid, phases, cdf) with cdf of shape (n_phases, n_grid).
    Raises :class:`CdfBuildError` when more than 1e-9 probability mass
    falls outside the grid.
    """
    x_grid = default_grid(rho.n_max, step=step, pad=pad)
    phases = schedule.phases()
    pdf = quadrature_pdf_table(rho, x_grid, phases)
    increments = 0.5 * (pdf[:, 1:] + pdf[:, :-1]) * np.diff(x_grid)
    cdf = np.zeros_like(pdf)
    np.cumsum(increments, axis=1, out=cdf[:, 1:])
    mass = cdf[:, -1]
    if np.any(1.0 - mass > 1e-9):
        raise CdfBuildError(f"pdf mass outside grid up to {float(np.max(1.0 - mass)):.2e}")
    cdf /= mass[:, None]
    return x_grid, phases, cdf


def sample_dataset(rho, schedule, m, seed, state_label="", n_threads=None):
    """Draw ``m`` (theta, x) samples from the quadrature distribution of ``rho``."""
    if m < 1:
        raise ValueError("sample count must be >= 1")
    x_grid, phases, cdf = build_cdf_tables(rho, schedule)
    n_chunks = (m + CHUNK_SIZE - 1) // CHUNK_SIZE
    n_phases = phases.size

    def draw(chunk_index):
        start = chunk_index * CHUNK_SIZE
        size = min(CHUNK_SIZE, m - start)
        rng = _chunk_rng(seed, chunk_index)
        if schedule.mode == "grid":
            idx = (start + np.arange(size)) % n_phases  # round-robin by global index
        else:
            idx = rng.integers(0, n_phases, size=size)
        u = rng.random(size)
        x = np.empty(size)
        for t in np.unique(idx):
            sel = idx == t
            x[sel] = np.interp(u[sel], cdf[t], x_grid)
        x[x == 0.0] = 1e-12  # keep even-k classical kernels evaluable
        return phases[idx], x

    workers = n_threads if n_threads is not None else default_thread_count()
    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(draw, range(n_chunks)))
    else:
        parts = [draw(c) for c in range(n_chunks)]
    thetas = np.concatenate([p[0] for p in parts])
    xs = np.concatenate([p[1] for p in parts])
    return QuadratureDataset(
        thetas=thetas, xs=xs, state_label=state_label, seed=seed, schedule=schedule
    )


# ---------------------------------------------------------------------------
# estimation


def _per_sample_statistic(spec, x, theta):
    """2 pi K(x_i, theta_i) for each sample, as complex128."""
    t = spec.target
    two_pi = 2.0 * np.pi
    if t == "vacuum_prob":
        return two_pi * kernels.kernel_vacuum_prob(x) + 0j
    if t == "photon_number":
        return two_pi * kernels.kernel_photon_number(x) + 0j
    if t == "photon_number_sq":
        return two_pi * kernels.kernel_photon_number_sq(x) + 0j
    if t == "moment":
        return two_pi * kernels.kernel_moment(spec.n, spec.m, x, theta)
    if t == "exp_phase":
        radial = kernels.exp_phase_evaluator(spec.k, spec.x_switch)(x)
        return two_pi * np.exp(1j * spec.k * theta) * radial
    if t == "exp_phase_classical":
        radial = kernels.kernel_exp_phase_classical(spec.k, x)
        return two_pi * np.exp(1j * spec.k * theta) * radial
    if t == "trig_sq":
        return two_pi * kernels.kernel_trig_sq(spec.sign, x, theta, x_switch=spec.x_switch) + 0j
    raise ValueError(f"cannot estimate target {t!r}")


def estimate(dataset, spec):
    """Direct-sampling estimate of the quantity selected by ``spec``.

    Uniform schedule: plain mean of the per-sample statistic with its
    standard error.  Grid schedule: stratified mean over the phase
    strata (exact in theta for band-limited states), with the stratified
    standard error.
    """
    if dataset.n == 0:
        raise EmptyDatasetError("empty dataset")
    y = _per_sample_statistic(spec, dataset.xs, dataset.thetas)
    m = dataset.n
    flags = ()
    if spec.target == "exp_phase" and spec.k is not None and spec.k >= 3:
        flags = ("series_validated",)

    if dataset.schedule.mode == "grid":
        g = dataset.schedule.phases().size
        idx = np.rint(dataset.thetas * g / (2.0 * np.pi)).astype(int) % g
        counts = np.bincount(idx, minlength=g).astype(float)
        if np.any(counts == 0):
            raise ValueError("grid schedule stratum with no samples")
        mean_re = np.bincount(idx, weights=y.real, minlength=g) / counts
        mean_im = np.bincount(idx, weights=y.imag, minlength=g) / counts
        value = complex(mean_re.mean(), mean_im.mean())

        def stratified_se(comp, means):
            sq = np.bincount(idx, weights=comp ** 2, minlength=g) / counts
            var = (sq - means ** 2) * counts / np.maximum(counts - 1, 1)
            return math.sqrt(float(np.sum(var / counts))) / g

        se_re = stratified_se(y.real, mean_re)
        se_im = stratified_se(y.imag, mean_im)
    else:
        value = complex(y.mean())
        se_re = float(y.real.std(ddof=1)) / math.sqrt(m) if m > 1 else 0.0
        se_im = float(y.imag.std(ddof=1)) / math.sqrt(m) if m > 1 else 0.0

    return MomentEstimate(
        target=spec, value=value, std_error_re=se_re, std_error_im=se_im,
        n_samples=m, flags=flags,
    )


SUITE_KEYS = ("psi1", "psi2", "rho00", "mean_n", "mean_n2", "mean_c2", "mean_s2")


def suite_specs(x_switch=6.0):
    return {
        "psi1": kernels.KernelSpec(target="exp_phase", k=1, x_switch=x_switch),
        "psi2": kernels.KernelSpec(target="exp_phase", k=2, x_switch=x_switch),
        "rho00": kernels.KernelSpec(target="vacuum_prob", x_switch=x_switch),
        "mean_n": kernels.KernelSpec(target="photon_number", x_switch=x_switch),
        "mean_n2": kernels.KernelSpec(target="photon_number_sq", x_switch=x_switch),
        "mean_c2": kernels.KernelSpec(target="trig_sq", sign="+", x_switch=x_switch),
        "mean_s2": kernels.KernelSpec(target="trig_sq", sign="-", x_switch=x_switch),
    }


def estimate_suite(dataset, x_switch=6.0):
    """All quantities the uncertainty relations need, as a dict of estimates."""
    return {key: estimate(dataset, spec) for key, spec in suite_specs(x_switch).items()}


def estimate_dense(rho, spec, n_theta=128, step=0.005):
    """Deterministic-quadrature version of :func:`estimate`.

    Replaces the Monte Carlo average by a trapezoid x integral and a
    uniform phase grid, isolating kernel error from sampling noise.
    """
    x_grid = default_grid(rho.n_max, step=step)
    x_grid = np.where(x_grid == 0.0, 1e-12, x_grid)
    phases = 2.0 * np.pi * np.arange(n_theta) / n_theta
    pdf = quadrature_pdf_table(rho, x_grid, phases)
    total = 0j
    for j, theta in enumerate(phases):
        stat = _per_sample_statistic(spec, x_grid, theta)
        total += np.trapezoid(stat * pdf[j], x_grid)
    return complex(total / n_theta)


# ---------------------------------------------------------------------------
# file formats


def save_dataset(dataset, csv_path, sidecar_path):
    """CSV ``theta,x`` (full precision) plus a JSON sidecar with the run metadata."""
    with open(csv_path, "w") as fh:
        fh.write("theta,x\n")
        for theta, x in zip(dataset.thetas, dataset.xs):
            fh.write(f"{float(theta)!r},{float(x)!r}\n")
    sidecar = {
        "state_label": dataset.state_label,
        "seed": dataset.seed,
        "schedule": dataset.schedule.to_dict(),
        "m": int(dataset.n),
    }
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(csv_path, sidecar_path):
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1).reshape(-1, 2)
    return QuadratureDataset(
        thetas=data[:, 0],
        xs=data[:, 1],
        state_label=sidecar["state_label"],
        seed=sidecar["seed"],
        schedule=PhaseSchedule.from_dict(sidecar["schedule"]),
    )


def estimate_to_dict(est):
    return {
        "target": est.target.label(),
        "value_re": est.value.real,
        "value_im": est.value.imag,
        "std_error": est.std_error,
        "std_error_re": est.std_error_re,
        "std_error_im": est.std_error_im,
        "n_samples": est.n_samples,
        "flags": list(est.flags),
    }


def estimates_to_json(estimates):
    """Serialize a dict (or list) of estimates deterministically."""
    if isinstance(estimates, dict):
        payload = {key: estimate_to_dict(e) for key, e in estimates.items()}
    else:
        payload = [estimate_to_dict(e) for e in estimates]
    return json.dumps(payload, indent=2, sort_keys=True)
