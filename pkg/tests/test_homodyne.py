"""Tests for homodyne-data simulation and the sampling estimator."""

import math

import numpy as np
import pytest

from homodyne_phase.homodyne import (
    CdfBuildError,
    EmptyDatasetError,
    MomentEstimate,
    PhaseSchedule,
    QuadratureDataset,
    build_cdf_tables,
    estimate,
    estimate_dense,
    estimate_suite,
    estimates_to_json,
    load_dataset,
    sample_dataset,
    save_dataset,
)
from homodyne_phase.kernels import KernelSpec
from homodyne_phase.states import (
    coherent_state,
    exp_phase_moment_oracle,
    fock_state,
    make_state,
    photon_moments_oracle,
    trig_statistics_oracle,
)


# ---------------------------------------------------------------------------
# schedules


def test_schedule_parse_and_phases():
    grid = PhaseSchedule.parse("grid:16")
    assert grid.mode == "grid"
    np.testing.assert_allclose(grid.phases(), 2.0 * np.pi * np.arange(16) / 16)
    uni = PhaseSchedule.parse("uniform")
    assert uni.mode == "uniform_random" and uni.n_nodes == 2048
    with pytest.raises(ValueError):
        PhaseSchedule.parse("spiral:3")
    with pytest.raises(ValueError):
        PhaseSchedule(mode="grid")


def test_schedule_dict_round_trip():
    sched = PhaseSchedule(mode="grid", n_theta=8)
    assert PhaseSchedule.from_dict(sched.to_dict()) == sched


# ---------------------------------------------------------------------------
# sampling


def test_cdf_tables_cover_mass():
    x_grid, phases, cdf = build_cdf_tables(fock_state(1), PhaseSchedule(mode="grid", n_theta=4))
    assert cdf.shape == (4, x_grid.size)
    assert np.all(np.diff(cdf, axis=1) >= 0)
    np.testing.assert_allclose(cdf[:, -1], 1.0)


def test_cdf_build_error_on_short_grid():
    with pytest.raises(CdfBuildError):
        build_cdf_tables(coherent_state(2.0), PhaseSchedule(mode="grid", n_theta=2), pad=-2.0)


def test_sampling_deterministic_and_thread_invariant():
    rho = coherent_state(1.0)
    sched = PhaseSchedule.parse("uniform")
    a = sample_dataset(rho, sched, 200_000, seed=7, n_threads=1)
    b = sample_dataset(rho, sched, 200_000, seed=7, n_threads=4)
    np.testing.assert_array_equal(a.xs, b.xs)
    np.testing.assert_array_equal(a.thetas, b.thetas)
    c = sample_dataset(rho, sched, 200_000, seed=8, n_threads=1)
    assert not np.array_equal(a.xs, c.xs)


def test_vacuum_sample_variance():
    data = sample_dataset(fock_state(0), PhaseSchedule.parse("uniform"), 100_000, seed=1)
    # vacuum quadrature variance is 1/2; 3 sigma of the m = 1e5 mean of x^2
    assert abs(np.mean(data.xs ** 2) - 0.5) < 5e-3
    assert not np.any(data.xs == 0.0)  # exact zeros are nudged off the log singularity


def test_grid_schedule_per_phase_means():
    alpha = 2.0
    sched = PhaseSchedule(mode="grid", n_theta=16)
    data = sample_dataset(coherent_state(alpha), sched, 160_000, seed=3)
    phases = sched.phases()
    for j, theta in enumerate(phases):
        sel = np.isclose(data.thetas, theta)
        assert sel.sum() == 10_000
        mean = data.xs[sel].mean()
        expected = math.sqrt(2.0) * alpha * math.cos(theta)
        # per-phase quadrature std is 1/sqrt(2); 3 sigma of the mean
        assert abs(mean - expected) < 3.0 / math.sqrt(2.0 * sel.sum())


def test_sample_dataset_rejects_empty():
    with pytest.raises(ValueError):
        sample_dataset(fock_state(0), PhaseSchedule.parse("uniform"), 0, seed=0)


# ---------------------------------------------------------------------------
# estimation


def test_estimate_empty_dataset():
    data = QuadratureDataset(
        thetas=np.zeros(0), xs=np.zeros(0), state_label="", seed=0,
        schedule=PhaseSchedule.parse("uniform"),
    )
    with pytest.raises(EmptyDatasetError):
        estimate(data, KernelSpec(target="photon_number"))


def test_vacuum_estimates():
    data = sample_dataset(fock_state(0), PhaseSchedule.parse("uniform"), 200_000, seed=11)
    est_n = estimate(data, KernelSpec(target="photon_number"))
    assert abs(est_n.value.real) < 4.0 * est_n.std_error_re
    est_vac = estimate(data, KernelSpec(target="vacuum_prob"))
    assert abs(est_vac.value.real - 1.0) < 4.0 * est_vac.std_error_re


def test_coherent_psi1_estimate():
    rho = coherent_state(1.0)
    data = sample_dataset(rho, PhaseSchedule.parse("uniform"), 200_000, seed=5)
    est = estimate(data, KernelSpec(target="exp_phase", k=1))
    oracle = exp_phase_moment_oracle(rho, 1)
    assert abs(est.value.real - oracle.real) < 4.0 * est.std_error_re
    assert abs(est.value.imag - oracle.imag) < 4.0 * est.std_error_im
    assert est.flags == ()


def test_exp_phase_k3_flagged():
    data = sample_dataset(coherent_state(1.0), PhaseSchedule.parse("uniform"), 70_000, seed=5)
    est = estimate(data, KernelSpec(target="exp_phase", k=3))
    assert "series_validated" in est.flags


def test_estimate_suite_keys_and_agreement():
    rho = make_state("fock:1")
    data = sample_dataset(rho, PhaseSchedule.parse("uniform"), 200_000, seed=21)
    suite = estimate_suite(data)
    assert set(suite) == {"psi1", "psi2", "rho00", "mean_n", "mean_n2", "mean_c2", "mean_s2"}
    mean_n, mean_n2, _ = photon_moments_oracle(rho)
    assert abs(suite["mean_n"].value.real - mean_n) < 4.0 * suite["mean_n"].std_error_re
    assert abs(suite["mean_n2"].value.real - mean_n2) < 4.0 * suite["mean_n2"].std_error_re
    assert abs(suite["psi1"].value) < 4.0 * suite["psi1"].std_error


def test_grid_estimate_stratified():
    rho = coherent_state(1.0)
    data = sample_dataset(rho, PhaseSchedule(mode="grid", n_theta=16), 160_000, seed=9)
    est = estimate(data, KernelSpec(target="exp_phase", k=1))
    oracle = exp_phase_moment_oracle(rho, 1)
    assert abs(est.value.real - oracle.real) < 4.0 * est.std_error_re
    assert est.std_error_re > 0.0


def test_std_error_scaling_across_subsamples():
    data = sample_dataset(coherent_state(1.0), PhaseSchedule.parse("uniform"), 1 << 18, seed=13)
    spec = KernelSpec(target="photon_number")
    full = estimate(data, spec)
    m_small = data.n // 16
    small = estimate(
        QuadratureDataset(
            thetas=data.thetas[:m_small].copy(), xs=data.xs[:m_small].copy(),
            state_label="", seed=data.seed, schedule=data.schedule,
        ),
        spec,
    )
    ratio = small.std_error_re / full.std_error_re
    assert 2.0 < ratio < 8.0  # ideal 4x for a 16x subsample


def test_constant_offset_immunity_grid():
    # adding a constant to K_2 must not change a grid-schedule Psi_2
    # estimate at all: sum of e^{2 i theta_j} over the grid is zero
    data = sample_dataset(coherent_state(1.0), PhaseSchedule(mode="grid", n_theta=8), 64_000, seed=2)
    base = estimate(data, KernelSpec(target="exp_phase", k=2))
    y_offset = 2.0 * np.pi * np.exp(2j * data.thetas) * 0.37
    g = 8
    idx = np.rint(data.thetas * g / (2.0 * np.pi)).astype(int) % g
    shift_re = np.mean(np.bincount(idx, weights=y_offset.real, minlength=g) / np.bincount(idx, minlength=g))
    shift_im = np.mean(np.bincount(idx, weights=y_offset.imag, minlength=g) / np.bincount(idx, minlength=g))
    assert abs(complex(shift_re, shift_im)) < 1e-12
    oracle = exp_phase_moment_oracle(coherent_state(1.0), 2)
    assert abs(base.value - oracle) < 4.0 * base.std_error + 1e-12


# ---------------------------------------------------------------------------
# dense-quadrature unbiasedness


@pytest.mark.parametrize("label", ["fock:1", "coherent:1", "thermal:1", "squeezed:0.6"])
def test_dense_quadrature_reproduces_oracles(label):
    rho = make_state(label)
    mean_n, mean_n2, _ = photon_moments_oracle(rho)
    trig = trig_statistics_oracle(rho)
    checks = {
        "rho00": (KernelSpec(target="vacuum_prob"), trig.rho00),
        "mean_n": (KernelSpec(target="photon_number"), mean_n),
        "mean_n2": (KernelSpec(target="photon_number_sq"), mean_n2),
        "mean_c2": (KernelSpec(target="trig_sq", sign="+"), trig.mean_c2),
        "mean_s2": (KernelSpec(target="trig_sq", sign="-"), trig.mean_s2),
    }
    for name, (spec, oracle) in checks.items():
        got = estimate_dense(rho, spec)
        assert abs(got.real - oracle) < 1e-5, name
    for k in (1, 2):
        got = estimate_dense(rho, KernelSpec(target="exp_phase", k=k))
        assert abs(got - exp_phase_moment_oracle(rho, k)) < 1e-5


def test_dense_psi1_phase_convention():
    # a complex-amplitude state distinguishes Psi_1 from its conjugate,
    # pinning the theta sign convention of the whole sampling chain
    rho = coherent_state(1.0 * np.exp(0.7j))
    got = estimate_dense(rho, KernelSpec(target="exp_phase", k=1))
    want = exp_phase_moment_oracle(rho, 1)
    assert abs(got - want) < 1e-5
    assert abs(got - want.conjugate()) > 0.1


def test_grid_exactness_in_theta():
    # a coarse phase grid already integrates the bandlimited theta
    # dependence exactly; refining it changes nothing
    rho = coherent_state(1.0, n_max=20)
    for k in (1, 2):
        spec = KernelSpec(target="exp_phase", k=k)
        coarse = estimate_dense(rho, spec, n_theta=64)
        fine = estimate_dense(rho, spec, n_theta=512)
        assert abs(coarse - fine) < 1e-8


# ---------------------------------------------------------------------------
# file formats


def test_dataset_save_load_round_trip(tmp_path):
    data = sample_dataset(
        coherent_state(1.0), PhaseSchedule(mode="grid", n_theta=4), 500, seed=4,
        state_label="coherent:1",
    )
    csv_path, json_path = str(tmp_path / "d.csv"), str(tmp_path / "d.json")
    save_dataset(data, csv_path, json_path)
    back = load_dataset(csv_path, json_path)
    np.testing.assert_array_equal(back.xs, data.xs)
    np.testing.assert_array_equal(back.thetas, data.thetas)
    assert back.schedule == data.schedule
    assert back.state_label == "coherent:1"
    assert back.seed == 4


def test_estimates_json_shape():
    est = MomentEstimate(
        target=KernelSpec(target="exp_phase", k=1), value=0.5 + 0.1j,
        std_error_re=0.01, std_error_im=0.02, n_samples=100,
    )
    text = estimates_to_json({"psi1": est})
    assert '"target": "exp_phase:1"' in text
    assert '"std_error": 0.02' in text
    assert est.std_error == 0.02
