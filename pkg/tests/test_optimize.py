import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from conftest import GAMMA_M, OMEGA_M
from synodyne import (
    CovarianceMatrix,
    InvalidInputError,
    LoSpinor,
    NoTransductionError,
    covariance_at,
    eigenvalues,
    force_imprecision,
    homodyne_imprecision,
    make_params,
    optimal_force_spinor,
    optimal_noise_spinor,
    responses,
    synodyne_psd_dc,
    sweep,
)
from synodyne.optimize import DEFAULT_GRID, numerical_force_minimum, numerical_noise_minimum, worker_count


def random_covariance(rng) -> CovarianceMatrix:
    # c11 anywhere, c22 anywhere, c12 limited so the matrix stays positive definite
    c11, c22 = rng.uniform(0.05, 5, 2)
    bound = math.sqrt(c11 * c22)
    return CovarianceMatrix(0.2, c11, bound * rng.uniform(0, 0.999) * cmath.exp(1j * rng.uniform(-math.pi, math.pi)), c22)


def test_uncorrelated_picks_quieter_quadrature():
    spinor, value = optimal_noise_spinor(CovarianceMatrix(0.2, 0.5, 0j, 3.0))
    assert (spinor.alpha_am, spinor.alpha_pm, value) == (1, 0, 0.5)
    spinor, value = optimal_noise_spinor(CovarianceMatrix(0.2, 3.0, 0j, 0.5))
    assert (spinor.pow_am, spinor.pow_pm, value) == (0, 1, 0.5)


def test_degenerate_tie_break():
    spinor, value = optimal_noise_spinor(CovarianceMatrix(0.2, 0.5, 0j, 0.5))
    assert (spinor.alpha_am, spinor.alpha_pm, value) == (1, 0, 0.5)


def test_noise_optimum_at_figure_point(fig_params):
    cov = covariance_at(fig_params, OMEGA_M)
    spinor, value = optimal_noise_spinor(cov)
    assert value == pytest.approx(float(oracle.eig_minus(*oracle.covariance(
        oracle.FIG["omega_m"], oracle.FIG["omega_m"], oracle.FIG["gamma_m"], 0,
        oracle.coupling("0.9", oracle.FIG["gamma_m"])))), rel=1e-12)
    assert synodyne_psd_dc(cov, spinor) == pytest.approx(value, rel=1e-12)
    phase_sum = cmath.phase(spinor.alpha_am) + cmath.phase(spinor.alpha_pm)
    assert cmath.exp(1j * phase_sum) == pytest.approx(cmath.exp(1j * (cmath.phase(cov.c12) + math.pi)), abs=1e-12)
    # magnitudes form the lower eigenvector of the real matrix [[c11, -|c12|], [-|c12|, c22]]
    real = np.array([[cov.c11, -abs(cov.c12)], [-abs(cov.c12), cov.c22]])
    vec = np.linalg.eigh(real)[1][:, 0]
    assert abs(spinor.alpha_am) == pytest.approx(abs(vec[0]), rel=1e-12)
    assert abs(spinor.alpha_pm) == pytest.approx(abs(vec[1]), rel=1e-12)


def test_noise_optimum_matches_eigenvalues_and_search():
    rng = np.random.default_rng(2024)
    for i in range(50):
        cov = random_covariance(rng)
        spinor, value = optimal_noise_spinor(cov)
        ref = np.linalg.eigvalsh(cov.as_array())[0]
        assert value == pytest.approx(ref, rel=1e-12)
        assert synodyne_psd_dc(cov, spinor) == pytest.approx(ref, rel=1e-12, abs=1e-15)
        _, searched = numerical_noise_minimum(cov)
        assert searched == pytest.approx(value, rel=1e-9)


def test_force_optimum_at_figure_point(fig_params):
    spinor, value = optimal_force_spinor(fig_params)
    cov = covariance_at(fig_params, OMEGA_M)
    assert value == pytest.approx(float(oracle.s_ff_min(oracle.FIG["omega_m"], oracle.FIG["gamma_m"], 0,
                                                        oracle.coupling("0.9", oracle.FIG["gamma_m"]))), rel=1e-12)
    assert value == pytest.approx(0.6611, abs=1e-4)
    ratio = abs(spinor.alpha_am) / abs(spinor.alpha_pm)
    assert ratio == pytest.approx(abs(cov.c12) / cov.c11, rel=1e-12)
    assert ratio == pytest.approx(1.5518, abs=1e-3)
    assert value <= force_imprecision(fig_params, LoSpinor(0, 1))
    _, searched = numerical_force_minimum(fig_params)
    assert searched == pytest.approx(value, rel=1e-9)


def test_force_optimum_needs_coupling():
    with pytest.raises(NoTransductionError):
        optimal_force_spinor(make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0))


def test_force_optimum_weak_and_strong_coupling():
    weak = optimal_force_spinor(make_params(OMEGA_M, GAMMA_M, 0.0, c_om=1e-4))[0]
    assert weak.pow_am < 1e-6
    s09 = optimal_force_spinor(make_params(OMEGA_M, GAMMA_M, 0.0, c_om=0.9))[1]
    s2 = optimal_force_spinor(make_params(OMEGA_M, GAMMA_M, 0.0, c_om=2.0))[1]
    assert s2 < s09


@given(st.floats(1e-3, 1e4), st.floats(0, 10), st.floats(0.05, 5), st.floats(1e-4, 0.1))
def test_back_action_cancels(c_om, nbar, omega_m, gamma_m):
    p = make_params(omega_m, gamma_m, nbar, c_om=c_om)
    s_ff = optimal_force_spinor(p)[1]
    r = responses(p, omega_m)
    floor = 0.5 + (nbar + 0.5) * (abs(r.t_q) ** 2 + abs(r.t_p) ** 2)
    assert s_ff * 2 * abs(r.t_p) ** 2 - floor == pytest.approx(0.0, abs=1e-10 * floor)


@given(st.floats(-math.pi, math.pi), st.floats(0.01, 100))
def test_gauge_invariance(phi, c_om):
    p = make_params(OMEGA_M, GAMMA_M, 0.0, c_om=c_om)
    cov = covariance_at(p, OMEGA_M)
    noise, value = optimal_noise_spinor(cov)
    force, s_ff = optimal_force_spinor(p)
    assert synodyne_psd_dc(cov, noise.gauge_rotated(phi)) == pytest.approx(value, rel=1e-12)
    assert force_imprecision(p, force.gauge_rotated(phi)) == pytest.approx(s_ff, rel=1e-12)


def test_sweep_noise_single_point(fig_params):
    (row,) = sweep(fig_params, [0.9], "noise")
    assert row.objective == pytest.approx(0.2966, abs=1e-4)
    assert row.reference == pytest.approx(row.objective, rel=1e-12)


def test_sweep_force_power_split():
    low, high = sweep(make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0), [0.08, 2.0], "force")
    assert low.pow_pm > high.pow_pm
    assert low.reference == pytest.approx(homodyne_imprecision(make_params(OMEGA_M, GAMMA_M, 0.0, c_om=0.08)))


@pytest.mark.parametrize("objective", ["noise", "force"])
def test_sweep_rows(objective, monkeypatch):
    base = make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0)
    rows = sweep(base, objective=objective)
    assert [r.c_om for r in rows] == list(DEFAULT_GRID)
    for r in rows:
        assert r.pow_am + r.pow_pm == pytest.approx(1.0, abs=1e-12)
        assert r.objective <= r.reference + 1e-12
    monkeypatch.setenv("SYNODYNE_THREADS", "3")
    assert sweep(base, objective=objective) == rows
    monkeypatch.setenv("SYNODYNE_THREADS", "1")
    assert sweep(base, objective=objective) == rows


def test_force_sweep_strictly_decreasing():
    rows = sweep(make_params(OMEGA_M, GAMMA_M, 0.3, g=0.0), np.logspace(-2, 2, 64), "force")
    assert all(b.objective < a.objective for a, b in zip(rows, rows[1:]))


@pytest.mark.parametrize("grid", [[], [1.0, 0.5], [0.0, 1.0], [1.0, float("nan")], [[1.0]]])
def test_sweep_rejects_bad_grids(grid):
    with pytest.raises(InvalidInputError):
        sweep(make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0), grid)


def test_sweep_rejects_unknown_objective():
    with pytest.raises(InvalidInputError):
        sweep(make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0), [1.0], "speed")


@pytest.mark.parametrize("raw", ["0", "-2", "many"])
def test_worker_count_validation(raw, monkeypatch):
    monkeypatch.setenv("SYNODYNE_THREADS", raw)
    with pytest.raises(InvalidInputError):
        worker_count()


def test_random_covariances_eigenvalue_agreement():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        cov = random_covariance(rng)
        assert optimal_noise_spinor(cov)[1] == pytest.approx(eigenvalues(cov)[0], rel=1e-12)
