import numpy as np
import pytest

from conftest import GAMMA_M, OMEGA_M
from synodyne import UnsupportedDetuningError, make_params, responses
from synodyne.langevin import build_state_space, force_transfer, output_covariance, transfer_function_check, transfer_matrix
from synodyne.model import cavity_allpass

GRID = np.linspace(0.5 * OMEGA_M, 1.5 * OMEGA_M, 200)


@pytest.mark.parametrize("c_om", [0.3, 0.9, 2.0])
@pytest.mark.parametrize("nbar", [0.0, 0.5])
def test_transfer_check_figure_parameters(c_om, nbar):
    p = make_params(OMEGA_M, GAMMA_M, nbar, c_om=c_om)
    assert transfer_function_check(build_state_space(p), p, GRID) <= 1e-9


def test_transfer_check_zero_coupling():
    p = make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0)
    # transduction gains vanish identically; only the vacuum entries carry rounding
    assert transfer_function_check(build_state_space(p), p, GRID) <= 1e-15
    h = transfer_matrix(build_state_space(p), GRID)
    assert not np.any(h[:, 1, :3])


def test_doubling_coupling_quadruples_back_action():
    a = make_params(OMEGA_M, GAMMA_M, 0.0, g=0.02)
    b = make_params(OMEGA_M, GAMMA_M, 0.0, g=0.04)
    ga = abs(transfer_matrix(build_state_space(a), OMEGA_M)[0, 1, 2])
    gb = abs(transfer_matrix(build_state_space(b), OMEGA_M)[0, 1, 2])
    assert gb / ga == pytest.approx(4.0, abs=1e-9)


def test_uncoupled_poles_and_block_structure():
    ss = build_state_space(make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0))
    poles = np.sort_complex(ss.poles())
    expected = np.sort_complex(np.array([-GAMMA_M / 2 - 1j * OMEGA_M, -GAMMA_M / 2 + 1j * OMEGA_M, -0.5, -0.5]))
    np.testing.assert_allclose(poles, expected, atol=1e-10)
    assert not np.any(ss.drift[:2, 2:]) and not np.any(ss.drift[2:, :2])
    spec = output_covariance(ss, GRID)
    np.testing.assert_allclose(spec, np.broadcast_to(0.5 * np.eye(2), spec.shape), atol=1e-15)


@pytest.mark.parametrize("c_om", [0.01, 1.0, 100.0])
def test_hurwitz(c_om):
    assert build_state_space(make_params(OMEGA_M, GAMMA_M, 0.0, c_om=c_om)).is_hurwitz()


def test_phase_relations(fig_params):
    """Gains equal the closed forms up to a sign on mechanics and the cavity delay on light."""
    h = transfer_matrix(build_state_space(fig_params), GRID)
    r = responses(fig_params, GRID)
    delay = cavity_allpass(fig_params, GRID)
    np.testing.assert_allclose(h[:, 1, 0], -r.t_q, rtol=1e-10)
    np.testing.assert_allclose(h[:, 1, 1], -r.t_p, rtol=1e-10)
    np.testing.assert_allclose(h[:, 1, 2], delay * r.chi_ba, rtol=1e-10)
    np.testing.assert_allclose(h[:, 0, 2], delay, rtol=1e-12)
    np.testing.assert_allclose(h[:, 1, 3], delay, rtol=1e-12)
    assert not np.any(h[:, 0, :2]) and not np.any(h[:, 0, 3])


def test_force_gain_is_momentum_noise_gain(fig_params):
    ss = build_state_space(fig_params)
    np.testing.assert_allclose(force_transfer(ss, GRID) * np.sqrt(GAMMA_M), transfer_matrix(ss, GRID)[:, :, 1], rtol=1e-12)


def test_detuning_rejected():
    with pytest.raises(UnsupportedDetuningError):
        build_state_space(make_params(OMEGA_M, GAMMA_M, 0.0, c_om=0.9, delta=0.1))


def test_with_input_psd(fig_params):
    quiet = build_state_space(fig_params).with_input_psd(0.0)
    np.testing.assert_array_equal(quiet.input_psd, np.zeros(4))
    assert not np.any(output_covariance(quiet, GRID))
