import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from conftest import GAMMA_M, OMEGA_M
from synodyne import (
    AmbiguousCouplingError,
    InvalidParameterError,
    SystemParams,
    UnsupportedDetuningError,
    cooperativity,
    g_from_cooperativity,
    make_params,
    mech_susceptibility,
    responses,
)
from synodyne.model import cavity_allpass, require_resonant, with_cooperativity


@pytest.mark.parametrize(
    "c_om, g",
    [
        (0.9, 0.03),
        (2.0, math.sqrt(0.002)),
    ],
)
def test_make_params_inverts_cooperativity(c_om, g):
    p = make_params(OMEGA_M, GAMMA_M, 0.0, c_om=c_om)
    assert p.kappa == 1.0
    assert p.g == pytest.approx(g, rel=1e-14)
    assert cooperativity(p) == pytest.approx(c_om, rel=1e-14)


def test_zero_coupling_has_zero_cooperativity():
    assert make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0).c_om == 0.0


@given(st.floats(1e-6, 1e6), st.floats(1e-5, 1.0))
def test_cooperativity_round_trip(c_om, gamma_m):
    g = g_from_cooperativity(c_om, 1.0, gamma_m)
    p = SystemParams(omega_m=0.2, gamma_m=gamma_m, g=g)
    assert cooperativity(p) == pytest.approx(c_om, rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(omega_m=0.0, gamma_m=GAMMA_M, c_om=1.0),
        dict(omega_m=OMEGA_M, gamma_m=-1.0, c_om=1.0),
        dict(omega_m=OMEGA_M, gamma_m=GAMMA_M, c_om=1.0, kappa=0.0),
        dict(omega_m=OMEGA_M, gamma_m=GAMMA_M, nbar=-0.1, c_om=1.0),
        dict(omega_m=float("nan"), gamma_m=GAMMA_M, c_om=1.0),
        dict(omega_m=OMEGA_M, gamma_m=GAMMA_M, c_om=-1.0),
    ],
)
def test_invalid_parameters_rejected(kwargs):
    with pytest.raises(InvalidParameterError):
        make_params(**kwargs)


@pytest.mark.parametrize("coupling", [dict(), dict(g=0.1, c_om=1.0)])
def test_coupling_must_be_given_exactly_once(coupling):
    with pytest.raises(AmbiguousCouplingError):
        make_params(OMEGA_M, GAMMA_M, 0.0, **coupling)


def test_detuning_is_carried_but_rejected():
    p = make_params(OMEGA_M, GAMMA_M, 0.0, c_om=1.0, delta=0.1)
    with pytest.raises(UnsupportedDetuningError):
        require_resonant(p)
    with pytest.raises(UnsupportedDetuningError):
        responses(p, 0.2)


def test_with_cooperativity_keeps_other_fields(fig_params):
    p = with_cooperativity(fig_params, 2.0)
    assert (p.omega_m, p.gamma_m, p.nbar) == (fig_params.omega_m, fig_params.gamma_m, fig_params.nbar)
    assert p.c_om == pytest.approx(2.0, rel=1e-14)


def test_mech_susceptibility_values(fig_params):
    assert mech_susceptibility(fig_params, 0.0) == pytest.approx(complex(oracle.chi_m(0, **_fig())), rel=1e-14)
    assert mech_susceptibility(fig_params, 0.0).real == pytest.approx(24.99937, abs=1e-5)
    on = mech_susceptibility(fig_params, OMEGA_M)
    assert on == pytest.approx(complex(oracle.chi_m(oracle.FIG["omega_m"], **_fig())), rel=1e-13)
    assert on.real == pytest.approx(6.25, abs=1e-3)
    assert on.imag == pytest.approx(-2499.98, abs=1e-2)


def _fig():
    return dict(omega_m=oracle.FIG["omega_m"], gamma_m=oracle.FIG["gamma_m"])


def test_susceptibility_is_nearly_imaginary_on_resonance(fig_params):
    chi = mech_susceptibility(fig_params, OMEGA_M)
    assert chi.real / chi.imag == pytest.approx(-GAMMA_M / (4 * OMEGA_M), rel=1e-12)


def test_susceptibility_peak_location(fig_params):
    w = np.linspace(0.19, 0.21, 200_001)
    step = w[1] - w[0]
    peak = w[np.argmax(np.abs(mech_susceptibility(fig_params, w)))]
    assert abs(peak - math.sqrt(OMEGA_M**2 - GAMMA_M**2 / 4)) <= step


def test_responses_at_resonance(fig_params):
    r = responses(fig_params, OMEGA_M)
    _, chi_ba, t_q, t_p = oracle.responses(oracle.FIG["omega_m"], **_fig(), g=oracle.coupling("0.9", oracle.FIG["gamma_m"]))
    assert r.chi_ba == pytest.approx(complex(chi_ba), rel=1e-13)
    assert r.chi_ba.real == pytest.approx(0.00388, abs=1e-5)
    assert r.chi_ba.imag == pytest.approx(-1.5517, abs=1e-4)
    assert abs(r.t_p) ** 2 == pytest.approx(1.5517, abs=1e-4)
    assert abs(r.t_q) ** 2 == pytest.approx(1.5518, abs=1e-4)
    assert r.t_q == pytest.approx(complex(t_q), rel=1e-13)
    assert r.t_p == pytest.approx(complex(t_p), rel=1e-13)


def test_zero_coupling_kills_transduction():
    p = make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0)
    r = responses(p, np.linspace(0.0, 1.0, 11))
    assert not np.any(r.chi_ba) and not np.any(r.t_q) and not np.any(r.t_p)


def test_conjugation_symmetry(fig_params):
    w = np.random.default_rng(3).uniform(-3 * OMEGA_M, 3 * OMEGA_M, 100)
    plus, minus = responses(fig_params, w), responses(fig_params, -w)
    np.testing.assert_allclose(minus.chi_m, np.conj(plus.chi_m), rtol=1e-14)
    np.testing.assert_allclose(minus.chi_ba, np.conj(plus.chi_ba), rtol=1e-14)


def test_chi_ba_prefactor_identity(fig_params):
    w = np.linspace(-1, 1, 101)
    r = responses(fig_params, w)
    pref = fig_params.g**2 * fig_params.omega_m / (0.25 + w**2)
    np.testing.assert_allclose(r.chi_ba, pref * r.chi_m, rtol=1e-14)


@given(st.floats(0.1, 10.0), st.floats(-1.0, 1.0))
def test_coupling_scaling(s, w):
    p = make_params(OMEGA_M, GAMMA_M, 0.0, g=0.02)
    q = make_params(OMEGA_M, GAMMA_M, 0.0, g=0.02 * s)
    a, b = responses(p, w), responses(q, w)
    assert abs(b.chi_ba) == pytest.approx(s**2 * abs(a.chi_ba), rel=1e-13)
    assert abs(b.t_q) == pytest.approx(s * abs(a.t_q), rel=1e-13)
    assert abs(b.t_p) == pytest.approx(s * abs(a.t_p), rel=1e-13)


def test_scalar_inputs_give_python_scalars(fig_params):
    r = responses(fig_params, 0.1)
    assert isinstance(r.chi_m, complex) and isinstance(r.t_p, complex)


@given(st.floats(-5.0, 5.0))
def test_cavity_allpass_is_unimodular(w):
    p = make_params(OMEGA_M, GAMMA_M, 0.0, g=0.0)
    assert abs(cavity_allpass(p, w)) == pytest.approx(1.0, rel=1e-14)
    assert cavity_allpass(p, 0.0) == 1.0
    assert cmath.isclose(cavity_allpass(p, -w), cavity_allpass(p, w).conjugate(), rel_tol=1e-14)
