import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from krausgadget.exceptions import CutoffConvergenceError
from krausgadget.fock_core import basis_state, hermite_functions, reduced_purity
from krausgadget.states import (
    SQRT_PI,
    AncillaKind,
    AncillaSpec,
    GkpQuality,
    approximate_gkp_wavefunction,
    beta_from_db,
    cutoff_for_damping,
    damped_norm,
    damped_quadrature_eigenstate,
    fock_epr,
    gkp_bell_pair,
    gkp_codeword,
    ideal_amplitudes,
    qunaught,
    rotated_eigenstate,
    squeezed_vacuum_p,
    squeezed_vacuum_q,
    squeezing_db,
    wavefunction,
    zeta_from_beta,
)


@pytest.mark.parametrize("beta, cutoff", [(0.1, 160), (0.2, 80)])
def test_damped_position_eigenstate_is_a_squeezed_vacuum(beta, cutoff):
    damped = damped_quadrature_eigenstate("q", 0.0, beta, cutoff)
    squeezed = squeezed_vacuum_q(zeta_from_beta(beta), cutoff)
    np.testing.assert_allclose(damped.amplitudes, squeezed.amplitudes, atol=1e-10)


def test_damped_momentum_eigenstate_is_a_momentum_squeezed_vacuum():
    damped = damped_quadrature_eigenstate("p", 0.0, 0.2, 80)
    squeezed = squeezed_vacuum_p(zeta_from_beta(0.2), 80)
    np.testing.assert_allclose(damped.amplitudes, squeezed.amplitudes, atol=1e-10)


def test_squeezed_vacuum_at_unit_zeta_is_the_vacuum():
    np.testing.assert_allclose(squeezed_vacuum_q(1.0, 12).amplitudes, basis_state(0, 12).amplitudes, atol=1e-15)


@pytest.mark.parametrize(
    "spec",
    [
        AncillaSpec.q_eigenstate(0.7, 0.2),
        AncillaSpec.p_eigenstate(-0.4, 0.15),
        AncillaSpec.squeezed_q(0.4, 0.1),
        AncillaSpec.gkp_codeword(1, 0.1),
    ],
)
def test_damped_norm_matches_a_long_sum(spec):
    reference = 800
    weights = np.exp(-2.0 * spec.beta * np.arange(reference)) * np.abs(ideal_amplitudes(spec, reference)) ** 2
    assert damped_norm(spec) == pytest.approx(float(weights.sum()), rel=1e-8)


def test_undamped_eigenstate_has_no_norm():
    with pytest.raises(ValueError):
        damped_norm(AncillaSpec.q_eigenstate(0.0))
    with pytest.raises(ValueError):
        damped_norm(AncillaSpec.qunaught())


def test_codewords_have_even_support_and_are_nearly_orthogonal():
    zero = gkp_codeword(0, 0.1, 160)
    one = gkp_codeword(1, 0.1, 160)
    np.testing.assert_array_equal(zero.amplitudes[1::2], 0.0)
    np.testing.assert_array_equal(one.amplitudes[1::2], 0.0)
    assert abs(np.vdot(zero.amplitudes, one.amplitudes)) < 1e-2


def test_qunaught_support_and_peaks():
    state = qunaught(0.05, 300)
    support = np.flatnonzero(np.abs(state.amplitudes) > 0)
    assert np.all(support % 4 == 0)
    psi = np.abs(wavefunction(state, "q", [0.0, np.sqrt(2.0 * np.pi) / 2.0, np.sqrt(2.0 * np.pi)]))
    assert psi[0] > 10.0 * psi[1]
    assert psi[2] > 10.0 * psi[1]


@pytest.mark.parametrize("j", [0, 1])
def test_approximate_codeword_peaks(j):
    grid = np.arange(-6.0, 6.0005, 0.001)
    psi = approximate_gkp_wavefunction(j, 0.0138, grid)
    peaks, _ = find_peaks(psi, height=0.1 * psi.max())
    expected = np.array([(2 * n + j) * SQRT_PI for n in range(-3, 3) if abs((2 * n + j) * SQRT_PI) < 6.0])
    assert len(peaks) == len(expected)
    np.testing.assert_allclose(grid[peaks], expected, atol=0.02)


def test_approximate_codeword_tracks_the_fock_codeword():
    grid = np.arange(-7.0, 7.0005, 0.005)
    exact = wavefunction(gkp_codeword(0, 0.1, 160), "q", grid)
    approx = approximate_gkp_wavefunction(0, 0.1, grid).astype(np.complex128)
    exact /= np.sqrt(trapezoid(np.abs(exact) ** 2, grid))
    approx /= np.sqrt(trapezoid(np.abs(approx) ** 2, grid))
    phase = np.exp(1j * np.angle(trapezoid(np.conj(approx) * exact, grid)))
    distance = np.sqrt(trapezoid(np.abs(exact - phase * approx) ** 2, grid))
    assert distance <= 0.1


def test_vacuum_wavefunction():
    vac = basis_state(0, 10)
    assert wavefunction(vac, "q", [0.0])[0] == pytest.approx(np.pi**-0.25)
    assert wavefunction(vac, "p", [0.0])[0] == pytest.approx(np.pi**-0.25)


def test_rotated_eigenstates():
    np.testing.assert_allclose(
        rotated_eigenstate("p", 0.3, 0.0, 10).amplitudes,
        ideal_amplitudes(AncillaSpec.p_eigenstate(0.3), 10),
    )
    # p_theta at theta = pi/2 is q
    np.testing.assert_allclose(
        rotated_eigenstate("p", 0.3, np.pi / 2, 10).amplitudes,
        hermite_functions(10, 0.3),
        atol=1e-14,
    )


def test_fock_epr_is_diagonal():
    epr = fock_epr(5)
    np.testing.assert_allclose(epr.tensor(), np.eye(5) / np.sqrt(2.0 * np.pi))


def test_gkp_bell_pair():
    pair = gkp_bell_pair(0.2, 80)
    assert pair.norm_sq == pytest.approx(1.0)
    assert reduced_purity(pair, 0) == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize(
    "token, kind, value, beta",
    [
        ("p_eigenstate:0.5@0.05", AncillaKind.P_EIGENSTATE, 0.5, 0.05),
        ("q_eigenstate", AncillaKind.Q_EIGENSTATE, 0.0, 0.0),
        ("qunaught@0.05", AncillaKind.QUNAUGHT, 0.0, 0.05),
        ("gkp_codeword:1@0.1", AncillaKind.GKP_CODEWORD, 1.0, 0.1),
        ("squeezed_q:zeta=0.3", AncillaKind.SQUEEZED_Q, 0.3, 0.0),
        ("squeezed_p:0.05", AncillaKind.SQUEEZED_P, zeta_from_beta(0.05), 0.0),
    ],
)
def test_parse_tokens(token, kind, value, beta):
    spec = AncillaSpec.parse(token)
    assert spec.kind is kind
    assert spec.value == pytest.approx(value)
    assert spec.beta == pytest.approx(beta)


@pytest.mark.parametrize("token", ["bogus", "gkp_codeword:2", "squeezed_q:zeta=-1", "q_eigenstate@-0.1"])
def test_parse_rejects_bad_tokens(token):
    with pytest.raises(ValueError):
        AncillaSpec.parse(token)


def test_spec_validation():
    with pytest.raises(ValidationError):
        AncillaSpec(kind=AncillaKind.CUSTOM)
    with pytest.raises(ValidationError):
        AncillaSpec(kind=AncillaKind.GKP_PLUS_MINUS, value=0.0)
    assert AncillaSpec.qunaught(0.1).undamped().beta == 0.0


def test_cutoff_for_damping_grows_as_damping_shrinks():
    cutoffs = [cutoff_for_damping(beta, 1e-12) for beta in (0.2, 0.1, 0.05)]
    assert cutoffs == sorted(cutoffs)
    assert cutoffs[0] < cutoffs[-1]
    with pytest.raises(ValueError):
        cutoff_for_damping(0.0)


def test_small_cutoff_is_rejected():
    with pytest.raises(CutoffConvergenceError):
        damped_quadrature_eigenstate("q", 0.0, 0.05, 20)


def test_squeezing_conversions():
    assert squeezing_db(0.1) == pytest.approx(10.0)
    assert GkpQuality.from_beta(0.1).s_gkp_db == pytest.approx(10.0)
    assert 0.0 < zeta_from_beta(0.1) < 1.0


@settings(max_examples=50, deadline=None)
@given(beta=st.floats(min_value=1e-4, max_value=2.0))
def test_decibel_round_trip(beta):
    assert beta_from_db(squeezing_db(beta)) == pytest.approx(beta, rel=1e-12)


def test_central_spike_variance_matches_the_damping():
    beta = 0.0138
    grid = np.arange(-SQRT_PI / 2, SQRT_PI / 2, 0.0005)
    spike = approximate_gkp_wavefunction(0, beta, grid)
    variance = trapezoid(grid**2 * spike, grid) / trapezoid(spike, grid)
    assert variance == pytest.approx(beta, rel=0.1)
