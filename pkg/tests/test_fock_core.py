import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError
from scipy.integrate import trapezoid
from scipy.special import eval_hermite

from krausgadget.exceptions import CutoffConvergenceError, DimensionMismatchError, ZeroNormError
from krausgadget.fock_core import (
    Cutoff,
    FockOperator,
    FockState,
    NormKind,
    apply_two_mode,
    as_dim,
    basis_state,
    converge_in_cutoff,
    fidelity_up_to_phase,
    hermite_functions,
    identity,
    interior_mask,
    ladder,
    number_operator,
    operator_distance_up_to_phase,
    overlap,
    quadratures,
    reduced_purity,
    state_distance_up_to_phase,
    tensor,
)


def test_vacuum_position_variance_is_one_half():
    q, _ = quadratures(20)
    vac = basis_state(0, 20)
    assert abs(np.vdot(vac.amplitudes, q.matrix @ q.matrix @ vac.amplitudes) - 0.5) < 1e-12


def test_canonical_commutator_away_from_the_edge():
    dim = 16
    q, p = quadratures(dim)
    commutator = q.matrix @ p.matrix - p.matrix @ q.matrix
    np.testing.assert_allclose(commutator[:-1, :-1], 1j * np.eye(dim - 1), atol=1e-12)


def test_ladder_and_number_operator():
    a, ad = ladder(10)
    np.testing.assert_allclose((ad @ a).matrix, number_operator(10).matrix, atol=1e-12)
    np.testing.assert_allclose(a.matrix[2, 3], np.sqrt(3.0))


def test_hermite_functions_are_orthonormal():
    x = np.linspace(-14.0, 14.0, 8001)
    h = hermite_functions(24, x)
    gram = trapezoid(h[:, None, :] * h[None, :, :], x, axis=-1)
    np.testing.assert_allclose(gram, np.eye(24), atol=1e-8)


def test_hermite_functions_shape_follows_grid():
    assert hermite_functions(5, 0.3).shape == (5,)
    assert hermite_functions(5, np.zeros((3, 4))).shape == (5, 3, 4)


def test_cutoff_validation():
    assert as_dim(Cutoff(n_max=7)) == 7
    with pytest.raises(ValidationError):
        as_dim(1)


def test_unit_state_must_be_normalized():
    with pytest.raises(ValueError):
        FockState(np.array([1.0, 1.0]), (2,))
    dens = FockState(np.array([1.0, 1.0]), (2,), NormKind.DENSITY)
    assert dens.normalized().norm_sq == pytest.approx(1.0)


def test_zero_state_cannot_be_normalized():
    with pytest.raises(ZeroNormError):
        FockState(np.zeros(3), (3,), NormKind.DENSITY).normalized()


def test_amplitude_count_must_match_dims():
    with pytest.raises(DimensionMismatchError):
        FockState(np.ones(5), (2, 2), NormKind.DENSITY)


def test_cropping_a_unit_state_downgrades_norm_kind(random_state):
    state = random_state(8, support=8)
    cropped = state.with_dims((4,))
    assert cropped.norm_kind is NormKind.DENSITY
    padded = random_state(8, support=4).with_dims((12,))
    assert padded.norm_kind is NormKind.UNIT


def test_tensor_orders_modes():
    pair = tensor(basis_state(1, 3), basis_state(2, 4))
    assert pair.mode_dims == (3, 4)
    assert pair.tensor()[1, 2] == 1.0
    op = tensor(identity(3), number_operator(4))
    assert (op @ pair).tensor()[1, 2] == pytest.approx(2.0)


def test_operator_product_checks_dims():
    with pytest.raises(DimensionMismatchError):
        identity(3) @ identity(4)
    with pytest.raises(DimensionMismatchError):
        overlap(basis_state(0, 3), basis_state(0, 4))


@settings(max_examples=25, deadline=None)
@given(phase=st.floats(min_value=-np.pi, max_value=np.pi))
def test_global_phase_is_ignored(phase):
    rng = np.random.default_rng(3)
    amps = rng.normal(size=6) + 1j * rng.normal(size=6)
    a = FockState(amps, (6,), NormKind.DENSITY)
    b = FockState(np.exp(1j * phase) * amps, (6,), NormKind.DENSITY)
    assert fidelity_up_to_phase(a, b) == pytest.approx(1.0)
    assert state_distance_up_to_phase(a, b) < 1e-7
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    op_a = FockOperator(m, (6,))
    assert operator_distance_up_to_phase(op_a.scaled(np.exp(1j * phase)), op_a, 6) < 1e-7


def test_exact_phase_distance_sees_the_phase():
    op = identity(4)
    assert operator_distance_up_to_phase(op.scaled(-1.0), op, 4, exact_phase=True) == pytest.approx(2.0)


def test_interior_mask_counts_total_photons():
    mask = interior_mask((3, 3), 2).reshape(3, 3)
    expected = np.array([[True, True, False], [True, False, False], [False, False, False]])
    np.testing.assert_array_equal(mask, expected)


def test_reduced_purity():
    product = tensor(basis_state(0, 4), basis_state(1, 4))
    assert reduced_purity(product, 0) == pytest.approx(1.0)
    bell = FockState(np.eye(4), (4, 4), NormKind.DENSITY)
    assert reduced_purity(bell, 1) == pytest.approx(0.25)


def test_converge_in_cutoff_returns_first_settled_value():
    value, cutoff = converge_in_cutoff(lambda n: 1.0 - 2.0**-n, (5, 10, 20), tol=1e-3)
    assert cutoff == 20
    assert value == pytest.approx(1.0 - 2.0**-20)


def test_converge_in_cutoff_raises_when_unsettled():
    with pytest.raises(CutoffConvergenceError) as info:
        converge_in_cutoff(float, (5, 10, 20), tol=1e-3, quantity="level")
    assert info.value.schedule == [5, 10, 20]
    assert info.value.quantity == "level"


def test_small_differences_survive_the_phase_alignment(rng):
    b = rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30))
    noise = 1e-10 * (rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30)))
    a = np.exp(0.7j) * b + noise
    reported = operator_distance_up_to_phase(FockOperator(a, (30,)), FockOperator(b, (30,)), 30)
    # the component of the noise along b is absorbed into the phase, so allow a few percent
    assert reported == pytest.approx(np.linalg.norm(noise) / np.linalg.norm(b), rel=0.1)
    exact = FockState(b.ravel(), (900,), NormKind.DENSITY)
    assert state_distance_up_to_phase(exact, exact) < 1e-14


def test_apply_two_mode_matches_the_dense_embedding(rng):
    dims = (4, 3, 5)
    amps = rng.normal(size=dims) + 1j * rng.normal(size=dims)
    state = FockState(amps, dims, NormKind.DENSITY)
    op = FockOperator(rng.normal(size=(15, 15)) + 1j * rng.normal(size=(15, 15)), (3, 5))
    dense = tensor(identity(4), op)
    expected = dense @ state
    np.testing.assert_allclose(apply_two_mode(op, state, (1, 2)).amplitudes, expected.amplitudes, atol=1e-12)


def test_apply_two_mode_respects_mode_order(rng):
    dims = (4, 3, 4)
    amps = rng.normal(size=dims) + 1j * rng.normal(size=dims)
    state = FockState(amps, dims, NormKind.DENSITY)
    op = FockOperator(rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16)), (4, 4))
    # modes (2, 0): the operator's first factor acts on mode 2
    gate = op.matrix.reshape(4, 4, 4, 4)
    expected = np.einsum("abAB,BmA->bma", gate, amps)
    np.testing.assert_allclose(apply_two_mode(op, state, (2, 0)).tensor(), expected, atol=1e-12)
    swap = np.einsum("abAB->baBA", gate).reshape(16, 16)
    swapped = apply_two_mode(FockOperator(swap, (4, 4)), state, (0, 2))
    np.testing.assert_allclose(swapped.tensor(), expected, atol=1e-12)


def test_apply_two_mode_rejects_bad_targets():
    state = tensor(tensor(basis_state(0, 3), basis_state(0, 3)), basis_state(0, 4))
    with pytest.raises(ValueError):
        apply_two_mode(identity(3, modes=2), state, (1, 1))
    with pytest.raises(ValueError):
        apply_two_mode(identity(3, modes=2), state, (0, 3))
    with pytest.raises(DimensionMismatchError):
        apply_two_mode(identity(3, modes=2), state, (1, 2))


def test_hermite_function_at_high_order():
    n, x = 50, 3.0
    norm = math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    expected = eval_hermite(n, x) * math.exp(-0.5 * x * x) / norm
    assert hermite_functions(n + 1, x)[n] == pytest.approx(expected, abs=1e-9)
