import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from krausgadget.config import get_settings
from krausgadget.exceptions import DegenerateAngleError
from krausgadget.fock_core import (
    FockState,
    NormKind,
    basis_state,
    interior_mask,
    ladder,
    number_operator,
    operator_distance_up_to_phase,
    quadratures,
    state_distance_up_to_phase,
)
from krausgadget.operators import (
    SECTOR_CACHE_LIMIT,
    SymplecticMatrix,
    _apply_sector,
    apply_beamsplitter,
    apply_controlled,
    beamsplitter,
    beamsplitter_sector,
    bs_decomposition,
    bs_symplectic_factors,
    controlled_x,
    controlled_z,
    damping,
    displacement,
    fourier,
    heisenberg_action,
    is_symplectic,
    phase_delay,
    rotation_ldu,
    rotation_udl,
    shear_p,
    shear_q,
    shift_x,
    shift_z,
    squeeze,
    symplectic_beamsplitter,
    symplectic_controlled_x,
    symplectic_rotation,
    symplectic_shear_q,
    symplectic_squeeze,
    symplectic_v_gate,
    v_gate,
)
from krausgadget.states import squeezed_vacuum_q


def _expect(op_matrix: np.ndarray, state: FockState) -> complex:
    return complex(np.vdot(state.amplitudes, op_matrix @ state.amplitudes))


def test_displacement_makes_coherent_states():
    alpha = 0.3 + 0.2j
    a, _ = ladder(40)
    coherent = displacement(alpha, 40) @ basis_state(0, 40)
    assert coherent.amplitudes[0] == pytest.approx(np.exp(-abs(alpha) ** 2 / 2))
    assert _expect(a.matrix, coherent) == pytest.approx(alpha, abs=1e-10)


def test_shift_x_moves_position():
    q, _ = quadratures(50)
    shifted = shift_x(0.7, 50) @ basis_state(0, 50)
    assert _expect(q.matrix, shifted).real == pytest.approx(0.7, abs=1e-9)


def test_phase_delay_and_fourier():
    np.testing.assert_allclose(fourier(6).matrix, phase_delay(np.pi / 2, 6).matrix)
    np.testing.assert_allclose(np.diag(fourier(4).matrix), [1, 1j, -1, -1j], atol=1e-15)


def test_damping_is_diagonal_exponential():
    np.testing.assert_allclose(np.diag(damping(0.1, 5).matrix).real, np.exp(-0.1 * np.arange(5)))
    with pytest.raises(ValueError):
        damping(-0.1, 5)


def test_squeezed_vacuum_position_variance():
    q, _ = quadratures(60)
    state = squeeze(0.5, 60) @ basis_state(0, 60)
    assert _expect(q.matrix @ q.matrix, state).real == pytest.approx(0.5**2 / 2, abs=1e-6)
    reference = squeezed_vacuum_q(0.5, 60)
    assert state_distance_up_to_phase(state, reference) < 1e-8


def test_squeeze_rejects_zero():
    with pytest.raises(ValueError):
        squeeze(0.0, 10)


@pytest.mark.parametrize(
    "gate, expected",
    [
        (lambda n: shear_q(0.3, n), symplectic_shear_q(0.3).entries),
        (lambda n: phase_delay(0.4, n), symplectic_rotation(0.4).entries),
        (lambda n: squeeze(0.8, n), symplectic_squeeze(0.8).entries),
    ],
)
def test_heisenberg_action_matches_symplectic_matrix(gate, expected):
    s, offset, residual = heisenberg_action(gate(30))
    np.testing.assert_allclose(s, expected, atol=1e-5)
    np.testing.assert_allclose(offset, 0.0, atol=1e-5)
    assert residual < 1e-5


def test_shear_p_acts_on_position():
    s, _, _ = heisenberg_action(shear_p(0.25, 30))
    np.testing.assert_allclose(s, [[1.0, 0.25], [0.0, 1.0]], atol=1e-6)


def test_beamsplitter_heisenberg_action():
    s, _, residual = heisenberg_action(beamsplitter(12))
    np.testing.assert_allclose(s, symplectic_beamsplitter().entries, atol=1e-8)
    assert residual < 1e-8


def test_v_gate_matches_its_symplectic_matrix():
    s, _, _ = heisenberg_action(v_gate(1.2, 0.3, 40))
    np.testing.assert_allclose(s, symplectic_v_gate(1.2, 0.3).entries, atol=1e-4)


def test_v_gate_rejects_degenerate_angles():
    with pytest.raises(DegenerateAngleError):
        v_gate(0.4, 0.4, 10)


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(min_value=-1.4, max_value=1.4))
def test_rotation_decompositions(theta):
    target = symplectic_rotation(theta).entries
    for factors in (rotation_ldu(theta), rotation_udl(theta)):
        product = factors[0] @ factors[1] @ factors[2]
        np.testing.assert_allclose(product.entries, target, atol=1e-12)
        assert is_symplectic(product.entries)


def test_symplectic_constructors_reject_non_symplectic():
    with pytest.raises(ValueError):
        SymplecticMatrix(np.diag([1.0, 2.0]))


def test_beamsplitter_symplectic_decomposition():
    s_cx, s_squeeze, s_shear = bs_symplectic_factors()
    assert s_cx.entries.tolist() == symplectic_controlled_x(1.0).entries.tolist()
    np.testing.assert_allclose((s_cx @ s_squeeze @ s_shear).entries, symplectic_beamsplitter().entries, atol=1e-14)


def test_beamsplitter_circuit_decomposition():
    _, residual = bs_decomposition(40, interior=26)
    assert residual <= 1e-6


def test_sector_application_matches_dense_beamsplitter(rng):
    dim = 8
    amps = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    state = FockState(amps, (dim, dim), NormKind.DENSITY)
    dense = beamsplitter(dim) @ state
    np.testing.assert_allclose(apply_beamsplitter(state, (0, 1)).amplitudes, dense.amplitudes, atol=1e-12)


def test_beamsplitter_adjoint_undoes_it(rng):
    dim = 10
    amps = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    n1, n2 = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    amps[n1 + n2 >= dim] = 0.0
    state = FockState(amps, (dim, dim), NormKind.DENSITY)
    back = apply_beamsplitter(apply_beamsplitter(state, (0, 1)), (0, 1), adjoint=True)
    np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)
    swapped = apply_beamsplitter(state, (1, 0))
    np.testing.assert_allclose(swapped.amplitudes, apply_beamsplitter(state, (0, 1), adjoint=True).amplitudes, atol=1e-12)


def test_beamsplitter_splits_a_photon():
    out = apply_beamsplitter(FockState(np.outer([0, 1], [1, 0]), (2, 2)), (0, 1)).tensor()
    np.testing.assert_allclose(np.abs(out[1, 0]) ** 2, 0.5, atol=1e-12)
    np.testing.assert_allclose(np.abs(out[0, 1]) ** 2, 0.5, atol=1e-12)


@pytest.mark.parametrize("adjoint", [False, True])
def test_uncached_sectors_agree_with_dense_blocks(rng, adjoint):
    total = SECTOR_CACHE_LIMIT + 44
    ks = np.arange(100, 160)
    slab = rng.normal(size=(len(ks), 3)) + 1j * rng.normal(size=(len(ks), 3))
    block = beamsplitter_sector(total)[np.ix_(ks, ks)]
    expected = (block.T if adjoint else block) @ slab
    np.testing.assert_allclose(_apply_sector(total, ks, slab, adjoint), expected, atol=1e-10)


def _interior_block(matrix: np.ndarray, dims: tuple[int, ...], inner: int) -> np.ndarray:
    keep = np.flatnonzero(interior_mask(dims, inner))
    return matrix[np.ix_(keep, keep)]


@pytest.mark.parametrize(
    "gate",
    [
        lambda n: displacement(0.3 + 0.2j, n),
        lambda n: shift_x(0.4, n),
        lambda n: shift_z(-0.3, n),
        lambda n: phase_delay(0.7, n),
        lambda n: fourier(n),
        lambda n: squeeze(0.8, n),
        lambda n: squeeze(-1.0, n),
        lambda n: shear_q(0.3, n),
        lambda n: shear_p(0.25, n),
        lambda n: v_gate(1.7, 0.3, n),
    ],
)
def test_single_mode_gates_unitary_on_low_photon_numbers(gate):
    op = gate(40)
    block = _interior_block(op.matrix.conj().T @ op.matrix, op.mode_dims, 10)
    np.testing.assert_allclose(block, np.eye(10), atol=1e-8)


def test_beamsplitter_unitary_on_the_interior():
    op = beamsplitter(40)
    inner = get_settings().interior(40)
    block = _interior_block(op.matrix.conj().T @ op.matrix, op.mode_dims, inner)
    np.testing.assert_allclose(block, np.eye(block.shape[0]), atol=1e-8)


@pytest.mark.parametrize("gate", [controlled_x, controlled_z])
def test_entangling_gates_unitary_on_low_photon_numbers(gate):
    op = gate(0.25, 30)
    gram = op.matrix.conj().T @ op.matrix
    block = _interior_block(gram, (30, 30), 10)
    np.testing.assert_allclose(block, np.eye(block.shape[0]), atol=1e-8)


def test_squeeze_by_minus_one_is_parity():
    inner = get_settings().interior(40)
    assert operator_distance_up_to_phase(squeeze(-1.0, 40), phase_delay(np.pi, 40), inner) < 1e-12


def test_beamsplitter_conserves_total_photon_number():
    n1 = number_operator(10).matrix
    total = np.kron(n1, np.eye(10)) + np.kron(np.eye(10), n1)
    bs = beamsplitter(10).matrix
    np.testing.assert_allclose(bs @ total - total @ bs, 0.0, atol=1e-12)


def test_controlled_x_heisenberg_action():
    s, _, residual = heisenberg_action(controlled_x(0.25, 30))
    np.testing.assert_allclose(s, symplectic_controlled_x(0.25).entries, atol=1e-6)
    assert residual < 1e-6


def test_controlled_z_heisenberg_action():
    g = 0.25
    s, _, _ = heisenberg_action(controlled_z(g, 30))
    # (q1, q2, p1, p2): each momentum picks up g times the other position
    expected = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, g, 1.0, 0.0], [g, 0.0, 0.0, 1.0]]
    np.testing.assert_allclose(s, expected, atol=1e-6)


@pytest.mark.parametrize("kind, dense", [("x", controlled_x), ("z", controlled_z)])
def test_controlled_state_apply_matches_dense_gate(rng, kind, dense):
    dim, g = 8, 0.6
    state = FockState(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)), (dim, dim), NormKind.DENSITY)
    expected = dense(g, dim) @ state
    np.testing.assert_allclose(apply_controlled(state, kind, g).amplitudes, expected.amplitudes, atol=1e-12)


def test_controlled_apply_addresses_modes_in_a_three_mode_state(rng):
    dims, g = (5, 4, 5), 0.4
    amps = rng.normal(size=dims) + 1j * rng.normal(size=dims)
    state = FockState(amps, dims, NormKind.DENSITY)
    out = apply_controlled(state, "x", g, modes=(2, 0)).tensor()
    gate = controlled_x(g, 5).matrix.reshape(5, 5, 5, 5)
    # control is mode 2, target mode 0
    expected = np.einsum("ctCT,TmC->tmc", gate, amps)
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_controlled_apply_rejects_bad_arguments(rng):
    state = FockState(np.eye(4), (4, 4), NormKind.DENSITY)
    with pytest.raises(ValueError):
        apply_controlled(state, "y", 1.0)  # type: ignore[arg-type]
    with pytest.raises(ValueError):
        apply_controlled(state, "x", 1.0, modes=(1, 1))
