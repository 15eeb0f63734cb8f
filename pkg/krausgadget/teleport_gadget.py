"""
krausgadget - Teleportation Gadget

Kraus operator of the two-macronode gadget, built two independent ways:

- direct: contract the three-wire circuit B_12 B_23 |n>|psi>|phi> against the
  rotated homodyne bras <m_a|<m_b| (the bras are pulled through B_12 first, so
  no three-mode dense operator is ever formed);
- analytic: (1/pi) A(psi, phi) D(mu) V(theta_a, theta_b), with the teleported
  gate A read off the Kraus state B(psi (x) phi) by Choi extraction and the
  damping moved outside as N(beta) A N(beta) / sqrt(norm_psi norm_phi).

Wires are 0-based: input on mode 0, psi on mode 1, phi (and the output) on mode 2.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import get_settings
from .exceptions import DegenerateAngleError, GridMassError, VanishingDensityError
from .fock_core import (
    ComplexArray,
    CutoffLike,
    FockOperator,
    FockState,
    NormKind,
    RealArray,
    as_dim,
    hermite_functions,
    operator_distance_up_to_phase,
    reliable_radius,
)
from .operators import apply_beamsplitter, damping, displacement, phase_delay, padded_dim, squeeze, v_gate
from .states import AncillaSpec, ancilla_amplitudes, cutoff_for_damping, damped_norm, rotated_eigenstate

logger = logging.getLogger(__name__)

Grid = tuple[float, float, float]


class GadgetConfig(BaseModel):
    """
    One teleportation gadget.

    Attributes:
        theta_a: Homodyne angle on the input wire
        theta_b: Homodyne angle on the psi wire
        ancilla_psi: Ancilla on wire 2
        ancilla_phi: Ancilla on wire 3 (carries the output)
        cutoff: Fock dimension of every wire
        interior_fraction: Trusted fraction of the cutoff (default from settings)
    """

    model_config = ConfigDict(frozen=True)

    theta_a: float = np.pi / 2
    theta_b: float = 0.0
    ancilla_psi: AncillaSpec
    ancilla_phi: AncillaSpec
    cutoff: int = Field(default=60, ge=2)
    interior_fraction: Optional[float] = Field(default=None, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _check(self) -> "GadgetConfig":
        if abs(np.sin(self.theta_a - self.theta_b)) < 1e-12:
            raise DegenerateAngleError(self.theta_a, self.theta_b)
        if self.ancilla_psi.beta != self.ancilla_phi.beta:
            raise ValueError("both ancillas must share one damping beta")
        return self

    @property
    def beta(self) -> float:
        return self.ancilla_psi.beta

    @property
    def interior(self) -> int:
        fraction = self.interior_fraction or get_settings().interior_fraction
        return max(1, int(fraction * self.cutoff))

    @classmethod
    def epr_limit(cls, beta: float, cutoff: int, theta_a: float = np.pi / 2, theta_b: float = 0.0) -> "GadgetConfig":
        """Standard teleportation ancillas: damped |0>_p on wire 2, damped |0>_q on wire 3."""
        return cls(
            theta_a=theta_a,
            theta_b=theta_b,
            ancilla_psi=AncillaSpec.p_eigenstate(0.0, beta),
            ancilla_phi=AncillaSpec.q_eigenstate(0.0, beta),
            cutoff=cutoff,
        )


class HomodyneOutcome(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    m_a: float
    m_b: float


@dataclass(frozen=True)
class KrausResult:
    """
    Analytic Kraus operator and its outcome-dependent amplitudes.

    Attributes:
        operator: K(m_a, m_b), mode 0 -> mode 2
        mu: Displacement amplitude with V applied first
        mu_prime: Amplitude with the displacement applied first
        mu_doubleprime: Amplitude of the Fourier-conjugated ordering
        density: Pr(m_a, m_b) for the supplied input, if any
    """

    operator: FockOperator
    mu: complex
    mu_prime: complex
    mu_doubleprime: complex
    density: Optional[float] = None


# ---------------------------------------------------------------------------
# outcome amplitudes
# ---------------------------------------------------------------------------


def mu(theta_a: float, theta_b: float, m_a: float, m_b: float) -> complex:
    s = np.sin(theta_a - theta_b)
    if abs(s) < 1e-12:
        raise DegenerateAngleError(theta_a, theta_b)
    return complex(-(m_a * np.exp(1j * theta_b) + m_b * np.exp(1j * theta_a)) / s)


def mu_prime(theta_a: float, theta_b: float, m_a: float, m_b: float) -> complex:
    """Amplitude with V D(mu') = D(mu) V."""
    s = np.sin(theta_a - theta_b)
    if abs(s) < 1e-12:
        raise DegenerateAngleError(theta_a, theta_b)
    return complex((-m_a * np.exp(-1j * theta_b) + m_b * np.exp(-1j * theta_a)) / s)


def mu_doubleprime(theta_a: float, theta_b: float, m_a: float, m_b: float) -> complex:
    """Amplitude with D(mu) V = F^dag D(mu'') R(theta_+) S(tan theta_-) R(theta_+)."""
    s = np.sin(theta_a - theta_b)
    if abs(s) < 1e-12:
        raise DegenerateAngleError(theta_a, theta_b)
    return complex((-1j * m_a * np.exp(1j * theta_b) - 1j * m_b * np.exp(1j * theta_a)) / s)


def sfactor(theta_minus_prime: float) -> float:
    """Squeeze factor of the gate teleported through sheared zero-eigenstates: -tan(theta'_- - pi/4)."""
    return float(-np.tan(theta_minus_prime - np.pi / 4))


# ---------------------------------------------------------------------------
# homodyne vectors
# ---------------------------------------------------------------------------


def homodyne_kets(theta: float, grid: Union[Sequence[float], RealArray], dim: int, beta_meas: float = 0.0) -> ComplexArray:
    """
    Rows e^{-i n theta} i^n h_n(m) of the rotated p-quadrature eigenkets |m>_{p_theta}.

    The bra <m|_{p_theta} is the conjugate row, so <m|psi> = rows.conj() @ psi.
    """
    ms = np.atleast_1d(np.asarray(grid, dtype=np.float64))
    if ms.size and float(np.max(np.abs(ms))) > reliable_radius(dim):
        logger.warning("homodyne outcome |m|=%.2f beyond the reliable range of cutoff %d", np.max(np.abs(ms)), dim)
    n = np.arange(dim)
    phases = np.exp(-1j * n * theta) * (1j**n) * np.exp(-beta_meas * n)
    return np.asarray(hermite_functions(dim, ms).T * phases[None, :], dtype=np.complex128)


def homodyne_bra(theta: float, m: float, cutoff: CutoffLike, beta_meas: float = 0.0) -> FockState:
    """
    Density-normalized eigenket |m>_{p_theta} = R^dag(theta)|m>_p, stored so that
    overlap(result, psi) = <m|_{p_theta} psi>.

    Args:
        theta: Homodyne angle; p_theta = q sin(theta) + p cos(theta)
        m: Outcome
        cutoff: Fock dimension
        beta_meas: Optional regularizing damping
    """
    dim = as_dim(cutoff)
    return FockState(homodyne_kets(theta, [m], dim, beta_meas)[0], (dim,), NormKind.DENSITY)


def quadrature_distribution(state: FockState, theta: float, grid: Union[Sequence[float], RealArray]) -> RealArray:
    """Homodyne density |<m|_{p_theta} psi|^2 of a single-mode state on a grid."""
    kets = homodyne_kets(theta, grid, state.mode_dims[0])
    return np.asarray(np.abs(kets.conj() @ state.amplitudes) ** 2)


# ---------------------------------------------------------------------------
# Kraus state and teleported gate
# ---------------------------------------------------------------------------


def _kraus_state_from_amplitudes(psi: ComplexArray, phi: ComplexArray, rows: int, cols: int) -> ComplexArray:
    """B_12(psi (x) phi) cropped to (rows, cols); inputs of length >= rows + cols make it exact."""
    pair = FockState(np.outer(psi, phi), (len(psi), len(phi)), NormKind.DENSITY)
    chi = apply_beamsplitter(pair, (0, 1)).tensor()
    return np.asarray(chi[:rows, :cols])


def _kraus_block(psi_spec: AncillaSpec, phi_spec: AncillaSpec, rows: int, cols: int) -> ComplexArray:
    length = rows + cols
    return _kraus_state_from_amplitudes(
        ancilla_amplitudes(psi_spec, length), ancilla_amplitudes(phi_spec, length), rows, cols
    )


@lru_cache(maxsize=64)
def _tail_cutoff(beta: float) -> int:
    return cutoff_for_damping(beta, tolerance=1e-12)


def contraction_depth(config: GadgetConfig) -> int:
    """
    Number of psi-wire levels summed over in the direct contraction.

    Damped ancillas are followed until their tail is below 1e-12; otherwise
    twice the cutoff.
    """
    depth = 2 * config.cutoff
    if config.beta > 0:
        depth = max(depth, _tail_cutoff(config.beta))
    return depth


def kraus_state(config: GadgetConfig) -> FockState:
    """Beamsplitter-entangled Kraus state B(psi (x) phi) at the config cutoff."""
    chi = _kraus_block(config.ancilla_psi, config.ancilla_phi, config.cutoff, config.cutoff)
    return FockState(chi, (config.cutoff, config.cutoff), NormKind.DENSITY)


def _choi(chi: ComplexArray) -> ComplexArray:
    # B(psi (x) phi) = sqrt(2) (I (x) A)|EPR>, |EPR> = (2 pi)^{-1/2} sum |nn>
    return np.sqrt(np.pi) * chi.T


def teleported_gate_choi(ancilla_psi: AncillaSpec, ancilla_phi: AncillaSpec, cutoff: CutoffLike) -> FockOperator:
    """
    Teleported gate A(psi, phi) by Choi extraction: A[n, m] = sqrt(pi) <m, n|B(psi (x) phi)>.

    Ancillas that are not normalizable (undamped eigenstates or combs) enter
    with their density normalization, damped ones with their exact reference
    norm, so the result is exact on every truncated entry.

    Args:
        ancilla_psi: Wire-2 ancilla
        ancilla_phi: Wire-3 ancilla
        cutoff: Fock dimension

    Returns:
        Single-mode operator

    Example:
        ```python
        a = teleported_gate_choi(AncillaSpec.p_eigenstate(-0.3), AncillaSpec.q_eigenstate(0.4), 30)
        # a equals displacement(0.4 - 0.3j, 30)
        ```
    """
    dim = as_dim(cutoff)
    return FockOperator(_choi(_kraus_block(ancilla_psi, ancilla_phi, dim, dim)), (dim,))


def measurement_state(
    theta_a: float,
    theta_b: float,
    outcome: HomodyneOutcome,
    dim: int,
    beta_meas: float = 0.0,
    depth: Optional[int] = None,
) -> ComplexArray:
    """B_12^dag (|m_a>_{p_theta_a} (x) |m_b>_{p_theta_b}) cropped to (dim, depth), exact."""
    cols = depth or dim
    work = dim + cols
    ket_a = homodyne_kets(theta_a, [outcome.m_a], work, beta_meas)[0]
    ket_b = homodyne_kets(theta_b, [outcome.m_b], work, beta_meas)[0]
    pair = FockState(np.outer(ket_a, ket_b), (work, work), NormKind.DENSITY)
    return np.asarray(apply_beamsplitter(pair, (0, 1), adjoint=True).tensor()[:dim, :cols])


def kraus_direct(config: GadgetConfig, outcome: HomodyneOutcome, beta_meas: float = 0.0) -> FockOperator:
    """
    Kraus operator <m_a|<m_b| B_12 B_23 |psi>|phi> by circuit contraction.

    Column n is the output of input |n>; the bras are pulled through B_12 so the
    contraction is K[o, n] = sum_y conj(beta_12[n, y]) chi[y, o], with y running
    to contraction_depth(config).
    """
    dim = config.cutoff
    depth = contraction_depth(config)
    chi = _kraus_block(config.ancilla_psi, config.ancilla_phi, depth, dim)
    bra_state = measurement_state(config.theta_a, config.theta_b, outcome, dim, beta_meas, depth)
    return FockOperator((bra_state.conj() @ chi).T, (dim,))


def _norm_factor(spec: AncillaSpec) -> float:
    return damped_norm(spec) if spec.normalizable else 1.0


def displaced_v(theta_a: float, theta_b: float, amplitude: complex, dim: int) -> FockOperator:
    """D(amplitude) V(theta_a, theta_b), multiplied in a padded space and cropped."""
    work = padded_dim(dim)
    product = displacement(amplitude, work) @ v_gate(theta_a, theta_b, work)
    return product.crop(dim)


def kraus_analytic(
    config: GadgetConfig,
    outcome: HomodyneOutcome,
    input_state: Optional[FockState] = None,
) -> KrausResult:
    """
    Kraus operator assembled as N A0 N D(mu) V / (pi sqrt(norm_psi norm_phi)).

    A0 is the teleported gate of the undamped ancillas.

    Args:
        config: Gadget configuration
        outcome: Homodyne outcomes
        input_state: Optional input; fills `density` with ||K psi||^2

    Returns:
        KrausResult
    """
    dim = config.cutoff
    beta = config.beta
    a0 = teleported_gate_choi(config.ancilla_psi.undamped(), config.ancilla_phi.undamped(), dim)
    norm = np.sqrt(_norm_factor(config.ancilla_psi) * _norm_factor(config.ancilla_phi))
    n_beta = damping(beta, dim)
    amplitude = mu(config.theta_a, config.theta_b, outcome.m_a, outcome.m_b)
    kraus = (n_beta @ a0 @ n_beta @ displaced_v(config.theta_a, config.theta_b, amplitude, dim)).scaled(
        1.0 / (np.pi * norm)
    )
    density = None
    if input_state is not None:
        density = float((kraus @ input_state).norm_sq)
    return KrausResult(
        operator=kraus,
        mu=amplitude,
        mu_prime=mu_prime(config.theta_a, config.theta_b, outcome.m_a, outcome.m_b),
        mu_doubleprime=mu_doubleprime(config.theta_a, config.theta_b, outcome.m_a, outcome.m_b),
        density=density,
    )


class PipelineComparison(BaseModel):
    """Distance between the contracted and the assembled Kraus operator at one outcome."""

    model_config = ConfigDict(frozen=True)

    outcome: HomodyneOutcome
    cutoff: int
    interior: int
    distance: float


def compare_pipelines(config: GadgetConfig, outcome: HomodyneOutcome) -> PipelineComparison:
    """
    Up-to-phase interior distance between kraus_direct and kraus_analytic.

    Example:
        ```python
        config = GadgetConfig(
            theta_a=1.2,
            theta_b=0.3,
            ancilla_psi=AncillaSpec.parse("squeezed_p:0.05"),
            ancilla_phi=AncillaSpec.parse("squeezed_q:0.05"),
        )
        print(compare_pipelines(config, HomodyneOutcome(m_a=0.5, m_b=-0.2)).distance)
        ```
    """
    direct = kraus_direct(config, outcome)
    analytic = kraus_analytic(config, outcome).operator
    distance = operator_distance_up_to_phase(direct, analytic, config.interior)
    logger.debug("pipelines at (%.3f, %.3f): distance %.3e", outcome.m_a, outcome.m_b, distance)
    return PipelineComparison(outcome=outcome, cutoff=config.cutoff, interior=config.interior, distance=distance)


# ---------------------------------------------------------------------------
# measurement identity and squeeze-factor relation
# ---------------------------------------------------------------------------


def sheared_ancilla_gate(theta_minus_prime: float, cutoff: CutoffLike) -> FockOperator:
    """
    Teleported gate of the sheared zero-eigenstates P(tan t)|0>_p and P_p(tan t)|0>_q.

    The first is the p_{-t} eigenstate R(t)|0>_p, the second the q_t eigenstate
    R^dag(t)|0>_q, both with exact Fock amplitudes.
    """
    dim = as_dim(cutoff)
    work = 2 * dim
    psi = rotated_eigenstate("p", 0.0, -theta_minus_prime, work).amplitudes
    phi = rotated_eigenstate("q", 0.0, theta_minus_prime, work).amplitudes
    return FockOperator(_choi(_kraus_state_from_amplitudes(psi, phi, dim, dim)), (dim,))


def fit_squeeze_factor(gate: FockOperator) -> float:
    """
    Read zeta off a gate proportional to R^dag(pi/4) S(zeta) R(pi/4) through its
    action on the vacuum: <2|A|0>/<0|A|0> = i kappa / sqrt(2), kappa = (1 - zeta^2)/(1 + zeta^2).
    """
    ratio = gate.matrix[2, 0] / gate.matrix[0, 0]
    kappa = float(np.real(-1j * np.sqrt(2.0) * ratio))
    return float(np.sqrt((1.0 - kappa) / (1.0 + kappa)))


def sfactor_residual(theta_minus_primes: Sequence[float] = (0.4, -0.2, -0.35), cutoff: int = 8) -> float:
    """Largest |fitted zeta - sfactor(t)| over the given sheared-ancilla angles."""
    worst = 0.0
    for t in theta_minus_primes:
        fitted = fit_squeeze_factor(sheared_ancilla_gate(t, cutoff))
        worst = max(worst, abs(fitted - sfactor(t)))
    return worst


def measurement_identity_check(
    theta_a: float,
    theta_b: float,
    outcome: HomodyneOutcome,
    cutoff: CutoffLike,
    beta_meas: Optional[float] = None,
    interior: Optional[int] = None,
) -> float:
    """
    Compare the entangled rotated-homodyne measurement with (1/sqrt(pi)) D(mu) V.

    Both sides carry the same bra regularization N(beta_meas) on either side.
    The squeeze-factor relation of the sheared-ancilla construction is checked
    at three angles as well.

    Returns:
        The larger of the operator residual and the squeeze-factor residual
    """
    dim = as_dim(cutoff)
    beta = get_settings().beta_meas if beta_meas is None else beta_meas
    inner = interior if interior is not None else get_settings().interior(dim)
    bra_state = measurement_state(theta_a, theta_b, outcome, dim, beta)
    lhs = FockOperator(bra_state.conj().T, (dim,))
    amplitude = mu(theta_a, theta_b, outcome.m_a, outcome.m_b)
    n_beta = damping(beta, dim)
    rhs = (n_beta @ displaced_v(theta_a, theta_b, amplitude, dim) @ n_beta).scaled(1.0 / np.sqrt(np.pi))
    residual = operator_distance_up_to_phase(lhs, rhs, inner)
    return max(residual, sfactor_residual())


def measurement_orderings(
    theta_a: float, theta_b: float, outcome: HomodyneOutcome, cutoff: CutoffLike
) -> tuple[FockOperator, FockOperator]:
    """
    The two alternative orderings of the measurement circuit:
    V D(mu') and F^dag D(mu'') R(theta_+) S(tan theta_-) R(theta_+), both equal to D(mu) V.
    """
    dim = as_dim(cutoff)
    work = padded_dim(dim)
    mp = mu_prime(theta_a, theta_b, outcome.m_a, outcome.m_b)
    mpp = mu_doubleprime(theta_a, theta_b, outcome.m_a, outcome.m_b)
    d_first = (v_gate(theta_a, theta_b, work) @ displacement(mp, work)).crop(dim)
    theta_plus, theta_minus = 0.5 * (theta_a + theta_b), 0.5 * (theta_a - theta_b)
    v2 = phase_delay(theta_plus, work) @ squeeze(float(np.tan(theta_minus)), work) @ phase_delay(theta_plus, work)
    fourier_form = (phase_delay(-np.pi / 2, work) @ displacement(mpp, work) @ v2).crop(dim)
    return d_first, fourier_form


def mu_prime_residuals(
    theta_a: float, theta_b: float, outcome: HomodyneOutcome, cutoff: CutoffLike, interior: Optional[int] = None
) -> tuple[float, float]:
    """Residuals of V D(mu') = D(mu) V and D(mu) V = F^dag D(mu'') R(theta_+) S(tan theta_-) R(theta_+)."""
    dim = as_dim(cutoff)
    inner = interior if interior is not None else get_settings().interior(dim)
    v_first = displaced_v(theta_a, theta_b, mu(theta_a, theta_b, outcome.m_a, outcome.m_b), dim)
    d_first, fourier_form = measurement_orderings(theta_a, theta_b, outcome, dim)
    return (
        operator_distance_up_to_phase(d_first, v_first, inner),
        operator_distance_up_to_phase(fourier_form, v_first, inner),
    )


# ---------------------------------------------------------------------------
# outcome densities and sampling
# ---------------------------------------------------------------------------


def grid_points(grid: Optional[Grid] = None) -> RealArray:
    low, high, step = grid or get_settings().outcome_grid
    count = int(round((high - low) / step)) + 1
    return low + step * np.arange(count)


def branch_tensor(config: GadgetConfig, input_state: FockState) -> ComplexArray:
    """
    B_12 (input (x) Kraus state) with the psi wire kept to 2N levels.

    Shape (3N, 3N, N), exact on every entry: contracting the homodyne bras into
    the first two axes gives K(m_a, m_b)|input>.
    """
    dim = config.cutoff
    depth = 2 * dim
    work = dim + depth
    chi = _kraus_block(config.ancilla_psi, config.ancilla_phi, depth, dim)
    omega = np.zeros((work, work, dim), dtype=np.complex128)
    omega[:dim, :depth, :] = input_state.amplitudes[:, None, None] * chi[None, :, :]
    state = FockState(omega, (work, work, dim), NormKind.DENSITY)
    return apply_beamsplitter(state, (0, 1)).tensor()


@dataclass(frozen=True)
class Branch:
    """A sampled measurement branch: outcome, unnormalized output K|psi>, and Pr(m_a, m_b)."""

    outcome: HomodyneOutcome
    output: ComplexArray
    density: float


def outcome_density(config: GadgetConfig, input_state: FockState, grid: Optional[Grid] = None) -> RealArray:
    """Pr(m_a, m_b) = ||K(m_a, m_b) psi||^2 on the grid x grid lattice."""
    points = grid_points(grid)
    omega = branch_tensor(config, input_state)
    work = omega.shape[0]
    kets_a = homodyne_kets(config.theta_a, points, work).conj()
    kets_b = homodyne_kets(config.theta_b, points, work).conj()
    partial = np.einsum("gx,xyo->gyo", kets_a, omega, optimize=True)
    full = np.einsum("hy,gyo->gho", kets_b, partial, optimize=True)
    return np.asarray(np.sum(np.abs(full) ** 2, axis=2))


def povm_total(config: GadgetConfig, grid: Optional[Grid] = None) -> FockOperator:
    """Quadrature sum of K^dag K dm_a dm_b over the outcome grid."""
    points = grid_points(grid)
    step = points[1] - points[0]
    dim = config.cutoff
    depth = 2 * dim
    work = dim + depth
    chi = _kraus_block(config.ancilla_psi, config.ancilla_phi, depth, dim)
    omega = np.zeros((dim, work, work, dim), dtype=np.complex128)
    # axis 0 labels the input basis state |n>
    omega[np.arange(dim), np.arange(dim), :depth, :] = chi[None, :, :]
    state = FockState(omega, (dim, work, work, dim), NormKind.DENSITY)
    omega = apply_beamsplitter(state, (1, 2)).tensor()
    kets_a = homodyne_kets(config.theta_a, points, work).conj()
    kets_b = homodyne_kets(config.theta_b, points, work).conj()
    total = np.zeros((dim, dim), dtype=np.complex128)
    for row in kets_a:
        partial = np.einsum("x,nxyo->nyo", row, omega, optimize=True)
        branch = np.einsum("hy,nyo->nho", kets_b, partial, optimize=True)
        total += np.einsum("nho,kho->nk", branch.conj(), branch, optimize=True)
    return FockOperator(total * step**2, (dim,))


def _sample_index(weights: RealArray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(weights)
    return int(min(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"), len(weights) - 1))


def sample_outcomes(
    config: GadgetConfig,
    input_state: FockState,
    rng: np.random.Generator,
    size: int,
    grid: Optional[Grid] = None,
    mass_threshold: Optional[float] = None,
) -> RealArray:
    """
    Draw `size` outcome pairs at once from the joint density on the grid lattice.

    Returns:
        Array of shape (size, 2) with rows (m_a, m_b)

    Raises:
        GridMassError: If the lattice captures less than the mass threshold
        VanishingDensityError: If the density vanishes on the whole lattice
    """
    threshold = get_settings().grid_mass_threshold if mass_threshold is None else mass_threshold
    points = grid_points(grid)
    step = points[1] - points[0]
    density = outcome_density(config, input_state, grid)
    total = float(density.sum())
    if total <= 0.0:
        raise VanishingDensityError(total)
    mass = total * step**2 / input_state.norm_sq
    if mass < threshold:
        raise GridMassError(mass, threshold)
    flat = rng.choice(density.size, size=size, p=(density / total).ravel())
    i, j = np.unravel_index(flat, density.shape)
    logger.debug("drew %d outcomes from a %dx%d lattice", size, len(points), len(points))
    return np.stack([points[i], points[j]], axis=1)


def sample_branch(
    config: GadgetConfig,
    input_state: FockState,
    rng: np.random.Generator,
    grid: Optional[Grid] = None,
    mass_threshold: Optional[float] = None,
) -> Branch:
    """
    Draw (m_a, m_b) by inverse-CDF sampling: m_a from its exact marginal on the
    grid, then m_b from the conditional density at the drawn m_a.

    Raises:
        GridMassError: If either grid captures less than the mass threshold
        VanishingDensityError: If the drawn outcome has zero density
    """
    threshold = get_settings().grid_mass_threshold if mass_threshold is None else mass_threshold
    points = grid_points(grid)
    step = points[1] - points[0]
    omega = branch_tensor(config, input_state)
    work = omega.shape[0]
    norm = float(np.sum(np.abs(omega) ** 2))
    if norm <= 0.0:
        raise VanishingDensityError(norm)

    kets_a = homodyne_kets(config.theta_a, points, work).conj()
    partial = np.einsum("gx,xyo->gyo", kets_a, omega, optimize=True)
    marginal = np.sum(np.abs(partial) ** 2, axis=(1, 2))
    mass = float(np.sum(marginal) * step / norm)
    if mass < threshold:
        raise GridMassError(mass, threshold)
    i = _sample_index(marginal, rng)

    kets_b = homodyne_kets(config.theta_b, points, work).conj()
    outputs = kets_b @ partial[i]
    conditional = np.sum(np.abs(outputs) ** 2, axis=1)
    if marginal[i] <= 0.0:
        raise VanishingDensityError(float(marginal[i]))
    mass = float(np.sum(conditional) * step / marginal[i])
    if mass < threshold:
        raise GridMassError(mass, threshold)
    j = _sample_index(conditional, rng)
    density = float(conditional[j])
    if density <= 1e-300:
        raise VanishingDensityError(density)
    return Branch(
        outcome=HomodyneOutcome(m_a=float(points[i]), m_b=float(points[j])),
        output=np.asarray(outputs[j]),
        density=density,
    )
