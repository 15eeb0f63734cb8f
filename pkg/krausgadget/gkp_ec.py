"""
krausgadget - GKP Error Correction

Teleportation-based GKP error correction with qunaughts placed on the gadget
ancillas:

- case AB: qunaught on both wires, the Kraus operator carries the full GKP
  projector and corrects both quadratures;
- case A: p-eigenstate and qunaught, a comb in p only (corrects p);
- case B: qunaught and q-eigenstate, a comb in q only (corrects q).

Chains interleave plain teleportation steps (EPR-limit ancillas, which only add
finite-squeezing noise) with EC steps and track the logical fidelity against
the input qubit re-encoded at the chain's damping.
"""

import logging
import math
from enum import Enum
from typing import Any, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from .config import get_settings
from .exceptions import CodespaceWeightError, VanishingDensityError, ZeroNormError
from .fock_core import ComplexArray, CutoffLike, FockOperator, FockState, NormKind, as_dim, hermite_functions
from .operators import displacement, fourier, shift_x, shift_z, symplectic_v_gate
from .states import (
    SQRT_PI,
    AncillaSpec,
    _comb_sites,
    cutoff_for_damping,
    gkp_codeword,
    gkp_state,
    ideal_amplitudes,
    squeezing_db,
)
from .teleport_gadget import (
    GadgetConfig,
    Grid,
    HomodyneOutcome,
    kraus_direct,
    mu,
    sample_branch,
)

logger = logging.getLogger(__name__)

# Lattice spacing of a logical shift in displacement-amplitude units
ALPHA_SPACING = SQRT_PI / math.sqrt(2.0)
CODESPACE_THRESHOLD = 0.9


class EcVariant(str, Enum):
    A = "A"
    B = "B"
    AB = "AB"


class ChainMode(str, Enum):
    """ACTIVE applies every correction as a displacement; FRAME tracks it classically."""

    ACTIVE = "active"
    FRAME = "frame"


class _ChainStepBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=0.0)
    theta_a: float = np.pi / 2
    theta_b: float = 0.0
    cutoff: Optional[int] = Field(default=None, ge=2)

    def working_cutoff(self) -> int:
        return self.cutoff or cutoff_for_damping(self.beta, margin=8)


class EcCase(_ChainStepBase):
    """
    One error-correction gadget.

    Attributes:
        variant: Qunaught placement (A, B or AB)
        beta: Damping shared by both ancillas
        theta_a: Homodyne angle on the input wire
        theta_b: Homodyne angle on the psi wire
        cutoff: Fock cutoff (default sized from beta)
    """

    variant: EcVariant = EcVariant.AB

    def ancillas(self) -> tuple[AncillaSpec, AncillaSpec]:
        if self.variant is EcVariant.A:
            return AncillaSpec.p_eigenstate(0.0, self.beta), AncillaSpec.qunaught(self.beta)
        if self.variant is EcVariant.B:
            return AncillaSpec.qunaught(self.beta), AncillaSpec.q_eigenstate(0.0, self.beta)
        return AncillaSpec.qunaught(self.beta), AncillaSpec.qunaught(self.beta)

    def gadget(self, cutoff: Optional[int] = None) -> GadgetConfig:
        psi, phi = self.ancillas()
        return GadgetConfig(
            theta_a=self.theta_a,
            theta_b=self.theta_b,
            ancilla_psi=psi,
            ancilla_phi=phi,
            cutoff=cutoff or self.working_cutoff(),
        )

    def label(self) -> str:
        return self.variant.value


class PlainTeleport(_ChainStepBase):
    """Gadget with EPR-limit ancillas: a noisy identity gate."""

    def gadget(self, cutoff: Optional[int] = None) -> GadgetConfig:
        return GadgetConfig.epr_limit(self.beta, cutoff or self.working_cutoff(), self.theta_a, self.theta_b)

    def label(self) -> str:
        return "teleport"


ChainStep = Union[EcCase, PlainTeleport]


def _complex_in(value: Any) -> Any:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(value[0], value[1])
    return value


def _complex_out(value: Optional[complex]) -> Optional[list[float]]:
    if value is None:
        return None
    return [float(value.real), float(value.imag)]


class SyndromeRecord(BaseModel):
    """
    Outcome and decoded data of one chain step.

    Complex numbers serialize as [re, im].

    Attributes:
        step: 1-based index in the chain
        kind: "AB", "A", "B" or "teleport"
        outcome: Homodyne outcomes
        mu: Displacement amplitude implied by the outcomes
        shift_bin: Nearest-lattice decision (n_q, n_p); None for plain steps
        correction: Displacement applied (or added to the frame) after the step
        c0: Decoded logical coefficient of |0>, None if the state left the code space
        c1: Decoded logical coefficient of |1>
        pr_density: Pr(m_a, m_b) of the drawn outcome
    """

    model_config = ConfigDict(frozen=True)

    step: int = Field(ge=1)
    kind: str
    outcome: HomodyneOutcome
    mu: complex
    shift_bin: Optional[tuple[int, int]] = None
    correction: complex = 0j
    c0: Optional[complex] = None
    c1: Optional[complex] = None
    pr_density: float = Field(ge=0.0)

    @field_validator("mu", "correction", "c0", "c1", mode="before")
    @classmethod
    def _parse_complex(cls, value: Any) -> Any:
        return _complex_in(value)

    @field_serializer("mu", "correction", "c0", "c1")
    def _dump_complex(self, value: Optional[complex]) -> Optional[list[float]]:
        return _complex_out(value)


class ChainReport(BaseModel):
    """
    Result of one chain run.

    Attributes:
        steps: Number of gadget steps
        beta: Damping of the input qubit and of every step
        squeezing_db: Squeezing equivalent of beta
        seed: RNG seed
        mode: Correction mode
        schedule: Step labels in order
        input_qubit: (c0, c1) of the encoded input
        records: Per-step syndrome records
        logical_fidelity: |<reference|final>|^2
    """

    model_config = ConfigDict(frozen=True)

    steps: int = Field(ge=0)
    beta: float
    squeezing_db: float
    seed: int
    mode: ChainMode
    schedule: list[str]
    input_qubit: tuple[complex, complex]
    records: list[SyndromeRecord]
    logical_fidelity: float = Field(ge=0.0, le=1.0 + 1e-9)

    @field_validator("input_qubit", mode="before")
    @classmethod
    def _parse_qubit(cls, value: Any) -> Any:
        return tuple(_complex_in(v) for v in value)

    @field_serializer("input_qubit")
    def _dump_qubit(self, value: tuple[complex, complex]) -> list[Optional[list[float]]]:
        return [_complex_out(v) for v in value]


# ---------------------------------------------------------------------------
# comb operators and logical operations
# ---------------------------------------------------------------------------


def comb_operator(spacing: float, quadrature: str, cutoff: CutoffLike) -> FockOperator:
    """
    Dirac comb sqrt(T) sum_k |kT><kT| in the q or p quadrature.

    Entries are sqrt(T) sum_k h_a(kT) h_b(kT), times i^(a - b) for p.
    """
    dim = as_dim(cutoff)
    sites = _comb_sites(spacing, 0.0, dim, 0.0)
    h = hermite_functions(dim, sites)
    matrix = np.sqrt(spacing) * (h @ h.T).astype(np.complex128)
    if quadrature == "p":
        n = np.arange(dim)
        matrix = (1j ** n)[:, None] * matrix * ((-1j) ** n)[None, :]
    elif quadrature != "q":
        raise ValueError(f"quadrature must be 'q' or 'p', got {quadrature!r}")
    return FockOperator(matrix, (dim,))


def gkp_projector(cutoff: CutoffLike, beta: float = 0.0) -> FockOperator:
    """N(beta) (|0><0| + |1><1|) N(beta) with ideal, density-normalized codewords."""
    dim = as_dim(cutoff)
    damp = np.exp(-beta * np.arange(dim))
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    for j in (0, 1):
        word = damp * ideal_amplitudes(AncillaSpec.gkp_codeword(j), dim)
        matrix += np.outer(word, word.conj())
    return FockOperator(matrix, (dim,))


def gkp_pauli(kind: str, cutoff: CutoffLike) -> FockOperator:
    """
    Logical Pauli of the square GKP code: X = shift_x(sqrt(pi)), Z = shift_z(sqrt(pi)),
    Y = i X Z, and H = F (the Fourier transform).
    """
    if kind == "X":
        return shift_x(SQRT_PI, cutoff)
    if kind == "Z":
        return shift_z(SQRT_PI, cutoff)
    if kind == "Y":
        return (shift_x(SQRT_PI, cutoff) @ shift_z(SQRT_PI, cutoff)).scaled(1j)
    if kind == "H":
        return fourier(cutoff)
    raise ValueError(f"unknown logical operation {kind!r}")


def logical_readout(state: FockState, beta: float, threshold: float = CODESPACE_THRESHOLD) -> tuple[complex, complex]:
    """
    Logical coefficients of a state in the damped code space.

    The damped codewords are not orthogonal, so the coefficients come from the
    dual basis: c = G^-1 b with b_j = <j|psi> and Gram matrix G_ij = <i|j>. The
    fraction of the state inside the code space is b^dag G^-1 b / ||psi||^2.

    Args:
        state: Single-mode state
        beta: Damping of the code space
        threshold: Minimum code-space weight

    Returns:
        (c0, c1), normalized

    Raises:
        CodespaceWeightError: If the code-space weight is below threshold

    Example:
        ```python
        c0, c1 = logical_readout(gkp_state(1, 1, 0.05, 90), 0.05)  # ~ (0.707, 0.707)
        ```
    """
    dim = state.mode_dims[0]
    words = np.stack([gkp_codeword(j, beta, dim).amplitudes for j in (0, 1)])
    gram = words.conj() @ words.T
    b = words.conj() @ state.amplitudes
    c = np.linalg.solve(gram, b)
    norm_sq = state.norm_sq
    if norm_sq <= 0.0:
        raise ZeroNormError("logical readout of a zero state")
    weight = float(np.real(np.vdot(b, c)) / norm_sq)
    if weight < threshold:
        raise CodespaceWeightError(weight, threshold)
    c = c / np.linalg.norm(c)
    return complex(c[0]), complex(c[1])


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------


def _shift_bin(amplitude: complex) -> tuple[int, int]:
    return int(round(amplitude.real / ALPHA_SPACING)), int(round(amplitude.imag / ALPHA_SPACING))


def step_correction(step: ChainStep, amplitude: complex) -> tuple[complex, Optional[tuple[int, int]]]:
    """
    Displacement that undoes the step's outcome-dependent shift, and the lattice bin.

    Plain steps undo all of D(mu). EC steps snap the corrected quadrature(s) to the
    nearest lattice point and undo the continuous part of the other one.
    """
    if isinstance(step, PlainTeleport):
        return -amplitude, None
    n_q, n_p = _shift_bin(amplitude)
    if step.variant is EcVariant.AB:
        correction = -ALPHA_SPACING * complex(n_q, n_p)
    elif step.variant is EcVariant.A:
        correction = -complex(amplitude.real, ALPHA_SPACING * n_p)
    else:
        correction = -complex(ALPHA_SPACING * n_q, amplitude.imag)
    return correction, (n_q, n_p)


def _record(
    step: ChainStep,
    index: int,
    outcome: HomodyneOutcome,
    amplitude: complex,
    correction: complex,
    shift: Optional[tuple[int, int]],
    output: FockState,
    density: float,
) -> SyndromeRecord:
    c0: Optional[complex]
    c1: Optional[complex]
    try:
        c0, c1 = logical_readout(output, step.beta)
    except CodespaceWeightError as e:
        logger.debug("step %d (%s) left the code space: weight %.3f", index, step.label(), e.weight)
        c0 = c1 = None
    return SyndromeRecord(
        step=index,
        kind=step.label(),
        outcome=outcome,
        mu=amplitude,
        shift_bin=shift,
        correction=correction,
        c0=c0,
        c1=c1,
        pr_density=max(density, 0.0),
    )


def ec_step(case: EcCase, input_state: FockState, outcome: HomodyneOutcome) -> tuple[FockState, SyndromeRecord]:
    """
    Apply one EC gadget for a given outcome and decode it.

    The output is K(m_a, m_b)|input> normalized, followed by the correcting
    displacement; the record carries Pr(m_a, m_b) = ||K input||^2.

    Raises:
        VanishingDensityError: If the outcome has zero probability for this input
    """
    dim = input_state.mode_dims[0]
    config = case.gadget(dim)
    raw = kraus_direct(config, outcome) @ input_state
    density = raw.norm_sq
    if density <= 1e-300:
        raise VanishingDensityError(density)
    amplitude = mu(case.theta_a, case.theta_b, outcome.m_a, outcome.m_b)
    correction, shift = step_correction(case, amplitude)
    output = (displacement(correction, dim) @ raw.normalized()).normalized()
    return output, _record(case, 1, outcome, amplitude, correction, shift, output, density)


def sample_outcome(
    case: ChainStep,
    input_state: FockState,
    rng_seed: Union[int, np.random.Generator],
    grid: Optional[Grid] = None,
) -> HomodyneOutcome:
    """
    Draw (m_a, m_b) from the exact joint density of the step's gadget.

    Raises:
        GridMassError: If the grid misses more than the allowed outcome mass
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    config = case.gadget(input_state.mode_dims[0])
    return sample_branch(config, input_state, rng, grid).outcome


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------


def ec_schedule(
    steps: int,
    period: int,
    beta: float,
    variant: EcVariant = EcVariant.AB,
    cutoff: Optional[int] = None,
    theta_a: float = np.pi / 2,
    theta_b: float = 0.0,
) -> list[ChainStep]:
    """Plain teleportation steps with an EC step every `period` steps (period 0: none)."""
    common = dict(beta=beta, cutoff=cutoff, theta_a=theta_a, theta_b=theta_b)
    schedule: list[ChainStep] = []
    for k in range(1, steps + 1):
        if period > 0 and k % period == 0:
            schedule.append(EcCase(variant=variant, **common))
        else:
            schedule.append(PlainTeleport(**common))
    return schedule


def chain_grid(beta: float) -> Grid:
    """Outcome grid wide enough for GKP inputs at this damping."""
    half = 7.0 / math.sqrt(2.0 * beta)
    step = min(0.05, math.sqrt(beta) / 4.0)
    half = step * math.ceil(half / step)
    return (-half, half, step)


def _to_phase_space(alpha: complex) -> np.ndarray:
    return np.sqrt(2.0) * np.array([alpha.real, alpha.imag])


def _from_phase_space(d: np.ndarray) -> complex:
    return complex(d[0], d[1]) / math.sqrt(2.0)


def _normalize_qubit(c0: complex, c1: complex) -> tuple[complex, complex]:
    norm = math.sqrt(abs(c0) ** 2 + abs(c1) ** 2)
    if norm == 0.0:
        raise ZeroNormError("input qubit has zero norm")
    return complex(c0) / norm, complex(c1) / norm


def run_chain(
    steps: int,
    case_schedule: Sequence[ChainStep],
    input_qubit: tuple[complex, complex],
    beta: float,
    seed: int,
    mode: ChainMode = ChainMode.ACTIVE,
    cutoff: Optional[int] = None,
    grid: Optional[Grid] = None,
    max_resamples: int = 3,
) -> ChainReport:
    """
    Run `steps` gadgets with sampled outcomes on an encoded qubit.

    The schedule is cycled if shorter than `steps`. In ACTIVE mode each step's
    correction is applied as a displacement; in FRAME mode it is accumulated
    and the next outcome amplitude is read relative to the frame
    (V D(d) = D(S_V d) V), with the total applied once at the end.

    Args:
        steps: Number of gadget steps (0 returns fidelity 1)
        case_schedule: EcCase / PlainTeleport entries
        input_qubit: (c0, c1) of the logical input
        beta: Damping of the input encoding and of the fidelity reference
        seed: RNG seed; equal seeds give identical reports
        mode: Correction mode
        cutoff: Fock cutoff (default sized from beta)
        grid: Outcome grid (default chain_grid(beta))
        max_resamples: Redraws allowed after a vanishing density

    Returns:
        ChainReport
    """
    if steps > 0 and not case_schedule:
        raise ValueError("case_schedule is empty")
    dim = cutoff or cutoff_for_damping(beta, margin=8)
    outcome_grid = grid or chain_grid(beta)
    c0, c1 = _normalize_qubit(*input_qubit)
    reference = gkp_state(c0, c1, beta, dim)
    state = reference
    rng = np.random.default_rng(seed)
    frame = 0j
    records: list[SyndromeRecord] = []
    labels: list[str] = []

    for index in range(1, steps + 1):
        step = case_schedule[(index - 1) % len(case_schedule)]
        labels.append(step.label())
        config = step.gadget(dim)
        for attempt in range(max_resamples + 1):
            try:
                branch = sample_branch(config, state, rng, outcome_grid)
                break
            except VanishingDensityError:
                if attempt == max_resamples:
                    raise
                logger.info("vanishing density at step %d, resampling", index)
        amplitude = mu(step.theta_a, step.theta_b, branch.outcome.m_a, branch.outcome.m_b)
        output = FockState(branch.output, (dim,), NormKind.DENSITY).normalized()
        if mode is ChainMode.FRAME:
            sv = symplectic_v_gate(step.theta_a, step.theta_b).entries
            effective = amplitude - _from_phase_space(sv @ _to_phase_space(frame))
            correction, shift = step_correction(step, effective)
            frame = correction
            decoded = (displacement(frame, dim) @ output).normalized()
            state = output
        else:
            correction, shift = step_correction(step, amplitude)
            state = (displacement(correction, dim) @ output).normalized()
            decoded = state
        records.append(_record(step, index, branch.outcome, amplitude, correction, shift, decoded, branch.density))
        logger.debug("seed %d step %d %s mu=%.3f%+.3fj", seed, index, step.label(), amplitude.real, amplitude.imag)

    if mode is ChainMode.FRAME and frame != 0:
        state = (displacement(frame, dim) @ state).normalized()
    overlap = np.vdot(reference.amplitudes, state.amplitudes)
    fidelity = float(min(1.0, abs(overlap) ** 2))
    return ChainReport(
        steps=steps,
        beta=beta,
        squeezing_db=squeezing_db(beta),
        seed=seed,
        mode=mode,
        schedule=labels,
        input_qubit=(c0, c1),
        records=records,
        logical_fidelity=fidelity,
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


class SweepRow(BaseModel):
    """Aggregated chain fidelity at one sweep point."""

    model_config = ConfigDict(frozen=True)

    squeezing_db: float
    beta: float
    steps: int
    ec_period: int
    mean_fidelity: float
    stderr: float
    n_seeds: int
    theta_a: float = np.pi / 2
    theta_b: float = 0.0


def aggregate_reports(
    reports: Sequence[ChainReport],
    ec_period: int,
    theta_a: float = np.pi / 2,
    theta_b: float = 0.0,
) -> SweepRow:
    """Mean and standard error of the logical fidelity, independent of report order."""
    if not reports:
        raise ValueError("no reports to aggregate")
    ordered = sorted(reports, key=lambda r: r.seed)
    fidelities = np.array([r.logical_fidelity for r in ordered])
    n = len(fidelities)
    stderr = float(np.std(fidelities, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    first = ordered[0]
    return SweepRow(
        squeezing_db=first.squeezing_db,
        beta=first.beta,
        steps=first.steps,
        ec_period=ec_period,
        mean_fidelity=math.fsum(fidelities) / n,
        stderr=stderr,
        n_seeds=n,
        theta_a=theta_a,
        theta_b=theta_b,
    )


def run_sweep_point(
    beta: float,
    steps: int,
    ec_period: int,
    seeds: Sequence[int],
    input_qubit: tuple[complex, complex] = (1.0, 1.0),
    variant: EcVariant = EcVariant.AB,
    mode: ChainMode = ChainMode.ACTIVE,
    cutoff: Optional[int] = None,
    theta_a: float = np.pi / 2,
    theta_b: float = 0.0,
) -> SweepRow:
    """Run one chain per seed at a single sweep point and aggregate."""
    schedule = ec_schedule(steps, ec_period, beta, variant, cutoff, theta_a, theta_b)
    reports = [run_chain(steps, schedule, input_qubit, beta, seed, mode, cutoff) for seed in seeds]
    return aggregate_reports(reports, ec_period, theta_a, theta_b)


def run_sweep(
    betas: Sequence[float],
    steps: Sequence[int],
    ec_periods: Sequence[int],
    seeds: Sequence[int],
    input_qubit: tuple[complex, complex] = (1.0, 1.0),
    variant: EcVariant = EcVariant.AB,
    mode: ChainMode = ChainMode.ACTIVE,
    angles: Sequence[tuple[float, float]] = ((np.pi / 2, 0.0),),
) -> list[SweepRow]:
    """Sequential sweep over betas x steps x ec_periods x angle pairs (see SweepsResource for the parallel one)."""
    return [
        run_sweep_point(beta, n, period, seeds, input_qubit, variant, mode, None, theta_a, theta_b)
        for beta in betas
        for n in steps
        for period in ec_periods
        for theta_a, theta_b in angles
    ]
