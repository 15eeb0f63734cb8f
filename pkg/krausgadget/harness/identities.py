"""
krausgadget - Identity Registry

Every circuit identity the simulator relies on, as a pair of independent
constructions plus a residual. Identities involving unnormalizable objects are
evaluated along a damping schedule and pass only if the last residual is
within tolerance AND the residuals do not grow as the damping shrinks.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import minimize_scalar

from ..config import Settings, get_settings
from ..exceptions import UnknownIdentityError
from ..fock_core import (
    FockOperator,
    FockState,
    NormKind,
    converge_in_cutoff,
    fidelity_up_to_phase,
    operator_distance_up_to_phase,
    quadratures,
    state_distance_up_to_phase,
    tensor,
)
from ..gkp_ec import EcCase, EcVariant, comb_operator, gkp_projector
from ..operators import (
    apply_controlled,
    beamsplitter,
    bs_decomposition,
    bs_symplectic_factors,
    damping,
    displacement,
    fourier,
    shear_q,
    symplectic_beamsplitter,
)
from ..states import (
    SQRT_PI,
    AncillaSpec,
    ancilla_amplitudes,
    cutoff_for_damping,
    damped_norm,
    damped_quadrature_eigenstate,
    fock_epr,
    zeta_from_beta,
)
from ..teleport_gadget import (
    GadgetConfig,
    HomodyneOutcome,
    displaced_v,
    fit_squeeze_factor,
    kraus_analytic,
    kraus_direct,
    kraus_state,
    measurement_orderings,
    measurement_state,
    mu,
    sfactor,
    sheared_ancilla_gate,
    teleported_gate_choi,
)

logger = logging.getLogger(__name__)

ANGLES = (1.2, 0.3)
OUTCOME = HomodyneOutcome(m_a=0.5, m_b=-0.2)
SHEAR_ANGLES = (0.4, -0.2, -0.35)
COMB_PREFACTOR = 2.0**0.25 * SQRT_PI
# Dense two-mode references above this cutoff no longer fit in memory
BS_DECOMPOSITION_CUTOFF = 40


@dataclass(frozen=True)
class IdentityContext:
    """Evaluation point: cutoff, interior and (for regularized identities) the damping."""

    cutoff: int
    interior: int
    beta: Optional[float] = None

    @property
    def damping(self) -> float:
        if self.beta is None:
            raise ValueError("identity needs a damping value")
        return self.beta


Builder = Callable[[IdentityContext], Any]
Residual = Callable[[Any, Any, IdentityContext], float]


@dataclass(frozen=True)
class IdentityCase:
    """
    One registered identity.

    Attributes:
        id: Stable identifier
        title: Name of the identity
        builder_lhs: Construction of the left-hand side
        builder_rhs: Independent construction of the right-hand side
        residual: Distance between the two sides
        tolerance: Largest accepted residual
        regularized: Whether the identity is evaluated along the damping schedule
    """

    id: str
    title: str
    builder_lhs: Builder
    builder_rhs: Builder
    residual: Residual
    tolerance: float
    regularized: bool = True

    @property
    def trend(self) -> str:
        return "non_increasing" if self.regularized else "beta_independent"

    def evaluate(self, ctx: IdentityContext) -> float:
        return float(self.residual(self.builder_lhs(ctx), self.builder_rhs(ctx), ctx))


class IdentityReport(BaseModel):
    """Serialized as {id, cutoff, betas, residuals, pass}."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    id: str
    cutoff: int
    betas: list[float]
    residuals: list[float]
    passed: bool = Field(alias="pass")


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------


def _distance(a: Any, b: Any, interior: int) -> float:
    if isinstance(a, FockOperator):
        return operator_distance_up_to_phase(a, b, interior)
    if isinstance(a, FockState):
        return state_distance_up_to_phase(a, b, interior)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _pairwise(lhs: Any, rhs: Any, ctx: IdentityContext) -> float:
    """Worst distance over matching entries of two tuples (or one pair)."""
    if not isinstance(lhs, tuple):
        lhs, rhs = (lhs,), (rhs,)
    return max(_distance(a, b, ctx.interior) for a, b in zip(lhs, rhs))


def _infidelity(lhs: FockState, rhs: FockState, ctx: IdentityContext) -> float:
    return 1.0 - fidelity_up_to_phase(lhs, rhs)


# ---------------------------------------------------------------------------
# two-mode squeezed limits
# ---------------------------------------------------------------------------

CircuitAtCutoff = Callable[[int], FockState]


def _working_cutoff(ctx: IdentityContext) -> int:
    return max(ctx.cutoff, cutoff_for_damping(ctx.damping, tolerance=1e-10))


def _controlled_on_eigenstates(kind: str, target: str, beta: float) -> CircuitAtCutoff:
    def build(dim: int) -> FockState:
        control = damped_quadrature_eigenstate("p", 0.0, beta, dim, tolerance=1e-10)
        ancilla = damped_quadrature_eigenstate(target, 0.0, beta, dim, tolerance=1e-10)  # type: ignore[arg-type]
        return apply_controlled(tensor(control, ancilla), kind, 1.0)  # type: ignore[arg-type]

    return build


def two_mode_squeezed_infidelity(state: FockState, phase: complex) -> float:
    """
    1 - max over 0 < |lambda| < 1 of the fidelity with sqrt(1 - lambda^2) sum_n (phase lambda)^n |n>|n>.

    phase = 1 is the damped EPR family, phase = i its Fourier-Choi counterpart.
    """
    diag = np.diagonal(state.tensor()) / math.sqrt(state.norm_sq)
    n = np.arange(diag.size)

    def infidelity(lam: float) -> float:
        family = math.sqrt(1.0 - lam * lam) * (phase * lam) ** n
        return 1.0 - abs(np.vdot(family, diag)) ** 2

    fits = [
        minimize_scalar(
            lambda x, s=sign: infidelity(s * x), bounds=(1e-6, 1.0 - 1e-9), method="bounded", options={"xatol": 1e-12}
        )
        for sign in (1.0, -1.0)
    ]
    best = min(fits, key=lambda r: r.fun)
    logger.debug("best two-mode squeezing fit lambda=%.9f infidelity=%.3e", best.x, best.fun)
    return float(best.fun)


def _converged_infidelity(circuit: CircuitAtCutoff, phase: complex, ctx: IdentityContext) -> float:
    """Infidelity with the two-mode squeezed family, settled along growing working cutoffs."""
    base = _working_cutoff(ctx)
    value, dim = converge_in_cutoff(
        lambda d: two_mode_squeezed_infidelity(circuit(d), phase),
        (base, base + base // 2, 2 * base),
        tol=get_settings().convergence_tol,
        quantity="two-mode squeezed infidelity",
    )
    logger.debug("beta=%.4f infidelity settled at working cutoff %d", ctx.damping, dim)
    return float(value)


def _epr_cx_lhs(ctx: IdentityContext) -> CircuitAtCutoff:
    """C^X(1) on damped |0>_p (x) |0>_q."""
    return _controlled_on_eigenstates("x", "q", ctx.damping)


def _cvcs_lhs(ctx: IdentityContext) -> CircuitAtCutoff:
    """C^Z(1) on two damped |0>_p."""
    return _controlled_on_eigenstates("z", "p", ctx.damping)


def _epr_family(ctx: IdentityContext) -> complex:
    return 1.0


def _fourier_choi_family(ctx: IdentityContext) -> complex:
    # (I (x) F N) |EPR> carries i^n on |n>|n>
    return 1j


# ---------------------------------------------------------------------------
# Fock-space identities
# ---------------------------------------------------------------------------


def _gkp_bell_from_qunaughts(ctx: IdentityContext) -> FockState:
    qunaught = AncillaSpec.qunaught(ctx.damping)
    return kraus_state(GadgetConfig(ancilla_psi=qunaught, ancilla_phi=qunaught, cutoff=ctx.cutoff))


def _gkp_bell_direct(ctx: IdentityContext) -> FockState:
    words = [ancilla_amplitudes(AncillaSpec.gkp_codeword(j, ctx.damping), ctx.cutoff) for j in (0, 1)]
    pair = sum(np.outer(w, w) for w in words)
    return FockState(pair, (ctx.cutoff, ctx.cutoff), NormKind.DENSITY)


def _damped_closed_form(op: FockOperator, beta: float, specs: Sequence[AncillaSpec]) -> FockOperator:
    """N(beta) op N(beta) / sqrt(prod of reference norms)."""
    n_beta = damping(beta, op.dim)
    norm = math.sqrt(math.prod(damped_norm(spec) for spec in specs))
    return (n_beta @ op @ n_beta).scaled(1.0 / norm)


def _partial_p_lhs(ctx: IdentityContext) -> FockOperator:
    return teleported_gate_choi(AncillaSpec.p_eigenstate(0.0, ctx.damping), AncillaSpec.qunaught(ctx.damping), ctx.cutoff)


def _partial_p_rhs(ctx: IdentityContext) -> FockOperator:
    comb = comb_operator(SQRT_PI, "p", ctx.cutoff).scaled(COMB_PREFACTOR)
    specs = (AncillaSpec.p_eigenstate(0.0, ctx.damping), AncillaSpec.qunaught(ctx.damping))
    return _damped_closed_form(comb, ctx.damping, specs)


def _partial_q_lhs(ctx: IdentityContext) -> FockOperator:
    return teleported_gate_choi(AncillaSpec.qunaught(ctx.damping), AncillaSpec.q_eigenstate(0.0, ctx.damping), ctx.cutoff)


def _partial_q_rhs(ctx: IdentityContext) -> FockOperator:
    comb = comb_operator(SQRT_PI, "q", ctx.cutoff).scaled(COMB_PREFACTOR)
    specs = (AncillaSpec.qunaught(ctx.damping), AncillaSpec.q_eigenstate(0.0, ctx.damping))
    return _damped_closed_form(comb, ctx.damping, specs)


def _bs_decomposition_lhs(ctx: IdentityContext) -> tuple[FockOperator, np.ndarray]:
    dim = min(ctx.cutoff, BS_DECOMPOSITION_CUTOFF)
    decomposed, _ = bs_decomposition(dim, interior=max(1, int(dim * ctx.interior / ctx.cutoff)))
    s_cx, s_squeeze, s_shear = bs_symplectic_factors()
    return decomposed, (s_cx @ s_squeeze @ s_shear).entries


def _bs_decomposition_rhs(ctx: IdentityContext) -> tuple[FockOperator, np.ndarray]:
    dim = min(ctx.cutoff, BS_DECOMPOSITION_CUTOFF)
    return beamsplitter(dim), symplectic_beamsplitter().entries


def _bs_decomposition_residual(lhs: Any, rhs: Any, ctx: IdentityContext) -> float:
    dim = lhs[0].mode_dims[0]
    inner = max(1, int(dim * ctx.interior / ctx.cutoff))
    return max(operator_distance_up_to_phase(lhs[0], rhs[0], inner), float(np.max(np.abs(lhs[1] - rhs[1]))))


BOUNCE_ALPHA = 0.3 + 0.2j
BOUNCE_SHEAR = 0.7


def _bounce_lhs(ctx: IdentityContext) -> tuple[Any, ...]:
    """Operators applied to the first mode of the Fock-form EPR state, plus q^T and p^T."""
    n = ctx.cutoff
    epr = fock_epr(n).tensor()
    q, p = quadratures(n)
    local = (displacement(BOUNCE_ALPHA, n), shear_q(BOUNCE_SHEAR, n), fourier(n))
    states = tuple(FockState(op.matrix @ epr, (n, n), NormKind.DENSITY) for op in local)
    return states + (q.T, p.T)


def _bounce_rhs(ctx: IdentityContext) -> tuple[Any, ...]:
    """Transposed partners applied to the second mode: D(-alpha*), P(sigma), F; then q and -p."""
    n = ctx.cutoff
    epr = fock_epr(n).tensor()
    q, p = quadratures(n)
    partner = (displacement(-np.conj(BOUNCE_ALPHA), n), shear_q(BOUNCE_SHEAR, n), fourier(n))
    # (I (x) B) acts on the amplitude matrix from the right as M B^T
    states = tuple(FockState(epr @ op.matrix.T, (n, n), NormKind.DENSITY) for op in partner)
    return states + (q, p.scaled(-1.0))


DISPLACEMENT_T, DISPLACEMENT_S = -0.3, 0.4


def _bs_displacement_lhs(ctx: IdentityContext) -> FockOperator:
    return teleported_gate_choi(
        AncillaSpec.p_eigenstate(DISPLACEMENT_T, ctx.damping),
        AncillaSpec.q_eigenstate(DISPLACEMENT_S, ctx.damping),
        ctx.cutoff,
    )


def _bs_displacement_rhs(ctx: IdentityContext) -> FockOperator:
    specs = (AncillaSpec.p_eigenstate(DISPLACEMENT_T, ctx.damping), AncillaSpec.q_eigenstate(DISPLACEMENT_S, ctx.damping))
    return _damped_closed_form(displacement(complex(DISPLACEMENT_S, DISPLACEMENT_T), ctx.cutoff), ctx.damping, specs)


def _measurement_lhs(ctx: IdentityContext) -> FockOperator:
    bra_state = measurement_state(ANGLES[0], ANGLES[1], OUTCOME, ctx.cutoff, ctx.damping)
    return FockOperator(bra_state.conj().T, (ctx.cutoff,))


def _measurement_rhs(ctx: IdentityContext) -> FockOperator:
    amplitude = mu(ANGLES[0], ANGLES[1], OUTCOME.m_a, OUTCOME.m_b)
    n_beta = damping(ctx.damping, ctx.cutoff)
    return (n_beta @ displaced_v(ANGLES[0], ANGLES[1], amplitude, ctx.cutoff) @ n_beta).scaled(1.0 / SQRT_PI)


KRAUS_STATE_T, KRAUS_STATE_S = 0.3, -0.2


def _kraus_state_config(beta: float, cutoff: int) -> GadgetConfig:
    return GadgetConfig(
        ancilla_psi=AncillaSpec.p_eigenstate(KRAUS_STATE_T, beta),
        ancilla_phi=AncillaSpec.q_eigenstate(KRAUS_STATE_S, beta),
        cutoff=cutoff,
    )


def _kraus_state_lhs(ctx: IdentityContext) -> FockState:
    return kraus_state(_kraus_state_config(ctx.damping, ctx.cutoff))


def _kraus_state_rhs(ctx: IdentityContext) -> FockState:
    """(N (x) N) B(psi (x) phi) / sqrt(norms), from the undamped Kraus state."""
    config = _kraus_state_config(ctx.damping, ctx.cutoff)
    chi = kraus_state(_kraus_state_config(0.0, ctx.cutoff)).tensor()
    damp = np.exp(-ctx.damping * np.arange(ctx.cutoff))
    norm = math.sqrt(damped_norm(config.ancilla_psi) * damped_norm(config.ancilla_phi))
    return FockState(damp[:, None] * chi * damp[None, :] / norm, (ctx.cutoff, ctx.cutoff), NormKind.DENSITY)


def _gadget_config(ctx: IdentityContext) -> GadgetConfig:
    zeta = zeta_from_beta(0.05)
    return GadgetConfig(
        theta_a=ANGLES[0],
        theta_b=ANGLES[1],
        ancilla_psi=AncillaSpec.squeezed_p(zeta, ctx.damping),
        ancilla_phi=AncillaSpec.squeezed_q(zeta, ctx.damping),
        cutoff=ctx.cutoff,
    )


def _gadget_lhs(ctx: IdentityContext) -> FockOperator:
    return kraus_direct(_gadget_config(ctx), OUTCOME)


def _gadget_rhs(ctx: IdentityContext) -> FockOperator:
    return kraus_analytic(_gadget_config(ctx), OUTCOME).operator


def _ec_closed_form(variant: EcVariant, cutoff: int) -> FockOperator:
    if variant is EcVariant.AB:
        return gkp_projector(cutoff).scaled(math.sqrt(math.pi / 2.0))
    quadrature = "p" if variant is EcVariant.A else "q"
    return comb_operator(SQRT_PI, quadrature, cutoff).scaled(COMB_PREFACTOR)


def _ec_lhs(variant: EcVariant) -> Builder:
    """Direct contraction of the EC gadget and the Choi-extracted ideal gate."""

    def build(ctx: IdentityContext) -> tuple[FockOperator, FockOperator]:
        case = EcCase(variant=variant, beta=ctx.damping, cutoff=ctx.cutoff)
        psi, phi = case.ancillas()
        return kraus_direct(case.gadget(), OUTCOME), teleported_gate_choi(psi.undamped(), phi.undamped(), ctx.cutoff)

    return build


def _ec_rhs(variant: EcVariant) -> Builder:
    """Analytic Kraus assembly and the closed-form projector or comb."""

    def build(ctx: IdentityContext) -> tuple[FockOperator, FockOperator]:
        case = EcCase(variant=variant, beta=ctx.damping, cutoff=ctx.cutoff)
        return kraus_analytic(case.gadget(), OUTCOME).operator, _ec_closed_form(variant, ctx.cutoff)

    return build


def _orderings_lhs(ctx: IdentityContext) -> tuple[FockOperator, FockOperator]:
    return measurement_orderings(ANGLES[0], ANGLES[1], OUTCOME, ctx.cutoff)


def _orderings_rhs(ctx: IdentityContext) -> tuple[FockOperator, FockOperator]:
    v_first = displaced_v(ANGLES[0], ANGLES[1], mu(ANGLES[0], ANGLES[1], OUTCOME.m_a, OUTCOME.m_b), ctx.cutoff)
    return v_first, v_first


def _sfactor_lhs(ctx: IdentityContext) -> np.ndarray:
    return np.array([fit_squeeze_factor(sheared_ancilla_gate(t, min(ctx.cutoff, 12))) for t in SHEAR_ANGLES])


def _sfactor_rhs(ctx: IdentityContext) -> np.ndarray:
    return np.array([sfactor(t) for t in SHEAR_ANGLES])


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


_REGISTRY: dict[str, IdentityCase] = {}


def register(case: IdentityCase) -> IdentityCase:
    if case.id in _REGISTRY:
        raise ValueError(f"identity {case.id!r} registered twice")
    _REGISTRY[case.id] = case
    return case


for _case in (
    IdentityCase("epr_cx", "Canonical maximally entangled EPR state", _epr_cx_lhs, _epr_family,
                 _converged_infidelity, 1e-3),
    IdentityCase("cvcs_fourier", "Canonical CV cluster state accompanied by a Fourier transform", _cvcs_lhs,
                 _fourier_choi_family, _converged_infidelity, 1e-3),
    IdentityCase("gkp_bell_qunaught", "Square-lattice GKP Bell state from two qunaughts", _gkp_bell_from_qunaughts,
                 _gkp_bell_direct, _infidelity, 5e-3),
    IdentityCase("partial_p_comb", "Partial GKP projection in momentum", _partial_p_lhs, _partial_p_rhs, _pairwise,
                 1e-8),
    IdentityCase("partial_q_comb", "Partial GKP projection in position", _partial_q_lhs, _partial_q_rhs, _pairwise,
                 1e-8),
    IdentityCase("bs_decomposition", "Decomposition of the beamsplitter", _bs_decomposition_lhs,
                 _bs_decomposition_rhs, _bs_decomposition_residual, 1e-6, regularized=False),
    IdentityCase("bounce_transpose", "Bouncing operations from one mode", _bounce_lhs, _bounce_rhs, _pairwise, 1e-8,
                 regularized=False),
    IdentityCase("bs_displacement_choi", "Mixing a t-momentum and s-position eigenstate", _bs_displacement_lhs,
                 _bs_displacement_rhs, _pairwise, 1e-8),
    IdentityCase("measurement_v_mu", "Entangled two-mode measurement of rotated quadratures", _measurement_lhs,
                 _measurement_rhs, _pairwise, 1e-6),
    IdentityCase("kraus_state_damped", "Beamsplitter-entangled Kraus state", _kraus_state_lhs, _kraus_state_rhs,
                 _pairwise, 1e-10),
    IdentityCase("gadget_full", "Gate-teleportation gadget with damped ancillas", _gadget_lhs, _gadget_rhs,
                 _pairwise, 5e-3),
    IdentityCase("case_ab", "Case (AB): full GKP error correction", _ec_lhs(EcVariant.AB), _ec_rhs(EcVariant.AB),
                 _pairwise, 5e-3),
    IdentityCase("case_a", "Case (A): GKP error correction in momentum", _ec_lhs(EcVariant.A), _ec_rhs(EcVariant.A),
                 _pairwise, 5e-3),
    IdentityCase("case_b", "Case (B): GKP error correction in position", _ec_lhs(EcVariant.B), _ec_rhs(EcVariant.B),
                 _pairwise, 5e-3),
    IdentityCase("mu_prime_commutation", "Displacement orderings of the measurement circuit", _orderings_lhs,
                 _orderings_rhs, _pairwise, 1e-6, regularized=False),
    IdentityCase("sfactor_relation", "Squeeze factor of sheared-eigenstate ancillas", _sfactor_lhs, _sfactor_rhs,
                 _pairwise, 1e-6, regularized=False),
):
    register(_case)


def registry_ids() -> list[str]:
    """Registered identity ids in registration order."""
    return list(_REGISTRY)


def get_identity(identity_id: str) -> IdentityCase:
    try:
        return _REGISTRY[identity_id]
    except KeyError:
        raise UnknownIdentityError(identity_id) from None


def trend_holds(residuals: Sequence[float], tolerance: float, slack_fraction: float) -> bool:
    """Residuals along a decreasing-beta schedule may not grow by more than slack_fraction * tolerance."""
    slack = slack_fraction * tolerance
    return all(b <= a + slack for a, b in zip(residuals, residuals[1:]))


def run_identity(
    identity_id: str,
    cutoff: int = 60,
    beta_schedule: Optional[Sequence[float]] = None,
    settings: Optional[Settings] = None,
) -> IdentityReport:
    """
    Evaluate one identity.

    Args:
        identity_id: Registered id
        cutoff: Fock cutoff
        beta_schedule: Damping values, largest first (default from settings)
        settings: Settings (default: process-wide)

    Returns:
        IdentityReport; betas is empty for damping-independent identities

    Raises:
        UnknownIdentityError: If the id is not registered
        CutoffConvergenceError: If a construction does not fit the cutoff

    Example:
        ```python
        report = run_identity("bs_displacement_choi", cutoff=40)
        assert report.passed
        ```
    """
    case = get_identity(identity_id)
    config = settings or get_settings()
    interior = config.interior(cutoff)
    if case.regularized:
        betas = [float(b) for b in (beta_schedule or config.beta_schedule)]
        residuals = [case.evaluate(IdentityContext(cutoff, interior, beta)) for beta in betas]
    else:
        betas = []
        residuals = [case.evaluate(IdentityContext(cutoff, interior))]
    finite = all(math.isfinite(r) for r in residuals)
    passed = (
        finite
        and residuals[-1] <= case.tolerance
        and trend_holds(residuals, case.tolerance, config.trend_slack_fraction)
    )
    logger.info("identity %s: residuals %s -> %s", identity_id, [f"{r:.2e}" for r in residuals], "pass" if passed else "FAIL")
    return IdentityReport(id=identity_id, cutoff=cutoff, betas=betas, residuals=residuals, passed=passed)


def run_all(
    cutoff: int = 60,
    beta_schedule: Optional[Sequence[float]] = None,
    settings: Optional[Settings] = None,
) -> list[IdentityReport]:
    """Run the full registry sequentially, sorted by id."""
    return [run_identity(i, cutoff, beta_schedule, settings) for i in sorted(registry_ids())]
