"""
krausgadget - State Constructors

Squeezed vacua, damped quadrature eigenstates, the Fock-form EPR state, GKP
codewords, the qunaught and GKP Bell pairs, plus wavefunction evaluation.

Damped objects are N(beta)|ideal> / sqrt(norm) where the reference norm
<ideal|N(2 beta)|ideal> is computed without truncation (closed form where one
exists, otherwise a long Fock sum). Unit constructors additionally check that
the truncation loses at most `truncation_tolerance` of the norm and then
renormalize exactly.
"""

import logging
from enum import Enum
from typing import Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import gammaln

from .config import get_settings
from .exceptions import CutoffConvergenceError, DimensionMismatchError
from .fock_core import (
    ComplexArray,
    CutoffLike,
    FockState,
    NormKind,
    RealArray,
    as_dim,
    hermite_functions,
    reliable_radius,
    tensor,
)

logger = logging.getLogger(__name__)

SQRT_PI = float(np.sqrt(np.pi))
QUNAUGHT_SPACING = float(np.sqrt(2.0 * np.pi))


class AncillaKind(str, Enum):
    Q_EIGENSTATE = "q_eigenstate"
    P_EIGENSTATE = "p_eigenstate"
    SQUEEZED_Q = "squeezed_q"
    SQUEEZED_P = "squeezed_p"
    QUNAUGHT = "qunaught"
    GKP_CODEWORD = "gkp_codeword"
    GKP_PLUS_MINUS = "gkp_plus_minus"
    CUSTOM = "custom"


class AncillaSpec(BaseModel):
    """
    Declarative ancilla: an ideal state plus damping N(beta).

    Attributes:
        kind: Ancilla family
        value: Eigenvalue (eigenstates), zeta (squeezed), j (codeword) or +/-1 (plus/minus)
        beta: Damping, >= 0
        amplitudes: Fock amplitudes for the custom kind
    """

    model_config = ConfigDict(frozen=True)

    kind: AncillaKind
    value: float = 0.0
    beta: float = Field(default=0.0, ge=0.0)
    amplitudes: Optional[tuple[complex, ...]] = None

    @model_validator(mode="after")
    def _check_kind(self) -> "AncillaSpec":
        if self.kind in (AncillaKind.SQUEEZED_Q, AncillaKind.SQUEEZED_P) and self.value <= 0:
            raise ValueError("squeezing factor zeta must be positive")
        if self.kind is AncillaKind.GKP_CODEWORD and self.value not in (0, 1):
            raise ValueError("codeword index must be 0 or 1")
        if self.kind is AncillaKind.GKP_PLUS_MINUS and self.value not in (1, -1):
            raise ValueError("plus/minus sign must be +1 or -1")
        if self.kind is AncillaKind.CUSTOM and not self.amplitudes:
            raise ValueError("custom ancilla needs amplitudes")
        return self

    @classmethod
    def q_eigenstate(cls, s: float = 0.0, beta: float = 0.0) -> "AncillaSpec":
        return cls(kind=AncillaKind.Q_EIGENSTATE, value=s, beta=beta)

    @classmethod
    def p_eigenstate(cls, t: float = 0.0, beta: float = 0.0) -> "AncillaSpec":
        return cls(kind=AncillaKind.P_EIGENSTATE, value=t, beta=beta)

    @classmethod
    def squeezed_q(cls, zeta: float, beta: float = 0.0) -> "AncillaSpec":
        return cls(kind=AncillaKind.SQUEEZED_Q, value=zeta, beta=beta)

    @classmethod
    def squeezed_p(cls, zeta: float, beta: float = 0.0) -> "AncillaSpec":
        return cls(kind=AncillaKind.SQUEEZED_P, value=zeta, beta=beta)

    @classmethod
    def qunaught(cls, beta: float = 0.0) -> "AncillaSpec":
        return cls(kind=AncillaKind.QUNAUGHT, beta=beta)

    @classmethod
    def gkp_codeword(cls, j: int, beta: float = 0.0) -> "AncillaSpec":
        return cls(kind=AncillaKind.GKP_CODEWORD, value=j, beta=beta)

    @classmethod
    def custom(cls, amplitudes: Sequence[complex], beta: float = 0.0) -> "AncillaSpec":
        return cls(kind=AncillaKind.CUSTOM, amplitudes=tuple(complex(a) for a in amplitudes), beta=beta)

    @classmethod
    def parse(cls, token: str) -> "AncillaSpec":
        """
        Parse `kind[:value][@beta]`.

        For the squeezed kinds a bare value is read as the damping of the
        equivalent damped eigenstate (tanh r = e^{-2 beta}), matching the
        beta-centric CLI; `squeezed_q:zeta=0.3` gives zeta directly.

        Example:
            ```python
            AncillaSpec.parse("p_eigenstate:0@0.05")
            AncillaSpec.parse("squeezed_p:0.05")
            AncillaSpec.parse("qunaught@0.05")
            ```
        """
        body, _, beta_text = token.partition("@")
        name, _, value_text = body.partition(":")
        kind = AncillaKind(name)
        beta = float(beta_text) if beta_text else 0.0
        if kind in (AncillaKind.SQUEEZED_Q, AncillaKind.SQUEEZED_P):
            if value_text.startswith("zeta="):
                zeta = float(value_text[len("zeta=") :])
            else:
                zeta = zeta_from_beta(float(value_text or 0.0))
            return cls(kind=kind, value=zeta, beta=beta)
        return cls(kind=kind, value=float(value_text) if value_text else 0.0, beta=beta)

    @property
    def ideal_normalizable(self) -> bool:
        return self.kind in (AncillaKind.SQUEEZED_Q, AncillaKind.SQUEEZED_P, AncillaKind.CUSTOM)

    @property
    def normalizable(self) -> bool:
        return self.ideal_normalizable or self.beta > 0

    def undamped(self) -> "AncillaSpec":
        return self.model_copy(update={"beta": 0.0})


class GkpQuality(BaseModel):
    """Spike variance, envelope variance and GKP squeezing for damping beta."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=0.0)
    delta_sq: float
    kappa_sq: float
    s_gkp_db: float

    @classmethod
    def from_beta(cls, beta: float) -> "GkpQuality":
        return cls(beta=beta, delta_sq=beta, kappa_sq=beta, s_gkp_db=squeezing_db(beta))


def squeezing_db(beta: float) -> float:
    """s_GKP = -10 log10(Delta^2) with Delta^2 = beta."""
    return float(-10.0 * np.log10(beta))


def beta_from_db(db: float) -> float:
    return float(10.0 ** (-db / 10.0))


def zeta_from_beta(beta: float) -> float:
    """Squeezing factor of a damped zero-eigenstate: zeta = e^{-r}, tanh r = e^{-2 beta}."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return float(np.exp(-np.arctanh(np.exp(-2.0 * beta))))


# ---------------------------------------------------------------------------
# ideal Fock amplitudes
# ---------------------------------------------------------------------------


def _squeezed_amplitudes(zeta: float, dim: int, momentum: bool) -> ComplexArray:
    kappa = (1.0 - zeta**2) / (1.0 + zeta**2)
    k = np.arange((dim + 1) // 2)
    log_mag = 0.5 * gammaln(2 * k + 1) - k * np.log(2.0) - gammaln(k + 1)
    ratio = kappa if momentum else -kappa
    out = np.zeros(dim, dtype=np.complex128)
    out[0::2] = np.sqrt(2.0 * zeta / (1.0 + zeta**2)) * np.power(ratio, k) * np.exp(log_mag)
    return out


def _comb_sites(spacing: float, offset: float, dim: int, beta: float) -> RealArray:
    eps = get_settings().comb_epsilon
    radius = np.sqrt(2.0 * dim + 2.0) + np.sqrt(2.0 * np.log(1.0 / eps))
    if beta > 0:
        radius = max(radius, np.sqrt(2.0 * np.log(1.0 / eps) / beta))
    k_max = int(np.ceil((radius + abs(offset)) / spacing)) + 1
    sites = offset + spacing * np.arange(-k_max, k_max + 1)
    return sites[np.abs(sites) <= radius + spacing]


def comb_amplitudes(spacing: float, offset: float, dim: int, beta: float = 0.0) -> RealArray:
    """sum_k h_n(offset + k * spacing) for n < dim (unnormalized comb)."""
    sites = _comb_sites(spacing, offset, dim, beta)
    return hermite_functions(dim, sites).sum(axis=1)


def _codeword(j: int, dim: int, beta: float) -> ComplexArray:
    out = np.sqrt(2.0 * SQRT_PI) * comb_amplitudes(2.0 * SQRT_PI, j * SQRT_PI, dim, beta)
    out[1::2] = 0.0
    return out.astype(np.complex128)


def _qunaught(dim: int, beta: float) -> ComplexArray:
    out = (2.0 * np.pi) ** 0.25 * comb_amplitudes(QUNAUGHT_SPACING, 0.0, dim, beta)
    out[np.arange(dim) % 4 != 0] = 0.0
    return out.astype(np.complex128)


def ideal_amplitudes(spec: AncillaSpec, dim: int) -> ComplexArray:
    """Undamped Fock amplitudes <n|ideal> for n < dim (density-normalized for eigenstates and combs)."""
    n = np.arange(dim)
    if spec.kind is AncillaKind.Q_EIGENSTATE:
        return hermite_functions(dim, spec.value).astype(np.complex128)
    if spec.kind is AncillaKind.P_EIGENSTATE:
        return (1j**n) * hermite_functions(dim, spec.value)
    if spec.kind is AncillaKind.SQUEEZED_Q:
        return _squeezed_amplitudes(spec.value, dim, momentum=False)
    if spec.kind is AncillaKind.SQUEEZED_P:
        return _squeezed_amplitudes(spec.value, dim, momentum=True)
    if spec.kind is AncillaKind.QUNAUGHT:
        return _qunaught(dim, spec.beta)
    if spec.kind is AncillaKind.GKP_CODEWORD:
        return _codeword(int(spec.value), dim, spec.beta)
    if spec.kind is AncillaKind.GKP_PLUS_MINUS:
        return (_codeword(0, dim, spec.beta) + spec.value * _codeword(1, dim, spec.beta)) / np.sqrt(2.0)
    assert spec.amplitudes is not None
    out = np.zeros(dim, dtype=np.complex128)
    given = np.asarray(spec.amplitudes, dtype=np.complex128)[:dim]
    out[: len(given)] = given
    return out


def damped_norm(spec: AncillaSpec) -> float:
    """
    Reference norm <ideal|N(2 beta)|ideal> without truncation.

    Raises:
        ValueError: For an undamped eigenstate or comb (infinite norm)
    """
    beta = spec.beta
    if spec.kind in (AncillaKind.Q_EIGENSTATE, AncillaKind.P_EIGENSTATE):
        if beta <= 0:
            raise ValueError("undamped eigenstates are not normalizable")
        # Mehler kernel on the diagonal
        return float(np.exp(-spec.value**2 * np.tanh(beta)) / np.sqrt(np.pi * (1.0 - np.exp(-4.0 * beta))))
    if spec.kind in (AncillaKind.SQUEEZED_Q, AncillaKind.SQUEEZED_P):
        zeta = spec.value
        kappa = (1.0 - zeta**2) / (1.0 + zeta**2)
        return float(2.0 * zeta / (1.0 + zeta**2) / np.sqrt(1.0 - np.exp(-4.0 * beta) * kappa**2))
    if spec.kind is AncillaKind.CUSTOM:
        amps = np.asarray(spec.amplitudes, dtype=np.complex128)
        return float(np.sum(np.exp(-2.0 * beta * np.arange(len(amps))) * np.abs(amps) ** 2))
    if beta <= 0:
        raise ValueError("undamped GKP-type states are not normalizable")
    reference = int(np.ceil(18.4 / beta)) + 8
    amps = ideal_amplitudes(spec, reference)
    return float(np.sum(np.exp(-2.0 * beta * np.arange(reference)) * np.abs(amps) ** 2))


def ancilla_amplitudes(spec: AncillaSpec, dim: int) -> ComplexArray:
    """
    Damped amplitudes e^{-beta n}<n|ideal>/sqrt(norm) without renormalizing the truncation.

    Undamped eigenstates and combs come back density-normalized (no division).
    """
    amps = np.exp(-spec.beta * np.arange(dim)) * ideal_amplitudes(spec, dim)
    if not spec.normalizable:
        return amps
    return amps / np.sqrt(damped_norm(spec))


def truncation_deficit(spec: AncillaSpec, dim: int) -> float:
    """Norm lost by truncating a normalizable ancilla at `dim`."""
    amps = ancilla_amplitudes(spec, dim)
    return float(max(0.0, 1.0 - np.vdot(amps, amps).real))


def check_truncation(spec: AncillaSpec, dim: int, tolerance: Optional[float] = None) -> float:
    """
    Raise if truncation at `dim` loses more than `tolerance` of the norm.

    Returns:
        The deficit
    """
    tol = get_settings().truncation_tolerance if tolerance is None else tolerance
    deficit = truncation_deficit(spec, dim)
    if deficit > tol:
        raise CutoffConvergenceError(f"{spec.kind.value} norm", dim, deficit)
    return deficit


def ancilla_state(spec: AncillaSpec, cutoff: CutoffLike, tolerance: Optional[float] = None) -> FockState:
    """
    Fock state of an ancilla: unit-normalized when normalizable, else density.

    Raises:
        CutoffConvergenceError: If the cutoff is too small for the damping
    """
    dim = as_dim(cutoff)
    amps = ancilla_amplitudes(spec, dim)
    if not spec.normalizable:
        return FockState(amps, (dim,), NormKind.DENSITY)
    check_truncation(spec, dim, tolerance)
    return FockState(amps, (dim,), NormKind.DENSITY).normalized()


def cutoff_for_damping(beta: float, tolerance: Optional[float] = None, margin: int = 4) -> int:
    """
    Smallest cutoff at which a damped zero-eigenstate loses at most `tolerance`
    of its norm, plus a small margin for combs and displaced eigenstates.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    tol = get_settings().truncation_tolerance if tolerance is None else tolerance
    spec = AncillaSpec.q_eigenstate(0.0, beta)
    reference = int(np.ceil(40.0 / beta)) + 8
    weights = np.abs(ancilla_amplitudes(spec, reference)) ** 2
    remaining = 1.0 - np.cumsum(weights)
    dim = int(np.argmax(remaining <= tol)) + 1
    return max(dim + margin, 8)


# ---------------------------------------------------------------------------
# public constructors
# ---------------------------------------------------------------------------


def squeezed_vacuum_q(zeta: float, cutoff: CutoffLike, tolerance: Optional[float] = None) -> FockState:
    """
    Position-squeezed vacuum with <q^2> = zeta^2/2.

    Args:
        zeta: Positive squeezing factor (zeta = 1 is the vacuum)
        cutoff: Fock dimension
        tolerance: Largest accepted truncation deficit

    Raises:
        CutoffConvergenceError: If zeta is too extreme for the cutoff
    """
    return ancilla_state(AncillaSpec.squeezed_q(zeta), cutoff, tolerance)


def squeezed_vacuum_p(zeta: float, cutoff: CutoffLike, tolerance: Optional[float] = None) -> FockState:
    """Momentum-squeezed vacuum, |0; zeta>_p = |0; 1/zeta>_q."""
    return ancilla_state(AncillaSpec.squeezed_p(zeta), cutoff, tolerance)


def damped_quadrature_eigenstate(
    kind: Literal["q", "p"],
    value: float,
    beta: float,
    cutoff: CutoffLike,
    tolerance: Optional[float] = None,
) -> FockState:
    """N(beta)|value>_q or N(beta)|value>_p, unit-normalized."""
    if beta <= 0:
        raise ValueError("damped eigenstates need beta > 0")
    spec = AncillaSpec.q_eigenstate(value, beta) if kind == "q" else AncillaSpec.p_eigenstate(value, beta)
    return ancilla_state(spec, cutoff, tolerance)


def rotated_eigenstate(kind: Literal["q", "p"], value: float, theta: float, cutoff: CutoffLike) -> FockState:
    """
    Ideal eigenstate R^dag(theta)|value> of the rotated quadrature (density-normalized).

    p_theta = q sin(theta) + p cos(theta); q_theta = q cos(theta) - p sin(theta).
    """
    dim = as_dim(cutoff)
    n = np.arange(dim)
    base = hermite_functions(dim, value) * (1j**n if kind == "p" else 1.0)
    return FockState(np.exp(-1j * n * theta) * base, (dim,), NormKind.DENSITY)


def fock_epr(cutoff: CutoffLike) -> FockState:
    """Ideal two-mode EPR state (2 pi)^{-1/2} sum_n |n>|n> (density-normalized)."""
    dim = as_dim(cutoff)
    amps = np.eye(dim, dtype=np.complex128) / np.sqrt(2.0 * np.pi)
    return FockState(amps, (dim, dim), NormKind.DENSITY)


def gkp_codeword(j: int, beta: float, cutoff: CutoffLike, tolerance: Optional[float] = None) -> FockState:
    """
    Damped square-lattice codeword N(beta)|j_GKP>, unit-normalized.

    Amplitudes come from Hermite values on the comb (2k + j) sqrt(pi); odd levels are
    exactly zero.
    """
    if beta <= 0:
        raise ValueError("GKP codewords need beta > 0")
    return ancilla_state(AncillaSpec.gkp_codeword(j, beta), cutoff, tolerance)


def qunaught(beta: float, cutoff: CutoffLike, tolerance: Optional[float] = None) -> FockState:
    """Damped qunaught (comb of period sqrt(2 pi)); support only on n = 0 mod 4."""
    if beta <= 0:
        raise ValueError("qunaught needs beta > 0")
    return ancilla_state(AncillaSpec.qunaught(beta), cutoff, tolerance)


def gkp_state(c0: complex, c1: complex, beta: float, cutoff: CutoffLike, tolerance: Optional[float] = None) -> FockState:
    """Logical qubit c0|0> + c1|1> encoded with unit damped codewords, normalized."""
    zero = gkp_codeword(0, beta, cutoff, tolerance)
    one = gkp_codeword(1, beta, cutoff, tolerance)
    return FockState(c0 * zero.amplitudes + c1 * one.amplitudes, zero.mode_dims, NormKind.DENSITY).normalized()


def gkp_plus_minus(sign: int, beta: float, cutoff: CutoffLike, tolerance: Optional[float] = None) -> FockState:
    return gkp_state(1.0, float(sign), beta, cutoff, tolerance)


def gkp_bell_pair(beta: float, cutoff: CutoffLike, tolerance: Optional[float] = None) -> FockState:
    """(|0>|0> + |1>|1>) in damped GKP codewords, normalized."""
    zero = gkp_codeword(0, beta, cutoff, tolerance)
    one = gkp_codeword(1, beta, cutoff, tolerance)
    pair = tensor(zero, zero).amplitudes + tensor(one, one).amplitudes
    return FockState(pair, zero.mode_dims * 2, NormKind.DENSITY).normalized()


# ---------------------------------------------------------------------------
# wavefunctions
# ---------------------------------------------------------------------------


def wavefunction(
    state: FockState,
    basis: Literal["q", "p"],
    grid: Union[Sequence[float], RealArray],
) -> ComplexArray:
    """
    Position or momentum wavefunction of a single-mode state.

    psi(s) = sum_n a_n h_n(s); the momentum form uses <t|n>_p = (-i)^n h_n(t).

    Args:
        state: Single-mode state
        basis: "q" or "p"
        grid: Evaluation points

    Returns:
        Complex values on the grid
    """
    if state.num_modes != 1:
        raise DimensionMismatchError(1, state.num_modes)
    xs = np.asarray(grid, dtype=np.float64)
    dim = state.mode_dims[0]
    if xs.size and float(np.max(np.abs(xs))) > reliable_radius(dim):
        logger.warning("grid extends to |x|=%.2f beyond the reliable range of cutoff %d", np.max(np.abs(xs)), dim)
    amps = state.amplitudes
    if basis == "p":
        amps = amps * (-1j) ** np.arange(dim)
    return np.asarray(amps @ hermite_functions(dim, xs), dtype=np.complex128)


def approximate_gkp_wavefunction(j: int, beta: float, grid: Union[Sequence[float], RealArray]) -> RealArray:
    """
    Small-damping closed form of a damped codeword's position wavefunction:
    Gaussian spikes of variance beta at (2n + j) sqrt(pi) under an envelope e^{-beta s^2/2}.
    """
    xs = np.asarray(grid, dtype=np.float64)
    reach = float(np.max(np.abs(xs))) + 10.0 * np.sqrt(beta) if xs.size else 0.0
    n_max = int(np.ceil(reach / (2.0 * SQRT_PI))) + 1
    peaks = (2.0 * np.arange(-n_max, n_max + 1) + j) * SQRT_PI
    spikes = np.exp(-((xs[:, None] - peaks[None, :]) ** 2) / (2.0 * beta)).sum(axis=1)
    return np.asarray(np.sqrt(2.0) / np.pi**0.25 * np.exp(-0.5 * beta * xs**2) * spikes)
