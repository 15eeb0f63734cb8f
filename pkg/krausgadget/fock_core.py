"""
krausgadget - Fock Core

Truncated Fock-space linear algebra: states, operators, tensor products,
mode-pair contraction, overlaps, fidelities and convergence in the cutoff.

Conventions: hbar = 1, q = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2), so the
vacuum has quadrature variance 1/2. Multi-mode amplitudes are stored flat in
C order, mode 0 leftmost (top wire of a circuit).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional, Sequence, TypeVar, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import CutoffConvergenceError, DimensionMismatchError, ZeroNormError

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]

T = TypeVar("T")


class Cutoff(BaseModel):
    """Fock dimension per mode: basis |0>, ..., |n_max - 1>."""

    model_config = ConfigDict(frozen=True)

    n_max: int = Field(ge=2)


CutoffLike = Union[int, Cutoff]


def as_dim(cutoff: CutoffLike) -> int:
    """Plain integer dimension of a cutoff, validated."""
    if isinstance(cutoff, Cutoff):
        return cutoff.n_max
    return Cutoff(n_max=int(cutoff)).n_max


class NormKind(str, Enum):
    UNIT = "unit"
    DENSITY = "density"


def _frozen(array: NDArray[Any], dtype: Any = np.complex128) -> NDArray[Any]:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FockState:
    """
    Pure state (or delta-normalized object) on a truncated multi-mode Fock space.

    Attributes:
        amplitudes: Flat complex amplitude vector of length prod(mode_dims)
        mode_dims: Per-mode cutoffs
        norm_kind: UNIT for normalized states, DENSITY for eigenstate-like objects
    """

    amplitudes: ComplexArray
    mode_dims: tuple[int, ...]
    norm_kind: NormKind = NormKind.UNIT
    tolerance: float = field(default=1e-8, compare=False)

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.mode_dims)
        amplitudes = _frozen(np.ravel(self.amplitudes))
        if amplitudes.size != int(np.prod(dims)):
            raise DimensionMismatchError(int(np.prod(dims)), amplitudes.size)
        object.__setattr__(self, "mode_dims", dims)
        object.__setattr__(self, "amplitudes", amplitudes)
        if self.norm_kind is NormKind.UNIT and abs(self.norm_sq - 1.0) > self.tolerance:
            raise ValueError(f"unit state has squared norm {self.norm_sq:.12f}")

    @property
    def num_modes(self) -> int:
        return len(self.mode_dims)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def tensor(self) -> ComplexArray:
        """Amplitudes reshaped to one axis per mode."""
        return self.amplitudes.reshape(self.mode_dims)

    def normalized(self) -> "FockState":
        norm = np.sqrt(self.norm_sq)
        if norm == 0.0:
            raise ZeroNormError("cannot normalize a zero state")
        return FockState(self.amplitudes / norm, self.mode_dims, NormKind.UNIT)

    def with_dims(self, mode_dims: Sequence[int]) -> "FockState":
        """Zero-pad or crop every mode to new dimensions (norm kind becomes DENSITY if cropped)."""
        target = tuple(int(d) for d in mode_dims)
        if len(target) != self.num_modes:
            raise DimensionMismatchError(self.num_modes, len(target))
        out = np.zeros(target, dtype=np.complex128)
        common = tuple(slice(0, min(a, b)) for a, b in zip(self.mode_dims, target))
        out[common] = self.tensor()[common]
        kind = self.norm_kind
        if kind is NormKind.UNIT and abs(float(np.vdot(out, out).real) - 1.0) > self.tolerance:
            kind = NormKind.DENSITY
        return FockState(out, target, kind)


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on a truncated multi-mode Fock space."""

    matrix: ComplexArray
    mode_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.mode_dims)
        matrix = _frozen(self.matrix)
        size = int(np.prod(dims))
        if matrix.shape != (size, size):
            raise DimensionMismatchError((size, size), matrix.shape)
        object.__setattr__(self, "mode_dims", dims)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dag(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T, self.mode_dims)

    @property
    def T(self) -> "FockOperator":
        """Fock-basis transpose."""
        return FockOperator(self.matrix.T, self.mode_dims)

    def scaled(self, factor: complex) -> "FockOperator":
        return FockOperator(factor * self.matrix, self.mode_dims)

    def __matmul__(self, other: Any) -> Any:
        if isinstance(other, FockOperator):
            if other.mode_dims != self.mode_dims:
                raise DimensionMismatchError(self.mode_dims, other.mode_dims)
            return FockOperator(self.matrix @ other.matrix, self.mode_dims)
        if isinstance(other, FockState):
            if other.mode_dims != self.mode_dims:
                raise DimensionMismatchError(self.mode_dims, other.mode_dims)
            return FockState(self.matrix @ other.amplitudes, self.mode_dims, NormKind.DENSITY)
        return NotImplemented

    def __add__(self, other: "FockOperator") -> "FockOperator":
        if other.mode_dims != self.mode_dims:
            raise DimensionMismatchError(self.mode_dims, other.mode_dims)
        return FockOperator(self.matrix + other.matrix, self.mode_dims)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        if other.mode_dims != self.mode_dims:
            raise DimensionMismatchError(self.mode_dims, other.mode_dims)
        return FockOperator(self.matrix - other.matrix, self.mode_dims)

    def crop(self, n_max: int) -> "FockOperator":
        """Leading n_max x n_max block of a single-mode operator."""
        if len(self.mode_dims) != 1:
            raise DimensionMismatchError("single mode", self.mode_dims)
        return FockOperator(self.matrix[:n_max, :n_max], (n_max,))


# ---------------------------------------------------------------------------
# basis objects
# ---------------------------------------------------------------------------


def basis_state(n: int, cutoff: CutoffLike) -> FockState:
    """Fock state |n>."""
    dim = as_dim(cutoff)
    if not 0 <= n < dim:
        raise ValueError(f"level {n} outside cutoff {dim}")
    amplitudes = np.zeros(dim, dtype=np.complex128)
    amplitudes[n] = 1.0
    return FockState(amplitudes, (dim,))


def identity(cutoff: CutoffLike, modes: int = 1) -> FockOperator:
    dim = as_dim(cutoff)
    return FockOperator(np.eye(dim**modes, dtype=np.complex128), (dim,) * modes)


def ladder(cutoff: CutoffLike) -> tuple[FockOperator, FockOperator]:
    """
    Annihilation and creation operators.

    Args:
        cutoff: Fock dimension

    Returns:
        (a, a_dag) with a|n> = sqrt(n)|n-1>
    """
    dim = as_dim(cutoff)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=np.float64)), k=1).astype(np.complex128)
    return FockOperator(a, (dim,)), FockOperator(a.conj().T, (dim,))


def number_operator(cutoff: CutoffLike) -> FockOperator:
    dim = as_dim(cutoff)
    return FockOperator(np.diag(np.arange(dim, dtype=np.complex128)), (dim,))


def quadratures(cutoff: CutoffLike) -> tuple[FockOperator, FockOperator]:
    """
    Position and momentum quadratures.

    The commutator [q, p] = i holds exactly except in the last row and
    column, which the truncation corrupts.
    """
    a, ad = ladder(cutoff)
    q = (a.matrix + ad.matrix) / np.sqrt(2.0)
    p = -1j * (a.matrix - ad.matrix) / np.sqrt(2.0)
    # Exact Hermiticity by construction
    q = 0.5 * (q + q.conj().T)
    p = 0.5 * (p + p.conj().T)
    return FockOperator(q, a.mode_dims), FockOperator(p, a.mode_dims)


def hermite_functions(n_max: int, x: Union[float, Sequence[float], RealArray]) -> RealArray:
    """
    Normalized Hermite-Gaussian functions h_0 ... h_{n_max-1}.

    Uses the stable three-term recurrence
    h_n = sqrt(2/n) x h_{n-1} - sqrt((n-1)/n) h_{n-2}, which never forms the
    polynomial and the Gaussian separately.

    Args:
        n_max: Number of functions
        x: Evaluation points

    Returns:
        Array of shape (n_max,) + shape(x)
    """
    xs = np.asarray(x, dtype=np.float64)
    out = np.empty((n_max,) + xs.shape, dtype=np.float64)
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * xs**2)
    if n_max > 1:
        out[1] = np.sqrt(2.0) * xs * out[0]
    for n in range(2, n_max):
        out[n] = np.sqrt(2.0 / n) * xs * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


def reliable_radius(n_max: int) -> float:
    """Largest |x| at which a cutoff-n_max expansion is still trustworthy."""
    return float(np.sqrt(2.0 * n_max + 1.0) + 3.0)


# ---------------------------------------------------------------------------
# products and contractions
# ---------------------------------------------------------------------------


def tensor(a: Any, b: Any) -> Any:
    """
    Kronecker product; argument order is mode order.

    Args:
        a: FockState or FockOperator (left modes)
        b: Object of the same kind (right modes)

    Returns:
        Combined object with mode_dims = a.mode_dims + b.mode_dims
    """
    if isinstance(a, FockState) and isinstance(b, FockState):
        kind = NormKind.UNIT if a.norm_kind is b.norm_kind is NormKind.UNIT else NormKind.DENSITY
        return FockState(np.kron(a.amplitudes, b.amplitudes), a.mode_dims + b.mode_dims, kind)
    if isinstance(a, FockOperator) and isinstance(b, FockOperator):
        return FockOperator(np.kron(a.matrix, b.matrix), a.mode_dims + b.mode_dims)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def apply_two_mode(op: FockOperator, state: FockState, modes: tuple[int, int]) -> FockState:
    """
    Contract a two-mode operator into modes (i, j) of a multi-mode state.

    Args:
        op: Operator with mode_dims (d_i, d_j)
        state: k-mode state
        modes: Target modes, 0-based, i != j

    Returns:
        New state; other modes untouched

    Raises:
        DimensionMismatchError: If the operator does not fit the target modes
    """
    i, j = modes
    if i == j or not (0 <= i < state.num_modes and 0 <= j < state.num_modes):
        raise ValueError(f"invalid mode pair {modes} for a {state.num_modes}-mode state")
    if len(op.mode_dims) != 2 or op.mode_dims != (state.mode_dims[i], state.mode_dims[j]):
        raise DimensionMismatchError((state.mode_dims[i], state.mode_dims[j]), op.mode_dims)
    psi = np.moveaxis(state.tensor(), (i, j), (0, 1))
    rest = psi.shape[2:]
    out = (op.matrix @ psi.reshape(op.dim, -1)).reshape(psi.shape[:2] + rest)
    out = np.moveaxis(out, (0, 1), (i, j))
    return FockState(out, state.mode_dims, NormKind.DENSITY)


def overlap(a: FockState, b: FockState) -> complex:
    """<a|b>, conjugating a."""
    if a.mode_dims != b.mode_dims:
        raise DimensionMismatchError(a.mode_dims, b.mode_dims)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity_up_to_phase(a: FockState, b: FockState) -> float:
    """|<a|b>|^2 / (||a||^2 ||b||^2)."""
    na, nb = a.norm_sq, b.norm_sq
    if na == 0.0 or nb == 0.0:
        raise ZeroNormError("fidelity of a zero state")
    return abs(overlap(a, b)) ** 2 / (na * nb)


def interior_mask(mode_dims: Sequence[int], interior: int) -> NDArray[np.bool_]:
    """Flat mask of basis states whose total photon number is below `interior`."""
    grids = np.meshgrid(*[np.arange(d) for d in mode_dims], indexing="ij")
    total = np.sum(grids, axis=0) if len(grids) > 1 else grids[0]
    return np.asarray(total < interior).ravel()


def _phase_distance(a: ComplexArray, b: ComplexArray, exact_phase: bool) -> float:
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        raise ZeroNormError("reference has zero norm on the compared block")
    if exact_phase:
        return float(np.linalg.norm(a - b)) / norm_b
    # Align the phase first; expanding the squared norm cancels below ~1e-8
    inner = complex(np.vdot(b, a))
    phase = inner / abs(inner) if inner != 0 else 1.0
    return float(np.linalg.norm(a - phase * b)) / norm_b


def operator_distance_up_to_phase(
    a: FockOperator,
    b: FockOperator,
    interior: int,
    exact_phase: bool = False,
) -> float:
    """
    Relative Frobenius distance on the interior block, minimized over a global phase.

    Args:
        a: Operator under test
        b: Reference operator
        interior: Photon-number bound of the interior block
        exact_phase: Compare without phase optimization

    Returns:
        min_phi ||A - e^{i phi} B||_F / ||B||_F on the interior
    """
    if a.mode_dims != b.mode_dims:
        raise DimensionMismatchError(a.mode_dims, b.mode_dims)
    mask = interior_mask(a.mode_dims, interior)
    return _phase_distance(a.matrix[np.ix_(mask, mask)], b.matrix[np.ix_(mask, mask)], exact_phase)


def state_distance_up_to_phase(
    a: FockState,
    b: FockState,
    interior: Optional[int] = None,
    exact_phase: bool = False,
) -> float:
    """Relative vector distance, optionally restricted to an interior photon-number block."""
    if a.mode_dims != b.mode_dims:
        raise DimensionMismatchError(a.mode_dims, b.mode_dims)
    if interior is None:
        return _phase_distance(a.amplitudes, b.amplitudes, exact_phase)
    mask = interior_mask(a.mode_dims, interior)
    return _phase_distance(a.amplitudes[mask], b.amplitudes[mask], exact_phase)


def reduced_purity(state: FockState, mode: int) -> float:
    """Tr(rho_mode^2) of a normalized two-mode pure state."""
    if state.num_modes != 2:
        raise DimensionMismatchError(2, state.num_modes)
    psi = state.tensor() / np.sqrt(state.norm_sq)
    if mode == 1:
        psi = psi.T
    rho = psi @ psi.conj().T
    return float(np.real(np.trace(rho @ rho)))


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------


def _change(previous: Any, current: Any) -> float:
    prev = np.asarray(previous)
    cur = np.asarray(current)
    if prev.shape != cur.shape:
        # Compare growing vectors on their common leading block
        common = tuple(slice(0, min(a, b)) for a, b in zip(prev.shape, cur.shape))
        prev, cur = prev[common], cur[common]
    return float(np.max(np.abs(cur - prev))) if cur.size else 0.0


def converge_in_cutoff(
    builder: Callable[[int], T],
    schedule: Sequence[int],
    tol: float,
    quantity: str = "quantity",
) -> tuple[T, int]:
    """
    Evaluate `builder` along an increasing cutoff schedule until it settles.

    Args:
        builder: Maps a cutoff to a scalar or array
        schedule: Strictly increasing cutoffs
        tol: Largest accepted change between consecutive entries
        quantity: Name used in logs and errors

    Returns:
        (value, cutoff) of the first entry whose change from its predecessor is below tol

    Raises:
        CutoffConvergenceError: If no consecutive pair agrees within tol
    """
    cutoffs = [int(c) for c in schedule]
    if len(cutoffs) < 2 or any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("schedule must hold at least two strictly increasing cutoffs")
    previous = builder(cutoffs[0])
    change = float("inf")
    for cutoff in cutoffs[1:]:
        current = builder(cutoff)
        change = _change(previous, current)
        logger.debug("%s: cutoff %d change %.3e", quantity, cutoff, change)
        if change < tol:
            return current, cutoff
        previous = current
    raise CutoffConvergenceError(quantity, cutoffs[-1], change, cutoffs)
