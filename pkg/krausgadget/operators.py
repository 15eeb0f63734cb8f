"""
krausgadget - Gate Constructors

Displacement, phase delay, generalized squeezer, shears, balanced
beamsplitter, controlled-X and damping on the truncated Fock basis, their
symplectic (Heisenberg) representations, and the rotation/beamsplitter
decompositions used by the identity suite.

Gates generated by quadratic Hamiltonians are built by eigendecomposition of
the truncated Hermitian generator in a padded space and then cropped; the
beamsplitter conserves photon number and is built exactly sector by sector.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import eigh, eigh_tridiagonal

from .config import get_settings
from .exceptions import DegenerateAngleError, DimensionMismatchError
from .fock_core import (
    ComplexArray,
    CutoffLike,
    FockOperator,
    FockState,
    NormKind,
    RealArray,
    as_dim,
    identity,
    interior_mask,
    ladder,
    operator_distance_up_to_phase,
    quadratures,
)

logger = logging.getLogger(__name__)

Quadrature = Literal["q", "p"]


# ---------------------------------------------------------------------------
# symplectic representations
# ---------------------------------------------------------------------------


def symplectic_form(modes: int) -> RealArray:
    """Omega for the ordering (q_1..q_k, p_1..p_k)."""
    eye = np.eye(modes)
    zero = np.zeros((modes, modes))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class SymplecticMatrix:
    """
    Heisenberg action U^dag x U = S x on x = (q_1..q_k, p_1..p_k).

    Composition follows operator order: the matrix of U1 U2 is S1 @ S2.
    """

    entries: RealArray
    atol: float = 1e-10

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] % 2:
            raise DimensionMismatchError("2k x 2k", entries.shape)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if not is_symplectic(entries, self.atol):
            raise ValueError("matrix is not symplectic")

    @property
    def modes(self) -> int:
        return self.entries.shape[0] // 2

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.entries @ other.entries, max(self.atol, other.atol))


def is_symplectic(matrix: RealArray, atol: float = 1e-10) -> bool:
    omega = symplectic_form(matrix.shape[0] // 2)
    return bool(np.allclose(matrix.T @ omega @ matrix, omega, atol=atol))


def _rot(theta: float) -> RealArray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def symplectic_rotation(theta: float) -> SymplecticMatrix:
    """R(theta)^dag p R(theta) = q sin(theta) + p cos(theta)."""
    return SymplecticMatrix(_rot(theta))


def symplectic_squeeze(zeta: float) -> SymplecticMatrix:
    return SymplecticMatrix(np.diag([zeta, 1.0 / zeta]))


def symplectic_shear_q(sigma: float) -> SymplecticMatrix:
    return SymplecticMatrix(np.array([[1.0, 0.0], [sigma, 1.0]]))


def symplectic_shear_p(sigma: float) -> SymplecticMatrix:
    return SymplecticMatrix(np.array([[1.0, sigma], [0.0, 1.0]]))


def symplectic_displacement(alpha: complex) -> tuple[SymplecticMatrix, RealArray]:
    """Linear part and phase-space offset: D^dag (q, p) D = (q, p) + sqrt(2)(Re a, Im a)."""
    return SymplecticMatrix(np.eye(2)), np.sqrt(2.0) * np.array([alpha.real, alpha.imag])


def symplectic_beamsplitter() -> SymplecticMatrix:
    block = _rot(np.pi / 4)
    zero = np.zeros((2, 2))
    return SymplecticMatrix(np.block([[block, zero], [zero, block]]))


def symplectic_controlled_x(g: float) -> SymplecticMatrix:
    return SymplecticMatrix(
        np.array(
            [
                [1.0, 0.0, 0.0, 0.0],
                [g, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, -g],
                [0.0, 0.0, 0.0, 1.0],
            ]
        )
    )


def symplectic_v_gate(theta_a: float, theta_b: float) -> SymplecticMatrix:
    theta_plus, theta_minus = _measurement_angles(theta_a, theta_b)
    squeeze = np.diag([np.tan(theta_minus), 1.0 / np.tan(theta_minus)])
    return SymplecticMatrix(_rot(theta_plus - np.pi / 2) @ squeeze @ _rot(theta_plus))


def rotation_ldu(theta: float) -> tuple[SymplecticMatrix, SymplecticMatrix, SymplecticMatrix]:
    """Rot(theta) = L(tan) diag(cos, sec) U(-tan): q-shear, squeeze, p-shear."""
    t = np.tan(theta)
    return symplectic_shear_q(t), symplectic_squeeze(np.cos(theta)), symplectic_shear_p(-t)


def rotation_udl(theta: float) -> tuple[SymplecticMatrix, SymplecticMatrix, SymplecticMatrix]:
    """Rot(theta) = U(-tan) diag(sec, cos) L(tan)."""
    t = np.tan(theta)
    return symplectic_shear_p(-t), symplectic_squeeze(1.0 / np.cos(theta)), symplectic_shear_q(t)


def bs_symplectic_factors() -> tuple[SymplecticMatrix, SymplecticMatrix, SymplecticMatrix]:
    """
    Factors of the beamsplitter's symplectic matrix in operator order:
    exp(-i q1 p2), S1^dag(sqrt 2) (x) S2(sqrt 2), exp(i p1 q2).
    """
    root = np.sqrt(2.0)
    squeeze = SymplecticMatrix(np.diag([1.0 / root, root, root, 1.0 / root]))
    shear_back = SymplecticMatrix(
        np.array(
            [
                [1.0, -1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0, 1.0],
            ]
        )
    )
    return symplectic_controlled_x(1.0), squeeze, shear_back


# ---------------------------------------------------------------------------
# generator machinery
# ---------------------------------------------------------------------------


def padded_dim(cutoff: int, oversampling: Optional[float] = None) -> int:
    factor = get_settings().oversampling if oversampling is None else oversampling
    return max(cutoff + 2, int(np.ceil(factor * cutoff)))


@lru_cache(maxsize=64)
def _quadrature_eigh(kind: Quadrature, dim: int) -> tuple[RealArray, ComplexArray]:
    q, p = quadratures(dim)
    w, v = eigh(q.matrix if kind == "q" else p.matrix)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def _exp_hermitian(h: ComplexArray, t: float) -> ComplexArray:
    """exp(-i t h) for Hermitian h."""
    w, v = eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def _single_mode_gate(h: ComplexArray, t: float, cutoff: int) -> FockOperator:
    u = _exp_hermitian(h, t)
    return FockOperator(u[:cutoff, :cutoff], (cutoff,))


def _measurement_angles(theta_a: float, theta_b: float) -> tuple[float, float]:
    if abs(np.sin(theta_a - theta_b)) < 1e-12:
        raise DegenerateAngleError(theta_a, theta_b)
    return 0.5 * (theta_a + theta_b), 0.5 * (theta_a - theta_b)


# ---------------------------------------------------------------------------
# single-mode gates
# ---------------------------------------------------------------------------


def displacement(alpha: complex, cutoff: CutoffLike) -> FockOperator:
    """
    Displacement D(alpha) = exp(alpha a^dag - alpha* a).

    Built column by column from D|n> = (a^dag - alpha*) D|n-1> / sqrt(n), which is
    exact on every truncated entry.

    Args:
        alpha: Complex amplitude; shifts q by sqrt(2) Re(alpha) and p by sqrt(2) Im(alpha)
        cutoff: Fock dimension

    Returns:
        Single-mode operator

    Example:
        ```python
        d = displacement(0.3 + 0.2j, 40)
        vac = d.matrix[0, 0]  # exp(-|alpha|^2 / 2)
        ```
    """
    dim = as_dim(cutoff)
    alpha = complex(alpha)
    if abs(alpha) ** 2 > dim / 4:
        logger.warning("displacement |alpha|^2=%.2f is large for cutoff %d", abs(alpha) ** 2, dim)
    m = np.arange(dim)
    out = np.zeros((dim, dim), dtype=np.complex128)
    # column 0: coherent state
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, dim)))))
    if alpha == 0:
        return identity(dim)
    out[:, 0] = np.exp(-0.5 * abs(alpha) ** 2 + m * np.log(alpha) - 0.5 * log_fact)
    sqrt_m = np.sqrt(m[1:])
    for n in range(1, dim):
        prev = out[:, n - 1]
        col = -np.conj(alpha) * prev
        col[1:] += sqrt_m * prev[:-1]
        out[:, n] = col / np.sqrt(n)
    return FockOperator(out, (dim,))


def shift_x(s: float, cutoff: CutoffLike) -> FockOperator:
    """X(s) = exp(-i s p): moves q by s."""
    return displacement(complex(s / np.sqrt(2.0), 0.0), cutoff)


def shift_z(t: float, cutoff: CutoffLike) -> FockOperator:
    """Z(t) = exp(i t q): moves p by t."""
    return displacement(complex(0.0, t / np.sqrt(2.0)), cutoff)


def phase_delay(theta: float, cutoff: CutoffLike) -> FockOperator:
    """R(theta) = exp(i theta n); R(pi/2) is the Fourier transform."""
    dim = as_dim(cutoff)
    return FockOperator(np.diag(np.exp(1j * theta * np.arange(dim))), (dim,))


def fourier(cutoff: CutoffLike) -> FockOperator:
    return phase_delay(np.pi / 2, cutoff)


def damping(beta: float, cutoff: CutoffLike) -> FockOperator:
    """N(beta) = exp(-beta n)."""
    if beta < 0:
        raise ValueError(f"damping must be non-negative, got {beta}")
    dim = as_dim(cutoff)
    return FockOperator(np.diag(np.exp(-beta * np.arange(dim))).astype(np.complex128), (dim,))


def squeeze(zeta: float, cutoff: CutoffLike, padding: Optional[int] = None) -> FockOperator:
    """
    Generalized squeezer with S^dag q S = zeta q and S^dag p S = p / zeta.

    Negative zeta adds a parity: S(zeta) = R(pi) S(|zeta|).

    Args:
        zeta: Nonzero real squeezing factor
        cutoff: Fock dimension
        padding: Working dimension for the generator (default: oversampled cutoff)

    Raises:
        ValueError: If zeta is zero
    """
    if zeta == 0:
        raise ValueError("squeezing factor must be nonzero")
    dim = as_dim(cutoff)
    work = padding or padded_dim(dim)
    r = float(np.log(abs(zeta)))
    a, ad = ladder(work)
    # exp((r/2)(a^dag^2 - a^2)) = exp(-i r h), h = (i/2)(a^dag^2 - a^2)
    h = 0.5j * (ad.matrix @ ad.matrix - a.matrix @ a.matrix)
    gate = _single_mode_gate(h, r, dim)
    if zeta < 0:
        return phase_delay(np.pi, dim) @ gate
    return gate


def shear_q(sigma: float, cutoff: CutoffLike, padding: Optional[int] = None) -> FockOperator:
    """P(sigma) = exp(i sigma q^2 / 2), diagonal in position."""
    dim = as_dim(cutoff)
    w, v = _quadrature_eigh("q", padding or padded_dim(dim))
    u = (v * np.exp(0.5j * sigma * w**2)) @ v.conj().T
    return FockOperator(u[:dim, :dim], (dim,))


def shear_p(sigma: float, cutoff: CutoffLike, padding: Optional[int] = None) -> FockOperator:
    """P_p(sigma) = exp(-i sigma p^2 / 2), diagonal in momentum."""
    dim = as_dim(cutoff)
    w, v = _quadrature_eigh("p", padding or padded_dim(dim))
    u = (v * np.exp(-0.5j * sigma * w**2)) @ v.conj().T
    return FockOperator(u[:dim, :dim], (dim,))


def v_gate(theta_a: float, theta_b: float, cutoff: CutoffLike, padding: Optional[int] = None) -> FockOperator:
    """
    Measurement-basis gate V = R(theta_+ - pi/2) S(tan theta_-) R(theta_+).

    Raises:
        DegenerateAngleError: If sin(theta_a - theta_b) = 0
    """
    dim = as_dim(cutoff)
    theta_plus, theta_minus = _measurement_angles(theta_a, theta_b)
    s = squeeze(float(np.tan(theta_minus)), dim, padding)
    return phase_delay(theta_plus - np.pi / 2, dim) @ s @ phase_delay(theta_plus, dim)


# ---------------------------------------------------------------------------
# beamsplitter (exact, per photon-number sector)
# ---------------------------------------------------------------------------


# Sectors above this photon total are applied through their eigenvectors
# instead of being cached as dense blocks.
SECTOR_CACHE_LIMIT = 256


def _sector_eigensystem(total: int) -> tuple[RealArray, RealArray]:
    """
    Eigensystem of the real symmetric form of the sector generator.

    B_12 = exp(pi/4 (a_1 a_2^dag - a_1^dag a_2)) is tridiagonal in the sector
    n_1 + n_2 = total; the phase similarity diag(i^k) makes i*G real symmetric,
    so the block is diag(i^k) V e^{-i pi w/4} V^T diag(i^-k).
    """
    k = np.arange(1, total + 1)
    upper = np.sqrt(k * (total - k + 1.0))
    return eigh_tridiagonal(np.zeros(total + 1), -upper)


@lru_cache(maxsize=SECTOR_CACHE_LIMIT + 1)
def beamsplitter_sector(total: int) -> RealArray:
    """Block of B_12 on the sector n_1 + n_2 = total, indexed by n_1 (real)."""
    if total == 0:
        block = np.ones((1, 1))
    else:
        w, v = _sector_eigensystem(total)
        phases = 1j ** np.arange(total + 1)
        u = (v * np.exp(-0.25j * np.pi * w)) @ v.T
        block = np.real(phases[:, None] * u * phases.conj()[None, :])
    block.setflags(write=False)
    return block


def _apply_sector(total: int, ks: NDArray[np.int_], slab: ComplexArray, adjoint: bool) -> ComplexArray:
    if total <= SECTOR_CACHE_LIMIT:
        block = beamsplitter_sector(total)[np.ix_(ks, ks)]
        return (block.T if adjoint else block) @ slab
    w, v = _sector_eigensystem(total)
    rows = v[ks]
    phases = 1j ** (ks % 4)
    sign = 1.0 if adjoint else -1.0
    inner = rows.T @ (phases.conj()[:, None] * slab)
    return phases[:, None] * (rows @ (np.exp(sign * 0.25j * np.pi * w)[:, None] * inner))


def apply_beamsplitter(state: FockState, modes: tuple[int, int], adjoint: bool = False) -> FockState:
    """
    Apply B_ij (arrow from mode i to mode j) to a multi-mode state, sector by sector.

    Entries are exact wherever the full sector fits inside both truncations;
    supplying inputs up to twice the needed cutoff makes every output entry
    below that cutoff exact.

    Args:
        state: k-mode state
        modes: (i, j), 0-based
        adjoint: Apply B_ij^dag = B_ji instead
    """
    i, j = modes
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    psi = np.moveaxis(state.tensor(), (i, j), (0, 1))
    d_i, d_j = psi.shape[:2]
    rest = psi.shape[2:]
    out = np.zeros_like(psi)
    for total in range(d_i + d_j - 1):
        ks = np.arange(max(0, total - d_j + 1), min(total, d_i - 1) + 1)
        slab = psi[ks, total - ks].reshape(len(ks), -1)
        if not slab.any():
            continue
        out[ks, total - ks] = _apply_sector(total, ks, slab, adjoint).reshape((len(ks),) + rest)
    out = np.moveaxis(out, (0, 1), (i, j))
    return FockState(out, state.mode_dims, NormKind.DENSITY)


def beamsplitter(cutoff: CutoffLike) -> FockOperator:
    """
    Dense two-mode B_12 = exp(-i pi/4 (q (x) p - p (x) q)).

    B^dag (q (x) I) B = (q (x) I - I (x) q)/sqrt(2); B_12^dag = B_21.
    """
    dim = as_dim(cutoff)
    out = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for total in range(2 * dim - 1):
        ks = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
        flat = ks * dim + (total - ks)
        out[np.ix_(flat, flat)] = beamsplitter_sector(total)[np.ix_(ks, ks)]
    return FockOperator(out, (dim, dim))


# ---------------------------------------------------------------------------
# two-mode products of quadratures
# ---------------------------------------------------------------------------


def apply_quadrature_product(
    psi: ComplexArray,
    kinds: tuple[Quadrature, Quadrature],
    g: float,
) -> ComplexArray:
    """
    exp(-i g X_1 (x) Y_2) on a batch of two-mode amplitude arrays of shape (..., P, P).

    Both factors are diagonalized separately, so the two-mode exponential is a
    phase on the product eigenbasis.
    """
    dim = psi.shape[-1]
    wa, va = _quadrature_eigh(kinds[0], dim)
    wb, vb = _quadrature_eigh(kinds[1], dim)
    phase = np.exp(-1j * g * np.outer(wa, wb))
    coeffs = va.conj().T @ psi @ vb.conj()
    return va @ (phase * coeffs) @ vb.T


def _quadrature_product_gate(kinds: tuple[Quadrature, Quadrature], g: float, cutoff: int) -> FockOperator:
    work = padded_dim(cutoff)
    wa, va = _quadrature_eigh(kinds[0], work)
    wb, vb = _quadrature_eigh(kinds[1], work)
    phase = np.exp(-1j * g * np.outer(wa, wb))
    a = va[:cutoff]
    b = vb[:cutoff]
    # C[(m1,m2),(n1,n2)] = sum_kl a[m1,k] b[m2,l] phase[k,l] conj(a[n1,k]) conj(b[n2,l])
    left = np.einsum("mk,nk,kl->mnl", a, a.conj(), phase, optimize=True)
    full = np.einsum("mnl,rsl->mrns", left, b[:, None, :] * b.conj()[None, :, :], optimize=True)
    return FockOperator(full.reshape(cutoff * cutoff, cutoff * cutoff), (cutoff, cutoff))


def controlled_x(g: float, cutoff: CutoffLike) -> FockOperator:
    """C^X(g) = exp(-i g q (x) p): shifts the target position by g times the control position."""
    return _quadrature_product_gate(("q", "p"), g, as_dim(cutoff))


def controlled_z(g: float, cutoff: CutoffLike) -> FockOperator:
    """C^Z(g) = exp(i g q (x) q)."""
    return _quadrature_product_gate(("q", "q"), -g, as_dim(cutoff))


def apply_controlled(
    state: FockState,
    kind: Literal["x", "z"],
    g: float,
    modes: tuple[int, int] = (0, 1),
    padding: Optional[int] = None,
) -> FockState:
    """
    Apply C^X(g) or C^Z(g) (control first) to a multi-mode state without the dense gate.

    The two addressed modes are embedded in a padded square space, phased on the
    product quadrature eigenbasis and cropped back to their own dimensions.

    Args:
        state: k-mode state
        kind: "x" for exp(-i g q (x) p), "z" for exp(i g q (x) q)
        g: Coupling
        modes: (control, target), 0-based
        padding: Working dimension of each addressed mode
    """
    if kind == "x":
        kinds, coupling = ("q", "p"), g
    elif kind == "z":
        kinds, coupling = ("q", "q"), -g
    else:
        raise ValueError(f"unknown controlled gate {kind!r}")
    i, j = modes
    if i == j:
        raise ValueError("controlled gate needs two distinct modes")
    psi = np.moveaxis(state.tensor(), (i, j), (-2, -1))
    d_i, d_j = psi.shape[-2:]
    work = padding or padded_dim(max(d_i, d_j))
    if work < max(d_i, d_j):
        raise DimensionMismatchError(f"padding of at least {max(d_i, d_j)}", (work,))
    padded = np.zeros(psi.shape[:-2] + (work, work), dtype=np.complex128)
    padded[..., :d_i, :d_j] = psi
    out = apply_quadrature_product(padded, kinds, coupling)[..., :d_i, :d_j]
    out = np.moveaxis(out, (-2, -1), (i, j))
    return FockState(np.ascontiguousarray(out), state.mode_dims, NormKind.DENSITY)


# ---------------------------------------------------------------------------
# decompositions and numerical Heisenberg action
# ---------------------------------------------------------------------------


def bs_decomposition(
    cutoff: CutoffLike,
    interior: Optional[int] = None,
    padding: Optional[int] = None,
) -> tuple[FockOperator, float]:
    """
    Beamsplitter rebuilt as exp(-i q1 p2) [S1^dag(sqrt 2) (x) S2(sqrt 2)] exp(i p1 q2).

    Only interior input columns are propagated (in a padded two-mode space);
    the other columns of the returned operator are zero.

    Args:
        cutoff: Fock dimension per mode
        interior: Photon-number bound of the compared block (default from settings)
        padding: Working dimension per mode

    Returns:
        (decomposed operator, up-to-phase interior distance from beamsplitter(cutoff))
    """
    dim = as_dim(cutoff)
    inner = interior if interior is not None else get_settings().interior(dim)
    work = padding or max(padded_dim(dim), 4 * inner + 24)
    columns = np.flatnonzero(interior_mask((dim, dim), inner))
    psi = np.zeros((len(columns), work, work), dtype=np.complex128)
    psi[np.arange(len(columns)), columns // dim, columns % dim] = 1.0

    root = np.sqrt(2.0)
    s1 = squeeze(1.0 / root, work, padding=work).matrix
    s2 = squeeze(root, work, padding=work).matrix
    psi = apply_quadrature_product(psi, ("p", "q"), -1.0)
    psi = s1 @ psi @ s2.T
    psi = apply_quadrature_product(psi, ("q", "p"), 1.0)

    out = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    out[:, columns] = psi[:, :dim, :dim].reshape(len(columns), dim * dim).T
    decomposed = FockOperator(out, (dim, dim))
    residual = operator_distance_up_to_phase(decomposed, beamsplitter(dim), inner)
    return decomposed, residual


def heisenberg_action(op: FockOperator, interior: Optional[int] = None) -> tuple[RealArray, RealArray, float]:
    """
    Fit U^dag x U = S x + d on the interior block for a one- or two-mode operator.

    Args:
        op: Unitary (on the interior)
        interior: Photon-number bound of the fitted block

    Returns:
        (S, offset d, worst relative fit residual)
    """
    modes = len(op.mode_dims)
    if modes not in (1, 2) or len(set(op.mode_dims)) != 1:
        raise DimensionMismatchError("one or two equal modes", op.mode_dims)
    dim = op.mode_dims[0]
    inner = interior if interior is not None else get_settings().interior(dim)
    q, p = quadratures(dim)
    one = identity(dim)
    if modes == 1:
        basis = [q.matrix, p.matrix]
    else:
        basis = [
            np.kron(q.matrix, one.matrix),
            np.kron(one.matrix, q.matrix),
            np.kron(p.matrix, one.matrix),
            np.kron(one.matrix, p.matrix),
        ]
    # Quadratures couple n to n +/- 1, so the fit block stays one level inside
    fit = interior_mask(op.mode_dims, max(inner - 1, 1))
    sub = np.ix_(fit, fit)
    design = np.stack([b[sub].ravel() for b in basis] + [np.eye(len(op.matrix))[sub].ravel()], axis=1)
    u = op.matrix
    s = np.zeros((2 * modes, 2 * modes))
    offset = np.zeros(2 * modes)
    worst = 0.0
    for row, x in enumerate(basis):
        target = (u.conj().T @ x @ u)[sub].ravel()
        coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
        s[row] = coeffs[:-1].real
        offset[row] = coeffs[-1].real
        worst = max(worst, float(np.linalg.norm(design @ coeffs - target) / np.linalg.norm(target)))
    return s, offset, worst
