"""
K-theoretic constructions on families: stabilization, star products,
suspension, clutching extraction, Bott unitaries, loop extension and the
similarity homotopy between conjugate projectors.
"""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.base import (Family, HamiltonianFamily, ParameterGrid, ProjectorFamily,
                      UnitaryFamily, dagger)
from src.config import FLAT_TOL, HERMITIAN_TOL, UNITARY_TOL
from src.core import (direct_sum, loop, negate, negative_count, product,
                      suspension, tensor, trivial_hamiltonian)
from src.errors import (ChiralityError, GridMismatchError, InvalidGridError,
                        NotFlatError, ParameterError, ShapeMismatchError,
                        SingularMatrixError)
from src.utils import block_diag, kron, sin_cos_pi

logger = logging.getLogger(__name__)


# ------------------------------------------------------------- #
# Stable classes
# ------------------------------------------------------------- #

@dataclass(frozen=True)
class StableClassWitness:
    """A family together with the trivial blocks appended to it."""
    family: Family
    padding: int = 0

    def __post_init__(self):
        if self.padding < 0:
            raise ParameterError(f"padding must be nonnegative, got {self.padding}")

    @property
    def original_dim(self) -> int:
        if isinstance(self.family, HamiltonianFamily):
            return self.family.dim - 2 * self.padding
        return self.family.dim - self.padding


def stabilize(family, n: int) -> StableClassWitness:
    """
    Append trivial blocks at the end.

    Hamiltonians get I_n ⊕ (−I_n), projectors get 0_n. Passing a witness
    pads it further and accumulates the count.
    """
    padding = 0
    if isinstance(family, StableClassWitness):
        family, padding = family.family, family.padding
    if n < 0:
        raise ParameterError(f"padding must be nonnegative, got {n}")
    if n == 0:
        return StableClassWitness(family, padding)
    if isinstance(family, HamiltonianFamily):
        padded = direct_sum(dataclasses.replace(family, chiral=None), trivial_hamiltonian(n, family.grid))
    elif isinstance(family, ProjectorFamily):
        zero = ProjectorFamily(family.grid, np.zeros(family.grid.shape + (n, n)), rank=0)
        padded = direct_sum(family, zero)
    else:
        raise ShapeMismatchError(f"cannot stabilize a {type(family).__name__}")
    return StableClassWitness(padded, padding + n)


# ------------------------------------------------------------- #
# Pullbacks and products
# ------------------------------------------------------------- #

def pullback_projection(family: Family, grid: ParameterGrid, factor: int) -> Family:
    """
    Pull a family over one factor back to X × Y along the canonical projection.

    Args:
        family: Family over X (factor 0) or Y (factor 1).
        grid: The product grid X × Y.
        factor: Which factor the family lives on.
    Returns:
        Same-type family over grid, constant along the other factor.
    """
    if family.grid.kind == "point" or family.grid == grid:
        values = np.broadcast_to(family.values, grid.shape + family.values.shape[-2:])
        return dataclasses.replace(family, grid=grid, values=values)
    if grid.kind != "product" or factor not in (0, 1):
        raise InvalidGridError(f"cannot pull back along factor {factor} of {grid.describe()}")
    if grid.children[factor] != family.grid:
        raise GridMismatchError(
            f"factor {factor} of the product is {grid.children[factor].describe()}, "
            f"family lives on {family.grid.describe()}")
    other = grid.children[1 - factor].ndim
    values = family.values
    if factor == 0:
        values = values[(slice(None),) * family.grid.ndim + (None,) * other]
    else:
        values = values[(None,) * other]
    values = np.broadcast_to(values, grid.shape + family.values.shape[-2:])
    return dataclasses.replace(family, grid=grid, values=values)


def _require_hamiltonian(family, label: str) -> None:
    if not isinstance(family, HamiltonianFamily):
        raise ShapeMismatchError(f"{label} must be a Hamiltonian family, got {type(family).__name__}")


def _require_flat(H: HamiltonianFamily, label: str) -> None:
    _require_hamiltonian(H, label)
    deviation = H.flatness()
    if deviation > FLAT_TOL:
        raise NotFlatError(f"{label} is not flat (|H² − I| = {deviation:.3e})")


def _star_blocks(a: HamiltonianFamily, b: HamiltonianFamily, n_a: int, n_b: int) -> HamiltonianFamily:
    grid = a.grid
    first = tensor(dataclasses.replace(a, chiral=None), b)
    second = tensor(negate(dataclasses.replace(a, chiral=None)), trivial_hamiltonian(n_b, grid))
    third = tensor(trivial_hamiltonian(n_a, grid), negate(b))
    return direct_sum(direct_sum(first, second), third)


def star_product(h1: HamiltonianFamily, h2: HamiltonianFamily) -> HamiltonianFamily:
    """
    Product of stable classes over X × Y.

    Blocks H₁⊗H₂ ⊕ (−H₁)⊗(I_{n₂}⊕−I_{n₂}) ⊕ (I_{n₁}⊕−I_{n₁})⊗(−H₂), with n_i the
    (constant) number of negative eigenvalues of H_i. Output dim is
    N₁N₂ + 2n₂N₁ + 2n₁N₂.
    """
    _require_flat(h1, "first factor")
    _require_flat(h2, "second factor")
    n1, n2 = negative_count(h1), negative_count(h2)
    grid = product(h1.grid, h2.grid)
    a = pullback_projection(h1, grid, 0)
    b = pullback_projection(h2, grid, 1)
    logger.debug("star product: dims %d, %d occupied %d, %d over %s", h1.dim, h2.dim, n1, n2, grid.shape)
    return _star_blocks(a, b, n1, n2)


def internal_star_product(h1: HamiltonianFamily, h2: HamiltonianFamily) -> HamiltonianFamily:
    """Same-point star product H₁(x)⊗H₂(x) ⊕ ... over a shared grid."""
    if h1.grid != h2.grid:
        raise GridMismatchError("internal star product needs families over the same grid")
    _require_flat(h1, "first factor")
    _require_flat(h2, "second factor")
    return _star_blocks(h1, h2, negative_count(h1), negative_count(h2))


def star_product_projectors(p1: ProjectorFamily, p2: ProjectorFamily) -> ProjectorFamily:
    """
    P₁⊗P₂ ⊕ (I_{N₁}−P₁)⊗I_{r₂} ⊕ I_{r₁}⊗(I_{N₂}−P₂) over X × Y.

    Rank is r₁r₂ + (N₁−r₁)r₂ + r₁(N₂−r₂).
    """
    if not (isinstance(p1, ProjectorFamily) and isinstance(p2, ProjectorFamily)):
        raise ShapeMismatchError("projector star product needs two projector families")
    grid = product(p1.grid, p2.grid)
    a = pullback_projection(p1, grid, 0).values
    b = pullback_projection(p2, grid, 1).values
    r1, r2 = p1.rank, p2.rank
    blocks = [kron(a, b)]
    # complements of full-rank factors are empty
    if r2 and p1.dim > r1:
        blocks.append(kron(np.eye(p1.dim) - a, np.broadcast_to(np.eye(r2), grid.shape + (r2, r2))))
    if r1 and p2.dim > r2:
        blocks.append(kron(np.broadcast_to(np.eye(r1), grid.shape + (r1, r1)), np.eye(p2.dim) - b))
    rank = r1 * r2 + (p1.dim - r1) * r2 + r1 * (p2.dim - r2)
    return ProjectorFamily(grid, block_diag(*blocks), rank=rank)


# ------------------------------------------------------------- #
# Suspension and clutching
# ------------------------------------------------------------- #

def _require_chiral(H: HamiltonianFamily) -> np.ndarray:
    _require_hamiltonian(H, "chiral operation input")
    if H.chiral is None:
        raise ChiralityError("operation needs a chiral family (declare Γ)")
    return H.chiral


def suspend(H: HamiltonianFamily, n_t: int) -> HamiltonianFamily:
    """
    H(t, x) = cos(πt)Γ + sin(πt)H(x) over SX.

    The t=0 slice is Γ, the t=1 slice is −Γ and t=1/2 reproduces H.
    """
    gamma = _require_chiral(H)
    _require_flat(H, "suspended family")
    grid = suspension(H.grid, n_t)
    s, c = sin_cos_pi(grid.axes[-1].coordinates())
    values = c[:, None, None] * gamma + s[:, None, None] * H.values[..., None, :, :]
    return HamiltonianFamily(grid, values)


def _pole_gamma(F: HamiltonianFamily) -> np.ndarray:
    _require_hamiltonian(F, "suspension family")
    if F.grid.kind != "suspension":
        raise InvalidGridError(f"expected a suspension grid, got {F.grid.describe()}")
    pole = np.take(F.values, 0, axis=F.grid.ndim - 1)
    return pole.reshape(-1, F.dim, F.dim)[0]


def _half_index(grid: ParameterGrid) -> int:
    n_t = grid.axes[-1].size
    if n_t % 2 == 0:
        raise InvalidGridError(f"t = 1/2 is not sampled with n_t = {n_t}; use an odd n_t")
    return (n_t - 1) // 2


def _lower_left(values: np.ndarray, grid: ParameterGrid, gamma: np.ndarray, label: str) -> UnitaryFamily:
    dim = values.shape[-1]
    m = dim // 2
    standard = np.diag(np.concatenate([np.ones(m), -np.ones(m)]))
    if dim % 2 or np.max(np.abs(gamma - standard)) > HERMITIAN_TOL:
        raise ChiralityError(f"{label}: Γ is not diag(I, −I)")
    diagonal = max(np.max(np.abs(values[..., :m, :m])), np.max(np.abs(values[..., m:, m:])))
    if diagonal > UNITARY_TOL:
        raise ChiralityError(f"{label}: not off-diagonal in the Γ basis ({diagonal:.3e})")
    return UnitaryFamily(grid, values[..., m:, :m])


def chiral_block(H: HamiltonianFamily) -> UnitaryFamily:
    """Lower-left block U of a flat chiral family [[0, U†], [U, 0]]."""
    _require_flat(H, "chiral family")
    return _lower_left(H.values, H.grid, _require_chiral(H), "chiral family")


def extract_clutching(F: HamiltonianFamily) -> UnitaryFamily:
    """
    Transition function U(x): the lower-left block of the t=1/2 slice.

    The t=0 slice must be Γ = diag(I_m, −I_m) and the t=1/2 slice must be
    block off-diagonal in that basis.
    """
    gamma = _pole_gamma(F)
    equator = np.take(F.values, _half_index(F.grid), axis=F.grid.ndim - 1)
    return _lower_left(equator, F.grid.children[0], gamma, "t = 1/2 slice")


def chiral_hamiltonian(U: UnitaryFamily) -> HamiltonianFamily:
    """[[0, U†], [U, 0]] with Γ = diag(I, −I)."""
    m = U.dim
    values = np.zeros(U.values.shape[:-2] + (2 * m, 2 * m), dtype=complex)
    values[..., m:, :m] = U.values
    values[..., :m, m:] = dagger(U.values)
    gamma = np.diag(np.concatenate([np.ones(m), -np.ones(m)]))
    return HamiltonianFamily(U.grid, values, chiral=gamma)


def loop_extend(F: HamiltonianFamily) -> HamiltonianFamily:
    """
    Close the suspension into a loop: for 1 ≤ t ≤ 2, H(t) = cos(πt)Γ + sin(πt)H₀.

    H₀ is the off-diagonal identity in the Γ eigenbasis. The loop axis is
    periodic with θ = πt, sampled at the original t_j on [0, 1) and
    continued on [1, 2), so H(0) = H(2) = Γ.
    """
    gamma = _pole_gamma(F)
    if np.max(np.abs(gamma @ gamma - np.eye(F.dim))) > HERMITIAN_TOL:
        raise ChiralityError("t = 0 slice is not an involution")
    eigenvalues, vectors = np.linalg.eigh(gamma)
    if np.sum(eigenvalues > 0) * 2 != F.dim:
        raise ChiralityError("Γ must have equal numbers of ±1 eigenvalues")
    vectors = vectors[:, ::-1]
    # fix each column phase: largest component real positive
    lead = vectors[np.argmax(np.abs(vectors), axis=0), np.arange(F.dim)]
    vectors = vectors * (lead.conj() / np.abs(lead))[None, :]
    m = F.dim // 2
    swap = np.block([[np.zeros((m, m)), np.eye(m)], [np.eye(m), np.zeros((m, m))]])
    h0 = vectors @ swap @ vectors.conj().T

    n_t = F.grid.axes[-1].size
    inner = F.grid.children[0]
    grid = loop(inner, 2 * (n_t - 1))
    t = np.arange(n_t - 1, 2 * (n_t - 1)) / (n_t - 1)
    s, c = sin_cos_pi(t)
    tail = c[:, None, None] * gamma + s[:, None, None] * h0
    head = np.take(F.values, np.arange(n_t - 1), axis=F.grid.ndim - 1)
    tail = np.broadcast_to(tail, inner.shape + tail.shape)
    return HamiltonianFamily(grid, np.concatenate([head, tail], axis=inner.ndim))


def bott_unitary(h: HamiltonianFamily, n_t: int, loop_closed: bool = False) -> UnitaryFamily:
    """
    U(t, x) = i cos(πt) I + sin(πt) h(x) over SX.

    With loop_closed the t axis continues on [1, 2) with h replaced by
    −I_n ⊕ I_{N−n} (n = occupied count), giving a periodic loop.
    """
    _require_flat(h, "h")
    eye = np.eye(h.dim)
    if not loop_closed:
        grid = suspension(h.grid, n_t)
        s, c = sin_cos_pi(grid.axes[-1].coordinates())
        values = 1j * c[:, None, None] * eye + s[:, None, None] * h.values[..., None, :, :]
        return UnitaryFamily(grid, values)

    n = negative_count(h)
    reference = np.diag(np.concatenate([-np.ones(n), np.ones(h.dim - n)]))
    grid = loop(h.grid, 2 * (n_t - 1))
    t = np.arange(2 * (n_t - 1)) / (n_t - 1)
    s, c = sin_cos_pi(t)
    first = t < 1
    head = 1j * c[first, None, None] * eye + s[first, None, None] * h.values[..., None, :, :]
    tail = 1j * c[~first, None, None] * eye + s[~first, None, None] * reference
    tail = np.broadcast_to(tail, h.grid.shape + tail.shape)
    return UnitaryFamily(grid, np.concatenate([head, tail], axis=h.grid.ndim))


# ------------------------------------------------------------- #
# Similarity homotopy
# ------------------------------------------------------------- #

def _rotation(n: int, t: float) -> np.ndarray:
    s, c = sin_cos_pi(t / 2)
    eye = np.eye(n)
    return np.block([[c * eye, -s * eye], [s * eye, c * eye]])


def similarity_homotopy(S: np.ndarray, t: float) -> np.ndarray:
    """
    T_t = (S⊕I) R_t (S⁻¹⊕I) R_t⁻¹, a path of invertibles from I to S⊕S⁻¹.

    R_t rotates the two blocks by πt/2.
    """
    S = np.asarray(S, dtype=complex)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeMismatchError(f"S must be square, got shape {S.shape}")
    if np.linalg.cond(S) > 1e12:
        raise SingularMatrixError("S is singular or numerically close to singular")
    n = S.shape[0]
    eye = np.eye(n)
    rotation = _rotation(n, t)
    return block_diag(S, eye) @ rotation @ block_diag(np.linalg.inv(S), eye) @ rotation.T


def endpoints_check(p_e: np.ndarray, S: np.ndarray,
                    p_f: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """
    Residuals of conjugating P_E ⊕ 0 by T₀ and T₁.

    Returns:
        (‖T₀(P_E⊕0)T₀⁻¹ − P_E⊕0‖, ‖T₁(P_E⊕0)T₁⁻¹ − P_F⊕0‖), max-entry norms;
        P_F defaults to S P_E S⁻¹.
    """
    p_e = np.asarray(p_e, dtype=complex)
    S = np.asarray(S, dtype=complex)
    if p_f is None:
        p_f = S @ p_e @ np.linalg.inv(S)
    zero = np.zeros_like(p_e)
    start = block_diag(p_e, zero)
    residuals = []
    for t, target in ((0.0, start), (1.0, block_diag(p_f, zero))):
        T = similarity_homotopy(S, t)
        residuals.append(float(np.max(np.abs(T @ start @ np.linalg.inv(T) - target))))
    return residuals[0], residuals[1]


# ------------------------------------------------------------- #
# Coordinate reflection
# ------------------------------------------------------------- #

def reflect_coordinate(family: Family, axis: int) -> Family:
    """Reverse one axis: j ↦ −j mod n on periodic axes, j ↦ n−1−j on suspension axes."""
    grid = family.grid
    if not 0 <= axis < grid.ndim:
        raise InvalidGridError(f"axis {axis} out of range for a {grid.ndim}-axis grid")
    n = grid.axes[axis].size
    if grid.axes[axis].periodic:
        order = np.mod(-np.arange(n), n)
    else:
        order = np.arange(n)[::-1]
    return dataclasses.replace(family, values=np.take(family.values, order, axis=axis))
