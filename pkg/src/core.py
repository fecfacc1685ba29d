"""
Grid constructors and the spectral / algebraic operations on families.

Every operation is a pure map over grid points: inputs are read-only
families, outputs are new families validated on construction.
"""
import dataclasses
import logging
from typing import Tuple

import numpy as np

from src.base import (PERIODIC, SUSPENSION, Axis, Family, HamiltonianFamily,
                      ParameterGrid, ProjectorFamily, UnitaryFamily, dagger)
from src.config import GAP_TOL
from src.errors import (GapViolationError, GridMismatchError, InvalidGridError,
                        ParameterError, RankJumpError, ShapeMismatchError)
from src.utils import block_diag, kron

logger = logging.getLogger(__name__)

OCCUPIED = "occupied"
EMPTY = "empty"


# ------------------------------------------------------------- #
# Grid constructors
# ------------------------------------------------------------- #

def point() -> ParameterGrid:
    return ParameterGrid("point")


def circle(n: int) -> ParameterGrid:
    return ParameterGrid("circle", (Axis(n, PERIODIC, "k"),))


def torus(*sizes: int) -> ParameterGrid:
    if not sizes:
        raise InvalidGridError("torus needs at least one axis")
    return ParameterGrid("torus", tuple(Axis(n, PERIODIC, f"k{i + 1}") for i, n in enumerate(sizes)))


def suspension(inner: ParameterGrid, n_t: int) -> ParameterGrid:
    """SX: inner axes first, then t_j = j/(n_t-1), poles at t = 0 and t = 1."""
    return ParameterGrid("suspension", inner.axes + (Axis(n_t, SUSPENSION, "t"),), (inner,))


def loop(inner: ParameterGrid, n: int) -> ParameterGrid:
    """X × S¹ with the loop parameter θ = πt periodic, t in [0, 2)."""
    return ParameterGrid("loop", inner.axes + (Axis(n, PERIODIC, "theta"),), (inner,))


def product(first: ParameterGrid, second: ParameterGrid) -> ParameterGrid:
    if first.kind == "point":
        return second
    if second.kind == "point":
        return first
    return ParameterGrid("product", first.axes + second.axes, (first, second))


def sphere(d: int, n: int, n_t: int) -> ParameterGrid:
    """Iterated suspension of a circle: a degree-one chart of S^d."""
    if d < 1:
        raise InvalidGridError(f"sphere dimension must be positive, got {d}")
    grid = circle(n)
    for _ in range(d - 1):
        grid = suspension(grid, n_t)
    return grid


def make_grid(spec: dict) -> ParameterGrid:
    """
    Build a grid from a recursive space descriptor.

    Args:
        spec: {"kind": "circle", "n": 16}, {"kind": "torus", "sizes": [48, 48]},
            {"kind": "suspension", "inner": {...}, "n_t": 17},
            {"kind": "loop", "inner": {...}, "n": 32},
            {"kind": "product", "factors": [{...}, {...}]},
            {"kind": "sphere", "d": 4, "n": 20, "n_t": 20} or {"kind": "point"}.
    Returns:
        ParameterGrid with the stated semantics.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidGridError(f"space descriptor must be an object with a kind, got {spec!r}")
    kind = spec["kind"]
    try:
        if kind == "point":
            return point()
        if kind == "circle":
            return circle(int(spec["n"]))
        if kind == "torus":
            return torus(*(int(n) for n in spec["sizes"]))
        if kind == "suspension":
            return suspension(make_grid(spec["inner"]), int(spec["n_t"]))
        if kind == "loop":
            return loop(make_grid(spec["inner"]), int(spec["n"]))
        if kind == "product":
            first, second = spec["factors"]
            return product(make_grid(first), make_grid(second))
        if kind == "sphere":
            return sphere(int(spec["d"]), int(spec["n"]), int(spec["n_t"]))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InvalidGridError):
            raise
        raise InvalidGridError(f"malformed {kind} descriptor {spec!r}: {e}") from None
    raise InvalidGridError(f"unknown space kind {kind!r}")


def require_same_grid(a: Family, b: Family) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid.describe()} vs {b.grid.describe()}")


# ------------------------------------------------------------- #
# Spectral operations
# ------------------------------------------------------------- #

def _spectrum(H: HamiltonianFamily, vectors: bool = True):
    if vectors:
        return np.linalg.eigh(H.values)
    return np.linalg.eigvalsh(H.values), None


def _gap_field(eigenvalues: np.ndarray) -> np.ndarray:
    return np.min(np.abs(eigenvalues), axis=-1)


def min_gap(H: HamiltonianFamily) -> float:
    """Smallest |eigenvalue| over the grid."""
    eigenvalues, _ = _spectrum(H, vectors=False)
    return float(np.min(_gap_field(eigenvalues)))


def _require_gap(H: HamiltonianFamily, eigenvalues: np.ndarray) -> None:
    gaps = _gap_field(eigenvalues)
    worst = np.unravel_index(int(np.argmin(gaps)), gaps.shape) if gaps.ndim else ()
    gap = float(gaps[worst]) if gaps.ndim else float(gaps)
    if gap <= GAP_TOL:
        index = tuple(int(i) for i in worst)
        coords = H.grid.point_coordinates(index)
        logger.debug("gap violation at %s (gap %.3e)", index, gap)
        raise GapViolationError(
            f"family is gapless: |λ| = {gap:.3e} at grid index {index}, coordinates {coords}",
            index=index, coordinates=coords, gap=gap)


def spectral_flatten(H: HamiltonianFamily) -> HamiltonianFamily:
    """Replace every eigenvalue by its sign; eigenvectors and Γ are kept."""
    eigenvalues, vectors = _spectrum(H)
    _require_gap(H, eigenvalues)
    signs = np.sign(eigenvalues)
    flat = (vectors * signs[..., None, :]) @ dagger(vectors)
    flat = 0.5 * (flat + dagger(flat))
    return dataclasses.replace(H, values=flat)


def band_frames(H: HamiltonianFamily, which: str) -> np.ndarray:
    """Orthonormal frames (..., N, r) of the occupied (λ < 0) or empty (λ > 0) band."""
    if which not in (OCCUPIED, EMPTY):
        raise ParameterError(f"band must be '{OCCUPIED}' or '{EMPTY}', got {which!r}")
    eigenvalues, vectors = _spectrum(H)
    _require_gap(H, eigenvalues)
    negative = np.sum(eigenvalues < 0, axis=-1)
    counts = np.unique(negative)
    if counts.size > 1:
        jump = np.argwhere(negative != negative.flat[0])[0]
        index = tuple(int(i) for i in jump)
        raise RankJumpError(
            f"occupied count changes from {int(negative.flat[0])} to {int(negative[index])} "
            f"at grid index {index}", index=index, coordinates=H.grid.point_coordinates(index))
    n_occ = int(counts[0])
    # eigh sorts ascending: negative eigenvalues come first
    if which == OCCUPIED:
        return vectors[..., :n_occ]
    return vectors[..., n_occ:]


def band_projector(H: HamiltonianFamily, which: str) -> ProjectorFamily:
    """Projector onto the occupied (λ < 0) or empty (λ > 0) eigenspace."""
    frames = band_frames(H, which)
    values = frames @ dagger(frames)
    return ProjectorFamily(H.grid, values, rank=frames.shape[-1])


def fermi_projector(H: HamiltonianFamily) -> ProjectorFamily:
    """P(x) = Θ(−H(x)) with the Fermi level at zero."""
    return band_projector(H, OCCUPIED)


def negative_count(H: HamiltonianFamily) -> int:
    return band_frames(H, OCCUPIED).shape[-1]


# ------------------------------------------------------------- #
# Algebraic operations
# ------------------------------------------------------------- #

def direct_sum(a: Family, b: Family) -> Family:
    """Block sum A ⊕ B on a shared grid; Γ_A ⊕ Γ_B when both are chiral."""
    if type(a) is not type(b):
        raise ShapeMismatchError(f"cannot sum {type(a).__name__} with {type(b).__name__}")
    require_same_grid(a, b)
    values = block_diag(a.values, b.values)
    if isinstance(a, HamiltonianFamily):
        chiral = None
        if a.chiral is not None and b.chiral is not None:
            chiral = block_diag(a.chiral, b.chiral)
        return HamiltonianFamily(a.grid, values, chiral)
    if isinstance(a, ProjectorFamily):
        return ProjectorFamily(a.grid, values, rank=a.rank + b.rank)
    return UnitaryFamily(a.grid, values)


def negate(H: HamiltonianFamily) -> HamiltonianFamily:
    return dataclasses.replace(H, values=-H.values)


def tensor(a: HamiltonianFamily, b: HamiltonianFamily) -> HamiltonianFamily:
    """Pointwise A ⊗ B on a shared grid; chiral as Γ_A ⊗ I when A is chiral."""
    require_same_grid(a, b)
    chiral = None
    if a.chiral is not None:
        chiral = np.kron(a.chiral, np.eye(b.dim))
    return HamiltonianFamily(a.grid, kron(a.values, b.values), chiral)


def trivial_hamiltonian(n: int, grid: ParameterGrid = None) -> HamiltonianFamily:
    """Constant I_n ⊕ (−I_n)."""
    grid = grid or point()
    diag = np.concatenate([np.ones(n), -np.ones(n)])
    values = np.broadcast_to(np.diag(diag).astype(complex), grid.shape + (2 * n, 2 * n))
    return HamiltonianFamily(grid, values)


def constant_family(matrix: np.ndarray, grid: ParameterGrid, chiral=None) -> HamiltonianFamily:
    matrix = np.asarray(matrix, dtype=complex)
    return HamiltonianFamily(grid, np.broadcast_to(matrix, grid.shape + matrix.shape), chiral)


def restrict_factor(family: Family, factor: int, index: Tuple[int, ...]) -> Family:
    """
    Slice a family over X × Y at one point of one factor.

    Args:
        family: Family over a product grid.
        factor: 0 to fix a point of X (result lives over Y), 1 to fix a point of Y.
        index: Grid index of the fixed point inside that factor.
    Returns:
        Family of the same type over the other factor.
    """
    grid = family.grid
    axes = grid.factor_axes(factor)
    index = tuple(int(i) for i in index)
    if len(index) != len(axes):
        raise InvalidGridError(f"factor {factor} has {len(axes)} axes, got index {index}")
    selector = [slice(None)] * grid.ndim
    for axis, i in zip(axes, index):
        if not 0 <= i < grid.axes[axis].size:
            raise InvalidGridError(f"index {i} out of range on axis {axis}")
        selector[axis] = i
    remaining = grid.children[1 - factor]
    return dataclasses.replace(family, grid=remaining, values=family.values[tuple(selector)])
