# Base classes and interfaces
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from src.config import (HERMITIAN_TOL, PROJECTOR_TOL, TRACE_TOL, UNITARY_TOL,
                        VALIDATION_BLOCK)
from src.errors import (ChiralityError, FamilyInvariantError, InvalidGridError,
                        RankJumpError, ShapeMismatchError)

PERIODIC = "periodic"
SUSPENSION = "suspension"
MIN_AXIS_POINTS = 3


# ------------------------------------------------------------- #
# Grids
# ------------------------------------------------------------- #

@dataclass(frozen=True)
class Axis:
    """One sampled coordinate: a periodic angle or a suspension parameter."""
    size: int
    semantics: str
    name: str = ""

    def __post_init__(self):
        if self.semantics not in (PERIODIC, SUSPENSION):
            raise InvalidGridError(f"unknown axis semantics {self.semantics!r}")
        if int(self.size) != self.size or self.size < MIN_AXIS_POINTS:
            raise InvalidGridError(
                f"axis '{self.name}' needs at least {MIN_AXIS_POINTS} points, got {self.size}")

    @property
    def periodic(self) -> bool:
        return self.semantics == PERIODIC

    @property
    def step(self) -> float:
        if self.periodic:
            return 2 * math.pi / self.size
        return 1.0 / (self.size - 1)

    def coordinates(self) -> np.ndarray:
        """k_j = 2πj/n on periodic axes (endpoint excluded), t_j = j/(n-1) otherwise."""
        return np.arange(self.size) * self.step


@dataclass(frozen=True)
class ParameterGrid:
    """
    A discretized parameter space.

    kind is one of point, circle, torus, suspension, loop, product. Axes are
    stored base-first: a suspension appends its t axis after the axes of its
    inner grid, a product concatenates the axes of its two factors.
    """
    kind: str
    axes: Tuple[Axis, ...] = ()
    children: Tuple["ParameterGrid", ...] = ()

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(axis.size for axis in self.axes)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def coordinates(self, axis: int) -> np.ndarray:
        return self.axes[axis].coordinates()

    def mesh(self) -> List[np.ndarray]:
        """Coordinate arrays broadcast to the full grid shape."""
        if not self.axes:
            return []
        return np.meshgrid(*[a.coordinates() for a in self.axes], indexing="ij")

    def point_coordinates(self, index) -> Tuple[float, ...]:
        return tuple(float(a.coordinates()[i]) for a, i in zip(self.axes, index))

    def suspension_poles(self, offset: int = 0) -> List[Tuple[int, Tuple[int, ...]]]:
        """(t axis, axes of the collapsed inner grid) for every suspension inside the grid."""
        poles = []
        if self.kind == "suspension":
            inner = self.children[0]
            poles.extend(inner.suspension_poles(offset))
            poles.append((offset + inner.ndim, tuple(range(offset, offset + inner.ndim))))
        elif self.kind == "loop":
            poles.extend(self.children[0].suspension_poles(offset))
        elif self.kind == "product":
            first, second = self.children
            poles.extend(first.suspension_poles(offset))
            poles.extend(second.suspension_poles(offset + first.ndim))
        return poles

    def factor_axes(self, factor: int) -> Tuple[int, ...]:
        if self.kind != "product":
            raise InvalidGridError(f"grid of kind '{self.kind}' has no factors")
        first = self.children[0].ndim
        if factor == 0:
            return tuple(range(first))
        if factor == 1:
            return tuple(range(first, self.ndim))
        raise InvalidGridError(f"factor must be 0 or 1, got {factor}")

    def describe(self) -> dict:
        """Recursive space descriptor, accepted back by core.make_grid."""
        if self.kind == "point":
            return {"kind": "point"}
        if self.kind == "circle":
            return {"kind": "circle", "n": self.axes[0].size}
        if self.kind == "torus":
            return {"kind": "torus", "sizes": list(self.shape)}
        if self.kind == "suspension":
            return {"kind": "suspension", "inner": self.children[0].describe(),
                    "n_t": self.axes[-1].size}
        if self.kind == "loop":
            return {"kind": "loop", "inner": self.children[0].describe(),
                    "n": self.axes[-1].size}
        return {"kind": "product", "factors": [c.describe() for c in self.children]}


# ------------------------------------------------------------- #
# Validation helpers
# ------------------------------------------------------------- #

def _family_values(grid: ParameterGrid, values, label: str) -> np.ndarray:
    array = np.array(values, dtype=np.complex128)
    if array.ndim != grid.ndim + 2 or array.shape[:-2] != grid.shape \
            or array.shape[-1] != array.shape[-2]:
        raise ShapeMismatchError(
            f"{label} values of shape {array.shape} do not fit grid {grid.shape} "
            f"with square matrices")
    return array


def iter_blocks(values: np.ndarray) -> Iterator[np.ndarray]:
    """Yield (points, N, N) blocks of a family array."""
    n = values.shape[-1]
    flat = values.reshape(-1, n, n)
    for start in range(0, flat.shape[0], VALIDATION_BLOCK):
        yield flat[start:start + VALIDATION_BLOCK]


def max_deviation(values: np.ndarray, residual) -> float:
    """Max absolute entry of residual(block) over the whole family."""
    worst = 0.0
    for block in iter_blocks(values):
        worst = max(worst, float(np.max(np.abs(residual(block)), initial=0.0)))
    return worst


def dagger(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2).conj()


def _check_poles(grid: ParameterGrid, values: np.ndarray, label: str) -> None:
    for t_axis, inner in grid.suspension_poles():
        if not inner:
            continue
        for end in (0, grid.axes[t_axis].size - 1):
            pole = np.take(values, end, axis=t_axis)
            for axis in inner:
                spread = np.max(np.abs(pole - np.take(pole, [0], axis=axis)))
                if spread > HERMITIAN_TOL:
                    raise FamilyInvariantError(
                        f"{label} is not constant on the pole t={end * grid.axes[t_axis].step:g} "
                        f"of axis {t_axis} (spread {spread:.3e})")


def _freeze(family, values: np.ndarray) -> None:
    values.setflags(write=False)
    object.__setattr__(family, "values", values)


# ------------------------------------------------------------- #
# Families
# ------------------------------------------------------------- #

@dataclass(frozen=True, eq=False)
class HamiltonianFamily:
    """Hermitian N×N matrix per grid point, optionally with a chiral operator Γ."""
    grid: ParameterGrid
    values: np.ndarray
    chiral: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _family_values(self.grid, self.values, "Hamiltonian")
        deviation = max_deviation(values, lambda b: b - dagger(b))
        if deviation > HERMITIAN_TOL:
            raise FamilyInvariantError(f"Hamiltonian is not Hermitian (deviation {deviation:.3e})")
        if self.chiral is not None:
            gamma = np.array(self.chiral, dtype=np.complex128)
            if gamma.shape != values.shape[-2:]:
                raise ShapeMismatchError(
                    f"chiral operator of shape {gamma.shape} does not match dim {values.shape[-1]}")
            eye = np.eye(gamma.shape[0])
            if np.max(np.abs(gamma - gamma.conj().T)) > HERMITIAN_TOL \
                    or np.max(np.abs(gamma @ gamma - eye)) > HERMITIAN_TOL:
                raise ChiralityError("chiral operator must be Hermitian with Γ² = I")
            anti = max_deviation(values, lambda b: b @ gamma + gamma @ b)
            if anti > HERMITIAN_TOL:
                raise ChiralityError(f"Hamiltonian does not anticommute with Γ (deviation {anti:.3e})")
            gamma.setflags(write=False)
            object.__setattr__(self, "chiral", gamma)
        _check_poles(self.grid, values, "Hamiltonian")
        _freeze(self, values)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]

    def flatness(self) -> float:
        """max |H² − I| over the grid."""
        eye = np.eye(self.dim)
        return max_deviation(self.values, lambda b: b @ b - eye)


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    """Orthogonal projector of constant rank per grid point."""
    grid: ParameterGrid
    values: np.ndarray
    rank: Optional[int] = None

    def __post_init__(self):
        values = _family_values(self.grid, self.values, "projector")
        deviation = max(max_deviation(values, lambda b: b - dagger(b)),
                        max_deviation(values, lambda b: b @ b - b))
        if deviation > PROJECTOR_TOL:
            raise FamilyInvariantError(f"family is not an orthogonal projector (deviation {deviation:.3e})")
        traces = np.trace(values, axis1=-2, axis2=-1).real
        rank = self.rank
        if rank is None:
            rank = int(round(float(traces.flat[0])))
        jump = np.abs(traces - rank)
        if np.max(jump) > TRACE_TOL:
            worst = np.unravel_index(int(np.argmax(jump)), traces.shape)
            raise RankJumpError(
                f"projector trace leaves rank {rank} at grid index {tuple(int(i) for i in worst)}",
                index=tuple(int(i) for i in worst),
                coordinates=self.grid.point_coordinates(worst))
        object.__setattr__(self, "rank", int(rank))
        _check_poles(self.grid, values, "projector")
        _freeze(self, values)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]


@dataclass(frozen=True, eq=False)
class UnitaryFamily:
    """Unitary N×N matrix per grid point (clutching functions, chiral blocks)."""
    grid: ParameterGrid
    values: np.ndarray

    def __post_init__(self):
        values = _family_values(self.grid, self.values, "unitary")
        eye = np.eye(values.shape[-1])
        deviation = max_deviation(values, lambda b: dagger(b) @ b - eye)
        if deviation > UNITARY_TOL:
            raise FamilyInvariantError(f"family is not unitary (deviation {deviation:.3e})")
        _check_poles(self.grid, values, "unitary")
        _freeze(self, values)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]


Family = Union[HamiltonianFamily, ProjectorFamily, UnitaryFamily]
