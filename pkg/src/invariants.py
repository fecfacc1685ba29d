"""
Topological invariants of families on closed grids.

- winding_number: principal-branch phase count of det U around a circle.
- chern1_link: plaquette products of normalized link determinants; an
  exact integer on any closed 2D grid.
- chern1_curvature: Riemann sum of the projector curvature, a cross-check.
- chern2: second Chern number from the projector curvature on a 4D grid.

Curvature convention: f_μν = −i·P[∂_μP, ∂_νP]P, so that
C₁ = (1/2π)∫tr f and C₂ = (1/8π²)∫(tr f∧f − tr f∧tr f), with the
orientation given by the stored axis order.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from src.base import ParameterGrid, ProjectorFamily, UnitaryFamily, dagger
from src.config import ACCEPT_RESIDUAL, COARSE_PHASE, LINK_TOL, RuntimeConfig
from src.errors import (GridTooCoarseError, InvalidGridError,
                        ParameterError, SingularLinkError)
from src.models import embed_s4_product, embed_sphere
from src.utils import (difference_stencil, parallel_map, quadrature_weights,
                       spectral_derivative, stencil_derivative)

logger = logging.getLogger(__name__)

MIN_WINDING_POINTS = 8


@dataclass
class InvariantReport:
    """Raw value, nearest integer and the residual gate."""
    kind: str
    raw: float
    value: int
    residual: float
    grid: dict
    converged: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _report(kind: str, raw: float, grid: ParameterGrid, **extra) -> InvariantReport:
    value = int(round(raw))
    residual = abs(raw - value)
    converged = residual < ACCEPT_RESIDUAL
    if not converged:
        logger.warning("%s did not converge: raw %.6f (residual %.3f)", kind, raw, residual)
    return InvariantReport(kind, float(raw), value, float(residual), grid.describe(), converged, extra)


# ------------------------------------------------------------- #
# Winding number
# ------------------------------------------------------------- #

def _require_circle(grid: ParameterGrid) -> int:
    if grid.ndim != 1 or not grid.axes[0].periodic:
        raise InvalidGridError(f"expected a single periodic axis, got {grid.describe()}")
    return grid.axes[0].size


def winding_number(U: UnitaryFamily) -> InvariantReport:
    """
    Winding of det U(k) around the circle; e^{ik} winds +1.

    The odd Chern integral (its negative) is reported under extra.
    """
    n = _require_circle(U.grid)
    if n < MIN_WINDING_POINTS:
        raise GridTooCoarseError(f"winding needs at least {MIN_WINDING_POINTS} points, got {n}")
    det = np.linalg.det(U.values)
    steps = np.angle(np.roll(det, -1) * det.conj())
    worst = int(np.argmax(np.abs(steps)))
    if abs(steps[worst]) >= COARSE_PHASE:
        raise GridTooCoarseError(
            f"phase of det U jumps by {steps[worst]:.3f} between points {worst} and {(worst + 1) % n}")
    raw = float(np.sum(steps)) / (2 * math.pi)
    return _report("winding", raw, U.grid, odd_chern=-raw)


def odd_chern_density(U: UnitaryFamily) -> np.ndarray:
    """(i/2π) tr(U⁻¹ ∂_k U) per point; its Riemann sum is minus the winding number."""
    _require_circle(U.grid)
    derivative = spectral_derivative(U.values, axis=0)
    return np.real(1j / (2 * math.pi) * np.trace(dagger(U.values) @ derivative, axis1=-2, axis2=-1))


# ------------------------------------------------------------- #
# First Chern number
# ------------------------------------------------------------- #

def _require_closed(grid: ParameterGrid, ndim: int) -> None:
    if grid.ndim != ndim:
        raise InvalidGridError(f"expected a {ndim}-axis grid, got {grid.describe()}")
    collapsed = {t for t, inner in grid.suspension_poles() if inner}
    for i, axis in enumerate(grid.axes):
        if not axis.periodic and i not in collapsed:
            raise InvalidGridError(f"axis {i} of {grid.describe()} is an open interval")


def projector_frames(P: ProjectorFamily) -> np.ndarray:
    """Orthonormal frames (..., N, r) spanning the image of P."""
    _, vectors = np.linalg.eigh(P.values)
    return vectors[..., P.dim - P.rank:]


def _links(frames: np.ndarray, grid: ParameterGrid, axis: int):
    n = grid.axes[axis].size
    current = np.arange(n if grid.axes[axis].periodic else n - 1)
    following = np.mod(current + 1, n)
    a = np.take(frames, current, axis=axis)
    b = np.take(frames, following, axis=axis)
    det = np.linalg.det(dagger(a) @ b)
    magnitude = np.abs(det)
    if np.min(magnitude, initial=1.0) < LINK_TOL:
        worst = np.unravel_index(int(np.argmin(magnitude)), magnitude.shape)
        raise SingularLinkError(
            f"link determinant vanishes near grid index {tuple(int(i) for i in worst)} "
            f"on axis {axis}; refine the grid")
    return det / magnitude, current, following


def chern1_link_frames(frames: np.ndarray, grid: ParameterGrid) -> InvariantReport:
    """Link-method first Chern number from explicit frames (..., N, r)."""
    _require_closed(grid, 2)
    u0, cur0, next0 = _links(frames, grid, 0)
    u1, cur1, next1 = _links(frames, grid, 1)
    plaquette = (u0[:, cur1] * u1[next0, :] * u0[:, next1].conj() * u1[cur0, :].conj())
    raw = float(np.sum(np.angle(plaquette))) / (2 * math.pi)
    return _report("c1", raw, grid, method="link")


def chern1_link(P: ProjectorFamily) -> InvariantReport:
    """
    Exact-integer first Chern number of a projector family on a closed 2D grid.

    Args:
        P: Projector family over a torus or a suspension chart of S².
    Returns:
        InvariantReport whose raw value is an integer up to rounding error.
    """
    return chern1_link_frames(projector_frames(P), P.grid)


def _cell_weights(grid: ParameterGrid) -> List[np.ndarray]:
    return [quadrature_weights(axis) for axis in grid.axes]


def berry_curvature_density(P: ProjectorFamily) -> np.ndarray:
    """Im tr(P[∂₀P, ∂₁P]) / 2π at every point of a 2D grid."""
    _require_closed(P.grid, 2)
    d0 = stencil_derivative(P.values, 0, difference_stencil(P.grid.axes[0]))
    d1 = stencil_derivative(P.values, 1, difference_stencil(P.grid.axes[1]))
    commutator = d0 @ d1 - d1 @ d0
    return np.trace(P.values @ commutator, axis1=-2, axis2=-1).imag / (2 * math.pi)


def chern1_curvature(P: ProjectorFamily) -> float:
    """Riemann sum of the Berry curvature; converges to the link value as the grid refines."""
    w0, w1 = _cell_weights(P.grid)
    return float(np.sum(berry_curvature_density(P) * w0[:, None] * w1[None, :]))


def chern1_curvature_report(P: ProjectorFamily) -> InvariantReport:
    """chern1_curvature wrapped in a report, with the link value alongside."""
    return _report("c1", chern1_curvature(P), P.grid, method="curvature", link_value=chern1_link(P).value)


# ------------------------------------------------------------- #
# Second Chern number
# ------------------------------------------------------------- #

_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _chern2_rows(P: ProjectorFamily, stencils, rows: np.ndarray) -> np.ndarray:
    """Second Chern density on the given indices of axis 0."""
    p = P.values[rows]
    derivatives = [stencil_derivative(P.values, 0, stencils[0], rows)]
    derivatives += [stencil_derivative(p, axis, stencils[axis]) for axis in (1, 2, 3)]
    f = {}
    for mu, nu in _PAIRS:
        commutator = derivatives[mu] @ derivatives[nu] - derivatives[nu] @ derivatives[mu]
        f[mu, nu] = -1j * (p @ commutator @ p)

    def tr(x):
        return np.trace(x, axis1=-2, axis2=-1)

    matrix_part = (tr(f[0, 1] @ f[2, 3]) - tr(f[0, 2] @ f[1, 3]) + tr(f[0, 3] @ f[1, 2]))
    abelian_part = (tr(f[0, 1]) * tr(f[2, 3]) - tr(f[0, 2]) * tr(f[1, 3])
                    + tr(f[0, 3]) * tr(f[1, 2]))
    return np.real(matrix_part - abelian_part) * 2 / (8 * math.pi ** 2)


def _row_chunks(n: int, chunk: int) -> List[np.ndarray]:
    return [np.arange(start, min(start + chunk, n)) for start in range(0, n, chunk)]


def second_chern_density(P: ProjectorFamily, threads: Optional[int] = None) -> np.ndarray:
    """Second Chern density at every point of a closed 4D grid."""
    _require_closed(P.grid, 4)
    stencils = [difference_stencil(axis) for axis in P.grid.axes]
    config = RuntimeConfig.from_env()
    slabs = parallel_map(lambda rows: _chern2_rows(P, stencils, rows),
                         _row_chunks(P.grid.shape[0], config.chunk), threads=threads)
    return np.concatenate(slabs, axis=0)


def chern2(P: ProjectorFamily, threads: Optional[int] = None, progress: bool = False) -> InvariantReport:
    """
    Second Chern number of a projector family on a closed 4D grid.

    Slabs along axis 0 are evaluated in parallel; their partial sums are
    reduced in slab order, so the result does not depend on thread count.

    Args:
        P: Projector family over a product of two closed 2D charts or an S⁴ chart.
        threads: Worker cap; defaults to BOTT_THREADS.
        progress: Show a progress bar.
    Returns:
        InvariantReport; converged is False when the residual reaches 0.05.
    """
    _require_closed(P.grid, 4)
    stencils = [difference_stencil(axis) for axis in P.grid.axes]
    w0, w1, w2, w3 = _cell_weights(P.grid)
    inner = w1[:, None, None] * w2[None, :, None] * w3[None, None, :]
    config = RuntimeConfig.from_env()

    def partial(rows):
        density = _chern2_rows(P, stencils, rows)
        return float(np.sum(density * w0[rows, None, None, None] * inner))

    partials = parallel_map(partial, _row_chunks(P.grid.shape[0], config.chunk),
                            threads=threads, desc="chern2", progress=progress)
    raw = float(np.sum(partials))
    logger.info("chern2 raw %.6f on %s", raw, P.grid.shape)
    return _report("c2", raw, P.grid, method="curvature")


def chern2_dirac_analytic(n: int = 64, chart: str = "sphere", threads: Optional[int] = None) -> float:
    """
    (3/8π²)∫ det[y, ∂y] over an S⁴ chart: the second Chern number of the
    empty band of Σ y^i γ_i, integrated with Gauss–Legendre nodes in t and
    uniform nodes in k.

    Args:
        n: Nodes per axis (at least 8).
        chart: "sphere" (iterated suspension, degree one) or "product" (S²×S²).
    Returns:
        −1 on the sphere chart, +2 on the product chart, up to quadrature error.
    """
    if n < 8:
        raise GridTooCoarseError(f"quadrature needs at least 8 nodes, got {n}")
    if chart not in ("sphere", "product"):
        raise ParameterError(f"chart must be 'sphere' or 'product', got {chart!r}")
    nodes, gauss = np.polynomial.legendre.leggauss(n)
    t, wt = (nodes + 1) / 2, gauss / 2
    k = 2 * math.pi * np.arange(n) / n
    wk = 2 * math.pi / n

    def partial(j):
        if chart == "product":
            y, tangents = embed_s4_product([k[j:j + 1], t], [k, t])
            weight = wk * wt[:, None, None] * wk * wt[None, None, :]
        else:
            y, tangents = embed_sphere(k[j:j + 1], [t, t, t])
            weight = wk * wt[:, None, None] * wt[None, :, None] * wt[None, None, :]
        jacobian = np.linalg.det(np.stack([y] + tangents, axis=-2))
        return float(np.sum(jacobian[0] * weight))

    total = float(np.sum(parallel_map(partial, range(n), threads=threads)))
    return 3 * total / (8 * math.pi ** 2)