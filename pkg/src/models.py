"""
Concrete Hamiltonian families generated analytically on a grid.

Each generator is a pure function of the grid coordinates. Spheres use the
suspension chart: a circle embeds as (cos k, sin k) and every suspension
maps x to (sin(πt)·x, cos(πt)), so S² carries
(sin πt cos k, sin πt sin k, cos πt).
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from src.base import HamiltonianFamily, ParameterGrid, UnitaryFamily
from src.config import FLAT_TOL
from src.core import circle, product, sphere, suspension, torus
from src.errors import InvalidGridError, NotFlatError, ParameterError
from src.utils import kron, sin_cos_pi

logger = logging.getLogger(__name__)

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
CHIRAL_2 = SIGMA_Z


@dataclass(frozen=True)
class ModelSpec:
    """Model name and its real parameters (v, w for SSH; M for massive Dirac; w for windings)."""
    name: str
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for key, value in self.params.items():
            if not np.isfinite(value):
                raise ParameterError(f"parameter {key} of model {self.name} must be finite, got {value}")


# ------------------------------------------------------------- #
# Charts
# ------------------------------------------------------------- #

def _require(grid: ParameterGrid, kind: str, ndim: int = None) -> None:
    if grid.kind != kind or (ndim is not None and grid.ndim != ndim):
        raise InvalidGridError(f"expected a {kind} grid, got {grid.describe()}")


def _winding(w) -> int:
    if w != int(w):
        raise ParameterError(f"winding must be an integer, got {w}")
    return int(w)


def embed_sphere(k: np.ndarray, ts: Sequence[np.ndarray]) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Iterated-suspension embedding of S^d on the mesh of (k, t₁, ..., t_{d-1}).

    Returns:
        (x, tangents): x of shape mesh + (d+1,), and ∂x along each mesh axis.
    """
    k = np.asarray(k, dtype=float)
    x = np.stack([np.cos(k), np.sin(k)], axis=-1)
    tangents = [np.stack([-np.sin(k), np.cos(k)], axis=-1)]
    for t in ts:
        s, c = sin_cos_pi(t)
        s, c = s[:, None], c[:, None]
        x_in = x[..., None, :]
        full = x.shape[:-1] + (len(t), 1)
        tangents = [np.concatenate([s * d[..., None, :], np.zeros(full)], axis=-1) for d in tangents]
        tangents.append(np.pi * np.concatenate([c * x_in, np.broadcast_to(-s, full)], axis=-1))
        x = np.concatenate([s * x_in, np.broadcast_to(c, full)], axis=-1)
    return x, tangents


def sphere_chart(grid: ParameterGrid) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Embedding of a circle or iterated-suspension grid into the unit sphere."""
    inner = grid
    while inner.kind == "suspension":
        inner = inner.children[0]
    if inner.kind != "circle":
        raise InvalidGridError(f"grid {grid.describe()} is not a sphere chart")
    coords = [axis.coordinates() for axis in grid.axes]
    return embed_sphere(coords[0], coords[1:])


def embed_s4_product(first: Sequence[np.ndarray],
                     second: Sequence[np.ndarray]) -> Tuple[np.ndarray, List[np.ndarray]]:
    """y = (x₁¹x₂, x₁², x₁³) on the mesh of (k₁, t₁, k₂, t₂), with tangents."""
    x1, d1 = embed_sphere(first[0], first[1:])
    x2, d2 = embed_sphere(second[0], second[1:])
    a = x1[:, :, None, None, :]
    b = x2[None, None, :, :, :]
    full = a.shape[:2] + b.shape[2:4]

    def lift(head, tail):
        return np.concatenate([head, np.broadcast_to(tail, full + (2,))], axis=-1)

    y = lift(a[..., :1] * b, a[..., 1:])
    tangents = [lift(d[:, :, None, None, :1] * b, d[:, :, None, None, 1:]) for d in d1]
    tangents += [lift(a[..., :1] * d[None, None], np.zeros(2)) for d in d2]
    return y, tangents


def s4_chart(grid: ParameterGrid) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Points y ∈ S⁴ with tangents, for either S⁴ chart.

    A product of two S² grids maps through y = (x₁¹x₂, x₁², x₁³); an
    iterated suspension of a circle embeds directly.
    """
    if grid.kind == "product":
        for g in grid.children:
            _require(g, "suspension", 2)
        first, second = ([a.coordinates() for a in g.axes] for g in grid.children)
        return embed_s4_product(first, second)
    x, tangents = sphere_chart(grid)
    if x.shape[-1] != 5:
        raise InvalidGridError(f"grid {grid.describe()} is not a chart of S⁴")
    return x, tangents


def _pauli_sum(components: np.ndarray, matrices) -> np.ndarray:
    return np.einsum("...i,ijk->...jk", components.astype(complex), np.stack(matrices))


# ------------------------------------------------------------- #
# Models
# ------------------------------------------------------------- #

def ssh(v: float, w: float, grid: ParameterGrid) -> HamiltonianFamily:
    """SSH chain [[0, v + w e^{-ik}], [v + w e^{ik}, 0]] with Γ = σ_z."""
    _require(grid, "circle")
    k = grid.mesh()[0]
    off = v + w * np.exp(1j * k)
    values = np.zeros(grid.shape + (2, 2), dtype=complex)
    values[..., 1, 0] = off
    values[..., 0, 1] = off.conj()
    return HamiltonianFamily(grid, values, chiral=CHIRAL_2)


def winding_chain(w: int, grid: ParameterGrid) -> HamiltonianFamily:
    """Flat chiral chain whose lower-left block is e^{iwk}."""
    w = _winding(w)
    _require(grid, "circle")
    k = grid.mesh()[0]
    values = np.zeros(grid.shape + (2, 2), dtype=complex)
    values[..., 1, 0] = np.exp(1j * w * k)
    values[..., 0, 1] = np.exp(-1j * w * k)
    return HamiltonianFamily(grid, values, chiral=CHIRAL_2)


def phase_winding(w: int, grid: ParameterGrid) -> UnitaryFamily:
    """U(k) = e^{iwk} as a 1×1 unitary family."""
    w = _winding(w)
    _require(grid, "circle")
    k = grid.mesh()[0]
    return UnitaryFamily(grid, np.exp(1j * w * k)[..., None, None])


def dirac_monopole(grid: ParameterGrid) -> HamiltonianFamily:
    """H(x) = x¹σ₁ + x²σ₂ + x³σ₃ on the S² suspension chart."""
    _require(grid, "suspension", 2)
    x, _ = sphere_chart(grid)
    return HamiltonianFamily(grid, _pauli_sum(x, PAULI))


def massive_dirac(M: float, grid: ParameterGrid) -> HamiltonianFamily:
    """sin k₁ σ₁ + sin k₂ σ₂ + (M − cos k₁ − cos k₂) σ₃ on T²."""
    _require(grid, "torus", 2)
    k1, k2 = grid.mesh()
    d = np.stack([np.sin(k1), np.sin(k2), M - np.cos(k1) - np.cos(k2)], axis=-1)
    return HamiltonianFamily(grid, _pauli_sum(d, PAULI))


def gamma_matrices() -> Tuple[np.ndarray, ...]:
    """γ_i = σ₁⊗σ_i (i = 1..3), γ₄ = σ₂⊗I, γ₅ = σ₃⊗I."""
    gammas = [np.kron(SIGMA_X, s) for s in PAULI]
    gammas.append(np.kron(SIGMA_Y, SIGMA_0))
    gammas.append(np.kron(SIGMA_Z, SIGMA_0))
    return tuple(gammas)


def dirac5(grid: ParameterGrid) -> HamiltonianFamily:
    """H(y) = Σ y^i γ_i over S⁴ (product chart or iterated-suspension chart)."""
    y, _ = s4_chart(grid)
    return HamiltonianFamily(grid, _pauli_sum(y, gamma_matrices()))


def generalized_dirac_monopole(h: HamiltonianFamily, s2_grid: ParameterGrid) -> HamiltonianFamily:
    """
    x¹σ₁⊗h + x²σ₂⊗I + x³σ₃⊗I over S² × X.

    Args:
        h: Flat family over X.
        s2_grid: Suspension chart of S².
    Returns:
        Flat family of dim 2·dim(h) over product(s2_grid, X).
    """
    _require(s2_grid, "suspension", 2)
    deviation = h.flatness()
    if deviation > FLAT_TOL:
        raise NotFlatError(f"h must satisfy h² = I (deviation {deviation:.3e})")
    grid = product(s2_grid, h.grid)
    x, _ = sphere_chart(s2_grid)
    x = x[(slice(None),) * s2_grid.ndim + (None,) * h.grid.ndim]
    hv = h.values[(None,) * s2_grid.ndim]
    eye = np.eye(h.dim)
    values = (x[..., 0, None, None] * kron(SIGMA_X, hv)
              + x[..., 1, None, None] * np.kron(SIGMA_Y, eye)
              + x[..., 2, None, None] * np.kron(SIGMA_Z, eye))
    return HamiltonianFamily(grid, np.broadcast_to(values, grid.shape + (2 * h.dim, 2 * h.dim)))


# ------------------------------------------------------------- #
# Registry used by the CLI
# ------------------------------------------------------------- #

def _grid_for(name: str, n: int, n_t: int, chart: str) -> ParameterGrid:
    if name in ("ssh", "winding-chain", "phase-winding"):
        return circle(n)
    if name == "monopole":
        return suspension(circle(n), n_t)
    if name == "massive-dirac":
        return torus(n, n)
    if chart == "sphere":
        return sphere(4, n, n_t)
    s2 = suspension(circle(n), n_t)
    return product(s2, s2)


MODELS: Dict[str, Callable] = {
    "ssh": lambda p, g: ssh(p.get("v", 0.0), p.get("w", 1.0), g),
    "monopole": lambda p, g: dirac_monopole(g),
    "massive-dirac": lambda p, g: massive_dirac(p.get("M", 1.0), g),
    "dirac5": lambda p, g: dirac5(g),
    "winding-chain": lambda p, g: winding_chain(p.get("w", 1), g),
    "phase-winding": lambda p, g: phase_winding(p.get("w", 1), g),
}


def build_model(spec: ModelSpec, n: int = 16, n_t: int = 17, chart: str = "product"):
    """Generate the named model on its canonical grid."""
    if spec.name not in MODELS:
        raise ParameterError(f"unknown model {spec.name!r}; choose from {sorted(MODELS)}")
    grid = _grid_for(spec.name, n, n_t, chart)
    logger.info("building %s on %s", spec.name, grid.describe())
    return MODELS[spec.name](spec.params, grid)
