# ------------------------------------------------------------- #
# Helper Functions
# ------------------------------------------------------------- #
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.base import Axis
from src.config import RuntimeConfig

logger = logging.getLogger(__name__)

Stencil = Tuple[np.ndarray, np.ndarray]


def parallel_map(fn: Callable, items: Iterable, threads: Optional[int] = None,
                 desc: Optional[str] = None, progress: bool = False) -> List:
    """
    Map fn over items with a thread pool, keeping input order.

    Args:
        fn: Pure function applied to each item.
        items: Work items.
        threads: Worker cap; defaults to BOTT_THREADS.
        desc: Progress bar label.
        progress: Show a tqdm bar (only when stderr is a terminal).
    Returns:
        List of results in the order of items.
    """
    items = list(items)
    threads = threads or RuntimeConfig.from_env().threads
    show = progress and sys.stderr.isatty()
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=not show, leave=False)]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(tqdm(pool.map(fn, items), total=len(items), desc=desc,
                         disable=not show, leave=False))


def sin_cos_pi(t) -> Tuple[np.ndarray, np.ndarray]:
    """sin(πt), cos(πt) with exact values at half-integer t."""
    t = np.asarray(t, dtype=float)
    s = np.sin(np.pi * t)
    c = np.cos(np.pi * t)
    doubled = 2 * t
    exact = doubled == np.rint(doubled)
    if np.any(exact):
        quarter = np.mod(np.rint(doubled[exact]).astype(int), 4)
        s = np.array(s, copy=True)
        c = np.array(c, copy=True)
        s[exact] = np.array([0.0, 1.0, 0.0, -1.0])[quarter]
        c[exact] = np.array([1.0, 0.0, -1.0, 0.0])[quarter]
    return s, c


# ------------------------------------------------------------- #
# Finite differences and quadrature
# ------------------------------------------------------------- #

def difference_stencil(axis: Axis) -> Stencil:
    """
    Per-point derivative stencil along one axis.

    Periodic axes use the fourth-order central stencil with wrap-around.
    Suspension axes use it in the interior, second-order central next to the
    poles and second-order one-sided at the poles.

    Returns:
        (index, weight) arrays of shape (n, 5); unused slots carry weight 0.
    """
    n, h = axis.size, axis.step
    j = np.arange(n)
    offsets = np.array([-2, -1, 0, 1, 2])
    central = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
    if axis.periodic:
        index = np.mod(j[:, None] + offsets[None, :], n)
        return index, np.tile(central, (n, 1))

    index = np.clip(j[:, None] + offsets[None, :], 0, n - 1)
    weights = np.tile(central, (n, 1))
    second = np.array([0.0, -1.0, 0.0, 1.0, 0.0]) / (2 * h)
    for row in (1, n - 2):
        weights[row] = second
    index[0] = [0, 1, 2, 0, 0]
    weights[0] = np.array([-3.0, 4.0, -1.0, 0.0, 0.0]) / (2 * h)
    index[n - 1] = [n - 1, n - 2, n - 3, n - 1, n - 1]
    weights[n - 1] = np.array([3.0, -4.0, 1.0, 0.0, 0.0]) / (2 * h)
    return index, weights


def stencil_derivative(values: np.ndarray, axis: int, stencil: Stencil,
                       rows: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Apply a difference stencil along an axis of a family array.

    Args:
        values: Array whose `axis` is sampled by the stencil.
        axis: Axis to differentiate.
        stencil: Output of difference_stencil.
        rows: Optional subset of output indices along `axis`.
    Returns:
        Derivative with len(rows) (or n) entries along `axis`.
    """
    index, weights = stencil
    if rows is not None:
        index, weights = index[rows], weights[rows]
    shape = [1] * values.ndim
    shape[axis] = -1
    out = np.zeros(values.shape[:axis] + (index.shape[0],) + values.shape[axis + 1:],
                   dtype=np.result_type(values, weights))
    for slot in range(index.shape[1]):
        w = weights[:, slot]
        if not np.any(w):
            continue
        out += np.take(values, index[:, slot], axis=axis) * w.reshape(shape)
    return out


def spectral_derivative(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """d/dk of samples on a full 2π period, via FFT."""
    n = values.shape[axis]
    freq = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        freq[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    return np.fft.ifft(np.fft.fft(values, axis=axis) * (1j * freq).reshape(shape), axis=axis)


def quadrature_weights(axis: Axis) -> np.ndarray:
    """Uniform weights on periodic axes, trapezoid weights on suspension axes."""
    weights = np.full(axis.size, axis.step)
    if not axis.periodic:
        weights[0] *= 0.5
        weights[-1] *= 0.5
    return weights


# ------------------------------------------------------------- #
# Linear algebra
# ------------------------------------------------------------- #

def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Gaussian."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases[None, :]


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise Kronecker product of two stacks of matrices."""
    n, m = a.shape[-1], b.shape[-1]
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    return out.reshape(out.shape[:-4] + (n * m, n * m))


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    """Pointwise block-diagonal stack of matrix stacks sharing leading axes."""
    lead = np.broadcast_shapes(*(b.shape[:-2] for b in blocks))
    dim = sum(b.shape[-1] for b in blocks)
    dtype = np.result_type(*blocks)
    out = np.zeros(lead + (dim, dim), dtype=dtype)
    offset = 0
    for b in blocks:
        n = b.shape[-1]
        out[..., offset:offset + n, offset:offset + n] = b
        offset += n
    return out
