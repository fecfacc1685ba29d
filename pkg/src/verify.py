"""
Reproduction suite: every acceptance check of the toolkit, timed, with a
pass flag. `--quick` skips the 4D second-Chern checks.
"""
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.core import (EMPTY, OCCUPIED, band_projector, circle, product,
                      restrict_factor, sphere, spectral_flatten, suspension,
                      torus)
from src.invariants import (chern1_curvature, chern1_link, chern2,
                            chern2_dirac_analytic, winding_number)
from src.kring import ExteriorElement, ext_add, ext_mul, kunneth
from src.ktheory import (chiral_block, endpoints_check, extract_clutching,
                         internal_star_product, reflect_coordinate,
                         similarity_homotopy, star_product,
                         star_product_projectors, suspend)
from src.models import (dirac5, dirac_monopole, generalized_dirac_monopole,
                        massive_dirac, phase_winding, ssh, winding_chain)
from src.utils import block_diag, random_unitary

logger = logging.getLogger(__name__)

SEED = 20240607


@dataclass
class CheckResult:
    name: str
    expected: str
    computed: str
    passed: bool
    runtime: float = 0.0


@dataclass
class VerifySuiteResult:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([asdict(c) for c in self.checks])
        frame["status"] = frame["passed"].map({True: "✅", False: "❌"})
        return frame[["status", "name", "expected", "computed", "runtime"]]

    def to_json(self) -> List[dict]:
        return [asdict(c) for c in self.checks]


def _s2(n: int, n_t: int = None):
    return suspension(circle(n), n_t or n)


# ------------------------------------------------------------- #
# Checks
# ------------------------------------------------------------- #

def check_winding() -> Tuple[str, str, bool]:
    ssh_flat = spectral_flatten(ssh(0.0, 1.0, circle(16)))
    w_ssh = winding_number(chiral_block(ssh_flat)).value
    w_neg = winding_number(phase_winding(-2, circle(16))).value
    return "+1, -2", f"{w_ssh:+d}, {w_neg:+d}", (w_ssh, w_neg) == (1, -2)


def check_monopole_c1():
    values = []
    for n in (24, 48):
        H = dirac_monopole(_s2(n))
        values += [chern1_link(band_projector(H, EMPTY)).value,
                   chern1_link(band_projector(H, OCCUPIED)).value]
    return "-1, +1 (24² and 48²)", ", ".join(f"{v:+d}" for v in values), values == [-1, 1, -1, 1]


def check_suspension_identity():
    F = suspend(spectral_flatten(ssh(0.0, 1.0, circle(16))), 17)
    deviation = float(np.max(np.abs(F.values - dirac_monopole(_s2(16, 17)).values)))
    return "< 1e-12", f"{deviation:.1e}", deviation < 1e-12


def check_massive_dirac():
    results = []
    for M in (1.0, 3.0):
        for n in (48, 96):
            results.append(chern1_link(band_projector(massive_dirac(M, torus(n, n)), OCCUPIED)).value)
    P = band_projector(massive_dirac(1.0, torus(96, 96)), OCCUPIED)
    gap = abs(chern1_curvature(P) - chern1_link(P).raw)
    ok = results == [1, 1, 0, 0] and gap <= 1e-3
    return "M=1: +1, M=3: 0; |curv - link| ≤ 1e-3", f"{results}; {gap:.1e}", ok


def check_product_slices():
    H = dirac_monopole(_s2(12, 13))
    star = star_product(H, H)
    slices = [chern1_link(band_projector(restrict_factor(star, factor, (3, 5)), EMPTY)).value
              for factor in (0, 1)]
    internal = chern1_link(band_projector(internal_star_product(H, H), EMPTY)).value
    values = slices + [internal]
    return "0, 0, 0", ", ".join(str(v) for v in values), values == [0, 0, 0]


def check_dirac5_c2(progress: bool = False):
    sphere_report = chern2(band_projector(dirac5(sphere(4, 20, 20)), EMPTY), progress=progress)
    product_report = chern2(band_projector(dirac5(product(_s2(20), _s2(20))), EMPTY), progress=progress)
    analytic_sphere = chern2_dirac_analytic(64, "sphere")
    analytic_product = chern2_dirac_analytic(64, "product")
    ok = (sphere_report.value == -1 and sphere_report.converged
          and product_report.value == 2 and product_report.converged
          and abs(analytic_sphere + 1) < 1e-3 and abs(analytic_product - 2) < 1e-3)
    computed = (f"S⁴ {sphere_report.raw:+.3f}, S²×S² {product_report.raw:+.3f}; "
                f"analytic {analytic_sphere:+.4f}, {analytic_product:+.4f}")
    return "S⁴ chart -1, S²×S² chart +2", computed, ok


def check_stable_equivalence(progress: bool = False):
    H = dirac_monopole(_s2(16))
    star_report = chern2(band_projector(star_product(H, H), EMPTY), progress=progress)
    occupied = band_projector(H, OCCUPIED)
    product_report = chern2(star_product_projectors(occupied, occupied), progress=progress)
    grid = product(_s2(16), _s2(16))
    identity = float(np.max(np.abs(generalized_dirac_monopole(H, _s2(16)).values - dirac5(grid).values)))
    ok = (star_report.value == 2 and star_report.converged and product_report.value == 1
          and product_report.converged and identity < 1e-12)
    computed = (f"star {star_report.raw:+.3f}, projector product {product_report.raw:+.3f}, "
                f"monopole/dirac5 {identity:.1e}")
    return "+2 (= dirac5 on S²×S²), +1", computed, ok


def check_reflection_c1():
    H = reflect_coordinate(dirac_monopole(_s2(24)), 0)
    values = [chern1_link(band_projector(H, EMPTY)).value, chern1_link(band_projector(H, OCCUPIED)).value]
    return "+1, -1", ", ".join(f"{v:+d}" for v in values), values == [1, -1]


def check_reflection_c2(progress: bool = False):
    H = reflect_coordinate(dirac5(sphere(4, 20, 20)), 0)
    report = chern2(band_projector(H, EMPTY), progress=progress)
    return "+1", f"{report.raw:+.3f}", report.value == 1 and report.converged


def check_dimensional_reduction():
    rows = []
    for w in range(-3, 4):
        F = suspend(winding_chain(w, circle(32)), 17)
        winding = winding_number(extract_clutching(F)).value
        c1 = chern1_link(band_projector(F, EMPTY)).value
        rows.append((w, winding, c1))
    ok = all(winding == w and c1 == -w for w, winding, c1 in rows)
    return "w = winding = -C₁(empty)", "; ".join(f"{w}:{a},{b}" for w, a, b in rows), ok


def _random_element(rng, d: int) -> ExteriorElement:
    return ExteriorElement.from_dict(
        d, {m.terms[0][0]: int(rng.integers(-5, 6)) for m in ExteriorElement.basis(d)})


def ring_law_failures(seed: int = SEED, trials: int = 25) -> int:
    """Count violated ring identities over random elements and all monomial pairs."""
    rng = np.random.default_rng(seed)
    failures = 0
    for d in range(0, 5):
        one = ExteriorElement.scalar(d, 1)
        for _ in range(trials):
            a, b, c = (_random_element(rng, d) for _ in range(3))
            failures += ext_mul(ext_mul(a, b), c) != ext_mul(a, ext_mul(b, c))
            failures += ext_mul(a, ext_add(b, c)) != ext_add(ext_mul(a, b), ext_mul(a, c))
            failures += ext_mul(one, a) != a or ext_mul(a, one) != a
            odd = ExteriorElement.from_dict(d, {m: k for m, k in a.terms if len(m) % 2})
            failures += not ext_mul(odd, odd).is_zero()
        basis = ExteriorElement.basis(d)
        failures += len(basis) != 2 ** d
        for x in basis:
            for y in basis:
                sign = -1 if (len(x.terms[0][0]) * len(y.terms[0][0])) % 2 else 1
                expected = ExteriorElement.from_dict(d, {m: sign * k for m, k in ext_mul(y, x).terms})
                failures += ext_mul(x, y) != expected
        for i in range(1, d + 1):
            b_i = ExteriorElement.generator(d, i)
            failures += not ext_mul(b_i, b_i).is_zero()
    for d1 in range(0, 3):
        for d2 in range(0, 3):
            product_basis = {kunneth(x, y) for x in ExteriorElement.basis(d1) for y in ExteriorElement.basis(d2)}
            failures += len(product_basis) != 2 ** (d1 + d2)
    return int(failures)


def check_ring_laws():
    failures = ring_law_failures()
    return "0 failures", f"{failures} failures", failures == 0


def check_homotopy_endpoints():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in (1, 2, 4):
        for _ in range(20):
            S = random_unitary(n, rng)
            frame = random_unitary(n, rng)[:, :1]
            p_e = frame @ frame.conj().T
            worst = max(worst, *endpoints_check(p_e, S))
            worst = max(worst, float(np.max(np.abs(similarity_homotopy(S, 0.0) - np.eye(2 * n)))),
                        float(np.max(np.abs(similarity_homotopy(S, 1.0) - block_diag(S, S.conj().T)))))
    return "< 1e-10", f"{worst:.1e}", worst < 1e-10


# Doubling the grid must cut the curvature error by at least this factor
# (order ≥ log2 3.5 ≈ 1.8). Rows next to the poles use second-order
# stencils, so quadratic decay (factor 4) is only reached asymptotically.
DECAY_RATIO = 3.5


def _curvature_error(H, which: str) -> float:
    P = band_projector(H, which)
    return abs(chern1_curvature(P) - chern1_link(P).value)


def check_curvature_cross_check():
    coarse = _curvature_error(dirac_monopole(_s2(48)), EMPTY)
    fine = _curvature_error(dirac_monopole(_s2(96)), EMPTY)
    dirac = _curvature_error(massive_dirac(1.0, torus(96, 96)), OCCUPIED)
    ratio = coarse / fine if fine > 0 else math.inf
    ok = fine <= 1e-3 and dirac <= 1e-3 and ratio >= DECAY_RATIO
    return f"≤ 1e-3, doubling ratio ≥ {DECAY_RATIO}", f"monopole {fine:.1e} (ratio {ratio:.1f}), Dirac {dirac:.1e}", ok


# name, function, needs 4D grids
CHECKS: List[Tuple[str, Callable, bool]] = [
    ("winding", check_winding, False),
    ("monopole-c1", check_monopole_c1, False),
    ("suspension-identity", check_suspension_identity, False),
    ("massive-dirac-c1", check_massive_dirac, False),
    ("product-slices", check_product_slices, False),
    ("dirac5-c2", check_dirac5_c2, True),
    ("stable-equivalence-c2", check_stable_equivalence, True),
    ("reflection-c1", check_reflection_c1, False),
    ("reflection-c2", check_reflection_c2, True),
    ("dimensional-reduction", check_dimensional_reduction, False),
    ("ring-laws", check_ring_laws, False),
    ("homotopy-endpoints", check_homotopy_endpoints, False),
    ("curvature-cross-check", check_curvature_cross_check, False),
]


def run_verify(quick: bool = False, progress: bool = False) -> VerifySuiteResult:
    """
    Run the reproduction suite.

    Args:
        quick: Skip the checks that need 4D grids.
        progress: Show progress bars.
    Returns:
        VerifySuiteResult with one entry per executed check.
    """
    selected = [(name, fn, heavy) for name, fn, heavy in CHECKS if not (quick and heavy)]
    result = VerifySuiteResult()
    for name, fn, heavy in tqdm(selected, desc="verify", disable=not progress, leave=False):
        start = time.perf_counter()
        expected, computed, passed = fn(progress=progress) if heavy else fn()
        elapsed = time.perf_counter() - start
        logger.info("%s: %s (%.2fs)", name, "pass" if passed else "FAIL", elapsed)
        result.checks.append(CheckResult(name, expected, computed, bool(passed), round(elapsed, 3)))
    return result
