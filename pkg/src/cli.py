"""
Command-line surface.

    python -m src model ssh --v 0 --w 1 --n 16 -o ssh.bhf
    python -m src suspend ssh.bhf --nt 17 -o mono.bhf
    python -m src invariant c1 mono.bhf --band empty
    python -m src kring eval "(1+b1)*(1+b2)" --d 2
    python -m src verify --quick

Errors exit with status 1 and a single JSON line {"error", "message"} on stderr.
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from src.base import HamiltonianFamily, ProjectorFamily, UnitaryFamily
from src.bhf_io import read_bhf, write_bhf
from src.core import EMPTY, OCCUPIED, band_projector, spectral_flatten
from src.errors import BottError, ShapeMismatchError
from src.invariants import (berry_curvature_density, chern1_curvature_report,
                            chern1_link, chern2, second_chern_density,
                            winding_number)
from src.kring import evaluate
from src.ktheory import (bott_unitary, chiral_block, extract_clutching,
                         loop_extend, reflect_coordinate, star_product,
                         star_product_projectors, suspend)
from src.models import MODELS, ModelSpec, build_model
from src.verify import run_verify

logger = logging.getLogger(__name__)


# ------------------------------------------------------------- #
# Helpers
# ------------------------------------------------------------- #

def _emit(family, output: Optional[str]) -> None:
    write_bhf(family, output if output else sys.stdout)


def _print_json(payload) -> None:
    print(json.dumps(payload))


def _projector(family, band: Optional[str], command: str) -> ProjectorFamily:
    if isinstance(family, ProjectorFamily):
        return family
    if not isinstance(family, HamiltonianFamily):
        raise ShapeMismatchError(f"{command} needs a Hamiltonian or projector family")
    if band is None:
        raise ShapeMismatchError(f"{command} on a Hamiltonian needs --band occupied|empty")
    return band_projector(family, band)


def _unitary(family) -> UnitaryFamily:
    if isinstance(family, UnitaryFamily):
        return family
    if isinstance(family, HamiltonianFamily) and family.chiral is not None:
        return chiral_block(family)
    raise ShapeMismatchError("winding needs a unitary family or a flat chiral Hamiltonian")


def _dump_density(path: str, grid, density: np.ndarray) -> None:
    names = [axis.name for axis in grid.axes]
    if len(set(names)) < len(names):
        names = [f"{name}_{i}" for i, name in enumerate(names)]
    columns = {name: mesh.ravel() for name, mesh in zip(names, grid.mesh())}
    frame = pd.DataFrame(columns)
    frame["density"] = density.ravel()
    frame.to_csv(path, index=False)
    logger.info("wrote %d density rows to %s", len(frame), path)


# ------------------------------------------------------------- #
# Commands
# ------------------------------------------------------------- #

def cmd_model(args) -> int:
    params = {key: getattr(args, key) for key in ("v", "w", "M") if getattr(args, key) is not None}
    family = build_model(ModelSpec(args.name, params), n=args.n, n_t=args.nt, chart=args.chart)
    if args.flatten:
        family = spectral_flatten(family)
    _emit(family, args.output)
    return 0


def cmd_product(args) -> int:
    first, second = read_bhf(args.first), read_bhf(args.second)
    if isinstance(first, ProjectorFamily) and isinstance(second, ProjectorFamily):
        result = star_product_projectors(first, second)
    elif isinstance(first, HamiltonianFamily) and isinstance(second, HamiltonianFamily):
        result = star_product(first, second)
    else:
        raise ShapeMismatchError(
            f"product needs two Hamiltonian or two projector families, "
            f"got {type(first).__name__} and {type(second).__name__}")
    _emit(result, args.output)
    return 0


def cmd_suspend(args) -> int:
    family = read_bhf(args.input)
    if not isinstance(family, HamiltonianFamily):
        raise ShapeMismatchError(f"suspend needs a Hamiltonian family, got {type(family).__name__}")
    if family.chiral is None:
        result = bott_unitary(family, args.nt, loop_closed=args.loop)
    else:
        result = suspend(family, args.nt)
        if args.loop:
            result = loop_extend(result)
    _emit(result, args.output)
    return 0


def cmd_clutch(args) -> int:
    _emit(extract_clutching(read_bhf(args.input)), args.output)
    return 0


def cmd_reflect(args) -> int:
    _emit(reflect_coordinate(read_bhf(args.input), args.axis), args.output)
    return 0


def cmd_invariant(args) -> int:
    family = read_bhf(args.input)
    if args.kind == "winding":
        report = winding_number(_unitary(family))
    elif args.kind == "c1":
        P = _projector(family, args.band, "c1")
        report = chern1_curvature_report(P) if args.method == "curvature" else chern1_link(P)
        if args.dump_curvature:
            _dump_density(args.dump_curvature, P.grid, berry_curvature_density(P))
    else:
        P = _projector(family, args.band, "c2")
        report = chern2(P, progress=not args.quiet)
        if args.dump_curvature:
            _dump_density(args.dump_curvature, P.grid, second_chern_density(P))
    _print_json(report.to_dict())
    return 0


def cmd_kring(args) -> int:
    print(evaluate(args.expression, args.d))
    return 0


def cmd_verify(args) -> int:
    result = run_verify(quick=args.quick, progress=not args.quiet)
    if args.json:
        _print_json(result.to_json())
    else:
        with pd.option_context("display.max_colwidth", None, "display.width", 200):
            print(result.to_frame().to_string(index=False))
        summary = sum(c.passed for c in result.checks)
        print(f"\n{summary}/{len(result.checks)} checks passed")
    return 0 if result.passed else 1


# ------------------------------------------------------------- #
# Parser
# ------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bott", description="K-theory toolkit for gapped Hamiltonian families")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="errors only, no progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    model = sub.add_parser("model", help="generate a model family")
    model.add_argument("name", choices=sorted(MODELS))
    model.add_argument("--v", type=float)
    model.add_argument("--w", type=float)
    model.add_argument("--M", type=float)
    model.add_argument("--n", type=int, default=16, help="points per periodic axis")
    model.add_argument("--nt", type=int, default=17, help="points per suspension axis")
    model.add_argument("--chart", choices=("product", "sphere"), default="product", help="S⁴ chart for dirac5")
    model.add_argument("--flatten", action="store_true")
    model.add_argument("-o", "--output")
    model.set_defaults(handler=cmd_model)

    prod = sub.add_parser("product", help="star product of two families")
    prod.add_argument("first")
    prod.add_argument("second")
    prod.add_argument("-o", "--output")
    prod.set_defaults(handler=cmd_product)

    susp = sub.add_parser("suspend", help="suspend a chiral family (Bott unitary otherwise)")
    susp.add_argument("input")
    susp.add_argument("--nt", type=int, default=17)
    susp.add_argument("--loop", action="store_true")
    susp.add_argument("-o", "--output")
    susp.set_defaults(handler=cmd_suspend)

    clutch = sub.add_parser("clutch", help="extract the clutching function")
    clutch.add_argument("input")
    clutch.add_argument("-o", "--output")
    clutch.set_defaults(handler=cmd_clutch)

    reflect = sub.add_parser("reflect", help="reverse one grid axis")
    reflect.add_argument("input")
    reflect.add_argument("--axis", type=int, required=True)
    reflect.add_argument("-o", "--output")
    reflect.set_defaults(handler=cmd_reflect)

    inv = sub.add_parser("invariant", help="compute a topological invariant")
    inv.add_argument("kind", choices=("winding", "c1", "c2"))
    inv.add_argument("input")
    inv.add_argument("--band", choices=(OCCUPIED, EMPTY))
    inv.add_argument("--method", choices=("link", "curvature"), default="link")
    inv.add_argument("--dump-curvature", metavar="CSV")
    inv.set_defaults(handler=cmd_invariant)

    kring = sub.add_parser("kring", help="exterior-algebra arithmetic")
    kring_sub = kring.add_subparsers(dest="action", required=True)
    ev = kring_sub.add_parser("eval")
    ev.add_argument("expression")
    ev.add_argument("--d", type=int, required=True)
    ev.set_defaults(handler=cmd_kring)

    verify = sub.add_parser("verify", help="run the reproduction suite")
    verify.add_argument("--quick", action="store_true", help="skip the 4D checks")
    verify.add_argument("--json", action="store_true")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except BottError as e:
        print(json.dumps(e.to_dict()), file=sys.stderr)
        return 1
    except OSError as e:
        print(json.dumps({"error": "io", "message": str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
