"""
BHF ("Bloch Hamiltonian Family") persistence.

A BHF document is JSON:
    {"version": 1,
     "space": {<recursive descriptor>, "axes": [{"size": 16, "semantics": "periodic"}, ...]},
     "dim": N,
     "chiral": [[[re, im], ...], ...],        optional
     "unitary": true,                          unitary families only
     "projector": true, "rank": r,             projector families only
     "data": [<N×N matrix per point, row-major grid order>]}
Each complex entry is a two-element [re, im] array; Python's float repr is
the shortest round-trip decimal, so write-then-read is bit-exact.
"""
import json
import logging
from typing import IO, Union

import numpy as np

from src.base import Family, HamiltonianFamily, ProjectorFamily, UnitaryFamily
from src.core import make_grid
from src.errors import BottError, FormatError

logger = logging.getLogger(__name__)

BHF_VERSION = 1


def _encode_matrix(matrix: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def _decode_matrices(data, dim: int, count: int) -> np.ndarray:
    try:
        array = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise FormatError(f"data is not a regular array of [re, im] pairs: {e}") from None
    if array.shape != (count, dim, dim, 2):
        raise FormatError(f"data has shape {array.shape}, expected {(count, dim, dim, 2)}")
    matrices = np.empty(array.shape[:-1], dtype=np.complex128)
    matrices.real = array[..., 0]
    matrices.imag = array[..., 1]
    return matrices


def to_document(family: Family) -> dict:
    grid = family.grid
    space = grid.describe()
    space["axes"] = [{"size": a.size, "semantics": a.semantics} for a in grid.axes]
    document = {"version": BHF_VERSION, "space": space, "dim": family.dim}
    if isinstance(family, HamiltonianFamily) and family.chiral is not None:
        document["chiral"] = _encode_matrix(family.chiral)
    if isinstance(family, UnitaryFamily):
        document["unitary"] = True
    if isinstance(family, ProjectorFamily):
        document["projector"] = True
        document["rank"] = family.rank
    flat = family.values.reshape(-1, family.dim, family.dim)
    document["data"] = [_encode_matrix(m) for m in flat]
    return document


def from_document(document: dict) -> Family:
    if not isinstance(document, dict):
        raise FormatError("BHF document must be a JSON object")
    if document.get("version") != BHF_VERSION:
        raise FormatError(f"unsupported BHF version {document.get('version')!r}")
    for key in ("space", "dim", "data"):
        if key not in document:
            raise FormatError(f"BHF document is missing '{key}'")
    space = dict(document["space"])
    axes = space.pop("axes", None)
    grid = make_grid(space)
    if axes is not None:
        declared = [(a.get("size"), a.get("semantics")) for a in axes]
        actual = [(a.size, a.semantics) for a in grid.axes]
        if declared != actual:
            raise FormatError(f"axes {declared} do not match the space descriptor {actual}")
    dim = document["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"dim must be a positive integer, got {dim!r}")
    values = _decode_matrices(document["data"], dim, grid.size).reshape(grid.shape + (dim, dim))
    try:
        if document.get("unitary"):
            return UnitaryFamily(grid, values)
        if document.get("projector"):
            return ProjectorFamily(grid, values, rank=document.get("rank"))
        chiral = None
        if document.get("chiral") is not None:
            chiral = _decode_matrices([document["chiral"]], dim, 1)[0]
        return HamiltonianFamily(grid, values, chiral)
    except BottError as e:
        raise FormatError(f"BHF data violates family invariants: {e.message}") from None


def write_bhf(family: Family, target: Union[str, IO]) -> None:
    """Write a family as BHF JSON to a path or an open text stream."""
    document = to_document(family)
    if hasattr(target, "write"):
        json.dump(document, target)
        target.write("\n")
        return
    with open(target, "w", encoding="utf-8") as f:
        json.dump(document, f)
        f.write("\n")
    logger.info("wrote %s (%d points, dim %d)", target, family.grid.size, family.dim)


def read_bhf(source: Union[str, IO]) -> Family:
    """Read a BHF file from a path or an open text stream."""
    try:
        if hasattr(source, "read"):
            document = json.load(source)
        else:
            with open(source, "r", encoding="utf-8") as f:
                document = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}") from None
    return from_document(document)
