"""JSON encoding of algebras, elements, channels, predual matrices and reports.

Complex scalars are written as ``[re, im]`` pairs. Element files look like::

    {"algebra": {"blocks": [{"dim": 2, "weight": 1.0}]},
     "blocks": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]}
"""
from __future__ import annotations

import dataclasses
import enum
import json
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra
from .channels import KrausChannel
from .errors import ParseError, ValidationError
from .predual import PredualMatrix


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(m: np.ndarray) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


def _scalar_from_json(v, where: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in v)):
        return complex(v[0], v[1])
    raise ParseError(f"{where}: expected a number or [re, im] pair, got {v!r}")


def matrix_from_json(rows, where: str = "matrix") -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError(f"{where}: expected a non-empty list of rows")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ParseError(f"{where}: rows have unequal lengths")
    return np.array([[_scalar_from_json(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)]
                     for i, r in enumerate(rows)], dtype=complex)


def algebra_to_json(alg: TracialAlgebra) -> dict:
    return alg.to_dict()


def algebra_from_json(obj, where: str = "algebra") -> TracialAlgebra:
    if not isinstance(obj, dict) or not isinstance(obj.get("blocks"), list):
        raise ParseError(f"{where}: expected an object with a 'blocks' list")
    pairs = []
    for i, b in enumerate(obj["blocks"]):
        if not isinstance(b, dict) or "dim" not in b:
            raise ParseError(f"{where}.blocks[{i}]: expected {{'dim': d, 'weight': w}}")
        pairs.append((b["dim"], b.get("weight", 1.0)))
    try:
        return TracialAlgebra(pairs)
    except ValidationError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def blocks_from_json(algebra: TracialAlgebra, blocks, where: str) -> AlgebraElement:
    if not isinstance(blocks, list):
        raise ParseError(f"{where}: expected a list of blocks")
    mats = [matrix_from_json(b, f"{where}[{i}]") for i, b in enumerate(blocks)]
    try:
        return AlgebraElement(algebra, mats)
    except ValidationError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def element_to_json(x: AlgebraElement) -> dict:
    return {"algebra": algebra_to_json(x.algebra),
            "blocks": [matrix_to_json(m) for m in x.blocks]}


def element_from_json(obj, where: str = "element") -> AlgebraElement:
    if not isinstance(obj, dict) or "blocks" not in obj or "algebra" not in obj:
        raise ParseError(f"{where}: expected an object with 'algebra' and 'blocks'")
    alg = algebra_from_json(obj["algebra"], f"{where}.algebra")
    return blocks_from_json(alg, obj["blocks"], f"{where}.blocks")


def channel_to_json(ch: KrausChannel) -> dict:
    return {"algebra": algebra_to_json(ch.algebra),
            "kraus": [[matrix_to_json(m) for m in a.blocks] for a in ch.kraus]}


def channel_from_json(obj, tp_tol: float = 1e-10, where: str = "channel") -> KrausChannel:
    if not isinstance(obj, dict) or "algebra" not in obj or not isinstance(obj.get("kraus"), list):
        raise ParseError(f"{where}: expected an object with 'algebra' and a 'kraus' list")
    alg = algebra_from_json(obj["algebra"], f"{where}.algebra")
    kraus = tuple(blocks_from_json(alg, k, f"{where}.kraus[{i}]")
                  for i, k in enumerate(obj["kraus"]))
    return KrausChannel(alg, kraus, tp_tol=tp_tol)


def predual_to_json(omega: PredualMatrix) -> dict:
    return {"n": omega.n, "algebra": algebra_to_json(omega.algebra),
            "entries": [[[matrix_to_json(m) for m in e.y.blocks] for e in row]
                        for row in omega.entries]}


def predual_from_json(obj, where: str = "predual") -> PredualMatrix:
    if not isinstance(obj, dict) or not {"n", "algebra", "entries"} <= obj.keys():
        raise ParseError(f"{where}: expected an object with 'n', 'algebra' and 'entries'")
    alg = algebra_from_json(obj["algebra"], f"{where}.algebra")
    n, rows = obj["n"], obj["entries"]
    if not isinstance(rows, list) or len(rows) != n or any(
            not isinstance(r, list) or len(r) != n for r in rows):
        raise ParseError(f"{where}.entries: expected an {n} x {n} array")
    entries = []
    for i, row in enumerate(rows):
        out = []
        for j, e in enumerate(row):
            here = f"{where}.entries[{i}][{j}]"
            # entries may be full element objects or bare block lists
            out.append(element_from_json(e, here) if isinstance(e, dict)
                       else blocks_from_json(alg, e, here))
        entries.append(out)
    try:
        return PredualMatrix(entries)
    except ValidationError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def to_jsonable(obj: Any) -> Any:
    """Recursively turn results into plain JSON types."""
    if isinstance(obj, AlgebraElement):
        return element_to_json(obj)
    if isinstance(obj, KrausChannel):
        return channel_to_json(obj)
    if isinstance(obj, PredualMatrix):
        return predual_to_json(obj)
    if isinstance(obj, TracialAlgebra):
        return algebra_to_json(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_json(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)


def load_json(path: str | Path, what: str = "input") -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{what}: cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: {path} is not valid JSON ({exc})") from exc
