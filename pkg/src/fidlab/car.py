"""Finite levels of the CAR (Fermion) tower, M_2 (x) M_2 (x) ... with normalised trace.

Level k is M_{2^k} with trace 2^-k Tr, so tau(1) = 1 at every level, and
``embed(x) = x (x) 1_2`` is a unital, trace-preserving *-homomorphism into
level k + 1.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra
from .errors import LevelMismatch, ValidationError
from .fidelity import fidelity

MAX_LEVEL = 10


@lru_cache(maxsize=None)
def _level(k: int) -> TracialAlgebra:
    return TracialAlgebra.matrix(2 ** k, 2.0 ** -k)


def car_level(k: int, max_level: int = MAX_LEVEL) -> TracialAlgebra:
    """The level-k algebra; levels are built once and shared."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"CAR level must be a positive integer, got {k!r}")
    if k > max_level:
        raise ValidationError(f"CAR level {k} exceeds the configured maximum {max_level}")
    return _level(int(k))


def level_of(x: AlgebraElement) -> int:
    """The level k with x in car_level(k), or LevelMismatch."""
    alg = x.algebra
    if alg.n_blocks == 1:
        d = alg.dims[0]
        k = d.bit_length() - 1
        if k >= 1 and d == 2 ** k and alg == _level(k):
            return k
    raise LevelMismatch(f"{alg!r} is not a level of the CAR tower")


def embed(x: AlgebraElement, level: int | None = None,
          max_level: int = MAX_LEVEL) -> AlgebraElement:
    """x (x) 1_2 at the next level.

    Args:
        x: element of a CAR level.
        level: expected level of *x*; mismatch raises LevelMismatch.
    """
    k = level_of(x)
    if level is not None and level != k:
        raise LevelMismatch(f"element is at level {k}, expected {level}")
    target = car_level(k + 1, max(max_level, k + 1))
    return AlgebraElement(target, [np.kron(x.blocks[0], np.eye(2))])


def embed_many(x: AlgebraElement, depth: int) -> AlgebraElement:
    for _ in range(depth):
        x = embed(x, max_level=level_of(x) + 1)
    return x


def fidelity_stability(sigma: AlgebraElement, rho: AlgebraElement, depth: int,
                       max_level: int = MAX_LEVEL) -> list[float]:
    """Fidelity at the starting level and after each of *depth* embeddings."""
    k = level_of(sigma)
    if level_of(rho) != k:
        raise LevelMismatch("sigma and rho sit at different levels")
    if k + depth > max_level:
        raise ValidationError(f"depth {depth} from level {k} exceeds max level {max_level}")
    values = [fidelity(sigma, rho)]
    for _ in range(depth):
        sigma, rho = embed(sigma, max_level=max_level), embed(rho, max_level=max_level)
        values.append(fidelity(sigma, rho))
    return values
