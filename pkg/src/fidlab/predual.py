"""Matrix order on the predual of a tracial algebra.

A normal functional is stored through its trace-duality representative y,
``omega(x) = tau(x y)``. An n x n matrix of functionals is positive in the
predual order exactly when the lifted map ``x -> [omega_ij(x)]`` into M_n
is completely positive. That need not agree with positivity of the
operator matrix ``[y_ij]``, and the two bundled 2 x 2 examples show both
directions of the mismatch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra, trace
from .channels import (CPCertificate, KrausChannel, LinearMap, as_map, dual,
                       is_completely_positive, transpose_map)
from .errors import AlgebraMismatch, ValidationError
from .sampling import random_element, random_kraus


@dataclass(frozen=True)
class FunctionalRep:
    """The normal functional x -> tau(x y)."""

    y: AlgebraElement

    def __call__(self, x: AlgebraElement) -> complex:
        return trace(x @ self.y)

    @property
    def algebra(self) -> TracialAlgebra:
        return self.y.algebra


class PredualMatrix:
    """Square matrix ``[omega_ij]`` of functionals over one algebra."""

    def __init__(self, entries: Sequence[Sequence[FunctionalRep | AlgebraElement]]):
        rows = [[e if isinstance(e, FunctionalRep) else FunctionalRep(e) for e in row]
                for row in entries]
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise ValidationError("a predual matrix must be square and non-empty")
        algebra = rows[0][0].algebra
        if any(e.algebra != algebra for row in rows for e in row):
            raise AlgebraMismatch("all entries of a predual matrix must share one algebra")
        self.entries = tuple(tuple(row) for row in rows)
        self.algebra = algebra
        self.n = n

    @classmethod
    def from_arrays(cls, algebra: TracialAlgebra, arrays) -> "PredualMatrix":
        """Build from nested lists of per-block matrices (single block: plain matrices)."""
        def element(a):
            if isinstance(a, AlgebraElement):
                return a
            if algebra.n_blocks == 1 and np.ndim(a) == 2:
                return AlgebraElement(algebra, [a])
            return AlgebraElement(algebra, a)
        return cls([[element(a) for a in row] for row in arrays])

    def representatives(self) -> list[list[AlgebraElement]]:
        return [[e.y for e in row] for row in self.entries]

    def __repr__(self):
        return f"PredualMatrix(n={self.n}, algebra={self.algebra!r})"


def lift_map(omega: PredualMatrix) -> LinearMap:
    """The map x -> [omega_ij(x)] from the algebra into M_n.

    On a matrix unit of block b, ``omega_ij(e_kl) = w_b (y_ij)_lk``, so the
    block weights enter exactly as the trace prescribes.
    """
    alg, n = omega.algebra, omega.n
    target = TracialAlgebra.matrix(n)
    mat = np.zeros((n * n, alg.dimension), dtype=complex)
    for i, row in enumerate(omega.entries):
        for j, entry in enumerate(row):
            cols = [w * yb.T.ravel() for yb, w in zip(entry.y.blocks, alg.weights)]
            mat[i * n + j] = np.concatenate(cols)
    return LinearMap(alg, target, mat)


def is_predual_positive(omega: PredualMatrix, psd_tol: float = 1e-10) -> CPCertificate:
    """Positivity in the predual matrix order, via complete positivity of the lift."""
    return is_completely_positive(lift_map(omega), psd_tol)


@dataclass(frozen=True)
class OperatorMatrixReport:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    min_eigenvalue: float
    psd: bool


def operator_matrix(omega: PredualMatrix, psd_tol: float = 1e-10) -> OperatorMatrixReport:
    """Assemble ``[y_ij]`` as one dense block matrix and test it for positivity.

    For multi-block algebras each ``y_ij`` is first laid out densely
    (block-diagonal), so the result has size ``n * sum(dims)``.
    """
    big = np.block([[e.y.dense() for e in row] for row in omega.entries])
    herm = 0.5 * (big + big.conj().T)
    evals = np.linalg.eigvalsh(herm)
    scale = max(1.0, float(np.abs(evals).max()))
    hermitian = np.abs(big - big.conj().T).max() <= psd_tol * scale
    low = float(evals[0])
    return OperatorMatrixReport(big, evals, low, bool(hermitian and low >= -psd_tol * scale))


def congruence(omega: PredualMatrix, c: AlgebraElement) -> PredualMatrix:
    """The matrix ``[x -> omega_ij(c* x c)]``, whose representatives are c y_ij c*."""
    if c.algebra != omega.algebra:
        raise AlgebraMismatch("congruence element lives in a different algebra")
    return PredualMatrix([[c @ e.y @ c.H for e in row] for row in omega.entries])


def canonical_omega(d: int) -> PredualMatrix:
    """The d x d matrix with y_ij = e_ji on M_d; its lift is the identity map.

    For d = 2 this is the worked example whose operator matrix is the swap.
    """
    alg = TracialAlgebra.matrix(d)
    return PredualMatrix([[AlgebraElement.matrix_unit(alg, 0, j, i) for j in range(d)]
                          for i in range(d)])


def transposed_omega(d: int) -> PredualMatrix:
    """y_ij = e_ij on M_d; the lift is the transpose map and [y_ij] is positive."""
    alg = TracialAlgebra.matrix(d)
    return PredualMatrix([[AlgebraElement.matrix_unit(alg, 0, i, j) for j in range(d)]
                          for i in range(d)])


def example_omega() -> PredualMatrix:
    return canonical_omega(2)


def example_delta() -> PredualMatrix:
    return transposed_omega(2)


def predual_image(phi: KrausChannel | LinearMap, omega: PredualMatrix) -> PredualMatrix:
    """Apply the predual map omega -> omega o phi entrywise.

    The representative of ``omega_y o phi`` is ``phi*(y)``, with phi* the
    trace dual.
    """
    pdual = dual(phi)
    if pdual.domain != omega.algebra:
        raise AlgebraMismatch("predual matrix does not live on the map's codomain")
    return PredualMatrix([[pdual(e.y) for e in row] for row in omega.entries])


@dataclass(frozen=True)
class CoincidenceReport:
    n_maps: int
    agreements: int
    n_cp: int
    disagreements: tuple[int, ...]

    @property
    def consistent(self) -> bool:
        return self.agreements == self.n_maps


def coincidence_probe(d: int, n_maps: int = 50, seed: int = 0,
                      psd_tol: float = 1e-9) -> CoincidenceReport:
    """Compare two notions of complete positivity for maps on M_d.

    For each sampled map phi the verdicts are:

    * predual order: the predual map sends the canonical positive matrix
      of functionals to a positive one (checked through its lift);
    * algebra order: the trace dual phi* acting on representatives is
      completely positive (checked through its own Choi matrix).

    Samples alternate between random Kraus channels, their compositions
    with the transpose, and random Hermiticity-preserving maps.
    """
    rng = np.random.default_rng(seed)
    alg = TracialAlgebra.matrix(d)
    t = transpose_map(alg)
    agreements, n_cp, bad = 0, 0, []
    for i in range(n_maps):
        kind = i % 3
        if kind == 0:
            phi = as_map(KrausChannel(alg, tuple(random_kraus(alg, rng, 2))))
        elif kind == 1:
            phi = t @ as_map(KrausChannel(alg, tuple(random_kraus(alg, rng, 2))))
        else:
            mats = [random_element(alg, rng) for _ in range(3)]
            signs = rng.choice([-1.0, 1.0], size=3)
            phi = LinearMap.from_function(
                lambda x, m=mats, s=signs: sum((sk * (a @ x @ a.H) for a, sk in zip(m, s)),
                                               AlgebraElement.zeros(alg)), alg)
        predual_ok = is_predual_positive(predual_image(phi, canonical_omega(d)), psd_tol).verdict
        algebra_ok = is_completely_positive(dual(phi), psd_tol).verdict
        n_cp += int(predual_ok)
        if predual_ok == algebra_ok:
            agreements += 1
        else:
            bad.append(i)
    return CoincidenceReport(n_maps, agreements, n_cp, tuple(bad))
