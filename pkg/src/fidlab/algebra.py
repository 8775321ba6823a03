"""Finite-dimensional tracial C*-algebras and their elements.

A finite-dimensional C*-algebra with a faithful trace is, up to
isomorphism, a direct sum of full matrix blocks ``M_{d_1} + ... + M_{d_m}``
with the trace ``tau(x) = sum_b w_b * Tr(x_b)`` for strictly positive
weights ``w_b``. Elements are stored as one dense complex matrix per block.

All spectral work goes through one primitive, the Hermitian
eigendecomposition (:func:`numpy.linalg.eigh`); singular values and polar
factors are derived from it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from numbers import Number
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AlgebraMismatch, NotPositive, NotSelfadjoint, ValidationError

_EPS = np.finfo(float).eps

DEFAULT_PSD_TOL = 1e-10
DEFAULT_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class Block:
    dim: int
    weight: float


class TracialAlgebra:
    """Direct sum of matrix blocks with a weighted trace.

    Args:
        blocks: sequence of ``(dim, weight)`` pairs or :class:`Block`.
    """

    def __init__(self, blocks: Iterable[Block | tuple[int, float]]):
        parsed = []
        for b in blocks:
            dim, weight = (b.dim, b.weight) if isinstance(b, Block) else b
            if int(dim) != dim or dim < 1:
                raise ValidationError(f"block dimension must be a positive integer, got {dim!r}")
            weight = float(weight)
            if not (weight > 0 and np.isfinite(weight)):
                raise ValidationError(f"block weight must be positive and finite, got {weight!r}")
            parsed.append(Block(int(dim), weight))
        if not parsed:
            raise ValidationError("an algebra needs at least one block")
        self.blocks: tuple[Block, ...] = tuple(parsed)

    @classmethod
    def matrix(cls, dim: int, weight: float = 1.0) -> "TracialAlgebra":
        """The full matrix algebra ``M_dim`` with trace ``weight * Tr``."""
        return cls([(dim, weight)])

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(b.weight for b in self.blocks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def total_trace(self) -> float:
        """tau(1) = sum_b w_b d_b."""
        return float(sum(b.weight * b.dim for b in self.blocks))

    @property
    def dimension(self) -> int:
        """Complex vector-space dimension, sum_b d_b^2."""
        return sum(d * d for d in self.dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Start index of each block in the vectorised (matrix-unit) basis."""
        out, pos = [], 0
        for d in self.dims:
            out.append(pos)
            pos += d * d
        return tuple(out)

    def __eq__(self, other):
        return isinstance(other, TracialAlgebra) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        inner = ", ".join(f"M_{b.dim}@{b.weight:g}" for b in self.blocks)
        return f"TracialAlgebra({inner})"

    def to_dict(self) -> dict:
        return {"blocks": [{"dim": b.dim, "weight": b.weight} for b in self.blocks]}


def _as_blocks(algebra: TracialAlgebra, blocks) -> tuple[np.ndarray, ...]:
    blocks = list(blocks)
    if len(blocks) != algebra.n_blocks:
        raise ValidationError(
            f"expected {algebra.n_blocks} blocks, got {len(blocks)}")
    out = []
    for b, (mat, d) in enumerate(zip(blocks, algebra.dims)):
        arr = np.array(mat, dtype=complex)
        if arr.shape != (d, d):
            raise ValidationError(f"block {b} has shape {arr.shape}, expected {(d, d)}")
        arr.flags.writeable = False
        out.append(arr)
    return tuple(out)


class AlgebraElement:
    """An element of a :class:`TracialAlgebra`, stored blockwise.

    Elements are immutable. ``+``, ``-`` and scalar ``*`` are linear
    operations; ``@`` is the algebra product; ``abs(z)`` is the modulus
    ``(z* z)^(1/2)``.
    """

    __slots__ = ("algebra", "blocks")
    __array_ufunc__ = None  # keep numpy scalars from broadcasting into us

    def __init__(self, algebra: TracialAlgebra, blocks: Sequence):
        self.algebra = algebra
        self.blocks = _as_blocks(algebra, blocks)

    # -- constructors -------------------------------------------------------
    @classmethod
    def _raw(cls, algebra, blocks):
        # trusted fast path: blocks already validated complex arrays
        obj = AlgebraElement.__new__(AlgebraElement)
        obj.algebra = algebra
        obj.blocks = tuple(blocks)
        return obj

    @classmethod
    def identity(cls, algebra: TracialAlgebra) -> "AlgebraElement":
        return cls(algebra, [np.eye(d) for d in algebra.dims])

    @classmethod
    def zeros(cls, algebra: TracialAlgebra) -> "AlgebraElement":
        return cls(algebra, [np.zeros((d, d)) for d in algebra.dims])

    @classmethod
    def matrix_unit(cls, algebra: TracialAlgebra, block: int, i: int, j: int) -> "AlgebraElement":
        """The matrix unit e_ij sitting in block *block*."""
        mats = [np.zeros((d, d)) for d in algebra.dims]
        mats[block][i, j] = 1.0
        return cls(algebra, mats)

    @classmethod
    def from_matrix(cls, mat, weight: float = 1.0) -> "AlgebraElement":
        """Wrap one square matrix as an element of ``M_d`` with the given weight."""
        mat = np.asarray(mat)
        return cls(TracialAlgebra.matrix(mat.shape[0], weight), [mat])

    @classmethod
    def from_vector(cls, algebra: TracialAlgebra, vec) -> "AlgebraElement":
        """Inverse of :meth:`to_vector`."""
        vec = np.asarray(vec, dtype=complex)
        mats = [vec[o:o + d * d].reshape(d, d)
                for o, d in zip(algebra.offsets, algebra.dims)]
        return cls(algebra, mats)

    def to_vector(self) -> np.ndarray:
        """Row-major concatenation of the blocks (matrix-unit coordinates)."""
        return np.concatenate([m.ravel() for m in self.blocks])

    def dense(self) -> np.ndarray:
        """Block-diagonal dense matrix of size sum_b d_b."""
        n = sum(self.algebra.dims)
        out = np.zeros((n, n), dtype=complex)
        pos = 0
        for m in self.blocks:
            d = m.shape[0]
            out[pos:pos + d, pos:pos + d] = m
            pos += d
        return out

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.algebra != self.algebra:
            raise AlgebraMismatch(f"{self.algebra!r} vs {other.algebra!r}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement._raw(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement._raw(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement._raw(self.algebra, [-a for a in self.blocks])

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return AlgebraElement._raw(self.algebra, [scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return AlgebraElement._raw(self.algebra, [a / scalar for a in self.blocks])

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement._raw(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __abs__(self):
        return modulus(self)

    def adjoint(self) -> "AlgebraElement":
        return adjoint(self)

    @property
    def H(self) -> "AlgebraElement":
        return adjoint(self)

    def norm(self) -> float:
        """Operator (C*) norm: the largest singular value over all blocks."""
        return max(float(np.linalg.norm(m, 2)) if m.size else 0.0 for m in self.blocks)

    def hs_norm(self) -> float:
        """Norm induced by the inner product tau(x* y)."""
        return float(np.sqrt(sum(w * np.vdot(m, m).real
                                 for w, m in zip(self.algebra.weights, self.blocks))))

    def allclose(self, other: "AlgebraElement", atol: float = 1e-10) -> bool:
        self._check(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.algebra == other.algebra and all(
            np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))

    __hash__ = None

    def __repr__(self):
        return f"AlgebraElement({self.algebra!r}, blocks={[m.tolist() for m in self.blocks]})"


class DensityElement(AlgebraElement):
    """A positive element with unit trace (a tau-state).

    Construction validates positivity and normalisation; arithmetic on a
    density element yields plain :class:`AlgebraElement` values.
    """

    __slots__ = ()

    def __init__(self, element: AlgebraElement, *, psd_tol: float = DEFAULT_PSD_TOL,
                 trace_tol: float = 1e-9):
        from .errors import NotNormalized

        if not is_positive(element, psd_tol):
            raise NotPositive("density element has a negative eigenvalue")
        t = trace(element)
        if abs(t - 1) > trace_tol:
            raise NotNormalized(f"tau(rho) = {t.real:.12g}, expected 1")
        self.algebra = element.algebra
        self.blocks = element.blocks

    @property
    def element(self) -> AlgebraElement:
        return AlgebraElement._raw(self.algebra, self.blocks)


def same_algebra(*elements: AlgebraElement) -> TracialAlgebra:
    alg = elements[0].algebra
    for e in elements[1:]:
        if e.algebra != alg:
            raise AlgebraMismatch(f"{alg!r} vs {e.algebra!r}")
    return alg


# -- trace and involution -----------------------------------------------------

def trace(x: AlgebraElement) -> complex:
    """tau(x) = sum_b w_b Tr(x_b)."""
    return complex(sum(w * np.trace(m) for w, m in zip(x.algebra.weights, x.blocks)))


def adjoint(x: AlgebraElement) -> AlgebraElement:
    return AlgebraElement._raw(x.algebra, [m.conj().T for m in x.blocks])


def selfadjoint_defect(x: AlgebraElement) -> float:
    return max(float(np.abs(m - m.conj().T).max()) if m.size else 0.0 for m in x.blocks)


def _scale(x: AlgebraElement) -> float:
    return max(1.0, x.norm())


def is_selfadjoint(x: AlgebraElement, tol: float = DEFAULT_PSD_TOL) -> bool:
    return selfadjoint_defect(x) <= tol * _scale(x)


def eigvalsh(x: AlgebraElement) -> list[np.ndarray]:
    """Ascending eigenvalues of each (Hermitian part of a) block."""
    return [np.linalg.eigvalsh(_herm(m)) for m in x.blocks]


def min_eigenvalue(x: AlgebraElement) -> float:
    return min(float(ev[0]) for ev in eigvalsh(x))


def is_positive(x: AlgebraElement, tol: float = DEFAULT_PSD_TOL) -> bool:
    """True iff every block eigenvalue is >= -tol * max(1, ||x||).

    Raises:
        NotSelfadjoint: if ||x - x*|| exceeds the same scaled tolerance.
    """
    scale = _scale(x)
    if selfadjoint_defect(x) > tol * scale:
        raise NotSelfadjoint("element is not selfadjoint within tolerance")
    return min_eigenvalue(x) >= -tol * scale


# -- spectral calculus ----------------------------------------------------------

def _herm(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _rank_floor(evals: np.ndarray) -> float:
    # eigenvalues below this are indistinguishable from zero for eigh
    if evals.size == 0:
        return 0.0
    return evals.size * _EPS * max(float(np.abs(evals).max()), 0.0)


def functional_calculus(h: AlgebraElement, fn: Callable[[np.ndarray], np.ndarray]) -> AlgebraElement:
    """Apply *fn* to the spectrum of the selfadjoint element *h*, blockwise."""
    out = []
    for m in h.blocks:
        evals, vecs = np.linalg.eigh(_herm(m))
        out.append((vecs * fn(evals)) @ vecs.conj().T)
    return AlgebraElement._raw(h.algebra, out)


def _clamped_spectrum(m: np.ndarray, tol: float, scale: float):
    evals, vecs = np.linalg.eigh(_herm(m))
    if evals.size and evals[0] < -tol * scale:
        raise NotPositive(f"eigenvalue {evals[0]:.3e} below -{tol:g} * {scale:.3g}")
    evals = np.where(evals <= _rank_floor(evals), 0.0, evals)
    return evals, vecs


def sqrt_psd(a: AlgebraElement, tol: float = DEFAULT_PSD_TOL) -> AlgebraElement:
    """The unique positive square root of a positive element.

    Eigenvalues in ``[-tol * max(1, ||a||), 0)`` are clamped to zero, as are
    positive eigenvalues at the level of eigensolver roundoff.

    Raises:
        NotPositive: for any eigenvalue below the clamping window.
        NotSelfadjoint: if *a* is not selfadjoint within tolerance.
    """
    scale = _scale(a)
    if selfadjoint_defect(a) > tol * scale:
        raise NotSelfadjoint("sqrt_psd needs a selfadjoint element")
    out = []
    for m in a.blocks:
        evals, vecs = _clamped_spectrum(m, tol, scale)
        out.append((vecs * np.sqrt(evals)) @ vecs.conj().T)
    return AlgebraElement._raw(a.algebra, out)


def inverse_psd(a: AlgebraElement, floor: float = 1e-12) -> AlgebraElement:
    """Inverse of a positive element with eigenvalues floored at *floor*."""
    return functional_calculus(a, lambda t: 1.0 / np.maximum(t, floor))


def _gram_svd(m: np.ndarray):
    """Singular values and right singular vectors from eigh(m* m).

    Returns (s, V) with s sorted in decreasing order.
    """
    evals, vecs = np.linalg.eigh(_herm(m.conj().T @ m))
    evals = np.where(evals <= _rank_floor(evals), 0.0, evals)
    order = np.argsort(evals)[::-1]
    return np.sqrt(evals[order]), vecs[:, order]


def singular_values(z: AlgebraElement) -> list[np.ndarray]:
    """Decreasing singular values of each block."""
    return [_gram_svd(m)[0] for m in z.blocks]


def modulus(z: AlgebraElement) -> AlgebraElement:
    """|z| = (z* z)^(1/2), rebuilt as V diag(s) V* from the Gram eigensystem."""
    out = []
    for m in z.blocks:
        s, v = _gram_svd(m)
        out.append((v * s) @ v.conj().T)
    return AlgebraElement._raw(z.algebra, out)


def _complete_orthonormal(cols: np.ndarray, d: int) -> np.ndarray:
    """Extend orthonormal columns to a unitary by Gram-Schmidt on e_1, e_2, ..."""
    basis = [c for c in cols.T]
    for k in range(d):
        if len(basis) == d:
            break
        v = np.zeros(d, dtype=complex)
        v[k] = 1.0
        for _ in range(2):  # twice is enough for orthogonality to roundoff
            for b in basis:
                v = v - np.vdot(b, v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    return np.column_stack(basis) if basis else np.zeros((d, 0), dtype=complex)


def polar(z: AlgebraElement, rank_tol: float = 1e-12) -> tuple[AlgebraElement, AlgebraElement]:
    """Polar decomposition z = u |z| with u unitary.

    On the kernel of z the unitary is completed deterministically: the
    range vectors ``z v_i / s_i`` are orthonormalised in order of decreasing
    singular value, then Gram-Schmidt runs over the canonical basis in
    index order.
    """
    us, mods = [], []
    for m in z.blocks:
        d = m.shape[0]
        s, v = _gram_svd(m)
        top = float(s[0]) if s.size else 0.0
        rank = int(np.count_nonzero(s > rank_tol * top)) if top > 0 else 0
        w = (m @ v[:, :rank]) / s[:rank]
        if rank:
            # small singular values cost orthogonality in z v / s
            w = _orthonormalise(w)
        if rank == 0:
            us.append(np.eye(d, dtype=complex))  # any unitary works; take the identity
        else:
            us.append(_complete_orthonormal(w, d) @ v.conj().T)
        mods.append((v * s) @ v.conj().T)
    return AlgebraElement._raw(z.algebra, us), AlgebraElement._raw(z.algebra, mods)


def _orthonormalise(w: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(w)
    # fix the QR sign ambiguity so that q stays close to w
    phases = np.diag(r) / np.where(np.abs(np.diag(r)) > 0, np.abs(np.diag(r)), 1.0)
    return q * phases


# -- singular value function -------------------------------------------------------

@dataclass(frozen=True)
class StepFunction:
    """Nonincreasing step function given by ``(value, measure)`` steps.

    The function equals ``value_k`` on the k-th interval of length
    ``measure_k`` (intervals laid end to end from 0) and zero afterwards.
    """

    steps: tuple[tuple[float, float], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]],
                   merge_tol: float = DEFAULT_MERGE_TOL) -> "StepFunction":
        ordered = sorted(((float(v), float(m)) for v, m in pairs if m > 0 and v > 0),
                         key=lambda p: -p[0])
        merged: list[list[float]] = []
        for v, m in ordered:
            if merged and merged[-1][0] - v <= merge_tol:
                merged[-1][1] += m
            else:
                merged.append([v, m])
        return cls(tuple((v, m) for v, m in merged))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.steps])

    @property
    def measures(self) -> np.ndarray:
        return np.array([m for _, m in self.steps])

    @property
    def breakpoints(self) -> np.ndarray:
        """Right end points of the steps."""
        return np.cumsum(self.measures)

    @property
    def support(self) -> float:
        return float(self.measures.sum()) if self.steps else 0.0

    def integral(self) -> float:
        return float(np.dot(self.values, self.measures)) if self.steps else 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if not self.steps:
            return np.zeros_like(t)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        vals = np.append(self.values, 0.0)
        return vals[np.minimum(idx, len(self.steps))]

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "StepFunction":
        """Compose with a nondecreasing *fn* (fn(0) = 0)."""
        return StepFunction.from_pairs(zip(fn(self.values), self.measures))

    def max_difference(self, other: "StepFunction") -> float:
        """Sup-norm distance, evaluated on the union of both partitions."""
        edges = np.union1d(np.concatenate([[0.0], self.breakpoints]),
                           np.concatenate([[0.0], other.breakpoints]))
        if edges.size < 2:
            return 0.0
        mids = 0.5 * (edges[:-1] + edges[1:])
        return float(np.max(np.abs(self(mids) - other(mids))))


def singular_value_function(z: AlgebraElement, merge_tol: float = DEFAULT_MERGE_TOL) -> StepFunction:
    """Generalised singular value function mu_z as a step function.

    Each singular value of block b occupies an interval of length w_b, so
    the integral is tau(|z|).
    """
    pairs = []
    for w, s in zip(z.algebra.weights, singular_values(z)):
        pairs.extend((float(v), w) for v in s)
    return StepFunction.from_pairs(pairs, merge_tol)


def trace_norm(z: AlgebraElement) -> float:
    """||z||_1 = tau(|z|), integrated from the singular value function."""
    return singular_value_function(z).integral()


def are_orthogonal(x: AlgebraElement, y: AlgebraElement, tol: float = 1e-10) -> bool:
    """True iff xy, yx, x*y and xy* all vanish to within tol * max(1, ||x|| ||y||)."""
    same_algebra(x, y)
    bound = tol * max(1.0, x.norm() * y.norm())
    xa, ya = adjoint(x), adjoint(y)
    return all(p.norm() <= bound for p in (x @ y, y @ x, xa @ y, x @ ya))
