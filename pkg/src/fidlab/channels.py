"""Linear maps and Kraus channels on tracial algebras, with positivity certificates.

Maps are stored by their matrix in the matrix-unit basis: coordinates of
an element are the row-major entries of its blocks, concatenated (see
:meth:`AlgebraElement.to_vector`). The Choi matrix of a map
``Phi: M_d -> M_n`` is ``C = sum_ij e_ij (x) Phi(e_ij)``.

Sampled certificates are refutation-sound only: a ``True`` verdict means
"no violation among the samples drawn".
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import (AlgebraElement, TracialAlgebra, adjoint, are_orthogonal, same_algebra,
                      trace)
from .errors import (AlgebraMismatch, MultiBlockUnsupported, NotFidelityPreserving,
                     NotUnitaryImplementable, ValidationError)
from .fidelity import fidelity
from .sampling import (random_density, random_element, random_orthogonal_densities,
                       random_pure_density)

PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class LinearMap:
    """A linear map between tracial algebras, stored as its basis matrix.

    ``matrix`` has shape ``(codomain.dimension, domain.dimension)`` and acts on
    :meth:`AlgebraElement.to_vector` coordinates.
    """

    def __init__(self, domain: TracialAlgebra, codomain: TracialAlgebra, matrix):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (codomain.dimension, domain.dimension):
            raise ValidationError(
                f"map matrix has shape {matrix.shape}, expected "
                f"{(codomain.dimension, domain.dimension)}")
        matrix.flags.writeable = False
        self.domain = domain
        self.codomain = codomain
        self.matrix = matrix

    @classmethod
    def from_function(cls, fn: Callable[[AlgebraElement], AlgebraElement],
                      domain: TracialAlgebra, codomain: TracialAlgebra | None = None
                      ) -> "LinearMap":
        """Tabulate *fn* on the matrix units of *domain*."""
        codomain = domain if codomain is None else codomain
        cols = []
        for b, d in enumerate(domain.dims):
            for i in range(d):
                for j in range(d):
                    out = fn(AlgebraElement.matrix_unit(domain, b, i, j))
                    if out.algebra != codomain:
                        raise AlgebraMismatch("function output is not in the codomain")
                    cols.append(out.to_vector())
        return cls(domain, codomain, np.column_stack(cols))

    @classmethod
    def identity(cls, algebra: TracialAlgebra) -> "LinearMap":
        return cls(algebra, algebra, np.eye(algebra.dimension))

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.algebra != self.domain:
            raise AlgebraMismatch(f"map expects {self.domain!r}, got {x.algebra!r}")
        return AlgebraElement.from_vector(self.codomain, self.matrix @ x.to_vector())

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        """Composition: (self @ other)(x) = self(other(x))."""
        if other.codomain != self.domain:
            raise AlgebraMismatch("cannot compose maps with mismatched algebras")
        return LinearMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def _same_shape(self, other):
        if not isinstance(other, LinearMap):
            return False
        if (other.domain, other.codomain) != (self.domain, self.codomain):
            raise AlgebraMismatch("maps act between different algebras")
        return True

    def __add__(self, other):
        if not self._same_shape(other):
            return NotImplemented
        return LinearMap(self.domain, self.codomain, self.matrix + other.matrix)

    def __sub__(self, other):
        if not self._same_shape(other):
            return NotImplemented
        return LinearMap(self.domain, self.codomain, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return LinearMap(self.domain, self.codomain, scalar * self.matrix)

    __rmul__ = __mul__

    def __repr__(self):
        return f"LinearMap({self.domain!r} -> {self.codomain!r})"


@dataclass(frozen=True)
class KrausChannel:
    """rho -> sum_k a_k rho a_k*, trace preserving: sum_k a_k* a_k = 1."""

    algebra: TracialAlgebra
    kraus: tuple[AlgebraElement, ...]
    tp_tol: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        kraus = tuple(self.kraus)
        if not kraus:
            raise ValidationError("a channel needs at least one Kraus operator")
        same_algebra(AlgebraElement.identity(self.algebra), *kraus)
        object.__setattr__(self, "kraus", kraus)
        defect = kraus_defect(kraus)
        if defect > self.tp_tol:
            raise ValidationError(
                f"Kraus operators are not trace preserving: ||sum a*a - 1|| = {defect:.3e}")

    def __call__(self, rho: AlgebraElement) -> AlgebraElement:
        return apply(self, rho)

    def to_map(self) -> LinearMap:
        return LinearMap.from_function(self, self.algebra)

    def dual(self) -> LinearMap:
        return dual(self)


def kraus_defect(kraus: Sequence[AlgebraElement]) -> float:
    alg = kraus[0].algebra
    total = AlgebraElement.zeros(alg)
    for a in kraus:
        total = total + adjoint(a) @ a
    return (total - AlgebraElement.identity(alg)).norm()


# -- constructors for common channels and maps --------------------------------------

def unitary_channel(u: AlgebraElement) -> KrausChannel:
    return KrausChannel(u.algebra, (u,), tp_tol=1e-8)


def depolarizing(algebra: TracialAlgebra | int, p: float) -> KrausChannel:
    """rho_b -> (1 - p) rho_b + p Tr(rho_b) 1 / d_b on every block.

    Two-dimensional blocks use the Pauli Kraus family; larger blocks use
    the clock-and-shift (Weyl) operators.
    """
    if isinstance(algebra, int):
        algebra = TracialAlgebra.matrix(algebra)
    if not 0.0 <= p <= 1.0:
        raise ValidationError("depolarizing parameter must lie in [0, 1]")
    per_block = []
    for d in algebra.dims:
        if d == 2:
            ops = [np.sqrt(1 - 3 * p / 4) * PAULIS[0]] + [np.sqrt(p / 4) * s for s in PAULIS[1:]]
        else:
            ops = [np.sqrt(1 - p + p / d ** 2) * np.eye(d)]
            ops += [np.sqrt(p) / d * w for w in _weyl(d)[1:]]
        per_block.append(ops)
    return _pad_kraus(algebra, per_block)


def _weyl(d: int) -> list[np.ndarray]:
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(d) for b in range(d)]


def _pad_kraus(algebra: TracialAlgebra, per_block: list[list[np.ndarray]]) -> KrausChannel:
    n = max(len(ops) for ops in per_block)
    kraus = []
    for k in range(n):
        mats = [ops[k] if k < len(ops) else np.zeros((d, d))
                for ops, d in zip(per_block, algebra.dims)]
        kraus.append(AlgebraElement(algebra, mats))
    return KrausChannel(algebra, tuple(kraus))


def amplitude_damping(gamma: float) -> KrausChannel:
    alg = TracialAlgebra.matrix(2)
    a0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    a1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return KrausChannel(alg, (AlgebraElement(alg, [a0]), AlgebraElement(alg, [a1])))


def mix(first: KrausChannel, second: KrausChannel, p: float) -> KrausChannel:
    """Convex combination p * first + (1 - p) * second."""
    if first.algebra != second.algebra:
        raise AlgebraMismatch("cannot mix channels on different algebras")
    kraus = [np.sqrt(p) * a for a in first.kraus] + [np.sqrt(1 - p) * b for b in second.kraus]
    return KrausChannel(first.algebra, tuple(kraus))


def transpose_map(algebra: TracialAlgebra) -> LinearMap:
    return LinearMap.from_function(
        lambda x: AlgebraElement._raw(x.algebra, [m.T for m in x.blocks]), algebra)


def trace_collapse_map(algebra: TracialAlgebra) -> LinearMap:
    """x -> tau(x) 1 / tau(1)."""
    one = AlgebraElement.identity(algebra)
    return LinearMap.from_function(lambda x: (trace(x) / algebra.total_trace) * one, algebra)


def transpose_average_map(algebra: TracialAlgebra | None = None) -> LinearMap:
    """Average of the transpose and the normalised trace, x -> (x^T + tau(x) 1 / tau(1)) / 2.

    On M_2 this is a unital Schwarz map that is not 2-positive.
    """
    algebra = TracialAlgebra.matrix(2) if algebra is None else algebra
    return 0.5 * (transpose_map(algebra) + trace_collapse_map(algebra))


# -- application and duality -------------------------------------------------------------

def apply(ch: KrausChannel, rho: AlgebraElement) -> AlgebraElement:
    """sum_k a_k rho a_k*."""
    if rho.algebra != ch.algebra:
        raise AlgebraMismatch(f"channel acts on {ch.algebra!r}, got {rho.algebra!r}")
    out = [np.zeros_like(m) for m in rho.blocks]
    for a in ch.kraus:
        for b, (ab, rb) in enumerate(zip(a.blocks, rho.blocks)):
            out[b] = out[b] + ab @ rb @ ab.conj().T
    return AlgebraElement._raw(rho.algebra, out)


def _pairing(algebra: TracialAlgebra) -> tuple[np.ndarray, np.ndarray]:
    """Weight vector and transpose permutation so that tau(ab) = a^T diag(w) b[perm]."""
    w = np.concatenate([np.full(d * d, wt) for d, wt in zip(algebra.dims, algebra.weights)])
    perm = np.concatenate([o + np.arange(d * d).reshape(d, d).T.ravel()
                           for o, d in zip(algebra.offsets, algebra.dims)])
    return w, perm


def dual(ch: KrausChannel | LinearMap) -> LinearMap:
    """The trace dual E*, defined by tau(E(s) x) = tau(s E*(x)).

    For a Kraus channel this is x -> sum_k a_k* x a_k.
    """
    if isinstance(ch, KrausChannel):
        def heisenberg(x):
            out = AlgebraElement.zeros(ch.algebra)
            for a in ch.kraus:
                out = out + adjoint(a) @ x @ a
            return out
        return LinearMap.from_function(heisenberg, ch.algebra)
    wd, pd = _pairing(ch.domain)
    wc, pc = _pairing(ch.codomain)
    # M* = P_d W_d^-1 M^T W_c P_c
    mt = ch.matrix.T * wc[None, :]
    mt = mt[:, pc]
    mt = mt / wd[:, None]
    return LinearMap(ch.codomain, ch.domain, mt[pd, :])


def as_map(obj: KrausChannel | LinearMap) -> LinearMap:
    return obj.to_map() if isinstance(obj, KrausChannel) else obj


# -- Choi matrices and complete positivity ----------------------------------------------

def choi_block(phi: KrausChannel | LinearMap, src: int = 0, dst: int = 0) -> np.ndarray:
    """Choi matrix of the component M_{d_src} -> M_{d_dst} of a block map."""
    phi = as_map(phi)
    db, dc = phi.domain.dims[src], phi.codomain.dims[dst]
    ob, oc = phi.domain.offsets[src], phi.codomain.offsets[dst]
    sub = phi.matrix[oc:oc + dc * dc, ob:ob + db * db]
    # sub[(k, l), (i, j)] = Phi(e_ij)_kl ; C[(i, k), (j, l)] = Phi(e_ij)_kl
    t = sub.reshape(dc, dc, db, db).transpose(2, 0, 3, 1)
    return t.reshape(db * dc, db * dc)


def choi(phi: KrausChannel | LinearMap) -> np.ndarray:
    """C = sum_ij e_ij (x) Phi(e_ij) for a map between single-block algebras.

    Raises:
        MultiBlockUnsupported: use :func:`choi_block` for block algebras.
    """
    phi = as_map(phi)
    if phi.domain.n_blocks != 1 or phi.codomain.n_blocks != 1:
        raise MultiBlockUnsupported("choi() needs single-block algebras; use choi_block()")
    return choi_block(phi, 0, 0)


@dataclass(frozen=True)
class CPCertificate:
    verdict: bool
    min_choi_eigenvalue: float


def is_completely_positive(phi: KrausChannel | LinearMap, psd_tol: float = 1e-10) -> CPCertificate:
    """CP iff every block-pair Choi matrix is positive semidefinite."""
    phi = as_map(phi)
    worst = np.inf
    scale = 1.0
    for b in range(phi.domain.n_blocks):
        for c in range(phi.codomain.n_blocks):
            cm = choi_block(phi, b, c)
            evals = np.linalg.eigvalsh(0.5 * (cm + cm.conj().T))
            worst = min(worst, float(evals[0]))
            scale = max(scale, float(np.abs(evals).max()))
    return CPCertificate(bool(worst >= -psd_tol * scale), worst)


def is_trace_preserving(phi: KrausChannel | LinearMap, tol: float = 1e-10) -> bool:
    """tau(Phi(e_ij)) = tau(e_ij) for every matrix unit e_ij."""
    if isinstance(phi, KrausChannel):
        return kraus_defect(phi.kraus) <= tol
    wd, pd = _pairing(phi.domain)
    wc, pc = _pairing(phi.codomain)
    diag_c = (pc == np.arange(pc.size)).astype(float) * wc  # tau as a row vector
    diag_d = (pd == np.arange(pd.size)).astype(float) * wd
    return float(np.abs(diag_c @ phi.matrix - diag_d).max()) <= tol


# -- sampled certificates ---------------------------------------------------------------

@dataclass
class SampledCertificate:
    verdict: bool
    worst_violation: float
    n_samples: int
    counterexample: tuple[AlgebraElement, ...] | None = None

    @property
    def summary(self) -> str:
        if self.verdict:
            return f"no violation in {self.n_samples} samples"
        return f"violation {self.worst_violation:.3e} found"


def _unit_random(algebra, rng):
    x = random_element(algebra, rng)
    return x / x.norm()


def is_schwarz_sampled(phi: KrausChannel | LinearMap, n_samples: int = 1000, seed: int = 0,
                       tol: float = 1e-10) -> SampledCertificate:
    """Search for x with Phi(x*) Phi(x) not below Phi(x* x).

    Samples are random elements of unit norm; the reported violation is
    the most negative eigenvalue of Phi(x*x) - Phi(x*)Phi(x) divided by
    max(1, ||Phi(x*x)||).
    """
    phi = as_map(phi)
    rng = np.random.default_rng(seed)
    worst, witness = np.inf, None
    for _ in range(n_samples):
        x = _unit_random(phi.domain, rng)
        xa = adjoint(x)
        lhs = phi(xa @ x)
        gap = lhs - phi(xa) @ phi(x)
        scale = max(1.0, lhs.norm())
        low = min(float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]) for m in gap.blocks) / scale
        if low < worst:
            worst, witness = low, x
    ok = worst >= -tol
    return SampledCertificate(bool(ok), float(worst), n_samples, None if ok else (witness,))


def k_positivity_sampled(phi: KrausChannel | LinearMap, k: int, n_samples: int = 1000,
                         seed: int = 0, tol: float = 1e-10) -> SampledCertificate:
    """Look for a positive X in M_k(M_d) with (id_k (x) Phi)(X) not positive.

    Only refutes k-positivity; single-block maps only. Samples are rank-one
    projections, the extreme rays of the positive cone.
    """
    phi = as_map(phi)
    if phi.domain.n_blocks != 1 or phi.codomain.n_blocks != 1:
        raise MultiBlockUnsupported("k-positivity sampling needs single-block algebras")
    d, n = phi.domain.dims[0], phi.codomain.dims[0]
    rng = np.random.default_rng(seed)
    worst, witness = np.inf, None
    for _ in range(n_samples):
        v = rng.standard_normal(k * d) + 1j * rng.standard_normal(k * d)
        v /= np.linalg.norm(v)
        big = np.outer(v, v.conj())
        out = np.zeros((k * n, k * n), dtype=complex)
        for a in range(k):
            for b in range(k):
                blk = big[a * d:(a + 1) * d, b * d:(b + 1) * d]
                out[a * n:(a + 1) * n, b * n:(b + 1) * n] = (phi.matrix @ blk.ravel()).reshape(n, n)
        low = float(np.linalg.eigvalsh(0.5 * (out + out.conj().T))[0])
        if low < worst:
            worst, witness = low, big
    ok = worst >= -tol
    cex = None if ok else (AlgebraElement.from_matrix(witness),)
    return SampledCertificate(bool(ok), worst, n_samples, cex)


def is_order_zero_sampled(phi: KrausChannel | LinearMap, n_samples: int = 200, seed: int = 0,
                          tol: float = 1e-8) -> SampledCertificate:
    """Check that orthogonal positive pairs are mapped to orthogonal pairs.

    The reported violation is minus the largest of the products
    Phi(a)Phi(b), Phi(b)Phi(a) in norm.
    """
    phi = as_map(phi)
    rng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    if sum(phi.domain.dims) < 2:
        return SampledCertificate(True, 0.0, 0)
    for _ in range(n_samples):
        a, b = random_orthogonal_densities(phi.domain, rng)
        ea, eb = phi(a), phi(b)
        if not are_orthogonal(ea, eb, tol):
            size = max((ea @ eb).norm(), (eb @ ea).norm())
            if -size < worst:
                worst, witness = -size, (a, b)
    ok = witness is None
    return SampledCertificate(ok, float(worst), n_samples, witness)


def sample_fidelity_changes(phi: KrausChannel | LinearMap, n_pairs: int,
                            rng: np.random.Generator):
    """Yield (F(E s, E r) - F(s, r), s, r) over a mix of sampled pairs.

    Pairs alternate between full-rank Ginibre states, orthogonal states and
    pure states, so both strict contraction and orthogonality loss show up.
    """
    alg = phi.algebra if isinstance(phi, KrausChannel) else phi.domain
    for i in range(n_pairs):
        kind = i % 3
        if kind == 0:
            s, r = random_density(alg, rng), random_density(alg, rng)
        elif kind == 1 and sum(alg.dims) >= 2:
            s, r = random_orthogonal_densities(alg, rng)
        else:
            s, r = random_pure_density(alg, rng), random_pure_density(alg, rng)
        yield fidelity(phi(s), phi(r)) - fidelity(s, r), s, r


def recover_unitary(phi: KrausChannel | LinearMap, tol: float = 1e-8, *, check: bool = True,
                    n_pairs: int = 24, seed: int = 0,
                    classify_tol: float = 1e-8) -> AlgebraElement:
    """Reconstruct u with Phi(rho) = u rho u* from a fidelity-preserving map.

    Column 1 of u is the top eigenvector of Phi(e_11), phased so its first
    non-negligible entry is real and positive; column j is Phi(e_1j)* u_1.

    Raises:
        MultiBlockUnsupported: for algebras with more than one block.
        NotFidelityPreserving: if *check* and a sampled pair changes fidelity.
        NotUnitaryImplementable: if the reconstruction residual exceeds *tol*.
    """
    m = as_map(phi)
    alg = m.domain
    if alg.n_blocks != 1 or m.codomain != alg:
        raise MultiBlockUnsupported("unitary recovery needs a single-block endomorphism")
    if check:
        rng = np.random.default_rng(seed)
        for delta, _, _ in sample_fidelity_changes(m, n_pairs, rng):
            if abs(delta) > classify_tol:
                raise NotFidelityPreserving(f"fidelity changed by {delta:.3e} on a sampled pair")
    d = alg.dims[0]
    unit = lambda i, j: AlgebraElement.matrix_unit(alg, 0, i, j)  # noqa: E731
    p11 = m(unit(0, 0)).blocks[0]
    evals, vecs = np.linalg.eigh(0.5 * (p11 + p11.conj().T))
    u1 = vecs[:, -1]
    lead = np.flatnonzero(np.abs(u1) > 1e-8 * np.abs(u1).max())[0]
    u1 = u1 * (abs(u1[lead]) / u1[lead])
    cols = [u1] + [m(unit(0, j)).blocks[0].conj().T @ u1 for j in range(1, d)]
    u = np.column_stack(cols)
    residual = float(np.abs(u.conj().T @ u - np.eye(d)).max())
    for i in range(d):
        for j in range(d):
            expect = np.outer(u[:, i], u[:, j].conj())
            residual = max(residual, float(np.abs(m(unit(i, j)).blocks[0] - expect).max()))
    if residual > tol:
        raise NotUnitaryImplementable(f"reconstruction residual {residual:.3e} exceeds {tol:g}")
    return AlgebraElement(alg, [u])


def phase_distance(u: AlgebraElement, v: AlgebraElement) -> float:
    """min over theta of ||u - e^{i theta} v|| in Frobenius norm."""
    a, b = u.blocks[0], v.blocks[0]
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))
