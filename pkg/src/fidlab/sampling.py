"""Random elements, states, unitaries and channels.

All samplers take an explicit :class:`numpy.random.Generator`; nothing in
fidlab touches global random state.
"""
from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra, trace


def ginibre(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """d x k matrix with i.i.d. standard complex Gaussian entries."""
    return (rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))) / np.sqrt(2)


def haar_unitary_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    # QR of a Ginibre matrix, with R's diagonal phases absorbed (Mezzadri)
    q, r = np.linalg.qr(ginibre(d, d, rng))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_isometry_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rows, cols, rng))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_element(algebra: TracialAlgebra, rng: np.random.Generator) -> AlgebraElement:
    return AlgebraElement(algebra, [ginibre(d, d, rng) for d in algebra.dims])


def random_hermitian(algebra: TracialAlgebra, rng: np.random.Generator) -> AlgebraElement:
    g = random_element(algebra, rng)
    return (g + g.H) / 2


def random_unitary(algebra: TracialAlgebra, rng: np.random.Generator) -> AlgebraElement:
    return AlgebraElement(algebra, [haar_unitary_matrix(d, rng) for d in algebra.dims])


def random_positive(algebra: TracialAlgebra, rng: np.random.Generator,
                    rank: int | None = None) -> AlgebraElement:
    """g g* for Ginibre g, with g of at most *rank* columns per block."""
    mats = []
    for d in algebra.dims:
        g = ginibre(d, d if rank is None else min(rank, d), rng)
        mats.append(g @ g.conj().T)
    return AlgebraElement(algebra, mats)


def random_density(algebra: TracialAlgebra, rng: np.random.Generator,
                   rank: int | None = None) -> AlgebraElement:
    """Ginibre-induced random tau-state, g g* / tau(g g*)."""
    a = random_positive(algebra, rng, rank)
    return a / trace(a).real


def random_pure_density(algebra: TracialAlgebra, rng: np.random.Generator) -> AlgebraElement:
    """Rank-one tau-state supported in a single, randomly chosen block."""
    b = int(rng.integers(algebra.n_blocks))
    mats = [np.zeros((d, d), dtype=complex) for d in algebra.dims]
    v = ginibre(algebra.dims[b], 1, rng)[:, 0]
    v /= np.linalg.norm(v)
    mats[b] = np.outer(v, v.conj()) / algebra.weights[b]
    return AlgebraElement(algebra, mats)


def random_orthogonal_densities(algebra: TracialAlgebra, rng: np.random.Generator,
                                ) -> tuple[AlgebraElement, AlgebraElement]:
    """Two tau-states with complementary spectral supports.

    Each block's eigenbasis is split at a random cut; one state lives on the
    first part, the other on the second. Needs total dimension >= 2.
    """
    total = sum(algebra.dims)
    if total < 2:
        raise ValueError("orthogonal states need at least two dimensions")
    while True:
        cuts = [int(rng.integers(0, d + 1)) for d in algebra.dims]
        lo = sum(cuts)
        if 0 < lo < total:
            break
    a_mats, b_mats = [], []
    for d, cut in zip(algebra.dims, cuts):
        u = haar_unitary_matrix(d, rng)
        pa = np.concatenate([rng.uniform(0.1, 1.0, cut), np.zeros(d - cut)])
        pb = np.concatenate([np.zeros(cut), rng.uniform(0.1, 1.0, d - cut)])
        a_mats.append((u * pa) @ u.conj().T)
        b_mats.append((u * pb) @ u.conj().T)
    a = AlgebraElement(algebra, a_mats)
    b = AlgebraElement(algebra, b_mats)
    return a / trace(a).real, b / trace(b).real


def random_contraction(algebra: TracialAlgebra, rng: np.random.Generator) -> AlgebraElement:
    """Random element of operator norm at most one."""
    g = random_element(algebra, rng)
    return g / (g.norm() * rng.uniform(1.0, 2.0))


def random_kraus(algebra: TracialAlgebra, rng: np.random.Generator,
                 n_kraus: int = 2) -> list[AlgebraElement]:
    """Kraus family cut from a Haar-random Stinespring isometry.

    For each block, a random isometry V: C^d -> C^(n_kraus d) is split into
    n_kraus row blocks; ``sum_k a_k* a_k = V* V = 1`` holds exactly.
    """
    per_block = []
    for d in algebra.dims:
        v = haar_isometry_matrix(n_kraus * d, d, rng)
        per_block.append([v[k * d:(k + 1) * d] for k in range(n_kraus)])
    return [AlgebraElement(algebra, [blocks[k] for blocks in per_block])
            for k in range(n_kraus)]
