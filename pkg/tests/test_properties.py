"""Hypothesis property tests over random algebras, states and channels."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from fidlab.algebra import TracialAlgebra, singular_value_function, trace
from fidlab.car import car_level, embed_many, level_of
from fidlab.channels import KrausChannel, dual
from fidlab.fidelity import bures_distance, fidelity, fidelity_bounds, fidelity_via_mu
from fidlab.sampling import random_density, random_element, random_kraus, random_positive

from oracles import fidelity_oracle

blocks = st.lists(st.tuples(st.integers(1, 3), st.sampled_from([0.25, 0.5, 1.0, 2.0])),
                  min_size=1, max_size=3)
seeds = st.integers(0, 2**32 - 1)
SETTINGS = settings(max_examples=60, deadline=None)


def pair(spec, seed):
    alg = TracialAlgebra(spec)
    rng = np.random.default_rng(seed)
    return alg, rng, random_density(alg, rng), random_density(alg, rng)


@SETTINGS
@given(blocks, seeds)
def test_fidelity_in_unit_interval_and_symmetric(spec, seed):
    _, _, s, r = pair(spec, seed)
    f = fidelity(s, r)
    assert -1e-12 <= f <= 1 + 1e-10
    assert abs(f - fidelity(r, s)) <= 1e-10


@SETTINGS
@given(blocks, seeds)
def test_matches_oracle_and_mu(spec, seed):
    alg, _, s, r = pair(spec, seed)
    f = fidelity(s, r)
    assert abs(f - fidelity_oracle(s.blocks, r.blocks, alg.weights)) <= 1e-9
    assert abs(f - fidelity_via_mu(s, r)) <= 1e-10


@SETTINGS
@given(blocks, seeds, st.integers(1, 3))
def test_monotone_under_channels(spec, seed, n_kraus):
    alg, rng, s, r = pair(spec, seed)
    ch = KrausChannel(alg, tuple(random_kraus(alg, rng, n_kraus)))
    assert fidelity(ch(s), ch(r)) >= fidelity(s, r) - 1e-9


@SETTINGS
@given(blocks, seeds)
def test_bures_triangle(spec, seed):
    alg, rng, a, b = pair(spec, seed)
    c = random_density(alg, rng)
    gap = bures_distance(a, c) - bures_distance(a, b) - bures_distance(b, c)
    assert gap <= 1e-10


@SETTINGS
@given(blocks, seeds, st.floats(0.1, 10))
def test_bounds_and_homogeneity(spec, seed, lam):
    alg, rng, _, _ = pair(spec, seed)
    a, b = random_positive(alg, rng), random_positive(alg, rng)
    f, bound = fidelity_bounds(a, b)
    assert f <= bound * (1 + 1e-10)
    f2, _ = fidelity_bounds(lam * a, lam * b)
    assert abs(f2 - lam * f) <= 1e-9 * max(1.0, lam * f)


@SETTINGS
@given(blocks, seeds)
def test_dual_pairing(spec, seed):
    alg, rng, _, _ = pair(spec, seed)
    ch = KrausChannel(alg, tuple(random_kraus(alg, rng, 2)))
    star = dual(ch)
    s, x = random_element(alg, rng), random_element(alg, rng)
    assert abs(trace(ch(s) @ x) - trace(s @ star(x))) <= 1e-9 * (1 + s.norm() * x.norm())


@SETTINGS
@given(blocks, seeds)
def test_mu_integral(spec, seed):
    alg, rng, _, _ = pair(spec, seed)
    z = random_element(alg, rng)
    assert abs(singular_value_function(z).integral() - trace(abs(z)).real) <= 1e-9 * (1 + z.norm())


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_car_embedding_preserves_fidelity(k, depth, seed):
    rng = np.random.default_rng(seed)
    alg = car_level(k)
    s, r = random_density(alg, rng), random_density(alg, rng)
    es, er = embed_many(s, depth), embed_many(r, depth)
    assert level_of(es) == k + depth
    assert abs(trace(es) - 1) <= 1e-12
    assert abs(fidelity(es, er) - fidelity(s, r)) <= 1e-10
