import numpy as np
import pytest

from fidlab.algebra import AlgebraElement, TracialAlgebra, trace
from fidlab.errors import AlgebraMismatch, NonConvergence, NotPositive
from fidlab.fidelity import (OptimizerConfig, Route, bures_distance, closed_form_witness,
                             fidelity, fidelity_block_supremum, fidelity_bounds, fidelity_routes,
                             fidelity_variational, fidelity_via_mu, max_disagreement,
                             trace_variational, var1_gradient, var1_objective, var2_objective)
from fidlab.sampling import (random_density, random_orthogonal_densities, random_positive,
                             random_pure_density)

from oracles import fidelity_oracle

SQRT_HALF = 0.7071067811865476


def el(mat, weight=1.0):
    return AlgebraElement.from_matrix(np.asarray(mat, dtype=complex), weight)


KET0 = el(np.diag([1.0, 0.0]))
KET1 = el(np.diag([0.0, 1.0]))
KETPLUS = el(np.full((2, 2), 0.5))
HALF = el(np.eye(2) / 2)


class TestDirect:
    def test_equal(self, two_block, rng):
        rho = random_density(two_block, rng)
        assert fidelity(rho, rho) == pytest.approx(1, abs=1e-12)

    def test_orthogonal(self):
        assert fidelity(KET0, KET1) == pytest.approx(0, abs=1e-15)

    def test_pure_overlap(self):
        assert fidelity(KET0, KETPLUS) == pytest.approx(SQRT_HALF, abs=1e-14)

    def test_commuting(self):
        s, r = el(np.diag([0.75, 0.25])), el(np.diag([0.25, 0.75]))
        oracle = np.sum(np.sqrt([0.75 * 0.25, 0.25 * 0.75]))
        assert fidelity(s, r) == pytest.approx(oracle, abs=1e-14)
        assert fidelity(s, r) == pytest.approx(0.8660254037844386, abs=1e-14)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_against_oracle(self, d, rng):
        alg = TracialAlgebra.matrix(d)
        for _ in range(10):
            s, r = random_density(alg, rng), random_density(alg, rng)
            expect = fidelity_oracle(s.blocks, r.blocks, alg.weights)
            assert fidelity(s, r) == pytest.approx(expect, abs=1e-10)

    def test_against_oracle_two_block(self, two_block, rng):
        for _ in range(10):
            s, r = random_density(two_block, rng), random_density(two_block, rng)
            expect = fidelity_oracle(s.blocks, r.blocks, two_block.weights)
            assert fidelity(s, r) == pytest.approx(expect, abs=1e-10)

    def test_mismatch(self, m2, two_block, rng):
        with pytest.raises(AlgebraMismatch):
            fidelity(random_density(m2, rng), random_density(two_block, rng))


class TestMu:
    def test_examples(self, two_block, rng):
        rho = random_density(two_block, rng)
        assert fidelity_via_mu(rho, rho) == pytest.approx(1, abs=1e-12)
        assert fidelity_via_mu(KET0, HALF) == pytest.approx(SQRT_HALF, abs=1e-14)

    def test_symmetric(self, two_block, rng):
        s, r = random_density(two_block, rng), random_density(two_block, rng)
        assert abs(fidelity_via_mu(s, r) - fidelity_via_mu(r, s)) <= 1e-12

    def test_matches_direct(self, two_block, rng):
        for _ in range(10):
            s, r = random_density(two_block, rng, rank=1), random_density(two_block, rng)
            assert abs(fidelity_via_mu(s, r) - fidelity(s, r)) <= 1e-10


class TestVariational:
    def test_var1_equal_states(self, rng):
        rho = random_density(TracialAlgebra.matrix(3), rng)
        w = fidelity_variational(rho, rho, Route.VAR1)
        assert w.objective_value == pytest.approx(2, abs=1e-9)
        assert w.y.allclose(AlgebraElement.identity(rho.algebra), 1e-6)

    def test_var1_singular_pair(self):
        w = fidelity_variational(KET0, HALF, "var1")
        assert w.objective_value == pytest.approx(2 * SQRT_HALF, abs=1e-6)
        assert w.epsilon > 0  # the seed came from the regularised pair

    def test_var1_full_rank(self, two_block, rng):
        for _ in range(5):
            s, r = random_density(two_block, rng), random_density(two_block, rng)
            w = fidelity_variational(s, r, "var1")
            assert w.converged and w.epsilon == 0
            assert w.value == pytest.approx(fidelity(s, r), abs=1e-8)
            assert w.objective_value >= 2 * fidelity(s, r) - 1e-6

    def test_history_nonincreasing(self, rng):
        alg = TracialAlgebra.matrix(4)
        s, r = random_density(alg, rng), random_density(alg, rng)
        for route in ("var1", "var2"):
            w = fidelity_variational(s, r, route, initial=AlgebraElement.identity(alg))
            assert np.all(np.diff(w.history) <= 1e-12)

    def test_closed_form_witness_stationary(self, two_block, rng):
        for _ in range(10):
            s, r = random_density(two_block, rng), random_density(two_block, rng)
            y = closed_form_witness(s, r)
            assert (y @ r @ y).allclose(s, 1e-10)
            assert var1_gradient(s, r, y).norm() <= 1e-6 * r.norm()
            assert var1_objective(s, r, y) / 2 == pytest.approx(fidelity(s, r), abs=1e-10)

    def test_objectives_at_identity(self, two_block, rng):
        s, r = random_density(two_block, rng), random_density(two_block, rng)
        one = AlgebraElement.identity(two_block)
        assert var1_objective(s, r, one) == pytest.approx(2.0, abs=1e-12)
        assert var2_objective(s, r, one) == pytest.approx(4.0, abs=1e-12)
        assert var2_objective(s, r, one) >= 4 * fidelity(s, r)

    def test_var2_objective_collapses_to_sum(self, two_block, rng):
        # tau(sigma y) + tau(sigma y^-1) + tau(rho y) + tau(rho y^-1)
        #   = tau((sigma + rho)(y + y^-1)) >= 2 tau(sigma + rho), equality at y = 1,
        # so a quarter of the infimum is tau(sigma + rho) / 2 whatever the fidelity.
        for _ in range(5):
            s, r = random_density(two_block, rng), random_density(two_block, rng)
            h = random_positive(two_block, rng)
            y = h + 0.1 * AlgebraElement.identity(two_block)
            yi = AlgebraElement(two_block, [np.linalg.inv(m) for m in y.blocks])
            assert var2_objective(s, r, y) == pytest.approx(
                trace((s + r) @ (y + yi)).real, rel=1e-10)
            w = fidelity_variational(s, r, "var2")
            assert w.value == pytest.approx(trace(s + r).real / 2, abs=1e-9)
        # orthogonal states: fidelity 0, yet the route gives 1
        w = fidelity_variational(KET0, KET1, "var2")
        assert fidelity(KET0, KET1) == 0
        assert w.value == pytest.approx(1.0, abs=1e-8)

    def test_nonconvergence_raises(self, rng):
        alg = TracialAlgebra.matrix(6)
        s, r = random_density(alg, rng), random_density(alg, rng)
        cfg = OptimizerConfig(max_iterations=1, grad_tol=1e-30, rel_tol=0.0)
        with pytest.raises(NonConvergence) as info:
            fidelity_variational(s, r, "var1", cfg, initial=AlgebraElement.identity(alg))
        assert info.value.witness is not None


class TestTraceVariational:
    def test_identity(self, m2):
        w = trace_variational(AlgebraElement.identity(m2))
        assert w.value == pytest.approx(2, abs=1e-6)

    def test_diag(self):
        w = trace_variational(el(np.diag([3.0, 1.0])), initial=el(np.diag([2.0, 0.5])))
        assert w.value == pytest.approx(4, abs=1e-6)
        assert w.y.allclose(AlgebraElement.identity(w.y.algebra), 1e-6)

    def test_density(self, two_block, rng):
        assert trace_variational(random_density(two_block, rng)).value == pytest.approx(1, abs=1e-6)

    def test_not_positive(self):
        with pytest.raises(NotPositive):
            trace_variational(el(np.diag([1.0, -1.0])))


class TestBlockSupremum:
    def test_equal(self, rng):
        rho = random_density(TracialAlgebra.matrix(3), rng)
        value, w = fidelity_block_supremum(rho, rho)
        assert value == pytest.approx(1, abs=1e-12)
        assert w.x.allclose(rho, 1e-10)

    def test_orthogonal(self):
        value, _ = fidelity_block_supremum(KET0, KET1)
        assert value == pytest.approx(0, abs=1e-15)

    def test_singular(self):
        value, w = fidelity_block_supremum(KET0, HALF)
        assert value == pytest.approx(SQRT_HALF, abs=1e-12)
        assert w.block_min_eigenvalue >= -1e-12
        assert w.contraction.norm() <= 1 + 1e-10

    def test_sampled_contractions_bounded(self, two_block, rng):
        for _ in range(5):
            s, r = random_density(two_block, rng), random_density(two_block, rng)
            value, w = fidelity_block_supremum(s, r, n_samples=64, rng=rng)
            assert w.sampled_max <= value + 1e-9
            assert abs(value - fidelity(s, r)) <= 1e-10


class TestBures:
    def test_examples(self, rng):
        rho = random_density(TracialAlgebra.matrix(2), rng)
        assert bures_distance(rho, rho) == pytest.approx(0, abs=1e-6)
        assert bures_distance(KET0, KET1) == 1.0
        assert bures_distance(KET0, HALF) == pytest.approx(np.sqrt(1 - SQRT_HALF), abs=1e-12)


class TestBounds:
    def test_densities(self, two_block, rng):
        s, r = random_density(two_block, rng), random_density(two_block, rng)
        f, bound = fidelity_bounds(s, r)
        assert bound == pytest.approx(1)
        assert f <= 1

    def test_homogeneous(self, two_block, rng):
        s, r = random_density(two_block, rng), random_density(two_block, rng)
        f, _ = fidelity_bounds(s, r)
        f2, b2 = fidelity_bounds(2 * s, 2 * r)
        assert f2 == pytest.approx(2 * f, rel=1e-12)
        assert b2 == pytest.approx(2)

    def test_equality(self):
        a = el(np.diag([3.0, 1.0]))
        f, b = fidelity_bounds(a, a)
        assert f == pytest.approx(4) and b == pytest.approx(4)

    def test_rejects_non_positive(self):
        with pytest.raises(NotPositive):
            fidelity_bounds(el(np.diag([1.0, -1.0])), HALF)


class TestAxioms:
    def test_zero_iff_orthogonal(self, two_block, rng):
        from fidlab.algebra import are_orthogonal
        for _ in range(10):
            a, b = random_orthogonal_densities(two_block, rng)
            assert fidelity(a, b) <= 1e-8 and are_orthogonal(a, b, 1e-6)
            # tilt b slightly toward a: no longer orthogonal, fidelity positive
            near = 0.999 * b + 0.001 * a
            assert fidelity(a, near) > 1e-8 and not are_orthogonal(a, near, 1e-6)

    def test_one_iff_equal(self, two_block, rng):
        from fidlab.algebra import trace_norm
        for _ in range(10):
            s, r = random_density(two_block, rng), random_density(two_block, rng)
            for delta in (1e-1, 1e-3):
                mix = (1 - delta) * s + delta * r
                f = fidelity(s, mix)
                assert f < 1
                if f >= 1 - 1e-10:
                    assert trace_norm(s - mix) <= 1e-4
            p = random_pure_density(two_block, rng)
            assert fidelity(p, p) == pytest.approx(1, abs=1e-12)


def test_routes_report(two_block, rng):
    s, r = random_density(two_block, rng), random_density(two_block, rng)
    values, diag = fidelity_routes(s, r, rng=rng)
    assert set(values) == {"direct", "mu", "var1", "var2", "block"}
    exact = {k: values[k] for k in ("direct", "mu", "block")}
    assert max_disagreement(exact) <= 1e-10
    assert abs(values["var1"] - values["direct"]) <= 1e-6
    assert diag["var1"]["converged"]
    with pytest.raises(ValueError):
        fidelity_routes(s, r, routes=("nope",))
