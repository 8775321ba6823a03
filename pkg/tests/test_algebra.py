import numpy as np
import pytest

from fidlab.algebra import (AlgebraElement, DensityElement, StepFunction, TracialAlgebra,
                            adjoint, are_orthogonal, functional_calculus, is_positive, modulus,
                            polar, singular_value_function, sqrt_psd, trace, trace_norm)
from fidlab.errors import (AlgebraMismatch, NotNormalized, NotPositive, NotSelfadjoint,
                           ValidationError)
from fidlab.sampling import random_density, random_element, random_positive, random_unitary


def el(mat, weight=1.0):
    return AlgebraElement.from_matrix(np.asarray(mat, dtype=complex), weight)


class TestTracialAlgebra:
    def test_total_trace(self, two_block):
        assert two_block.total_trace == 2 * 1.0 + 3 * 0.5
        assert two_block.dims == (2, 3)
        assert two_block.dimension == 4 + 9

    @pytest.mark.parametrize("blocks", [[(0, 1.0)], [(2, 0.0)], [(2, -1.0)], [(2.5, 1.0)], []])
    def test_rejects_bad_blocks(self, blocks):
        with pytest.raises(ValidationError):
            TracialAlgebra(blocks)

    def test_equality_and_hash(self):
        assert TracialAlgebra.matrix(3) == TracialAlgebra([(3, 1.0)])
        assert hash(TracialAlgebra.matrix(3)) == hash(TracialAlgebra([(3, 1.0)]))
        assert TracialAlgebra.matrix(3) != TracialAlgebra.matrix(3, 0.5)


class TestTrace:
    def test_identity_m2(self, m2):
        assert trace(AlgebraElement.identity(m2)) == 2

    def test_identity_normalised_level(self):
        assert trace(AlgebraElement.identity(TracialAlgebra.matrix(4, 0.25))) == 1

    def test_diagonal(self):
        assert trace(el(np.diag([3, 1]))) == 4

    def test_weights_enter(self, two_block):
        x = AlgebraElement(two_block, [np.eye(2), 2 * np.eye(3)])
        assert trace(x) == pytest.approx(2 + 0.5 * 6)

    def test_trace_property(self, two_block, rng):
        for _ in range(20):
            x, y = random_element(two_block, rng), random_element(two_block, rng)
            bound = 1e-12 * x.norm() * y.norm() * two_block.total_trace
            assert abs(trace(x @ y) - trace(y @ x)) <= bound

    def test_faithful(self, two_block, rng):
        x = random_element(two_block, rng)
        assert trace(adjoint(x) @ x).real > 0
        assert trace(adjoint(x) @ x).imag == pytest.approx(0, abs=1e-12)


class TestAdjointAndPositivity:
    def test_hermitian_fixed(self, rng):
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h = el(g + g.conj().T)
        assert adjoint(h) == h

    def test_matrix_unit(self, m2):
        assert adjoint(AlgebraElement.matrix_unit(m2, 0, 0, 1)) == AlgebraElement.matrix_unit(m2, 0, 1, 0)

    def test_imaginary_scalar(self, m2):
        one = AlgebraElement.identity(m2)
        assert adjoint(1j * one) == -1j * one

    def test_is_positive(self):
        assert is_positive(el(np.diag([1, 0])))
        assert not is_positive(el(np.diag([1, -1e-3])), tol=1e-10)

    def test_not_selfadjoint(self, m2):
        with pytest.raises(NotSelfadjoint):
            is_positive(AlgebraElement.matrix_unit(m2, 0, 0, 1))

    def test_mismatch(self, m2, two_block):
        with pytest.raises(AlgebraMismatch):
            AlgebraElement.identity(m2) + AlgebraElement.identity(two_block)
        with pytest.raises(AlgebraMismatch):
            AlgebraElement.identity(m2) @ AlgebraElement.identity(TracialAlgebra.matrix(2, 0.5))

    def test_block_shape_checked(self, two_block):
        with pytest.raises(ValidationError):
            AlgebraElement(two_block, [np.eye(2), np.eye(2)])


class TestDensityElement:
    def test_valid(self, two_block, rng):
        rho = DensityElement(random_density(two_block, rng))
        assert trace(rho).real == pytest.approx(1)

    def test_not_normalised(self):
        with pytest.raises(NotNormalized):
            DensityElement(el(np.eye(2)))

    def test_not_positive(self):
        with pytest.raises(NotPositive):
            DensityElement(el(np.diag([1.5, -0.5])))

    def test_tiny_negative_accepted(self):
        DensityElement(el(np.diag([1.0 + 1e-13, -1e-13])))


class TestSqrtAndModulus:
    def test_diag(self):
        assert sqrt_psd(el(np.diag([4, 9]))).allclose(el(np.diag([2, 3])), 1e-14)

    def test_identity(self, two_block):
        one = AlgebraElement.identity(two_block)
        assert sqrt_psd(one).allclose(one, 1e-15)

    def test_projector(self, rng):
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        p = el(np.outer(v, v.conj()) / np.vdot(v, v))
        assert sqrt_psd(p).allclose(p, 1e-12)

    def test_fourth_power(self, two_block, rng):
        for _ in range(10):
            a = random_positive(two_block, rng)
            r = sqrt_psd(sqrt_psd(a))
            r4 = r @ r @ r @ r
            a2 = a @ a
            assert (r4 @ r4 - a2).norm() <= 1e-9 * a2.norm()

    def test_rejects_negative(self):
        with pytest.raises(NotPositive):
            sqrt_psd(el(np.diag([1, -0.1])))

    def test_modulus_examples(self, m2, rng):
        assert modulus(el(np.diag([-2, 3]))).allclose(el(np.diag([2, 3])), 1e-14)
        u = random_unitary(m2, rng)
        assert modulus(u).allclose(AlgebraElement.identity(m2), 1e-12)
        e12 = AlgebraElement.matrix_unit(m2, 0, 0, 1)
        assert abs(e12).allclose(AlgebraElement.matrix_unit(m2, 0, 1, 1), 1e-14)

    def test_modulus_sign(self, two_block, rng):
        z = random_element(two_block, rng)
        assert abs(z).allclose(abs(-z), 1e-12)

    def test_functional_calculus(self):
        h = el(np.diag([1.0, 4.0]))
        assert functional_calculus(h, np.sqrt).allclose(el(np.diag([1.0, 2.0])))


class TestPolar:
    def test_reconstructs(self, two_block, rng):
        z = random_element(two_block, rng)
        u, mod = polar(z)
        assert (u @ mod).allclose(z, 1e-12)
        assert (u.H @ u).allclose(AlgebraElement.identity(two_block), 1e-12)

    def test_rank_deficient_completion(self, rng):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        z = el(np.outer(v, w.conj()))
        u, mod = polar(z)
        assert (u @ mod).allclose(z, 1e-12)
        np.testing.assert_allclose(u.blocks[0].conj().T @ u.blocks[0], np.eye(4), atol=1e-12)
        # deterministic completion
        u2, _ = polar(z)
        assert u == u2

    def test_zero(self, m2):
        u, mod = polar(AlgebraElement.zeros(m2))
        assert u.allclose(AlgebraElement.identity(m2))
        assert mod.allclose(AlgebraElement.zeros(m2))


class TestSingularValueFunction:
    def test_diag(self):
        mu = singular_value_function(el(np.diag([3, 1])))
        assert mu.steps == ((3.0, 1.0), (1.0, 1.0))
        assert mu.integral() == pytest.approx(4)

    def test_weighted(self):
        mu = singular_value_function(el(np.diag([3, 1]), 0.5))
        assert mu.steps == ((3.0, 0.5), (1.0, 0.5))
        assert mu.integral() == pytest.approx(2)

    def test_zero(self, m2):
        mu = singular_value_function(AlgebraElement.zeros(m2))
        assert mu.steps == ()
        assert mu.integral() == 0

    def test_merges_equal_values(self, two_block):
        mu = singular_value_function(AlgebraElement.identity(two_block))
        assert mu.steps == ((1.0, 3.5),)

    def test_integral_is_trace_of_modulus(self, two_block, rng):
        z = random_element(two_block, rng)
        assert singular_value_function(z).integral() == pytest.approx(trace(abs(z)).real, rel=1e-12)

    def test_symmetry(self, two_block, rng):
        for _ in range(10):
            w, z = random_element(two_block, rng), random_element(two_block, rng)
            a = singular_value_function(w @ z.H)
            b = singular_value_function(z @ w.H)
            assert a.max_difference(b) <= 1e-10

    @pytest.mark.parametrize("fn", [np.square, np.sqrt, lambda t: t / (1 + t)])
    def test_functional_calculus(self, two_block, rng, fn):
        h = random_positive(two_block, rng)
        lhs = singular_value_function(functional_calculus(h, fn))
        rhs = singular_value_function(h).map(fn)
        assert lhs.max_difference(rhs) <= 1e-10

    def test_evaluation(self):
        mu = StepFunction.from_pairs([(3, 1), (1, 1)])
        np.testing.assert_array_equal(mu([0.0, 0.5, 1.5, 2.5]), [3, 3, 1, 0])


class TestTraceNormAndOrthogonality:
    def test_examples(self, m2, rng):
        assert trace_norm(random_density(m2, rng)) == pytest.approx(1, abs=1e-12)
        assert trace_norm(el(np.diag([1, -1]))) == pytest.approx(2)
        assert trace_norm(AlgebraElement.matrix_unit(m2, 0, 0, 1)) == pytest.approx(1)

    def test_homogeneous(self, two_block, rng):
        z = random_element(two_block, rng)
        lam = 2.5 - 1.5j
        assert trace_norm(lam * z) == pytest.approx(abs(lam) * trace_norm(z), rel=1e-12)

    def test_orthogonal(self, m2, rng):
        assert are_orthogonal(el(np.diag([1, 0])), el(np.diag([0, 1])))
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        p = el(np.outer(v, v.conj()) / np.vdot(v, v))
        assert are_orthogonal(p, AlgebraElement.identity(p.algebra) - p)
        one = AlgebraElement.identity(m2)
        assert not are_orthogonal(one, one)


def test_vector_round_trip(two_block, rng):
    x = random_element(two_block, rng)
    assert AlgebraElement.from_vector(two_block, x.to_vector()) == x
