import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mrnldp import (
    Alphabet,
    DomainError,
    StructureError,
    kernel_product,
    kullback_action,
    kullback_variational_gap,
    relative_entropy,
    spectral_potential,
    total_variation,
)
from mrnldp.measures import as_kernel, as_probability, total_variation_dict


def prob_vectors(m):
    return arrays(float, m, elements=st.floats(0.01, 1.0)).map(lambda w: w / w.sum())


def kernels(m):
    return arrays(float, (m, m), elements=st.floats(0.0, 5.0)).map(lambda c: (c + c.T) / 2)


def pair_measures(m):
    return arrays(float, (m, m), elements=st.floats(0.0, 5.0))


class TestAlphabet:
    def test_index(self):
        A = Alphabet(("x", "y"))
        assert A.m == 2 and A.index("y") == 1
        with pytest.raises(KeyError):
            A.index("z")

    @pytest.mark.parametrize("labels", [(), ("a", "a"), ("a b",), ("",)])
    def test_rejects(self, labels):
        with pytest.raises(DomainError):
            Alphabet(labels)


class TestValidators:
    def test_probability_sum(self):
        with pytest.raises(DomainError):
            as_probability([0.5, 0.4])

    def test_probability_negative(self):
        with pytest.raises(DomainError):
            as_probability([1.5, -0.5])

    def test_probability_shape(self):
        with pytest.raises(StructureError):
            as_probability([0.5, 0.5], m=3)

    def test_kernel_symmetry(self):
        with pytest.raises(DomainError):
            as_kernel([[1.0, 2.0], [3.0, 1.0]], symmetric=True)
        as_kernel([[1.0, 2.0], [3.0, 1.0]], symmetric=False)


class TestRelativeEntropy:
    def test_self_is_zero(self):
        rho = np.array([0.2, 0.3, 0.5])
        assert relative_entropy(rho, rho) == 0.0

    def test_value(self):
        val = relative_entropy([0.5, 0.5], [0.25, 0.75])
        assert val == pytest.approx(0.5 * math.log(2) + 0.5 * math.log(2 / 3), abs=1e-15)
        assert val == pytest.approx(0.143841, abs=1e-6)

    def test_not_absolutely_continuous(self):
        assert relative_entropy([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_zero_log_zero(self):
        assert relative_entropy([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))

    def test_shape_mismatch(self):
        with pytest.raises(StructureError):
            relative_entropy([1.0], [0.5, 0.5])

    def test_negative(self):
        with pytest.raises(DomainError):
            relative_entropy([1.5, -0.5], [0.5, 0.5])

    @given(prob_vectors(4), prob_vectors(4))
    def test_gibbs_inequality(self, mu, nu):
        assert relative_entropy(mu, nu) >= -1e-12


class TestKernelProduct:
    def test_constant(self):
        np.testing.assert_allclose(kernel_product(np.full((2, 2), 2.0), [0.5, 0.5]), 0.5)

    def test_zero(self):
        assert not kernel_product(np.zeros((2, 2)), [0.5, 0.5]).any()

    def test_entries(self):
        c = np.array([[1.0, 0.0], [0.0, 4.0]])
        np.testing.assert_allclose(kernel_product(c, [0.25, 0.75]), [[0.0625, 0], [0, 2.25]])


class TestKullbackAction:
    def test_zero_at_product(self):
        c = np.array([[1.0, 2.0], [2.0, 3.0]])
        rho = np.array([0.3, 0.7])
        assert kullback_action(kernel_product(c, rho), rho, c) == 0.0

    def test_doubled(self):
        c = np.array([[1.0, 2.0], [2.0, 3.0]])
        rho = np.array([0.3, 0.7])
        target = kernel_product(c, rho)
        M = target.sum()
        assert kullback_action(2 * target, rho, c) == pytest.approx(M * (2 * math.log(2) - 1), rel=1e-13)

    def test_support_violation(self):
        c = np.array([[1.0, 0.0], [0.0, 1.0]])
        pi = np.array([[0.1, 0.1], [0.1, 0.1]])
        assert kullback_action(pi, [0.5, 0.5], c) == math.inf

    @given(pair_measures(3), prob_vectors(3), kernels(3))
    def test_nonnegative(self, pi, rho, c):
        assert kullback_action(pi, rho, c) >= -1e-12


class TestSpectralPotential:
    def test_zero(self):
        assert spectral_potential(np.zeros((2, 2)), [0.5, 0.5], np.full((2, 2), 2.0)) == 0.0

    def test_log2(self):
        val = spectral_potential(np.full((2, 2), math.log(2)), [0.5, 0.5], np.full((2, 2), 2.0))
        assert val == pytest.approx(2.0, abs=1e-14)

    def test_very_negative(self):
        c = np.array([[1.0, 2.0], [2.0, 3.0]])
        w = np.array([0.3, 0.7])
        val = spectral_potential(np.full((2, 2), -700.0), w, c)
        assert val == pytest.approx(-kernel_product(c, w).sum(), rel=1e-14)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            spectral_potential(np.full((1, 1), 1000.0), [1.0], [[1.0]])


class TestVariationalGap:
    def test_equality_case(self):
        c = np.array([[1.0, 2.0], [2.0, 3.0]])
        w = np.array([0.4, 0.6])
        V, g = kullback_variational_gap(kernel_product(c, w), w, c)
        assert V == 0.0
        np.testing.assert_array_equal(g, 0.0)

    def test_doubled(self):
        c = np.array([[1.0, 2.0], [2.0, 3.0]])
        w = np.array([0.4, 0.6])
        target = kernel_product(c, w)
        V, g = kullback_variational_gap(2 * target, w, c)
        np.testing.assert_allclose(g, math.log(2), rtol=1e-15)
        assert V == pytest.approx(target.sum() * (2 * math.log(2) - 1), rel=1e-13)

    def test_not_absolutely_continuous(self):
        c = np.array([[1.0, 0.0], [0.0, 1.0]])
        V, g = kullback_variational_gap(np.full((2, 2), 0.1), [0.5, 0.5], c)
        assert V == math.inf and g is None

    @given(pair_measures(2), prob_vectors(2), kernels(2),
           arrays(float, (2, 2), elements=st.floats(-5, 5)))
    def test_dominates_grid(self, pi, w, c, g):
        V, _ = kullback_variational_gap(pi, w, c)
        if not math.isfinite(V):
            return
        assert np.sum(g * pi) - spectral_potential(g, w, c) <= V + 1e-12 * (1 + abs(V))


class TestTotalVariation:
    def test_values(self):
        assert total_variation([0.3, 0.7], [0.3, 0.7]) == 0.0
        assert total_variation([1, 0], [0, 1]) == 1.0
        assert total_variation([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.25)

    def test_dict(self):
        assert total_variation_dict({"x": 1.0}, {"y": 1.0}) == 1.0
        assert total_variation_dict({"x": 0.5, "y": 0.5}, {"x": 0.5, "y": 0.5}) == 0.0
