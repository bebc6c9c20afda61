import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mrnldp import (
    Alphabet,
    ModelSpec,
    TypedGraph,
    consistency_check,
    cooperative_measure,
    degree_measure,
    neighbourhood_measure,
    sample_network,
    type_measure,
)
from mrnldp.empirical import (
    write_degree_csv,
    write_neighbourhood_csv,
    write_pair_measure_csv,
    write_type_measure_csv,
)

AB = Alphabet(("a", "b"))


def one_edge(symmetric=True):
    return TypedGraph(AB, [0, 1], [[0, 1]], symmetric)


class TestTypeMeasure:
    def test_point_mass(self):
        G = TypedGraph(AB, [0, 0, 0], [])
        np.testing.assert_array_equal(type_measure(G), [1.0, 0.0])

    def test_counts(self):
        G = TypedGraph(AB, [0, 0, 1, 1], [[0, 1]])
        np.testing.assert_array_equal(type_measure(G), [0.5, 0.5])
        H = TypedGraph(AB, [0, 0, 1, 1], [[0, 2], [1, 3]])
        np.testing.assert_array_equal(type_measure(G), type_measure(H))


class TestCooperative:
    def test_empty(self):
        assert not cooperative_measure(TypedGraph(AB, [0, 1, 1], [])).any()

    def test_symmetric(self):
        L2 = cooperative_measure(one_edge())
        np.testing.assert_array_equal(L2, [[0, 0.5], [0.5, 0]])

    def test_asymmetric(self):
        L2 = cooperative_measure(one_edge(False))
        np.testing.assert_array_equal(L2, [[0, 1.0], [0, 0]])

    def test_exact(self):
        L2 = cooperative_measure(one_edge(), exact=True)
        assert L2[0, 1] == Fraction(1, 2) and sum(L2.ravel()) == 1


class TestNeighbourhood:
    def test_empty(self):
        G = TypedGraph(AB, [0, 1, 1], [])
        M = neighbourhood_measure(G, exact=True)
        assert M.masses == {(0, (0, 0)): Fraction(1, 3), (1, (0, 0)): Fraction(2, 3)}

    def test_one_edge(self):
        M = neighbourhood_measure(one_edge())
        assert M.masses == {(0, (0, 1)): 0.5, (1, (1, 0)): 0.5}

    def test_overflow(self):
        star = TypedGraph(Alphabet(("a",)), [0] * 5, [[0, k] for k in range(1, 5)])
        M = neighbourhood_measure(star, cap=3, exact=True)
        assert M.overflow[0] == Fraction(1, 5) and M.has_overflow()
        assert M.total() == 1

    def test_bad_cap(self):
        with pytest.raises(ValueError):
            neighbourhood_measure(one_edge(), cap=0)


class TestDegree:
    def test_empty(self):
        d = degree_measure(TypedGraph(AB, [0, 1, 0], []))
        assert d.pmf[0] == 1.0 and d.mean == 0.0

    def test_complete(self):
        K4 = TypedGraph(Alphabet(("a",)), [0] * 4, [[i, j] for i in range(4) for j in range(i + 1, 4)])
        d = degree_measure(K4, k_max=5)
        assert d.pmf[3] == 1.0

    def test_one_edge(self):
        d = degree_measure(one_edge())
        assert d.pmf[1] == 1.0 and d.mean == 1.0

    def test_overflow(self):
        d = degree_measure(one_edge(), k_max=0)
        assert d.overflow == 1.0 and d.mean == float("inf")


class TestConsistency:
    def test_empty(self):
        G = TypedGraph(AB, [0, 1, 1], [])
        ok, res = consistency_check(cooperative_measure(G), neighbourhood_measure(G))
        assert ok and res == 0

    def test_perturbed(self):
        spec = ModelSpec(AB, [0.5, 0.5], [[1.0, 2.0], [2.0, 1.0]], 60)
        G = sample_network(spec, 3)
        M = neighbourhood_measure(G)
        key = next(k for k in M.masses if sum(k[1]) == 1)
        M.masses[key] += 1e-3
        ok, res = consistency_check(cooperative_measure(G), M)
        assert not ok and res == pytest.approx(1e-3, rel=1e-6)

    @given(st.integers(0, 10**6), st.integers(2, 50), st.booleans())
    def test_identities_exact(self, seed, n, symmetric):
        kernel = [[1.0, 3.0], [3.0, 0.5]] if symmetric else [[1.0, 3.0], [0.2, 0.5]]
        spec = ModelSpec(AB, [0.4, 0.6], kernel, n, symmetric)
        G = sample_network(spec, seed)
        L1 = type_measure(G, exact=True)
        L2 = cooperative_measure(G, exact=True)
        M = neighbourhood_measure(G, exact=True)
        assert sum(L2.ravel()) == Fraction(2 * G.num_edges, n)
        assert list(M.type_marginal()) == list(L1)
        if symmetric:
            assert consistency_check(L2, M, tol=0) == (True, 0.0)


class TestCsv:
    def test_writers(self):
        G = one_edge()
        buf = io.StringIO()
        write_type_measure_csv(buf, type_measure(G), AB)
        assert buf.getvalue() == "label,mass\na,0.5\nb,0.5\n"
        buf = io.StringIO()
        write_pair_measure_csv(buf, cooperative_measure(G), AB)
        assert buf.getvalue().splitlines()[2] == "a,b,0.5"
        buf = io.StringIO()
        write_neighbourhood_csv(buf, neighbourhood_measure(G), AB)
        assert buf.getvalue() == "label,profile,mass\na,0;1,0.5\nb,1;0,0.5\n"
        buf = io.StringIO()
        write_degree_csv(buf, degree_measure(G, k_max=1))
        assert buf.getvalue() == "k,mass\n0,0.0\n1,1.0\noverflow,0.0\n"
