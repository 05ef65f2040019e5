from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from merocone import _kernels
from merocone.cones import (I_cone, I_cone_direct, LatticeCone, S_closed, S_closed_smooth, S_open,
                            S_union, cone_independent, face_cone, is_smooth, lattice_sum, minkowski,
                            open_decomposition, smooth_subdivision, triangulated_faces, zeta_closed,
                            zeta_open)
from merocone.errors import InputError, InsufficientOrderError, UnsupportedInputError
from merocone.germs import IDENTITY, Germ, InnerProduct, numeric_eval
from oracles import laurent_fit, open_factor

H = LatticeCone([(1,)])
Q2 = LatticeCone([(1, 0), (0, 1)])
C12 = LatticeCone([(1, 0), (1, 2)])
C13 = LatticeCone([(1, 0), (1, 3)])
EPS = (-0.3, -0.7)


def gens(cones):
    return sorted(c.rays() for c in cones)


class TestConstruction:
    def test_default_lattice_is_saturated(self):
        c = LatticeCone([(2, 2)])
        assert c.lattice == ((1, 1),)

    def test_rejects_dependent_generators(self):
        with pytest.raises(UnsupportedInputError):
            LatticeCone([(1, 0), (0, 1), (1, 1)])

    def test_rejects_generator_outside_lattice_span(self):
        with pytest.raises(InputError):
            LatticeCone([(1, 0)], [(0, 1)])

    def test_json_roundtrip(self):
        c = LatticeCone([(1, 0)], [(Fraction(1, 2), 0)])
        assert LatticeCone.from_json(c.to_json()) == c
        assert LatticeCone.from_json({"dim": 2, "generators": [[1, 0]], "lattice": None}) == LatticeCone([(1, 0)])


class TestLocalityStructure:
    def test_minkowski_examples(self):
        assert minkowski(LatticeCone([(1, 0)]), LatticeCone([(0, 1)])) == Q2
        assert minkowski(H, LatticeCone.zero(1)) == H
        assert minkowski(H, H) == H

    def test_minkowski_lattice_is_sum(self):
        c = minkowski(LatticeCone([(1, 0)], [(2, 0)]), LatticeCone([(1, 0)], [(3, 0)]))
        assert c.lattice_hnf() == ((1, 0),)

    def test_minkowski_prunes_interior_generator(self):
        c = minkowski(Q2, LatticeCone([(1, 1)]))
        assert c.rays() == Q2.rays()

    def test_minkowski_of_opposite_rays_is_unsupported(self):
        with pytest.raises(UnsupportedInputError):
            minkowski(H, LatticeCone([(-1,)]))

    def test_independence(self):
        a, b = LatticeCone([(1, 1)]), LatticeCone([(1, -1)])
        assert cone_independent(LatticeCone([(1, 0)]), LatticeCone([(0, 1)]), IDENTITY, "TopD")
        assert cone_independent(a, b, IDENTITY, "PerpQ") and not cone_independent(a, b, IDENTITY, "TopD")
        assert not cone_independent(LatticeCone([(1, 0)]), a)
        with pytest.raises(InputError):
            cone_independent(a, b, InnerProduct([[2, 1], [1, 2]]), "TopD")


class TestSubdivision:
    def test_smoothness(self):
        assert is_smooth(Q2) and is_smooth(LatticeCone([(1, 0), (1, 1)]))
        assert not is_smooth(C12)
        assert not is_smooth(LatticeCone([(1,)], [(2,)]))

    def test_smooth_input_unchanged(self):
        assert smooth_subdivision(Q2) == [Q2]

    def test_index_two(self):
        assert gens(smooth_subdivision(C12)) == [((1, 0), (1, 1)), ((1, 1), (1, 2))]

    def test_index_three(self):
        pieces = smooth_subdivision(C13)
        assert gens(pieces) == [((1, 0), (1, 1)), ((1, 1), (1, 2)), ((1, 2), (1, 3))]
        assert all(is_smooth(p) for p in pieces)

    def test_coarse_lattice_rescales_generator(self):
        (p,) = smooth_subdivision(LatticeCone([(1,)], [(2,)]))
        assert p.generators == ((2,),) and is_smooth(p)

    @settings(max_examples=30)
    @given(st.lists(st.integers(-3, 3), min_size=9, max_size=9))
    def test_random_3d_subdivisions_are_smooth_and_cover(self, xs):
        rows = [tuple(xs[3 * i:3 * i + 3]) for i in range(3)]
        if abs(np.linalg.det(np.array(rows, dtype=float))) < 0.5 or abs(np.linalg.det(np.array(rows, dtype=float))) > 12:
            return
        c = LatticeCone(rows)
        pieces = smooth_subdivision(c)
        assert all(is_smooth(p) for p in pieces)
        inv = np.linalg.inv(np.array(rows, dtype=float).T)
        for p in pieces:
            for r in p.generators:
                assert (inv @ np.array(r, dtype=float) >= -1e-12).all()
        assert I_cone(c) == I_cone_direct(c)


class TestDecomposition:
    def test_zero_cone(self):
        dec = open_decomposition(LatticeCone.zero(2), "Closed")
        assert len(dec) == 1 and dec.terms[0][1].rank == 0

    def test_ray(self):
        assert [c.rank for _, c in open_decomposition(H, "Closed")] == [0, 1]
        assert [c.rank for _, c in open_decomposition(H, "Open")] == [1]

    def test_index_two_face_count(self):
        ranks = sorted(c.rank for _, c in open_decomposition(C12, "Closed"))
        assert ranks == [0, 1, 1, 1, 2, 2]
        assert sorted(c.rank for _, c in open_decomposition(C12, "Open")) == [1, 2, 2]


class TestSums:
    def test_half_line(self):
        f = S_open(H, 6)
        expected = (Germ.polar(-1, [(1,)]) + Fraction(-1, 2) + Germ.coordinate(0) * Fraction(-1, 12)
                    + Germ.coordinate(0) ** 3 * Fraction(1, 720) + Germ.coordinate(0) ** 5 * Fraction(-1, 30240))
        assert f == expected
        assert S_closed(H, 6) == f + 1
        assert S_closed(LatticeCone.zero(1)) == 1

    def test_closed_forms_agree_on_smooth_cones(self):
        for c in (H, Q2, LatticeCone([(1, 0), (1, 1)]), LatticeCone([(1, 0, 0), (1, 1, 0), (0, 1, 1)])):
            assert S_closed_smooth(c, 5) == S_closed(c, 5)

    def test_subdivision_invariance(self):
        force = lambda p: (1, 1) if p.rays() == Q2.rays() else None  # noqa: E731
        assert len(smooth_subdivision(Q2, force)) == 2
        at_11 = S_closed(Q2, 8, pick=force)
        assert at_11 == S_closed(Q2, 8)
        at_21 = S_closed(C12, 8, pick=lambda p: (2, 1) if p.rays() == C12.rays() else None)
        assert at_21 == S_closed(C12, 8)

    @pytest.mark.parametrize("c", [H, Q2, C12, C13, LatticeCone([(1, 1), (-1, 2)])],
                             ids=["ray", "quadrant", "index2", "index3", "skew"])
    def test_lattice_sum_oracle(self, c):
        for closed, fn in ((False, S_open), (True, S_closed)):
            exact = numeric_eval(fn(c, 20), EPS[:c.dim])
            approx = lattice_sum(c, EPS[:c.dim], 60, closed)
            assert exact == pytest.approx(approx, abs=1e-6)

    def test_minkowski_idempotent_but_sum_not_multiplicative(self):
        assert S_open(minkowski(H, H), 6) == S_open(H, 6)
        assert S_open(H, 6) != S_open(H, 6) * S_open(H, 6)

    def test_sum_of_independent_cones_factorises(self):
        a, b = LatticeCone([(1, 1)]), LatticeCone([(1, -1)])
        assert cone_independent(a, b)
        assert S_open(minkowski(a, b), 6) == S_open(a, 6) * S_open(b, 6)
        assert I_cone(minkowski(a, b)) == I_cone(a) * I_cone(b)

    def test_parallel_faces_match_serial(self):
        assert S_closed(C13, 6, jobs=2) == S_closed(C13, 6)


class TestIntegral:
    def test_examples(self):
        assert I_cone(H) == Germ.polar(-1, [(1,)])
        assert I_cone(Q2) == Germ.polar(1, [(1, 0), (0, 1)])
        expected = Germ.polar(1, [(1, 0), (1, 1)]) + Germ.polar(1, [(1, 1), (1, 2)])
        assert I_cone(C12) == expected == I_cone_direct(C12)
        assert I_cone(LatticeCone.zero(2)) == 1

    def test_numeric_integral(self):
        # closed form of the integral over the cone at a point of the dual cone
        from scipy import integrate

        a, b = np.array([1.0, 0.0]), np.array([1.0, 2.0])
        eps = np.array(EPS)
        val, _ = integrate.dblquad(lambda t, s: np.exp((s * a + t * b) @ eps), 0, 60, 0, 60)
        # Lebesgue measure on R^2 is the Z^2-normalised measure; |det(a,b)| = 2
        assert 2 * val == pytest.approx(numeric_eval(I_cone(C12), eps), rel=1e-6)

    def test_sublattice_divides(self):
        assert I_cone(LatticeCone([(1,)], [(2,)])) * 2 == I_cone(H)


class TestZeta:
    def test_half_line(self):
        assert zeta_open(H, IDENTITY, 4) == Fraction(-1, 2)
        assert zeta_closed(H, IDENTITY, 4) == Fraction(1, 2)

    def test_quadrant(self):
        assert zeta_open(Q2, IDENTITY, 6) == Fraction(1, 4)
        value, resid = laurent_fit(lambda e: open_factor(e[0]) * open_factor(e[1]),
                                   [lambda u: u[0] / u[1], lambda u: u[1] / u[0]], 2)
        assert value == pytest.approx(0.25, abs=1e-9)

    def test_insufficient_order_reports_requirement(self):
        with pytest.raises(InsufficientOrderError) as info:
            zeta_open(Q2, IDENTITY, 1)
        assert info.value.required == 2


class TestTriangulated:
    def test_two_pieces_of_the_quadrant(self):
        a, b = LatticeCone([(1, 0), (1, 1)]), LatticeCone([(1, 1), (0, 1)])
        assert len(triangulated_faces([a, b], "Closed")) == 6
        assert len(triangulated_faces([a, b], "Open")) == 3
        assert S_union([a, b], "Closed", 6) == S_closed(Q2, 6)
        assert S_union([a, b], "Open", 6) == S_open(Q2, 6)

    def test_face_lattice_is_cut_down(self):
        c = LatticeCone([(1, 0), (1, 2)])
        f = face_cone(c, [1])
        assert f.lattice_hnf() == ((1, 2),)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
def test_lattice_sum_backends_agree():
    assert lattice_sum(C13, EPS, 40, False, "numba") == pytest.approx(lattice_sum(C13, EPS, 40, False, "numpy"), rel=1e-12)


@pytest.mark.parametrize("gens", [[(1,)], [(1, 0), (1, 2)], [(1, 0), (1, 3)], [(1, 0, 0), (0, 1, 0), (1, 1, 2)]])
def test_reciprocity_of_zeta_values(gens):
    # S_closed(-eps) = (-1)^k S_open(eps), and the renormalised value is even-degree data
    c = LatticeCone(gens)
    sign = (-1) ** c.rank
    assert zeta_closed(c, IDENTITY, 6) == sign * zeta_open(c, IDENTITY, 6)
