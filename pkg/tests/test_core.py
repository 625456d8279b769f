import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thirring_qca.core import (
    FORBIDDEN_SUBSTRINGS,
    BinLabel,
    BitPath,
    GradedAmplitude,
    Letter,
    TransitionPath,
    WalkParams,
    binomial,
    bits_to_transitions,
    compose_binary,
    forced_final_bit,
    graded_eval,
    graded_mul_interaction,
    graded_mul_letter,
    letter_of_bits,
)
from thirring_qca.errors import DomainError, EmptyPathError, ShapeError

bit_paths = st.lists(st.integers(0, 1), min_size=2, max_size=14).map(tuple)


class TestWalkParams:
    def test_n_from_m(self):
        p = WalkParams(0.6)
        assert p.n == pytest.approx(0.8, abs=1e-15)
        assert p.n**2 + p.m**2 == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("m", [0.0, 1.0, -0.1, 1.5])
    def test_open_interval(self, m):
        with pytest.raises(DomainError):
            WalkParams(m)

    def test_limits_exact(self):
        assert WalkParams(0.0, allow_limits=True).n == 1.0
        assert WalkParams(1.0, allow_limits=True).n == 0.0

    def test_chi_range(self):
        with pytest.raises(DomainError):
            WalkParams(0.5, 4.0)

    @given(st.floats(1e-6, 1 - 1e-6))
    def test_normalization(self, m):
        p = WalkParams(m)
        assert abs(p.n**2 + p.m**2 - 1) <= 1e-12


class TestBinaryAlgebra:
    def test_four_labels_single_unit_entry(self):
        labels = BinLabel.all()
        assert len(labels) == 4
        for lab in labels:
            M = lab.matrix()
            assert M.sum() == 1 and M[lab.a, lab.b] == 1

    @pytest.mark.parametrize("x,y", list(itertools.product(BinLabel.all(), repeat=2)))
    def test_closure_matches_matrix_product(self, x, y):
        prod = x.matrix() @ y.matrix()
        z = compose_binary(x, y)
        if z is None:
            assert not prod.any()
        else:
            assert np.array_equal(prod, z.matrix())

    def test_parse_and_name(self):
        assert BinLabel.parse("W10") == BinLabel(1, 0)
        assert BinLabel(0, 1).name == "W01"
        with pytest.raises(ValueError):
            BinLabel.parse("W2")


class TestLetters:
    def test_displacements(self):
        assert [Letter.R.displacement, Letter.L.displacement, Letter.F.displacement] == [1, -1, 0]

    def test_bit_pair_map(self):
        assert letter_of_bits(0, 0) is Letter.R
        assert letter_of_bits(1, 1) is Letter.L
        assert letter_of_bits(0, 1) is Letter.F is letter_of_bits(1, 0)

    def test_single_flip_path(self):
        p = BitPath.parse("0011")
        assert str(p.transitions()) == "RFL"
        assert p.endpoint == 0

    def test_empty_path(self):
        with pytest.raises(EmptyPathError):
            bits_to_transitions(BitPath((0,)))

    @given(bit_paths)
    def test_transition_strings_avoid_forbidden(self, bits):
        s = bits_to_transitions(BitPath(bits))
        assert not s.has_forbidden_substring()
        assert len(s) == len(bits) - 1

    def test_forbidden_strings_detected(self):
        for bad in FORBIDDEN_SUBSTRINGS:
            assert TransitionPath.parse(bad).has_forbidden_substring()


class TestBitPaths:
    @given(bit_paths, st.integers(-5, 5))
    def test_endpoint_is_sum_of_displacements(self, bits, x0):
        p = BitPath(bits, x0)
        assert p.endpoint == x0 + p.transitions().displacement
        assert p.positions()[-1] == p.endpoint

    @given(bit_paths)
    def test_weight_formula(self, bits):
        p = BitPath(bits)
        assert 2 * p.weight == p.T - p.endpoint + bits[0] + bits[-1]

    @given(bit_paths)
    def test_forced_final_bit(self, bits):
        p = BitPath(bits, 3)
        assert forced_final_bit(3, bits[0], p.endpoint, p.T) == bits[-1]

    def test_forced_bit_outside_cone(self):
        with pytest.raises(DomainError):
            forced_final_bit(0, 0, 5, 3)

    def test_flips_and_label(self):
        p = BitPath.parse("01101")
        assert p.flips == 3
        assert p.label == BinLabel(1, 0)


class TestBinomial:
    def test_integer(self):
        assert binomial(6, 2) == 15

    def test_vanishing(self):
        assert binomial(5, -1) == 0
        assert binomial(3, 4) == 0
        assert binomial(4.5, 2) == 0
        assert binomial(4, 1.5) == 0


class TestGradedAmplitude:
    def test_evaluation_formula(self):
        p = WalkParams(0.3, 0.7)
        g = GradedAmplitude({(2, 1): 3, (0, 0): -1}, 4)
        want = 3 * (1j * 0.3) ** 2 * p.n**2 * np.exp(0.7j) - p.n**4
        assert graded_eval(g, p) == pytest.approx(want, abs=1e-15)

    def test_letter_and_interaction_grading(self):
        g = GradedAmplitude.one()
        g = graded_mul_letter(g, Letter.F)
        g = graded_mul_letter(g, Letter.R)
        g = graded_mul_interaction(g, 2)
        assert g.terms == {(1, 2): 1} and g.total_letters == 2

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            GradedAmplitude.one(1) + GradedAmplitude.one(2)

    def test_invalid_key(self):
        with pytest.raises(ShapeError):
            GradedAmplitude({(3, 0): 1}, 2)

    @given(
        st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 3)), st.integers(-5, 5), max_size=6),
        st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 3)), st.integers(-5, 5), max_size=6),
        st.floats(0.05, 0.95),
        st.floats(-math.pi, math.pi),
    )
    def test_evaluation_is_linear(self, a, b, m, chi):
        p = WalkParams(m, chi)
        ga, gb = GradedAmplitude(a, 4), GradedAmplitude(b, 4)
        lhs = (ga + gb.scale(2)).evaluate(p)
        assert lhs == pytest.approx(ga.evaluate(p) + 2 * gb.evaluate(p), abs=1e-12)

    def test_restrict_and_polynomial(self):
        g = GradedAmplitude({(2, 0): 1, (2, 2): 4, (0, 1): 7}, 4)
        assert g.restrict(f=2, min_j=1).terms == {(2, 2): 4}
        assert g.chi_polynomial(2) == {0: 1, 2: 4}
        assert g.f_support() == {0, 2} and g.j_support() == {0, 1, 2}
