import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thirring_qca.core import BinLabel, WalkParams
from thirring_qca.errors import ConfigurationError, ResourceCapError
from thirring_qca.interaction_pert import (
    CHAIN_T_CAP,
    InteractionSchedule,
    TensorSpace,
    amplitude_table,
    amputated_matrix,
    antisymmetric_projector,
    calibration_constant,
    compositions,
    distinguishable_pathsum,
    enumerate_vertex_chains,
    exchange_operator,
    full_operator,
    internal_interaction,
    order_k_amplitude_pathsum,
    order_k_operator,
    order_k_operators,
    write_amplitude_csv,
)
from thirring_qca.thirring import two_particle_amplitude

INPUTS = [((0, 0), (2, 1)), ((0, 1), (1, 1)), ((0, 0), (0, 1)), ((0, 1), (3, 0))]


def outputs(T, span=3):
    modes = [(x, c) for x in range(-T, span + T + 1) for c in (0, 1)]
    return [(o1, o2) for i, o1 in enumerate(modes) for o2 in modes[i + 1:]]


class TestCompositions:
    def test_small_example(self):
        got = [s.alphas for s in compositions(3, 2)]
        assert got == [(0, 1, 2), (0, 2, 1), (1, 1, 1)]

    @pytest.mark.parametrize("T", range(0, 8))
    def test_count_is_binomial(self, T):
        from math import comb

        for k in range(0, T + 1):
            scheds = compositions(T, k)
            assert len(scheds) == comb(T, k)
            assert len({s.interaction_times() for s in scheds}) == comb(T, k)
            assert all(s.T == T and s.k == k for s in scheds)

    def test_out_of_range(self):
        assert compositions(2, 3) == []

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            InteractionSchedule((1, 0, 2))
        assert InteractionSchedule((0, 2, 1)).interaction_times() == (0, 2)


class TestInternalOperators:
    def test_exchange_is_swap(self):
        E = exchange_operator()
        swap = np.eye(4)[[0, 2, 1, 3]]
        assert np.allclose(E, swap)
        assert np.allclose(E @ E, np.eye(4))

    def test_projector(self):
        P = antisymmetric_projector()
        assert np.allclose(P @ P, P)
        assert np.isclose(np.trace(P), 1)

    def test_interaction_commutes_with_exchange(self):
        V = internal_interaction(0.8)
        E = exchange_operator()
        assert np.allclose(V @ E, E @ V)

    def test_tensor_exchange_commutes(self, params):
        space = TensorSpace(6)
        E = space.exchange()
        for op in (space.walk(params), space.interaction_minus_identity(params.chi)):
            assert abs(op @ E - E @ op).max() < 1e-15


class TestOperatorRoute:
    @pytest.mark.parametrize("T", range(1, 6))
    def test_orders_sum_to_full(self, T, rng):
        p = WalkParams(rng.uniform(0.05, 0.95), rng.uniform(-np.pi, np.pi))
        assert abs(full_operator(T, p) - sum(order_k_operators(T, p))).max() < 1e-12

    @pytest.mark.parametrize("T,k", [(3, 0), (3, 1), (4, 2), (4, 4), (5, 3)])
    def test_recursion_matches_schedule_sum(self, T, k, params):
        ops = order_k_operators(T, params)
        assert abs(order_k_operator(T, k, params) - ops[k]).max() < 1e-12

    def test_zero_order_is_free(self, params):
        T = 3
        space = TensorSpace(4 * T + 4)
        W = space.walk(params)
        assert abs(order_k_operator(T, 0, params) - W @ W @ W).max() < 1e-14

    def test_bad_order(self, params):
        with pytest.raises(ConfigurationError):
            order_k_operator(2, 3, params)

    def test_tensor_cap(self, params):
        with pytest.raises(ResourceCapError):
            order_k_operator(2, 1, params, ring_size=200)

    def test_degree_in_coupling(self):
        # U^(k) is a degree-k polynomial in (e^{i chi} - 1)
        T, k = 3, 2
        base = WalkParams(0.4, 0.0)
        mats = []
        for chi in (0.3, 0.9):
            ops = order_k_operator(T, k, WalkParams(base.m, chi))
            mats.append(ops / (np.exp(1j * chi) - 1) ** k)
        assert abs(mats[0] - mats[1]).max() < 1e-13


class TestPathSum:
    @pytest.mark.parametrize("T", [1, 2, 3, 4])
    def test_matches_operator(self, T, params):
        ops = order_k_operators(T, params)
        space = TensorSpace(4 * T + 4)
        for m_in in INPUTS:
            vi = space.antisymmetric_vector(*m_in)
            images = [op @ vi for op in ops]
            for m_out in outputs(T):
                vo = space.antisymmetric_vector(*m_out).conj()
                for k in range(T + 1):
                    got = order_k_amplitude_pathsum(m_in, m_out, T, k, params)
                    assert got == pytest.approx(vo @ images[k], abs=1e-12)

    @pytest.mark.parametrize("T", [2, 3])
    def test_verbatim_scheme_with_calibration(self, T, params):
        for m_in in INPUTS[:2]:
            for m_out in outputs(T)[::7]:
                for k in range(1, T + 1):
                    a = order_k_amplitude_pathsum(m_in, m_out, T, k, params, scheme="verbatim")
                    b = order_k_amplitude_pathsum(m_in, m_out, T, k, params)
                    assert a == pytest.approx(b, abs=1e-12)

    def test_orders_sum_to_exact(self, params):
        T, m_in, m_out = 4, ((0, 0), (2, 1)), ((1, 1), (2, 0))
        total = sum(order_k_amplitude_pathsum(m_in, m_out, T, k, params) for k in range(T + 1))
        assert total == pytest.approx(two_particle_amplitude(m_in, m_out, T, params), abs=1e-12)

    @given(st.integers(1, 3), st.integers(0, 1), st.integers(0, 1))
    def test_chi_zero_vanishes(self, k, a, b):
        p = WalkParams(0.5, 0.0)
        assert order_k_amplitude_pathsum(((0, a), (1, b)), ((1, 0), (2, 1)), 3, k, p) == 0

    def test_distinguishable_matches_operator(self, params):
        T = 3
        ops = order_k_operators(T, params)
        space = TensorSpace(4 * T + 4)
        m_in, m_out = ((0, 0), (2, 1)), ((1, 1), (1, 0))
        for k in range(1, T + 1):
            ref = ops[k][space.index(*m_out), space.index(*m_in)]
            assert distinguishable_pathsum(m_in, m_out, T, k, params) == pytest.approx(ref, abs=1e-13)

    def test_unknown_scheme(self, params):
        with pytest.raises(ValueError):
            order_k_amplitude_pathsum(((0, 0), (1, 1)), ((0, 1), (1, 0)), 2, 1, params, scheme="x")


class TestChains:
    def test_head_on_light_like(self):
        # right mover at 0 and left mover at 2 meet once at (1, 1)
        chains = enumerate_vertex_chains(0, 2, 2, 0, 2, 1)
        assert [c.vertices for c in chains] == [((1, 1),)]

    def test_cap(self):
        with pytest.raises(ResourceCapError):
            enumerate_vertex_chains(0, 1, 0, 1, CHAIN_T_CAP + 1, 1)

    def test_chains_causal(self):
        for chain in enumerate_vertex_chains(0, 2, 1, 3, 5, 3):
            ts = [t for _, t in chain.vertices]
            assert ts == sorted(set(ts))
            for (z1, t1), (z2, t2) in zip(chain.vertices, chain.vertices[1:]):
                assert abs(z2 - z1) <= t2 - t1

    def test_parity_filter_subset(self):
        full = enumerate_vertex_chains(0, 2, 3, 1, 5, 2)
        filt = enumerate_vertex_chains(0, 2, 3, 1, 5, 2, parity_filter=True)
        assert set(filt) <= set(full)

    def test_calibration_constant(self):
        assert [calibration_constant(k) for k in (1, 2, 3)] == [1.0, 0.5, 0.25]

    def test_amputated_matrix_scaling(self):
        labels = [(BinLabel(0, 0), BinLabel(1, 1))]
        verb = amputated_matrix(labels, 0.7)
        cal = amputated_matrix(labels, 0.7, calibrated=True)
        assert np.allclose(verb, 2 ** 2 * cal)


class TestTable:
    def test_rows_and_csv(self, params):
        rows = amplitude_table(((0, 0), (1, 1)), 2, params, max_k=1)
        assert rows and all(r[1] in (0, 1) for r in rows)
        text = write_amplitude_csv(rows)
        assert text.splitlines()[0].startswith("T,")
