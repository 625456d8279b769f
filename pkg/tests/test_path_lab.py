import json

import pytest

from thirring_qca.errors import ConfigurationError, ResourceCapError
from thirring_qca.path_lab import (
    RELATIVE_POSITION_TABLE,
    can_interact,
    check_distinguishability,
    check_interaction_parity,
    check_parity_condition,
    check_permutation_lemma,
    check_sign_flip,
    check_relative_position_table,
    check_three_particle_lemma,
    check_unique_internal_state,
    check_weight_lemma,
    find_pauli_violations,
    run_all,
)
from thirring_qca.sector import SectorState
from thirring_qca.thirring import graded_evolve

CHECKS = [
    (check_permutation_lemma, 8),
    (check_weight_lemma, 8),
    (check_unique_internal_state, 8),
    (check_parity_condition, 8),
    (check_distinguishability, 8),
    (check_sign_flip, 6),
    (check_interaction_parity, 6),
    (check_three_particle_lemma, 4),
]


@pytest.mark.parametrize("check,T", CHECKS, ids=[c.__name__ for c, _ in CHECKS])
def test_check_passes(check, T):
    report = check(T)
    assert report.passed, report.violations[:3]
    assert report.universe_size > 0
    assert report.universe
    doc = json.loads(report.to_json())
    assert doc["passed"] is True


def test_relative_position_table():
    report = check_relative_position_table()
    assert report.passed
    assert RELATIVE_POSITION_TABLE[("odd", "odd")] == ("even", "equal")


def test_caps():
    with pytest.raises(ResourceCapError):
        check_permutation_lemma(11)
    with pytest.raises(ResourceCapError):
        check_sign_flip(9)
    with pytest.raises(ConfigurationError):
        check_weight_lemma(0)


def test_run_all_small():
    reports = run_all(T_max=3)
    assert len(reports) == 9
    assert all(r.passed for r in reports)
    assert len({r.lemma_id for r in reports}) == 9


class TestParity:
    def test_can_interact(self):
        assert can_interact(0, 0, 1, 0)
        assert can_interact(0, 0, 2, 1)
        assert not can_interact(0, 0, 2, 0)
        assert not can_interact(0, 0, 1, 1)

    @pytest.mark.parametrize("modes", [[(0, 0), (2, 0)], [(0, 0), (1, 1)], [(0, 1), (3, 0)]])
    def test_excluded_pairs_never_pick_up_phase(self, modes):
        g = graded_evolve(SectorState.basis(modes, graded=True), 8)
        assert all(j == 0 for v in g.amplitudes.values() for (_, j) in v.terms)

    @pytest.mark.parametrize("modes", [[(0, 0), (1, 0)], [(0, 0), (2, 1)], [(0, 1), (0, 0)]])
    def test_admissible_pairs_do(self, modes):
        g = graded_evolve(SectorState.basis(modes, graded=True), 4)
        assert any(j > 0 for v in g.amplitudes.values() for (_, j) in v.terms)


class TestPauli:
    def test_two_particles_empty(self):
        assert find_pauli_violations(2, 6) == []

    def test_three_particles_witness(self):
        found = find_pauli_violations(3, 4)
        assert len(found) == 1440
        first = find_pauli_violations(3, 4, first_only=True)[0]
        assert first == found[0]
        assert first.modes == ((0, 0), (0, 1), (1, 0))
        assert (first.pair, first.site, first.t) == ((1, 2), 0, 2)
        i, j = first.pair
        for k in (i, j):
            p = first.paths[k]
            assert p.positions()[first.t] == first.site
            assert p.bits[first.t] == first.bit
        assert json.loads(json.dumps(first.as_dict()))["pair"] == [1, 2]

    def test_bounds(self):
        with pytest.raises(ResourceCapError):
            find_pauli_violations(4, 3)
        with pytest.raises(ResourceCapError):
            find_pauli_violations(3, 9)
