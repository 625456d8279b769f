import collections
import itertools
import json

import numpy as np
import pytest

from thirring_qca.core import BinLabel, WalkParams
from thirring_qca.errors import DomainError, PauliError, UnsupportedClassError
from thirring_qca.free_walk import path_count_c
from thirring_qca.mass_pert import (
    Boundaries,
    DiagramClass,
    OperatorTerm,
    admissible_f,
    chirality_assignments,
    class_report_json,
    class_table,
    class_terms,
    compare_with_oracle,
    f_max,
    highmass_terms,
    interaction_parity,
    lowmass_terms,
    mirror_boundaries,
    tabulated_highmass_terms,
    reflect,
    reverse_boundaries,
)
from thirring_qca.sector import SectorState
from thirring_qca.thirring import graded_evolve

LABELS = [BinLabel(c, a) for c in (0, 1) for a in (0, 1)]


def aggregate(b, n, regime):
    out = collections.Counter()
    for cls in class_table(b, n, regime):
        for t in class_terms(cls):
            out[(t.labels, t.j)] += t.integer_coeff
    return {k: v for k, v in out.items() if v}


class TestFlipCounts:
    def test_f_max(self):
        assert f_max(0, 0, 4) == 4
        assert f_max(0, 3, 4) == 1
        assert f_max(0, -4, 4) == 0
        with pytest.raises(DomainError):
            f_max(0, 5, 4)

    def test_admissible(self):
        assert admissible_f(0, 0, 4) == {4, 2}
        assert admissible_f(0, 1, 4) == {3, 1}
        assert admissible_f(0, 4, 4) == {0}

    @pytest.mark.parametrize("T", range(1, 7))
    def test_admissible_matches_path_counts(self, T):
        for dx in range(-T, T + 1):
            realized = {f for f in range(T + 1)
                        if any(path_count_c(c, a, f, 0, dx, T) for c in (0, 1) for a in (0, 1))}
            assert admissible_f(0, dx, T) == realized

    def test_class_table(self):
        b = Boundaries(0, 2, 1, 1, 3)
        assert class_table(b, 2) == []
        assert [(c.f1, c.f2) for c in class_table(b, 4)] == [(2, 2)]
        b = Boundaries(0, 2, 0, 2, 4)
        assert [(c.f1, c.f2) for c in class_table(b, 6)] == [(2, 4), (4, 2)]


class TestBoundaries:
    def test_validation(self):
        with pytest.raises(DomainError):
            Boundaries(2, 0, 2, 0, 3)
        with pytest.raises(DomainError):
            Boundaries(0, 1, 5, 1, 3)
        with pytest.raises(DomainError):
            Boundaries(0, 1, 0, 1, 0)

    def test_parity(self):
        assert interaction_parity(Boundaries(0, 4, 4, 0, 4)) == "odd"
        assert interaction_parity(Boundaries(0, 2, 0, 2, 4)) == "even"
        with pytest.raises(DomainError):
            interaction_parity(Boundaries(0, 0, 0, 2, 2))
        with pytest.raises(PauliError):
            interaction_parity(Boundaries(0, 2, 1, 1, 2), final_bits=(0, 0))

    def test_chirality_assignments_obey_parity(self):
        b = Boundaries(0, 3, 1, 2, 4)
        for a, bb, _, _ in chirality_assignments(b):
            assert (3 + a + bb) % 2 == 1

    def test_mirror_and_reverse_are_involutions(self):
        b = Boundaries(0, 3, 2, -1, 4)
        assert mirror_boundaries(mirror_boundaries(b)) == b
        r = reverse_boundaries(b)
        assert r == Boundaries(-1, 2, 3, 0, 4)


class TestLowMass:
    def test_head_on_light_like(self):
        # R at 0 and L at 4 cross once without flipping
        cls = DiagramClass(0, 0, Boundaries(0, 4, 4, 0, 4))
        terms = lowmass_terms(cls)
        assert len(terms) == 1
        t = terms[0]
        assert t.labels == (BinLabel(0, 0), BinLabel(1, 1))
        assert (t.j, t.integer_coeff) == (1, 1)

    def test_unsupported_order(self):
        with pytest.raises(UnsupportedClassError):
            lowmass_terms(DiagramClass(2, 2, Boundaries(0, 1, 0, 1, 4)))

    @pytest.mark.parametrize("T", range(1, 6))
    def test_oracle(self, T):
        counts = collections.Counter()
        for y_in in range(0, 2 * T + 2):
            for a, b in itertools.product((0, 1), repeat=2):
                if y_in == 0 and (a, b) != (0, 1):
                    continue
                for row in compare_with_oracle([(0, a), (y_in, b)], T):
                    counts[row["status"]] += 1
                    assert row["status"] != "mismatch", row
        assert counts["match"] > 0

    def test_term_value(self):
        p = WalkParams(0.3, 0.8)
        t = OperatorTerm((BinLabel(0, 0), BinLabel(1, 1)), 1, 3, 2, 4)
        want = 3 * (0.3j) ** 2 * p.n**6 * np.exp(0.8j)
        assert t.value(p) == pytest.approx(want)
        assert t.matrix(p).shape == (4, 4)


class TestHighMass:
    @pytest.mark.parametrize("T", [2, 4, 6])
    def test_oracle(self, T):
        counts = collections.Counter()
        for y_in in range(0, 3):
            for a, b in itertools.product((0, 1), repeat=2):
                if y_in == 0 and (a, b) != (0, 1):
                    continue
                for row in compare_with_oracle([(0, a), (y_in, b)], T, "high-mass"):
                    counts[row["status"]] += 1
                    assert row["status"] != "mismatch", row
        assert counts["match"] > 0

    def test_two_t_minus_two_subclass(self):
        T = 6
        b = Boundaries(0, 1, 1, 2, T)
        terms = highmass_terms(DiagramClass(T - 1, T - 1, b, "high-mass"))
        polys = collections.defaultdict(dict)
        for t in terms:
            polys[t.labels][t.j] = t.integer_coeff
        assert set(polys) == {(BinLabel(1, 0), BinLabel(1, 0)), (BinLabel(0, 1), BinLabel(0, 1))}
        for (l1, l2), poly in polys.items():
            assert poly == {2: 2, 4: 1}
            g = graded_evolve(SectorState.basis([(0, l1.b), (1, l2.b)], graded=True), T)
            amp = g.amplitude([(1, l1.a), (2, l2.a)])
            assert {j: v for (f, j), v in amp.terms.items() if f == 2 * T - 2 and j >= 1} == poly

    def test_odd_t_unsupported(self):
        with pytest.raises(UnsupportedClassError):
            highmass_terms(DiagramClass(3, 3, Boundaries(0, 0, 0, 0, 3), "high-mass"))

    def test_other_subclass_unsupported(self):
        with pytest.raises(UnsupportedClassError):
            highmass_terms(DiagramClass(2, 4, Boundaries(0, 0, 2, 0, 4), "high-mass"))

    def test_tabulated_one_shift_lines_disagree_with_oracle(self):
        T = 4
        tabulated = dict(tabulated_highmass_terms(2 * T - 1, T))
        labels = (BinLabel(1, 0), BinLabel(0, 0))
        assert tabulated[labels] == {2: 1, 4: 1}
        # R at 0 and R at 1 ending as L and R on site 1
        g = graded_evolve(SectorState.basis([(0, 0), (1, 0)], graded=True), T)
        amp = g.amplitude([(1, 1), (1, 0)])
        oracle = {j: v for (f, j), v in amp.terms.items() if f == 2 * T - 1 and j >= 1}
        assert oracle == {1: 1, 3: 1}
        assert oracle != tabulated[labels]

    def test_tabulated_full_flip(self):
        assert tabulated_highmass_terms(8, 4) == [((BinLabel(0, 0), BinLabel(1, 1)), {4: 1})]


class TestSymmetries:
    @pytest.mark.parametrize("axis,family", [("vertical", "order-preserving"),
                                             ("horizontal", "order-preserving"),
                                             ("horizontal", "order-change")])
    def test_reflection_involution(self, axis, family):
        for l1, l2 in itertools.product(LABELS, repeat=2):
            assert reflect(reflect((l1, l2), axis, family), axis, family) == (l1, l2)

    def test_reflect_term_keeps_coefficients(self):
        t = OperatorTerm((BinLabel(0, 0), BinLabel(1, 1)), 1, 5, 2, 4)
        r = reflect(t, "vertical")
        assert (r.j, r.integer_coeff, r.source) == (1, 5, "reflection")
        assert r.labels == (BinLabel(0, 0), BinLabel(1, 1))

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            reflect((LABELS[0], LABELS[1]), "diagonal")

    def test_mirror_covariance_oracle(self, rng):
        # the walk commutes with (x, a) -> (-x, 1 - a)
        T = 5
        for _ in range(100):
            modes = [(int(x), int(a)) for x, a in zip(rng.integers(-3, 4, 2), rng.integers(0, 2, 2))]
            outs = [(int(x), int(a)) for x, a in zip(rng.integers(-5, 6, 2), rng.integers(0, 2, 2))]
            if modes[0] == modes[1] or outs[0] == outs[1]:
                continue
            mir = lambda ms: [(-x, 1 - a) for x, a in ms]  # noqa: E731
            g = graded_evolve(SectorState.basis(modes, graded=True), T)
            h = graded_evolve(SectorState.basis(mir(modes), graded=True), T)
            assert g.amplitude(outs).terms == h.amplitude(mir(outs)).terms

    def test_mirror_covariance_formulas(self, rng):
        checked = 0
        for _ in range(100):
            T = int(rng.integers(1, 7))
            y = int(rng.integers(0, 2 * T + 1))
            b = Boundaries(0, y, int(rng.integers(-T, T + 1)), y + int(rng.integers(-T, T + 1)), T)
            for n in range(4):
                try:
                    A = aggregate(b, n, "low-mass")
                    B = aggregate(mirror_boundaries(b), n, "low-mass")
                except (DomainError, UnsupportedClassError):
                    continue
                mapped = collections.Counter()
                for (lab, j), v in A.items():
                    mapped[(reflect(lab, "vertical"), j)] += v
                assert dict(mapped) == B
                checked += 1
        assert checked > 200


class TestFreeSum:
    @pytest.mark.parametrize("modes,T", [([(0, 0), (2, 1)], 4), ([(0, 1), (1, 1)], 5)])
    def test_sum_over_j_is_free_count(self, modes, T):
        (x_in, a), (y_in, b) = modes
        g = graded_evolve(SectorState.basis(modes, graded=True), T)
        for (o1, o2), amp in ((k, g.amplitudes[k]) for k in g.amplitudes):
            (x, c), (y, d) = o1, o2
            for f in range(2 * T + 1):
                total = sum(v for (ff, _), v in amp.terms.items() if ff == f)
                free = 0
                for f1 in range(f + 1):
                    free += (path_count_c(c, a, f1, x_in, x, T) * path_count_c(d, b, f - f1, y_in, y, T)
                             - path_count_c(d, a, f1, x_in, y, T) * path_count_c(c, b, f - f1, y_in, x, T))
                assert total == free


class TestReport:
    def test_json(self):
        doc = json.loads(class_report_json(Boundaries(0, 4, 4, 0, 4), 0))
        assert doc["order_f"] == 0
        assert doc["classes"][0]["terms"][0]["j"] == 1

    def test_unsupported_marked(self):
        doc = json.loads(class_report_json(Boundaries(0, 1, 0, 1, 4), 4, "low-mass"))
        assert any("unsupported" in c for c in doc["classes"])
