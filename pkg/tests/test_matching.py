"""Diagram matching: Wasserstein, bottleneck, and assignment optimality."""

import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from topokit.matching import DIAGONAL, match_diagrams

from _support import (
    brute_assignment_cost,
    brute_bottleneck,
    brute_wasserstein,
    diagram_from_pairs,
    random_diagram_pairs,
)


class TestFrozenExamples:
    def test_single_pair_w2(self):
        left = diagram_from_pairs([(0.2, 0.9)])
        right = diagram_from_pairs([(0.25, 0.85)])
        result = match_diagrams(left, right, 2)
        assert result.cost == pytest.approx(math.hypot(0.05, 0.05), abs=1e-15)
        assert result.cost == pytest.approx(0.07071067811865477, abs=1e-15)
        assert result.pairs == ((0, 0),)

    def test_identity_is_exact_zero(self):
        diagram = diagram_from_pairs([(0.1, 0.9), (0.3, 0.5)])
        for p in (1, 2, 3, math.inf):
            assert match_diagrams(diagram, diagram, p).cost == 0.0

    def test_single_dot_against_empty(self):
        left = diagram_from_pairs([(0.1, 0.9)])
        result = match_diagrams(left, diagram_from_pairs([]), 2)
        assert result.cost == pytest.approx(0.8 / math.sqrt(2), abs=1e-15)
        assert result.cost == pytest.approx(0.565685424949238, abs=1e-12)
        assert result.pairs == ((0, DIAGONAL),)

    def test_both_empty(self):
        result = match_diagrams(diagram_from_pairs([]), diagram_from_pairs([]), 2)
        assert result.cost == 0.0
        assert result.pairs == ()

    def test_bottleneck_single_pair(self):
        left = diagram_from_pairs([(0.2, 0.9)])
        right = diagram_from_pairs([(0.25, 0.85)])
        assert match_diagrams(left, right, math.inf).cost == pytest.approx(0.05, abs=1e-12)

    def test_bottleneck_against_empty_uses_half_gap(self):
        left = diagram_from_pairs([(0.2, 0.9)])
        result = match_diagrams(left, diagram_from_pairs([]), math.inf)
        assert result.cost == pytest.approx(0.35, abs=1e-12)


class TestPairStructure:
    def test_every_dot_used_once(self):
        rng = np.random.default_rng(51)
        for _ in range(30):
            lp = random_diagram_pairs(rng, 4)
            rp = random_diagram_pairs(rng, 4)
            result = match_diagrams(diagram_from_pairs(lp), diagram_from_pairs(rp), 2)
            lefts = [li for li, _ in result.pairs if li != DIAGONAL]
            rights = [ri for _, ri in result.pairs if ri != DIAGONAL]
            assert sorted(lefts) == list(range(len(lp)))
            assert sorted(rights) == list(range(len(rp)))
            assert (DIAGONAL, DIAGONAL) not in result.pairs

    def test_cost_consistent_with_pairs(self):
        rng = np.random.default_rng(53)
        for p in (1.0, 2.0, 3.0):
            lp = random_diagram_pairs(rng, 4)
            rp = random_diagram_pairs(rng, 4)
            result = match_diagrams(diagram_from_pairs(lp), diagram_from_pairs(rp), p)
            total = 0.0
            for li, ri in result.pairs:
                if li == DIAGONAL:
                    b, d = rp[ri]
                    total += ((d - b) / math.sqrt(2)) ** p
                elif ri == DIAGONAL:
                    b, d = lp[li]
                    total += ((d - b) / math.sqrt(2)) ** p
                else:
                    (lb, ld), (rb, rd) = lp[li], rp[ri]
                    total += math.hypot(lb - rb, ld - rd) ** p
            assert result.cost == pytest.approx(total ** (1 / p), abs=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(55)
        lp = random_diagram_pairs(rng, 4)
        rp = random_diagram_pairs(rng, 4)
        a = match_diagrams(diagram_from_pairs(lp), diagram_from_pairs(rp), 2)
        b = match_diagrams(diagram_from_pairs(lp), diagram_from_pairs(rp), 2)
        assert a.pairs == b.pairs
        assert a.cost == b.cost


class TestOptimality:
    def test_wasserstein_matches_brute_force(self):
        rng = np.random.default_rng(61)
        checked = 0
        while checked < 60:
            lp = random_diagram_pairs(rng, 3)
            rp = random_diagram_pairs(rng, 3)
            if len(lp) + len(rp) > 6:
                continue
            checked += 1
            for p in (1.0, 2.0, 3.0):
                got = match_diagrams(diagram_from_pairs(lp), diagram_from_pairs(rp), p)
                assert got.cost == pytest.approx(brute_wasserstein(lp, rp, p), abs=1e-9)

    def test_bottleneck_matches_brute_force(self):
        rng = np.random.default_rng(67)
        for _ in range(60):
            lp = random_diagram_pairs(rng, 3)
            rp = random_diagram_pairs(rng, 3)
            got = match_diagrams(diagram_from_pairs(lp), diagram_from_pairs(rp), math.inf)
            assert got.cost == pytest.approx(brute_bottleneck(lp, rp), abs=1e-12)

    def test_assignment_solver_matches_permutation_minimum(self):
        rng = np.random.default_rng(71)
        for _ in range(40):
            size = int(rng.integers(1, 9))
            cost = rng.integers(0, 50, (size, size))
            rows, cols = linear_sum_assignment(cost)
            assert float(cost[rows, cols].sum()) == brute_assignment_cost(cost)


class TestMetricAxioms:
    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(73)
        for p in (1.0, 2.0, math.inf):
            for _ in range(25):
                a = diagram_from_pairs(random_diagram_pairs(rng, 4))
                b = diagram_from_pairs(random_diagram_pairs(rng, 4))
                c = diagram_from_pairs(random_diagram_pairs(rng, 4))
                ab = match_diagrams(a, b, p).cost
                ba = match_diagrams(b, a, p).cost
                ac = match_diagrams(a, c, p).cost
                cb = match_diagrams(c, b, p).cost
                assert abs(ab - ba) <= 1e-9
                assert ab <= ac + cb + 1e-9


class TestArgumentValidation:
    def test_p_below_one_rejected(self):
        d = diagram_from_pairs([(0.1, 0.2)])
        with pytest.raises(ValueError):
            match_diagrams(d, d, 0.5)

    def test_nan_rejected(self):
        d = diagram_from_pairs([(0.1, 0.2)])
        with pytest.raises(ValueError):
            match_diagrams(d, d, float("nan"))
