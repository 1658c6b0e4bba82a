import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idealbench.core import (BoxBounds, EvaluationBudget, clamp_to_bounds,
                             dominates, make_rng, non_dominated_filter)


def brute_force_non_dominated(objs):
    keep = []
    for i in range(len(objs)):
        if not any(dominates(objs[j], objs[i]) for j in range(len(objs)) if j != i):
            keep.append(i)
    return keep


class TestDominates:
    def test_strict_improvement(self):
        assert dominates([0, 0], [1, 1])

    def test_incomparable(self):
        assert not dominates([0, 1], [1, 0])
        assert not dominates([1, 0], [0, 1])

    def test_equality_is_not_dominance(self):
        assert not dominates([0, 0], [0, 0])

    def test_weak_improvement(self):
        assert dominates([0, 1], [0, 2])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dominates([0, 0], [0, 0, 0])

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=4))
    def test_irreflexive(self, vec):
        assert not dominates(vec, vec)

    @settings(max_examples=200)
    @given(st.integers(0, 2**32 - 1))
    def test_transitive_on_random_triples(self, seed):
        rng = make_rng(seed)
        u, v, w = rng.random((3, 3))
        if dominates(u, v) and dominates(v, w):
            assert dominates(u, w)


class TestNonDominatedFilter:
    def test_simple(self):
        idx = non_dominated_filter(np.array([[0, 1], [1, 0], [1, 1]]))
        assert idx.tolist() == [0, 1]

    def test_singleton(self):
        assert non_dominated_filter(np.array([[0.0, 0.0]])).tolist() == [0]

    def test_matches_pairwise_oracle(self):
        rng = make_rng(3)
        objs = rng.random((50, 2))
        assert non_dominated_filter(objs).tolist() == brute_force_non_dominated(objs)

    def test_matches_oracle_with_ties(self):
        rng = make_rng(4)
        objs = np.round(rng.random((120, 3)), 1)  # many exact ties
        assert non_dominated_filter(objs).tolist() == brute_force_non_dominated(objs)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            non_dominated_filter(np.empty((0, 2)))


class TestBounds:
    def test_clamp_projection(self):
        b = BoxBounds(np.zeros(2), np.ones(2))
        assert clamp_to_bounds(np.array([1.2, -0.5]), b).tolist() == [1.0, 0.0]

    def test_clamp_identity_inside(self):
        b = BoxBounds(np.zeros(2), np.ones(2))
        x = np.array([0.3, 0.8])
        assert clamp_to_bounds(x, b).tolist() == x.tolist()

    def test_clamp_symmetric_box(self):
        b = BoxBounds(-np.ones(2), np.ones(2))
        assert clamp_to_bounds(np.array([-2.0, 3.0]), b).tolist() == [-1.0, 1.0]

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            BoxBounds(np.ones(2), np.ones(2))

    def test_sample_inside(self):
        b = BoxBounds(np.array([0.0, -1.0]), np.array([1.0, 1.0]))
        xs = b.sample(500, make_rng(0))
        assert b.contains(xs)


class TestRandomSource:
    def test_identical_streams(self):
        a, b = make_rng(1234), make_rng(1234)
        assert np.array_equal(a.random(100), b.random(100))
        assert np.array_equal(a.standard_normal(50), b.standard_normal(50))

    def test_distinct_seeds_differ(self):
        assert not np.array_equal(make_rng(1).random(10), make_rng(2).random(10))

    def test_bit_identical_across_processes(self):
        import subprocess
        import sys

        script = (
            "import numpy as np; from idealbench.core import make_rng; "
            "print(make_rng(99).random(5).tobytes().hex())"
        )
        outs = {
            subprocess.run([sys.executable, "-c", script],
                           capture_output=True, text=True, check=True).stdout
            for _ in range(2)
        }
        assert len(outs) == 1
        assert next(iter(outs)).strip() == make_rng(99).random(5).tobytes().hex()


class TestEvaluationBudget:
    def test_truncates_to_remaining(self):
        budget = EvaluationBudget(5, _eval=lambda xs: xs * 2.0)
        out = budget.evaluate(np.ones((3, 2)))
        assert out.shape == (3, 2) and budget.used == 3
        out = budget.evaluate(np.ones((4, 2)))
        assert out.shape == (2, 2) and budget.used == 5 and budget.exhausted
        assert budget.evaluate(np.ones((1, 2))).shape[0] == 0
