import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edamcc.stats import (
    EXACT_LIMIT,
    mann_whitney_u,
    significance_marker,
    summarize,
)


def enumeration_oracle_p(a, b):
    """Exhaustive two-tailed p: every assignment of pooled ranks to group A is
    equally likely under the null; p = 2 * P(U <= min(U_a, U_b)), capped at 1."""
    n_a, n_b = len(a), len(b)
    pooled = sorted(a + b)
    ranks_a = [pooled.index(v) + 1 for v in a]  # distinct values assumed
    u_a = sum(ranks_a) - n_a * (n_a + 1) / 2
    u_b = n_a * n_b - u_a
    u_small = min(u_a, u_b)
    total = 0
    hits = 0
    for combo in itertools.combinations(range(1, n_a + n_b + 1), n_a):
        u = sum(combo) - n_a * (n_a + 1) / 2
        total += 1
        if u <= u_small:
            hits += 1
    return min(1.0, 2.0 * hits / total)


class TestSummarize:
    def test_basic(self):
        s = summarize([1.0, 2.0, 3.0])
        assert s.count == 3 and s.mean == 2.0 and s.sample_std == 1.0
        assert s.min == 1.0 and s.max == 3.0

    def test_single_value(self):
        s = summarize([5.0])
        assert s.mean == 5.0 and s.sample_std == 0.0

    def test_all_zero(self):
        s = summarize([0.0, 0.0, 0.0, 0.0])
        assert s.mean == 0.0 and s.sample_std == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])


class TestMannWhitney:
    def test_textbook_example(self):
        result = mann_whitney_u([1.0, 2.0], [3.0, 4.0])
        assert result.u_statistic == 0.0
        assert result.method == "exact"
        assert result.p_two_tailed == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_identical_samples(self):
        result = mann_whitney_u([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert abs(result.p_two_tailed - 1.0) < 0.05

    def test_normal_approximation_close_to_exact(self):
        # force the approximation path via the internal helper and compare
        # against the enumeration oracle on tie-free samples
        from edamcc.stats import _normal_two_tailed_p

        rng = np.random.default_rng(0)
        for _ in range(20):
            a = list(rng.normal(size=5))
            b = list(rng.normal(size=5))
            pooled = a + b
            ranks = {v: r + 1 for r, v in enumerate(sorted(pooled))}
            u_a = sum(ranks[v] for v in a) - 5 * 6 / 2
            approx = _normal_two_tailed_p(u_a, 5, 5, [1] * 10)
            exact = enumeration_oracle_p(a, b)
            assert abs(approx - exact) < 0.05

    def test_exact_matches_enumeration_oracle(self):
        rng = np.random.default_rng(1)
        for n_a in range(1, 6):
            for n_b in range(1, 6):
                if n_a + n_b > 10:
                    continue
                for _ in range(3):
                    a = list(np.round(rng.uniform(0, 100, n_a), 6))
                    b = list(np.round(rng.uniform(0, 100, n_b), 6))
                    if len(set(a + b)) != n_a + n_b:
                        continue
                    result = mann_whitney_u(a, b)
                    assert result.method == "exact"
                    assert result.p_two_tailed == pytest.approx(
                        enumeration_oracle_p(a, b), abs=1e-12)

    def test_large_samples_use_approximation(self):
        rng = np.random.default_rng(2)
        a = list(rng.normal(size=12))
        b = list(rng.normal(size=12))
        assert mann_whitney_u(a, b).method == "normal-approximation"

    def test_ties_use_approximation_even_when_small(self):
        result = mann_whitney_u([1.0, 2.0, 2.0], [2.0, 3.0])
        assert result.method == "normal-approximation"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mann_whitney_u([], [1.0])
        with pytest.raises(ValueError):
            mann_whitney_u([1.0], [])

    def test_exact_limit_is_sixteen(self):
        assert EXACT_LIMIT == 16

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=10),
           st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=10))
    def test_u_sum_identity(self, a, b):
        result = mann_whitney_u(a, b)
        u_b = len(a) * len(b) - result.u_statistic
        assert 0.0 - 1e-9 <= result.u_statistic <= len(a) * len(b) + 1e-9
        assert 0.0 - 1e-9 <= u_b

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=10),
           st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=10))
    def test_symmetry(self, a, b):
        assert mann_whitney_u(a, b).p_two_tailed == pytest.approx(
            mann_whitney_u(b, a).p_two_tailed, abs=1e-12)

    # dyadic grid keeps v + shift exact, so tie structure is preserved
    _grid = st.integers(min_value=-2000, max_value=2000).map(lambda k: k * 0.5)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(_grid, min_size=2, max_size=8),
           st.lists(_grid, min_size=2, max_size=8),
           _grid)
    def test_translation_invariance(self, a, b, shift):
        base = mann_whitney_u(a, b)
        moved = mann_whitney_u([v + shift for v in a], [v + shift for v in b])
        assert moved.u_statistic == pytest.approx(base.u_statistic, abs=1e-9)
        assert moved.p_two_tailed == pytest.approx(base.p_two_tailed, abs=1e-9)

    def test_dominated_pair_gives_zero_u(self):
        result = mann_whitney_u([1.0, 2.0, 3.0], [10.0, 11.0, 12.0, 13.0])
        assert result.u_statistic == 0.0


class TestSignificanceMarker:
    def test_thresholds(self):
        assert significance_marker(0.0005) == "§"
        assert significance_marker(0.005) == "†"
        assert significance_marker(0.03) == "*"
        assert significance_marker(0.5) == ""

    def test_ascii_aliases(self):
        assert significance_marker(0.0005, style="ascii") == "***"
        assert significance_marker(0.005, style="ascii") == "**"
        assert significance_marker(0.03, style="ascii") == "*"
        assert significance_marker(0.5, style="ascii") == ""

    def test_boundaries_are_strict(self):
        assert significance_marker(0.05) == ""
        assert significance_marker(0.01) == "*"
        assert significance_marker(0.001) == "†"

    def test_invalid_p_rejected(self):
        with pytest.raises(ValueError):
            significance_marker(1.5)
