"""Process construction, enumeration, and the exact expectation oracles."""

import numpy as np
import pytest

from seqbound import (
    EnumerationBudgetError,
    all_trajectories,
    build_causal_tree,
    build_from_tables,
    build_independent,
    build_markov,
    build_sliding_window,
    enumeration_cost,
    ensure_budget,
    exact_expectation,
    joint_probability,
    kernel_at,
    mixed_radix_rank,
    mixed_radix_unrank,
    prefix_expectation_table,
    sum_symbols,
    table_target,
    terminal_symbol,
)
from conftest import (
    CANONICAL_INIT,
    CANONICAL_TRANSITION,
    brute_force_expectation,
    random_positive_spec,
    random_table_target,
)

EXACT_TOL = 1e-12


# ============================================================
# Constructors and validation
# ============================================================


class TestConstructors:
    def test_markov_shape(self):
        spec = build_markov(CANONICAL_TRANSITION, CANONICAL_INIT, 5)
        assert spec.horizon == 5
        assert spec.alphabet.size == 2
        assert spec.family == "markov"
        assert spec.signature_coords(1) == ()
        for step in range(2, 6):
            assert spec.signature_coords(step) == (step - 1,)

    def test_markov_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            build_markov(np.array([[0.9, 0.2], [0.2, 0.8]]), CANONICAL_INIT, 3)
        with pytest.raises(ValueError):
            build_markov(CANONICAL_TRANSITION, np.array([0.5, 0.6]), 3)
        with pytest.raises(ValueError):
            build_markov(CANONICAL_TRANSITION, CANONICAL_INIT, 0)

    def test_independent_signatures_empty(self):
        spec = build_independent(np.array([0.25, 0.75]), 4)
        for step in range(1, 5):
            assert spec.signature_coords(step) == ()

    def test_independent_per_step_marginals(self):
        rows = np.array([[0.2, 0.8], [0.6, 0.4], [1.0, 0.0]])
        spec = build_independent(rows)
        assert spec.horizon == 3
        assert np.allclose(kernel_at(spec, 2, (0,)), rows[1])

    def test_tree_parent_validation(self):
        edge = np.array([[0.6, 0.4], [0.4, 0.6]])
        root = np.array([0.5, 0.5])
        with pytest.raises(ValueError):
            build_causal_tree([0, 3, 1], edge, root)  # parent after child
        with pytest.raises(ValueError):
            build_causal_tree([1, 1], edge, root)  # node 1 cannot be its own parent

    def test_tree_meta(self, star_tree):
        assert star_tree.meta["out_degree"] == 4
        assert tuple(star_tree.meta["parent"]) == (0, 1, 1, 1, 1)
        for j in range(2, 6):
            assert star_tree.signature_coords(j) == (1,)

    def test_sliding_window_signatures(self):
        spec = build_sliding_window(
            2, lambda step, window: np.full(2, 0.5), 5, 2
        )
        assert spec.signature_coords(1) == ()
        assert spec.signature_coords(2) == (1,)
        assert spec.signature_coords(4) == (2, 3)
        assert spec.signature_coords(5) == (3, 4)

    def test_tables_roundtrip(self):
        rng = np.random.default_rng(7)
        spec = random_positive_spec(rng, 3, 2)
        assert spec.family == "table"
        total = sum(
            joint_probability(spec, path) for path in all_trajectories(3, 2)
        )
        assert abs(total - 1.0) < EXACT_TOL

    def test_bad_table_shapes(self):
        with pytest.raises(ValueError):
            build_from_tables([np.array([[0.5, 0.5]]), np.array([[1.0, 0.0]])])


# ============================================================
# Kernels and caching
# ============================================================


class TestKernelAt:
    def test_markov_kernel_values(self, markov3):
        assert np.allclose(kernel_at(markov3, 1, ()), CANONICAL_INIT)
        assert np.allclose(kernel_at(markov3, 2, (0,)), CANONICAL_TRANSITION[0])
        assert np.allclose(kernel_at(markov3, 3, (0, 1)), CANONICAL_TRANSITION[1])

    def test_out_of_signature_coordinates_ignored(self, markov3):
        a = kernel_at(markov3, 3, (0, 1))
        b = kernel_at(markov3, 3, (1, 1))
        assert np.array_equal(a, b)

    def test_kernel_read_only(self, markov3):
        vec = kernel_at(markov3, 2, (0,))
        with pytest.raises(ValueError):
            vec[0] = 0.3

    def test_history_validation(self, markov3):
        with pytest.raises(ValueError):
            kernel_at(markov3, 2, ())
        with pytest.raises(ValueError):
            kernel_at(markov3, 2, (2,))


# ============================================================
# Enumeration utilities
# ============================================================


class TestEnumeration:
    def test_mixed_radix_roundtrip(self):
        for rank in range(3 ** 4):
            symbols = mixed_radix_unrank(rank, 4, 3)
            assert mixed_radix_rank(symbols, 3) == rank

    def test_first_symbol_most_significant(self):
        assert mixed_radix_rank((1, 0, 0), 2) == 4

    def test_all_trajectories_count_and_order(self):
        paths = list(all_trajectories(3, 2))
        assert len(paths) == 8
        assert paths[0] == (0, 0, 0)
        assert paths[-1] == (1, 1, 1)
        assert paths == sorted(paths)

    def test_budget_gate(self):
        assert ensure_budget(100, 1000, "task") == 1000  # returns the effective limit
        with pytest.raises(EnumerationBudgetError) as err:
            ensure_budget(10_000, 100, "task")
        assert err.value.required == 10_000
        assert err.value.budget == 100

    def test_enumeration_cost(self):
        assert enumeration_cost(10, 2) == 1024


# ============================================================
# Exact expectation oracles
# ============================================================


class TestExactExpectation:
    def test_markov_terminal_two_steps(self):
        spec = build_markov(CANONICAL_TRANSITION, CANONICAL_INIT, 2)
        f = terminal_symbol(2, 2)
        assert abs(exact_expectation(spec, f) - 0.1) < EXACT_TOL

    def test_markov_terminal_three_steps(self, markov3):
        f = terminal_symbol(3, 2)
        assert abs(exact_expectation(spec=markov3, f=f) - 0.17) < EXACT_TOL

    def test_matches_brute_force_on_random_specs(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            horizon = int(rng.integers(2, 5))
            size = int(rng.integers(2, 4))
            spec = random_positive_spec(rng, horizon, size)
            f = random_table_target(rng, horizon, size)
            assert abs(exact_expectation(spec, f) - brute_force_expectation(spec, f)) < 1e-10

    def test_budget_error(self, markov8):
        with pytest.raises(EnumerationBudgetError):
            exact_expectation(markov8, sum_symbols(8, 2), budget=10)

    def test_joint_probability_frozen(self, markov3):
        assert abs(joint_probability(markov3, (0, 0, 1)) - 0.09) < EXACT_TOL
        assert joint_probability(markov3, (1, 0, 0)) == 0.0


class TestPrefixExpectationTable:
    def test_root_matches_expectation(self, markov3):
        f = terminal_symbol(3, 2)
        table = prefix_expectation_table(markov3, f)
        assert abs(table[()] - 0.17) < EXACT_TOL

    def test_leaves_match_target(self, markov3):
        f = sum_symbols(3, 2)
        table = prefix_expectation_table(markov3, f)
        for path in all_trajectories(3, 2):
            assert abs(table[path] - f.evaluate(path)) < EXACT_TOL

    def test_tower_property(self):
        rng = np.random.default_rng(3)
        spec = random_positive_spec(rng, 4, 2)
        f = random_table_target(rng, 4, 2)
        table = prefix_expectation_table(spec, f)
        for prefix in [(), (0,), (1,), (0, 1), (1, 0)]:
            step = len(prefix) + 1
            vec = kernel_at(spec, step, prefix)
            blended = sum(vec[s] * table[prefix + (s,)] for s in range(2))
            assert abs(table[prefix] - blended) < 1e-12
