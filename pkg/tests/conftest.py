"""Shared fixtures: canonical scenarios, random spec factories, slow oracles.

The random factories deliberately produce strictly positive kernels so that
every prefix has positive probability and exhaustive sweeps really are
exhaustive.  The Neumann-sum resolvent here is an independent oracle for the
production back-substitution solver: same mathematical object, different
algorithm.
"""

import numpy as np
import pytest

from seqbound import (
    ProcessSpec,
    TargetFunction,
    build_causal_tree,
    build_from_tables,
    build_independent,
    build_markov,
    enumeration_cost,
    table_target,
)

CANONICAL_TRANSITION = np.array([[0.9, 0.1], [0.2, 0.8]])
CANONICAL_INIT = np.array([1.0, 0.0])


# ============================================================
# Independent oracles
# ============================================================


def neumann_resolvent(h: np.ndarray) -> np.ndarray:
    """Resolvent of a strictly upper-triangular matrix as the finite power sum."""
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    total = np.eye(n)
    power = np.eye(n)
    for _ in range(n - 1):
        power = power @ h
        total += power
    return total


def brute_force_expectation(spec: ProcessSpec, f: TargetFunction) -> float:
    """Expectation by full trajectory enumeration, independent of the DFS oracle."""
    from seqbound import all_trajectories, joint_probability

    return sum(
        joint_probability(spec, path) * f.evaluate(path)
        for path in all_trajectories(spec.horizon, spec.alphabet.size)
    )


# ============================================================
# Random scenario factories
# ============================================================


def random_positive_tables(rng: np.random.Generator, horizon: int, size: int) -> list:
    """Fully general kernels with entries bounded away from zero."""
    tables = []
    for step in range(1, horizon + 1):
        rows = size ** (step - 1)
        raw = rng.uniform(0.05, 1.0, size=(rows, size))
        tables.append(raw / raw.sum(axis=1, keepdims=True))
    return tables


def random_positive_spec(rng: np.random.Generator, horizon: int, size: int) -> ProcessSpec:
    return build_from_tables(random_positive_tables(rng, horizon, size))


def random_table_target(rng: np.random.Generator, horizon: int, size: int) -> TargetFunction:
    values = rng.uniform(-1.0, 1.0, size=enumeration_cost(horizon, size))
    return table_target(values, horizon, size)


def random_tree(rng: np.random.Generator, horizon: int, max_degree: int):
    """Random parent vector with out-degree capped at max_degree."""
    parent = [0]
    slots = {1: max_degree}
    for node in range(2, horizon + 1):
        open_nodes = [p for p, free in slots.items() if free > 0]
        p = int(rng.choice(open_nodes))
        slots[p] -= 1
        slots[node] = max_degree
        parent.append(p)
    return parent


# ============================================================
# Canonical fixtures
# ============================================================


@pytest.fixture
def markov3() -> ProcessSpec:
    return build_markov(CANONICAL_TRANSITION, CANONICAL_INIT, 3)


@pytest.fixture
def markov8() -> ProcessSpec:
    return build_markov(CANONICAL_TRANSITION, CANONICAL_INIT, 8)


@pytest.fixture
def star_tree() -> ProcessSpec:
    """One root with four children; every edge has influence 0.2."""
    edge = np.array([[0.6, 0.4], [0.4, 0.6]])
    return build_causal_tree([0, 1, 1, 1, 1], edge, np.array([0.5, 0.5]))


@pytest.fixture
def fair_bits() -> ProcessSpec:
    return build_independent(np.array([0.5, 0.5]), 10)
