import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeconv.errors import EmptyMeasure, MassNotNormalized, NonpositiveMass, OrderTooLarge
from freeconv.measures import (
    WeightedNodeSet,
    format_nodes,
    free_cumulants,
    make_discrete,
    make_nodes,
    moments,
    moments_from_cumulants,
    parse_nodes,
)


# --- brute-force oracle over non-crossing partitions -------------------------


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def _is_noncrossing(part):
    for a, b in itertools.combinations(part, 2):
        for p, r in itertools.combinations(sorted(a), 2):
            for q, s in itertools.combinations(sorted(b), 2):
                if p < q < r < s or q < p < s < r:
                    return False
    return True


def _nc_moments(kappa):
    out = []
    for n in range(1, len(kappa) + 1):
        total = 0.0
        for part in _set_partitions(list(range(n))):
            if _is_noncrossing(part):
                total += math.prod(kappa[len(b) - 1] for b in part)
        out.append(total)
    return np.array(out)


def test_partition_oracle_counts_catalan():
    counts = [sum(_is_noncrossing(p) for p in _set_partitions(list(range(n)))) for n in range(1, 7)]
    assert counts == [1, 2, 5, 14, 42, 132]


def test_make_discrete_examples():
    assert make_discrete([(0, 1.0)]).atoms == [(0.0, 1.0)]
    assert make_discrete([(1, 0.5), (-1, 0.5)]).atoms == [(-1.0, 0.5), (1.0, 0.5)]
    assert make_discrete([(0, 0.3), (0, 0.2), (1, 0.5)]).atoms == [(0.0, 0.5), (1.0, 0.5)]


def test_make_discrete_errors():
    with pytest.raises(EmptyMeasure):
        make_discrete([])
    with pytest.raises(MassNotNormalized):
        make_discrete([(0, 0.5), (1, 0.4)])
    with pytest.raises(NonpositiveMass):
        make_discrete([(0, 1.2), (1, -0.2)])


def test_make_discrete_renormalizes_small_drift():
    mu = make_discrete([(0, 0.5 + 4e-10), (1, 0.5)])
    assert abs(sum(mu.masses) - 1) < 1e-15


def test_moments_examples():
    np.testing.assert_allclose(moments(make_discrete([(-1, .5), (1, .5)]), 4), [0, 1, 0, 1])
    np.testing.assert_allclose(moments(make_discrete([(0, 1)]), 3), [0, 0, 0])
    np.testing.assert_allclose(moments(make_discrete([(0, .8), (1, .2)]), 3), [0.2, 0.2, 0.2])
    with pytest.raises(OrderTooLarge):
        moments(make_discrete([(0, 1)]), 33)


def test_free_cumulant_examples():
    np.testing.assert_allclose(free_cumulants([0, 1, 0, 2, 0, 5]), [0, 1, 0, 0, 0, 0], atol=1e-14)
    np.testing.assert_allclose(free_cumulants([0, 1, 0, 1]), [0, 1, 0, -1], atol=1e-14)
    np.testing.assert_allclose(free_cumulants([0, 0, 0]), [0, 0, 0])
    np.testing.assert_allclose(moments_from_cumulants([0, 1]), [0, 1])
    np.testing.assert_allclose(moments_from_cumulants([0, 1, 0, 0]), [0, 1, 0, 2])


def test_cumulant_examples_match_partition_oracle():
    np.testing.assert_allclose(_nc_moments([0, 1, 0, 0, 0, 0]), [0, 1, 0, 2, 0, 5])
    np.testing.assert_allclose(_nc_moments([0, 1, 0, -1]), [0, 1, 0, 1])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=6))
def test_recursion_matches_partition_oracle(kappa):
    np.testing.assert_allclose(moments_from_cumulants(kappa), _nc_moments(kappa), atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=10))
def test_cumulant_round_trip(kappa):
    back = free_cumulants(moments_from_cumulants(kappa))
    assert np.max(np.abs(back - np.array(kappa))) < 1e-10


atoms_strategy = st.lists(
    st.tuples(st.floats(-5, 5), st.floats(0.01, 1.0)), min_size=1, max_size=6
)


def _normalize(raw):
    total = sum(w for _, w in raw)
    return [(x, w / total) for x, w in raw]


@settings(max_examples=100, deadline=None)
@given(atoms_strategy)
def test_variance_nonnegative_and_idempotent(raw):
    mu = make_discrete(_normalize(raw))
    m = moments(mu, 2)
    assert m[1] - m[0] ** 2 >= -1e-12
    assert make_discrete(mu.atoms) == mu
    assert all(b > a for a, b in zip(mu.positions[:-1], mu.positions[1:]))
    assert abs(sum(mu.masses) - 1) < 1e-12


def test_nodes_and_text_syntax():
    nodes = parse_nodes("1:0.5, -1:0.25,0:0")
    assert nodes == [(1.0, 0.5), (-1.0, 0.25), (0.0, 0.0)]
    ws = make_nodes(nodes)
    assert ws.positions == (-1.0, 1.0) and ws.total_mass == 0.75
    assert parse_nodes("") == []
    assert WeightedNodeSet().is_zero
    assert parse_nodes(format_nodes(ws.nodes)) == ws.nodes
    with pytest.raises(ValueError):
        parse_nodes("1;2")
