from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kuramoto_eq.graphs import (
    AdjacencyMatrix,
    GraphFlags,
    GroupSpec,
    build_circulant,
    build_complete,
    build_erdos_renyi,
    build_g_circulant,
    build_join,
    build_ring,
    is_circulant,
)


def test_example1_matrix_written_out():
    A = build_circulant(4, [0, 0, 1, 1])
    expected = np.array(
        [
            [0, 0, 1, 1],
            [1, 0, 0, 1],
            [1, 1, 0, 0],
            [0, 1, 1, 0],
        ],
        dtype=float,
    )
    assert np.array_equal(A.entries, expected)
    assert A.flags == GraphFlags(symmetric=False, circulant=True, zero_diagonal=True)


def test_single_node_circulant_is_zero():
    A = build_circulant(1, [0])
    assert A.entries.shape == (1, 1) and A.entries[0, 0] == 0.0


def test_symmetric_flag_from_palindromic_row():
    A = build_circulant(5, [0, 1, 0, 0, 1])
    hand = np.zeros((5, 5))
    for i in range(5):
        hand[i, (i + 1) % 5] = hand[i, (i - 1) % 5] = 1
    assert np.array_equal(A.entries, hand)
    assert A.flags.symmetric


@pytest.mark.parametrize(
    "n,row,msg",
    [
        (4, [0, 1, 1], "length"),
        (3, [0, float("nan"), 1], "finite"),
        (3, [1, 1, 1], "self-loop"),
    ],
)
def test_circulant_rejects(n, row, msg):
    with pytest.raises(ValueError, match=msg):
        build_circulant(n, row)


def test_self_loops_allowed_on_request():
    A = build_circulant(3, [2, 1, 0], allow_self_loops=True)
    assert np.all(np.diag(A.entries) == 2) and not A.flags.zero_diagonal


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=12))
def test_circulant_shift_invariant(vals):
    row = [0] + vals
    n = len(row)
    a = build_circulant(n, row).entries
    for i in range(n):
        for j in range(n):
            assert a[i, j] == a[(i + 1) % n, (j + 1) % n] == row[(j - i) % n]


def test_ring_50_10_row_sums():
    A = build_ring(50, 10)
    assert np.all(A.entries.sum(axis=1) == 20)
    assert A.flags.symmetric and A.flags.circulant
    assert A.entries[0, 10] == 1 and A.entries[0, 11] == 0 and A.entries[0, 40] == 1 and A.entries[0, 39] == 0


def test_ring_small_cases():
    assert np.array_equal(build_ring(3, 1).entries, build_complete(3).entries)
    assert build_ring(6, 2).entries[0].tolist() == [0, 1, 1, 0, 1, 1]


@pytest.mark.parametrize("n,k", [(5, 0), (5, 3), (4, 2), (2, 1)])
def test_ring_rejects_bad_k(n, k):
    with pytest.raises(ValueError):
        build_ring(n, k)


def test_complete_graph():
    A = build_complete(3)
    assert np.array_equal(A.entries, np.ones((3, 3)) - np.eye(3))
    assert np.all(build_complete(7).entries.sum(axis=1) == 6)
    with pytest.raises(ValueError):
        build_complete(1)


def test_join_blocks_and_flags():
    C = build_ring(5, 2)
    J = build_join(C, C, 0.25, 0.75)
    a = J.entries
    assert np.array_equal(a[:5, :5], C.entries) and np.array_equal(a[5:, 5:], C.entries)
    assert np.all(a[:5, 5:] == 0.25) and np.all(a[5:, :5] == 0.75)
    assert not J.flags.symmetric and not J.flags.circulant
    assert build_join(C, C, 0.5, 0.5).flags.symmetric


def test_join_zero_coupling_is_block_diagonal_with_layer_eigenvector():
    C = build_ring(5, 1)
    J = build_join(C, C, 0.0, 0.0)
    v = np.exp(2j * np.pi * np.arange(5) / 5)
    lam = 2 * math.cos(2 * math.pi / 5)
    x = np.concatenate([v, np.zeros(5)])
    assert np.linalg.norm(J.entries @ x - lam * x) < 1e-12


def test_join_rejects_non_circulant_layer():
    er = build_erdos_renyi(5, 0.5, 0)
    with pytest.raises(ValueError, match="circulant"):
        build_join(er, build_ring(5, 1), 1, 1)


def test_group_spec_basics():
    G = GroupSpec.parse("2x4")
    assert G.factors == (2, 4) and G.order == 8
    assert G.elements()[:5] == [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0)]
    assert G.add((1, 3), (1, 2)) == (0, 1)
    assert G.inverse((1, 3)) == (1, 1)
    assert all(G.index(g) == k for k, g in enumerate(G))
    with pytest.raises(ValueError):
        GroupSpec((0,))


def test_g_circulant_over_cyclic_is_example1():
    A = build_g_circulant(GroupSpec((4,)), {0: 0, 1: 0, 2: 1, 3: 1})
    assert np.array_equal(A.entries, build_circulant(4, [0, 0, 1, 1]).entries)
    assert A.flags.circulant


def test_klein_four_with_unit_coefficients_is_k4():
    G = GroupSpec((2, 2))
    A = build_g_circulant(G, {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1})
    assert np.array_equal(A.entries, build_complete(4).entries)
    assert A.flags.symmetric


def test_g_circulant_zero_map_and_missing():
    G = GroupSpec((2, 3))
    zero = build_g_circulant(G, {g: 0 for g in G})
    assert not np.any(zero.entries)
    with pytest.raises(ValueError, match="missing"):
        build_g_circulant(G, {(0, 0): 0})


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=10))
def test_g_circulant_cyclic_matches_circulant(vals):
    row = [0] + vals
    n = len(row)
    G = GroupSpec((n,))
    A = build_g_circulant(G, dict(enumerate(row)))
    assert np.array_equal(A.entries, build_circulant(n, row).entries)


@given(st.sampled_from([(2, 2), (2, 4), (3, 3), (6,)]), st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_g_circulant_entry_rule(factors, seed):
    G = GroupSpec(factors)
    rng = np.random.default_rng(seed)
    coeffs = {g: float(rng.integers(-3, 4)) for g in G}
    coeffs[G.identity()] = 0.0
    a = build_g_circulant(G, coeffs).entries
    elems = G.elements()
    for t, tau in enumerate(elems):
        for s, sigma in enumerate(elems):
            diff = tuple((y - x) % f for x, y, f in zip(tau, sigma, factors))
            assert a[t, s] == coeffs[diff]


def test_erdos_renyi_structure_and_determinism():
    A = build_erdos_renyi(40, 0.3, 7)
    a = A.entries
    assert np.array_equal(a, a.T) and not np.any(np.diag(a))
    assert set(np.unique(a)) <= {0.0, 1.0}
    assert A == build_erdos_renyi(40, 0.3, 7)
    assert not np.array_equal(a, build_erdos_renyi(40, 0.3, 8).entries)


def test_erdos_renyi_documented_stream_order():
    n, p, seed = 6, 0.5, 11
    u = np.random.Generator(np.random.PCG64(seed)).random(n * (n - 1) // 2)
    k = 0
    a = build_erdos_renyi(n, p, seed).entries
    for i in range(n):
        for j in range(i + 1, n):
            assert a[i, j] == float(u[k] < p)
            k += 1


def test_erdos_renyi_edge_density_within_four_sigma():
    n, p = 100, 0.25
    pairs = n * (n - 1) // 2
    sigma = math.sqrt(pairs * p * (1 - p))
    for seed in range(5):
        edges = build_erdos_renyi(n, p, seed).entries.sum() / 2
        assert abs(edges - pairs * p) <= 4 * sigma


def test_erdos_renyi_extremes():
    assert not np.any(build_erdos_renyi(10, 0.0, 1).entries)
    assert np.array_equal(build_erdos_renyi(10, 1.0, 1).entries, build_complete(10).entries)
    with pytest.raises(ValueError):
        build_erdos_renyi(10, 1.5, 1)


def test_flags_are_verified():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="symmetric"):
        AdjacencyMatrix(a, GraphFlags(symmetric=True))
    with pytest.raises(ValueError, match="diagonal"):
        AdjacencyMatrix(np.eye(2), GraphFlags())
    with pytest.raises(ValueError, match="circulant"):
        AdjacencyMatrix(a, GraphFlags(circulant=True))
    with pytest.raises(ValueError):
        AdjacencyMatrix(np.zeros((2, 3)))


def test_entries_are_read_only():
    A = build_ring(5, 1)
    with pytest.raises(ValueError):
        A.entries[0, 0] = 1.0


def test_scaled_and_is_circulant():
    A = build_ring(7, 2)
    assert np.array_equal(A.scaled(10.0).entries, 10.0 * A.entries)
    assert is_circulant(A.entries)
    assert not is_circulant(np.diag([1.0, 2.0, 3.0]))
