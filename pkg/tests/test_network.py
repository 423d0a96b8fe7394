import json
from fractions import Fraction

import numpy as np
import pytest

from rdslab.errors import DataError, DegenerateBlockError, InputError, StatsUndefinedError
from rdslab.network import (EdgeBlockCounts, PartiallyDirectedNetwork, block_edge_counts,
                            canonical_edges, degree_vectors, edge_ratio_in, in_degree,
                            in_ratio_matrix, network_stats, out_degree, partial_in_degree,
                            read_network, write_network)

from _oracle import dense_adjacency
from conftest import random_network


@pytest.mark.parametrize("node,k,expected", [(1, 1, 1), (1, 0, 1), (0, 1, 0), (0, 0, 1), (2, 1, 1)])
def test_partial_in_degree_toy(toy3, node, k, expected):
    assert partial_in_degree(toy3, node, k) == expected


def test_partial_in_degree_empty():
    net = PartiallyDirectedNetwork.empty([1, 0, 0])
    assert all(partial_in_degree(net, i, k) == 0 for i in range(3) for k in (0, 1))


def test_degrees_toy(toy3):
    assert in_degree(toy3, 1) == 2
    assert out_degree(toy3, 0) == 1
    assert in_degree(toy3, 0) == 1


def test_isolated_node_degrees():
    net = PartiallyDirectedNetwork(3, [0, 1, 0], [(0, 1)], None)
    assert in_degree(net, 2) == 0 and out_degree(net, 2) == 0


@pytest.mark.parametrize("bad", [-1, 3, 10])
def test_out_of_range_node(toy3, bad):
    with pytest.raises(InputError):
        partial_in_degree(toy3, bad, 0)
    with pytest.raises(InputError):
        in_degree(toy3, bad)


def test_block_counts_toy(toy3):
    assert block_edge_counts(toy3) == EdgeBlockCounts(e11=1, e10=1, e01=2, e00=0)


def test_block_counts_within_undirected_counts_twice():
    net = PartiallyDirectedNetwork(2, [1, 1], None, [(0, 1)])
    assert block_edge_counts(net) == EdgeBlockCounts(2, 0, 0, 0)


def test_block_counts_empty():
    assert block_edge_counts(PartiallyDirectedNetwork.empty([0, 1])).total == 0


def test_edge_ratio_in_examples():
    c = EdgeBlockCounts(1, 1, 2, 0)
    assert edge_ratio_in(c, 1, 1, exact=True) == Fraction(1, 3)
    assert edge_ratio_in(c, 0, 1) == 1.0
    assert edge_ratio_in(c, 1, 0) + edge_ratio_in(c, 1, 1) == pytest.approx(1.0)


def test_edge_ratio_single_status():
    net = PartiallyDirectedNetwork(3, [1, 1, 1], [(0, 1)], [(1, 2)])
    assert edge_ratio_in(block_edge_counts(net), 1, 1) == 1.0
    with pytest.raises(DegenerateBlockError):
        edge_ratio_in(block_edge_counts(net), 0, 1)
    assert in_ratio_matrix(block_edge_counts(net), fallback=0.5)[0].tolist() == [0.5, 0.5]


def test_stats_h_undefined_without_cross_entries():
    net = PartiallyDirectedNetwork(4, [1, 1, 0, 0], [(0, 1), (2, 3)], None)
    with pytest.raises(StatsUndefinedError):
        network_stats(net)


def test_stats_equal_densities_give_unit_h():
    # complete directed graph on two infected and two uninfected nodes
    d = [(0, 1), (2, 3)]
    u = [(0, 2), (0, 3), (1, 2), (1, 3)]
    net = PartiallyDirectedNetwork(4, [1, 1, 0, 0], d, u)
    # e11 = 1 of 2 ordered pairs; cross = 8 of 8 -> 0.5 / 1
    assert network_stats(net).h == pytest.approx(0.5)
    net = PartiallyDirectedNetwork(4, [1, 1, 0, 0], None, [(0, 1), *u])
    assert network_stats(net).h == pytest.approx(1.0)


def test_stats_definitions_toy(toy3):
    s = network_stats(toy3)
    assert s.alpha == pytest.approx(2 / 4)
    assert s.lam == pytest.approx(4 / 3)
    assert s.mu == pytest.approx(2 / 3)
    # in-degrees (1, 2, 1), out-degrees (1, 1, 2)
    assert s.m == pytest.approx(1.5 / 1)
    assert s.w == pytest.approx(1.0 / 2)


@pytest.mark.parametrize("seed", range(8))
def test_counts_match_dense_adjacency(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, int(rng.integers(5, 50)))
    y = dense_adjacency(net.n, net.directed, net.undirected)
    z = net.status.astype(int)
    c = block_edge_counts(net)
    assert c.e10 == int((y * np.outer(z, 1 - z)).sum())
    assert c.e01 == int((y * np.outer(1 - z, z)).sum())
    assert c.e11 == int((y * np.outer(z, z)).sum())
    assert c.e00 == int((y * np.outer(1 - z, 1 - z)).sum())
    assert np.array_equal(net.in_degrees, y.sum(axis=0))
    assert np.array_equal(net.out_degrees, y.sum(axis=1))
    assert net.in_degrees.sum() == net.out_degrees.sum() == net.n_entries
    pin = net.partial_in_degrees
    assert np.array_equal(pin.sum(axis=0), net.in_degrees)
    assert np.array_equal(pin[1], (y * z[:, None]).sum(axis=0))


@pytest.mark.parametrize("seed", range(4))
def test_stub_sums_balance(seed):
    net = random_network(np.random.default_rng(seed), 30)
    dv = degree_vectors(net)
    z = net.status.astype(bool)
    # columns: in1, in0, out1, out0, und1, und0
    assert dv[~z, 4].sum() == dv[z, 5].sum()
    assert dv[z, 3].sum() == dv[~z, 0].sum()
    assert dv[~z, 2].sum() == dv[z, 1].sum()
    assert dv[z, 2].sum() == dv[z, 0].sum()
    assert dv[z, 4].sum() % 2 == 0 and dv[~z, 5].sum() % 2 == 0


def test_degree_vectors_toy(toy3):
    assert degree_vectors(toy3).tolist() == [[0, 1, 1, 0, 0, 0],
                                             [1, 0, 0, 0, 0, 1],
                                             [0, 0, 1, 0, 1, 0]]


@pytest.mark.parametrize("directed,undirected", [
    ([(0, 1), (1, 0)], None),
    ([(0, 1)], [(0, 1)]),
    ([(0, 0)], None),
    ([(0, 1), (0, 1)], None),
])
def test_constructor_rejects_non_canonical(directed, undirected):
    with pytest.raises(InputError):
        PartiallyDirectedNetwork(2, [0, 1], directed, undirected)


def test_canonical_edges_rules():
    d, u, rep = canonical_edges(4, [(0, 1), (1, 0), (2, 3), (2, 3), (1, 1), (3, 0)], [(0, 3)])
    assert d.tolist() == [[2, 3]]
    assert u.tolist() == [[0, 1], [0, 3]]
    assert rep == {"loops": 1, "parallel_directed": 1, "parallel_undirected": 0,
                   "antiparallel": 1, "mixed": 1}


def test_json_round_trip(tmp_path, toy3):
    p = tmp_path / "net.json"
    write_network(toy3, p)
    assert read_network(p) == toy3
    obj = json.loads(p.read_text())
    assert obj == {"n": 3, "status": [1, 1, 0], "directed": [[0, 1], [2, 0]],
                   "undirected": [[1, 2]]}


def test_read_network_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DataError):
        read_network(p)
    p.write_text(json.dumps({"n": 2, "status": [0, 1], "directed": [[0, 1], [1, 0]],
                             "undirected": []}))
    with pytest.raises(DataError):
        read_network(p)


def test_network_is_immutable(toy3):
    with pytest.raises(ValueError):
        toy3.status[0] = 0
