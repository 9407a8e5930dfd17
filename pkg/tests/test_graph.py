import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings

from cirfe.graph import (
    EmptyInterestError,
    Graph,
    LaplacianProcess,
    algebraic_connectivity,
    complete_graph,
    induced_subgraph,
    laplacian,
    path_graph,
    ring_graph,
    sample_laplacian,
)

from conftest import random_connected_graph, seeds


def test_edgeless_laplacian_is_zero():
    assert np.array_equal(laplacian(Graph(3, ())), np.zeros((3, 3)))


def test_single_edge():
    assert np.array_equal(laplacian(Graph(2, ((0, 1),))), [[1, -1], [-1, 1]])


def test_ring_spectrum_matches_circulant():
    lap = laplacian(ring_graph(10))
    assert np.all(np.diag(lap) == 2)
    assert np.allclose(lap.sum(axis=1), 0)
    expected = np.sort(2 - 2 * np.cos(2 * np.pi * np.arange(10) / 10))
    # independent eigensolver: the general (non-symmetric) one
    assert np.allclose(np.sort(np.linalg.eigvals(lap).real), expected, atol=1e-12)
    assert algebraic_connectivity(lap) == pytest.approx(0.3819660112501051, abs=1e-12)


def test_disconnected_and_complete():
    g = Graph(4, ((0, 1), (2, 3)))
    assert algebraic_connectivity(laplacian(g)) == pytest.approx(0, abs=1e-12)
    for n in range(2, 7):
        assert algebraic_connectivity(laplacian(complete_graph(n))) == pytest.approx(n)


@pytest.mark.parametrize("edges", [((0, 0),), ((0, 1), (1, 0)), ((0, 5),)])
def test_invalid_graphs(edges):
    with pytest.raises(ValueError):
        Graph(3, edges)


def test_connectivity_matches_bfs_exhaustive_small():
    # every graph on up to 5 nodes, plus random samples on 6 and 7
    for n in range(1, 6):
        pairs = list(itertools.combinations(range(n), 2))
        for bits in range(1 << len(pairs)):
            edges = tuple(p for i, p in enumerate(pairs) if bits >> i & 1)
            g = Graph(n, edges)
            assert (algebraic_connectivity(laplacian(g)) > 1e-10 or n == 1) == g.is_connected()
    rng = np.random.default_rng(0)
    for n in (6, 7):
        pairs = list(itertools.combinations(range(n), 2))
        for _ in range(300):
            edges = tuple(p for p in pairs if rng.random() < 0.3)
            g = Graph(n, edges)
            ref = nx.is_connected(nx.Graph(edges)) if len({v for e in edges for v in e}) == n else False
            assert g.is_connected() == ref
            assert (algebraic_connectivity(laplacian(g)) > 1e-10) == ref


def test_hop_distances():
    d = path_graph(5).hop_distances(0)
    assert d.tolist() == [0, 1, 2, 3, 4]
    assert Graph(3, ((0, 1),)).hop_distances(0).tolist() == [0, 1, -1]


def test_induced_subgraph_examples():
    g = path_graph(5)
    sub, relabel = induced_subgraph(g, [0, 4])
    assert sub.n == 2 and sub.edges == () and not sub.is_connected()
    ring_sub, relabel = induced_subgraph(ring_graph(10), [8, 9, 0, 1, 2])
    assert len(ring_sub.edges) == 4 and ring_sub.is_connected()
    assert sorted(relabel) == [0, 1, 2, 8, 9]
    full, _ = induced_subgraph(g, range(5))
    assert full == g
    with pytest.raises(EmptyInterestError):
        induced_subgraph(g, [])


def test_sample_laplacian_static_and_deterministic():
    proc = LaplacianProcess(ring_graph(10), 1.0)
    assert np.array_equal(sample_laplacian(proc, 7), laplacian(ring_graph(10)))
    rnd = LaplacianProcess(ring_graph(10), 0.5, seed=3)
    assert np.array_equal(sample_laplacian(rnd, 11), sample_laplacian(rnd, 11))


def test_sample_mean_converges():
    proc = LaplacianProcess(ring_graph(10), 0.5, seed=1)
    samples = np.stack([proc.sample_laplacian(t) for t in range(10_000)])
    base = laplacian(ring_graph(10))
    mean = samples.mean(axis=0)
    assert np.abs(mean - 0.5 * base).max() < 0.05
    se = samples.std(axis=0) / np.sqrt(len(samples))
    assert np.all(np.abs(mean - 0.5 * base) <= 3 * se + 1e-12)
    # every sample is a Laplacian of a subgraph of the base
    off = samples - np.einsum("tii->ti", samples)[:, :, None] * np.eye(10)
    assert np.all((off == 0) | ((off == -1) & (base == -1)))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_sampled_laplacians_are_valid(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, int(rng.integers(2, 9)))
    proc = LaplacianProcess(g, float(rng.uniform(0.1, 1.0)), seed)
    lap = proc.sample_laplacian(int(rng.integers(1000)))
    assert np.array_equal(lap, lap.T)
    assert np.allclose(lap.sum(axis=1), 0)
    assert np.linalg.eigvalsh(lap)[0] >= -1e-10


def test_graph_json_round_trip():
    g = ring_graph(6)
    d = g.to_dict()
    assert d["edges"][0] == [1, 2]
    assert Graph.from_dict(d) == g
    proc = LaplacianProcess(g, 0.7, 5)
    assert LaplacianProcess.from_dict(proc.to_dict()) == proc
