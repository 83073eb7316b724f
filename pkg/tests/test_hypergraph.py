import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from genramsey.hypergraph import (ParameterError, PatternGraph, RamseyParams,
                                  complete_host, complete_pattern, copies_containing,
                                  enumerate_copies, load_host, parse_pattern, write_edge_list)
from oracles import naive_copies
from strategies import graphs, patterns


def edge_sets(index):
    return {frozenset(index.host.edges[e] for e in row) for row in index.edges.tolist()}


def test_complete_host_counts():
    G = complete_host(6, 2)
    assert G.num_edges == 15
    assert complete_host(6, 3).num_edges == 20
    with pytest.raises(ParameterError):
        complete_host(1, 2)


def test_edge_ids_vectorized_matches_lookup():
    G = complete_host(9, 3)
    rows = np.array(G.edges)
    assert G.edge_ids(rows).tolist() == list(range(G.num_edges))


def test_isolated_pattern_vertex_rejected():
    with pytest.raises(ParameterError):
        PatternGraph(p=4, k=2, edges=((0, 1), (1, 2)))


def test_params_derived_values():
    P = RamseyParams.from_pattern(complete_pattern(4), 4)
    assert (P.r, P.s, P.beta, P.non_integral) == (6, 3, Fraction(1, 4), True)
    assert not RamseyParams(2, 4, 6, 5).non_integral
    with pytest.raises(ParameterError):
        RamseyParams(2, 4, 6, 7)


def test_k4_copies_in_k6():
    G = complete_host(6, 2)
    idx = enumerate_copies(G, complete_pattern(4))
    assert len(idx) == 15
    assert idx.edges.shape == (15, 6)


def test_no_copies_when_host_too_small():
    G = complete_host(3, 2)
    assert len(enumerate_copies(G, complete_pattern(4))) == 0


def test_path_copies_in_triangle():
    # P3 has |Aut| = 2, so K3 holds 3!/2 = 3 labelled-distinct ones.
    P3 = PatternGraph(p=3, k=2, edges=((0, 1), (1, 2)))
    assert len(enumerate_copies(complete_host(3, 2), P3)) == 3


def test_hypergraph_pattern():
    F = complete_pattern(4, k=3)
    idx = enumerate_copies(complete_host(6, 3), F)
    assert len(idx) == math.comb(6, 4)
    assert edge_sets(idx) == naive_copies(6, complete_host(6, 3).edges, F.edges, 4)


@given(graphs(), patterns())
def test_copies_match_brute_force(G, F):
    idx = enumerate_copies(G, F)
    expected = naive_copies(G.n, G.edges, F.edges, F.p)
    assert len(idx) == len(expected)
    assert edge_sets(idx) == expected


@given(graphs(), patterns())
def test_copy_rows_follow_pattern_edge_order(G, F):
    idx = enumerate_copies(G, F)
    for row, verts in zip(idx.edges.tolist(), idx.vertices.tolist()):
        for e, pe in zip(row, F.edges):
            assert G.edges[e] == tuple(sorted(verts[v] for v in pe))


@given(graphs(max_n=6), patterns(max_p=4))
def test_inverse_index_is_exact(G, F):
    idx = enumerate_copies(G, F)
    for e in range(G.num_edges):
        expected = [i for i, row in enumerate(idx.edges.tolist()) if e in row]
        assert idx.containing(e).tolist() == expected
        assert copies_containing(idx, G.edges[e]) == expected


@given(st.integers(4, 8), st.integers(3, 4))
def test_partner_table_lists_other_edges(n, p):
    idx = enumerate_copies(complete_host(n, 2), complete_pattern(p))
    P = idx.partner_table()
    for e in range(idx.host.num_edges):
        for t in range(idx.indptr[e], idx.indptr[e + 1]):
            row = idx.edges[idx.indices[t]].tolist()
            assert sorted(P[t].tolist() + [e]) == sorted(row)


def test_parse_pattern_and_edge_list_roundtrip(tmp_path):
    assert parse_pattern("K5").r == 10
    path = tmp_path / "c4.txt"
    write_edge_list(path, 4, 2, [(0, 1), (1, 2), (2, 3), (0, 3)])
    F = parse_pattern(str(path))
    assert (F.p, F.r, F.is_complete) == (4, 4, False)
    G = load_host(path)
    assert G.num_edges == 4 and not G.complete
    write_edge_list(tmp_path / "k4.txt", 4, 2, combinations(range(4), 2))
    assert load_host(tmp_path / "k4.txt").complete
