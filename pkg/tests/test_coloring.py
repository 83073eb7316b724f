import numpy as np
import pytest
from hypothesis import given, strategies as st

from genramsey.coloring import (ListAssignment, PartialColoring, UNCOLORED, colors_used,
                                distinct_per_row, make_lists, read_witness, verify_coloring,
                                write_witness)
from genramsey.hypergraph import ParameterError, complete_host, complete_pattern, enumerate_copies
from oracles import naive_copies, naive_valid


def test_rainbow_k4_valid_for_every_q():
    G = complete_host(4, 2)
    F = complete_pattern(4)
    idx = enumerate_copies(G, F)
    phi = PartialColoring(G, np.arange(6))
    for q in range(1, 7):
        assert verify_coloring(G, F, q, phi, idx).valid


def test_monochromatic_triangle_reported():
    G = complete_host(3, 2)
    F = complete_pattern(3)
    idx = enumerate_copies(G, F)
    report = verify_coloring(G, F, 2, PartialColoring(G, np.zeros(3, dtype=int)), idx)
    assert not report.valid and report.violations == [(0, 1)]


def test_partial_coloring_rejected_by_verifier():
    G = complete_host(4, 2)
    F = complete_pattern(3)
    with pytest.raises(ParameterError):
        verify_coloring(G, F, 2, PartialColoring(G), enumerate_copies(G, F))


def test_mapping_access():
    G = complete_host(4, 2)
    phi = PartialColoring.from_mapping(G, {(1, 0): 3})
    assert phi[(0, 1)] == 3
    with pytest.raises(KeyError):
        phi[(2, 3)]
    assert not phi.is_total


@given(st.lists(st.lists(st.integers(0, 5), min_size=1, max_size=16), min_size=1, max_size=12)
       .filter(lambda rows: len({len(r) for r in rows}) == 1))
def test_distinct_per_row(rows):
    arr = np.array(rows)
    assert distinct_per_row(arr).tolist() == [len(set(r)) for r in rows]


@given(st.integers(3, 7), st.sampled_from([3, 4]), st.integers(0, 10_000), st.integers(1, 4))
def test_verifier_matches_brute_force(n, p, seed, t):
    G = complete_host(n, 2)
    F = complete_pattern(p)
    idx = enumerate_copies(G, F)
    copies = naive_copies(n, G.edges, F.edges, p)
    colors = np.random.default_rng(seed).integers(0, t, G.num_edges)
    phi = PartialColoring(G, colors)
    for q in range(1, F.r + 1):
        assert verify_coloring(G, F, q, phi, idx).valid == naive_valid(phi.as_dict(), copies, q)


def test_make_lists_modes():
    G = complete_host(5, 2)
    assert make_lists(G, 3).palette() == [0, 1, 2]
    disjoint = make_lists(G, 2, "disjoint")
    assert len(disjoint.palette()) == 20
    rand = make_lists(G, 3, "random", seed=4, pool_size=7)
    assert rand.T == 3 and set(rand.palette()) <= set(range(7))
    with pytest.raises(ParameterError):
        make_lists(G, 3, "random", pool_size=2)
    with pytest.raises(ParameterError):
        ListAssignment(G, np.zeros((10, 2), dtype=int))


def test_respects_lists():
    G = complete_host(3, 2)
    L = make_lists(G, 2)
    assert L.respects(PartialColoring(G, np.array([0, 1, UNCOLORED])))
    assert not L.respects(PartialColoring(G, np.array([0, 2, 1])))


def test_colors_used_examples():
    G = complete_host(4, 2)
    assert colors_used(PartialColoring(G, np.arange(6))) == 6
    K3 = complete_host(3, 2)
    assert colors_used(PartialColoring(K3, np.zeros(3, dtype=int))) == 1


def test_witness_roundtrip(tmp_path):
    G = complete_host(5, 2)
    phi = PartialColoring(G, np.arange(10) % 3)
    write_witness(tmp_path / "w.txt", phi)
    assert read_witness(G, tmp_path / "w.txt") == phi
