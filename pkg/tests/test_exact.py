import math
from itertools import product

import numpy as np
import pytest
from pysat.formula import CNF
from pysat.solvers import Solver

from genramsey.coloring import PartialColoring, make_lists, verify_coloring
from genramsey.encoder import SizeLimitError
from genramsey.exact import exact_min_colors, exact_min_colors_list, export_cnf
from genramsey.hypergraph import (ParameterError, complete_host, complete_pattern,
                                  enumerate_copies)
from oracles import naive_min_colors

K3, K4 = complete_pattern(3), complete_pattern(4)


def sat(doc):
    with Solver(name="g3", bootstrap_with=CNF(from_string=doc.to_dimacs()).clauses) as s:
        return s.solve()


def check_witness(n, F, q, res):
    G = res.witness.host
    assert verify_coloring(G, F, q, res.witness, enumerate_copies(G, F)).valid
    assert len(set(res.witness.colors.tolist())) == res.value


@pytest.mark.parametrize("n,F,q,value", [(3, K3, 2, 2), (4, K4, 6, 6), (6, K3, 2, 3), (5, K3, 2, 2),
                                         (6, K4, 4, 4), (7, K3, 2, 3), (6, K4, 5, 5), (4, K4, 5, 5)])
def test_anchor_values(n, F, q, value):
    res = exact_min_colors(n, 2, F, q)
    assert res.value == value
    assert res.nodes_explored > 0
    check_witness(n, F, q, res)


@pytest.mark.parametrize("n,F,q", [(3, K3, 1), (3, K3, 3), (4, K3, 2), (4, K4, 3), (4, K4, 4),
                                   (5, K4, 4), (5, K3, 3), (5, K4, 2)])
def test_matches_exhaustive_product_search(n, F, q):
    assert exact_min_colors(n, 2, F, q).value == naive_min_colors(n, 2, F.edges, F.p, q)


def test_hints_do_not_change_the_value():
    for hint in (1, 2, 3, 4, 15):
        res = exact_min_colors(6, 2, K3, 2, upper_hint=hint)
        assert res.value == 3
        check_witness(6, K3, 2, res)


def test_monotone_in_n_and_q():
    by_n = [exact_min_colors(n, 2, K4, 4).value for n in range(4, 7)]
    assert by_n == sorted(by_n)
    by_q = [exact_min_colors(5, 2, K4, q).value for q in range(1, 7)]
    assert by_q == sorted(by_q)


def test_hypergraph_host():
    res = exact_min_colors(5, 3, complete_pattern(4, 3), 2)
    assert res.value == 2
    G = res.witness.host
    F = complete_pattern(4, 3)
    assert verify_coloring(G, F, 2, res.witness, enumerate_copies(G, F)).valid


def test_guard():
    with pytest.raises(SizeLimitError):
        exact_min_colors(8, 2, K3, 2)
    with pytest.raises(SizeLimitError):
        exact_min_colors(6, 2, K3, 2, guard=10)
    with pytest.raises(ParameterError):
        exact_min_colors(5, 3, K3, 2)


def test_list_examples():
    G3 = complete_host(3, 2)
    assert exact_min_colors_list(3, 2, K3, 2, make_lists(G3, 2)) is not None
    phi = exact_min_colors_list(3, 2, K3, 2, make_lists(G3, 1, "disjoint"))
    assert phi is not None and len(set(phi.colors.tolist())) == 3
    G4 = complete_host(4, 2)
    assert exact_min_colors_list(4, 2, K4, 6, make_lists(G4, 5)) is None
    with pytest.raises(SizeLimitError):
        exact_min_colors_list(8, 2, K3, 2, make_lists(complete_host(8, 2), 2))


def test_list_witness_respects_lists():
    G = complete_host(5, 2)
    for seed in range(5):
        L = make_lists(G, 2, "random", seed=seed, pool_size=4)
        phi = exact_min_colors_list(5, 2, K3, 2, L)
        idx = enumerate_copies(G, K3)
        brute = any(verify_coloring(G, K3, 2, pc, idx).valid for pc in _all_list_colorings(G, L))
        assert (phi is not None) == brute
        if phi is not None:
            assert L.respects(PartialColoring(G, phi.colors))
            assert verify_coloring(G, K3, 2, PartialColoring(G, phi.colors), idx).valid


def _all_list_colorings(G, L):
    for cols in product(*[row.tolist() for row in L.lists]):
        yield PartialColoring(G, np.array(cols))


def test_cnf_examples():
    assert not sat(export_cnf(3, 2, K3, 2, 1))
    assert sat(export_cnf(3, 2, K3, 2, 2))
    doc = export_cnf(3, 2, K3, 2, 2)
    text = doc.to_dimacs()
    assert text.splitlines()[-1].endswith(" 0")
    header = [l for l in text.splitlines() if l.startswith("p ")]
    assert header == [f"p cnf {doc.num_vars} {len(doc.clauses)}"]
    assert all(l.startswith("c ") for l in text.splitlines()[: len(doc.comments)])


@pytest.mark.parametrize("n,F,q,t", [(3, K3, 2, 3), (4, K4, 6, 6), (4, K4, 4, 4), (5, K3, 2, 2)])
def test_cnf_variable_count(n, F, q, t):
    doc = export_cnf(n, 2, F, q, t)
    G = complete_host(n, 2)
    m, N = G.num_edges, len(enumerate_copies(G, F))
    assert doc.num_vars == m * t + N * t + N * (t - 1) * (t - q)
    assert any(f"counter vars {N * (t - 1) * (t - q)}" in c for c in doc.comments)


def _small_instances():
    out = []
    for n in range(3, 6):
        for F in (K3, K4):
            if F.p > n or math.comb(n, 2) > 10:
                continue
            for q in range(1, F.r + 1):
                out.append((n, F, q))
    return out


@pytest.mark.parametrize("n,F,q", _small_instances())
def test_cnf_agrees_with_solver(n, F, q):
    value = exact_min_colors(n, 2, F, q).value
    for t in range(1, value + 2):
        assert sat(export_cnf(n, 2, F, q, t)) == (value <= t)


def test_cnf_with_lists_agrees():
    G = complete_host(4, 2)
    for seed in range(6):
        L = make_lists(G, 2, "random", seed=seed, pool_size=3)
        expect = exact_min_colors_list(4, 2, K3, 2, L) is not None
        assert sat(export_cnf(4, 2, K3, 2, 3, L)) == expect
    assert not sat(export_cnf(4, 2, K4, 6, 6, make_lists(G, 5)))


def test_cnf_write(tmp_path):
    doc = export_cnf(3, 2, K3, 2, 2)
    doc.write(tmp_path / "a.cnf")
    assert (tmp_path / "a.cnf").read_text() == doc.to_dimacs()
    with pytest.raises(ParameterError):
        export_cnf(3, 2, K3, 2, 0)


@pytest.mark.parametrize("n,F,q", [(4, K3, 2), (4, K4, 4), (5, K3, 2), (4, K4, 6)])
def test_symmetry_breaking_keeps_satisfiability(n, F, q):
    for t in range(1, 7):
        assert sat(export_cnf(n, 2, F, q, t, symmetry=True)) == sat(export_cnf(n, 2, F, q, t, symmetry=False))
    with pytest.raises(ParameterError):
        export_cnf(n, 2, F, q, 3, make_lists(complete_host(n, 2), 3), symmetry=True)


def test_cnf_model_decodes_to_valid_coloring():
    doc = export_cnf(6, 2, K3, 2, 3)
    with Solver(name="g3", bootstrap_with=doc.clauses) as s:
        assert s.solve()
        model = set(v for v in s.get_model() if v > 0)
    G = complete_host(6, 2)
    colors = [next(c for c in range(3) if 1 + e * 3 + c in model) for e in range(G.num_edges)]
    assert verify_coloring(G, K3, 2, PartialColoring(G, np.array(colors)), enumerate_copies(G, K3)).valid
