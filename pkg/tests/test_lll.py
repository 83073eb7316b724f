import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genramsey.coloring import PartialColoring, UNCOLORED, make_lists, verify_coloring
from genramsey.hypergraph import (ParameterError, RamseyParams, complete_host, complete_pattern,
                                  enumerate_copies)
from genramsey.lll import calibrate_constant, lll_budget, lll_parameters, moser_tardos_color
from oracles import reference_moser_tardos

K4 = complete_pattern(4)
P4466 = RamseyParams.from_pattern(K4, 4)


def test_bad_event_probability_is_exact():
    prm = lll_parameters(30, P4466, 50)
    exact = Fraction(math.comb(300, 3)) * Fraction(3, 50) ** 6
    assert prm.p_bad == pytest.approx(float(exact), rel=1e-15)
    assert prm.d == 6 * math.comb(30, 2)


def test_lll_condition_flips_with_t():
    # e p (d + 1) <= 1 needs a large palette; find where it starts to hold.
    small = lll_parameters(30, P4466, 100)
    large = lll_parameters(30, P4466, 10_000)
    assert not small.ok and large.ok
    t = next(t for t in range(100, 10_000) if lll_parameters(30, P4466, t).ok)
    with_margin = math.e * lll_parameters(30, P4466, t).p_bad * (6 * math.comb(30, 2) + 1)
    assert with_margin <= 1
    assert math.e * lll_parameters(30, P4466, t - 1).p_bad * (6 * math.comb(30, 2) + 1) > 1


def test_lll_parameters_reject_small_t():
    with pytest.raises(ParameterError):
        lll_parameters(10, P4466, 2)


@given(st.integers(3, 200), st.fractions(min_value=Fraction(1, 8), max_value=8, max_denominator=16))
def test_lll_budget_is_exact_ceiling(n, C):
    T = lll_budget(n, P4466, float(C))
    c = Fraction(float(C))
    # T >= C n^(2/3) and T - 1 < C n^(2/3), decided by cubing.
    assert Fraction(T) ** 3 >= c ** 3 * n ** 2
    assert Fraction(T - 1) ** 3 < c ** 3 * n ** 2


def test_lll_budget_perfect_power():
    P = RamseyParams(2, 4, 6, 5)  # s = 2, exponent 1
    assert lll_budget(16, P, 1.0) == 16
    assert lll_budget(64, P4466, 1.0) == 16


@pytest.mark.parametrize("n,T,seed", [(7, 5, 0), (8, 6, 1), (9, 6, 2), (10, 8, 3), (8, 4, 5)])
def test_compiled_loop_matches_reference(n, T, seed):
    G = complete_host(n, 2)
    idx = enumerate_copies(G, K4)
    L = make_lists(G, T)
    cap = 3000
    res = moser_tardos_color(G, K4, 4, L, idx, seed=seed, max_resamples=cap)
    colors, resamples, ok = reference_moser_tardos(L.lists, idx.edges, 4, seed, cap)
    assert res.resamples == resamples
    assert res.success == ok
    assert np.array_equal(res.coloring.colors, colors)


def test_reference_crosses_chunk_boundary():
    # A palette too small to succeed forces more than one block of pre-drawn positions.
    G = complete_host(6, 2)
    idx = enumerate_copies(G, K4)
    L = make_lists(G, 3)
    res = moser_tardos_color(G, K4, 4, L, idx, seed=9, max_resamples=5000)
    colors, resamples, ok = reference_moser_tardos(L.lists, idx.edges, 4, 9, 5000)
    assert not ok and not res.success and res.resamples == resamples == 5000
    assert np.array_equal(res.coloring.colors, colors)
    assert res.remaining_violations == len(verify_coloring(G, K4, 4, res.coloring, idx))



@pytest.mark.parametrize("p,q,T,mode", [(3, 2, 3, "random"), (3, 3, 4, "shared"), (4, 4, 5, "disjoint"),
                                        (4, 5, 6, "random"), (4, 6, 8, "shared")])
@pytest.mark.parametrize("seed", range(4))
def test_graph_kernel_matches_generic(p, q, T, mode, seed):
    G = complete_host(10, 2)
    F = complete_pattern(p)
    idx = enumerate_copies(G, F)
    L = make_lists(G, T, mode, seed=seed, pool_size=T + 3)
    fast = moser_tardos_color(G, F, q, L, idx, seed=seed, max_resamples=20000)
    slow = moser_tardos_color(G, F, q, L, idx, seed=seed, max_resamples=20000, specialized=False)
    assert (fast.resamples, fast.success) == (slow.resamples, slow.success)
    assert np.array_equal(fast.coloring.colors, slow.coloring.colors)


@pytest.mark.parametrize("n,p,q,T,mode", [(66, 3, 2, 3, "random"), (70, 4, 4, 30, "shared")])
def test_graph_kernel_matches_generic_across_words(n, p, q, T, mode):
    # Hosts with more than 64 vertices need two bitset words per row.
    G = complete_host(n, 2)
    F = complete_pattern(p)
    idx = enumerate_copies(G, F)
    L = make_lists(G, T, mode, seed=1, pool_size=T + 2)
    fast = moser_tardos_color(G, F, q, L, idx, seed=5, max_resamples=3000)
    slow = moser_tardos_color(G, F, q, L, idx, seed=5, max_resamples=3000, specialized=False)
    assert (fast.resamples, fast.success) == (slow.resamples, slow.success)
    assert np.array_equal(fast.coloring.colors, slow.coloring.colors)


def test_generic_kernel_matches_reference_on_hypergraph():
    G = complete_host(7, 3)
    F = complete_pattern(4, 3)
    idx = enumerate_copies(G, F)
    L = make_lists(G, 3)
    res = moser_tardos_color(G, F, 3, L, idx, seed=4, max_resamples=4000)
    colors, resamples, ok = reference_moser_tardos(L.lists, idx.edges, 3, 4, 4000)
    assert (res.resamples, res.success) == (resamples, ok)
    assert np.array_equal(res.coloring.colors, colors)


@given(st.integers(5, 12), st.integers(0, 1000), st.sampled_from(["shared", "random", "disjoint"]))
@settings(max_examples=25)
def test_success_is_valid_and_respects_lists(n, seed, mode):
    G = complete_host(n, 2)
    idx = enumerate_copies(G, K4)
    L = make_lists(G, 12, mode, seed=seed, pool_size=20)
    res = moser_tardos_color(G, K4, 4, L, idx, seed=seed)
    assert res.success
    assert verify_coloring(G, K4, 4, res.coloring, idx).valid
    assert L.respects(res.coloring)


def test_deterministic_under_seed():
    G = complete_host(15, 2)
    idx = enumerate_copies(G, K4)
    L = make_lists(G, 15)
    a = moser_tardos_color(G, K4, 4, L, idx, seed=11)
    b = moser_tardos_color(G, K4, 4, L, idx, seed=11)
    assert a.resamples == b.resamples and a.coloring == b.coloring


def test_initial_coloring_kept_where_colored():
    G = complete_host(6, 2)
    idx = enumerate_copies(G, K4)
    L = make_lists(G, 15)
    init = PartialColoring(G, np.r_[np.arange(8), np.full(7, UNCOLORED)])
    res = moser_tardos_color(G, K4, 4, L, idx, seed=0, initial=init)
    assert res.success
    if res.resamples == 0:
        assert res.coloring.colors[:8].tolist() == list(range(8))


def test_no_copies_is_immediate_success():
    G = complete_host(3, 2)
    res = moser_tardos_color(G, K4, 4, make_lists(G, 1), enumerate_copies(G, K4))
    assert res.success and res.resamples == 0


def test_calibration_doubles_then_stops():
    C, hist = calibrate_constant(lambda c: c >= 3.0, start=1.0)
    assert C == 4.0 and [h[0] for h in hist] == [1.0, 2.0, 4.0]
    C, hist = calibrate_constant(lambda c: c >= 0.3, start=1.0)
    assert C == 0.5 and hist[-1] == (0.25, False)
    with pytest.raises(RuntimeError):
        calibrate_constant(lambda c: False, max_steps=3)
