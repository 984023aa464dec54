import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specind.certify import gap_lower_bound, mixing_from_gap
from specind.gibbs import BoundaryCondition, GibbsParams, brute_marginals
from specind.glauber import (
    codes_to_plus,
    empirical_mixing,
    glauber_step,
    independent_sets,
    plus_probability,
    transition_matrix,
    tv_from_start,
)
from specind.graph_core import Graph, parse_graph_spec
from specind.influence import spectral_independence_eta

from conftest import connected_graphs, gibbs_params

K2 = parse_graph_spec("path:2")


def test_hardcore_conditionals():
    g = parse_graph_spec("path:3")
    p = GibbsParams.hardcore(2.0)
    assert plus_probability(g, p, np.array([True, False, False]), 1) == 0.0
    assert plus_probability(g, p, np.array([False, False, False]), 1) == pytest.approx(2 / 3)


@given(st.integers(0, 4), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_ising_conditional_matches_brute_force(k_plus, beta, lam):
    # centre of a star with k_plus of its 4 leaves at +1
    star = parse_graph_spec("star:4")
    p = GibbsParams(min(beta, 1 / beta), max(beta, 1 / beta), lam)
    pins = {leaf: (1 if leaf <= k_plus else -1) for leaf in range(1, 5)}
    exact = brute_marginals(star, p, BoundaryCondition.of(pins))[0]
    plus = np.array([False] + [pins[v] == 1 for v in range(1, 5)])
    assert plus_probability(star, p, plus, 0) == pytest.approx(exact, rel=1e-12)


def test_glauber_step_changes_at_most_one_site(rng):
    g = parse_graph_spec("cycle:5")
    p = GibbsParams.ising(0.7)
    s = np.ones(5, dtype=int)
    for _ in range(50):
        t = glauber_step(g, p, s, rng)
        assert np.sum(t != s) <= 1
        s = t


def test_k2_hardcore_chain():
    ch = transition_matrix(K2, GibbsParams.hardcore(1.0))
    assert len(ch.codes) == 3
    assert np.allclose(ch.pi, 1 / 3)


def test_independent_spins_product_chain():
    g = parse_graph_spec("cycle:4")
    ch = transition_matrix(g, GibbsParams.ising(1.0))
    assert np.allclose(ch.pi, 1 / 16)
    # each coordinate is refreshed with probability 1/n: gap = 1/n
    assert ch.gap == pytest.approx(1 / 4, abs=1e-10)


def test_c4_pipeline():
    g = parse_graph_spec("cycle:4")
    p = GibbsParams.ising(0.8)
    eta = spectral_independence_eta(g, p).eta
    ch = transition_matrix(g, p)
    lb = gap_lower_bound(g.n, max(eta, 0.0))
    assert lb is not None and ch.gap >= lb
    assert ch.t_mix <= mixing_from_gap(ch.gap, ch.pi_min)


@given(connected_graphs(min_n=2, max_n=5), gibbs_params())
def test_chain_is_reversible_and_stochastic(g, p):
    ch = transition_matrix(g, p)
    P = ch.P.toarray()
    assert np.allclose(P.sum(axis=1), 1.0)
    assert ch.detailed_balance_error <= 1e-12 and ch.stationarity_error <= 1e-12
    plus = codes_to_plus(ch.codes, g.n)
    assert np.allclose(ch.pi @ plus, brute_marginals(g, p), atol=1e-12)
    ev = np.sort(np.linalg.eigvals(P).real)
    if len(ev) > 1:
        assert 1 - max(abs(ev[0]), abs(ev[-2])) == pytest.approx(ch.gap, abs=1e-9)
    assert np.all(np.diff(ch.tv_curve) <= 1e-12)


@given(connected_graphs(min_n=1, max_n=8))
def test_independent_sets_by_brute_force(g):
    codes = independent_sets(g, 1 << 12)
    plus = codes_to_plus(np.arange(2**g.n), g.n)
    ok = [all(not (s[u] and s[v]) for u, v in g.edges) for s in plus]
    assert codes.tolist() == np.nonzero(ok)[0].tolist()


def test_empirical_matches_exact_within_error_bars():
    g = parse_graph_spec("path:4")
    p = GibbsParams.ising(0.6)
    emp = empirical_mixing(g, p, 4000, 30, seed=1)
    assert emp.proxy[0] == pytest.approx(np.max(np.abs(0 - brute_marginals(g, p))))
    exact_tv = tv_from_start(g, p, np.zeros(g.n, dtype=bool), 30)
    # the marginal discrepancy never exceeds TV by more than a few standard errors
    assert np.all(emp.proxy <= exact_tv + 5 * emp.stderr + 1e-12)
    assert emp.proxy[-1] <= 5 * emp.stderr[-1] + exact_tv[-1]


def test_empirical_deterministic():
    g = parse_graph_spec("cycle:5")
    p = GibbsParams.hardcore(1.5)
    a = empirical_mixing(g, p, 200, 20, seed=4)
    b = empirical_mixing(g, p, 200, 20, seed=4)
    assert np.array_equal(a.proxy, b.proxy) and np.array_equal(a.final_states, b.final_states)


def test_hardcore_chain_stays_in_support():
    g = parse_graph_spec("cycle:6")
    emp = empirical_mixing(g, GibbsParams.hardcore(3.0), 300, 40, seed=2)
    X = emp.final_states
    for u, v in g.edges:
        assert not np.any(X[:, u] & X[:, v])
