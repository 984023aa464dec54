import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specind.errors import DomainError, EmptySupport, InfeasibleBoundary, InvalidParams
from specind.gibbs import (
    BoundaryCondition,
    GibbsParams,
    brute_marginals,
    child_term,
    delta_c,
    enumerate_states,
    h_fn,
    hardcore_reduce,
    ising_interval,
    iter_pinnings,
    j_interval,
    lambda_c,
    log_ratio,
    marginal_lower_bound,
    sample_pinnings,
    sup_abs_h,
    thresholds,
    tree_recursion,
)
from specind.graph_core import Graph, parse_graph_spec

from conftest import connected_graphs, gibbs_params

K2 = parse_graph_spec("path:2")
P3 = parse_graph_spec("path:3")


def test_params_validation():
    with pytest.raises(InvalidParams):
        GibbsParams(2.0, 1.0, 1.0)  # beta > gamma
    with pytest.raises(InvalidParams):
        GibbsParams(0.5, 1.0, 0.0)
    p = GibbsParams.hardcore(2.0)
    assert p.kind == "hardcore" and p.beta == 0 and p.gamma == 1
    assert GibbsParams.from_json(p.to_json()) == p


def test_boundary_condition_checks():
    with pytest.raises(InvalidParams):
        BoundaryCondition.of({0: 2})
    b = BoundaryCondition.of({2: 1, 0: -1})
    assert b.items == ((0, -1), (2, 1)) and b.pinned == {0, 2}


def test_k2_marginals():
    hc = GibbsParams.hardcore(1.0)
    assert brute_marginals(K2, hc, BoundaryCondition.of({1: -1}))[0] == pytest.approx(0.5)
    assert brute_marginals(K2, hc, BoundaryCondition.of({1: 1}))[0] == 0.0
    assert brute_marginals(K2, GibbsParams.ising(3.0))[0] == pytest.approx(0.5)


def test_k2_log_ratio():
    lam = 2.5
    hc = GibbsParams.hardcore(lam)
    assert log_ratio(K2, hc, BoundaryCondition.of({1: -1}), 0) == pytest.approx(math.log(lam))
    assert log_ratio(K2, hc, BoundaryCondition.of({1: 1}), 0) == -math.inf
    single = Graph.from_edges(1, [])
    assert log_ratio(single, hc, None, 0) == pytest.approx(math.log(lam))


def test_infeasible_pinning():
    with pytest.raises(EmptySupport):
        enumerate_states(K2, GibbsParams.hardcore(1.0), BoundaryCondition.of({0: 1, 1: 1}))


def test_h_examples():
    beta = 0.3
    _, hs = tree_recursion(GibbsParams.ising(beta), [0.0])
    assert hs[0] == pytest.approx(-(1 - beta) / (1 + beta))
    H, hs = tree_recursion(GibbsParams.hardcore(1.0), [0.0])
    assert hs[0] == pytest.approx(-0.5)
    assert tree_recursion(GibbsParams.hardcore(3.0), [])[0] == pytest.approx(math.log(3.0))


def test_p3_recursion_matches_brute_force():
    p = GibbsParams(0.4, 1.7, 0.9)
    # root 0, child 1, grandchild 2
    leaf, _ = tree_recursion(p, [])
    mid, _ = tree_recursion(p, [leaf])
    top, _ = tree_recursion(p, [mid])
    assert top == pytest.approx(log_ratio(P3, p, None, 0), abs=1e-12)


@given(gibbs_params(), st.floats(-30, 30))
def test_h_is_derivative_of_child_term(p, x):
    eps = 1e-6
    num = (float(child_term(p, x + eps)) - float(child_term(p, x - eps))) / (2 * eps)
    assert float(h_fn(p, x)) == pytest.approx(num, abs=1e-6)


@given(gibbs_params())
def test_sup_abs_h_is_supremum(p):
    xs = np.linspace(-40, 40, 8001)
    grid = float(np.max(np.abs(h_fn(p, xs))))
    sup = sup_abs_h(p)
    assert grid <= sup + 1e-12
    if p.beta > 0:
        # attained at x = log sqrt(gamma/beta)
        assert float(abs(h_fn(p, 0.5 * math.log(p.gamma / p.beta)))) == pytest.approx(sup, rel=1e-9)


def test_sup_abs_h_examples():
    beta = 0.6
    assert sup_abs_h(GibbsParams.ising(beta)) == pytest.approx(abs(1 - beta) / (1 + beta))
    assert sup_abs_h(GibbsParams(0.5, 2.0, 1.0)) == 0.0
    assert sup_abs_h(GibbsParams.hardcore(7.0)) == 1.0


def test_child_term_limits():
    p = GibbsParams(0.5, 2.0, 1.0)
    assert float(child_term(p, math.inf)) == pytest.approx(math.log(0.5))
    assert float(child_term(p, -math.inf)) == pytest.approx(-math.log(2.0))
    hc = GibbsParams.hardcore(1.0)
    assert float(child_term(hc, math.inf)) == -math.inf
    assert float(h_fn(hc, math.inf)) == -1.0


def test_thresholds_examples():
    assert lambda_c(2) == pytest.approx(4.0, abs=1e-12)
    assert delta_c(4.0) == pytest.approx(2.0, abs=1e-9)
    lo, hi = ising_interval(2, 0.5)
    assert lo == pytest.approx(0.6) and hi == pytest.approx(5 / 3)
    assert thresholds("lambda_c", 2) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        lambda_c(1.0)
    with pytest.raises(DomainError):
        thresholds("nope", 1.0)


@given(st.floats(1.001, 200.0))
def test_delta_c_inverts_lambda_c(z):
    assert delta_c(lambda_c(z)) == pytest.approx(z, rel=1e-8)


@given(st.floats(1.0, 20.0), st.floats(0.01, 0.99))
def test_ising_interval_contains_one_and_certifies(k, delta):
    lo, hi = ising_interval(k, delta)
    assert lo < 1 < hi and lo * hi == pytest.approx(1.0)
    for beta in (lo, hi):
        assert sup_abs_h(GibbsParams.ising(beta)) == pytest.approx((1 - delta) / k, rel=1e-9)


def test_j_interval():
    p = GibbsParams(0.5, 2.0, 3.0)
    lo, hi = j_interval(p, 2)
    assert lo == pytest.approx(math.log(3.0) + 2 * math.log(0.5))
    assert hi == pytest.approx(math.log(3.0) - 2 * math.log(2.0))
    assert j_interval(GibbsParams.hardcore(2.0), 1)[0] == -math.inf


def test_hardcore_reduce_examples():
    r = hardcore_reduce(P3, BoundaryCondition.of({0: 1}))
    assert r.vertex_map == (2,) and r.edges == ()
    r = hardcore_reduce(P3, BoundaryCondition.of({0: -1}))
    assert r.vertex_map == (1, 2) and r.edges == ((0, 1),)
    r = hardcore_reduce(P3, BoundaryCondition())
    assert r.n == 3 and len(r.edges) == 2
    with pytest.raises(InfeasibleBoundary):
        hardcore_reduce(P3, BoundaryCondition.of({0: 1, 1: 1}))


@given(connected_graphs(max_n=6), st.floats(0.1, 5.0), st.data())
def test_hardcore_reduce_preserves_marginals(g, lam, data):
    p = GibbsParams.hardcore(lam)
    occupied = data.draw(st.sets(st.integers(0, g.n - 1), max_size=2))
    if any(w in occupied for v in occupied for w in g.adj[v]):
        return
    b = BoundaryCondition.of({v: 1 for v in occupied})
    r = hardcore_reduce(g, b)
    full = brute_marginals(g, p, b)
    if r.n == 0:
        return
    red = brute_marginals((r.n, r.edges), p)
    assert np.allclose(full[list(r.vertex_map)], red, atol=1e-12)


def test_marginal_lower_bound_examples():
    b, exact = marginal_lower_bound(K2, GibbsParams.hardcore(1.0))
    assert exact and b == pytest.approx(1 / 3)
    b, _ = marginal_lower_bound(parse_graph_spec("cycle:4"), GibbsParams.ising(1.0))
    assert b == pytest.approx(0.5)
    lam = 0.3
    b, _ = marginal_lower_bound(Graph.from_edges(1, []), GibbsParams.hardcore(lam))
    assert b == pytest.approx(min(lam, 1) / (1 + lam))


def test_iter_pinnings_count():
    n, k = 4, 2
    expected = sum(math.comb(n, j) * 2**j for j in range(k + 1))
    assert len(list(iter_pinnings(n, k))) == expected


def test_sample_pinnings_deterministic():
    a = list(sample_pinnings(6, 20, 5, 4))
    assert a == list(sample_pinnings(6, 20, 5, 4))
    assert all(len(b) <= 4 for b in a)


@given(connected_graphs(max_n=5), gibbs_params())
def test_enumeration_matches_naive_weights(g, p):
    e = enumerate_states(g, p)
    # naive product of weights
    total = 0.0
    for spins in itertools.product((0, 1), repeat=g.n):
        w = p.lam ** sum(spins)
        for u, v in g.edges:
            if spins[u] and spins[v]:
                w *= p.beta
            elif not spins[u] and not spins[v]:
                w *= p.gamma
        total += w
    assert math.exp(e.log_z) == pytest.approx(total, rel=1e-10)
