"""Glauber dynamics: sampler, exact transition-matrix analysis, empirical chains."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .config import DEFAULT_BUDGETS, Budgets
from .errors import BudgetExceeded, InvalidParams
from .gibbs import GibbsParams, brute_marginals, log_weights
from .graph_core import Graph

DENSE_LIMIT = 4096
TV_TARGET = 0.25


def plus_probability(g: Graph, p: GibbsParams, plus: np.ndarray, v: int) -> float:
    """P(v = +1 | the other spins), spins given as a boolean '+1' vector."""
    nb = list(g.adj[v])
    k_plus = int(plus[nb].sum()) if nb else 0
    k_minus = len(nb) - k_plus
    if p.beta == 0 and k_plus > 0:
        return 0.0
    lr = p.log_lam + (k_plus * p.log_beta if k_plus else 0.0) - k_minus * p.log_gamma
    return float(1.0 / (1.0 + math.exp(-lr))) if lr > -700 else 0.0


def glauber_step(g: Graph, p: GibbsParams, state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Resample one uniformly chosen vertex from its exact conditional (spins +-1)."""
    state = np.asarray(state).copy()
    v = int(rng.integers(g.n))
    pp = plus_probability(g, p, state == 1, v)
    state[v] = 1 if rng.random() < pp else -1
    return state


# ---------------------------------------------------------------- support


def independent_sets(g: Graph, limit: int) -> np.ndarray:
    """Bitmask codes of all independent sets, by branching on the lowest free vertex."""
    nbr_mask = [sum(1 << w for w in g.adj[v]) for v in range(g.n)]
    out: list[int] = []

    def branch(v: int, code: int, blocked: int) -> None:
        while v < g.n and (blocked >> v) & 1:
            v += 1
        if v == g.n:
            out.append(code)
            if len(out) > limit:
                raise BudgetExceeded(f"support exceeds {limit} states")
            return
        branch(v + 1, code, blocked)
        branch(v + 1, code | (1 << v), blocked | nbr_mask[v])

    branch(0, 0, 0)
    return np.array(sorted(out), dtype=np.int64)


def support_codes(g: Graph, p: GibbsParams, limit: int) -> np.ndarray:
    if p.beta == 0:
        return independent_sets(g, limit)
    if 2**g.n > limit:
        raise BudgetExceeded(f"2^{g.n} states exceed {limit}")
    return np.arange(2**g.n, dtype=np.int64)


def codes_to_plus(codes: np.ndarray, n: int) -> np.ndarray:
    return ((codes[:, None] >> np.arange(n)) & 1).astype(bool)


# ---------------------------------------------------------------- exact analysis


@dataclass
class ChainAnalysis:
    codes: np.ndarray
    P: sp.csr_matrix
    pi: np.ndarray
    theta_star: float
    gap: float
    tv_curve: np.ndarray
    t_mix: int | None
    detailed_balance_error: float
    stationarity_error: float
    pi_min: float = field(init=False)

    def __post_init__(self) -> None:
        self.pi_min = float(self.pi.min())


def _transition(g: Graph, p: GibbsParams, codes: np.ndarray) -> sp.csr_matrix:
    n, N = g.n, len(codes)
    plus = codes_to_plus(codes, n)
    rows, cols, vals = [], [], []
    idx = np.arange(N)
    for v in range(n):
        nb = list(g.adj[v])
        k_plus = plus[:, nb].sum(axis=1) if nb else np.zeros(N, dtype=int)
        k_minus = len(nb) - k_plus
        lr = p.log_lam - k_minus * p.log_gamma
        if p.beta > 0:
            lr = lr + k_plus * p.log_beta
        else:
            lr = np.where(k_plus > 0, -np.inf, lr)
        pplus = np.exp(-np.logaddexp(0.0, -lr))
        up = np.searchsorted(codes, codes | (1 << v))
        down = np.searchsorted(codes, codes & ~(1 << v))
        feasible_up = pplus > 0
        rows += [idx[feasible_up], idx]
        cols += [up[feasible_up], down]
        vals += [pplus[feasible_up] / n, (1.0 - pplus) / n]
    P = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)
    )
    P.sum_duplicates()
    return P


def transition_matrix(
    g: Graph,
    p: GibbsParams,
    budgets: Budgets = DEFAULT_BUDGETS,
    max_t: int = 100_000,
    tv_target: float = TV_TARGET,
    full_curve_to: int = 0,
) -> ChainAnalysis:
    """Exact Glauber analysis on the support of the Gibbs measure.

    The TV curve is the worst case over all starting states and is iterated
    until it drops to ``tv_target`` (and at least to ``full_curve_to`` steps).
    """
    codes = support_codes(g, p, budgets.chain_states)
    N = len(codes)
    P = _transition(g, p, codes)
    edges = np.array(g.edges, dtype=np.int64).reshape(-1, 2)
    lw = log_weights(g.n, edges, p, codes_to_plus(codes, g.n))
    pi = np.exp(lw - lw.max())
    pi /= pi.sum()

    F = sp.diags(pi) @ P
    db_err = float(abs(F - F.T).max()) if N > 1 else 0.0
    stat_err = float(np.abs(P.T @ pi - pi).max())

    r = np.sqrt(pi)
    S = sp.diags(r) @ P @ sp.diags(1.0 / r)
    S = 0.5 * (S + S.T)
    if N == 1:
        theta = 0.0
    elif N <= DENSE_LIMIT:
        ev = np.linalg.eigvalsh(S.toarray())
        theta = float(max(abs(ev[-2]), abs(ev[0])))
    else:
        top = eigsh(S, k=2, which="LA", return_eigenvectors=False)
        bottom = eigsh(S, k=1, which="SA", return_eigenvectors=False)
        theta = float(max(abs(np.sort(top)[0]), abs(bottom[0])))
    gap = 1.0 - theta

    curve, t_mix = _tv_curve(P, pi, max_t, tv_target, full_curve_to)
    return ChainAnalysis(codes, P, pi, theta, gap, curve, t_mix, db_err, stat_err)


def _tv_curve(P, pi, max_t, target, full_to, chunk: int = 512):
    N = P.shape[0]
    PT = P.T.tocsr()
    curve = []
    t_mix = None
    blocks = [np.eye(N)[:, s:s + chunk] for s in range(0, N, chunk)]  # columns = start states
    for t in range(max_t + 1):
        worst = 0.0
        for j, X in enumerate(blocks):
            if t > 0:
                blocks[j] = X = PT @ X
            worst = max(worst, 0.5 * float(np.abs(X - pi[:, None]).sum(axis=0).max()))
        curve.append(worst)
        if t_mix is None and worst <= target:
            t_mix = t
        if t_mix is not None and t >= full_to:
            break
    return np.array(curve), t_mix


def tv_from_start(g: Graph, p: GibbsParams, start_plus: np.ndarray, horizon: int,
                  budgets: Budgets = DEFAULT_BUDGETS) -> np.ndarray:
    """Exact TV distance to stationarity from one start, for t = 0..horizon."""
    codes = support_codes(g, p, budgets.chain_states)
    P = _transition(g, p, codes)
    edges = np.array(g.edges, dtype=np.int64).reshape(-1, 2)
    lw = log_weights(g.n, edges, p, codes_to_plus(codes, g.n))
    pi = np.exp(lw - lw.max())
    pi /= pi.sum()
    code = int(np.sum(np.asarray(start_plus, dtype=np.int64) << np.arange(g.n)))
    x = np.zeros(len(codes))
    x[np.searchsorted(codes, code)] = 1.0
    PT = P.T.tocsr()
    out = []
    for t in range(horizon + 1):
        if t > 0:
            x = PT @ x
        out.append(0.5 * float(np.abs(x - pi).sum()))
    return np.array(out)


# ---------------------------------------------------------------- empirical


@dataclass
class EmpiricalResult:
    proxy: np.ndarray  # max_v |estimated mu_v(+) - mu_v(+)| per step
    stderr: np.ndarray  # binomial standard error of the worst vertex
    final_states: np.ndarray


def empirical_mixing(
    g: Graph,
    p: GibbsParams,
    chains: int,
    horizon: int,
    seed: int,
    start_plus: np.ndarray | None = None,
    target_marginals: np.ndarray | None = None,
) -> EmpiricalResult:
    """Run independent chains in lockstep; track the per-vertex marginal discrepancy."""
    if horizon < 0 or chains < 1:
        raise InvalidParams("need horizon >= 0 and chains >= 1")
    n = g.n
    rng = np.random.default_rng(seed)
    start = np.zeros(n, dtype=bool) if start_plus is None else np.asarray(start_plus, dtype=bool)
    mu = brute_marginals(g, p) if target_marginals is None else np.asarray(target_marginals)
    X = np.tile(start, (chains, 1))
    maxdeg = g.max_degree
    nbr = np.full((n, max(maxdeg, 1)), -1)
    for v in range(n):
        nbr[v, : len(g.adj[v])] = g.adj[v]
    proxy, stderr = [], []

    def record() -> None:
        est = X.mean(axis=0)
        diff = np.abs(est - mu)
        w = int(np.argmax(diff))
        proxy.append(float(diff[w]))
        stderr.append(float(math.sqrt(max(mu[w] * (1 - mu[w]), 1e-300) / chains)))

    record()
    rows = np.arange(chains)
    for _ in range(horizon):
        v = rng.integers(n, size=chains)
        u = rng.random(chains)
        nb = nbr[v]
        valid = nb >= 0
        nb_plus = np.where(valid, X[rows[:, None], np.where(valid, nb, 0)], False)
        k_plus = nb_plus.sum(axis=1)
        k_minus = valid.sum(axis=1) - k_plus
        lr = p.log_lam - k_minus * p.log_gamma
        if p.beta > 0:
            lr = lr + k_plus * p.log_beta
        else:
            lr = np.where(k_plus > 0, -np.inf, lr)
        pplus = np.exp(-np.logaddexp(0.0, -lr))
        X[rows, v] = u < pplus
        record()
    return EmpiricalResult(np.array(proxy), np.array(stderr), X)
