"""Two-spin Gibbs distributions: exact enumeration, tree recursions, thresholds."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT_BUDGETS, Budgets
from .errors import BudgetExceeded, DomainError, EmptySupport, InfeasibleBoundary, InvalidParams
from .graph_core import Graph

NEG_INF = -math.inf


@dataclass(frozen=True)
class GibbsParams:
    """Weights lam^{#plus} * beta^{#(+,+) edges} * gamma^{#(-,-) edges}."""

    beta: float
    gamma: float
    lam: float
    kind: str = "general"

    def __post_init__(self) -> None:
        if not (self.beta >= 0 and self.gamma > 0 and self.lam > 0):
            raise InvalidParams("need beta >= 0, gamma > 0, lambda > 0")
        if self.beta > self.gamma:
            raise InvalidParams("need beta <= gamma")
        if self.kind == "ising" and not (self.beta == self.gamma and self.lam == 1.0):
            raise InvalidParams("ising needs beta == gamma and lambda == 1")
        if self.kind == "hardcore" and not (self.beta == 0 and self.gamma == 1.0):
            raise InvalidParams("hard-core needs beta == 0 and gamma == 1")
        if self.kind not in ("ising", "hardcore", "general"):
            raise InvalidParams(f"unknown model kind {self.kind!r}")

    @classmethod
    def ising(cls, beta: float) -> "GibbsParams":
        return cls(float(beta), float(beta), 1.0, "ising")

    @classmethod
    def hardcore(cls, lam: float) -> "GibbsParams":
        return cls(0.0, 1.0, float(lam), "hardcore")

    @property
    def log_beta(self) -> float:
        return math.log(self.beta) if self.beta > 0 else NEG_INF

    @property
    def log_gamma(self) -> float:
        return math.log(self.gamma)

    @property
    def log_lam(self) -> float:
        return math.log(self.lam)

    def to_json(self) -> dict:
        return {"kind": self.kind, "beta": self.beta, "gamma": self.gamma, "lambda": self.lam}

    @classmethod
    def from_json(cls, obj: Mapping) -> "GibbsParams":
        kind = obj.get("kind", "general")
        if kind == "ising":
            return cls.ising(obj["beta"])
        if kind == "hardcore":
            return cls.hardcore(obj.get("lambda", obj.get("lam")))
        return cls(float(obj["beta"]), float(obj["gamma"]), float(obj.get("lambda", obj.get("lam"))))


@dataclass(frozen=True)
class BoundaryCondition:
    """Pinned vertices with spins +1 / -1, stored as sorted (vertex, spin) pairs."""

    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        verts = [v for v, _ in self.items]
        if verts != sorted(set(verts)):
            raise InvalidParams("pinned vertices must be distinct and sorted")
        if any(s not in (1, -1) for _, s in self.items):
            raise InvalidParams("spins must be +1 or -1")

    @classmethod
    def of(cls, mapping: Mapping[int, int] | None = None) -> "BoundaryCondition":
        mapping = mapping or {}
        return cls(tuple(sorted((int(v), int(s)) for v, s in mapping.items())))

    @property
    def pinned(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.items)

    def as_dict(self) -> dict[int, int]:
        return dict(self.items)

    def with_pin(self, v: int, s: int) -> "BoundaryCondition":
        d = self.as_dict()
        d[v] = s
        return BoundaryCondition.of(d)

    def __len__(self) -> int:
        return len(self.items)


def iter_pinnings(n: int, max_size: int) -> Iterator[BoundaryCondition]:
    """Every (Lambda, tau) with |Lambda| <= max_size, by size then subset then tau."""
    for k in range(0, max_size + 1):
        for subset in itertools.combinations(range(n), k):
            for spins in itertools.product((1, -1), repeat=k):
                yield BoundaryCondition(tuple(zip(subset, spins)))


# ---------------------------------------------------------------- enumeration


@lru_cache(maxsize=32)
def _bit_table(k: int) -> np.ndarray:
    codes = np.arange(2**k, dtype=np.int64)
    table = ((codes[:, None] >> np.arange(k)) & 1).astype(bool)
    table.setflags(write=False)
    return table


def _edge_list(g: Graph | tuple[int, Sequence[tuple[int, int]]]) -> tuple[int, np.ndarray]:
    if isinstance(g, Graph):
        return g.n, np.array(g.edges, dtype=np.int64).reshape(-1, 2)
    return g[0], np.array(list(g[1]), dtype=np.int64).reshape(-1, 2)


def log_weights(n: int, edges: np.ndarray, p: GibbsParams, plus: np.ndarray) -> np.ndarray:
    """Log Gibbs weight of each row of a boolean (states x n) '+1' indicator."""
    n_plus = plus.sum(axis=1)
    lw = n_plus * p.log_lam
    if len(edges):
        a, b = plus[:, edges[:, 0]], plus[:, edges[:, 1]]
        pp = (a & b).sum(axis=1)
        mm = (~a & ~b).sum(axis=1)
        lw = lw + mm * p.log_gamma
        if p.beta > 0:
            lw = lw + pp * p.log_beta
        else:
            lw = np.where(pp > 0, NEG_INF, lw)
    return lw


@dataclass(frozen=True)
class Enumeration:
    """Conditional distribution over configurations consistent with a pinning."""

    plus: np.ndarray  # states x n boolean
    logw: np.ndarray
    log_z: float

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.logw - self.log_z)


def enumerate_states(
    g: Graph | tuple[int, Sequence[tuple[int, int]]],
    p: GibbsParams,
    b: BoundaryCondition | None = None,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> Enumeration:
    n, edges = _edge_list(g)
    pins = (b or BoundaryCondition()).as_dict()
    free = [v for v in range(n) if v not in pins]
    if 2 ** len(free) > budgets.states:
        raise BudgetExceeded(f"2^{len(free)} states exceed budget {budgets.states}")
    table = _bit_table(len(free))
    plus = np.zeros((table.shape[0], n), dtype=bool)
    plus[:, free] = table
    for v, s in pins.items():
        plus[:, v] = s == 1
    logw = log_weights(n, edges, p, plus)
    log_z = float(np.logaddexp.reduce(logw)) if len(logw) else NEG_INF
    if log_z == NEG_INF:
        raise EmptySupport("pinning leaves no configuration of positive weight")
    return Enumeration(plus, logw, log_z)


def brute_marginals(
    g: Graph | tuple[int, Sequence[tuple[int, int]]],
    p: GibbsParams,
    b: BoundaryCondition | None = None,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> np.ndarray:
    """mu_u(+1 | Lambda, tau) for every vertex (pinned vertices report their spin)."""
    e = enumerate_states(g, p, b, budgets)
    return np.clip(e.probs @ e.plus, 0.0, 1.0)


def log_ratio(
    g: Graph | tuple[int, Sequence[tuple[int, int]]],
    p: GibbsParams,
    b: BoundaryCondition | None,
    root: int,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> float:
    e = enumerate_states(g, p, b, budgets)
    col = e.plus[:, root]
    lp = float(np.logaddexp.reduce(e.logw[col])) if col.any() else NEG_INF
    lm = float(np.logaddexp.reduce(e.logw[~col])) if (~col).any() else NEG_INF
    if lm == NEG_INF:
        return math.inf
    return lp - lm


# ---------------------------------------------------------------- recursions


def child_term(p: GibbsParams, x: np.ndarray | float) -> np.ndarray:
    """log((beta e^x + 1)/(e^x + gamma)), extended to x = +-inf by limits."""
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore"):
        val = np.logaddexp(p.log_beta + x, 0.0) - np.logaddexp(x, p.log_gamma)
    val = np.where(x == math.inf, p.log_beta, val)
    return np.where(x == -math.inf, -p.log_gamma, val)


def h_fn(p: GibbsParams, x: np.ndarray | float) -> np.ndarray:
    """Partial derivative of the log-ratio recursion w.r.t. one child's log-ratio."""
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        logmag = x - np.logaddexp(p.log_beta + x, 0.0) - np.logaddexp(x, p.log_gamma)
        val = -(1.0 - p.beta * p.gamma) * np.exp(logmag)
    at_inf = -1.0 if p.beta == 0 else 0.0
    val = np.where(x == math.inf, at_inf, val)
    return np.where(x == -math.inf, 0.0, val)


def tree_recursion(p: GibbsParams, xs: Sequence[float]) -> tuple[float, list[float]]:
    """H_d(x_1..x_d) and the gradient entries h(x_i)."""
    xs = np.asarray(list(xs), dtype=float)
    H = p.log_lam + float(child_term(p, xs).sum()) if len(xs) else p.log_lam
    return H, [float(v) for v in h_fn(p, xs)]


def sup_abs_h(p: GibbsParams) -> float:
    if p.beta == 0:
        return 1.0
    bg = p.beta * p.gamma
    return abs(1.0 - bg) / (1.0 + math.sqrt(bg)) ** 2


def j_interval(p: GibbsParams, d: int) -> tuple[float, float]:
    """Range of log-ratios of a vertex with d children (extended reals)."""
    lo = p.log_lam + d * p.log_beta if d > 0 else p.log_lam
    hi = p.log_lam - d * p.log_gamma
    return (min(lo, hi), max(lo, hi))


# ---------------------------------------------------------------- thresholds


def lambda_c(z: float) -> float:
    if not z > 1:
        raise DomainError("lambda_c needs z > 1")
    return math.exp(z * math.log(z) - (z + 1) * math.log(z - 1))


def delta_c(lam: float) -> float:
    """Inverse of the decreasing map z -> lambda_c(z) on z > 1."""
    if not lam > 0:
        raise DomainError("Delta_c needs lambda > 0")
    target = math.log(lam)
    f = lambda z: z * math.log(z) - (z + 1) * math.log(z - 1) - target  # noqa: E731
    lo = 1.0 + 1e-15
    while f(lo) < 0:
        lo = 1.0 + (lo - 1.0) * 1e-3
        if lo == 1.0:
            raise DomainError("lambda too large to invert")
    hi = 2.0
    while f(hi) > 0:
        hi *= 2.0
    return brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def ising_interval(k: float, delta: float) -> tuple[float, float]:
    if not k >= 1:
        raise DomainError("need k >= 1")
    if not 0 < delta < 1:
        raise DomainError("need delta in (0, 1)")
    return ((k - 1 + delta) / (k + 1 - delta), (k + 1 - delta) / (k - 1 + delta))


def thresholds(kind: str, *args: float) -> float | tuple[float, float]:
    if kind == "lambda_c":
        return lambda_c(*args)
    if kind == "delta_c":
        return delta_c(*args)
    if kind == "ising_interval":
        return ising_interval(*args)
    raise DomainError(f"unknown threshold kind {kind!r}")


# ---------------------------------------------------------------- hard-core


@dataclass(frozen=True)
class Reduced:
    """Sub-forest left after hard-core pin removal; vertex_map[i] is the original id."""

    n: int
    edges: tuple[tuple[int, int], ...]
    vertex_map: tuple[int, ...]


def hardcore_reduce(g: Graph, b: BoundaryCondition) -> Reduced:
    pins = b.as_dict()
    occupied = [v for v, s in pins.items() if s == 1]
    for v in occupied:
        if any(pins.get(w) == 1 for w in g.adj[v]):
            raise InfeasibleBoundary(f"adjacent occupied pins at {v}")
    removed = set(pins)
    for v in occupied:
        removed.update(g.adj[v])
    keep = [v for v in range(g.n) if v not in removed]
    index = {v: i for i, v in enumerate(keep)}
    edges = tuple((index[u], index[v]) for u, v in g.edges if u in index and v in index)
    return Reduced(len(keep), edges, tuple(keep))


def marginal_lower_bound(
    g: Graph,
    p: GibbsParams,
    mode: str = "exhaustive",
    samples: int = 200,
    seed: int = 0,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> tuple[float, bool]:
    """Smallest in-support conditional marginal; returns (b, exact)."""
    if mode == "exhaustive":
        if 3**g.n > budgets.pinnings:
            raise BudgetExceeded(f"3^{g.n} pinnings exceed budget {budgets.pinnings}")
        pinnings: Iterator[BoundaryCondition] = iter_pinnings(g.n, g.n - 1)
    else:
        pinnings = sample_pinnings(g.n, samples, seed, g.n - 1)
    best = 1.0
    for b in pinnings:
        try:
            marg = brute_marginals(g, p, b, budgets)
        except EmptySupport:
            continue
        pinned = b.pinned
        for u in range(g.n):
            if u in pinned:
                continue
            for val in (marg[u], 1.0 - marg[u]):
                if val > 0:
                    best = min(best, float(val))
    return best, mode == "exhaustive"


def sample_pinnings(n: int, count: int, seed: int, max_size: int) -> Iterator[BoundaryCondition]:
    """Uniform size, then uniform subset, then uniform spins."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(0, max_size + 1))
        subset = sorted(rng.choice(n, size=k, replace=False).tolist())
        spins = rng.choice([1, -1], size=k).tolist()
        yield BoundaryCondition(tuple(zip(subset, (int(s) for s in spins))))
