"""Bound calculators and end-to-end checks of the influence-matrix bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq

from .config import BOUND_TOL, DEFAULT_BUDGETS, Budgets
from .errors import DomainError, EmptySupport, FixedPointNotBracketed, PreconditionViolated, SpecIndError
from .gibbs import (
    BoundaryCondition,
    GibbsParams,
    delta_c,
    ising_interval,
    lambda_c,
    sup_abs_h,
)
from .graph_core import Graph, struct_matrices
from .influence import (
    InfluenceMatrix,
    influence_bruteforce,
    influence_spectrum,
    pinning_sweep,
    spectral_independence_eta,
)
from .spectral import (
    ihara_resolvent,
    operator_two_norm,
    perron_pair,
    spectral_radius_nonnegative,
)
from .walks import build_walk_tree, dtp_norm, walk_vector

RHO_TOL = 1e-9
CERT_RTOL = 1e-12  # slack for certificates evaluated exactly at an interval endpoint


@dataclass(frozen=True)
class ContractionCertificate:
    delta: float
    satisfied: bool
    witness: float


def delta_contraction_certificate(p: GibbsParams, delta: float) -> ContractionCertificate:
    """sup |h| <= delta; the gradient sup is the same for every degree d."""
    w = sup_abs_h(p)
    return ContractionCertificate(delta, w <= delta * (1 + CERT_RTOL) + 1e-300, w)


@dataclass
class BoundReport:
    kind: str
    inputs: dict
    bound: float | None
    measured: float | None
    holds: bool | None
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _holds(measured: float, bound: float) -> bool:
    return bool(measured <= bound + BOUND_TOL)


# ---------------------------------------------------------------- sweeps


def _measure(g, p, coverage, samples, seed, budgets, sweep=None):
    if sweep is None:
        sweep = spectral_independence_eta(g, p, coverage, samples, seed, budgets)
    return sweep


def adjacency_bound_check(
    g: Graph,
    p: GibbsParams,
    eps: float,
    coverage: str = "exhaustive",
    samples: int = 200,
    seed: int = 0,
    budgets: Budgets = DEFAULT_BUDGETS,
    sweep=None,
) -> BoundReport:
    """rho(I) <= 1/eps whenever sup|h| <= (1-eps)/rho(A)."""
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    rho, _ = perron_pair(struct_matrices(g).A)
    delta = (1 - eps) / rho
    cert = delta_contraction_certificate(p, delta)
    if not cert.satisfied:
        raise PreconditionViolated(f"sup|h|={cert.witness} exceeds delta={delta}")
    sweep = _measure(g, p, coverage, samples, seed, budgets, sweep)
    bound = 1.0 / eps
    return BoundReport(
        "adjacency",
        {"eps": eps, "delta": delta, "rho_A": rho, "sup_h": cert.witness},
        bound,
        sweep.max_rho,
        _holds(sweep.max_rho, bound),
        [f"coverage={sweep.coverage}", f"pinnings={sweep.pinnings}"],
    )


def resolvent_norm(g: Graph, x: float) -> float:
    return operator_two_norm(ihara_resolvent(g, x))


def nb_bound_check(
    g: Graph,
    p: GibbsParams,
    eps: float,
    coverage: str = "exhaustive",
    samples: int = 200,
    seed: int = 0,
    budgets: Budgets = DEFAULT_BUDGETS,
    sweep=None,
) -> BoundReport:
    """rho(I) <= ||(I - xA + x^2(D-I))^{-1}||_2 at x = (1-eps)/nu(H).

    Also compares the two bounds at the tightest certified rate x = sup|h|:
    NB gives ||F(x)||_2 and the adjacency route gives 1/(1 - x rho(A)).
    """
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    sm = struct_matrices(g)
    nu = spectral_radius_nonnegative(sm.H)
    if nu < 1.0 - 1e-12:
        raise PreconditionViolated("nu(H) < 1 (acyclic graph): NB bound undefined")
    rho, _ = perron_pair(sm.A)
    x = (1 - eps) / nu
    cert = delta_contraction_certificate(p, x)
    if not cert.satisfied:
        raise PreconditionViolated(f"sup|h|={cert.witness} exceeds delta={x}")
    bound = resolvent_norm(g, x)
    sweep = _measure(g, p, coverage, samples, seed, budgets, sweep)
    report = BoundReport(
        "nb",
        {"eps": eps, "delta": x, "nu_H": nu, "rho_A": rho, "sup_h": cert.witness},
        bound,
        sweep.max_rho,
        _holds(sweep.max_rho, bound),
        [f"coverage={sweep.coverage}", f"pinnings={sweep.pinnings}"],
    )
    report.extra.update(nb_vs_adjacency(g, p, nu, rho))
    # exact NB walk-matrix at the same rate; never larger than the bound above
    exact_nb = (1.0 - x * x) * bound
    report.extra["nb_walk_matrix_norm"] = exact_nb
    report.extra["nb_walk_matrix_covers_measured"] = bool(sweep.max_rho <= exact_nb + BOUND_TOL)
    return report


def nb_vs_adjacency(g: Graph, p: GibbsParams, nu: float, rho: float) -> dict:
    """Both bounds at the shared rate x = sup|h| (when each precondition holds)."""
    x = sup_abs_h(p)
    out: dict[str, Any] = {"shared_rate": x}
    adj = 1.0 / (1.0 - x * rho) if x * rho < 1 else None
    nb = resolvent_norm(g, x) if x * nu < 1 else None
    out["adjacency_at_shared_rate"] = adj
    out["nb_at_shared_rate"] = nb
    out["nb_dominates"] = None if adj is None or nb is None else bool(nb <= adj + BOUND_TOL)
    return out


# ---------------------------------------------------------------- hard-core potential


@dataclass(frozen=True)
class PotentialSpec:
    s: float
    delta: float
    c: float
    delta_c: float
    kind: str = "hardcore_sqrt"


def hardcore_potential_certificate(lam: float) -> PotentialSpec:
    """(s0, delta0, c0) for the square-root potential, with delta0 = 1/Delta_c."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    dc = delta_c(lam)
    inv_s = 1.0 - (dc - 1.0) / 2.0 * math.log1p(1.0 / (dc - 1.0))
    s0 = 1.0 / inv_s
    return PotentialSpec(s0, 1.0 / dc, lam / (1.0 + lam), dc)


def chi(y: np.ndarray | float) -> np.ndarray:
    """Derivative of the hard-core potential in the log-ratio variable."""
    y = np.asarray(y, dtype=float)
    return np.sqrt(np.exp(-np.logaddexp(0.0, -y)))


def psi(y: np.ndarray | float) -> np.ndarray:
    """The same potential derivative written in the ratio variable (y > 0)."""
    y = np.asarray(y, dtype=float)
    return 0.5 * np.sqrt(1.0 / (y * (1.0 + y)))


def xi(lam: float, s: float, d: float, x: np.ndarray | float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    F = lam / (1.0 + x) ** d
    dF = d * F / (1.0 + x)
    return (psi(F) / psi(x) * dF) ** s / d


def sym_fixed_point(lam: float, d: float) -> float:
    f = lambda x: lam / (1.0 + x) ** d - x  # noqa: E731
    lo, hi = 0.0, max(lam, 1.0)
    if not (f(lo) > 0 > f(hi)):
        raise FixedPointNotBracketed(f"no sign change on [{lo}, {hi}]")
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def xi_check(
    lam: float,
    s: float | None = None,
    d_range: tuple[int, ...] = tuple(range(1, 9)),
    x_grid: np.ndarray | None = None,
    tol: float = 1e-6,
) -> BoundReport:
    """Xi at the fixed point equals 1/Delta_c; the grid maximum stays below it."""
    spec = hardcore_potential_certificate(lam)
    s = spec.s if s is None else s
    x_grid = np.logspace(-3, 3, 200) if x_grid is None else np.asarray(x_grid)
    if np.any(x_grid <= 0):
        raise DomainError("grid must be positive")
    xt = sym_fixed_point(lam, spec.delta_c)
    at_fp = float(xi(lam, s, spec.delta_c, xt))
    grid_vals = {int(d): float(np.max(xi(lam, s, d, x_grid))) for d in d_range}
    grid_max = max(grid_vals.values())
    target = 1.0 / spec.delta_c
    ok = abs(at_fp - target) <= tol and grid_max <= target + tol
    return BoundReport(
        "xi",
        {"lambda": lam, "s": s, "delta_c": spec.delta_c, "x_fixed": xt},
        target,
        grid_max,
        bool(ok),
        [],
        {"xi_at_fixed_point": at_fp, "grid_max_by_d": grid_vals},
    )


def closed_form_74(c: float, Delta: int, rho: float, s: float, delta: float, k: int) -> float:
    """1 + c Delta^{1-1/s} rho^{1/s} sum_{l<k} (delta rho)^{l/s}."""
    ell = np.arange(k)
    return float(1.0 + c * Delta ** (1 - 1 / s) * rho ** (1 / s) * np.sum((delta * rho) ** (ell / s)))


def bound_46(zeta: float, eps: float, s: float, Delta: int, rho: float) -> float:
    return 1.0 + zeta / (1.0 - (1.0 - eps) ** s) * (Delta / rho) ** (1 - 1 / s)


def bound_91(Delta: int, rho: float, z: float) -> float:
    return 1.0 + math.e**3 * math.sqrt(Delta / rho) / z


def reduced_pinning(g: Graph, b: BoundaryCondition) -> BoundaryCondition:
    """Hard-core: neighbours of occupied pins are forced unoccupied; pin them."""
    d = b.as_dict()
    for v, s in b.items:
        if s == 1:
            for w in g.adj[v]:
                d.setdefault(w, -1)
    return BoundaryCondition.of(d)


def potential_norm_bound_check(
    g: Graph,
    p: GibbsParams,
    eps: float,
    coverage: str = "exhaustive",
    samples: int = 200,
    seed: int = 0,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> BoundReport:
    """Chain rho(I) <= ||I||_{f1,1/s0,inf} <= ||q_S|| <= ||q_MAX-n|| <= closed form."""
    if p.kind != "hardcore":
        raise PreconditionViolated("potential chain implemented for the hard-core model")
    sm = struct_matrices(g)
    rho, f1 = perron_pair(sm.A)
    if rho <= 1 + RHO_TOL:  # K2 has rho = 1 up to rounding
        raise PreconditionViolated("need rho(A) > 1")
    lam_max = (1 - eps) * lambda_c(rho)
    if p.lam > lam_max * (1 + 1e-12):
        raise PreconditionViolated(f"lambda={p.lam} exceeds (1-eps) lambda_c(rho)={lam_max}")
    spec = hardcore_potential_certificate(p.lam)
    s, delta0, c0 = spec.s, spec.delta, spec.c
    Delta = g.max_degree
    z = 1.0 - rho / spec.delta_c
    Dq = f1 ** (1.0 / s)
    n = g.n
    max_trees = [build_walk_tree(g, "max_k", r, n, budgets) for r in range(n)]
    q_max = walk_vector(g, "max_k", n, Dq, s, delta0, c0, budgets, trees=max_trees)
    q_max_norm = float(np.max(q_max))
    closed = closed_form_74(c0, Delta, rho, s, delta0, n)

    worst = {"rho": 0.0, "dtp": 0.0, "q_s": 0.0}
    chain_ok = True
    violations = 0
    count = 0
    for b in pinning_sweep(n, coverage, samples, seed):
        b = reduced_pinning(g, b)
        try:
            im = influence_bruteforce(g, p, b, budgets)
        except EmptySupport:
            continue
        free = list(im.index)
        if not free:
            continue
        count += 1
        _, rho_i, _ = influence_spectrum(im)
        norm = dtp_norm(im.matrix, f1[free], 1.0 / s, math.inf)
        q_s = walk_vector(g, "saw", 0, Dq, s, delta0, c0, budgets, avoid=b.pinned)
        q_s_norm = float(np.nanmax(q_s))
        links = rho_i <= norm + BOUND_TOL and norm <= q_s_norm + BOUND_TOL
        links = links and q_s_norm <= q_max_norm + BOUND_TOL
        if not links:
            violations += 1
            chain_ok = False
        worst["rho"] = max(worst["rho"], rho_i)
        worst["dtp"] = max(worst["dtp"], norm)
        worst["q_s"] = max(worst["q_s"], q_s_norm)
    tail_ok = q_max_norm <= closed + BOUND_TOL
    zeta = c0 * rho
    b46 = bound_46(zeta, z, s, Delta, rho) if z > 0 else None
    report = BoundReport(
        "potential_norm",
        {"lambda": p.lam, "eps": eps, "s0": s, "delta0": delta0, "c0": c0, "delta_c": spec.delta_c,
         "rho_A": rho, "max_degree": Delta, "z": z},
        closed,
        worst["dtp"],
        bool(chain_ok and tail_ok),
        [f"coverage={coverage}", f"pinnings={count}", f"chain_violations={violations}"],
        {
            "max_rho_I": worst["rho"],
            "max_dtp_norm": worst["dtp"],
            "max_q_saw": worst["q_s"],
            "q_max_n": q_max_norm,
            "closed_form_walk_vector": closed,
            "potential_bound": b46,
            "potential_bound_covers_measured": None if b46 is None else bool(worst["rho"] <= b46 + BOUND_TOL),
            "sqrt_potential_bound": bound_91(Delta, rho, z) if z > 0 else None,
            "contraction_factor": delta0 * rho,
        },
    )
    return report


# ---------------------------------------------------------------- mixing


@dataclass
class MixingBound:
    mode: str
    value: float | None
    formula: str
    symbolic: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    parts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def gap_lower_bound(n: int, eta: float) -> float | None:
    """n^{-1} prod_{i=0}^{n-2} (1 - eta/(n-i-1)); None when some factor is <= 0."""
    if n < 1:
        raise DomainError("n must be positive")
    factors = [1.0 - eta / (n - i - 1) for i in range(n - 1)]
    if any(f <= 0 for f in factors):
        return None
    return float(np.prod(factors)) / n


def mixing_from_gap(gap: float, pi_min: float) -> float:
    if not (gap > 0 and 0 < pi_min <= 1):
        raise DomainError("need gap > 0 and pi_min in (0, 1]")
    return math.log(4.0 / pi_min) / gap


def mixing_bounds(
    mode: str,
    n: int,
    eta: float | None = None,
    pi_min: float | None = None,
    Delta: int | None = None,
    b: float | None = None,
    delta: float | None = None,
    rho: float | None = None,
) -> MixingBound:
    """Evaluate the variable part of each mixing statement; constants stay symbolic."""
    if n < 1:
        raise DomainError("n must be positive")
    if mode == "spectral_independence":
        gap = gap_lower_bound(n, eta)
        out = MixingBound(mode, gap, "gap >= n^-1 prod_{i=0}^{n-2} (1 - eta/(n-i-1))")
        out.parts["gap_lower_bound"] = gap
        if gap is None:
            out.notes.append("vacuous: some factor is non-positive")
        elif pi_min is not None:
            out.parts["t_mix_upper"] = mixing_from_gap(gap, pi_min)
        return out
    if mode == "closed_form":
        val = n ** (-(1.0 + eta))
        out = MixingBound(mode, val, "gap >= C n^-(1+eta)", ["C"])
        if pi_min is not None:
            out.parts["t_mix_over_C_inverse"] = math.log(4.0 / pi_min) / val
        return out
    if mode == "log_n":
        if Delta is None or b is None or eta is None or not b > 0:
            raise DomainError("log_n mode needs Delta, b > 0 and eta")
        parts = {"base": Delta / b, "exponent_factor": eta / b**2 + 1.0, "n_log_n": n * math.log(n)}
        return MixingBound(mode, None, "(Delta/b)^(C1 (eta/b^2 + 1)) * C2 n log n", ["C1", "C2"], [], parts)
    if mode == "unbounded_ising":
        if delta is None or not 0 < delta < 1:
            raise DomainError("unbounded_ising needs delta in (0, 1)")
        return MixingBound(mode, n ** (1.0 + 1.0 / delta), "C n^(1 + 1/delta)", ["C"])
    if mode == "unbounded_hc":
        if Delta is None or rho is None:
            raise DomainError("unbounded_hc needs Delta and rho")
        parts = {"sqrt_delta_over_rho": math.sqrt(Delta / rho), "n_squared": float(n * n)}
        return MixingBound(mode, None, "C n^(2 + C' sqrt(Delta/rho))", ["C", "C'"], [], parts)
    raise DomainError(f"unknown mixing mode {mode!r}")


# ---------------------------------------------------------------- report


@dataclass
class CertifyOptions:
    eps: float = 0.5
    delta: float | None = None  # Ising interval slack; defaults to eps
    coverage: str = "exhaustive"
    samples: int = 200
    seed: int = 0
    include_chain: bool = True
    budgets: Budgets = DEFAULT_BUDGETS


def regimes(g: Graph, p: GibbsParams, rho: float, nu: float, delta: float) -> dict:
    """Which radius-based parameter regimes admit p (rho(A), nu(H), Delta-1)."""
    Delta = g.max_degree
    radii = {"rho_A": rho, "nu_H": nu, "max_degree_minus_1": Delta - 1}
    out: dict[str, Any] = {"radii": radii}
    if p.kind == "ising":
        for name, k in radii.items():
            if k >= 1:
                lo, hi = ising_interval(k, delta)
                out[name] = {"interval": [lo, hi], "admits": bool(lo <= p.beta <= hi)}
            else:
                out[name] = {"interval": None, "admits": None}
        out["gain_over_degree"] = bool(rho < Delta - 1)
    elif p.kind == "hardcore":
        for name, k in radii.items():
            lc = lambda_c(k) if k > 1 else math.inf
            out[name] = {"lambda_c": lc, "admits": bool(p.lam < lc)}
        out["gain_over_degree"] = bool(rho < Delta - 1)
    return out


def certify_report(g: Graph, p: GibbsParams, opts: CertifyOptions = CertifyOptions()) -> dict:
    from .glauber import transition_matrix

    sm = struct_matrices(g)
    rho, f1 = perron_pair(sm.A)
    nu = spectral_radius_nonnegative(sm.H)
    delta = opts.delta if opts.delta is not None else opts.eps
    sweep = spectral_independence_eta(g, p, opts.coverage, opts.samples, opts.seed, opts.budgets)
    checks: list[dict] = []

    def guarded(kind: str, fn) -> None:
        try:
            checks.append(fn().to_json())
        except PreconditionViolated as exc:
            checks.append(BoundReport(kind, {}, None, None, None, [f"not applicable: {exc}"]).to_json())

    guarded("adjacency", lambda: adjacency_bound_check(g, p, opts.eps, sweep=sweep))
    guarded("nb", lambda: nb_bound_check(g, p, opts.eps, sweep=sweep))
    if p.kind == "hardcore" and opts.include_chain:
        guarded("potential_norm", lambda: potential_norm_bound_check(
            g, p, opts.eps, opts.coverage, opts.samples, opts.seed, opts.budgets))

    mix = mixing_bounds("spectral_independence", g.n, eta=max(sweep.eta, 0.0))
    try:
        chain = transition_matrix(g, p, opts.budgets)
        gap_lb = mix.value
        checks.append(BoundReport(
            "mixing",
            {"eta": sweep.eta, "n": g.n},
            gap_lb,
            chain.gap,
            None if gap_lb is None else bool(chain.gap >= gap_lb - BOUND_TOL),
            ["measured is the exact spectral gap; bound is a lower bound"] + mix.notes,
            {"t_mix_exact": chain.t_mix, "t_mix_from_gap": mixing_from_gap(chain.gap, chain.pi_min),
             "pi_min": chain.pi_min},
        ).to_json())
    except SpecIndError as exc:  # budget or support issues: report, do not fail
        checks.append(BoundReport("mixing", {}, None, None, None, [f"skipped: {exc}"]).to_json())

    return {
        "graph": {"n": g.n, "m": g.m, "max_degree": g.max_degree, "edges": [list(e) for e in g.edges]},
        "spectra": {"rho_A": rho, "nu_H": nu, "f1": f1.tolist()},
        "model": p.to_json(),
        "regimes": regimes(g, p, rho, nu, delta),
        "spectral_independence": sweep.to_json(),
        "checks": checks,
    }


def report_holds(report: dict) -> bool:
    return all(c.get("holds") is not False for c in report["checks"])
