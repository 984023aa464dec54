"""Perron pairs, spectral radii, operator norms and non-backtracking walk counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT_BUDGETS, DEFAULT_POWER, Budgets, PowerIterConfig
from .errors import (
    BudgetExceeded,
    ConvergenceFailure,
    OutOfConvergenceRadius,
    PreconditionViolated,
    SingularMatrix,
)
from .graph_core import Graph, struct_matrices

INT_LIMIT = 2**62
PIVOT_TOL = 1e-12


def perron_pair(A: np.ndarray, cfg: PowerIterConfig = DEFAULT_POWER) -> tuple[float, np.ndarray]:
    """Perron root and positive unit eigenvector of a symmetric non-negative matrix.

    Iterates on A + I so bipartite spectra (with -rho an eigenvalue) still converge.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    x = np.ones(n) / math.sqrt(n)
    B = A + np.eye(n)
    for _ in range(cfg.max_iter):
        y = B @ x
        y /= np.linalg.norm(y)
        if np.max(np.abs(y - x)) <= cfg.tol:
            x = y
            break
        x = y
    else:
        raise ConvergenceFailure("Perron iteration did not converge")
    rho = float(x @ A @ x)
    return rho, x


def _is_nilpotent(M: np.ndarray) -> bool:
    pattern = (M != 0).astype(float)
    v = np.ones(M.shape[0])
    for _ in range(M.shape[0] + 1):
        v = pattern @ v
        if not v.any():
            return True
        v = np.minimum(v, 1.0)
    return False


def spectral_radius_nonnegative(M: np.ndarray, cfg: PowerIterConfig = DEFAULT_POWER) -> float:
    """rho(M) for entrywise non-negative M via power iteration on I + M."""
    M = np.asarray(M, dtype=float)
    dim = M.shape[0]
    if dim == 0 or _is_nilpotent(M):
        return 0.0
    B = M + np.eye(dim)
    x = np.ones(dim) / math.sqrt(dim)
    est = 0.0
    for _ in range(cfg.max_iter):
        y = B @ x
        norm = np.linalg.norm(y)
        y /= norm
        if np.max(np.abs(y - x)) <= cfg.tol:
            est = float(np.linalg.norm(B @ y))
            break
        x = y
    else:
        raise ConvergenceFailure("shifted power iteration did not converge")
    return max(est - 1.0, 0.0)


def operator_two_norm(M: np.ndarray, cfg: PowerIterConfig = DEFAULT_POWER) -> float:
    """Largest singular value via power iteration on M^T M."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    G = M.T @ M
    # fixed pseudo-random start avoids starting orthogonal to the top vector
    x = np.random.default_rng(0).standard_normal(G.shape[0])
    x /= np.linalg.norm(x)
    lam = float(x @ G @ x)
    for _ in range(cfg.max_iter):
        y = G @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        y /= norm
        new = float(y @ G @ y)
        if abs(new - lam) <= cfg.tol * max(new, 1e-300) and np.max(np.abs(y - x)) <= 1e-6:
            return math.sqrt(max(new, 0.0))
        x, lam = y, new
    raise ConvergenceFailure("singular value iteration did not converge")


@dataclass(frozen=True)
class SpectralSummary:
    rho_A: float
    f1: np.ndarray
    nu_H: float
    max_degree: int

    def to_json(self) -> dict:
        return {
            "rho_A": self.rho_A,
            "nu_H": self.nu_H,
            "max_degree": self.max_degree,
            "f1": self.f1.tolist(),
        }


def spectral_summary(g: Graph, cfg: PowerIterConfig = DEFAULT_POWER) -> SpectralSummary:
    sm = struct_matrices(g)
    rho, f1 = perron_pair(sm.A, cfg)
    nu = spectral_radius_nonnegative(sm.H, cfg)
    return SpectralSummary(rho, f1, nu, g.max_degree)


@dataclass(frozen=True)
class NBWalkCounts:
    W: list[np.ndarray]
    exact: bool


def nb_walk_counts(g: Graph, k: int, budgets: Budgets = DEFAULT_BUDGETS) -> NBWalkCounts:
    """W^(0..k): counts of non-backtracking walks of each length between vertex pairs."""
    if k < 0:
        raise ValueError("k must be non-negative")
    n = g.n
    if n * n * (k + 1) > budgets.cells:
        raise BudgetExceeded(f"{n}x{n}x{k + 1} cells exceed budget {budgets.cells}")
    sm = struct_matrices(g)
    A = sm.A.astype(np.int64)
    Dm = (sm.D - np.eye(n)).astype(np.int64)
    out = [np.eye(n, dtype=np.int64)]
    if k >= 1:
        out.append(A.copy())
    exact = True
    dmax = g.max_degree
    for j in range(2, k + 1):
        prev, prev2 = out[-1], out[-2]
        # W2 = A W1 - D W0; later steps subtract (D - I) W(j-2)
        back = Dm + np.eye(n, dtype=np.int64) if j == 2 else Dm
        if exact:
            bound = dmax * int(np.abs(prev).max()) + dmax * int(np.abs(prev2).max())
            if bound >= INT_LIMIT:
                exact = False
                out = [w.astype(float) for w in out]
                prev, prev2 = out[-1], out[-2]
        if exact:
            out.append(A @ prev - back @ prev2)
        else:
            out.append(sm.A @ prev - back.astype(float) @ prev2)
    return NBWalkCounts(out, exact)


def _check_radius(g: Graph, x: float, cfg: PowerIterConfig) -> float:
    nu = spectral_radius_nonnegative(struct_matrices(g).H, cfg)
    if nu > 0 and abs(x) * nu >= 1.0:
        raise OutOfConvergenceRadius(f"|x|={abs(x)} not below 1/nu={1 / nu}")
    return nu


def ihara_resolvent(g: Graph, x: float, cfg: PowerIterConfig = DEFAULT_POWER) -> np.ndarray:
    """(I - xA + x^2 (D - I))^{-1}, the generating function of NB walk counts."""
    _check_radius(g, x, cfg)
    sm = struct_matrices(g)
    n = g.n
    M = np.eye(n) - x * sm.A + x * x * (sm.D - np.eye(n))
    lu, piv = scipy.linalg.lu_factor(M)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularMatrix("resolvent matrix is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), np.eye(n))


def nb_generating_function(g: Graph, x: float, cfg: PowerIterConfig = DEFAULT_POWER) -> np.ndarray:
    """sum_k x^k W^(k) over exact NB walk counts, equal to (1 - x^2) F(x).

    F(x) itself generates the recursion run from W^(0) = I, which at k = 2
    gives A^2 - D + I rather than the NB count A^2 - D.
    """
    return (1.0 - x * x) * ihara_resolvent(g, x, cfg)


def nb_series(g: Graph, x: float, K: int) -> np.ndarray:
    """Truncated series sum_{k<=K} x^k W^(k), accumulated with scaled recursion."""
    sm = struct_matrices(g)
    n = g.n
    total = np.eye(n)
    if K == 0:
        return total
    prev2, prev = np.eye(n), x * sm.A
    total = total + prev
    Dm = sm.D - np.eye(n)
    for j in range(2, K + 1):
        back = sm.D if j == 2 else Dm
        cur = x * (sm.A @ prev) - x * x * (back @ prev2)
        total += cur
        prev2, prev = prev, cur
    return total


def nb_series_tail_bound(g: Graph, x: float, K: int) -> float:
    """Entrywise bound on sum_{k>K} x^k W^(k).

    The tail equals x K (xH)^K (I - xH)^{-1} C; its largest entry is at most
    |x| * Delta * ||(xH)^K||_inf * ||(I - xH)^{-1}||_inf.
    """
    sm = struct_matrices(g)
    dim = sm.H.shape[0]
    if dim == 0:
        return 0.0
    xH = x * sm.H
    power = np.linalg.matrix_power(xH, K)
    inv = np.linalg.inv(np.eye(dim) - xH)
    return abs(x) * g.max_degree * np.abs(power).sum(axis=1).max() * np.abs(inv).sum(axis=1).max()


# ---------------------------------------------------------------- surfaces


def genus_offset(genus: int) -> int:
    if genus < 0:
        raise PreconditionViolated("genus must be non-negative")
    if genus <= 1:
        return 10
    if genus <= 3:
        return 12
    if genus <= 5:
        return 2 * genus + 6
    return 2 * genus + 4


def surface_radius_bounds(delta: int, genus: int | None = None) -> float:
    """Upper bound on rho(A) for planar graphs (genus None) or a given Euler genus."""
    if delta < 1:
        raise PreconditionViolated("max degree must be >= 1")
    if genus is None:
        if delta <= 5:
            return float(delta)
        if delta <= 36:
            return math.sqrt(12 * delta - 36)
        return math.sqrt(8 * (delta - 2)) + 2 * math.sqrt(3)
    d = genus_offset(genus)
    if delta < d + 2:
        raise PreconditionViolated(f"max degree {delta} below d(g)+2 = {d + 2}")
    return math.sqrt(8 * (delta - d)) + d
