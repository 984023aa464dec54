"""Budgets and numerical tolerances.

Budgets can be overridden through environment variables named
``SPECIND_BUDGET_<FIELD>`` (upper case), e.g. ``SPECIND_BUDGET_STATES=4096``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_PREFIX = "SPECIND_BUDGET_"


@dataclass(frozen=True)
class Budgets:
    states: int = 2**22  # weighted-state evaluations for brute force
    nodes: int = 2_000_000  # walk-tree node cap
    cells: int = 50_000_000  # n*n*k cells for walk-count stacks
    chain_states: int = 2**14  # support size cap for exact chain analysis
    pinnings: int = 200_000  # exhaustive pinning sweep cap

    @classmethod
    def from_env(cls, base: "Budgets | None" = None) -> "Budgets":
        base = base or cls()
        updates = {}
        for f in fields(cls):
            raw = os.environ.get(ENV_PREFIX + f.name.upper())
            if raw is not None:
                updates[f.name] = int(raw)
        return replace(base, **updates)


@dataclass(frozen=True)
class PowerIterConfig:
    tol: float = 1e-12
    max_iter: int = 100_000


DEFAULT_BUDGETS = Budgets()
DEFAULT_POWER = PowerIterConfig()
BOUND_TOL = 1e-8
