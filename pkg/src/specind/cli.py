"""Command-line front end: spectra | thresholds | influence | certify | mix | sweep."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .certify import CertifyOptions, certify_report, report_holds
from .config import Budgets
from .errors import SpecIndError
from .gibbs import BoundaryCondition, GibbsParams, delta_c, ising_interval, lambda_c
from .glauber import empirical_mixing, transition_matrix
from .graph_core import Graph, load_graph, parse_graph_spec
from .influence import influence_bruteforce, influence_spectrum, influence_via_saw, spectral_independence_eta
from .spectral import spectral_summary, surface_radius_bounds

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config


@dataclasses.dataclass
class RunConfig:
    command: str
    graph: str | None = None
    graph_file: str | None = None
    model: str | None = None
    beta: float | None = None
    gamma: float | None = None
    lam: float | None = None
    epsilon: float = 0.5
    delta: float | None = None
    coverage: str = "exhaustive"
    seed: int = 0
    budget_states: int | None = None
    budget_nodes: int | None = None
    out: str | None = None
    csv: str | None = None
    pins: str | None = None
    route: str = "both"
    chains: int = 1000
    horizon: int = 50
    lambda_c: float | None = None
    delta_c: float | None = None
    ising_k: float | None = None
    planar: int | None = None
    genus: int | None = None


def _sanitize(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj: Any) -> str:
    # float repr is the shortest string that round-trips (at most 17 significant digits)
    return json.dumps(_sanitize(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _budgets(cfg: RunConfig) -> Budgets:
    b = Budgets.from_env()
    if cfg.budget_states is not None:
        b = dataclasses.replace(b, states=cfg.budget_states)
    if cfg.budget_nodes is not None:
        b = dataclasses.replace(b, nodes=cfg.budget_nodes)
    return b


def _graph(cfg: RunConfig) -> Graph:
    if cfg.graph_file:
        path = Path(cfg.graph_file)
        fmt = "json" if path.suffix == ".json" else "edge-list"
        return load_graph(path.read_bytes(), fmt)
    if cfg.graph:
        return parse_graph_spec(cfg.graph, cfg.seed)
    raise UsageError("need --graph or --graph-file")


def _params(cfg: RunConfig) -> GibbsParams:
    if cfg.model == "ising":
        if cfg.beta is None:
            raise UsageError("ising needs --beta")
        return GibbsParams.ising(cfg.beta)
    if cfg.model == "hardcore":
        if cfg.lam is None:
            raise UsageError("hardcore needs --lambda")
        return GibbsParams.hardcore(cfg.lam)
    if cfg.model == "general":
        if None in (cfg.beta, cfg.gamma, cfg.lam):
            raise UsageError("general needs --beta, --gamma and --lambda")
        return GibbsParams(cfg.beta, cfg.gamma, cfg.lam)
    raise UsageError("need --model ising|hardcore|general")


def _pins(spec: str | None) -> BoundaryCondition:
    if not spec:
        return BoundaryCondition()
    out = {}
    try:
        for item in spec.split(","):
            v, s = item.split(":")
            out[int(v)] = int(s)
    except ValueError as exc:
        raise UsageError(f"bad --pin spec {spec!r}; use 'v:s,...' with s in {{1,-1}}") from exc
    return BoundaryCondition.of(out)


def _coverage(cfg: RunConfig) -> tuple[str, int]:
    if cfg.coverage == "exhaustive":
        return "exhaustive", 0
    if cfg.coverage.startswith("sampled"):
        _, _, m = cfg.coverage.partition(":")
        return "sampled", int(m) if m else 200
    raise UsageError("--coverage must be exhaustive or sampled[:m]")


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])


# ---------------------------------------------------------------- commands


def cmd_spectra(cfg: RunConfig) -> tuple[dict, int]:
    g = _graph(cfg)
    s = spectral_summary(g)
    out = {"graph": g.to_json(), "spectra": s.to_json()}
    out["spectra"]["sqrt_max_degree"] = math.sqrt(g.max_degree)
    out["spectra"]["planar_bound"] = surface_radius_bounds(g.max_degree)
    return out, EXIT_OK


def cmd_thresholds(cfg: RunConfig) -> tuple[dict, int]:
    out: dict[str, Any] = {}
    if cfg.lambda_c is not None:
        out["lambda_c"] = lambda_c(cfg.lambda_c)
    if cfg.delta_c is not None:
        out["delta_c"] = delta_c(cfg.delta_c)
    if cfg.ising_k is not None:
        if cfg.delta is None:
            raise UsageError("--ising-k needs --delta")
        out["ising_interval"] = list(ising_interval(cfg.ising_k, cfg.delta))
    if cfg.planar is not None:
        out["radius_bound"] = surface_radius_bounds(cfg.planar, cfg.genus)
    if not out:
        raise UsageError("thresholds needs --lambda-c, --delta-c, --ising-k or --planar")
    return out, EXIT_OK


def cmd_influence(cfg: RunConfig) -> tuple[dict, int]:
    g, p, b = _graph(cfg), _params(cfg), _pins(cfg.pins)
    budgets = _budgets(cfg)
    out: dict[str, Any] = {"graph": g.to_json(), "model": p.to_json(), "pinning": [list(x) for x in b.items]}
    mats = {}
    if cfg.route in ("bruteforce", "both"):
        mats["bruteforce"] = influence_bruteforce(g, p, b, budgets)
    if cfg.route in ("saw", "both"):
        mats["saw"] = influence_via_saw(g, p, b, budgets)
    if not mats:
        raise UsageError("--route must be bruteforce, saw or both")
    for name, im in mats.items():
        th, rho, real = influence_spectrum(im)
        out[name] = {"index": list(im.index), "matrix": im.matrix, "theta_max": th, "rho": rho,
                     "real_spectrum": real, "flagged_rows": [im.index[i] for i in np.nonzero(im.flagged)[0]]}
    if len(mats) == 2:
        ok = ~mats["bruteforce"].flagged
        diff = np.abs(mats["bruteforce"].matrix - mats["saw"].matrix)[ok]
        out["max_route_deviation"] = float(diff.max()) if diff.size else 0.0
    if cfg.csv:
        im = next(iter(mats.values()))
        _write_csv(cfg.csv, ["row"] + [str(v) for v in im.index],
                   [[v] + list(map(float, row)) for v, row in zip(im.index, im.matrix)])
    return out, EXIT_OK


def cmd_certify(cfg: RunConfig) -> tuple[dict, int]:
    g, p = _graph(cfg), _params(cfg)
    coverage, samples = _coverage(cfg)
    opts = CertifyOptions(eps=cfg.epsilon, delta=cfg.delta, coverage=coverage,
                          samples=samples or 200, seed=cfg.seed, budgets=_budgets(cfg))
    report = certify_report(g, p, opts)
    return report, EXIT_OK if report_holds(report) else EXIT_VIOLATED


def cmd_mix(cfg: RunConfig) -> tuple[dict, int]:
    g, p = _graph(cfg), _params(cfg)
    budgets = _budgets(cfg)
    chain = transition_matrix(g, p, budgets, full_curve_to=cfg.horizon)
    emp = empirical_mixing(g, p, cfg.chains, cfg.horizon, cfg.seed)
    out = {
        "graph": g.to_json(),
        "model": p.to_json(),
        "support_size": len(chain.codes),
        "theta_star": chain.theta_star,
        "gap": chain.gap,
        "t_mix": chain.t_mix,
        "pi_min": chain.pi_min,
        "t_mix_from_gap": math.log(4 / chain.pi_min) / chain.gap if chain.gap > 0 else None,
        "detailed_balance_error": chain.detailed_balance_error,
        "tv_exact": chain.tv_curve[: cfg.horizon + 1],
        "tv_proxy_estimate": emp.proxy,
        "tv_proxy_stderr": emp.stderr,
    }
    if cfg.csv:
        T = min(len(chain.tv_curve), cfg.horizon + 1)
        _write_csv(cfg.csv, ["t", "tv_exact", "tv_estimate"],
                   [[t, float(chain.tv_curve[t]), float(emp.proxy[t])] for t in range(T)])
    return out, EXIT_OK


def cmd_sweep(cfg: RunConfig) -> tuple[dict, int]:
    g, p = _graph(cfg), _params(cfg)
    coverage, samples = _coverage(cfg)
    res = spectral_independence_eta(g, p, coverage, samples or 200, cfg.seed, _budgets(cfg))
    return {"graph": g.to_json(), "model": p.to_json(), "spectral_independence": res.to_json()}, EXIT_OK


COMMANDS = {
    "spectra": cmd_spectra,
    "thresholds": cmd_thresholds,
    "influence": cmd_influence,
    "certify": cmd_certify,
    "mix": cmd_mix,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specind", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    ap.add_argument("--graph", help="generator spec, e.g. cycle:4, complete:5, grid:2x3")
    ap.add_argument("--graph-file", help="edge list (.txt) or JSON (.json) graph file")
    ap.add_argument("--model", choices=["ising", "hardcore", "general"])
    ap.add_argument("--beta", type=float)
    ap.add_argument("--gamma", type=float)
    ap.add_argument("--lambda", dest="lam", type=float)
    ap.add_argument("--epsilon", type=float)
    ap.add_argument("--delta", type=float)
    ap.add_argument("--coverage", help="exhaustive | sampled[:m]")
    ap.add_argument("--budget-states", type=int)
    ap.add_argument("--budget-nodes", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--csv", help="also write a CSV (matrix or TV curve)")
    ap.add_argument("--pin", dest="pins", help="pinning 'v:s,...' for influence")
    ap.add_argument("--route", choices=["bruteforce", "saw", "both"])
    ap.add_argument("--chains", type=int)
    ap.add_argument("--horizon", type=int)
    ap.add_argument("--lambda-c", type=float, help="evaluate lambda_c at this z")
    ap.add_argument("--delta-c", type=float, help="evaluate Delta_c at this lambda")
    ap.add_argument("--ising-k", type=float, help="Ising interval radius k (with --delta)")
    ap.add_argument("--planar", type=int, help="max degree for the surface radius bound")
    ap.add_argument("--genus", type=int)
    return ap


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values: dict[str, Any] = {}
    if ns.config:
        try:
            values.update(json.loads(Path(ns.config).read_text()))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    names = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(values) - names
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, val in vars(ns).items():
        if key in names and val is not None:
            values[key] = val
    values["command"] = ns.command
    return RunConfig(**values)


def run(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_USAGE if exc.code else EXIT_OK
    except UsageError as exc:
        print(f"specind: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result, code = COMMANDS[cfg.command](cfg)
    except (UsageError, SpecIndError, ValueError) as exc:
        print(f"specind: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = {"command": cfg.command, "seed": cfg.seed, **result,
              "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    text = dumps(result)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
