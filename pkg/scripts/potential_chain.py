"""Hard-core norm chain rho(I) <= dtp norm <= q_SAW <= q_MAX-n <= closed form."""

import argparse

from _common import fmt, writer
from specind.certify import potential_norm_bound_check
from specind.corpus import corpus
from specind.gibbs import GibbsParams, lambda_c
from specind.graph_core import struct_matrices
from specind.spectral import perron_pair


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=8)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.3, 0.6])
    ap.add_argument("--out")
    args = ap.parse_args()

    w, fh = writer(args.out)
    w.writerow(["graph", "n", "eps", "lambda", "rho_I", "dtp_norm", "q_saw", "q_max_n", "closed_form",
                "potential_bound", "holds"])
    for name, g in corpus(args.max_n, 3):
        rho, _ = perron_pair(struct_matrices(g).A)
        if rho <= 1:
            continue
        for eps in args.eps:
            lam = (1 - eps) * lambda_c(rho)
            r = potential_norm_bound_check(g, GibbsParams.hardcore(lam), eps)
            e = r.extra
            w.writerow([name, g.n, eps, fmt(lam), fmt(e["max_rho_I"]), fmt(e["max_dtp_norm"]),
                        fmt(e["max_q_saw"]), fmt(e["q_max_n"]), fmt(r.bound),
                        fmt(e["potential_bound"]) if e["potential_bound"] is not None else "", r.holds])
    if fh:
        fh.close()


if __name__ == "__main__":
    main()
