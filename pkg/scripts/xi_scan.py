"""Xi at the symmetric fixed point and its maximum over a (d, x) grid."""

import argparse

import numpy as np

from specind.certify import xi_check
from specind.gibbs import lambda_c


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=float, nargs="*")
    args = ap.parse_args()
    lams = args.lambdas or [lambda_c(2), lambda_c(3), 1.0]
    for lam in lams:
        r = xi_check(lam, x_grid=np.logspace(-3, 3, 200))
        target = 1 / r.inputs["delta_c"]
        print(f"lambda={lam:.6g} Delta_c={r.inputs['delta_c']:.6g} s={r.inputs['s']:.6g} "
              f"Xi(fixed)={r.extra['xi_at_fixed_point']:.12g} 1/Delta_c={target:.12g} "
              f"grid max={r.measured:.12g} holds={r.holds}")


if __name__ == "__main__":
    main()
