"""Near-diagonal law of mu^2 (1 - rho^2) across levels and base points.

For each (m, t1) prints the fitted exponent and the ratio of P(z) at the
smallest z to two reference laws: (2/9) pi^14 m^7 (A-1)(A^2-1) z^10 and the
moment form (alpha/144)(alpha^2 - c)(c^2 + alpha e) z^10.
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from nodal_torus.curve import parse_curve
from nodal_torus.kacrice import detsigma_scaling_probe
from nodal_torus.lattice import enumerate_lattice_points


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, nargs="+", default=[5525, 160225, 41 * 9**4])
    ap.add_argument("--curve", default="circle:r=0.2,arc=1.0")
    ap.add_argument("--t1", type=float, nargs="+", default=[0.02, 0.1, 0.18])
    args = ap.parse_args()

    curve = parse_curve(args.curve)
    print(f"{'m':>8} {'tau4':>8} {'t1':>6} {'A':>8} {'slope':>8} {'stated':>8} {'moments':>8}")
    for m in args.levels:
        lset = enumerate_lattice_points(m)
        s = math.sqrt(m)
        for t1 in args.t1:
            res = detsigma_scaling_probe(lset, curve, t1, np.geomspace(1e-3 / s, 1e-2 / s, 7))
            print(f"{m:>8} {lset.tau4:>8.4f} {t1:>6.3f} {res.a_of_t:>8.4f} {res.exponent_fit:>8.4f} "
                  f"{res.coeff_ratio:>8.4f} {res.coeff_ratio_moments:>8.4f}")


if __name__ == "__main__":
    main()
