"""Leading constant 4c - L^2 for circle arcs as the arc angle sweeps (0, 2 pi].

One column per angular measure; plot-ready CSV. Zeros appear at every
multiple of pi for all measures, and at pi/2 (mod pi) only for the measure
whose tau4 cos(4 psi) equals -1.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from nodal_torus.curve import CircleArcSpec, make_circle_arc
from nodal_torus.kacrice import c_tau_gamma
from nodal_torus.lattice import (
    cilleruelo_measure,
    enumerate_lattice_points,
    lattice_measure,
    tilted_cilleruelo_measure,
    uniform_measure,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=float, default=0.2)
    ap.add_argument("--phase", type=float, default=0.0)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--m", type=int, nargs="*", default=[5, 160225])
    args = ap.parse_args()

    measures = {"uniform": uniform_measure(), "cilleruelo": cilleruelo_measure(),
                "tilted": tilted_cilleruelo_measure()}
    for m in args.m:
        measures[f"m={m}"] = lattice_measure(enumerate_lattice_points(m))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["arc_angle", "L"] + list(measures))
    for arc in np.linspace(2 * math.pi / args.points, 2 * math.pi, args.points):
        c = make_circle_arc(CircleArcSpec(args.radius, float(arc), phase=args.phase))
        w.writerow([f"{arc:.6f}", f"{c.length:.6f}"]
                   + [f"{4 * c_tau_gamma(meas, c) - c.length**2:.6e}" for meas in measures.values()])


if __name__ == "__main__":
    main()
