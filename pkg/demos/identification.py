"""Identify LPV-ARX, OE and BJ models from simulated data.

Run: python3 demos/identification.py
"""

import numpy as np

from lpvkit.bench import bench_template, gen_multisine
from lpvkit.ident import Dataset, EstimOptions, init_from, lpvarx, lpvidpoly, lpvpolyest, simulate_idpoly
from lpvkit.pvmatrix import pmatrix
from lpvkit.scheduling import SchedulingTrajectory, make_timemap


def aff(c0, c1, order):
    return pmatrix([c0, c1], "affine", tm=make_timemap([order]))


# BJ data-generating system with a coloured noise model
F = [aff(-1.2, 0.1, -1), aff(0.5, -0.1, -2)]
B = [np.array([[0.5]]), aff(0.3, 0.1, -1), aff(0.2, -0.05, -2)]
truth = lpvidpoly(B=B, F=F, C=[np.array([[0.5]])], D=[np.array([[-0.3]])])

rng = np.random.default_rng(0)
N = 600
u = gen_multisine(N, 1.0, amplitude=1.0, seed=1)
p = rng.uniform(-1, 1, N)
y = simulate_idpoly(truth, u, SchedulingTrajectory(p, ["p"]), e=0.05 * rng.standard_normal(N))
data = Dataset(u, p, y)

arx = lpvarx(bench_template("arx"), data)
oe = lpvpolyest(init_from(bench_template("oe"), arx.model, {"F": "A"}), data, EstimOptions(max_iter=200))
bj = lpvpolyest(init_from(bench_template("bj"), oe.model), data, EstimOptions(max_iter=200))

print(f"{'model':6s} {'V':>10s} {'sim BFR %':>10s} {'iterations':>10s}")
for name, rep in (("ARX", arx), ("OE", oe), ("BJ", bj)):
    print(f"{name:6s} {rep.V:10.3g} {rep.bfr_est:10.2f} {rep.n_iter:10d}")

err = np.abs(bj.theta.values - truth.theta.values).max()
print("BJ parameter error (max abs):", f"{err:.3g}")
