"""Known model-set members, data generators and a brute-force predictor oracle."""

import numpy as np
import scipy.linalg

from lpvkit.bench import bench_template, gen_multisine
from lpvkit.ident import Dataset, lpvidpoly, simulate_idpoly
from lpvkit.pvmatrix import pmatrix
from lpvkit.scheduling import SchedulingTrajectory, make_timemap


def aff(c0, c1, order):
    return pmatrix([c0, c1], "affine", tm=make_timemap([order]))


def true_model(kind):
    """Member of the generic template set ``bench_template(kind)`` with known parameters."""
    poly = [aff(-1.2, 0.1, -1), aff(0.5, -0.1, -2)]
    B = [np.array([[0.5]]), aff(0.3, 0.1, -1), aff(0.2, -0.05, -2)]
    return lpvidpoly(
        A=poly if kind in ("arx", "armax") else [],
        B=B,
        C=[np.array([[0.5]])] if kind in ("armax", "bj") else [],
        D=[np.array([[-0.3]])] if kind == "bj" else [],
        F=poly if kind in ("oe", "bj") else [],
    )


def make_data(model, N=400, seed=0, noise=0.0, extra_channel=False):
    rng = np.random.default_rng(seed)
    u = gen_multisine(N, 1.0, n_freq=10, band=0.75, amplitude=1.0, seed=rng.integers(2**32))
    p = rng.uniform(-1.0, 1.0, N)
    e = noise * rng.standard_normal(N) if noise else None
    y = simulate_idpoly(model, u, SchedulingTrajectory(p, ["p"]), e)
    if extra_channel:
        sched = SchedulingTrajectory(np.column_stack([p, rng.standard_normal(N)]), ["p", "q"])
    else:
        sched = SchedulingTrajectory(p, ["p"])
    return Dataset(u, sched, y), e


def template(kind):
    return bench_template(kind)


def operator_matrix(coefs, lag_list, n, monic):
    """Lower-triangular ``n x n`` matrix of a scalar time-varying polynomial in ``q^-1``."""
    M = np.eye(n) if monic else np.zeros((n, n))
    for (lag, c) in zip(lag_list, coefs):
        for t in range(lag, n):
            M[t, t - lag] += c[t]
    return M


def brute_force_eps(model, data):
    """``eps = C^-1 D (A y - F^-1 B q^-delay u)`` with every operator as an explicit matrix."""
    n = len(data)
    rho = {}
    for s in model.slots:
        P = s.pmatrix
        from lpvkit.scheduling import extend_trajectory

        rho[(s.poly, s.lag)] = P.eval(extend_trajectory(P.tm, data.p, "hold").samples)[:, 0, 0]

    def op(name, monic):
        keys = sorted(k for k in rho if k[0] == name)
        return operator_matrix([rho[k] for k in keys], [k[1] for k in keys], n, monic)

    A, C, D, F = (op(x, True) for x in "ACDF")
    Bq = op("B", False)
    u = np.concatenate([np.zeros(model.delay), data.u[:, 0]])[:n]
    yb = scipy.linalg.solve_triangular(F, Bq @ u, lower=True)
    v = A @ data.y[:, 0] - yb
    return scipy.linalg.solve_triangular(C, D @ v, lower=True)
