"""Random model generators and signal-level oracles shared by the model tests."""

import numpy as np

from lpvkit.models import lpvlfr, lpvss
from lpvkit.pvmatrix import pmatrix, preal
from lpvkit.scheduling import SchedulingTrajectory, make_timemap


def _stable(rng, n, radius=0.5):
    M = rng.standard_normal((n, n))
    return radius * M / max(np.max(np.abs(np.linalg.eigvals(M))), 1e-12)


def random_affine_ss(rng, nx=None, nu=None, ny=None, two_channels=None):
    """Affine LPV-SS model in ``p`` (and optionally ``q``) at orders 0 and -1, stable for |p| <= 1."""
    nx = nx or int(rng.integers(1, 4))
    nu = nu or int(rng.integers(1, 3))
    ny = ny or int(rng.integers(1, 3))
    two = bool(rng.integers(0, 2)) if two_channels is None else two_channels
    names = ["p", "q"] if two else ["p"]
    tm = make_timemap([-1, 0], "dt", names)
    n_aff = tm.dim

    def mat(shape, first=None, scale=1.0):
        coeffs = [first if first is not None else rng.standard_normal(shape)]
        coeffs += [scale * rng.standard_normal(shape) for _ in range(n_aff)]
        return pmatrix(coeffs, "affine", list(range(n_aff + 1)), tm)

    A = mat((nx, nx), _stable(rng, nx), scale=0.1 / n_aff)
    return lpvss(A, mat((nx, nu)), mat((ny, nx)), mat((ny, nu)))


def random_schedule(rng, n, names=("p", "q"), low=-1.0, high=1.0):
    return SchedulingTrajectory(rng.uniform(low, high, (n, len(names))), list(names))


def random_siso_lfr(rng, nx=2, nw=1, feedthrough=True, gain=1.0):
    """Well-posed SISO LFR with ``Delta = 0.3 p`` per loop channel and small ``D_zw``."""
    A = _stable(rng, nx)
    Delta = 0.3 * preal("p") * np.eye(nw) if nw else None
    return lpvlfr(
        A, rng.standard_normal((nx, nw)), gain * rng.standard_normal((nx, 1)),
        rng.standard_normal((nw, nx)), 0.2 * rng.standard_normal((nw, nw)), rng.standard_normal((nw, 1)),
        rng.standard_normal((1, nx)), rng.standard_normal((1, nw)),
        rng.standard_normal((1, 1)) * (0.5 if feedthrough else 0.0) * gain,
        Delta,
    )  # fmt: skip


def lfr_step(m, x, u, delta):
    """One LFR step by explicit elimination of the loop; returns ``(y, x_next)``."""
    nw = m.Bw.shape[1]
    if nw:
        w = np.linalg.solve(np.eye(nw) - delta @ m.Dzw, delta @ (m.Cz @ x + m.Dzu @ u))
    else:
        w = np.zeros(0)
    return m.Cy @ x + m.Dyw @ w + m.Dyu @ u, m.A @ x + m.Bw @ w + m.Bu @ u


def feedback_oracle(m1, m2, u, p):
    """Negative feedback ``u1 = u - y2``, ``y2 = m2(y1)`` solved per sample as a scalar fixed point."""
    x1, x2 = np.zeros(m1.A.shape[0]), np.zeros(m2.A.shape[0])
    d1 = m1.Delta.evaluate(p) if m1.Bw.shape[1] else np.zeros((len(u), 0, 0))
    d2 = m2.Delta.evaluate(p) if m2.Bw.shape[1] else np.zeros((len(u), 0, 0))
    out = np.empty(len(u))
    for t, ut in enumerate(u):
        # outputs are affine in the input: y = a + g u
        a1 = lfr_step(m1, x1, np.zeros(1), d1[t])[0][0]
        g1 = lfr_step(m1, x1, np.ones(1), d1[t])[0][0] - a1
        a2 = lfr_step(m2, x2, np.zeros(1), d2[t])[0][0]
        g2 = lfr_step(m2, x2, np.ones(1), d2[t])[0][0] - a2
        y1 = (a1 + g1 * (ut - a2)) / (1 + g1 * g2)
        _, x1 = lfr_step(m1, x1, np.array([ut - (a2 + g2 * y1)]), d1[t])
        _, x2 = lfr_step(m2, x2, np.array([y1]), d2[t])
        out[t] = y1
    return out
