"""Gradient-based prediction-error minimization (damped Gauss-Newton)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .arx import finish_report
from .core import Dataset, EstimationError, EstimOptions, FitReport, IoPredictor, LpvIdPoly

log = logging.getLogger(__name__)

MU_INIT = 1e-3
MU_MAX = 1e12


@dataclass
class LMResult:
    theta: np.ndarray
    loss_trace: list[float] = field(default_factory=list)
    n_iter: int = 0
    converged: bool = False
    reason: str = ""


def levenberg_marquardt(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    theta0: np.ndarray,
    max_iter: int = 100,
    rel_tol: float = 1e-6,
) -> LMResult:
    """Minimize ``mean(residual(theta)**2)`` with Marquardt's scaled damping.

    ``residual`` may return non-finite values for unstable candidates; those
    steps are rejected and the damping raised. Only accepted steps enter
    ``loss_trace``, which is therefore strictly decreasing after its first entry.
    """
    theta = np.array(theta0, dtype=float)

    def loss_of(r):
        if not np.all(np.isfinite(r)):
            return np.inf
        with np.errstate(over="ignore"):
            return float(r @ r / len(r))

    with np.errstate(all="ignore"):
        r = residual(theta)
    V = loss_of(r)
    if not np.isfinite(V):
        raise EstimationError("loss is not finite at the initial parameters")
    trace = [V]
    if theta.size == 0:
        return LMResult(theta, trace, 0, True, "no free parameters")
    mu = MU_INIT
    J = jacobian(theta)
    it = 0
    reason = "max_iter"
    converged = False
    while it < max_iter:
        it += 1
        scale = np.sqrt(np.maximum(np.sum(J**2, axis=0), 1e-12 * max(np.max(np.sum(J**2, axis=0)), 1e-300)))
        aug = np.vstack([J, np.sqrt(mu) * np.diag(scale)])
        rhs = np.concatenate([-r, np.zeros(theta.size)])
        delta = np.linalg.lstsq(aug, rhs, rcond=None)[0]
        cand = theta + delta
        with np.errstate(all="ignore"):
            r_new = residual(cand)
        V_new = loss_of(r_new)
        if V_new < V:
            # a short step only signals convergence when it is close to the Gauss-Newton step
            small = mu <= MU_INIT and np.linalg.norm(delta) <= rel_tol * (np.linalg.norm(theta) + rel_tol)
            flat = (V - V_new) <= 1e-12 * V
            theta, r, V = cand, r_new, V_new
            trace.append(V)
            mu = max(mu / 10.0, 1e-12)
            if small or flat:
                converged, reason = True, "small step" if small else "flat loss"
                break
            J = jacobian(theta)
        else:
            mu *= 10.0
            if mu > MU_MAX:
                converged, reason = True, "no descent direction"
                break
    log.debug("LM finished after %d iterations (%s), V = %.6g", it, reason, V)
    return LMResult(theta, trace, it, converged, reason)


def lpvpolyest(init: LpvIdPoly, data: Dataset, opts: EstimOptions | None = None) -> FitReport:
    """Prediction-error minimization for any IO structure, starting at ``init``'s values."""
    opts = opts or EstimOptions(max_iter=400)
    pred = IoPredictor(init, data)
    n0 = pred.n0
    nth = init.n_free

    def residual(th):
        return pred.signals(th)["eps"][n0:].ravel()

    if opts.gradient == "sensitivity":
        def jac(th):
            return pred.jacobian(th)[n0:].reshape(-1, nth)
    else:
        def jac(th):
            return pred.jacobian_fd(th)[n0:].reshape(-1, nth)

    res = levenberg_marquardt(residual, jac, init.theta.values, opts.max_iter, opts.rel_tol)
    model = init.with_theta(res.theta)
    return finish_report(model, data, "lpvpolyest", res.loss_trace, res.n_iter, notes=[res.reason])
