"""Linear-regression estimation of LPV-ARX models."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .core import (
    Dataset,
    EstimationError,
    EstimOptions,
    FitReport,
    IoPredictor,
    LpvIdPoly,
    RankDeficientError,
    bfr,
    simulate_model,
)

DEFAULT_LAMBDA_GRID = np.logspace(-8, 2, 50)


def regression_problem(pred: IoPredictor, replace_y=None) -> tuple[np.ndarray, np.ndarray]:
    """``(Phi, Y)`` such that the free parameters solve ``Phi theta ~ Y`` after the initial window.

    Exact for ARX; for other structures it is the pseudo-linear regression at
    the current parameter values.
    """
    theta = pred.model.theta.values
    sig = pred.signals()
    G = pred.regressor(sig, replace_y)
    n0 = pred.n0
    Phi = G[n0:].reshape(-1, len(theta))
    eps = sig["eps"][n0:].ravel()
    # eps(theta') = eps + G (theta' - theta)  =>  G theta' = G theta - eps
    Y = Phi @ theta - eps
    return Phi, Y


def solve_ls(Phi: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Least squares by column-pivoted QR; raises on numerical rank deficiency."""
    m, n = Phi.shape
    if n == 0:
        return np.zeros(0)
    if m < n:
        raise RankDeficientError(f"{m} equations for {n} parameters")
    Q, R, piv = scipy.linalg.qr(Phi, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    tol = max(m, n) * np.finfo(float).eps * d[0]
    rank = int(np.sum(d > tol))
    if rank < n:
        raise RankDeficientError(f"regressor has rank {rank} < {n} free parameters; add regularization")
    z = scipy.linalg.solve_triangular(R, Q.T @ Y)
    theta = np.empty(n)
    theta[piv] = z
    return theta


def ridge(Phi: np.ndarray, Y: np.ndarray, lam: float, W: np.ndarray | None = None) -> np.ndarray:
    """Minimize ``|Phi theta - Y|^2 + lam |W theta|^2``."""
    n = Phi.shape[1]
    W = np.eye(n) if W is None else np.asarray(W, dtype=float)
    if lam == 0:
        return solve_ls(Phi, Y)
    aug = np.vstack([Phi, np.sqrt(lam) * W])
    rhs = np.concatenate([Y, np.zeros(W.shape[0])])
    return solve_ls(aug, rhs)


def gcv_curve(Phi: np.ndarray, Y: np.ndarray, grid, W: np.ndarray | None = None) -> np.ndarray:
    """``GCV(lam) = N |(I - H) Y|^2 / tr(I - H)^2`` with ``H`` the ridge hat matrix."""
    m, n = Phi.shape
    X = Phi if W is None else np.linalg.solve(np.asarray(W, dtype=float).T, Phi.T).T
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    uy = U.T @ Y
    outside = float(Y @ Y - uy @ uy)
    out = []
    for lam in grid:
        f = s**2 / (s**2 + lam)
        res = np.sum(((1 - f) * uy) ** 2) + max(outside, 0.0)
        tr = m - np.sum(f)
        out.append(m * res / tr**2)
    return np.array(out)


def lpvarx(template: LpvIdPoly, data: Dataset, opts: EstimOptions | None = None) -> FitReport:
    """Estimate an LPV-ARX model by (optionally Tikhonov-regularized) least squares."""
    opts = opts or EstimOptions()
    if template.structure != "arx":
        raise EstimationError(f"lpvarx needs an ARX template, got {template.structure}")
    pred = IoPredictor(template, data)
    Phi, Y = regression_problem(pred)
    lam = None
    if opts.regularization == "none":
        theta = solve_ls(Phi, Y)
    elif opts.regularization == "tikhonov":
        lam = opts.lam
        theta = ridge(Phi, Y, lam, opts.weight)
    else:
        grid = DEFAULT_LAMBDA_GRID if opts.lam_grid is None else np.asarray(opts.lam_grid, dtype=float)
        scores = gcv_curve(Phi, Y, grid, opts.weight)
        lam = float(grid[int(np.argmin(scores))])
        theta = ridge(Phi, Y, lam, opts.weight)
    model = template.with_theta(theta)
    return finish_report(model, data, "lpvarx", [], 0, lam=lam)


def finish_report(model: LpvIdPoly, data: Dataset, method: str, trace, n_iter, lam=None, notes=None) -> FitReport:
    pred = IoPredictor(model, data)
    V = pred.loss()
    with np.errstate(all="ignore"):
        ysim = simulate_model(model, data)
    try:
        fit = bfr(data.y, ysim) if np.all(np.isfinite(ysim)) else 0.0
    except ValueError:
        fit = 0.0
    trace = list(trace) or [V]
    return FitReport(model, model.theta, trace, V, fit, n_iter, method, lam, notes=list(notes or []))
