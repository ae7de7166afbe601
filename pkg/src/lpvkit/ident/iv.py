"""Instrumental-variable estimation for SISO LPV-ARX structures."""

from __future__ import annotations

import numpy as np

from .arx import finish_report, lpvarx, regression_problem
from .core import Dataset, EstimationError, EstimOptions, FitReport, IoPredictor, LpvIdPoly, simulate_model

COND_MAX = 1e12


def lpviv(template: LpvIdPoly, data: Dataset, opts: EstimOptions | None = None, refinements: int = 1) -> FitReport:
    """Two-stage IV estimate.

    The instruments are the ARX regressors with lagged outputs replaced by the
    noise-free simulated output of an auxiliary model. Stage one uses the
    least-squares ARX estimate as auxiliary model; each refinement re-simulates
    the auxiliary model from the previous IV estimate.
    """
    opts = opts or EstimOptions()
    if template.ny != 1 or template.nu != 1:
        raise EstimationError("lpviv supports single-input single-output structures only")
    if template.structure != "arx":
        raise EstimationError(f"lpviv needs an ARX-like template, got {template.structure}")
    model = lpvarx(template, data, opts).model
    theta = model.theta.values
    for _ in range(1 + refinements):
        with np.errstate(all="ignore"):
            x_aux = simulate_model(model, data)
        if not np.all(np.isfinite(x_aux)):
            raise EstimationError("auxiliary model is unstable; instruments are not finite")
        pred = IoPredictor(model, data)
        Phi, Y = regression_problem(pred)
        Z, _ = regression_problem(pred, replace_y=x_aux)
        ZtPhi = Z.T @ Phi
        if np.linalg.cond(ZtPhi) > COND_MAX:
            raise EstimationError("instrument correlation matrix is singular")
        theta = np.linalg.solve(ZtPhi, Z.T @ Y)
        model = model.with_theta(theta)
    return finish_report(model, data, "lpviv", [], 1 + refinements)
