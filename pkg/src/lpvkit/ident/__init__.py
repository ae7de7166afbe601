"""Prediction-error identification of LPV input-output and state-space models."""

from .arx import DEFAULT_LAMBDA_GRID, gcv_curve, lpvarx, regression_problem, ridge, solve_ls
from .core import (
    CoefSlot,
    Dataset,
    EstimationError,
    EstimOptions,
    FitReport,
    IoPredictor,
    LpvIdPoly,
    RankDeficientError,
    ThetaVector,
    bfr,
    init_from,
    lpvidpoly,
    predict,
    simulate_idpoly,
    simulate_model,
)
from .gradient import levenberg_marquardt, lpvpolyest
from .iv import lpviv
from .plr import lpvarmax, lpvbj, lpvoe, plr_estimate
from .ssest import SsPredictor, lpvssest

__all__ = [
    "DEFAULT_LAMBDA_GRID", "CoefSlot", "Dataset", "EstimationError", "EstimOptions", "FitReport",
    "IoPredictor", "LpvIdPoly", "RankDeficientError", "SsPredictor", "ThetaVector", "bfr",
    "gcv_curve", "init_from", "levenberg_marquardt", "lpvarmax", "lpvarx", "lpvbj", "lpvidpoly",
    "lpviv", "lpvoe", "lpvpolyest", "lpvssest", "plr_estimate", "predict", "regression_problem",
    "ridge", "simulate_idpoly", "simulate_model", "solve_ls",
]  # fmt: skip
