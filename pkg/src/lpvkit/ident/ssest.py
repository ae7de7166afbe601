"""Prediction-error estimation of LPV-SS innovation models.

Predictor::

    yhat_t    = C_t xhat_t + D_t u_t
    eps_t     = y_t - yhat_t
    xhat_t+1  = A_t xhat_t + B_t u_t + K_t eps_t

Parameters are the entries of the coefficient matrices of A, B, C, D, K
(zeros fixed unless requested otherwise). The optimizer is the same damped
Gauss-Newton used for IO models. There is no safeguard against drifting
between similarity-equivalent parametrizations; supply a sensible
initial model and a sparse (canonical) parametrization where it matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..models import LpvSsModel, lpvss, simulate_ss
from ..pvmatrix import PVMatrix
from .core import Dataset, EstimationError, EstimOptions, FitReport, ThetaVector, bfr
from .gradient import levenberg_marquardt

STATE_LIMIT = 1e9
MATS = ("A", "B", "C", "D", "K")


@dataclass(frozen=True)
class _Slot:
    name: str
    basis: tuple
    tm: object
    values: np.ndarray
    free: np.ndarray


class SsPredictor:
    def __init__(self, model: LpvSsModel, data: Dataset, free_zeros: bool = False, x0=None):
        if data.u.shape[1] != model.nu or data.y.shape[1] != model.ny:
            raise ValueError("dataset dimensions do not match the model")
        K = model.K if model.K is not None else PVMatrix(np.zeros((1, model.nx, model.ny)))
        mats = dict(model.matrices, K=K)
        self.model = model
        self.data = data
        self.x0 = np.zeros(model.nx) if x0 is None else np.asarray(x0, dtype=float).ravel()
        self.slots = []
        self._phi = []
        for name in MATS:
            P = mats[name]
            vals = np.array(P.coeffs)
            free = np.ones(vals.shape, bool) if free_zeros else vals != 0
            self.slots.append(_Slot(name, P.basis, P.tm, vals, free))
            self._phi.append(P.basis_values(_extended(P, data)))
        self.n0 = max((P.tm.max_lag for P in mats.values() if not P.is_constant), default=0)
        self.layout = tuple(
            (s.name, 0, int(t), int(r), int(c)) for s in self.slots for t, r, c in zip(*np.nonzero(s.free))
        )

    @property
    def theta0(self) -> np.ndarray:
        return np.concatenate([s.values[s.free] for s in self.slots])

    def _values(self, theta):
        out, k = [], 0
        for s in self.slots:
            v = s.values.copy()
            n = int(s.free.sum())
            v[s.free] = theta[k : k + n]
            k += n
            out.append(v)
        return out

    def coefficients(self, theta):
        return {
            s.name: np.einsum("ti,irc->trc", phi, v) for s, phi, v in zip(self.slots, self._phi, self._values(theta))
        }

    def model_at(self, theta, xi=None) -> LpvSsModel:
        mats = {s.name: PVMatrix(v, s.basis, s.tm) for s, v in zip(self.slots, self._values(theta))}
        K = mats["K"] if self.model.K is not None else None
        return lpvss(mats["A"], mats["B"], mats["C"], mats["D"], K, xi)

    def run(self, theta):
        c = self.coefficients(theta)
        u, y = self.data.u, self.data.y
        n = len(y)
        x = np.zeros((n + 1, self.model.nx))
        x[0] = self.x0
        eps = np.empty_like(y)
        for t in range(n):
            eps[t] = y[t] - c["C"][t] @ x[t] - c["D"][t] @ u[t]
            x[t + 1] = c["A"][t] @ x[t] + c["B"][t] @ u[t] + c["K"][t] @ eps[t]
            if not np.all(np.abs(x[t + 1]) < STATE_LIMIT):
                eps[:] = np.inf
                break
        return x, eps, c

    def residuals(self, theta):
        return self.run(theta)[1][self.n0 :].ravel()

    def jacobian(self, theta) -> np.ndarray:
        """``d eps / d theta`` by forward sensitivity recursions, ``(N, ny, n_theta)``."""
        x, eps, c = self.run(theta)
        n, ny = self.data.y.shape
        nx, nth = self.model.nx, len(theta)
        signal = {"A": x[:n], "B": self.data.u, "C": x[:n], "D": self.data.u, "K": eps}
        Gx = np.zeros((n, nx, nth))
        Gy = np.zeros((n, ny, nth))
        k = 0
        for s, phi in zip(self.slots, self._phi):
            target = Gy if s.name in ("C", "D") else Gx
            for term, r, col in zip(*np.nonzero(s.free)):
                target[:, r, k] = phi[:, term] * signal[s.name][:, col]
                k += 1
        Sx = np.zeros((nx, nth))
        Se = np.empty((n, ny, nth))
        for t in range(n):
            Se[t] = -(Gy[t] + c["C"][t] @ Sx)
            Sx = Gx[t] + c["A"][t] @ Sx + c["K"][t] @ Se[t]
        return Se


def _extended(P: PVMatrix, data: Dataset):
    from ..scheduling import extend_trajectory

    return extend_trajectory(P.tm, data.p, "hold").samples


def lpvssest(
    init: LpvSsModel,
    data: Dataset,
    opts: EstimOptions | None = None,
    free_zeros: bool = False,
    x0=None,
) -> FitReport:
    """Minimize the mean squared one-step prediction error from a user-supplied initial model."""
    opts = opts or EstimOptions()
    pred = SsPredictor(init, data, free_zeros, x0)
    nth = len(pred.theta0)
    if opts.gradient == "sensitivity":
        def jac(th):
            return pred.jacobian(th)[pred.n0 :].reshape(-1, nth)
    else:
        def jac(th):
            return _fd(pred, th)[pred.n0 :].reshape(-1, nth)

    res = levenberg_marquardt(pred.residuals, jac, pred.theta0, opts.max_iter, opts.rel_tol)
    _, eps, _ = pred.run(res.theta)
    if not np.all(np.isfinite(eps)):
        raise EstimationError("predictor is unstable at the estimate")
    e = eps[pred.n0 :]
    xi = np.atleast_2d(np.cov(e, rowvar=False, bias=True)) if len(e) > 1 else np.zeros((init.ny, init.ny))
    xi_ok = xi if np.all(np.linalg.eigvalsh(xi) > 0) else None
    model = pred.model_at(res.theta, xi_ok)
    with np.errstate(all="ignore"):
        ysim, _ = simulate_ss(model, data.u, data.p, pred.x0)
    try:
        fit = bfr(data.y, ysim) if np.all(np.isfinite(ysim)) else 0.0
    except ValueError:
        fit = 0.0
    V = res.loss_trace[-1]
    return FitReport(
        model, ThetaVector(res.theta, pred.layout), res.loss_trace, V, fit, res.n_iter, "lpvssest",
        xi=xi, notes=[res.reason],
    )  # fmt: skip


def _fd(pred: SsPredictor, theta, h: float = 1e-6) -> np.ndarray:
    J = []
    for k in range(len(theta)):
        step = h * max(1.0, abs(theta[k]))
        tp, tm = theta.copy(), theta.copy()
        tp[k] += step
        tm[k] -= step
        J.append((pred.run(tp)[1] - pred.run(tm)[1]) / (2 * step))
    return np.stack(J, axis=-1)
