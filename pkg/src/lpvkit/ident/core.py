"""Parametrized LPV-IO model sets and their one-step-ahead predictor.

The model set is

    F y_breve = B q^-delay u,     D v = C eps,     A y = y_breve + v

with A, C, D, F monic polynomials in q^-1 whose coefficients are
parameter-varying matrices. Free parameters are individual scalar entries of
the coefficient matrices (one matrix per basis term).

Predictor recursions (coefficients evaluated at the current instant t):

    y_breve_t = -sum F_i y_breve_{t-i} + sum B_j u_{t-j-delay}
    v_t       = y_t + sum A_i y_{t-i} - y_breve_t
    eps_t     = v_t + sum D_i v_{t-i} - sum C_i eps_{t-i}
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..models import LpvIoModel
from ..pvmatrix import PVMatrix, as_pmatrix
from ..scheduling import SchedulingTrajectory, TimeDomain, TimeMap, as_trajectory, extend_trajectory

POLYS = ("A", "B", "C", "D", "F")


class EstimationError(RuntimeError):
    pass


class RankDeficientError(EstimationError):
    pass


@dataclass(frozen=True)
class CoefSlot:
    """One coefficient ``poly_lag`` with its fixed basis and free-entry mask.

    Unlike a :class:`PVMatrix`, a slot keeps terms whose current value is zero,
    so the structure survives estimation.
    """

    poly: str
    lag: int
    basis: tuple
    tm: TimeMap
    values: np.ndarray  # (n_terms, rows, cols); row 0 multiplies the constant
    free: np.ndarray  # bool, same shape

    @property
    def pmatrix(self) -> PVMatrix:
        return PVMatrix(self.values, self.basis, self.tm)

    @property
    def n_free(self) -> int:
        return int(self.free.sum())


@dataclass(frozen=True)
class ThetaVector:
    values: np.ndarray
    layout: tuple[tuple[str, int, int, int, int], ...]  # (poly, lag, term, row, col)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class LpvIdPoly:
    slots: tuple[CoefSlot, ...]
    ny: int
    nu: int
    delay: int = 0

    def poly(self, name: str) -> list[PVMatrix]:
        return [s.pmatrix for s in self.slots if s.poly == name]

    def order(self, name: str) -> int:
        lags = [s.lag for s in self.slots if s.poly == name]
        return max(lags) if lags else (-1 if name == "B" else 0)

    @property
    def A(self):
        return self.poly("A")

    @property
    def B(self):
        return self.poly("B")

    @property
    def C(self):
        return self.poly("C")

    @property
    def D(self):
        return self.poly("D")

    @property
    def F(self):
        return self.poly("F")

    @property
    def structure(self) -> str:
        has = {p: any(s.poly == p for s in self.slots) for p in POLYS}
        if not (has["C"] or has["D"] or has["F"]):
            return "arx"
        if not (has["D"] or has["F"]):
            return "armax"
        if not (has["A"] or has["C"] or has["D"]):
            return "oe"
        if not has["A"]:
            return "bj"
        return "general"

    @property
    def layout(self) -> tuple:
        out = []
        for s in self.slots:
            for term, r, c in zip(*np.nonzero(s.free)):
                out.append((s.poly, s.lag, int(term), int(r), int(c)))
        return tuple(out)

    @property
    def theta(self) -> ThetaVector:
        vals = np.concatenate([s.values[s.free] for s in self.slots]) if self.slots else np.zeros(0)
        return ThetaVector(vals, self.layout)

    @property
    def n_free(self) -> int:
        return sum(s.n_free for s in self.slots)

    def with_theta(self, theta) -> "LpvIdPoly":
        theta = np.asarray(getattr(theta, "values", theta), dtype=float)
        if theta.shape != (self.n_free,):
            raise ValueError(f"theta has {theta.size} entries, model has {self.n_free} free parameters")
        slots, k = [], 0
        for s in self.slots:
            vals = np.array(s.values)
            vals[s.free] = theta[k : k + s.n_free]
            vals.setflags(write=False)
            k += s.n_free
            slots.append(replace(s, values=vals))
        return replace(self, slots=tuple(slots))

    @property
    def max_lag(self) -> int:
        """Samples needed before the predictor is free of initial-condition effects."""
        lags = [max(s.lag + (self.delay if s.poly == "B" else 0), 0) for s in self.slots]
        sched = [s.tm.max_lag for s in self.slots if s.basis]
        return max(lags, default=0) + max(sched, default=0)

    def io_models(self) -> tuple[LpvIoModel, LpvIoModel]:
        """``(F, B)`` process model and ``A`` output filter as IO models."""
        eye = as_pmatrix(np.eye(self.ny))
        proc = LpvIoModel(tuple(self.F), tuple(self.B), self.delay)
        filt = LpvIoModel(tuple(self.A), (eye,), 0)
        return proc, filt


def _slots_for(name, coeffs, first_lag, free_zeros, shape_check):
    out = []
    for k, c in enumerate(coeffs):
        P = as_pmatrix(c)
        shape_check(name, P)
        vals = np.array(P.coeffs)
        free = np.ones(vals.shape, bool) if free_zeros else vals != 0
        vals.setflags(write=False)
        out.append(CoefSlot(name, first_lag + k, P.basis, P.tm, vals, free))
    # trailing/inner all-zero lags are still kept; lag numbering follows the list position
    return out


def lpvidpoly(
    A: Sequence = (),
    B: Sequence = (),
    C: Sequence = (),
    D: Sequence = (),
    F: Sequence = (),
    delay: int = 0,
    free_zeros: bool = False,
    ny: int | None = None,
    nu: int | None = None,
) -> LpvIdPoly:
    """Template model structure.

    ``A``, ``C``, ``D``, ``F`` list the coefficients of lags 1, 2, ... (the
    leading identity is implicit); ``B`` lists lags 0, 1, .... Entries that are
    exactly zero are fixed unless ``free_zeros`` is set.
    """
    mats = [as_pmatrix(x) for x in (*A, *C, *D, *F)]
    bmats = [as_pmatrix(x) for x in B]
    if ny is None:
        ny = mats[0].shape[0] if mats else bmats[0].shape[0]
    if nu is None:
        nu = bmats[0].shape[1] if bmats else 0

    def check(name, P):
        want = (ny, nu) if name == "B" else (ny, ny)
        if P.shape != want:
            raise ValueError(f"{name} coefficient has shape {P.shape}, expected {want}")
        if not P.is_constant and P.domain is not TimeDomain.DT:
            raise ValueError("identification works with discrete-time models only")

    slots = []
    for name, coeffs in (("A", A), ("B", B), ("C", C), ("D", D), ("F", F)):
        slots += _slots_for(name, coeffs, 0 if name == "B" else 1, free_zeros, check)
    if delay < 0 or int(delay) != delay:
        raise ValueError("input delay must be a non-negative integer")
    return LpvIdPoly(tuple(slots), int(ny), int(nu), int(delay))


def init_from(template: LpvIdPoly, source: LpvIdPoly, mapping: dict | None = None) -> LpvIdPoly:
    """Copy coefficient values from ``source`` into ``template``.

    ``mapping`` renames polynomials (e.g. ``{"F": "A"}`` to seed an OE model's
    F from an ARX model's A). Slots of ``template`` without a structurally
    matching source slot get their free entries set to zero.
    """
    mapping = mapping or {}
    src = {(s.poly, s.lag): s for s in source.slots}
    slots = []
    for s in template.slots:
        other = src.get((mapping.get(s.poly, s.poly), s.lag))
        vals = np.array(s.values)
        if other is not None and other.basis == s.basis and other.values.shape == s.values.shape:
            vals[s.free] = other.values[s.free]
        else:
            vals[s.free] = 0.0
        vals.setflags(write=False)
        slots.append(replace(s, values=vals))
    return replace(template, slots=tuple(slots))


@dataclass(frozen=True)
class Dataset:
    u: np.ndarray
    p: SchedulingTrajectory
    y: np.ndarray
    Ts: float = 1.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        y = np.asarray(self.y, dtype=float)
        u = u[:, None] if u.ndim == 1 else u
        y = y[:, None] if y.ndim == 1 else y
        p = as_trajectory(self.p, sample_time=self.Ts)
        if not (len(u) == len(y) == len(p)):
            raise ValueError(f"u, p, y lengths differ: {len(u)}, {len(p)}, {len(y)}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "p", p)

    def __len__(self):
        return len(self.y)


@dataclass
class EstimOptions:
    max_iter: int = 100
    rel_tol: float = 1e-6
    regularization: str = "none"  # none | tikhonov | gcv
    lam: float = 0.0
    lam_grid: np.ndarray | None = None  # default: 50 log-spaced values in [1e-8, 1e2]
    weight: np.ndarray | None = None  # Tikhonov weighting, identity by default
    gradient: str = "sensitivity"  # sensitivity | finite_difference
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 0 or not self.rel_tol > 0:
            raise ValueError("max_iter must be >= 0 and rel_tol > 0")
        if self.lam < 0:
            raise ValueError("regularization weight must be non-negative")
        if self.regularization not in ("none", "tikhonov", "gcv"):
            raise ValueError(f"unknown regularization {self.regularization!r}")
        if self.gradient not in ("sensitivity", "finite_difference"):
            raise ValueError(f"unknown gradient method {self.gradient!r}")


@dataclass
class FitReport:
    model: object
    theta: ThetaVector
    loss_trace: list[float]
    V: float
    bfr_est: float
    n_iter: int = 0
    method: str = ""
    lam: float | None = None
    xi: np.ndarray | None = None
    notes: list[str] = field(default_factory=list)


def bfr(y, yhat) -> float:
    """Best fit rate in percent, ``100 * max(0, 1 - |y - yhat| / |y - mean(y)|)``."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape:
        raise ValueError(f"shape mismatch {y.shape} vs {yhat.shape}")
    den = np.linalg.norm(y - y.mean(axis=0))
    if den == 0:
        raise ValueError("BFR undefined for a constant signal")
    return 100.0 * max(0.0, 1.0 - np.linalg.norm(y - yhat) / den)


def _shift(x: np.ndarray, k: int) -> np.ndarray:
    """``out[t] = x[t - k]`` with zeros before the record."""
    if k == 0:
        return x
    out = np.zeros_like(x)
    if k < len(x):
        out[k:] = x[: len(x) - k]
    return out


def _recurse(drive: np.ndarray, coefs: list[tuple[int, np.ndarray]]) -> np.ndarray:
    """``x_t = drive_t - sum_i coef_i[t] @ x_{t-i}``; ``drive`` is (N, n) or (N, n, m)."""
    n = len(drive)
    if not coefs:
        return drive.copy()
    x = np.array(drive, dtype=float)
    if drive.ndim == 2 and drive.shape[1] == 1:
        # scalar fast path: plain Python floats beat tiny numpy calls
        xs = x[:, 0].tolist()
        cs = [(i, c[:, 0, 0].tolist()) for i, c in coefs]
        for t in range(n):
            acc = xs[t]
            for i, c in cs:
                if t >= i:
                    acc -= c[t] * xs[t - i]
            xs[t] = acc
        return np.array(xs)[:, None]
    for t in range(n):
        for i, c in coefs:
            if t >= i:
                x[t] -= c[t] @ x[t - i]
    return x


def _basis_values(s: CoefSlot, p, n: int) -> np.ndarray:
    """``(N, n_terms)`` values of a slot's basis (constant first) along ``p``."""
    out = np.ones((n, len(s.basis) + 1))
    if s.basis:
        rho = extend_trajectory(s.tm, p, "hold").samples
        for i, b in enumerate(s.basis):
            out[:, i + 1] = b.evaluate(rho, s.tm)
    return out


def _by_poly(model: LpvIdPoly, coefs) -> dict[str, list[tuple[int, np.ndarray]]]:
    out = {p: [] for p in POLYS}
    for s, c in zip(model.slots, coefs):
        out[s.poly].append((s.lag, c))
    return out


def _coefficient_series(model: LpvIdPoly, p, n: int):
    coefs = [np.einsum("ti,irc->trc", _basis_values(s, p, n), s.values) for s in model.slots]
    return _by_poly(model, coefs)


class IoPredictor:
    """Predictor of one model structure on one dataset.

    Basis values are computed once; ``theta`` only rescales them.
    """

    def __init__(self, model: LpvIdPoly, data: Dataset):
        if data.u.shape[1] != model.nu and model.B:
            raise ValueError(f"dataset has {data.u.shape[1]} inputs, model expects {model.nu}")
        if data.y.shape[1] != model.ny:
            raise ValueError(f"dataset has {data.y.shape[1]} outputs, model expects {model.ny}")
        self.model = model
        self.data = data
        self.n0 = model.max_lag
        if len(data) <= self.n0:
            raise EstimationError(f"dataset of {len(data)} samples too short for total lag {self.n0}")
        self._phi = [_basis_values(s, data.p, len(data)) for s in model.slots]
        self._ustream = _shift(data.u, model.delay)

    # ---- coefficient evaluation -------------------------------------------

    def coefficients(self, model: LpvIdPoly) -> list[np.ndarray]:
        return [np.einsum("ti,irc->trc", phi, s.values) for phi, s in zip(self._phi, model.slots)]

    def _by_poly(self, model, coefs):
        return _by_poly(model, coefs)

    # ---- forward pass -------------------------------------------------------

    def signals(self, theta=None) -> dict[str, np.ndarray]:
        model = self.model if theta is None else self.model.with_theta(theta)
        cp = self._by_poly(model, self.coefficients(model))
        y, u = self.data.y, self._ustream
        bu = np.zeros_like(y)
        for j, c in cp["B"]:
            bu += np.einsum("trc,tc->tr", c, _shift(u, j))
        yb = _recurse(bu, cp["F"])
        ay = y.copy()
        for i, c in cp["A"]:
            ay += np.einsum("trc,tc->tr", c, _shift(y, i))
        v = ay - yb
        dv = v.copy()
        for i, c in cp["D"]:
            dv += np.einsum("trc,tc->tr", c, _shift(v, i))
        eps = _recurse(dv, cp["C"])
        return {"ybreve": yb, "v": v, "eps": eps, "coefs": cp}

    def predict(self, theta=None) -> tuple[np.ndarray, np.ndarray]:
        eps = self.signals(theta)["eps"]
        return self.data.y - eps, eps

    def residuals(self, theta=None) -> np.ndarray:
        """Residuals after the initial window, flattened."""
        return self.signals(theta)["eps"][self.n0 :].ravel()

    def loss(self, theta=None) -> float:
        eps = self.signals(theta)["eps"][self.n0 :]
        return float(np.sum(eps**2) / len(eps))

    # ---- derivatives -----------------------------------------------------------

    def direct_terms(self, sig: dict, replace_y: np.ndarray | None = None) -> dict[str, np.ndarray]:
        """Derivatives of each recursion w.r.t. each free entry, lagged signals held fixed.

        Returns ``(N, ny, n_theta)`` arrays ``A`` (into v), ``yb`` (into
        y_breve) and ``e`` (into eps). ``replace_y`` substitutes the signal
        multiplying the A coefficients (instrumental variables).
        """
        model = self.model
        n, ny = self.data.y.shape
        nth = model.n_free
        G = {k: np.zeros((n, ny, nth)) for k in ("A", "yb", "e")}
        ysig = self.data.y if replace_y is None else replace_y
        source = {
            "A": ("A", ysig, 1.0),
            "B": ("yb", self._ustream, 1.0),
            "F": ("yb", sig["ybreve"], -1.0),
            "D": ("e", sig["v"], 1.0),
            "C": ("e", sig["eps"], -1.0),
        }
        k = 0
        for s, phi in zip(model.slots, self._phi):
            target, signal, sign = source[s.poly]
            lagged = _shift(signal, s.lag)
            for term, r, c in zip(*np.nonzero(s.free)):
                G[target][:, r, k] = sign * phi[:, term] * lagged[:, c]
                k += 1
        return G

    def regressor(self, sig: dict, replace_y=None) -> np.ndarray:
        """Pseudo-linear regressor: d eps_t / d theta with all lagged signals frozen."""
        G = self.direct_terms(sig, replace_y)
        return G["A"] - G["yb"] + G["e"]

    def jacobian(self, theta=None, sig: dict | None = None) -> np.ndarray:
        """Exact ``d eps / d theta`` by differentiating the predictor recursions, ``(N, ny, n_theta)``."""
        if sig is None:
            sig = self.signals(theta)
        cp = sig["coefs"]
        G = self.direct_terms(sig)
        s_yb = _recurse(G["yb"], cp["F"])
        s_v = G["A"] - s_yb
        drive = s_v + G["e"]
        for i, c in cp["D"]:
            drive = drive + np.einsum("trc,tck->trk", c, _shift(s_v, i))
        return _recurse(drive, cp["C"])

    def jacobian_fd(self, theta, h: float = 1e-6) -> np.ndarray:
        """Central finite differences of the residual sequence."""
        theta = np.asarray(getattr(theta, "values", theta), dtype=float)
        n, ny = self.data.y.shape
        J = np.empty((n, ny, len(theta)))
        for k in range(len(theta)):
            step = h * max(1.0, abs(theta[k]))
            tp, tm = theta.copy(), theta.copy()
            tp[k] += step
            tm[k] -= step
            J[:, :, k] = (self.signals(tp)["eps"] - self.signals(tm)["eps"]) / (2 * step)
        return J


def predict(model: LpvIdPoly, data: Dataset, theta=None) -> tuple[np.ndarray, np.ndarray]:
    """One-step-ahead prediction ``(yhat, eps)``; zero initial conditions."""
    return IoPredictor(model, data).predict(theta)


def simulate_idpoly(model: LpvIdPoly, u, p, e=None) -> np.ndarray:
    """Generate data from the model set, optionally driven by noise ``e``."""
    u = np.asarray(u, dtype=float)
    u = u[:, None] if u.ndim == 1 else u
    n = len(u)
    p = as_trajectory(p)
    cp = _coefficient_series(model, p, n)
    bu = np.zeros((n, model.ny))
    us = _shift(u, model.delay)
    for j, c in cp["B"]:
        bu += np.einsum("trc,tc->tr", c, _shift(us, j))
    yb = _recurse(bu, cp["F"])
    v = np.zeros((n, model.ny))
    if e is not None:
        e = np.asarray(e, dtype=float)
        e = e[:, None] if e.ndim == 1 else e
        ce = e.copy()
        for i, c in cp["C"]:
            ce += np.einsum("trc,tc->tr", c, _shift(e, i))
        v = _recurse(ce, cp["D"])
    return _recurse(yb + v, cp["A"])


def simulate_model(model: LpvIdPoly, data_or_u, p=None) -> np.ndarray:
    """Noise-free simulated output of an estimated model."""
    if isinstance(data_or_u, Dataset):
        return simulate_idpoly(model, data_or_u.u, data_or_u.p)
    return simulate_idpoly(model, data_or_u, p)
