"""Pseudo-linear regression for ARMAX, OE and BJ structures.

Each iteration freezes the unmeasured signals (past residuals, simulated
process output y_breve, noise signal v) at their current estimates. The
residual is then affine in the parameters,

    eps_t(theta') = eps_t(theta) + phi_t (theta' - theta),

and the parameters are re-solved by least squares. The update is the
minimum-norm correction, so directions not excited by the data (for instance
the noise model on noise-free data) stay where they are.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .arx import finish_report, lpvarx
from .core import Dataset, EstimationError, EstimOptions, FitReport, IoPredictor, LpvIdPoly, init_from

KINDS = {"armax", "oe", "bj"}


def arx_start(template: LpvIdPoly, data: Dataset, kind: str) -> LpvIdPoly:
    """Initial values from an ARX fit of A (F for OE/BJ) and B; noise polynomials start at zero."""
    src = "F" if kind in ("oe", "bj") else "A"
    slots = tuple(replace(s, poly="A") for s in template.slots if s.poly == src)
    slots += tuple(s for s in template.slots if s.poly == "B")
    arx = lpvarx(replace(template, slots=slots), data).model
    return init_from(template, arx, {"F": "A"} if src == "F" else None)


def plr_estimate(
    kind: str,
    template: LpvIdPoly,
    data: Dataset,
    opts: EstimOptions | None = None,
    init: LpvIdPoly | None = None,
) -> FitReport:
    """Pseudo-linear regression; starts from an ARX least-squares fit unless ``init`` is given."""
    opts = opts or EstimOptions()
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {sorted(KINDS)}")
    if template.structure != kind:
        raise EstimationError(f"template has {template.structure} structure, expected {kind}")
    model = init if init is not None else arx_start(template, data, kind)
    theta = model.theta.values.copy()
    pred = IoPredictor(model, data)
    n0 = pred.n0

    def loss(th):
        with np.errstate(all="ignore"):
            v = pred.loss(th)
        return v if np.isfinite(v) else np.inf

    best_theta, best_V = theta.copy(), loss(theta)
    trace = [best_V]
    notes = []
    n_iter = 0
    for n_iter in range(1, opts.max_iter + 1):
        with np.errstate(all="ignore"):
            sig = pred.signals(theta)
            G = pred.regressor(sig)
        Phi = G[n0:].reshape(-1, len(theta))
        eps = sig["eps"][n0:].ravel()
        if not (np.all(np.isfinite(Phi)) and np.all(np.isfinite(eps))):
            notes.append(f"non-finite regressor at iteration {n_iter}; stopped")
            break
        delta = np.linalg.lstsq(Phi, -eps, rcond=None)[0]
        theta = theta + delta
        V = loss(theta)
        trace.append(V)
        if V < best_V:
            best_theta, best_V = theta.copy(), V
        if V > 10 * best_V:
            notes.append(f"diverging at iteration {n_iter} (V = {V:.3g}); returned best iterate")
            break
        if np.linalg.norm(delta) <= opts.rel_tol * (np.linalg.norm(theta) + opts.rel_tol):
            break
    fitted = model.with_theta(best_theta)
    return finish_report(fitted, data, f"lpv{kind}", trace, n_iter, notes=notes)


def lpvarmax(template, data, opts=None, init=None) -> FitReport:
    return plr_estimate("armax", template, data, opts, init)


def lpvoe(template, data, opts=None, init=None) -> FitReport:
    return plr_estimate("oe", template, data, opts, init)


def lpvbj(template, data, opts=None, init=None) -> FitReport:
    return plr_estimate("bj", template, data, opts, init)
