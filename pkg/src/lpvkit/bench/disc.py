"""Unbalanced disc: nonlinear simulation, LPV embedding and excitation signals.

Dynamics of the disc angle ``theta`` driven by the motor voltage ``u``::

    theta'' = -(1/tau) theta' + (K_m/tau) u - (m g l / J) sin(theta)

Writing ``sin(theta) = sinc(theta) * theta`` with ``p = sinc(theta)`` gives a
linear model whose stiffness term is scheduled by ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..models import LpvIoModel, lpvio
from ..pvmatrix import pmatrix
from ..scheduling import SchedulingTrajectory, make_timemap


@dataclass(frozen=True)
class UnbalancedDiscParams:
    T_s: float = 0.075  # sampling time [s]
    K_m: float = 15.3145  # motor constant
    J: float = 2.2e-4  # inertia [N m^2]
    m: float = 0.07  # mass [kg]
    l: float = 0.42e-3  # noqa: E741 - mass offset [m]
    g: float = 9.8  # gravity [m/s^2]
    tau: float = 0.5971  # motor time constant [s]

    def __post_init__(self):
        for name in ("T_s", "K_m", "J", "m", "l", "g", "tau"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"disc parameter {name} must be finite and positive, got {v}")

    @property
    def stiffness(self) -> float:
        """``m g l / J``."""
        return self.m * self.g * self.l / self.J


def scheduling_of(theta) -> np.ndarray:
    """``p = sin(theta) / theta`` with ``p(0) = 1``."""
    return np.sinc(np.asarray(theta, dtype=float) / np.pi)


def _rhs(params: UnbalancedDiscParams, x: np.ndarray, u: float) -> np.ndarray:
    return np.array([x[1], -x[1] / params.tau + params.K_m / params.tau * u - params.stiffness * np.sin(x[0])])


def simulate_disc(params: UnbalancedDiscParams, u, T_s: float | None = None, substeps: int = 20) -> np.ndarray:
    """Angle at the sample instants; RK4 with ``substeps`` steps per sample, ZOH input, zero initial state."""
    u = np.asarray(u, dtype=float).ravel()
    if not np.all(np.isfinite(u)):
        raise ValueError("input must be finite")
    if substeps < 1 or int(substeps) != substeps:
        raise ValueError("substeps must be a positive integer")
    T_s = params.T_s if T_s is None else float(T_s)
    h = T_s / substeps
    x = np.zeros(2)
    theta = np.empty(len(u))
    for k, uk in enumerate(u):
        theta[k] = x[0]
        for _ in range(int(substeps)):
            k1 = _rhs(params, x, uk)
            k2 = _rhs(params, x + 0.5 * h * k1, uk)
            k3 = _rhs(params, x + 0.5 * h * k2, uk)
            k4 = _rhs(params, x + h * k3, uk)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"disc simulation diverged at sample {k}")
    return theta


def embed_lpv(params: UnbalancedDiscParams) -> LpvIoModel:
    """Second-order DT LPV-IO model from a forward difference of the dynamics.

    ``y_k + A_1 y_{k-1} + A_2(p_{k-2}) y_{k-2} = b u_{k-2}`` with
    ``A_1 = T_s/tau - 2``, ``A_2 = 1 - T_s/tau + (m g l T_s^2/J) p_{k-2}``,
    ``b = K_m T_s^2 / tau``.
    """
    a = params.T_s / params.tau
    A1 = np.array([[a - 2.0]])
    A2 = pmatrix([1.0 - a, params.stiffness * params.T_s**2], basis_type="affine", tm=make_timemap([-2]))
    b = np.array([[params.K_m * params.T_s**2 / params.tau]])
    return lpvio([A1, A2], [b], delay=2)


def as_schedule(theta, T_s: float) -> SchedulingTrajectory:
    return SchedulingTrajectory(scheduling_of(theta)[:, None], ["p"], T_s)


def gen_multisine(
    N: int, T_s: float, n_freq: int = 10, band: float = 0.75, amplitude: float = 0.25, seed=0
) -> np.ndarray:
    """Random-phase multisine on ``k band f_Nyq / n_freq``, ``k = 1..n_freq``, scaled to ``max|u| = amplitude``."""
    if n_freq < 1:
        raise ValueError("n_freq must be at least 1")
    if not 0 < band <= 1:
        raise ValueError("band must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, n_freq)
    f = np.arange(1, n_freq + 1) * band * (0.5 / T_s) / n_freq
    t = np.arange(N) * T_s
    u = np.sin(2 * np.pi * np.outer(t, f) + phases).sum(axis=1)
    peak = np.max(np.abs(u))
    if peak == 0:
        raise ValueError("multisine vanishes on the sampling grid; change N, band or seed")
    return amplitude * u / peak


def add_noise_snr(y, snr_db, seed=0) -> np.ndarray:
    """Add white Gaussian noise with variance ``var(y) / 10^(snr_db/10)``; ``None``/``inf`` adds nothing."""
    y = np.asarray(y, dtype=float)
    if snr_db is None or (isinstance(snr_db, str) and snr_db.lower() == "none") or np.isposinf(float(snr_db)):
        return y.copy()
    snr_db = float(snr_db)
    if not np.isfinite(snr_db):
        raise ValueError("SNR must be finite (or None for no noise)")
    var = np.var(y)
    if var == 0:
        raise ValueError("cannot set an SNR for a constant signal")
    sigma = np.sqrt(var / 10 ** (snr_db / 10))
    return y + sigma * np.random.default_rng(seed).standard_normal(y.shape)
