"""lpvkit: linear parameter-varying modelling, simulation and identification.

The core object is :class:`~lpvkit.pvmatrix.PVMatrix`, a matrix function that
is affine in a set of scheduling-dependent basis functions. Input-output,
state-space and LFR models are built from it (:mod:`lpvkit.models`) and
estimated by prediction-error methods (:mod:`lpvkit.ident`).
"""

from .models import (
    IllPosedError,
    LpvIoModel,
    LpvLfrModel,
    LpvSsModel,
    euler_discretize_ss,
    frozen,
    frozen_poles,
    interconnect,
    io_to_ss,
    lpvio,
    lpvlfr,
    lpvss,
    lti_lfr,
    simulate_io,
    simulate_lfr,
    simulate_ss,
    ss_to_lfr,
)
from .pvmatrix import (
    BasisFunction,
    PVMatrix,
    as_pmatrix,
    block_diag,
    diag,
    hstack,
    kron,
    matrix_power,
    pdiff,
    pfun,
    pmatrix,
    preal,
    pshift,
    vstack,
)
from .scheduling import (
    DomainMismatchError,
    SchedulingTrajectory,
    TimeDomain,
    TimeMap,
    extend_trajectory,
    make_timemap,
)

__version__ = "0.1.0"

__all__ = [
    "BasisFunction", "DomainMismatchError", "IllPosedError", "LpvIoModel", "LpvLfrModel", "LpvSsModel",
    "PVMatrix", "SchedulingTrajectory", "TimeDomain", "TimeMap", "as_pmatrix", "block_diag", "diag",
    "euler_discretize_ss", "extend_trajectory", "frozen", "frozen_poles", "hstack", "interconnect",
    "io_to_ss", "kron", "lpvio", "lpvlfr", "lpvss", "lti_lfr", "make_timemap", "matrix_power", "pdiff",
    "pfun", "pmatrix", "preal", "pshift", "simulate_io", "simulate_lfr", "simulate_ss", "ss_to_lfr",
    "vstack",
]  # fmt: skip
