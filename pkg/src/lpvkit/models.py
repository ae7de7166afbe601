"""LPV input-output, state-space and LFR representations.

All simulators are discrete time. Scheduling coefficients at time ``t`` are
evaluated on the extended scheduling sample at ``t``; shifts that reach
outside the record are held at the first/last sample (system at rest before
the record starts). Signals before ``t = 0`` are zero unless initial values
are passed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pvmatrix import PVMatrix, as_pmatrix, block_diag, hstack, vstack
from .scheduling import DomainMismatchError, TimeDomain, make_timemap

ILL_POSED_TOL = 1e-10


class IllPosedError(RuntimeError):
    """The LFR algebraic loop ``(I - Delta D_zw)`` is singular."""

    def __init__(self, t: int, det: float):
        super().__init__(f"LFR loop ill-posed at time index {t} (|det| = {abs(det):.3g})")
        self.t = t
        self.det = det


def _common_domain(mats: Sequence[PVMatrix]) -> TimeDomain:
    doms = {m.domain for m in mats if not m.is_constant}
    if len(doms) > 1:
        raise DomainMismatchError("model mixes continuous- and discrete-time coefficients")
    return doms.pop() if doms else TimeDomain.DT


def _signal(x, n: int | None, width: int | None, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None] if (width is None or width == 1 or x.shape[0] != width) else x[None, :]
    if n is not None and x.shape[0] != n:
        raise ValueError(f"{what} has {x.shape[0]} samples, expected {n}")
    if width is not None and x.shape[1] != width:
        raise ValueError(f"{what} has {x.shape[1]} channels, expected {width}")
    return x


def _require_dt(domain: TimeDomain):
    if domain is not TimeDomain.DT:
        raise DomainMismatchError("only discrete-time models can be simulated")


# ---- LPV-IO ------------------------------------------------------------------


@dataclass(frozen=True)
class LpvIoModel:
    """``y_t + sum_i A_i y_{t-i} = sum_j B_j u_{t-j-delay}``; ``A`` excludes the leading identity."""

    A: tuple[PVMatrix, ...]
    B: tuple[PVMatrix, ...]
    delay: int = 0

    @property
    def ny(self) -> int:
        return self.A[0].shape[0] if self.A else self.B[0].shape[0]

    @property
    def nu(self) -> int:
        return self.B[0].shape[1] if self.B else 0

    @property
    def na(self) -> int:
        return len(self.A)

    @property
    def nb(self) -> int:
        return len(self.B) - 1

    @property
    def domain(self) -> TimeDomain:
        return _common_domain(self.A + self.B)


def lpvio(A: Sequence, B: Sequence, delay: int = 0, nu: int | None = None) -> LpvIoModel:
    A = tuple(as_pmatrix(a) for a in A)
    B = tuple(as_pmatrix(b) for b in B)
    if not A and not B:
        raise ValueError("an IO model needs at least one coefficient")
    ny = A[0].shape[0] if A else B[0].shape[0]
    for a in A:
        if a.shape != (ny, ny):
            raise ValueError(f"A coefficients must be {ny}x{ny}, got {a.shape}")
    nus = {b.shape[1] for b in B}
    if len(nus) > 1 or any(b.shape[0] != ny for b in B):
        raise ValueError("B coefficients must share shape ny x nu")
    if delay < 0 or int(delay) != delay:
        raise ValueError("input delay must be a non-negative integer")
    m = LpvIoModel(A, B, int(delay))
    m.domain  # noqa: B018 - validates domains
    return m


def simulate_io(m: LpvIoModel, u, p, y_init=None) -> np.ndarray:
    """Simulate the difference equation.

    ``y_init`` holds ``na`` past outputs, oldest first (``y_{-na} ... y_{-1}``).
    """
    _require_dt(m.domain)
    u = _signal(u, None, m.nu or None, "u")
    n = u.shape[0]
    ny = m.ny
    Av = [a.evaluate(p) for a in m.A]
    Bv = [b.evaluate(p) for b in m.B]
    if Av and Av[0].shape[0] != n or Bv and Bv[0].shape[0] != n:
        raise ValueError("u and p must have equal length")
    hist = np.zeros((m.na, ny)) if y_init is None else _signal(y_init, m.na, ny, "y_init")
    y = np.vstack([hist, np.zeros((n, ny))])
    off = m.na
    for t in range(n):
        acc = np.zeros(ny)
        for i, a in enumerate(Av, start=1):
            acc -= a[t] @ y[off + t - i]
        for j, b in enumerate(Bv):
            k = t - j - m.delay
            if k >= 0:
                acc += b[t] @ u[k]
        y[off + t] = acc
    return y[off:]


def io_to_ss(m: LpvIoModel) -> "LpvSsModel":
    """Non-minimal shift-register realization ``x_t = [y_{t-1..t-na}; u_{t-1..t-L}]``.

    Only causal dependence (non-positive shifts) is accepted.
    """
    _require_dt(m.domain)
    for c in m.A + m.B:
        if c.tm.orders[-1] > 0 and not c.is_constant:
            raise ValueError("realization requires coefficients depending on current/past scheduling only")
    ny, nu, na = m.ny, m.nu, m.na
    L = m.nb + m.delay
    nx = na * ny + L * nu
    zero = lambda r, c: np.zeros((r, c))  # noqa: E731
    # output row C(rho) and feedthrough D(rho)
    blocks = [-a for a in m.A]
    for lag in range(1, L + 1):
        j = lag - m.delay
        blocks.append(m.B[j] if 0 <= j <= m.nb else zero(ny, nu))
    C = hstack(blocks) if blocks else as_pmatrix(zero(ny, 0))
    D = m.B[0] if m.delay == 0 else as_pmatrix(zero(ny, nu))
    shift = np.zeros((nx - ny, nx)) if nx >= ny else np.zeros((0, nx))
    for i in range(1, na):  # y_{t-i} moves to slot i
        shift[(i - 1) * ny : i * ny, (i - 1) * ny : i * ny] = np.eye(ny)
    rows_u = np.zeros((L * nu, nx))
    Bu = np.zeros((L * nu, nu))
    if L:
        Bu[:nu] = np.eye(nu)
        for i in range(1, L):
            rows_u[i * nu : (i + 1) * nu, na * ny + (i - 1) * nu : na * ny + i * nu] = np.eye(nu)
    if na:
        A = vstack([C, shift[: (na - 1) * ny], rows_u]) if nx > ny else C
        B = vstack([D, np.zeros(((na - 1) * ny, nu)), Bu]) if nx > ny else D
    else:
        A = as_pmatrix(rows_u)
        B = as_pmatrix(Bu)
    return lpvss(A, B, C, D)


# ---- LPV-SS --------------------------------------------------------------------


@dataclass(frozen=True)
class LpvSsModel:
    A: PVMatrix
    B: PVMatrix
    C: PVMatrix
    D: PVMatrix
    K: PVMatrix | None = None
    Xi: np.ndarray | None = field(default=None, compare=False)

    @property
    def nx(self) -> int:
        return self.A.shape[0]

    @property
    def nu(self) -> int:
        return self.B.shape[1]

    @property
    def ny(self) -> int:
        return self.C.shape[0]

    @property
    def domain(self) -> TimeDomain:
        return _common_domain([self.A, self.B, self.C, self.D] + ([self.K] if self.K is not None else []))

    @property
    def matrices(self) -> dict[str, PVMatrix]:
        out = {"A": self.A, "B": self.B, "C": self.C, "D": self.D}
        if self.K is not None:
            out["K"] = self.K
        return out


def lpvss(A, B, C, D, K=None, Xi=None) -> LpvSsModel:
    A, B, C, D = (as_pmatrix(x) for x in (A, B, C, D))
    nx, nu, ny = A.shape[0], B.shape[1], C.shape[0]
    checks = {"A": (A, (nx, nx)), "B": (B, (nx, nu)), "C": (C, (ny, nx)), "D": (D, (ny, nu))}
    if K is not None:
        K = as_pmatrix(K)
        checks["K"] = (K, (nx, ny))
    for name, (mat, shape) in checks.items():
        if mat.shape != shape:
            raise ValueError(f"{name} has shape {mat.shape}, expected {shape}")
    if Xi is not None:
        Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
        if Xi.shape != (ny, ny) or not np.allclose(Xi, Xi.T):
            raise ValueError("Xi must be a symmetric ny x ny matrix")
        if np.linalg.eigvalsh(Xi).min() <= 0:
            raise ValueError("Xi must be positive definite")
    m = LpvSsModel(A, B, C, D, K, Xi)
    m.domain  # noqa: B018
    return m


def simulate_ss(m: LpvSsModel, u, p, x0=None, e=None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(y, x)`` with ``x[t]`` the state at time ``t`` (``N + 1`` rows)."""
    _require_dt(m.domain)
    u = _signal(u, None, m.nu, "u")
    n = u.shape[0]
    Av, Bv, Cv, Dv = (M.evaluate(p) for M in (m.A, m.B, m.C, m.D))
    if Av.shape[0] != n:
        raise ValueError("u and p must have equal length")
    use_e = e is not None and m.K is not None
    if use_e:
        e = _signal(e, n, m.ny, "e")
        Kv = m.K.evaluate(p)
    x = np.zeros((n + 1, m.nx))
    if x0 is not None:
        x[0] = np.asarray(x0, dtype=float).ravel()
    y = np.empty((n, m.ny))
    for t in range(n):
        y[t] = Cv[t] @ x[t] + Dv[t] @ u[t]
        x[t + 1] = Av[t] @ x[t] + Bv[t] @ u[t]
        if use_e:
            y[t] += e[t]
            x[t + 1] += Kv[t] @ e[t]
    return y, x


def euler_discretize_ss(m: LpvSsModel, Ts: float) -> LpvSsModel:
    """Forward Euler: ``A_d = I + Ts A``, ``B_d = Ts B``; C and D unchanged."""
    constant = all(P.is_constant for P in m.matrices.values())
    if m.domain is not TimeDomain.CT and not constant:
        raise DomainMismatchError("Euler discretization expects a continuous-time model")
    if not Ts > 0:
        raise ValueError("sampling time must be positive")

    def to_dt(P: PVMatrix) -> PVMatrix:
        if any(o != 0 for b in P.basis for _, o in b.entries):
            raise ValueError("derivative scheduling dependence cannot be discretized by forward Euler")
        return PVMatrix(P.coeffs, P.basis, make_timemap([0], "dt", P.tm.names))

    A = to_dt(m.A) * Ts + np.eye(m.nx)
    K = to_dt(m.K) * Ts if m.K is not None else None
    return lpvss(A, to_dt(m.B) * Ts, to_dt(m.C), to_dt(m.D), K, m.Xi)


# ---- LPV-LFR -------------------------------------------------------------------


@dataclass(frozen=True)
class LpvLfrModel:
    """LTI block ``G`` in feedback with ``w = Delta(p) z``."""

    A: np.ndarray
    Bw: np.ndarray
    Bu: np.ndarray
    Cz: np.ndarray
    Dzw: np.ndarray
    Dzu: np.ndarray
    Cy: np.ndarray
    Dyw: np.ndarray
    Dyu: np.ndarray
    Delta: PVMatrix

    @property
    def nx(self):
        return self.A.shape[0]

    @property
    def nw(self):
        return self.Bw.shape[1]

    @property
    def nz(self):
        return self.Cz.shape[0]

    @property
    def nu(self):
        return self.Bu.shape[1]

    @property
    def ny(self):
        return self.Cy.shape[0]

    @property
    def domain(self) -> TimeDomain:
        return self.Delta.domain

    @property
    def blocks(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in ("A", "Bw", "Bu", "Cz", "Dzw", "Dzu", "Cy", "Dyw", "Dyu")}


def lpvlfr(A, Bw, Bu, Cz, Dzw, Dzu, Cy, Dyw, Dyu, Delta=None) -> LpvLfrModel:
    mats = [np.atleast_2d(np.asarray(x, dtype=float)) for x in (A, Bw, Bu, Cz, Dzw, Dzu, Cy, Dyw, Dyu)]
    A, Bw, Bu, Cz, Dzw, Dzu, Cy, Dyw, Dyu = mats
    nx, nw, nu, nz, ny = A.shape[0], Bw.shape[1], Bu.shape[1], Cz.shape[0], Cy.shape[0]
    if Delta is None:
        Delta = as_pmatrix(np.zeros((nw, nz)))
    Delta = as_pmatrix(Delta)
    want = {
        "A": (A, (nx, nx)), "Bw": (Bw, (nx, nw)), "Bu": (Bu, (nx, nu)),
        "Cz": (Cz, (nz, nx)), "Dzw": (Dzw, (nz, nw)), "Dzu": (Dzu, (nz, nu)),
        "Cy": (Cy, (ny, nx)), "Dyw": (Dyw, (ny, nw)), "Dyu": (Dyu, (ny, nu)),
    }  # fmt: skip
    for name, (mat, shape) in want.items():
        if mat.shape != shape:
            raise ValueError(f"{name} has shape {mat.shape}, expected {shape}")
    if Delta.shape != (nw, nz):
        raise ValueError(f"Delta has shape {Delta.shape}, expected {(nw, nz)}")
    return LpvLfrModel(A, Bw, Bu, Cz, Dzw, Dzu, Cy, Dyw, Dyu, Delta)


def _empty(r, c):
    return np.zeros((r, c))


def lti_lfr(A, B, C, D) -> LpvLfrModel:
    """LFR with an empty ``Delta`` block (plain LTI state space)."""
    A, B, C, D = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (A, B, C, D))
    nx, nu, ny = A.shape[0], B.shape[1], C.shape[0]
    return lpvlfr(A, _empty(nx, 0), B, _empty(0, nx), _empty(0, 0), _empty(0, nu), C, _empty(ny, 0), D,
                  as_pmatrix(_empty(0, 0)))


def simulate_lfr(m: LpvLfrModel, u, p, x0=None, tol: float = ILL_POSED_TOL) -> np.ndarray:
    _require_dt(m.domain)
    u = _signal(u, None, m.nu, "u")
    n = u.shape[0]
    Dv = m.Delta.evaluate(p) if m.nw and m.nz else np.zeros((n, m.nw, m.nz))
    if Dv.shape[0] != n:
        raise ValueError("u and p must have equal length")
    x = np.zeros(m.nx) if x0 is None else np.asarray(x0, dtype=float).ravel()
    eye = np.eye(m.nw)
    y = np.empty((n, m.ny))
    for t in range(n):
        d = Dv[t]
        if m.nw:
            loop = eye - d @ m.Dzw
            det = np.linalg.det(loop)
            if abs(det) < tol:
                raise IllPosedError(t, det)
            w = np.linalg.solve(loop, d @ (m.Cz @ x + m.Dzu @ u[t]))
        else:
            w = np.zeros(0)
        y[t] = m.Cy @ x + m.Dyw @ w + m.Dyu @ u[t]
        x = m.A @ x + m.Bw @ w + m.Bu @ u[t]
    return y


def ss_to_lfr(m: LpvSsModel, rank_tol: float = 1e-12) -> LpvLfrModel:
    """Pull the scheduling dependence of an LPV-SS model into ``Delta`` (``D_zw = 0``).

    Each basis term's block ``[[A_i, B_i], [C_i, D_i]]`` is factored as
    ``L_i R_i`` by SVD, and ``Delta`` carries ``alpha_i(p) I`` on the
    corresponding diagonal block.
    """
    if m.K is not None:
        warnings.warn("innovation gain K dropped: the LFR represents the deterministic part only", stacklevel=2)
    nx, nu, ny = m.nx, m.nu, m.ny
    top = hstack([m.A, m.B]) if nu else m.A
    bot = hstack([m.C, m.D]) if nu else m.C
    M = vstack([top, bot]) if ny else top
    M0 = M.coeffs[0]
    Ls, Rs, sizes = [], [], []
    for Mi in M.coeffs[1:]:
        U, s, Vt = np.linalg.svd(Mi, full_matrices=False)
        r = int(np.sum(s > rank_tol * max(s[0], 1.0)))
        Ls.append(U[:, :r] * s[:r])
        Rs.append(Vt[:r])
        sizes.append(r)
    nw = sum(sizes)
    L = np.hstack(Ls) if Ls else _empty(nx + ny, 0)
    R = np.vstack(Rs) if Rs else _empty(0, nx + nu)
    coeffs = np.zeros((len(sizes) + 1, nw, nw))
    off = 0
    for i, r in enumerate(sizes):
        coeffs[i + 1, off : off + r, off : off + r] = np.eye(r)
        off += r
    Delta = PVMatrix(coeffs, M.basis, M.tm)
    return lpvlfr(
        M0[:nx, :nx], L[:nx], M0[:nx, nx:], R[:, :nx], _empty(nw, nw), R[:, nx:],
        M0[nx:, :nx], L[nx:], M0[nx:, nx:], Delta,
    )  # fmt: skip


def interconnect(kind: str, m1: LpvLfrModel, m2: LpvLfrModel, tol: float = 1e12) -> LpvLfrModel:
    """Combine two LFRs; ``Delta`` of the result is ``diag(Delta_1, Delta_2)``.

    kinds: ``series`` (u -> m1 -> m2 -> y), ``parallel`` (y = y1 + y2),
    ``feedback`` (negative: u1 = u - y2, u2 = y1, y = y1),
    ``hconcat`` (u = [u1; u2], y = y1 + y2), ``vconcat`` (y = [y1; y2]).
    """
    nx1, nx2, nw1, nw2 = m1.nx, m2.nx, m1.nw, m2.nw
    if kind == "hconcat":
        nu = m1.nu + m2.nu
    else:
        nu = m1.nu
    n = nx1 + nx2 + nw1 + nw2 + nu
    eye = np.eye(n)
    Sx1, Sx2 = eye[:nx1], eye[nx1 : nx1 + nx2]
    Sw1 = eye[nx1 + nx2 : nx1 + nx2 + nw1]
    Sw2 = eye[nx1 + nx2 + nw1 : nx1 + nx2 + nw1 + nw2]
    Su = eye[n - nu :]
    P1 = m1.Cy @ Sx1 + m1.Dyw @ Sw1
    P2 = m2.Cy @ Sx2 + m2.Dyw @ Sw2

    def need(cond, msg):
        if not cond:
            raise ValueError(msg)

    if kind == "series":
        need(m1.ny == m2.nu, "series: outputs of m1 must match inputs of m2")
        U1 = Su
        Y1 = P1 + m1.Dyu @ U1
        U2 = Y1
        out = P2 + m2.Dyu @ U2
    elif kind == "parallel":
        need(m1.nu == m2.nu and m1.ny == m2.ny, "parallel: port sizes must agree")
        U1 = U2 = Su
        out = P1 + m1.Dyu @ U1 + P2 + m2.Dyu @ U2
    elif kind == "feedback":
        need(m1.ny == m2.nu and m2.ny == m1.nu, "feedback: port sizes must close the loop")
        S = np.eye(m1.ny) + m1.Dyu @ m2.Dyu
        if np.linalg.cond(S) > tol:
            raise ValueError("feedback interconnection is structurally ill-posed (I + D1 D2 singular)")
        Y1 = np.linalg.solve(S, P1 + m1.Dyu @ Su - m1.Dyu @ P2)
        U2 = Y1
        U1 = Su - (P2 + m2.Dyu @ U2)
        out = Y1
    elif kind == "hconcat":
        need(m1.ny == m2.ny, "hconcat: output sizes must agree")
        U1, U2 = Su[: m1.nu], Su[m1.nu :]
        out = P1 + m1.Dyu @ U1 + P2 + m2.Dyu @ U2
    elif kind == "vconcat":
        need(m1.nu == m2.nu, "vconcat: input sizes must agree")
        U1 = U2 = Su
        out = np.vstack([P1 + m1.Dyu @ U1, P2 + m2.Dyu @ U2])
    else:
        raise ValueError(f"unknown interconnection {kind!r}")

    xdot = np.vstack([m1.A @ Sx1 + m1.Bw @ Sw1 + m1.Bu @ U1, m2.A @ Sx2 + m2.Bw @ Sw2 + m2.Bu @ U2])
    z = np.vstack([m1.Cz @ Sx1 + m1.Dzw @ Sw1 + m1.Dzu @ U1, m2.Cz @ Sx2 + m2.Dzw @ Sw2 + m2.Dzu @ U2])
    cx, cw, cu = slice(0, nx1 + nx2), slice(nx1 + nx2, n - nu), slice(n - nu, n)
    Delta = block_diag(m1.Delta, m2.Delta)
    return lpvlfr(
        xdot[:, cx], xdot[:, cw], xdot[:, cu],
        z[:, cx], z[:, cw], z[:, cu],
        out[:, cx], out[:, cw], out[:, cu], Delta,
    )  # fmt: skip


# ---- frozen analysis -------------------------------------------------------------


def frozen(m, p_const):
    """Hold the scheduling constant; returns a model of the same kind with constant coefficients."""
    fz = lambda P: as_pmatrix(P.frozen(p_const))  # noqa: E731
    if isinstance(m, PVMatrix):
        return m.frozen(p_const)
    if isinstance(m, LpvIoModel):
        return LpvIoModel(tuple(fz(a) for a in m.A), tuple(fz(b) for b in m.B), m.delay)
    if isinstance(m, LpvSsModel):
        return LpvSsModel(fz(m.A), fz(m.B), fz(m.C), fz(m.D), fz(m.K) if m.K is not None else None, m.Xi)
    if isinstance(m, LpvLfrModel):
        d = fz(m.Delta) if m.Delta.shape[0] and m.Delta.shape[1] else m.Delta
        return LpvLfrModel(*m.blocks.values(), d)
    raise TypeError(f"cannot freeze {type(m).__name__}")


def frozen_poles(m, p_const) -> np.ndarray:
    """Poles of the LTI dynamics obtained at constant scheduling."""
    f = frozen(m, p_const)
    if isinstance(f, LpvIoModel):
        ny, na = f.ny, f.na
        if na == 0:
            return np.zeros(0, dtype=complex)
        comp = np.zeros((na * ny, na * ny))
        comp[:ny] = np.hstack([-a.coeffs[0] for a in f.A])
        comp[ny:, :-ny] = np.eye((na - 1) * ny)
        return np.linalg.eigvals(comp)
    if isinstance(f, LpvSsModel):
        return np.linalg.eigvals(f.A.coeffs[0])
    if isinstance(f, LpvLfrModel):
        d = f.Delta.coeffs[0] if f.nw and f.nz else np.zeros((f.nw, f.nz))
        gain = np.linalg.solve(np.eye(f.nw) - d @ f.Dzw, d) if f.nw else np.zeros((0, 0))
        return np.linalg.eigvals(f.A + f.Bw @ gain @ f.Cz)
    raise TypeError(f"cannot compute poles of {type(m).__name__}")
