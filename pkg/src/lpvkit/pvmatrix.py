"""Parameter-varying matrix functions.

A :class:`PVMatrix` is ``A_0 + sum_i A_i * alpha_i(rho)`` where ``rho`` is the
extended scheduling signal described by a :class:`~lpvkit.scheduling.TimeMap`.
Basis functions refer to scheduling entries by ``(channel, order)`` rather
than by column index, so merging time maps never invalidates a basis.

Each basis function is a monomial in the extended signal times an optional
product of labelled custom factors. This set is closed under products, which
keeps every operator below exact.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .scheduling import (
    DomainMismatchError,
    TimeDomain,
    TimeMap,
    extend_trajectory,
    make_timemap,
    merge_timemaps,
)

DROP_TOL = 1e-14

Entry = tuple[str, int]  # (channel, shift or derivative order)


@dataclass(frozen=True, eq=False)
class CustomFactor:
    """User function of selected extended-signal entries.

    ``fn`` receives an array whose last axis holds the values of ``args`` (in
    that order). Two factors are considered equal when label and arguments
    match; the function itself is not compared.
    """

    label: str
    fn: Callable[[np.ndarray], np.ndarray]
    args: tuple[Entry, ...]

    @property
    def key(self):
        return (self.label, self.args)

    def __eq__(self, other):
        return isinstance(other, CustomFactor) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def shifted(self, k: int) -> "CustomFactor":
        return CustomFactor(self.label, self.fn, tuple((n, o + k) for n, o in self.args))

    def evaluate(self, rho: np.ndarray, tm: TimeMap) -> np.ndarray:
        x = rho[:, [tm.index(n, o) for n, o in self.args]]
        try:
            val = np.asarray(self.fn(x), dtype=float)
        except Exception:
            val = None
        if val is None or val.shape != x.shape[:1]:
            val = np.array([float(self.fn(row)) for row in x])
        if not np.all(np.isfinite(val)):
            raise ValueError(f"custom basis {self.label!r} returned non-finite values")
        return val


@dataclass(frozen=True)
class BasisFunction:
    """Product of a monomial ``prod rho_(name,order)^degree`` and custom factors."""

    monomial: tuple[tuple[str, int, int], ...] = ()
    customs: tuple[CustomFactor, ...] = ()

    @classmethod
    def make(cls, degrees: dict[Entry, int] | None = None, customs: Iterable[CustomFactor] = ()):
        degrees = {e: d for e, d in (degrees or {}).items() if d}
        if any(d < 0 for d in degrees.values()):
            raise ValueError("monomial degrees must be non-negative")
        mono = tuple(sorted(((n, o, d) for (n, o), d in degrees.items()), key=lambda t: (t[1], t[0])))
        return cls(mono, tuple(sorted(customs, key=lambda c: c.key)))

    @classmethod
    def affine(cls, name: str, order: int = 0):
        return cls.make({(name, order): 1})

    @property
    def degrees(self) -> dict[Entry, int]:
        return {(n, o): d for n, o, d in self.monomial}

    @property
    def kind(self) -> str:
        if self.customs:
            return "custom"
        if not self.monomial:
            return "constant"
        if len(self.monomial) == 1 and self.monomial[0][2] == 1:
            return "affine"
        return "monomial"

    @property
    def entries(self) -> set[Entry]:
        out = {(n, o) for n, o, _ in self.monomial}
        for c in self.customs:
            out.update(c.args)
        return out

    @property
    def sort_key(self):
        return (
            sum(d for *_, d in self.monomial),
            len(self.customs),
            tuple((o, n, d) for n, o, d in self.monomial),
            tuple(c.key for c in self.customs),
        )

    def __mul__(self, other: "BasisFunction") -> "BasisFunction":
        deg = self.degrees
        for e, d in other.degrees.items():
            deg[e] = deg.get(e, 0) + d
        return BasisFunction.make(deg, self.customs + other.customs)

    def shifted(self, k: int) -> "BasisFunction":
        return BasisFunction.make(
            {(n, o + k): d for n, o, d in self.monomial}, [c.shifted(k) for c in self.customs]
        )

    def derivative(self) -> list[tuple[float, "BasisFunction"]]:
        """Time derivative as a list of ``(factor, basis)`` terms (product rule)."""
        if self.customs:
            raise ValueError("custom basis functions cannot be differentiated")
        terms = []
        deg = self.degrees
        for (n, o), d in deg.items():
            new = dict(deg)
            new[(n, o)] = d - 1
            new[(n, o + 1)] = new.get((n, o + 1), 0) + 1
            terms.append((float(d), BasisFunction.make(new)))
        return terms

    def evaluate(self, rho: np.ndarray, tm: TimeMap) -> np.ndarray:
        """Values on extended samples ``rho`` (rows) laid out per ``tm``."""
        val = np.ones(rho.shape[0])
        for n, o, d in self.monomial:
            val = val * rho[:, tm.index(n, o)] ** d
        for c in self.customs:
            val = val * c.evaluate(rho, tm)
        return val

    def describe(self) -> str:
        if not self.monomial and not self.customs:
            return "1"
        parts = [f"{n}[{o:+d}]" + (f"^{d}" if d > 1 else "") for n, o, d in self.monomial]
        parts += [f"{c.label}(" + ",".join(f"{n}[{o:+d}]" for n, o in c.args) + ")" for c in self.customs]
        return "*".join(parts)


CONSTANT = BasisFunction()


def _timemap_for(entries: Iterable[Entry], tm: TimeMap) -> TimeMap:
    """Smallest extension of ``tm`` that contains ``entries``."""
    entries = list(entries)
    orders = set(tm.orders) | {o for _, o in entries}
    names = set(tm.names) | {n for n, _ in entries}
    return make_timemap(orders, tm.domain, sorted(names))


class PVMatrix:
    """Immutable parameter-varying matrix function.

    ``coeffs[0]`` multiplies the constant 1, ``coeffs[i]`` multiplies
    ``basis[i - 1]``. Arithmetic follows numpy conventions: ``*`` and ``**``
    are element-wise (with broadcasting), ``@`` is the matrix product.
    """

    __array_ufunc__ = None  # let numpy defer to our reflected operators

    def __init__(self, coeffs, basis: Sequence[BasisFunction] = (), tm: TimeMap | None = None):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 3:
            raise ValueError("coefficient stack must have shape (n_terms, rows, cols)")
        basis = tuple(basis)
        if coeffs.shape[0] != len(basis) + 1:
            raise ValueError(f"{coeffs.shape[0]} coefficient matrices for {len(basis)} basis functions")
        tm = tm if tm is not None else make_timemap([0])
        for b in basis:
            if b == CONSTANT:
                raise ValueError("the constant term lives in coeffs[0]")
            missing = [e for e in b.entries if not tm.contains(*e)]
            if missing:
                raise ValueError(f"basis {b.describe()} uses {missing} outside the time map")
        merged: dict[BasisFunction, np.ndarray] = {}
        for b, c in zip(basis, coeffs[1:]):
            merged[b] = merged[b] + c if b in merged else c.copy()
        kept = sorted(
            (b for b, c in merged.items() if np.max(np.abs(c), initial=0.0) >= DROP_TOL),
            key=lambda b: b.sort_key,
        )
        stack = np.empty((len(kept) + 1,) + coeffs.shape[1:])
        stack[0] = coeffs[0]
        for i, b in enumerate(kept):
            stack[i + 1] = merged[b]
        stack.setflags(write=False)
        self._coeffs = stack
        self._basis = tuple(kept)
        self._tm = tm

    # ---- basic properties -------------------------------------------------

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def basis(self) -> tuple[BasisFunction, ...]:
        return self._basis

    @property
    def tm(self) -> TimeMap:
        return self._tm

    @property
    def domain(self) -> TimeDomain:
        return self._tm.domain

    @property
    def shape(self) -> tuple[int, int]:
        return self._coeffs.shape[1:]

    @property
    def is_constant(self) -> bool:
        return not self._basis

    @property
    def terms(self) -> list[tuple[BasisFunction, np.ndarray]]:
        return [(CONSTANT, self._coeffs[0])] + list(zip(self._basis, self._coeffs[1:]))

    def __repr__(self):
        k, l = self.shape
        desc = " + ".join(b.describe() for b, _ in self.terms)
        return f"PVMatrix({k}x{l}, {self.domain.value}, basis: {desc})"

    def equals(self, other: "PVMatrix", tol: float = 0.0) -> bool:
        """Structural equality (same basis, coefficients within ``tol``)."""
        other = as_pmatrix(other, self._tm)
        return (
            self.shape == other.shape
            and self._basis == other._basis
            and bool(np.all(np.abs(self._coeffs - other._coeffs) <= tol))
        )

    # ---- evaluation --------------------------------------------------------

    def basis_values(self, rho) -> np.ndarray:
        """``(M, n_terms)`` matrix of basis values, first column all ones."""
        rho = np.atleast_2d(np.asarray(rho, dtype=float))
        if rho.shape[1] != self._tm.dim:
            raise ValueError(f"extended sample has {rho.shape[1]} entries, time map needs {self._tm.dim}")
        out = np.ones((rho.shape[0], len(self._basis) + 1))
        for i, b in enumerate(self._basis):
            out[:, i + 1] = b.evaluate(rho, self._tm)
        return out

    def eval(self, rho) -> np.ndarray:
        """Evaluate at one extended sample (``(k, l)``) or a batch of rows (``(M, k, l)``)."""
        rho = np.asarray(rho, dtype=float)
        single = rho.ndim == 1
        vals = self.basis_values(rho)
        out = np.einsum("mi,ikl->mkl", vals, self._coeffs)
        return out[0] if single else out

    def evaluate(self, p, boundary: str = "hold") -> np.ndarray:
        """Evaluate along a scheduling trajectory, ``(N, k, l)``."""
        return self.eval(extend_trajectory(self._tm, p, boundary).samples)

    def frozen(self, p_const) -> np.ndarray:
        """Value at constant scheduling (all shifts equal), derivatives zero in CT."""
        p_const = np.atleast_1d(np.asarray(p_const, dtype=float))
        if p_const.size != len(self._tm.names):
            raise ValueError(f"need {len(self._tm.names)} scheduling values, got {p_const.size}")
        rho = np.array(
            [
                0.0 if (self.domain is TimeDomain.CT and o > 0) else p_const[self._tm.names.index(n)]
                for n, o in self._tm.columns
            ]
        )
        return self.eval(rho)

    # ---- structural helpers ------------------------------------------------

    def with_timemap(self, tm: TimeMap) -> "PVMatrix":
        if tm.domain is not self.domain and self._basis:
            raise DomainMismatchError("cannot move a parameter-varying matrix to another time domain")
        return PVMatrix(self._coeffs, self._basis, tm)

    def _map(self, fn) -> "PVMatrix":
        new = np.stack([fn(c) for c in self._coeffs])
        return PVMatrix(new, self._basis, self._tm)

    # ---- operators -----------------------------------------------------------

    def __neg__(self):
        return self._map(operator.neg)

    def __pos__(self):
        return self

    def __add__(self, other):
        return _linear2(self, other, operator.add)

    def __radd__(self, other):
        return _linear2(other, self, operator.add)

    def __sub__(self, other):
        return _linear2(self, other, operator.sub)

    def __rsub__(self, other):
        return _linear2(other, self, operator.sub)

    def __mul__(self, other):
        return _bilinear(self, other, operator.mul)

    def __rmul__(self, other):
        return _bilinear(other, self, operator.mul)

    def __truediv__(self, other):
        if isinstance(other, PVMatrix):
            raise TypeError("division by a parameter-varying matrix is not representable; use an LFR")
        return self * (1.0 / np.asarray(other, dtype=float))

    def __matmul__(self, other):
        return _bilinear(self, other, _matprod)

    def __rmatmul__(self, other):
        return _bilinear(other, self, _matprod)

    def __pow__(self, n):
        """Element-wise power for integer ``n >= 0``."""
        n = _check_power(n)
        out = as_pmatrix(np.ones(self.shape), self._tm)
        for _ in range(n):
            out = out * self
        return out

    @property
    def T(self) -> "PVMatrix":
        return self._map(np.transpose)

    @property
    def H(self) -> "PVMatrix":
        # real coefficients: conjugate transpose equals transpose
        return self._map(lambda c: np.conj(c).T)

    def vec(self) -> "PVMatrix":
        """Column-major vectorization, ``(k*l, 1)``."""
        return self._map(lambda c: c.reshape(-1, 1, order="F"))

    def sum(self, axis: int = 0) -> "PVMatrix":
        """Sum along columns (``axis=0``, gives a row) or rows (``axis=1``)."""
        return self._map(lambda c: c.sum(axis=axis, keepdims=True))

    def _index(self, key):
        if not isinstance(key, tuple):
            key = (key, slice(None))
        if len(key) != 2:
            raise IndexError("parameter-varying matrices are indexed by (row, col)")
        k, l = self.shape
        r = np.atleast_1d(np.arange(k)[key[0]])
        c = np.atleast_1d(np.arange(l)[key[1]])
        return np.ix_(r, c)

    def __getitem__(self, key) -> "PVMatrix":
        ix = self._index(key)
        return self._map(lambda c: c[ix])

    def assign(self, key, value) -> "PVMatrix":
        """Copy of ``self`` with the entries selected by ``key`` replaced by ``value``."""
        ix = self._index(key)
        value = as_pmatrix(value, self._tm)
        tm = _merged_tm(self, value)
        mine = dict((b, c) for b, c in self.terms)
        theirs = dict((b, c) for b, c in value.terms)
        keys = _ordered_union(self, value)
        target = (len(ix[0]), ix[1].shape[1])
        out = []
        for b in keys:
            c = np.array(mine.get(b, np.zeros(self.shape)), dtype=float)
            c[ix] = np.broadcast_to(theirs.get(b, np.zeros(value.shape)), target)
            out.append(c)
        return PVMatrix(np.stack(out), keys[1:], tm)

    def __iter__(self):
        raise TypeError("PVMatrix is not iterable; index explicitly")


def _check_power(n) -> int:
    if int(n) != n or n < 0:
        raise ValueError("only non-negative integer powers are representable")
    return int(n)


def _matprod(a, b):
    if a.shape == (1, 1) or b.shape == (1, 1):
        return a * b
    return a @ b


def _merged_tm(a: PVMatrix, b: PVMatrix) -> TimeMap:
    if a.domain is not b.domain:
        # a constant matrix carries no scheduling dependence and adopts the other domain
        if a.is_constant:
            return b.tm
        if b.is_constant:
            return a.tm
    return merge_timemaps(a.tm, b.tm)[0]


def _ordered_union(a: PVMatrix, b: PVMatrix) -> list[BasisFunction]:
    seen = {CONSTANT: None}
    for x in (a, b):
        for bf in x.basis:
            seen.setdefault(bf, None)
    return list(seen)


def _pair(a, b) -> tuple[PVMatrix, PVMatrix]:
    if not isinstance(a, PVMatrix) and not isinstance(b, PVMatrix):
        return as_pmatrix(a), as_pmatrix(b)
    if not isinstance(a, PVMatrix):
        a = as_pmatrix(a, b.tm)
    if not isinstance(b, PVMatrix):
        b = as_pmatrix(b, a.tm)
    return a, b


def _linear2(a, b, fn) -> PVMatrix:
    """Apply an operation that is linear in each argument jointly (sum, concat)."""
    a, b = _pair(a, b)
    tm = _merged_tm(a, b)
    ta, tb = dict(a.terms), dict(b.terms)
    za, zb = np.zeros(a.shape), np.zeros(b.shape)
    keys = _ordered_union(a, b)
    coeffs = np.stack([fn(ta.get(k, za), tb.get(k, zb)) for k in keys])
    return PVMatrix(coeffs, keys[1:], tm)


def _bilinear(a, b, fn) -> PVMatrix:
    """Apply a bilinear operation (products) term by term."""
    a, b = _pair(a, b)
    tm = _merged_tm(a, b)
    prods: dict[BasisFunction, np.ndarray] = {}
    for ba, ca in a.terms:
        for bb, cb in b.terms:
            bf = ba * bb
            c = fn(ca, cb)
            prods[bf] = prods[bf] + c if bf in prods else c
    const = prods.pop(CONSTANT)
    keys = list(prods)
    tm = _timemap_for((e for k in keys for e in k.entries), tm)
    return PVMatrix(np.stack([const] + [prods[k] for k in keys]), keys, tm)


# ---- constructors --------------------------------------------------------


def as_pmatrix(x, tm: TimeMap | None = None) -> PVMatrix:
    """Lift a scalar/array to a constant parameter-varying matrix."""
    if isinstance(x, PVMatrix):
        return x
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError("constant matrices must be at most 2-D")
    return PVMatrix(arr[None], (), tm)


def _coefficient_list(coeffs) -> list[np.ndarray]:
    if isinstance(coeffs, np.ndarray) and coeffs.ndim == 3:
        # MATLAB-style cat(3, A0, A1, ...): terms along the last axis
        return [coeffs[:, :, i] for i in range(coeffs.shape[2])]
    if isinstance(coeffs, np.ndarray) and coeffs.ndim <= 2:
        return [np.atleast_2d(coeffs)]
    mats = []
    for c in coeffs:
        c = np.asarray(c, dtype=float)
        mats.append(c.reshape(1, 1) if c.ndim == 0 else np.atleast_2d(c))
    return mats


def pmatrix(
    coeffs,
    basis_type: str = "affine",
    basis_params: Sequence | None = None,
    tm: TimeMap | None = None,
) -> PVMatrix:
    """Construct a parameter-varying matrix from coefficients and a basis description.

    ``basis_type="affine"``: each parameter is an index into the extended
    signal, 1-based, with 0 the constant 1. Indices (and degree vectors)
    follow the column order in which the time map was declared, so with
    ``make_timemap([0, -1])`` index 1 is ``p_t`` and index 2 is ``p_{t-1}``.
    ``basis_type="poly"``: each parameter is a degree vector over the extended
    signal (all zeros means constant).
    ``basis_type="custom"``: each parameter is 0 or a ``(label, fn)`` pair,
    ``fn`` taking the full extended sample.
    """
    tm = tm if tm is not None else make_timemap([0])
    mats = _coefficient_list(coeffs)
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise ValueError(f"coefficient matrices have different shapes: {sorted(shapes)}")
    shape = mats[0].shape
    if basis_params is None:
        if basis_type != "affine":
            raise ValueError(f"basis type {basis_type!r} needs explicit parametrization")
        basis_params = list(range(len(mats)))
    if len(basis_params) != len(mats):
        raise ValueError(f"{len(mats)} coefficients but {len(basis_params)} basis parameters")
    cols = tm.declared_columns
    const = np.zeros(shape)
    basis, rest = [], []
    for c, par in zip(mats, basis_params):
        if basis_type == "affine":
            if int(par) != par or not 0 <= par <= tm.dim:
                raise ValueError(f"affine index {par} outside 0..{tm.dim}")
            bf = CONSTANT if par == 0 else BasisFunction.affine(*cols[int(par) - 1])
        elif basis_type == "poly":
            deg = np.asarray(par, dtype=int).ravel()
            if deg.size != tm.dim:
                raise ValueError(f"degree vector {list(deg)} needs length {tm.dim}")
            bf = BasisFunction.make({cols[j]: int(d) for j, d in enumerate(deg)})
        elif basis_type == "custom":
            if isinstance(par, (int, np.integer)) and par == 0:
                bf = CONSTANT
            else:
                label, fn = par
                bf = BasisFunction.make({}, [CustomFactor(str(label), fn, tuple(cols))])
        else:
            raise ValueError(f"unknown basis type {basis_type!r}")
        if bf == CONSTANT:
            const = const + c
        else:
            basis.append(bf)
            rest.append(c)
    return PVMatrix(np.stack([const] + rest), basis, tm)


def preal(name: str = "p", domain: TimeDomain | str = TimeDomain.DT) -> PVMatrix:
    """Scalar equal to the scheduling channel ``name``."""
    if not name:
        raise ValueError("scheduling channel name must be non-empty")
    tm = make_timemap([0], domain, [name])
    return PVMatrix(np.array([[[0.0]], [[1.0]]]), [BasisFunction.affine(name, 0)], tm)


def pfun(label: str, fn: Callable, args: Sequence[Entry | str], domain: TimeDomain | str = TimeDomain.DT) -> PVMatrix:
    """Scalar custom basis function of selected scheduling entries, e.g. ``pfun("cos", np.cos, ["p"])``.

    For a single argument ``fn`` gets a 1-D array of values; otherwise the last
    axis holds the arguments.
    """
    args = tuple((a, 0) if isinstance(a, str) else (a[0], int(a[1])) for a in args)
    tm = make_timemap({o for _, o in args}, domain, sorted({n for n, _ in args}))
    call = (lambda x: fn(x[..., 0])) if len(args) == 1 else fn
    bf = BasisFunction.make({}, [CustomFactor(label, call, args)])
    return PVMatrix(np.array([[[0.0]], [[1.0]]]), [bf], tm)


def pshift(P: PVMatrix, k: int) -> PVMatrix:
    """Shift the scheduling dependence ``k`` samples (DT only)."""
    P = as_pmatrix(P)
    if P.domain is not TimeDomain.DT:
        raise DomainMismatchError("pshift is only defined for discrete-time matrices")
    k = int(k)
    tm = make_timemap([o + k for o in P.tm.orders], TimeDomain.DT, P.tm.names)
    return PVMatrix(P.coeffs, [b.shifted(k) for b in P.basis], tm)


def pdiff(P: PVMatrix, k: int = 1) -> PVMatrix:
    """Differentiate ``k`` times w.r.t. time (CT only), exact by the product rule."""
    P = as_pmatrix(P)
    if P.domain is not TimeDomain.CT:
        raise DomainMismatchError("pdiff is only defined for continuous-time matrices")
    if int(k) != k or k < 1:
        raise ValueError("derivative order must be a positive integer")
    terms = [(b, c) for b, c in P.terms[1:]]
    for _ in range(int(k)):
        nxt = []
        for b, c in terms:
            nxt.extend((nb, f * c) for f, nb in b.derivative())
        terms = nxt
    tm = make_timemap(range(0, P.tm.orders[-1] + int(k) + 1), TimeDomain.CT, P.tm.names)
    const = np.zeros((1,) + P.shape)
    basis = [b for b, _ in terms if b != CONSTANT]
    const[0] += sum((c for b, c in terms if b == CONSTANT), np.zeros(P.shape))
    stack = np.concatenate([const, np.stack([c for b, c in terms if b != CONSTANT])]) if basis else const
    return PVMatrix(stack, basis, tm)


def hstack(mats: Sequence) -> PVMatrix:
    out = mats[0]
    for m in mats[1:]:
        out = _linear2(out, m, lambda a, b: np.hstack([a, b]))
    return as_pmatrix(out)


def vstack(mats: Sequence) -> PVMatrix:
    out = mats[0]
    for m in mats[1:]:
        out = _linear2(out, m, lambda a, b: np.vstack([a, b]))
    return as_pmatrix(out)


def block_diag(*mats) -> PVMatrix:
    mats = [as_pmatrix(m) for m in mats]
    rows = []
    for i, m in enumerate(mats):
        row = [m if j == i else np.zeros((m.shape[0], mats[j].shape[1])) for j in range(len(mats))]
        rows.append(hstack(row) if len(row) > 1 else m)
    return vstack(rows) if len(rows) > 1 else rows[0]


def kron(a, b) -> PVMatrix:
    return _bilinear(a, b, np.kron)


def matrix_power(P: PVMatrix, n: int) -> PVMatrix:
    n = _check_power(n)
    P = as_pmatrix(P)
    if P.shape[0] != P.shape[1]:
        raise ValueError("matrix power needs a square matrix")
    out = as_pmatrix(np.eye(P.shape[0]), P.tm)
    for _ in range(n):
        out = out @ P
    return out


def diag(P) -> PVMatrix:
    """Vector -> diagonal matrix; matrix -> column of its diagonal."""
    P = as_pmatrix(P)
    if 1 in P.shape:
        return P._map(lambda c: np.diag(c.ravel()))
    return P._map(lambda c: np.diag(c).reshape(-1, 1))


def transpose(P) -> PVMatrix:
    return as_pmatrix(P).T


# ---- serialization ---------------------------------------------------------


def to_dict(P: PVMatrix) -> dict:
    """JSON-friendly description; floats keep full precision through ``json``."""
    terms = []
    for b, c in P.terms:
        if b.customs:
            raise ValueError(f"custom basis {b.describe()} cannot be serialized")
        terms.append(
            {
                "monomial": [[n, o, d] for n, o, d in b.monomial],
                "coeff": c.ravel().tolist(),
            }
        )
    return {
        "shape": list(P.shape),
        "domain": P.domain.value,
        "orders": list(P.tm.orders),
        "names": list(P.tm.names),
        "terms": terms,
    }


def from_dict(d: dict) -> PVMatrix:
    shape = tuple(d["shape"])
    tm = make_timemap(d["orders"], d["domain"], d["names"])
    const = np.zeros(shape)
    basis, rest = [], []
    for t in d["terms"]:
        c = np.array(t["coeff"], dtype=float).reshape(shape)
        bf = BasisFunction.make({(n, int(o)): int(deg) for n, o, deg in t["monomial"]})
        if bf == CONSTANT:
            const = const + c
        else:
            basis.append(bf)
            rest.append(c)
    return PVMatrix(np.stack([const] + rest), basis, tm)
