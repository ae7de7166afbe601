"""JSON files for models and templates, CSV for data, text and CSV for fit reports.

Every model file is a JSON object with a ``kind`` header:
``lpvio``, ``lpvss``, ``lpvlfr`` or ``lpvidpoly``. Parameter-varying matrices
use :func:`lpvkit.pvmatrix.to_dict`.

An ``lpvidpoly`` file either lists coefficient slots exactly (as written by
:func:`save_model`) or gives a template in short form::

    {"kind": "lpvidpoly", "A": [<pmatrix>, ...], "B": [...], "F": [...],
     "delay": 0, "free_zeros": false}

Data CSV files have a header row. Columns ``u``/``u1, u2, ...`` are inputs,
``y``/``y1, ...`` outputs, ``t`` is the time stamp and every other column is
a scheduling channel.
"""

from __future__ import annotations

import configparser
import csv
import json
import re
from pathlib import Path

import numpy as np

from .ident.core import CoefSlot, Dataset, FitReport, LpvIdPoly, lpvidpoly
from .models import LpvIoModel, LpvLfrModel, LpvSsModel, lpvio, lpvlfr, lpvss
from .pvmatrix import BasisFunction, from_dict, to_dict
from .scheduling import SchedulingTrajectory, make_timemap

_U = re.compile(r"^u\d*$")
_Y = re.compile(r"^y\d*$")


# ---- models -----------------------------------------------------------------


def _slot_to_dict(s: CoefSlot) -> dict:
    return {
        "poly": s.poly,
        "lag": s.lag,
        "domain": s.tm.domain.value,
        "orders": list(s.tm.orders),
        "names": list(s.tm.names),
        "basis": [[[n, o, d] for n, o, d in b.monomial] for b in s.basis],
        "values": np.asarray(s.values).tolist(),
        "free": np.asarray(s.free).astype(int).tolist(),
    }


def _slot_from_dict(d: dict) -> CoefSlot:
    tm = make_timemap(d["orders"], d["domain"], d["names"])
    basis = tuple(BasisFunction.make({(n, int(o)): int(g) for n, o, g in b}) for b in d["basis"])
    vals = np.array(d["values"], dtype=float)
    free = np.array(d["free"], dtype=bool)
    if vals.shape != free.shape or vals.shape[0] != len(basis) + 1:
        raise ValueError(f"inconsistent slot {d['poly']}{d['lag']}")
    vals.setflags(write=False)
    return CoefSlot(d["poly"], int(d["lag"]), basis, tm, vals, free)


def model_to_dict(m) -> dict:
    if isinstance(m, LpvIoModel):
        return {"kind": "lpvio", "A": [to_dict(a) for a in m.A], "B": [to_dict(b) for b in m.B], "delay": m.delay}
    if isinstance(m, LpvSsModel):
        out = {"kind": "lpvss", **{k: to_dict(v) for k, v in m.matrices.items()}}
        if m.Xi is not None:
            out["Xi"] = np.asarray(m.Xi).tolist()
        return out
    if isinstance(m, LpvLfrModel):
        return {"kind": "lpvlfr", **{k: v.tolist() for k, v in m.blocks.items()}, "Delta": to_dict(m.Delta)}
    if isinstance(m, LpvIdPoly):
        return {
            "kind": "lpvidpoly", "ny": m.ny, "nu": m.nu, "delay": m.delay,
            "slots": [_slot_to_dict(s) for s in m.slots],
        }  # fmt: skip
    raise TypeError(f"cannot serialize {type(m).__name__}")


def _mats(d, key):
    return [from_dict(x) for x in d.get(key, [])]


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "lpvio":
        return lpvio(_mats(d, "A"), _mats(d, "B"), int(d.get("delay", 0)))
    if kind == "lpvss":
        K = from_dict(d["K"]) if "K" in d else None
        return lpvss(*(from_dict(d[k]) for k in "ABCD"), K, d.get("Xi"))
    if kind == "lpvlfr":
        blocks = [np.array(d[k], dtype=float) for k in ("A", "Bw", "Bu", "Cz", "Dzw", "Dzu", "Cy", "Dyw", "Dyu")]
        blocks = [b.reshape(b.shape if b.ndim == 2 else (0, 0)) for b in blocks]
        return lpvlfr(*blocks, from_dict(d["Delta"]))
    if kind == "lpvidpoly":
        if "slots" in d:
            slots = tuple(_slot_from_dict(s) for s in d["slots"])
            return LpvIdPoly(slots, int(d["ny"]), int(d["nu"]), int(d.get("delay", 0)))
        return lpvidpoly(
            *(_mats(d, k) for k in "ABCDF"), delay=int(d.get("delay", 0)),
            free_zeros=bool(d.get("free_zeros", False)), ny=d.get("ny"), nu=d.get("nu"),
        )  # fmt: skip
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(m, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m), indent=1) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))


# ---- data ---------------------------------------------------------------------


def read_data_csv(path) -> tuple[np.ndarray, SchedulingTrajectory, np.ndarray | None, float]:
    """Return ``(u, p, y, Ts)``; ``y`` is ``None`` when the file has no output columns."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(header))
    ucols = [i for i, h in enumerate(header) if _U.match(h)]
    ycols = [i for i, h in enumerate(header) if _Y.match(h)]
    pcols = [i for i, h in enumerate(header) if h != "t" and i not in ucols and i not in ycols]
    Ts = 1.0
    if "t" in header and len(body) > 1:
        t = body[:, header.index("t")]
        Ts = float(t[1] - t[0])
    p = SchedulingTrajectory(body[:, pcols], [header[i] for i in pcols], Ts)
    y = body[:, ycols] if ycols else None
    return body[:, ucols], p, y, Ts


def read_dataset(path) -> Dataset:
    u, p, y, Ts = read_data_csv(path)
    if y is None:
        raise ValueError(f"{path}: identification data needs output columns (y, y1, ...)")
    return Dataset(u, p, y, Ts)


def _names(prefix, n):
    return [prefix] if n == 1 else [f"{prefix}{i + 1}" for i in range(n)]


def write_data_csv(path, u=None, p: SchedulingTrajectory | None = None, y=None, Ts: float = 1.0) -> None:
    """Write columns ``t, u..., <scheduling channels>, y...``."""
    cols, header = [], []
    for prefix, x in (("u", u), ("p", p), ("y", y)):
        if x is None:
            continue
        if prefix == "p":
            cols.append(x.samples)
            header += list(x.channel_names)
            continue
        x = np.asarray(x, dtype=float)
        x = x[:, None] if x.ndim == 1 else x
        cols.append(x)
        header += _names(prefix, x.shape[1])
    data = np.hstack(cols)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t"] + header)
        for k, row in enumerate(data):
            w.writerow([_fmt(k * Ts)] + [_fmt(v) for v in row])


def _fmt(v: float) -> str:
    return repr(float(v))


# ---- reports ------------------------------------------------------------------


def report_text(rep: FitReport) -> str:
    m = rep.model
    structure = m.structure if isinstance(m, LpvIdPoly) else "ss"
    lines = [
        f"method: {rep.method}",
        f"structure: {structure}",
        f"iterations: {rep.n_iter}",
        f"V: {rep.V!r}",
        f"BFR (simulation, estimation data): {rep.bfr_est:.6f} %",
    ]
    if rep.lam is not None:
        lines.append(f"lambda: {rep.lam!r}")
    if rep.xi is not None:
        lines.append(f"Xi: {np.asarray(rep.xi).tolist()!r}")
    lines += [f"note: {n}" for n in rep.notes]
    lines.append("theta (poly, lag, term, row, col) = value")
    for key, val in zip(rep.theta.layout, rep.theta.values):
        lines.append(f"  {key} = {float(val)!r}")
    return "\n".join(lines) + "\n"


def write_report(rep: FitReport, out_dir) -> dict[str, Path]:
    """Write ``report.txt``, ``model.json`` and ``loss_trace.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"report": out / "report.txt", "model": out / "model.json", "loss_trace": out / "loss_trace.csv"}
    paths["report"].write_text(report_text(rep))
    save_model(rep.model, paths["model"])
    with open(paths["loss_trace"], "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["iteration", "V"])
        for i, v in enumerate(rep.loss_trace):
            w.writerow([i, repr(float(v))])
    return paths


def read_options(path) -> dict[str, str]:
    """Parse a line-based ``key = value`` file (``#`` comments, no sections)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), delimiters=("=",))
    cp.optionxform = str
    cp.read_string("[options]\n" + Path(path).read_text())
    return dict(cp["options"])
