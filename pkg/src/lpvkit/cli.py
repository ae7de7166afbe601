"""Command-line interface.

``lpvkit simulate``, ``lpvkit identify`` and ``lpvkit bench unbalanced-disc``.
On failure a single JSON line ``{"error": ..., "message": ...}`` goes to
stderr and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .bench import ExperimentConfig, run_experiment
from .ident import (
    EstimOptions,
    LpvIdPoly,
    init_from,
    lpvarx,
    lpviv,
    lpvpolyest,
    lpvssest,
    plr_estimate,
    simulate_model,
)
from .ident.plr import arx_start
from .models import LpvIoModel, LpvLfrModel, LpvSsModel, simulate_io, simulate_lfr, simulate_ss
from .serialize import load_model, read_data_csv, read_dataset, read_options, write_data_csv, write_report

EXIT_USAGE = 2
EXIT_FAILURE = 1


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", f"{self.prog}: {message}")
        sys.exit(EXIT_USAGE)


def _emit_error(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


# ---- simulate -------------------------------------------------------------------


def simulate_file(model, u, p) -> np.ndarray:
    if isinstance(model, LpvIoModel):
        return simulate_io(model, u, p)
    if isinstance(model, LpvSsModel):
        return simulate_ss(model, u, p)[0]
    if isinstance(model, LpvLfrModel):
        return simulate_lfr(model, u, p)
    if isinstance(model, LpvIdPoly):
        return simulate_model(model, u, p)
    raise CliError(f"cannot simulate {type(model).__name__}")


def cmd_simulate(args) -> dict:
    model = load_model(args.model)
    u, p, _, Ts = read_data_csv(args.data)
    y = simulate_file(model, u, p)
    write_data_csv(args.out, u, p, y, Ts)
    return {"status": "ok", "samples": int(len(y)), "out": str(args.out)}


# ---- identify -------------------------------------------------------------------


def parse_estim_options(d: dict[str, str]) -> tuple[EstimOptions, dict[str, str]]:
    """Split a key/value mapping into ``EstimOptions`` and estimator settings (``method``, ``init``)."""
    kw, extra = {}, {}
    types = {f.name: f.type for f in fields(EstimOptions)}
    for k, v in d.items():
        if k in ("max_iter", "seed"):
            kw[k] = int(v)
        elif k in ("rel_tol", "lam"):
            kw[k] = float(v)
        elif k in ("regularization", "gradient"):
            kw[k] = v
        elif k == "lam_grid":
            kw[k] = np.array([float(x) for x in v.replace(",", " ").split()])
        elif k in ("method", "init"):
            extra[k] = v
        elif k in types:
            raise CliError(f"option {k!r} cannot be set from a file")
        else:
            raise CliError(f"unknown estimation option {k!r}")
    return EstimOptions(**kw), extra


def identify(structure: str, template, data, opts: EstimOptions, method: str | None = None, init: str = "arx"):
    if structure == "ss":
        if not isinstance(template, LpvSsModel):
            raise CliError("structure 'ss' needs an LPV-SS model file as template/initial model")
        return lpvssest(template, data, opts)
    if not isinstance(template, LpvIdPoly):
        raise CliError(f"structure {structure!r} needs an lpvidpoly template")
    if template.structure != structure:
        raise CliError(f"template has {template.structure} structure, not {structure}")
    if structure == "arx":
        return lpviv(template, data, opts) if method == "iv" else lpvarx(template, data, opts)
    method = method or "pem"
    if method == "plr":
        return plr_estimate(structure, template, data, opts)
    if method != "pem":
        raise CliError(f"unknown method {method!r} for {structure}")
    if init == "arx":
        start = arx_start(template, data, structure)
    elif init == "template":
        start = template
    elif init == "plr":
        start = plr_estimate(structure, template, data).model
    else:
        raise CliError(f"unknown initialization {init!r}")
    return lpvpolyest(init_from(template, start), data, opts)


def cmd_identify(args) -> dict:
    template = load_model(args.template)
    data = read_dataset(args.data)
    raw = read_options(args.opts) if args.opts else {}
    raw.setdefault("max_iter", "400")
    opts, extra = parse_estim_options(raw)
    rep = identify(args.structure, template, data, opts, extra.get("method"), extra.get("init", "arx"))
    paths = write_report(rep, args.out)
    return {
        "status": "ok", "method": rep.method, "V": rep.V, "bfr": rep.bfr_est, "iterations": rep.n_iter,
        "files": {k: str(v) for k, v in paths.items()},
    }  # fmt: skip


# ---- bench ----------------------------------------------------------------------


def cmd_bench(args) -> dict:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    rep = run_experiment(cfg, args.out)
    return {
        "status": "ok",
        "embedding_bfr": rep.embedding_bfr,
        "bfr": {k: [float(v) for v in vals] for k, vals in rep.bfr.items()},
        "errors": len(rep.errors),
        "out": str(args.out or cfg.out_dir),
    }


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lpvkit", description="LPV modelling, simulation and identification")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a model file on a data CSV")
    s.add_argument("--model", required=True, type=Path)
    s.add_argument("--data", required=True, type=Path, help="CSV with t, u..., scheduling columns")
    s.add_argument("--out", required=True, type=Path)
    s.set_defaults(func=cmd_simulate)

    i = sub.add_parser("identify", help="estimate a model from data")
    i.add_argument("--structure", required=True, choices=["arx", "armax", "oe", "bj", "ss"])
    i.add_argument("--template", required=True, type=Path)
    i.add_argument("--data", required=True, type=Path)
    i.add_argument("--opts", type=Path, help="key = value options file")
    i.add_argument("--out", required=True, type=Path)
    i.set_defaults(func=cmd_identify)

    b = sub.add_parser("bench", help="benchmark studies")
    bsub = b.add_subparsers(dest="bench", required=True, parser_class=_Parser)
    d = bsub.add_parser("unbalanced-disc", help="four-structure identification study on the unbalanced disc")
    d.add_argument("--config", type=Path, help="key = value experiment configuration")
    d.add_argument("--out", type=Path)
    d.add_argument("--seed", type=int)
    d.add_argument("--workers", type=int)
    d.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        with np.errstate(all="ignore"):
            result = args.func(args)
    except Exception as exc:
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_FAILURE
    print(json.dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
