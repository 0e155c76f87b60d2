"""Command-line front end.

Subcommands
-----------
invariant   half-signature (or symmetry-class invariant) of one localizer
sweep       the same over a Cartesian grid of scales and model parameters
oracle      winding number (d=1) or odd Chern number (d=3) of the symbol
flow        spectral flow along ``lam -> kappa D_hat + lam H``
eta         eta partial sums of the localizer spectrum
verify      condition report with gap bound and symmetry residuals

Models are either built in (``--model ssh --param m=0.5``) or read from a
JSON model file (``--model path/to/model.json``)::

    {
      "d": 1, "N": 1,
      "hoppings": [{"r": [0], "re": [[0.5]], "im": [[0.0]]},
                   {"r": [-1], "re": [[1.0]]}],
      "disorder": {"type": "multiplicative", "w": 0.1, "seed": 7},
      "symmetry": {"S": [[0, 1], [-1, 0]], "sA": -1, "sAprime": -1}
    }

``r`` follows ``(A psi)(n) = sum_r A_r psi(n - r)``; ``im`` defaults to zero;
``disorder`` (``multiplicative`` or ``onsite``) and ``symmetry`` are optional.
``N`` must be a multiple of the Clifford dimension ``nu`` (1 for d=1, 2 for
d=3); the Dirac matrices act on the first tensor factor of ``C^nu (x) C^m``.

Outputs are byte-deterministic: floats use ``%.17g``, and wall time is only
included with ``--timing``.

Exit codes: 0 success, 2 bad configuration, 3 operator not invertible,
4 sufficient conditions violated, 5 odd signature or internal error.  Codes 3
and 4 are reported only when the result is unverified and
``--allow-unverified`` is absent.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .clifford import build_clifford
from .errors import LocalizerError, NotInvertibleError, OddSignatureError, SymmetryError
from .lattice import build_ball
from .localizer import build_localizer, min_abs_eigenvalue
from .models import MODELS, ModelSpec, build_model
from .operators import HoppingOperator, condition_report, multiplicative_disorder, onsite_disorder
from .oracle import (
    BlochSymbol,
    eta_partial_sum,
    localizer_path,
    odd_chern_d3,
    shift_crossings,
    spectral_flow,
    winding_number_d1,
)
from .signature import DENSE_LIMIT, inertia
from .symmetry import RealSymmetryData, build_R, invariant_from_localizer, verify_symmetry

log = logging.getLogger("spectral_localizer")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NOT_INVERTIBLE, EXIT_CONDITIONS, EXIT_INTERNAL = 0, 2, 3, 4, 5

#: fallback (kappa, rho) for models whose gap vanishes so "auto" has no meaning
AUTO_FALLBACK = {"defect-shift": lambda p: (1.0 / 18.0, float(p.get("rho", 20.0)))}


class ConfigError(ValueError):
    """Invalid command-line or model-file configuration."""


# ---------------------------------------------------------------- models


def _matrix(entry, key, N):
    raw = entry.get(key)
    if raw is None:
        return np.zeros((N, N))
    arr = np.asarray(raw, dtype=float)
    if arr.shape != (N, N):
        raise ConfigError(f"hopping {key!r} must be {N}x{N}, got shape {arr.shape}")
    return arr


def parse_model_file(path: str) -> ModelSpec:
    """Read a JSON model file (schema in the module docstring)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    try:
        d, N = int(data["d"]), int(data["N"])
        hops = data["hoppings"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"model file needs integer 'd', 'N' and a 'hoppings' list: {exc}") from exc
    if not hops:
        raise ConfigError("model file has no hoppings")
    terms = {}
    for h in hops:
        r = tuple(int(x) for x in h["r"])
        if len(r) != d:
            raise ConfigError(f"displacement {list(r)} is not {d}-dimensional")
        if r in terms:
            raise ConfigError(f"duplicate displacement {list(r)}")
        terms[r] = _matrix(h, "re", N) + 1j * _matrix(h, "im", N)
    op = HoppingOperator(d, N, terms, name=os.path.basename(path))
    dis = data.get("disorder")
    if dis:
        kind, w, seed = dis.get("type", "multiplicative"), float(dis.get("w", 0.0)), int(dis.get("seed", 0))
        if kind == "multiplicative":
            op = multiplicative_disorder(op, w, seed)
        elif kind == "onsite":
            op = onsite_disorder(op, w, seed)
        else:
            raise ConfigError(f"unknown disorder type {kind!r}")
    sym = None
    if data.get("symmetry"):
        s = data["symmetry"]
        try:
            rep = build_clifford(d)
            sym = RealSymmetryData.from_rep(rep, np.asarray(s["S"], dtype=float), int(s["sA"]), int(s["sAprime"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad symmetry block: {exc}") from exc
    return ModelSpec(os.path.basename(path), {"file": path}, op, sym)


def _coerce(value: str):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"parameter value {value!r} is not a number") from exc


def parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _coerce(v.strip())
    return out


def load_model(name: str, params: dict, seed: int | None = None) -> ModelSpec:
    """Built-in model by name, or a model file when ``name`` is a path."""
    if name in MODELS:
        params = dict(params)
        if seed is not None and name == "ssh":
            params.setdefault("seed", seed)
        try:
            return build_model(name, params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for model {name!r}: {exc}") from exc
    if os.path.exists(name):
        if params:
            raise ConfigError("--param is not supported with a model file")
        return parse_model_file(name)
    raise ConfigError(f"unknown model {name!r}; built-in models: {', '.join(sorted(MODELS))}")


# ---------------------------------------------------------------- grids


def parse_grid(items) -> list[tuple[str, list]]:
    """``name=start:stop:step`` (inclusive stop) or ``name=v1,v2,...``."""
    axes = []
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--grid expects name=spec, got {item!r}")
        name, spec = (s.strip() for s in item.split("=", 1))
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range {spec!r} must be start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if step <= 0 or stop < start:
                raise ConfigError(f"empty range {spec!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            vals = [round(start + i * step, 12) for i in range(count)]
        else:
            vals = [_coerce(v.strip()) for v in spec.split(",") if v.strip()]
        if not vals:
            raise ConfigError(f"grid axis {name!r} is empty")
        axes.append((name, vals))
    return axes


# ---------------------------------------------------------------- output


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _plain(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def to_json(obj, indent: int = 2, level: int = 0) -> str:
    """JSON with ``%.17g`` floats; non-finite floats become strings."""
    obj = _plain(obj)
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        s = _fmt_float(obj)
        return s if math.isfinite(obj) else json.dumps(s)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = ",\n".join(f"{inner}{json.dumps(str(k))}: {to_json(v, indent, level + 1)}" for k, v in obj.items())
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        body = ",\n".join(inner + to_json(v, indent, level + 1) for v in obj)
        return "[\n" + body + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(rec: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in rec.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = ";".join(_cell(x) for x in v)
        else:
            out[key] = v
    return out


def _cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(_cell(x) for x in v) + "]"
    return str(v)


def to_csv(rows: list[dict]) -> str:
    """Header plus one line per record; columns in first-seen order."""
    flat = [_flatten(r) for r in rows]
    cols = []
    for r in flat:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in flat:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def emit(document: dict, rows: list[dict], fmt: str, out: str | None):
    text = to_json(document) + "\n" if fmt == "json" else to_csv(rows)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- core runs


def _parse_scale(value, name):
    if value is None or str(value).lower() == "auto":
        return "auto"
    try:
        x = float(value)
    except ValueError as exc:
        raise ConfigError(f"--{name} must be a positive number or 'auto'") from exc
    if not x > 0:
        raise ConfigError(f"--{name} must be positive")
    return x


def resolve_scales(spec: ModelSpec, kappa, rho, rep):
    """Turn "auto" into numbers before any localizer is assembled.

    ``kappa = g^3 / (18 ||A|| ||[D, A]||)`` and ``rho = 2 g / kappa``.  For
    site-dependent operators the gap estimate depends on the probe size, so
    the resolution is iterated once at the resolved radius.
    """
    kappa, rho = _parse_scale(kappa, "kappa"), _parse_scale(rho, "rho")
    src = {"kappa_source": "given", "rho_source": "given"}
    if kappa != "auto" and rho != "auto":
        return kappa, rho, src
    probe = rho if rho != "auto" else 25.0
    for _ in range(2 if not spec.operator.translation_invariant else 1):
        rpt = condition_report(spec.operator, rep, 1.0 if kappa == "auto" else kappa, probe, strict=False)
        if not rpt.invertible:
            if spec.name in AUTO_FALLBACK:
                k0, r0 = AUTO_FALLBACK[spec.name](spec.params)
                kk = k0 if kappa == "auto" else kappa
                rr = r0 if rho == "auto" else rho
                src = {
                    "kappa_source": "model-default" if kappa == "auto" else "given",
                    "rho_source": "model-default" if rho == "auto" else "given",
                }
                return kk, rr, src
            raise NotInvertibleError("operator is not invertible; 'auto' kappa/rho are undefined")
        kk = kappa if kappa != "auto" else (rpt.kappa_max if math.isfinite(rpt.kappa_max) else 1.0)
        rr = rho if rho != "auto" else max(2 * rpt.gap_g / kk, 1.0)
        probe = rr
    src = {"kappa_source": "auto" if kappa == "auto" else "given", "rho_source": "auto" if rho == "auto" else "given"}
    return float(kk), float(rr), src


def _status(report, allow: bool) -> tuple[str, int]:
    if report.verified:
        return "verified", EXIT_OK
    if not report.invertible:
        return "unverified: conditions violated (A not invertible)", EXIT_OK if allow else EXIT_NOT_INVERTIBLE
    return "unverified: conditions violated", EXIT_OK if allow else EXIT_CONDITIONS


def _report_dict(report) -> dict:
    return report.to_dict()


def _assemble(spec, rep, kappa, rho):
    ball = build_ball(spec.d, rho)
    dim = 2 * len(ball) * spec.operator.N
    L = build_localizer(spec.operator, rep, ball, kappa, sparse=dim > 2000)
    return ball, L


def run_invariant(cfg: dict) -> tuple[dict, int]:
    """One invariant computation; returns the record and an exit code."""
    spec = load_model(cfg["model"], cfg.get("params", {}), cfg.get("seed"))
    rep = build_clifford(spec.d)
    kappa, rho, src = resolve_scales(spec, cfg.get("kappa", "auto"), cfg.get("rho", "auto"), rep)
    report = condition_report(spec.operator, rep, kappa, rho, strict=False)
    t0 = time.perf_counter()
    ball, L = _assemble(spec, rep, kappa, rho)
    res = invariant_from_localizer(
        L, spec.symmetry, len(ball), cfg.get("tol"), report, rep=rep, op=spec.operator if spec.symmetry else None
    )
    gap = min_abs_eigenvalue(L) if cfg.get("gap", True) else None
    status, code = _status(report, cfg.get("allow_unverified", False))
    rec = {
        "model": spec.name,
        "params": spec.params,
        "d": spec.d,
        "N": spec.operator.N,
        "kappa": kappa,
        "rho": rho,
        **src,
        "dim": L.dim,
        "kind": res.kind,
        "value": res.value,
        "signature": res.signature,
        "n_plus": res.inertia.n_plus,
        "n_minus": res.inertia.n_minus,
        "min_abs_eig": gap,
        "gap_g": report.gap_g,
        "norm_A": report.norm_A,
        "comm_norm": report.comm_norm,
        "cond1_ok": report.cond1_ok,
        "cond2_ok": report.cond2_ok,
        "status": status,
        "condition_report": _report_dict(report),
    }
    if res.symmetry_residuals:
        rec["symmetry_residuals"] = res.symmetry_residuals
    if res.details:
        rec["details"] = res.details
    if cfg.get("timing"):
        rec["wall_time_s"] = time.perf_counter() - t0
    return rec, code


def _sweep_point(cfg: dict) -> tuple[dict, int]:
    try:
        return run_invariant(cfg)
    except NotInvertibleError as exc:
        return {"status": f"error: {exc}"}, EXIT_NOT_INVERTIBLE
    except OddSignatureError as exc:
        return {"status": f"error: {exc}"}, EXIT_INTERNAL


def _sweep_row(point: dict, rec: dict) -> dict:
    row = dict(point)
    for k in ("kappa", "rho", "dim", "kind", "value", "min_abs_eig", "cond1_ok", "cond2_ok", "status"):
        if k in rec:
            row[k] = rec[k]
    row.setdefault("status", rec.get("status"))
    return row


def run_sweep(cfg: dict, axes, workers: int = 1) -> tuple[list[dict], int]:
    """Grid points in Cartesian-product order; results keep that order."""
    names = [a for a, _ in axes]
    points, cfgs = [], []
    for combo in itertools.product(*(v for _, v in axes)):
        point = dict(zip(names, combo))
        c = dict(cfg)
        c["params"] = dict(cfg.get("params", {}))
        for k, v in point.items():
            if k in ("kappa", "rho"):
                c[k] = v
            else:
                c["params"][k] = v
        points.append(point)
        cfgs.append(c)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_point, cfgs))
    else:
        results = [_sweep_point(c) for c in cfgs]
    rows = [_sweep_row(p, r) for p, (r, _) in zip(points, results)]
    codes = [c for _, c in results]
    code = next((c for c in (EXIT_INTERNAL, EXIT_NOT_INVERTIBLE, EXIT_CONDITIONS) if c in codes), EXIT_OK)
    return rows, code


def run_oracle(cfg: dict) -> tuple[dict, int]:
    spec = load_model(cfg["model"], cfg.get("params", {}), cfg.get("seed"))
    if not spec.operator.translation_invariant:
        raise ConfigError("the oracle needs a translation-invariant model")
    rep = build_clifford(spec.d)
    sym = BlochSymbol.from_operator(spec.operator, rep.nu)
    grid = int(cfg.get("grid_points") or (64 if spec.d == 1 else 32))
    if spec.d == 1:
        w = winding_number_d1(sym, grid)
        return {"model": spec.name, "params": spec.params, "d": 1, "kind": "winding", "value": w}, EXIT_OK
    if spec.d == 3:
        q = odd_chern_d3(sym, grid)
        rec = {
            "model": spec.name,
            "params": spec.params,
            "d": 3,
            "kind": "odd_chern",
            "value": q.value,
            "raw": q.raw,
            "residual": q.residual,
            "grid": q.grid,
            "refinement": q.refinement,
        }
        return rec, EXIT_OK
    raise ConfigError(f"no oracle for d={spec.d}")


def run_flow(cfg: dict) -> tuple[dict, int]:
    spec = load_model(cfg["model"], cfg.get("params", {}), cfg.get("seed"))
    rep = build_clifford(spec.d)
    kappa, rho, src = resolve_scales(spec, cfg.get("kappa", "auto"), cfg.get("rho", "auto"), rep)
    ball = build_ball(spec.d, rho)
    if 2 * len(ball) * spec.operator.N > DENSE_LIMIT:
        raise ConfigError("flow is limited to dense sizes; reduce rho")
    path = localizer_path(spec.operator, rep, ball, kappa)
    fr = spectral_flow(path, int(cfg.get("steps", 100)), tol=cfg.get("tol"))
    report = condition_report(spec.operator, rep, kappa, rho, strict=False)
    status, code = _status(report, cfg.get("allow_unverified", False))
    rec = {
        "model": spec.name,
        "params": spec.params,
        "kappa": kappa,
        "rho": rho,
        **src,
        "flow": fr.flow,
        "half_signature_difference": fr.half_difference,
        "sig_start": fr.sig_start,
        "sig_end": fr.sig_end,
        "crossings": [{"lam": lam, "change": ch} for lam, ch in fr.crossings],
        "status": status,
        "condition_report": _report_dict(report),
    }
    if spec.name == "shift":
        rec["analytic_crossings"] = shift_crossings(int(spec.params.get("n", 1)), kappa)
    return rec, code


def run_eta(cfg: dict) -> tuple[dict, int]:
    spec = load_model(cfg["model"], cfg.get("params", {}), cfg.get("seed"))
    rep = build_clifford(spec.d)
    kappa, rho, src = resolve_scales(spec, cfg.get("kappa", "auto"), cfg.get("rho", "auto"), rep)
    ball, L = _assemble(spec, rep, kappa, rho)
    if L.dim > DENSE_LIMIT:
        raise ConfigError("eta needs the full spectrum; reduce rho")
    eigs = np.linalg.eigvalsh(L.dense())
    inn = inertia(L, cfg.get("tol"))
    svals = cfg.get("s") or [0.0]
    rec = {
        "model": spec.name,
        "params": spec.params,
        "kappa": kappa,
        "rho": rho,
        **src,
        "dim": L.dim,
        "signature": inn.signature,
        "eta": {("s=" + _fmt_float(float(s))): eta_partial_sum(eigs, float(s)) for s in svals},
    }
    return rec, EXIT_OK


def run_verify(cfg: dict) -> tuple[dict, int]:
    spec = load_model(cfg["model"], cfg.get("params", {}), cfg.get("seed"))
    rep = build_clifford(spec.d)
    kappa, rho, src = resolve_scales(spec, cfg.get("kappa", "auto"), cfg.get("rho", "auto"), rep)
    report = condition_report(spec.operator, rep, kappa, rho, strict=False)
    ball, L = _assemble(spec, rep, kappa, rho)
    m = min_abs_eigenvalue(L)
    bound = report.gap_g / math.sqrt(2)
    rec = {
        "model": spec.name,
        "params": spec.params,
        "kappa": kappa,
        "rho": rho,
        **src,
        "min_abs_eig": m,
        "gap_bound": bound,
        "gap_bound_ok": bool(report.gap_g > 0 and m >= bound - 1e-9),
        "condition_report": _report_dict(report),
    }
    if spec.symmetry is not None:
        R = build_R(spec.symmetry, len(ball), rep=rep, op=spec.operator)
        rec["symmetry_residual"] = verify_symmetry(L, R, spec.symmetry.s_L)
    status, code = _status(report, cfg.get("allow_unverified", False))
    rec["status"] = status
    return rec, code


# ---------------------------------------------------------------- argparse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="built-in model name or path to a JSON model file")
    common.add_argument("--param", action="append", default=[], metavar="NAME=VALUE", help="model parameter")
    common.add_argument("--kappa", default="auto", help="tuning parameter or 'auto'")
    common.add_argument("--rho", default="auto", help="ball radius or 'auto'")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, help="disorder seed for built-in models")
    common.add_argument("--allow-unverified", action="store_true", help="exit 0 when conditions fail")
    common.add_argument("--tol", type=float, help="zero threshold for eigenvalues")
    common.add_argument("--timing", action="store_true", help="include wall time in the output")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="spectral-localizer", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("invariant", parents=[common], help="invariant of one localizer")
    sw = sub.add_parser("sweep", parents=[common], help="invariant over a parameter grid")
    sw.add_argument("--grid", action="append", default=[], metavar="NAME=SPEC", help="start:stop:step or v1,v2,...")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--no-gap", action="store_true", help="skip the smallest-eigenvalue computation")
    orc = sub.add_parser("oracle", parents=[common], help="winding or odd Chern number of the symbol")
    orc.add_argument("--grid-points", type=int)
    fl = sub.add_parser("flow", parents=[common], help="spectral flow along the chiral path")
    fl.add_argument("--steps", type=int, default=100)
    et = sub.add_parser("eta", parents=[common], help="eta partial sums")
    et.add_argument("--s", type=float, action="append", help="exponent (repeatable, default 0)")
    sub.add_parser("verify", parents=[common], help="condition report with gap bound and symmetry residuals")
    return p


def _config(args) -> dict:
    return {
        "model": args.model,
        "params": parse_params(args.param),
        "kappa": args.kappa,
        "rho": args.rho,
        "seed": args.seed,
        "tol": args.tol,
        "allow_unverified": args.allow_unverified,
        "timing": args.timing,
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        cmd = args.command
        if cmd == "sweep":
            axes = parse_grid(args.grid)
            if not axes:
                raise ConfigError("sweep needs at least one --grid axis")
            cfg["gap"] = not args.no_gap
            rows, code = run_sweep(cfg, axes, max(1, args.workers))
            doc = {
                "schema_version": SCHEMA_VERSION,
                "command": cmd,
                "model": args.model,
                "params": cfg["params"],
                "grid": {k: v for k, v in axes},
                "rows": rows,
            }
            emit(doc, rows, args.format, args.out)
            if code:
                log.warning("some grid points are unverified or failed")
        else:
            if cmd == "oracle":
                cfg["grid_points"] = args.grid_points
                rec, code = run_oracle(cfg)
            elif cmd == "flow":
                cfg["steps"] = args.steps
                rec, code = run_flow(cfg)
            elif cmd == "eta":
                cfg["s"] = args.s
                rec, code = run_eta(cfg)
            elif cmd == "verify":
                rec, code = run_verify(cfg)
            else:
                rec, code = run_invariant(cfg)
            emit({"schema_version": SCHEMA_VERSION, "command": cmd, **rec}, [rec], args.format, args.out)
            if code:
                log.warning(rec.get("status", "unverified"))
        return code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotInvertibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_INVERTIBLE
    except (OddSignatureError, SymmetryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except LocalizerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
