"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical or convergence error.
All randomness is controlled by --seed; the same argv always produces
byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import gram_svd
from .errors import ParsvdError, ValidationError
from .gram_svd import DcConfig, HermitianMatrix, svd_4step, tridiagonalize
from .latency_model import (
    analytic_latency,
    critical_path,
    load_profile,
    total_ops,
    trace_run,
)
from .latency_model.analytic import latency_breakdown
from .matrix_core import as_matrix, fro_norm
from .mimo_harness import (
    ChannelConfig,
    SweepResult,
    capacity_vs_iterations,
    rate_vs_iterations,
    sweep_latency_vs_size,
)

_ALG_ALIASES = {
    "dc": "4step-dc",
    "4step": "4step-dc",
    "4step-dc": "4step-dc",
    "qr": "4step-qr",
    "4step-qr": "4step-qr",
    "gk": "gk",
    "tridiag": "tridiag",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_size(text: str) -> tuple[int, int]:
    try:
        m, _, k = text.lower().partition("x")
        dims = (int(m), int(k))
    except ValueError as exc:
        raise UsageError(f"invalid size {text!r}: expected MxK, e.g. 8x4") from exc
    if dims[0] < 1 or dims[1] < 1:
        raise UsageError(f"invalid size {text!r}: dimensions must be >= 1")
    return dims


def _resolve_alg(name: str) -> str:
    if name not in _ALG_ALIASES:
        raise UsageError(
            f"unknown algorithm {name!r}: expected one of {', '.join(sorted(_ALG_ALIASES))}"
        )
    return _ALG_ALIASES[name]


def read_matrix_text(path: str) -> np.ndarray:
    """Matrix text format: a `rows cols` header, then re/im pairs row-major."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            tokens = fh.read().split()
    except OSError as exc:
        raise UsageError(f"cannot read matrix file {path!r}: {exc}") from exc
    if len(tokens) < 2:
        raise UsageError(f"{path}: missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise UsageError(f"{path}: malformed header {tokens[:2]!r}") from exc
    need = 2 * rows * cols
    body = tokens[2:]
    if len(body) != need:
        raise UsageError(
            f"{path}: expected {need} numbers for a {rows}x{cols} complex matrix, got {len(body)}"
        )
    try:
        vals = [float(tok) for tok in body]
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric entry: {exc}") from exc
    data = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return data.reshape(rows, cols)


def write_matrix_text(a: np.ndarray, path: str):
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        for z in row:
            lines.append(f"{float(z.real)!r} {float(z.imag)!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _random_matrix(size: tuple[int, int], seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m, k = size
    return (rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))) / np.sqrt(2.0)


def _random_hermitian(k: int, seed: int) -> np.ndarray:
    a = _random_matrix((k + 2, k), seed)
    return gram_svd.gram(a).mat


def _load_input(args, square_hermitian: bool) -> np.ndarray:
    if args.input is not None and args.random is not None:
        raise UsageError("--input and --random are mutually exclusive")
    if args.input is not None:
        mat = read_matrix_text(args.input)
        if square_hermitian:
            try:
                return HermitianMatrix.from_matrix(mat).mat
            except ParsvdError as exc:
                raise UsageError(f"--input {args.input}: {exc}") from exc
        return mat
    if args.random is None:
        raise UsageError("one of --input or --random is required")
    size = _parse_size(args.random)
    if square_hermitian:
        if size[0] != size[1]:
            raise UsageError("--random must be square (KxK) for this command")
        return _random_hermitian(size[1], args.seed)
    return _random_matrix(size, args.seed)


# ---------------------------------------------------------------------------
# output rendering


def _emit_json(payload: dict):
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _emit_table(rows: list[tuple[str, str]]):
    width = max((len(k) for k, _ in rows), default=0)
    for key, val in rows:
        sys.stdout.write(f"{key.ljust(width)}  {val}\n")


def _emit_kv(payload: dict, fmt: str):
    if fmt == "json":
        _emit_json(payload)
        return
    rows = []

    def flatten(prefix, obj):
        if isinstance(obj, dict):
            for key in obj:
                flatten(f"{prefix}.{key}" if prefix else str(key), obj[key])
        elif isinstance(obj, (list, tuple)):
            rows.append((prefix, " ".join(_fmt_num(v) for v in obj)))
        else:
            rows.append((prefix, _fmt_num(obj)))

    for key in payload:
        flatten(str(key), payload[key])
    if fmt == "csv":
        sys.stdout.write("key,value\n")
        for key, val in rows:
            sys.stdout.write(f"{key},{val}\n")
    else:
        _emit_table(rows)


def _fmt_num(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_plot_data(sweep: SweepResult, path: str):
    """Write a sweep as CSV: an x column, one column per series, and a
    reference column when present. Overwrites the target file."""
    if not sweep.x:
        raise ValidationError("sweep is empty")
    names = list(sweep.series)
    header = ["x"] + names + (["reference"] if sweep.reference is not None else [])
    lines = [",".join(header)]
    for i, xv in enumerate(sweep.x):
        row = [str(xv)] + [_fmt_num(sweep.series[n][i]) for n in names]
        if sweep.reference is not None:
            row.append(_fmt_num(sweep.reference))
        lines.append(",".join(row))
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ParsvdError(f"cannot write {path!r}: {exc}") from exc


def _sweep_payload(sweep: SweepResult) -> dict:
    payload = {"x": list(sweep.x)}
    for name in sweep.series:
        payload[name] = list(sweep.series[name])
    if sweep.reference is not None:
        payload["reference"] = sweep.reference
    return payload


# ---------------------------------------------------------------------------
# subcommands


def _cmd_svd(args):
    a = _load_input(args, square_hermitian=False)
    cfg = DcConfig(sv_threshold=args.sv_threshold)
    res = svd_4step(a, cfg, iter_budget=args.budget)
    residual = fro_norm(a - res.reconstruct()) / max(fro_norm(a), 1e-300)
    diag = res.diagnostics
    payload = {
        "shape": list(a.shape),
        "sigma": [float(s) for s in res.sigma],
        "valid_columns": int(np.sum(res.valid)),
        "residual": residual,
        "diagnostics": {
            "newton_iterations_total": diag.newton_iterations_total,
            "newton_iterations_max_per_root": diag.newton_iterations_max_per_root,
            "recursion_depth": diag.recursion_depth,
            "deflation_count": diag.deflation_count,
            "interlacing_violations": diag.interlacing_violations,
        },
    }
    _emit_kv(payload, args.format)
    return 0


def _cmd_eig(args):
    b = _load_input(args, square_hermitian=True)
    t, q_t = tridiagonalize(HermitianMatrix.from_matrix(b))
    eig = gram_svd.dc_eigen(t, DcConfig())
    vecs = q_t @ eig.q
    res = fro_norm(b @ vecs - vecs * eig.lam) / max(fro_norm(b), 1e-300)
    payload = {
        "dim": b.shape[0],
        "eigenvalues": [float(v) for v in eig.lam],
        "residual": res,
        "newton_iterations_total": eig.diagnostics.newton_iterations_total,
    }
    _emit_kv(payload, args.format)
    return 0


def _cmd_latency(args):
    alg = _resolve_alg(args.alg)
    dims = _parse_size(args.size)
    profile = load_profile(args.profile)
    est = analytic_latency(alg, dims, args.iters, profile)
    parts = latency_breakdown(alg, dims, args.iters, profile)
    payload = {
        "algorithm": alg,
        "size": f"{dims[0]}x{dims[1]}",
        "iterations": args.iters,
        "profile": profile.name,
        "ns": est.ns,
        "normalized_adders": est.normalized_adders,
        "critical_path_ops": est.critical_path.as_dict(),
        "breakdown_ns": {k: v for k, v in parts.items()},
    }
    _emit_kv(payload, args.format)
    return 0


def _cmd_ops(args):
    alg = "tridiag" if args.stage == "tridiag" else _resolve_alg(args.alg)
    dims = _parse_size(args.size)
    ops = total_ops(alg, dims, args.iters)
    payload = {
        "algorithm": alg,
        "size": f"{dims[0]}x{dims[1]}",
        "iterations": args.iters,
        "ops": ops.as_dict(),
        "total": ops.total(),
    }
    if args.profile is not None:
        profile = load_profile(args.profile)
        payload["lut_weighted"] = ops.lut_weighted(profile)
        payload["profile"] = profile.name
    _emit_kv(payload, args.format)
    return 0


def _cmd_trace_export(args):
    alg = _resolve_alg(args.alg)
    dims = _parse_size(args.size)
    if alg == "gk":
        mat = _random_matrix(dims, args.seed)
    else:
        if dims[0] != dims[1]:
            raise UsageError("tridiag/4step traces need a square Hermitian input size KxK")
        mat = _random_hermitian(dims[1], args.seed)
    dfg = trace_run(alg, mat, iters=args.iters)
    text = dfg.export_edges()
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    profile = load_profile(args.profile)
    est = critical_path(dfg, profile)
    payload = {
        "algorithm": alg,
        "size": f"{dims[0]}x{dims[1]}",
        "nodes": len(dfg),
        "census": dfg.census().as_dict(),
        "critical_path_ns": est.ns,
        "out": args.out,
    }
    _emit_kv(payload, args.format)
    return 0


def _cmd_sweep(args):
    algs = [_resolve_alg(a) for a in args.algs.split(",") if a]
    profile = load_profile(args.profile)
    ks = [int(v) for v in args.sizes.split(",") if v]
    factor = 8 if args.geometry == "tall8" else 1
    sizes = [(factor * k, k) for k in ks]
    sweep = sweep_latency_vs_size(
        algs,
        sizes,
        args.mse_target,
        profile,
        trials=args.trials,
        seed=args.seed,
        sweep_cap=args.sweep_cap,
    )
    if args.out:
        emit_plot_data(sweep, args.out)
    payload = _sweep_payload(sweep)
    payload["iterations"] = sweep.meta["iterations"]
    _emit_kv(payload, args.format)
    return 0


def _read_channel_config(path: str) -> dict:
    """Flat key-value channel description: m, k, panels, snr_db, seed, trials."""
    known = {"m": int, "k": int, "panels": int, "t": int, "snr_db": float, "seed": int, "trials": int}
    out: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, val = line.partition("=")
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise UsageError(f"{path}:{lineno}: expected 'key value'")
            key, val = parts
        key = key.strip()
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = known[key](val.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from exc
    return out


def _channel_config_from_args(args, with_panels: bool, defaults: dict) -> ChannelConfig:
    # explicit flags win, then config-file entries, then the defaults
    fields = _read_channel_config(args.config) if args.config else {}

    def pick(name):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        return fields.get(name, defaults[name])

    if with_panels and getattr(args, "t", None) is None and "t" in fields:
        args.t = fields["t"]
    return ChannelConfig(
        m=pick("m"),
        k=pick("k"),
        panels=pick("panels") if with_panels else 1,
        snr_per_link=10.0 ** (pick("snr_db") / 10.0),
        seed=args.seed,
        trials=pick("trials"),
    )


_DMIMO_DEFAULTS = {"m": 32, "k": 32, "panels": 8, "t": 16, "snr_db": 0.0, "trials": 100}
_MMIMO_DEFAULTS = {"m": 128, "k": 16, "panels": 1, "snr_db": 0.0, "trials": 100}


def _cmd_mimo_dmimo(args):
    cfg = _channel_config_from_args(args, with_panels=True, defaults=_DMIMO_DEFAULTS)
    t = args.t if args.t is not None else _DMIMO_DEFAULTS["t"]
    budgets = [int(v) for v in args.budgets.split(",") if v]
    algs = [_resolve_alg(a) for a in args.algs.split(",") if a]
    sweep = capacity_vs_iterations(cfg, t, budgets, algorithms=algs)
    if args.out:
        emit_plot_data(sweep, args.out)
    _emit_kv(_sweep_payload(sweep), args.format)
    return 0


def _cmd_mimo_mmimo(args):
    cfg = _channel_config_from_args(args, with_panels=False, defaults=_MMIMO_DEFAULTS)
    budgets = [int(v) for v in args.budgets.split(",") if v]
    algs = [_resolve_alg(a) for a in args.algs.split(",") if a]
    sweep = rate_vs_iterations(cfg, budgets, algorithms=algs)
    if args.out:
        emit_plot_data(sweep, args.out)
    _emit_kv(_sweep_payload(sweep), args.format)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    p = _Parser(prog="parsvd", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, matrix_input=False):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("table", "csv", "json"), default="table")
        if matrix_input:
            sp.add_argument("--input", help="matrix text file (rows cols header, re im pairs)")
            sp.add_argument("--random", metavar="MxK", help="generate a random complex matrix")

    sp = sub.add_parser("svd", help="four-step SVD of a complex matrix")
    common(sp, matrix_input=True)
    sp.add_argument("--budget", type=int, default=None, help="secular iteration cap per root")
    sp.add_argument("--sv-threshold", type=float, default=1e-10)
    sp.set_defaults(func=_cmd_svd)

    sp = sub.add_parser("eig", help="eigendecomposition of a Hermitian matrix")
    common(sp, matrix_input=True)
    sp.set_defaults(func=_cmd_eig)

    sp = sub.add_parser("latency", help="critical-path latency model")
    common(sp)
    sp.add_argument("--alg", required=True)
    sp.add_argument("--size", required=True, metavar="MxK")
    sp.add_argument("--iters", type=int, default=4)
    sp.add_argument("--profile", default="zynq-fp32")
    sp.set_defaults(func=_cmd_latency)

    sp = sub.add_parser("ops", help="expanded real-operation counts")
    common(sp)
    sp.add_argument("--alg", required=True)
    sp.add_argument("--size", required=True, metavar="MxK")
    sp.add_argument("--iters", type=int, default=4)
    sp.add_argument("--stage", choices=("all", "tridiag"), default="all")
    sp.add_argument("--profile", default=None, help="adds a LUT-weighted total")
    sp.set_defaults(func=_cmd_ops)

    sp = sub.add_parser("trace-export", help="emit a dataflow graph edge list")
    common(sp)
    sp.add_argument("--alg", required=True)
    sp.add_argument("--size", required=True, metavar="MxK")
    sp.add_argument("--iters", type=int, default=4)
    sp.add_argument("--profile", default="zynq-fp32")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_trace_export)

    sp = sub.add_parser("sweep", help="latency/ops versus size at an MSE target")
    common(sp)
    sp.add_argument("--algs", default="dc,qr,gk")
    sp.add_argument("--sizes", default="8,16,32,64", help="comma-separated K values")
    sp.add_argument("--geometry", choices=("square", "tall8"), default="square")
    sp.add_argument("--mse-target", type=float, default=1e-4)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--sweep-cap", type=int, default=800)
    sp.add_argument("--profile", default="zynq-fp32")
    sp.add_argument("--out", default=None, help="CSV output path")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("mimo-dmimo", help="multi-panel dimension-reduction capacity")
    common(sp)
    sp.add_argument("--config", default=None, help="flat key-value channel config file")
    sp.add_argument("--panels", type=int, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--t", type=int, default=None)
    sp.add_argument("--snr-db", type=float, default=None, dest="snr_db")
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--budgets", default="1,2,4,8")
    sp.add_argument("--algs", default="dc,qr,gk")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_mimo_dmimo)

    sp = sub.add_parser("mimo-mmimo", help="single-cell achievable rate")
    common(sp)
    sp.add_argument("--config", default=None, help="flat key-value channel config file")
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--snr-db", type=float, default=None, dest="snr_db")
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--budgets", default="1,2,4,8")
    sp.add_argument("--algs", default="dc,qr,gk")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_mimo_mmimo)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except ParsvdError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
