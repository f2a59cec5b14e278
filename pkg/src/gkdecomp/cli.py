"""``gkdecomp`` command-line interface.

Exit codes: 0 success, 1 analysis-level failure (infeasible network,
decode mismatch), 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .codec import BundleError, CodingError, DecodeError, decode_bundle, read_bundle, run_scheme, sample, write_bundle
from .components import gk_common_information, gk_labelings
from .dist import DistributionError, entropy, load_distribution
from .labeling import LabelingPair, load_labeling
from .network import NetworkError, check_feasibility, load_network
from .objectives import decomposition_report, rate_region_binary, rate_region_general
from .search import (
    Objective,
    SearchLimitError,
    brute_force,
    recursive_spectral,
    spectral_threshold_search,
    tradeoff_csv,
    tradeoff_sweep,
)
from .spectral import spectral_summary, verify_laplacian_identity

OUT_ENV = "GKDECOMP_OUT"
SCHEMES = ("gk", "binary-helper", "general-helper", "limited-helper")


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def _f(v) -> str:
    return f"{v:.6f}"


def _round(obj):
    """Recursively round floats to 6 decimals for stable JSON artifacts."""
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _atomic_write(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUT_ENV) or ".")


def _run_info(args, **extra) -> dict:
    """Provenance record: command, input file names and every parameter."""
    info = {"command": args.command}
    for key, val in sorted(vars(args).items()):
        if key in ("command", "func", "out_dir"):
            continue
        info[key] = Path(val).name if key.endswith("_file") and val not in (None, "gk") else val
    info.update(extra)
    return info


def _header(run: dict) -> str:
    return "# " + json.dumps(run, sort_keys=True) + "\n"


def _parse_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (inclusive, linear)."""
    try:
        if ":" in text:
            a, b, k = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(k))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None


def _load_dist(path):
    try:
        return load_distribution(Path(path))
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None


def _load_labeling(arg, J) -> LabelingPair:
    if arg == "gk":
        return gk_labelings(J)
    try:
        L = load_labeling(arg)
    except FileNotFoundError:
        raise InputError(f"{arg}: no such file") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{arg}: malformed labeling ({exc})") from None
    if L.phi_x.size != J.n_x or L.phi_y.size != J.n_y:
        raise InputError(
            f"labeling sizes ({L.phi_x.size}, {L.phi_y.size}) do not match distribution shape {J.shape}"
        )
    return L


# ----------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    J = _load_dist(args.dist_file)
    hk, dec = gk_common_information(J)
    summ = spectral_summary(J)
    ident = verify_laplacian_identity(J)
    lines = [
        _header(_run_info(args)).rstrip(),
        f"shape: {J.n_x}x{J.n_y}",
        f"H(X): {_f(entropy(J.p_x))}",
        f"H(Y): {_f(entropy(J.p_y))}",
        f"H(K): {_f(hk)}",
        f"components: {dec.count}",
        "singular_values: " + " ".join(_f(s) for s in summ.singular_values),
        f"maximal_correlation: {_f(summ.maximal_correlation)}",
        f"multiplicity_of_one: {summ.multiplicity_of_one}",
        f"laplacian_nu: {_f(ident['nu'])}",
        f"laplacian_residual: {_f(ident['residual'])}",
        f"laplacian_identity: {'pass' if ident['pass'] else 'fail'}",
    ]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.save:
        _atomic_write(_out_dir(args) / f"{Path(args.dist_file).stem}.analysis.txt", text)
    return 0


def cmd_decompose(args) -> int:
    J = _load_dist(args.dist_file)
    if args.epsilon is not None:
        obj = Objective("constrained", epsilon=args.epsilon)
    else:
        obj = Objective("lagrangian", lam=1.0 if args.lam is None else args.lam)
    warnings: tuple[str, ...] = ()
    if args.k > 2:
        if args.method != "spectral" or obj.kind != "lagrangian":
            raise InputError("--k > 2 requires --method spectral with a lambda objective")
        L = recursive_spectral(J, args.k, obj.lam)
        value = obj.evaluate(J, L)
    else:
        res = brute_force(J, obj) if args.method == "brute" else spectral_threshold_search(J, obj)
        L, value, warnings = res.labeling, res.objective_value, res.warnings
    if value == float("-inf"):
        print("no labeling satisfies the constraint", file=sys.stderr)
        return 1
    run = _run_info(args, objective=obj.label)
    report = decomposition_report(J, L)
    stem = Path(args.dist_file).stem
    out = _out_dir(args)
    lab_doc = {**L.to_dict(), "run": run}
    rep_doc = {"run": run, "objective_value": value, "warnings": list(warnings), "report": report.as_dict()}
    _atomic_write(out / f"{stem}.labeling.json", json.dumps(_round(lab_doc), indent=2, sort_keys=True) + "\n")
    _atomic_write(out / f"{stem}.report.json", json.dumps(_round(rep_doc), indent=2, sort_keys=True) + "\n")
    print(f"objective {obj.label}: {_f(value)}")
    print("phi_x: " + " ".join(map(str, L.phi_x.tolist())))
    print("phi_y: " + " ".join(map(str, L.phi_y.tolist())))
    print(f"P_err: {_f(report.P_err)}  H(phi_X): {_f(report.H_phiX)}  helper_rate: {_f(report.helper_rate_general)}")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_rates(args) -> int:
    J = _load_dist(args.dist_file)
    L = _load_labeling(args.labeling_file, J)
    run = _run_info(args)
    if L.is_binary:
        grid = _parse_grid(args.alpha_grid) if args.alpha_grid else None
        if grid is not None and any(not 0.0 <= a <= 1.0 for a in grid):
            raise InputError("alpha values must lie in [0, 1]")
        region = rate_region_binary(J, L, grid)
        body = region.to_csv()
    else:
        region = rate_region_general(J, L)
        rows = [(0.0, *region.corner_points[0]), (1.0, *region.corner_points[1])]
        body = "alpha,R_X,R_Y,R_H\n" + "".join(",".join(_f(v) for v in r) + "\n" for r in rows)
    path = _out_dir(args) / f"{Path(args.dist_file).stem}.rates.csv"
    _atomic_write(path, _header(run) + body)
    slope = region.face_slope()
    print(f"wrote {path.name}")
    print("dominant_face_slope: " + ("vertical" if slope is None else _f(slope)))
    return 0


def cmd_tradeoff(args) -> int:
    J = _load_dist(args.dist_file)
    grid = _parse_grid(args.grid)
    if not grid or any(g < 0 for g in grid):
        raise InputError("grid must be a nonempty list of nonnegative values")
    methods = ("brute", "spectral") if args.method == "both" else (args.method,)
    points = []
    for m in methods:
        points += tradeoff_sweep(J, grid, param=args.param, method=m)
    path = _out_dir(args) / f"{Path(args.dist_file).stem}.tradeoff.csv"
    _atomic_write(path, _header(_run_info(args)) + tradeoff_csv(points, args.param))
    print(f"wrote {path.name} ({len(points)} points)")
    return 0


def cmd_simulate(args) -> int:
    J = _load_dist(args.dist_file)
    if args.scheme == "gk":
        L = gk_labelings(J)
    elif args.labeling_file is None:
        raise InputError(f"scheme {args.scheme} needs a labeling file (or 'gk')")
    else:
        L = _load_labeling(args.labeling_file, J)
    if args.scheme == "binary-helper" and not L.is_binary:
        raise InputError("binary-helper requires a binary labeling")
    if args.n <= 0:
        raise InputError("block length must be positive")
    block = sample(J, args.n, args.seed)
    try:
        result = run_scheme(args.scheme, J, L, block, args.corner)
    except (DecodeError, CodingError) as exc:
        print(f"decode failure: {exc}", file=sys.stderr)
        return 1
    stem = Path(args.dist_file).stem
    out = _out_dir(args)
    bpath = out / f"{stem}.{args.scheme}.gksb"
    out.mkdir(parents=True, exist_ok=True)
    write_bundle(result.bundle, bpath)
    x, y = decode_bundle(read_bundle(bpath), J, L)
    if not (np.array_equal(x, block.x) and np.array_equal(y, block.y)):
        print("decode mismatch after reading the bundle back", file=sys.stderr)
        return 1
    lines = ["stream,bits,rate,target,within_tolerance"]
    for r in result.rates:
        lines.append(f"{r.name},{r.bits},{_f(r.rate)},{_f(r.target)},{str(r.within()).lower()}")
    lines.append(f"terminal-sum,,{_f(result.terminal_sum_rate)},{_f(result.terminal_sum_target)},")
    body = "\n".join(lines) + "\n"
    _atomic_write(out / f"{stem}.{args.scheme}.rates.csv", _header(_run_info(args)) + body)
    sys.stdout.write(body)
    print(f"decoded {args.n} symbols bit-exactly from {bpath.name}")
    if result.errors is not None and result.omniscient_errors is not None:
        same = np.array_equal(result.errors, result.omniscient_errors)
        print(f"limited-helper error sequence matches omniscient: {'yes' if same else 'no'}")
        if not same:
            return 1
    return 0


def cmd_network(args) -> int:
    J = _load_dist(args.dist_file)
    L = _load_labeling(args.labeling_file, J)
    try:
        net = load_network(args.net_file)
    except FileNotFoundError:
        raise InputError(f"{args.net_file}: no such file") from None
    terminals = [args.terminal] if args.terminal else list(net.terminals)
    if not terminals:
        raise NetworkError("missing role: t")
    reports = [check_feasibility(net, J, L, t, limited=args.limited) for t in terminals]
    for r in reports:
        print(r.table())
    doc = {"run": _run_info(args), "terminals": {r.terminal: {"pass": r.passed, "rows": r.as_rows()} for r in reports}}
    _atomic_write(
        _out_dir(args) / f"{Path(args.net_file).stem}.feasibility.json",
        json.dumps(_round(doc), indent=2, sort_keys=True) + "\n",
    )
    return 0 if all(r.passed for r in reports) else 1


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gkdecomp", description="Gacs-Korner decompositions and helper-assisted coding.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_ENV} or the working directory)")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="entropies, components and spectrum")
    a.add_argument("dist_file")
    a.add_argument("--save", action="store_true", help="also write the report to the output directory")
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("decompose", help="search for a labeling pair")
    d.add_argument("dist_file")
    d.add_argument("--method", choices=("spectral", "brute"), default="spectral")
    g = d.add_mutually_exclusive_group()
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--epsilon", type=float)
    d.add_argument("--k", type=int, default=2, help="number of labels (recursive spectral when > 2)")
    d.set_defaults(func=cmd_decompose)

    r = sub.add_parser("rates", help="rate region CSV")
    r.add_argument("dist_file")
    r.add_argument("labeling_file", help="labeling JSON, or 'gk'")
    r.add_argument("--alpha-grid", help="'a,b,c' or 'start:stop:count'")
    r.set_defaults(func=cmd_rates)

    t = sub.add_parser("tradeoff", help="entropy vs helper-rate frontier CSV")
    t.add_argument("dist_file")
    t.add_argument("--grid", default="0,0.05,0.1,0.2,0.5,1")
    t.add_argument("--param", choices=("epsilon", "lambda"), default="epsilon")
    t.add_argument("--method", choices=("brute", "spectral", "both"), default="brute")
    t.set_defaults(func=cmd_tradeoff)

    s = sub.add_parser("simulate", help="encode, write, read back and decode a sample block")
    s.add_argument("dist_file")
    s.add_argument("labeling_file", nargs="?", help="labeling JSON, or 'gk'")
    s.add_argument("--scheme", choices=SCHEMES, default="gk")
    s.add_argument("--n", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--corner", choices=("x", "y"), default="x")
    s.set_defaults(func=cmd_simulate)

    n = sub.add_parser("network", help="min-cut feasibility table")
    n.add_argument("net_file")
    n.add_argument("dist_file")
    n.add_argument("labeling_file", help="labeling JSON, or 'gk'")
    n.add_argument("--limited", action="store_true", help="use the cut-set requirements toward the helper")
    n.add_argument("--terminal", help="check only this terminal")
    n.set_defaults(func=cmd_network)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DistributionError, NetworkError, SearchLimitError, BundleError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
