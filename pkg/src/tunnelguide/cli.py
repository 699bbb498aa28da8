"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration, 2 no eigenvalue or grid
too coarse, 3 identity check failed, 4 no convergence, 5 multiple roots,
6 convergence study failed, 7 any other solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .asymptotics import convergence_study, junction_constants, solve_resonance
from .bound_states import WindowGeometry, bound_states, find_eigenvalues
from .errors import (
    FitUnstable,
    GridTooCoarse,
    MultipleRoots,
    NoConvergence,
    NoEigenvalue,
    SolverError,
    StudyFailed,
)
from .fd_oracle import MAX_H, FdGrid, richardson_spectrum
from .junction import IdentityReport, extract_beta, solve_junction, verify_identities

EXIT_OK, EXIT_CONFIG, EXIT_SPECTRUM, EXIT_IDENTITY = 0, 1, 2, 3
EXIT_CONVERGENCE, EXIT_MULTIPLE, EXIT_STUDY, EXIT_SOLVER = 4, 5, 6, 7

IDENTITY_TOLERANCES = {
    "balance": 0.05,
    "reflection_real": 0.05,
    "reflection_imag": 0.05,
    "flux": 1e-6,
    "transmission": 0.05,
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------- output


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return format(value, ".17g") if math.isfinite(value) else "null"
    if value is None:
        return "null"
    return json.dumps(str(value))


def to_json(obj, indent=0) -> str:
    """Deterministic JSON: insertion-ordered keys, 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + to_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _fmt(obj)


def to_csv(rows) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        cells = []
        for key in header:
            value = row.get(key)
            if isinstance(value, str):
                cells.append(value)
            else:
                text = _fmt(value)
                cells.append("" if text == "null" else text)
        writer.writerow(cells)
    return buf.getvalue()


def _split(prefix, z):
    if z is None:
        return {f"{prefix}_re": None, f"{prefix}_im": None}
    z = complex(z)
    return {f"{prefix}_re": z.real, f"{prefix}_im": z.imag}


def _emit(args, payload, rows):
    text = to_csv(rows) if args.format == "csv" else to_json(payload) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- validation


def _need_a(args):
    if args.a is None:
        raise ConfigError("missing window half-width --a")
    if not (math.isfinite(args.a) and args.a > 0):
        raise ConfigError(f"window half-width must satisfy a > 0, got {args.a}")


def _check_common(args, min_modes=8):
    if args.nmodes < min_modes:
        raise ConfigError(f"--nmodes must be at least {min_modes}, got {args.nmodes}")
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be at least 1, got {args.jobs}")
    if args.tol is not None and not 0 < args.tol < 1e-4:
        raise ConfigError(f"--tol must lie in (0, 1e-4), got {args.tol}")


def _check_barriers(args):
    for name in ("lplus", "lminus"):
        value = getattr(args, name)
        if value is None:
            raise ConfigError(f"missing barrier end --{name}")
        if not (math.isfinite(value) and value > args.a):
            raise ConfigError(f"barrier end must satisfy a < {name}, got {name}={value} with a={args.a}")


# ---------------------------------------------------------------- commands


def cmd_eigen(args):
    _need_a(args)
    _check_common(args)
    tol = args.tol or 1e-10
    states = bound_states(WindowGeometry(args.a), args.nmodes, tol, args.projection)
    rows = [{"j": s.j, "lambda": s.lambda_j, "parity": s.parity.value, "psi": s.psi_decay,
             "N": args.nmodes, "tol": tol} for s in states]
    _emit(args, rows, rows)
    return EXIT_OK


def _junction_row(state, n_modes, projection):
    sol = solve_junction(state.lambda_j, n_modes, projection=projection)
    try:
        beta = extract_beta(sol)
    except FitUnstable:
        beta = None
    return state, sol, beta


def _states_with_junctions(args):
    states = bound_states(WindowGeometry(args.a), args.nmodes, args.tol or 1e-10, args.projection)
    tasks = [(s, args.nmodes, args.projection) for s in states]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            return list(pool.map(_junction_row_star, tasks))
    return [_junction_row(*t) for t in tasks]


def _junction_row_star(task):
    return _junction_row(*task)


def cmd_junction(args):
    _need_a(args)
    _check_common(args, 16)
    rows = []
    for state, sol, beta in _states_with_junctions(args):
        rows.append({"j": state.j, "lambda": state.lambda_j,
                     **_split("k_minus", sol.k_minus), **_split("k_plus", sol.k_plus),
                     **_split("beta", beta), "N": args.nmodes})
    _emit(args, rows, rows)
    return EXIT_OK


def cmd_verify(args):
    _need_a(args)
    _check_common(args, 16)
    tolerances = {name: getattr(args, f"tol_{name}") for name in IDENTITY_TOLERANCES}
    for name, value in tolerances.items():
        if not value > 0:
            raise ConfigError(f"--tol-{name.replace('_', '-')} must be positive, got {value}")
    states, rows, ok = [], [], True
    for state, sol, beta in _states_with_junctions(args):
        entry = {"j": state.j, "lambda": state.lambda_j, **_split("k_minus", sol.k_minus),
                 **_split("k_plus", sol.k_plus), **_split("beta", beta)}
        if beta is None:
            errors = {name: None for name in IdentityReport.__dataclass_fields__}
            passed = False
        else:
            errors = verify_identities(sol, beta).as_dict()
            passed = all(errors[name] < tol for name, tol in tolerances.items())
        signs = sol.k_minus.imag > 0 and sol.k_minus.real >= -1e-10
        passed = passed and signs
        ok = ok and passed
        states.append({**entry, "errors": errors, "signs_ok": signs, "passed": passed})
        rows.append({**entry, **errors, "signs_ok": signs, "passed": passed})
    _emit(args, {"N": args.nmodes, "tolerances": tolerances, "states": states, "passed": ok}, rows)
    return EXIT_OK if ok else EXIT_IDENTITY


def _resonance_row(consts, l_plus, l_minus, n_modes, tol):
    res = solve_resonance(consts, l_plus, l_minus, n_modes, tol)
    return {"j": res.j, "l_plus": l_plus, "l_minus": l_minus,
            **_split("Lambda", res.Lambda), "residual": res.residual,
            **_split("C_plus", res.C_plus), **_split("C_minus", res.C_minus),
            **_split("seed", res.seed), "iterations": res.iterations, "N": n_modes}


def cmd_resonance(args):
    _need_a(args)
    _check_common(args, 16)
    _check_barriers(args)
    consts = junction_constants(args.a, args.j, args.nmodes, projection=args.projection)
    row = _resonance_row(consts, args.lplus, args.lminus, args.nmodes, args.tol or 1e-12)
    _emit(args, [row], [row])
    return EXIT_OK


def cmd_sweep(args):
    _need_a(args)
    _check_common(args, 16)
    if not (args.l_step > 0 and args.l_to >= args.l_from > args.a):
        raise ConfigError("sweep grid must satisfy a < l_from <= l_to and l_step > 0")
    grid = list(np.arange(args.l_from, args.l_to + 0.5 * args.l_step, args.l_step))
    try:
        study = convergence_study(args.a, grid, args.j, args.nmodes, args.tol_ratio,
                                  args.asymmetry, args.jobs, args.tol or 1e-12)
        rows, code = study.rows, EXIT_OK
    except StudyFailed as exc:
        rows, code = exc.table or [], EXIT_STUDY
        sys.stderr.write(f"convergence study failed: {exc}\n")
    flat = []
    for r in rows:
        flat.append({"L": r["L"], "l_plus": r["l_plus"], "l_minus": r["l_minus"],
                     **_split("Lambda", r["Lambda"]), **_split("Lambda_hat", r["Lambda_hat"]),
                     **_split("ratio", r["ratio"]), "ratio_error": r["ratio_error"],
                     "shift": r["shift"], "remainder_scale": r["remainder_scale"],
                     "remainder_scale_display": r["remainder_scale_display"]})
    _emit(args, flat, flat)
    return code


def cmd_oracle(args):
    if args.h > MAX_H:
        raise GridTooCoarse(f"mesh size {args.h} exceeds {MAX_H}")
    _need_a(args)
    _check_common(args)
    length = args.L if args.L is not None else args.a + 11.0
    if length < args.a + 8:
        raise ConfigError(f"wall must satisfy L >= a + 8, got L={length}")
    if not args.h > 0:
        raise ConfigError(f"mesh size must be positive, got {args.h}")
    grid = FdGrid(args.h, length)
    fd = richardson_spectrum(args.a, grid.h, grid.L)
    try:
        mm = find_eigenvalues(WindowGeometry(args.a), args.nmodes, args.tol or 1e-10,
                              projection=args.projection)
    except NoEigenvalue:
        mm = []
    rows = []
    for k in range(max(len(fd), len(mm))):
        lam_mm = mm[k].lam if k < len(mm) else None
        lam_fd = fd[k].lam if k < len(fd) else None
        parity = (mm[k].parity if k < len(mm) else fd[k].parity).value
        diff = None if lam_mm is None or lam_fd is None else lam_mm - lam_fd
        rows.append({"j": k + 1, "parity": parity, "lambda_mm": lam_mm, "lambda_fd": lam_fd, "diff": diff})
    _emit(args, rows, rows)
    return EXIT_OK


# ---------------------------------------------------------------- parsing


def _common_parser(n_modes):
    p = _Parser(add_help=False)
    p.add_argument("--a", type=float, help="window half-width")
    p.add_argument("--nmodes", type=int, default=n_modes, help="modes per family and slab")
    p.add_argument("--tol", type=float, help="root tolerance (command specific default)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--config", help="key = value file merged under the flags")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--projection", choices=("mixed", "dirichlet"), default="mixed",
                   help="test families for the interface conditions")
    return p


def build_parser():
    parser = _Parser(prog="tunnelguide", description="Waveguide bound states and tunneling resonances.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    parser.commands = sub.choices

    p = sub.add_parser("eigen", parents=[_common_parser(40)], help="bound states of the window problem")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("junction", parents=[_common_parser(64)], help="junction constants per bound state")
    p.set_defaults(func=cmd_junction)

    p = sub.add_parser("verify", parents=[_common_parser(64)], help="check the junction identities")
    for name, default in IDENTITY_TOLERANCES.items():
        p.add_argument(f"--tol-{name.replace('_', '-')}", dest=f"tol_{name}", type=float, default=default)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("resonance", parents=[_common_parser(32)], help="one resonance for given barriers")
    p.add_argument("--lplus", type=float)
    p.add_argument("--lminus", type=float)
    p.add_argument("--j", type=int, default=1)
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("sweep", parents=[_common_parser(32)], help="resonance convergence over barrier length")
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--l-from", dest="l_from", type=float, default=6.0)
    p.add_argument("--l-to", dest="l_to", type=float, default=12.0)
    p.add_argument("--l-step", dest="l_step", type=float, default=2.0)
    p.add_argument("--asymmetry", type=float, default=0.0, help="l_minus - l_plus")
    p.add_argument("--tol-ratio", dest="tol_ratio", type=float, default=0.1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", parents=[_common_parser(40)], help="finite-difference cross-check")
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--L", type=float, default=None, help="wall position (default a + 11)")
    p.set_defaults(func=cmd_oracle)
    return parser


def read_config(path) -> dict:
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = read_config(args.config)
        sub = parser.commands[args.command]
        known = {action.dest for action in sub._actions}
        for key in config:
            if key not in known or key in ("help", "config"):
                raise ConfigError(f"unknown config key '{key}'")
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"invalid configuration: {exc}\n")
        return EXIT_CONFIG
    except (NoEigenvalue, GridTooCoarse) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_SPECTRUM
    except NoConvergence as exc:
        sys.stderr.write(f"NoConvergence: {exc}\n")
        return EXIT_CONVERGENCE
    except MultipleRoots as exc:
        sys.stderr.write(f"MultipleRoots: {exc} (count={exc.count}, radius={exc.radius})\n")
        return EXIT_MULTIPLE
    except SolverError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER
    except ValueError as exc:
        sys.stderr.write(f"invalid configuration: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
