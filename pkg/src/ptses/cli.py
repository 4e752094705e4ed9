"""Command-line front end.

Every command prints ``{"command", "params", "results", "diagnostics"}`` as
JSON (floats with 17 significant digits) or a CSV table.  Exit status is 0 on
success, 2 on invalid input and 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import charges as ch
from .contour import QuadratureSpec
from .core import EVEN, PARITIES, ModelParams, energy
from .errors import DomainError, NumericalError
from .oracle import GridSpec, fd_spectrum, richardson_refine
from .states import eval_wavefunction, make_state
from .variational import build_basis, solve_nonqes

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3
TABLE2_N = (3, 30, 300, 3000, 30000)
TABLE2_L, TABLE2_B = 4, 5.0


# --------------------------------------------------------------------------
# serialization


def _num(x: float) -> str:
    return format(float(x), ".17g") if math.isfinite(x) else "null"


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits; complex
    numbers become ``{"re": ..., "im": ...}``."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(obj if not isinstance(obj, np.bool_) else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": float(obj.real), "im": float(obj.imag)})
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return _num(float(x))
    return str(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cplx(z):
    z = complex(z)
    return z.real if z.imag == 0 else z


# --------------------------------------------------------------------------
# argument parsing


def parse_range(text: str) -> list[int]:
    """``"3"``, ``"0..4"`` (inclusive) or ``"3,30,300"``."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise DomainError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise DomainError(f"bad integer range {text!r}") from exc


def parse_interval(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in str(text).split("..", 1))
    except ValueError as exc:
        raise DomainError(f"bad interval {text!r}, expected LO..HI") from exc
    if not hi > lo:
        raise DomainError(f"empty interval {text!r}")
    return lo, hi


def _model(p: argparse.ArgumentParser, eps=True, L_required=True):
    p.add_argument("--L", type=int, help="partial-wave label L >= 1")
    p.add_argument("--b", type=float, default=0.0, help="shift b")
    if eps:
        p.add_argument("--eps", type=float, default=0.1, help="contour offset eps > 0")


def _quad(p):
    p.add_argument("--quad-points", type=int, default=1024, help="quadrature nodes")
    p.add_argument("--quad-scheme", default="gauss_legendre_panels",
                   choices=("gauss_legendre_panels", "trapezoid", "analytic"))


def _grid(p):
    p.add_argument("--points", type=int, default=2000, help="finite-difference grid points")
    p.add_argument("--half-width", type=float, default=None, help="grid half-width X (default |b|+10)")
    p.add_argument("--grid-eps", type=float, default=None, help="grid line offset (default: automatic)")
    p.add_argument("--richardson", action="store_true", help="extrapolate from h and h/2")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("--config", help="key=value file; keys mirror flag names")

    parser = argparse.ArgumentParser(prog="ptses", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energies", parents=[common], help="energy ladder E_N")
    _model(p, eps=False)
    p.add_argument("--N", default="0..4", help="degree, range LO..HI or list")

    p = sub.add_parser("charges", parents=[common], help="eigencharge multiplets")
    _model(p, eps=False)
    p.add_argument("--parity", choices=PARITIES, default=EVEN)
    p.add_argument("--N", default=None, help="degree, range LO..HI or list")

    p = sub.add_parser("table2", parents=[common], help="L=4, b=5 charges over N (CSV by default)")
    p.add_argument("--extend", type=int, action="append", default=[],
                   help="extra N; adds eigensolve and asymptotic rows")

    p = sub.add_parser("wavefn", parents=[common], help="wavefunction samples (CSV by default)")
    _model(p)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--parity", choices=PARITIES, default=EVEN)
    p.add_argument("--x-range", default="-8..8")
    p.add_argument("--samples", type=int, default=201)

    p = sub.add_parser("solve", parents=[common], help="variational spectrum at charge F")
    _model(p)
    p.add_argument("--F", type=float, default=None, help="charge")
    p.add_argument("--N-max", type=int, default=8)
    p.add_argument("--parity", choices=PARITIES, default=EVEN)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--coulomb", choices=("direct", "reduced"), default="direct")
    _quad(p)
    p.add_argument("--compare", choices=("oracle",), default=None, help="add a finite-difference comparison")
    _grid(p)

    p = sub.add_parser("oracle", parents=[common], help="finite-difference spectrum at charge F")
    _model(p)
    p.add_argument("--F", type=float, default=None, help="charge")
    p.add_argument("--count", type=int, default=5)
    _grid(p)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.get(command)
    return None


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise DomainError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                out[key.lstrip("-")] = value
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from exc
    return out


def _apply_config(sp: argparse.ArgumentParser, config: dict):
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in actions or dest in ("help", "config"):
            raise DomainError(f"unknown config key {key!r}")
        a = actions[dest]
        if isinstance(a, argparse._StoreTrueAction):
            defaults[dest] = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(a, argparse._AppendAction):
            defaults[dest] = [a.type(v) if a.type else v for v in value.split(",")]
        else:
            try:
                v = a.type(value) if a.type else value
            except ValueError as exc:
                raise DomainError(f"config key {key!r}: {exc}") from exc
            if a.choices and v not in a.choices:
                raise DomainError(f"config key {key!r} must be one of {list(a.choices)}")
            defaults[dest] = v
    sp.set_defaults(**defaults)


def _join_intervals(argv):
    """``--x-range -8..8`` becomes ``--x-range=-8..8`` so that argparse does
    not read the negative bound as a flag."""
    out, it = [], iter(argv)
    for a in it:
        if a == "--x-range":
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def parse_args(argv):
    argv = _join_intervals(sys.argv[1:] if argv is None else list(argv))
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and known.command:
        sp = _subparser(parser, known.command)
        if sp is not None:
            _apply_config(sp, read_config(known.config))
    return parser.parse_args(argv)


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise DomainError(f"--{n.replace('_', '-')} is required")


# --------------------------------------------------------------------------
# commands


def _params_dict(args, *names):
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


def cmd_energies(args):
    _need(args, "L")
    ModelParams(args.L, args.b)
    Ns = parse_range(args.N)
    if min(Ns) < 0:
        raise DomainError("N must be nonnegative")
    rows = [(N, energy(N, args.L, args.b)) for N in Ns]
    return {
        "params": _params_dict(args, "L", "b"),
        "results": [{"N": N, "E": E} for N, E in rows],
        "diagnostics": {},
        "csv": (["N", "E"], rows),
    }


def cmd_charges(args):
    _need(args, "L", "N")
    ModelParams(args.L, args.b)
    results, rows, diag = [], [], {}
    for N in parse_range(args.N):
        spec = ch.multiplet_charges(N, args.L, args.b, args.parity)
        values = [_cplx(F) for F in spec.charges]
        results.append({"N": N, "E": energy(N, args.L, args.b), "charges": values,
                        "residuals": list(spec.residuals), "method": spec.method})
        for k, (F, r) in enumerate(zip(spec.charges, spec.residuals), 1):
            rows.append((N, k, float(np.real(F)), float(np.imag(F)), float(r)))
        if spec.diagnostics.get("degenerate"):
            diag.setdefault("degenerate", {})[str(N)] = spec.diagnostics["degenerate"]
    return {
        "params": _params_dict(args, "L", "b", "parity"),
        "results": results,
        "diagnostics": diag,
        "csv": (["N", "k", "re_F", "im_F", "residual"], rows),
    }


def table2_rows(extend=()):
    """Rows ``(N, source, F1..F4)`` of the L=4, b=5 charge table."""
    rows = []
    for N in TABLE2_N:
        rows.append((N, "eigensolve", *ch.quasi_even_charges(N, TABLE2_L, TABLE2_B, False).charges))
    diffs = {}
    for N in extend:
        exact = ch.quasi_even_charges(N, TABLE2_L, TABLE2_B, False).charges
        approx = ch.charge_asymptotics_L4(N, TABLE2_B, 8)
        rows.append((N, "eigensolve", *exact))
        rows.append((N, "asymptotic", *approx))
        diffs[str(N)] = float(np.max(np.abs(exact - approx) / np.abs(exact)))
    return rows, diffs


def cmd_table2(args):
    args.format = args.format or "csv"
    rows, diffs = table2_rows(args.extend)
    return {
        "params": {"L": TABLE2_L, "b": TABLE2_B},
        "results": [{"N": r[0], "source": r[1], "charges": list(r[2:])} for r in rows],
        "diagnostics": {"asymptotic_max_rel_diff": diffs} if diffs else {},
        "csv": (["N", "source", "F1", "F2", "F3", "F4"], rows),
    }


def cmd_wavefn(args):
    args.format = args.format or "csv"
    _need(args, "L", "N")
    if args.samples < 2:
        raise DomainError("--samples must be at least 2")
    lo, hi = parse_interval(args.x_range)
    state = make_state(ModelParams(args.L, args.b, args.eps), args.N, args.k, args.parity)
    x = np.linspace(lo, hi, args.samples)
    psi = eval_wavefunction(state, x)
    rows = [(xi, p.real, p.imag) for xi, p in zip(x, psi)]
    peak = float(np.max(np.abs(psi)))
    return {
        "params": _params_dict(args, "L", "b", "eps", "N", "k", "parity"),
        "results": [{"x": r[0], "re": r[1], "im": r[2]} for r in rows],
        "diagnostics": {"F": _cplx(state.F), "E": state.E, "peak": peak,
                        "edge_ratio": float(max(abs(psi[0]), abs(psi[-1])) / peak)},
        "csv": (["x", "re_psi", "im_psi"], rows),
    }


def _grid_spec(args):
    return GridSpec(args.half_width, args.points, args.grid_eps)


def _oracle_run(args, params):
    fn = richardson_refine if args.richardson else fd_spectrum
    return fn(params, args.F, _grid_spec(args), args.count)


def _spectrum_rows(values, residuals):
    return [(i, v.real, v.imag, float(r)) for i, (v, r) in enumerate(zip(values, residuals))]


def cmd_solve(args):
    _need(args, "L", "F")
    quad = QuadratureSpec(points=args.quad_points, scheme=args.quad_scheme)
    basis = build_basis(args.L, args.b, args.eps, args.N_max, args.parity, quad)
    res = solve_nonqes(args.F, basis, args.count, args.coulomb)
    values = res.eigenvalues
    results = {"eigenvalues": list(values), "residuals": list(res.residuals)}
    diag = {
        "conditioning": basis.conditioning,
        "basis": [list(label) for label in res.diagnostics["basis"]],
        "left_right_mismatch": res.diagnostics["left_right_mismatch"],
        "physical": res.diagnostics["physical"],
    }
    header = ["index", "re_E", "im_E", "residual"]
    rows = _spectrum_rows(values, res.residuals)
    if args.compare == "oracle":
        orc = _oracle_run(args, basis.params)
        table = []
        for i, E in enumerate(values):
            j = int(np.argmin(np.abs(orc.eigenvalues - E)))
            table.append({"index": i, "pencil": E, "oracle": orc.eigenvalues[j],
                          "abs_diff": float(abs(orc.eigenvalues[j] - E))})
        results["comparison"] = table
        diag["oracle"] = {"method": orc.diagnostics["method"], "eps": orc.diagnostics["eps"]}
        header += ["re_oracle", "im_oracle", "abs_diff"]
        rows = [r + (t["oracle"].real, t["oracle"].imag, t["abs_diff"]) for r, t in zip(rows, table)]
    return {
        "params": _params_dict(args, "L", "b", "eps", "F", "N_max", "parity", "coulomb"),
        "results": results,
        "diagnostics": diag,
        "csv": (header, rows),
    }


def cmd_oracle(args):
    _need(args, "L", "F")
    res = _oracle_run(args, ModelParams(args.L, args.b, args.eps))
    keep = ("method", "h", "eps", "physical")
    return {
        "params": _params_dict(args, "L", "b", "eps", "F", "points", "half_width"),
        "results": {"eigenvalues": list(res.eigenvalues), "residuals": list(res.residuals)},
        "diagnostics": {k: res.diagnostics[k] for k in keep if k in res.diagnostics},
        "csv": (["index", "re_E", "im_E", "residual"], _spectrum_rows(res.eigenvalues, res.residuals)),
    }


COMMANDS = {
    "energies": cmd_energies,
    "charges": cmd_charges,
    "table2": cmd_table2,
    "wavefn": cmd_wavefn,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
}


def run(argv=None) -> tuple[int, str]:
    """Execute a command; returns ``(exit_code, stdout_text)``."""
    try:
        args = parse_args(argv)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, ""
    try:
        out = COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, ""
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL, ""
    if (args.format or "json") == "csv":
        header, rows = out["csv"]
        return EXIT_OK, to_csv(header, rows)
    doc = {"command": args.command, "params": out["params"], "results": out["results"],
           "diagnostics": out["diagnostics"]}
    return EXIT_OK, dumps(doc) + "\n"


def main(argv=None) -> int:
    try:
        code, text = run(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
