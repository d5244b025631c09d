"""Command-line front end: ``csdyn <command> [options]``.

Commands write CSV (stdout or ``--out``) and, with ``--format svg|both``,
an SVG plot next to it.  Exit codes: 0 success, 2 usage error, 3 numerical
failure.  Diagnostics go to stderr only.
"""

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from .errors import NumericalError
from .generator import canonical_rates, l_matrix
from .nonmarkov import DEFAULT_TAU, SWEEP_AXES, default_jobs, rhp_on_grid, sweep
from .oracle import adjudicate_transcriptions
from .qmap import (
    apply_map,
    check_density_matrix,
    choi,
    density_matrix,
    kraus_closed_form,
    kraus_from_choi,
    tomographic_states,
)
from .spectrum import MODELS, ModelParams, ReducedDynamics

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3

DEFAULTS = {
    "omega0": 1.0,
    "omega": 1.0,
    "delta": 0.01,
    "n": 100,
    "temp": 1.0,
    "t_max": 400.0,
    "steps": 4000,
    "tau": DEFAULT_TAU,
    "state": "excited",
    "model": "hp",
    "axis": "delta",
    "values": "0.003,0.005,0.01",
    "format": "csv",
    "kraus_method": "closed",
    "jobs": None,
}
CASTS = {
    "omega0": float,
    "omega": float,
    "delta": float,
    "n": int,
    "temp": float,
    "t_max": float,
    "steps": int,
    "tau": float,
    "jobs": int,
}


class UsageError(Exception):
    pass


def fmt(x):
    """17 significant digits; blanks for missing values."""
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x) + 0.0:.17g}"


def write_csv(header, rows, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment; dashes in keys allowed."""
    cfg = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{num}: unknown key {key!r}")
        cfg[key] = value
    return cfg


def resolve_config(args):
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    env_jobs = os.environ.get("CSDYN_JOBS")
    if env_jobs:
        cfg["jobs"] = env_jobs
    if args.config:
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    try:
        for key, cast in CASTS.items():
            if cfg[key] is not None:
                cfg[key] = cast(cfg[key])
    except ValueError as exc:
        raise UsageError(f"bad value: {exc}") from None
    if cfg["steps"] < 2:
        raise UsageError("--steps must be at least 2")
    if not cfg["t_max"] > 0:
        raise UsageError("--t-max must be positive")
    if not cfg["tau"] > 0:
        raise UsageError("--tau must be positive")
    if cfg["model"] not in MODELS:
        raise UsageError(f"--model must be one of {sorted(MODELS)}")
    if cfg["format"] not in ("csv", "svg", "both"):
        raise UsageError("--format must be csv, svg or both")
    return cfg


def params_from(cfg):
    try:
        return ModelParams(cfg["omega0"], cfg["omega"], cfg["delta"], cfg["n"], cfg["temp"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def grid_from(cfg):
    return np.linspace(0.0, cfg["t_max"], cfg["steps"] + 1)


def parse_state(spec):
    """Named state or ``custom:r11,re12,im12`` (also ``custom(r11,re12,im12)``)."""
    named = tomographic_states()
    named["mixed"] = density_matrix(0.5, 0.0)
    spec = spec.strip()
    if spec in named:
        return named[spec]
    if spec.startswith("custom"):
        body = spec[len("custom"):].strip()
        body = body[1:] if body.startswith(":") else body
        body = body.strip("()")
        try:
            r11, re12, im12 = (float(x) for x in body.split(","))
        except ValueError:
            raise UsageError(f"custom state needs three numbers, got {spec!r}") from None
        try:
            return check_density_matrix(density_matrix(r11, complex(re12, im12)))
        except (ValueError, NumericalError) as exc:
            raise UsageError(f"invalid custom state: {exc}") from None
    raise UsageError(f"unknown state {spec!r}; use one of {sorted(named)} or custom:r11,re12,im12")


def svg_path(cfg, args):
    if cfg["format"] == "csv":
        return None
    if not args.out:
        raise UsageError("--format svg|both needs --out")
    return Path(args.out).with_suffix(".svg")


def csv_target(cfg, args):
    if cfg["format"] == "svg":
        return None
    return args.out


def _emit(cfg, args, header, rows, plot):
    svg = svg_path(cfg, args)
    if cfg["format"] != "svg":
        write_csv(header, rows, csv_target(cfg, args))
    if svg is not None:
        plot(svg)


# ---------------------------------------------------------------- commands


def cmd_evolve(cfg, args):
    rho0 = parse_state(cfg["state"])
    dyn = ReducedDynamics(params_from(cfg), model=cfg["model"])
    t = grid_from(cfg)
    coeffs = dyn.coefficients(t)
    rho = apply_map(coeffs, rho0)
    rows = [
        (t[i], rho[i, 0, 0].real, rho[i, 0, 1].real, rho[i, 0, 1].imag,
         coeffs.alpha1[i], coeffs.alpha2[i], coeffs.zeta[i].real, coeffs.zeta[i].imag)
        for i in range(t.size)
    ]
    header = ["t", "rho11", "re_rho12", "im_rho12", "alpha1", "alpha2", "re_zeta", "im_zeta"]

    def plot(path):
        from .plotting import plot_trajectory

        plot_trajectory(path, t, rho[:, 0, 0].real, rho[:, 0, 1])

    _emit(cfg, args, header, rows, plot)


def cmd_rates(cfg, args):
    dyn = ReducedDynamics(params_from(cfg), model=cfg["model"])
    t = grid_from(cfg)
    lm, bad = l_matrix(dyn, t, singular="mask")
    if np.mean(bad) > 0.01:
        raise NumericalError(f"{np.mean(bad):.2%} of grid points have a singular transfer matrix")
    r = canonical_rates(lm, t)
    rows = []
    for i in range(t.size):
        if bad[i]:
            rows.append((t[i], None, None, None, None, 1))
        else:
            rows.append((t[i], r.omega[i], r.gamma_minus[i], r.gamma_plus[i], r.gamma_d[i], 0))
    header = ["t", "omega", "gamma_minus", "gamma_plus", "gamma_d", "singular"]

    def plot(path):
        from .plotting import plot_rates

        plot_rates(path, t, r)

    _emit(cfg, args, header, rows, plot)


def cmd_kraus(cfg, args):
    if cfg["format"] != "csv":
        raise UsageError("kraus has no plot; use --format csv")
    dyn = ReducedDynamics(params_from(cfg), model=cfg["model"])
    t = grid_from(cfg)
    coeffs = dyn.coefficients(t)
    rows = []
    for i in range(t.size):
        c = coeffs.at(i)
        method = cfg["kraus_method"]
        if method == "closed" and abs(c.zeta) > 1e-14:
            ks = kraus_closed_form(c)
        else:
            method = "choi"
            ks = kraus_from_choi(choi(c))
        resid = ks.completeness_residual()
        for k, (op, w) in enumerate(zip(ks.operators, ks.weights)):
            flat = op.reshape(-1)
            entries = [v for z in flat for v in (z.real, z.imag)]
            rows.append([t[i], method, k, w, *entries, resid])
    header = ["t", "method", "k", "weight",
              "re_k00", "im_k00", "re_k01", "im_k01", "re_k10", "im_k10", "re_k11", "im_k11",
              "completeness_residual"]
    write_csv(header, rows, args.out)


def cmd_choi(cfg, args):
    dyn = ReducedDynamics(params_from(cfg), model=cfg["model"])
    t = grid_from(cfg)
    c = choi(dyn.coefficients(t))
    eig = np.linalg.eigvalsh(c)[:, ::-1]
    rows = [(t[i], *eig[i]) for i in range(t.size)]
    header = ["t", "lambda1", "lambda2", "lambda3", "lambda4"]

    def plot(path):
        from .plotting import line_plot

        line_plot(path, t, {f"lambda{k + 1}": eig[:, k] for k in range(4)}, ylabel="Choi eigenvalue")

    _emit(cfg, args, header, rows, plot)


def cmd_rhp(cfg, args):
    dyn = ReducedDynamics(params_from(cfg), model=cfg["model"])
    t = grid_from(cfg)
    n_val, low, bad = rhp_on_grid(dyn, t, cfg["tau"])
    if np.mean(bad) > 0.01:
        raise NumericalError(f"{np.mean(bad):.2%} of grid points have a singular transfer matrix")
    rows = [(t[i], n_val[i], low[i], int(bad[i])) for i in range(t.size)]
    header = ["t", "n_value", "min_choi_eig", "singular"]

    def plot(path):
        from .plotting import plot_rhp

        plot_rhp(path, t, n_val)

    _emit(cfg, args, header, rows, plot)


def parse_values(axis, text):
    try:
        cast = int if axis == "n" else float
        vals = [cast(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--values must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError("--values must not be empty")
    return vals


def cmd_sweep(cfg, args):
    axis = str(cfg["axis"])
    if "," in axis or axis not in SWEEP_AXES:
        raise UsageError(f"--axis takes exactly one of {sorted(SWEEP_AXES)}, got {axis!r}")
    values = parse_values(axis, cfg["values"])
    jobs = cfg["jobs"] if cfg["jobs"] is not None else default_jobs()
    grid = grid_from(cfg)
    summaries = sweep(params_from(cfg), axis, values, grid, model=cfg["model"], tau=cfg["tau"], jobs=jobs)
    names = ("gamma_minus", "gamma_plus", "gamma_d")
    rows = []
    for v, s in zip(values, summaries):
        rows.append(
            [v]
            + [s.neg_gamma_integrals[k] for k in names]
            + [s.first_negative_time[k] for k in names]
            + [s.integral_n, s.singular_count]
        )
    header = ([axis]
              + [f"neg_integral_{k}" for k in names]
              + [f"first_negative_{k}" for k in names]
              + ["integral_n", "singular_points"])

    def plot(path):
        from .plotting import plot_sweep

        plot_sweep(path, axis, values, summaries)

    _emit(cfg, args, header, rows, plot)


def cmd_oracle_check(cfg, args):
    report = adjudicate_transcriptions()
    text = report.to_text()
    print(f"oracle-check: elapsed {report.elapsed:.2f} s", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_NUMERICAL


COMMANDS = {
    "evolve": cmd_evolve,
    "rates": cmd_rates,
    "kraus": cmd_kraus,
    "choi": cmd_choi,
    "rhp": cmd_rhp,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
}

HELP = {
    "evolve": "reduced density matrix and map coefficients on the grid",
    "rates": "canonical rates Omega, gamma_-, gamma_+, gamma_d",
    "kraus": "Kraus operators and completeness residual per time",
    "choi": "Choi-matrix eigenvalues per time",
    "rhp": "RHP non-Markovianity indicator per time",
    "sweep": "rate-negativity summaries over one parameter axis",
    "oracle-check": "oracle concordance, convention adjudication and typo ledger",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--omega0", type=float, help="qubit splitting (default 1)")
    g.add_argument("--omega", type=float, help="bath splitting (default 1)")
    g.add_argument("--delta", type=float, help="coupling strength (default 0.01)")
    g.add_argument("--n", type=int, help="number of bath spins (default 100)")
    g.add_argument("--temp", type=float, help="bath temperature (default 1)")
    g.add_argument("--model", choices=sorted(MODELS), help="coefficient model (default hp)")
    g = common.add_argument_group("grid and output")
    g.add_argument("--t-max", dest="t_max", type=float, help="end of the time grid (default 400)")
    g.add_argument("--steps", type=int, help="number of grid intervals (default 4000)")
    g.add_argument("--tau", type=float, help="RHP increment (default 1e-3)")
    g.add_argument("--out", help="output file (CSV, or report text); SVG goes next to it")
    g.add_argument("--format", choices=["csv", "svg", "both"], help="output format (default csv)")
    g.add_argument("--config", help="key = value file; flags take precedence")
    g.add_argument("--show-config", action="store_true", help="print the effective configuration and exit")

    parser = _Parser(prog="csdyn", description="Central-spin reduced dynamics toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name])
        if name == "evolve":
            sp.add_argument("--state", help="excited|ground|plusx|minusx|plusy|minusy|mixed|custom:r11,re12,im12")
        if name == "kraus":
            sp.add_argument("--kraus-method", dest="kraus_method", choices=["closed", "choi"],
                            help="closed form (default; falls back to Choi where zeta = 0) or Choi eigenvectors")
        if name == "sweep":
            sp.add_argument("--axis", help="delta | temp | n")
            sp.add_argument("--values", help="comma-separated values for the axis")
            sp.add_argument("--jobs", type=int, help="worker processes (default $CSDYN_JOBS or CPU count)")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        if args.show_config:
            for key in sorted(cfg):
                print(f"{key} = {'' if cfg[key] is None else cfg[key]}")
            return EXIT_OK
        rc = COMMANDS[args.command](cfg, args)
        return EXIT_OK if rc is None else rc
    except UsageError as exc:
        print(f"csdyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"csdyn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
