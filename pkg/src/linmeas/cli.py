"""Command-line surface: classify, trajectory, simulate, verify.

Exit codes follow sysexits conventions where one applies:

* 0  success
* 1  verification found a failing invariant
* 2  the requested interaction is degenerate or orientation-reversing
* 64 usage error (bad flags, bad config file, bad run configuration)
* 73 a grid could not hold the requested computation
* 74 file I/O failure

All output is deterministic given the flags and seed: floats are
printed with ``repr`` (shortest round-trip form) and reports carry no
timestamps, so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import distribution_engine as de
from . import moment_engine as me
from .config import set_hbar
from .errors import (DegenerateInteraction, GridTooNarrow, MismatchedGrids,
                     NegativeDeterminant, NonpositiveScale)
from .interaction_core import classify, new_params, params_from_gains
from .verify import run_verification

EX_OK = 0
EX_FAILED = 1
EX_DEGENERATE = 2
EX_USAGE = 64
EX_GRID = 73
EX_IO = 74


class _UsageError(Exception):
    """Post-parse validation failure; reported like a parser error."""


@dataclass(frozen=True)
class RunConfig:
    """Run-wide knobs shared by the subcommands."""

    hbar: float = 1.0
    grid_points: int = 4096
    grid_span_sigmas: float = 10.0
    output_format: str = "csv"
    seed: int = 0

    def __post_init__(self):
        if not self.hbar > 0.0:
            raise _UsageError(f"hbar must be > 0, got {self.hbar!r}")
        n = self.grid_points
        if n < 16 or n & (n - 1):
            raise _UsageError(
                f"grid-points must be a power of two >= 16, got {n}")
        if not self.grid_span_sigmas > 0.0:
            raise _UsageError(
                f"span must be > 0, got {self.grid_span_sigmas!r}")
        if self.output_format not in ("csv", "json"):
            raise _UsageError(
                f"format must be csv or json, got {self.output_format!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise _UsageError(f"seed must fit in 64 bits, got {self.seed}")


class _Parser(argparse.ArgumentParser):
    """argparse with the sysexits usage code instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path: str) -> dict[str, str]:
    """Plain key=value file; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise _UsageError(
                        f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                out[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise _UsageError(f"cannot read config file: {exc}") from exc
    return out


def _resolve(args, cfg: dict[str, str], key: str, default, cast):
    """Explicit flag beats config file beats built-in default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in cfg:
        try:
            return cast(cfg[key])
        except (TypeError, ValueError) as exc:
            raise _UsageError(
                f"config key {key!r}: cannot parse {cfg[key]!r}") from exc
    return default


def _config_of(args) -> dict[str, str]:
    return _load_config(args.config) if getattr(args, "config", None) else {}


def _fmt(x: float) -> str:
    return repr(float(x))


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)  # "inf", "-inf", "nan": strict-JSON friendly
    return x


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    cfg = _config_of(args)
    run = RunConfig(hbar=_resolve(args, cfg, "hbar", 1.0, float),
                    output_format=_resolve(args, cfg, "format", "csv", str))
    set_hbar(run.hbar)
    coeffs = tuple(_resolve(args, cfg, k, None, float) for k in "abcd")
    if any(v is None for v in coeffs):
        raise _UsageError("classify needs all four of --a --b --c --d")
    a, b, c, d = (float(v) for v in coeffs)
    det = a * d - b * c
    try:
        params = new_params(a, b, c, d)
    except (DegenerateInteraction, NegativeDeterminant):
        sys.stderr.write(
            f"error: determinant {det:g} <= 0; the interaction cannot be "
            "reached continuously from the identity\n")
        return EX_DEGENERATE
    form = classify(params)
    pos, mom = form.reduced_position_matrix, form.reduced_momentum_matrix
    if run.output_format == "json":
        payload = {
            "tag": form.tag,
            "delta": params.delta,
            "scale_triple": [float(v) for v in form.scale_triple],
            "reduced_position_matrix": np.asarray(pos).tolist(),
            "reduced_momentum_matrix": np.asarray(mom).tolist(),
            "params": {k: getattr(params, k)
                       for k in ("a", "b", "c", "d", "delta",
                                 "a_p", "b_p", "c_p", "d_p", "omega")},
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = [
            f"tag: {form.tag}",
            f"delta: {_fmt(params.delta)}",
            ("scale_triple: " +
             " ".join(_fmt(v) for v in form.scale_triple)),
            f"reduced_position_matrix: {np.asarray(pos).tolist()!r}",
            f"reduced_momentum_matrix: {np.asarray(mom).tolist()!r}",
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return EX_OK


def _trajectory_rows(params, w_min: float, w_max: float, n: int):
    grid = np.geomspace(w_min, w_max, n)
    rows = me.trajectory(params, grid)
    table = []
    for w, e, t in rows:
        table.append((w, e, t, e * t, e * t + e + t, e * e + t * t))
    return table


def cmd_trajectory(args) -> int:
    cfg = _config_of(args)
    run = RunConfig(hbar=_resolve(args, cfg, "hbar", 1.0, float))
    set_hbar(run.hbar)
    a = _resolve(args, cfg, "a", 1.0, float)
    b = _resolve(args, cfg, "b", 1.0, float)
    delta = _resolve(args, cfg, "delta", 1.0, float)
    w_min = _resolve(args, cfg, "w_min", 1e-2, float)
    w_max = _resolve(args, cfg, "w_max", 1e2, float)
    n = _resolve(args, cfg, "n", 200, int)
    if not (w_min < w_max):
        raise _UsageError(f"need w-min < w-max, got {w_min!r} >= {w_max!r}")
    if n < 2:
        raise _UsageError(f"need n >= 2 rows, got {n}")
    try:
        params = params_from_gains(a, b, delta)
    except (DegenerateInteraction, NegativeDeterminant) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EX_DEGENERATE
    table = _trajectory_rows(params, w_min, w_max, n)
    lines = ["w,eps_tilde,eta_tilde,hur_lhs,our_lhs,circle_lhs"]
    lines.extend(",".join(_fmt(v) for v in row) for row in table)
    _emit("\n".join(lines) + "\n", args.out)
    if args.plot:
        if args.out is None:
            raise _UsageError("--plot needs --out to name the figure")
        from . import plotting
        plotting.save_trajectory_figure(
            os.path.splitext(args.out)[0] + ".png", params,
            np.geomspace(w_min, w_max, n))
    return EX_OK


def cmd_simulate(args) -> int:
    cfg = _config_of(args)
    run = RunConfig(hbar=_resolve(args, cfg, "hbar", 1.0, float),
                    grid_points=_resolve(args, cfg, "grid_points", 4096, int),
                    grid_span_sigmas=_resolve(args, cfg, "span", 10.0, float))
    set_hbar(run.hbar)
    a = _resolve(args, cfg, "a", 1.0, float)
    b = _resolve(args, cfg, "b", 1.0, float)
    c = _resolve(args, cfg, "c", 0.0, float)
    d = _resolve(args, cfg, "d", 1.0, float)
    sigma_q = _resolve(args, cfg, "sigma_q", 1.0, float)
    sigma_p = _resolve(args, cfg, "sigma_p", None, float)
    sigma_Q = _resolve(args, cfg, "sigma_Q", 1.0, float)
    sigma_P = _resolve(args, cfg, "sigma_P", None, float)
    out_dir = args.out if args.out is not None else "."
    try:
        params = new_params(a, b, c, d)
    except (DegenerateInteraction, NegativeDeterminant) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EX_DEGENERATE
    try:
        if sigma_p is None:
            obj = me.ObjectStateSpec.minimum_uncertainty(sigma_q=sigma_q)
        else:
            obj = me.ObjectStateSpec(sigma_q=sigma_q, sigma_p=sigma_p)
        if sigma_P is None:
            probe = me.ProbeStateSpec.minimum_uncertainty(sigma_Q=sigma_Q)
        else:
            probe = me.ProbeStateSpec(sigma_Q=sigma_Q, sigma_P=sigma_P)
    except (NonpositiveScale, ValueError) as exc:
        raise _UsageError(str(exc)) from exc

    f, F, g, G = de.gaussian_inputs(params, obj, probe,
                                    points=run.grid_points,
                                    span_sigmas=run.grid_span_sigmas)
    readout, momentum = de.general_output_distributions(params, f, F, g, G)
    os.makedirs(out_dir, exist_ok=True)
    tables = (("f", f), ("F", F), ("g", g), ("G", G),
              ("F_out", readout), ("g_out", momentum))
    for name, dist in tables:
        de.write_csv(dist, os.path.join(out_dir, f"{name}.csv"))

    report = me.evaluate_bounds(params=params, obj=obj, probe=probe)
    payload = {k: _jsonable(getattr(report, k))
               for k in ("epsilon", "eta", "epsilon_star", "eta_star",
                         "star_product", "limit_resolved", "epsilon_tilde",
                         "eta_tilde", "w", "hur_lhs", "our_lhs", "circle_lhs",
                         "hur_satisfied", "our_satisfied", "circle_satisfied",
                         "hbar")}
    payload["variance_readout"] = de.moments(readout).variance
    payload["variance_momentum"] = de.moments(momentum).variance
    payload["variance_readout_predicted"] = ((params.b * obj.sigma_q) ** 2
                                             + (params.a * probe.sigma_Q) ** 2)
    payload["variance_momentum_predicted"] = ((params.a_p * obj.sigma_p) ** 2
                                              + (params.b_p * probe.sigma_P) ** 2)
    with open(os.path.join(out_dir, "report.json"), "w",
              encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")

    if args.plot:
        from . import plotting
        plotting.save_distribution_figure(
            os.path.join(out_dir, "positions.png"),
            [("f", f), ("F", F), ("F_out", readout)])
        plotting.save_distribution_figure(
            os.path.join(out_dir, "momenta.png"),
            [("g", g), ("G", G), ("g_out", momentum)])
    return EX_OK


def cmd_verify(args) -> int:
    cfg = _config_of(args)
    run = RunConfig(hbar=_resolve(args, cfg, "hbar", 1.0, float),
                    seed=_resolve(args, cfg, "seed", 0, int))
    set_hbar(run.hbar)
    level = _resolve(args, cfg, "level", "full", str)
    if level not in ("quick", "full"):
        raise _UsageError(f"--level must be quick or full, got {level!r}")
    sign = 1.0 if args.flip_fourier_sign else -1.0
    results = run_verification(seed=run.seed, level=level, fourier_sign=sign)
    payload = {
        "seed": run.seed,
        "level": level,
        "all_passed": all(r.passed for r in results),
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                   for r in results],
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EX_OK if payload["all_passed"] else EX_FAILED


# ---------------------------------------------------------------------------
# parser


def _add_common(sp) -> None:
    sp.add_argument("--config", metavar="FILE",
                    help="key=value defaults, overridden by flags")
    sp.add_argument("--hbar", type=float, default=None,
                    help="value of the quantum of action (default 1)")
    sp.add_argument("--out", default=None,
                    help="output file (or directory for simulate); "
                         "default stdout")


def _add_params(sp, keys="abcd") -> None:
    for k in keys:
        sp.add_argument(f"--{k}", type=float, default=None,
                        help=f"interaction coefficient {k}")


def build_parser() -> _Parser:
    parser = _Parser(prog="linmeas",
                     description="Linear position-measurement models: "
                                 "classification, error-disturbance "
                                 "trade-offs, distribution transforms, "
                                 "and self-verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cls = sub.add_parser("classify",
                           help="standard-form class of an interaction")
    _add_params(p_cls)
    _add_common(p_cls)
    p_cls.add_argument("--format", choices=("csv", "json"), default=None,
                       help="report style (csv = plain text lines)")
    p_cls.set_defaults(func=cmd_classify)

    p_trj = sub.add_parser("trajectory",
                           help="error-disturbance sweep over the balance "
                                "parameter, as CSV")
    _add_params(p_trj, keys="ab")
    p_trj.add_argument("--delta", type=float, default=None,
                       help="determinant of the coefficient block "
                            "(default 1)")
    p_trj.add_argument("--w-min", type=float, default=None, dest="w_min")
    p_trj.add_argument("--w-max", type=float, default=None, dest="w_max")
    p_trj.add_argument("--n", type=int, default=None,
                       help="number of log-spaced rows (default 200)")
    p_trj.add_argument("--plot", action="store_true",
                       help="also render the trajectory figure next to "
                            "the CSV")
    _add_common(p_trj)
    p_trj.set_defaults(func=cmd_trajectory)

    p_sim = sub.add_parser("simulate",
                           help="transform Gaussian input densities and "
                                "write the CSV bundle plus a JSON report")
    _add_params(p_sim)
    p_sim.add_argument("--sigma-q", type=float, default=None, dest="sigma_q",
                       help="object position spread (default 1)")
    p_sim.add_argument("--sigma-p", type=float, default=None, dest="sigma_p",
                       help="object momentum spread (default hbar/(2 sigma_q))")
    p_sim.add_argument("--sigma-Q", type=float, default=None, dest="sigma_Q",
                       help="meter position spread (default 1)")
    p_sim.add_argument("--sigma-P", type=float, default=None, dest="sigma_P",
                       help="meter momentum spread (default hbar/(2 sigma_Q))")
    p_sim.add_argument("--grid-points", type=int, default=None,
                       dest="grid_points",
                       help="points per density table (power of two, "
                            "default 4096)")
    p_sim.add_argument("--span", type=float, default=None,
                       help="half-width of input grids in sigmas "
                            "(default 10)")
    p_sim.add_argument("--plot", action="store_true",
                       help="also render density figures into the "
                            "output directory")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify",
                           help="run the cross-module consistency battery")
    p_ver.add_argument("--seed", type=int, default=None,
                       help="seed for the randomized parameter draws")
    p_ver.add_argument("--level", choices=("quick", "full"), default=None,
                       help="quick keeps oracle grids at 2^8 points")
    p_ver.add_argument("--flip-fourier-sign", action="store_true",
                       help=argparse.SUPPRESS)
    _add_common(p_ver)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"{parser.prog}: error: {exc}\n")
        return EX_USAGE
    except (GridTooNarrow, MismatchedGrids) as exc:
        sys.stderr.write(f"{parser.prog}: grid error: {exc}\n")
        return EX_GRID
    except OSError as exc:
        sys.stderr.write(f"{parser.prog}: i/o error: {exc}\n")
        return EX_IO


if __name__ == "__main__":
    sys.exit(main())
