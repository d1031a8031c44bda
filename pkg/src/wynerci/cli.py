"""Command-line interface.

Subcommands::

    wynerci bound         --model agc --rho-hat 0.5 --sigma-a 1
    wynerci sweep         --figure 1 --out fig1.csv
    wynerci verify-lemma2 --rho 0.5 --lam 0.25 --resolution 400
    wynerci verify-gmu    --rho 0.5 --gamma 0.1
    wynerci compare       fig1.csv --fixture fig1_exact --tol 1e-3

Exit codes: 0 success, 1 usage, 2 numerical failure, 3 fixture mismatch.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import envelope
from .bounds import (
    InfiniteCommonInformationError,
    gaussian_wyner,
    relaxation_params,
    relaxed_gaussian_wyner,
)
from .core import DegenerateCovarianceError
from .evaluate import evaluate_bounds, report_lines
from .fixtures import FIXTURE_COLUMNS, FIXTURE_NAMES, format_number, load_fixture
from .models import model_from_spec
from .quadrature import QuadratureConfig, QuadratureError

log = logging.getLogger("wynerci")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_MISMATCH = 3

QUANTITIES = ("lower", "lower_unclamped", "upper", "exact", "mi", "gamma_lower")
SWEEP_PARAMS = ("sigma_a", "rho_hat", "r", "rho_l", "rho", "gamma")

MODEL_KEYS = {
    "gaussian": ("rho",),
    "agc": ("rho_hat", "sigma_a"),
    "agc4": ("rho_hat", "r", "sigma_a"),
    "laplace": ("rho_l",),
}

FIGURE_PRESETS = {
    "1": dict(model="agc", fixed={"rho_hat": 0.5}, param="sigma_a",
              start=0.0, stop=5.0, step=0.05, quantities=["exact", "mi"]),
    "2": dict(model="agc4", fixed={"rho_hat": 0.5, "r": 0.9}, param="sigma_a",
              start=0.0, stop=5.0, step=0.05,
              quantities=["lower", "lower_unclamped", "mi", "upper"]),
    "3": dict(model="laplace", fixed={}, param="rho_l",
              start=0.2, stop=0.99, step=0.01, quantities=["lower", "mi"]),
}


class UsageError(Exception):
    pass


@dataclass
class SweepSpec:
    model_family: str
    fixed_params: dict
    sweep_param: str
    start: float
    stop: float
    step: float
    quantities: list
    gamma: Optional[float] = None
    cfg: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if self.model_family not in MODEL_KEYS:
            raise UsageError(f"unknown model {self.model_family!r}")
        if not self.step > 0:
            raise UsageError("step must be positive")
        if self.start > self.stop:
            raise UsageError("start must not exceed stop")
        if not self.quantities:
            raise UsageError("at least one quantity is required")
        bad = [q for q in self.quantities if q not in QUANTITIES]
        if bad:
            raise UsageError(f"unknown quantities {bad}; choose from {QUANTITIES}")
        if self.sweep_param not in SWEEP_PARAMS:
            raise UsageError(f"cannot sweep {self.sweep_param!r}")
        if "gamma_lower" in self.quantities and self.gamma is None and self.sweep_param != "gamma":
            raise UsageError("quantity 'gamma_lower' needs --gamma")
        if "exact" in self.quantities:
            r = self.fixed_params.get("r", 1.0)
            if self.model_family == "laplace" or (self.model_family == "agc4" and
                                                 (r != 1.0 or self.sweep_param == "r")):
                raise UsageError("'exact' is only defined for A = B noise (r = 1) or Gaussian pairs")
        if "upper" in self.quantities and self.model_family == "laplace":
            raise UsageError("no upper bound is available for the Laplace family")

    def grid(self) -> list[float]:
        n = int(round((self.stop - self.start) / self.step))
        values = [round(self.start + i * self.step, 12) for i in range(n + 1)]
        return [v for v in values if v <= self.stop + 1e-12]

    def model_params(self, value: float) -> dict:
        params = dict(self.fixed_params)
        if self.sweep_param != "gamma":
            params[self.sweep_param] = value
        return params


def _build_model(family: str, params: dict):
    missing = [k for k in MODEL_KEYS[family] if k not in params and not (family == "agc" and k == "r")]
    if missing:
        raise UsageError(f"model {family!r} needs {', '.join('--' + m.replace('_', '-') for m in missing)}")
    spec = {"family": family, **{k: params[k] for k in MODEL_KEYS[family]}}
    try:
        return model_from_spec(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _sweep_point(args):
    spec, value = args
    model = _build_model(spec.model_family, spec.model_params(value))
    gamma = value if spec.sweep_param == "gamma" else spec.gamma
    cells = {}
    try:
        base = evaluate_bounds(model, None, spec.cfg)
        relaxed = evaluate_bounds(model, gamma, spec.cfg) if "gamma_lower" in spec.quantities else None
    except (QuadratureError, InfiniteCommonInformationError, ValueError) as exc:
        return value, None, f"{type(exc).__name__}: {exc}"
    for q in spec.quantities:
        cells[q] = {
            "lower": base.lower_bound,
            "lower_unclamped": base.lower_unclamped,
            "upper": base.upper_bound,
            "exact": base.exact,
            "mi": base.mutual_information,
            "gamma_lower": relaxed.lower_bound if relaxed else None,
        }[q]
    return value, cells, None


def run_sweep(spec: SweepSpec, out, jobs: int = 1) -> int:
    """Write the sweep CSV to the text stream ``out``; returns the failed-point count."""
    tasks = [(spec, v) for v in spec.grid()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["param", *spec.quantities])
    failures = 0
    for value, cells, err in results:
        if err is not None:
            failures += 1
            log.warning("point %s=%s failed: %s", spec.sweep_param, format_number(value), err)
            writer.writerow([format_number(value)] + [""] * len(spec.quantities))
            continue
        writer.writerow([format_number(value)] +
                        ["" if cells[q] is None else format_number(cells[q]) for q in spec.quantities])
    return failures


# argument handling ------------------------------------------------------------

def _add_model_args(p):
    p.add_argument("--model", choices=sorted(MODEL_KEYS))
    p.add_argument("--rho", type=float, help="correlation of a Gaussian pair")
    p.add_argument("--rho-hat", type=float, help="correlation of the Gaussian part")
    p.add_argument("--r", type=float, help="noise correlation (agc4)")
    p.add_argument("--sigma-a", type=float, help="noise standard deviation")
    p.add_argument("--rho-l", type=float, help="Laplace correlation")


def _add_common_args(p):
    p.add_argument("--config", help="JSON file of option defaults (flags take precedence)")
    p.add_argument("--gamma", type=float, help="relaxation slack in nats")
    p.add_argument("--abs-tol", type=float, help="1D quadrature tolerance")
    p.add_argument("--abs-tol-2d", type=float, help="2D quadrature tolerance")
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wynerci", description="Bounds on Wyner's common information for bivariate sources.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="evaluate the bounds at one parameter point")
    _add_model_args(p)
    _add_common_args(p)
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("sweep", help="sweep one parameter and write CSV")
    _add_model_args(p)
    _add_common_args(p)
    p.add_argument("--figure", choices=sorted(FIGURE_PRESETS), help="preset reproducing a figure")
    p.add_argument("--param", choices=SWEEP_PARAMS)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--quantities", help="comma separated subset of " + ",".join(QUANTITIES))
    p.add_argument("--jobs", type=int, help="worker processes")

    p = sub.add_parser("verify-lemma2", help="check the envelope closed form against the grid oracle")
    p.add_argument("--config")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--set", dest="set_kind", choices=envelope.SET_KINDS, default=envelope.A_RHO)
    p.add_argument("--tol", type=float, help="allowed oracle gap (default: 5 grid steps of objective variation)")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("verify-gmu", help="check the maximiser of g(mu) numerically")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--joint-entropy", type=float,
                   help="h(X,Y) (default: Gaussian value for unit variances)")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("compare", help="compare a sweep CSV against a stored figure curve")
    p.add_argument("csv_path")
    p.add_argument("--fixture", required=True, choices=FIXTURE_NAMES)
    p.add_argument("--column", help="CSV column to compare (default depends on the fixture)")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _merge_config(args) -> argparse.Namespace:
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path, encoding="utf-8") as fh:
            conf = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for key, value in conf.items():
        key = key.replace("-", "_")
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            setattr(args, key, value)
    return args


def _quad_config(args) -> QuadratureConfig:
    changes = {}
    for name in ("abs_tol", "abs_tol_2d", "mc_samples"):
        if getattr(args, name, None) is not None:
            changes[name] = getattr(args, name)
    if getattr(args, "seed", None) is not None:
        changes["mc_seed"] = args.seed
    try:
        return QuadratureConfig(**changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _model_params(args) -> dict:
    return {k: getattr(args, k) for k in ("rho", "rho_hat", "r", "sigma_a", "rho_l")
            if getattr(args, k, None) is not None}


def cmd_bound(args) -> int:
    if not args.model:
        raise UsageError("--model is required")
    model = _build_model(args.model, _model_params(args))
    cfg = _quad_config(args)
    try:
        report = evaluate_bounds(model, args.gamma, cfg)
    except (InfiniteCommonInformationError, DegenerateCovarianceError) as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        print(f"model {json.dumps(model.to_spec())}")
        for line in report_lines(report):
            print(line)
    if args.out:
        fields = sorted(report.as_dict())
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(fields)
            row = report.as_dict()
            w.writerow(["" if row[f] is None else
                        (format_number(row[f]) if isinstance(row[f], float) else row[f]) for f in fields])
    return EXIT_OK


def cmd_sweep(args) -> int:
    preset = FIGURE_PRESETS.get(args.figure, {}) if args.figure else {}
    family = args.model or preset.get("model")
    if family is None:
        raise UsageError("--model or --figure is required")
    fixed = dict(preset.get("fixed", {})) if family == preset.get("model") else {}
    fixed.update(_model_params(args))
    param = args.param or preset.get("param")
    if param is None:
        raise UsageError("--param is required")
    fixed.pop(param, None)
    quantities = (args.quantities.split(",") if args.quantities else preset.get("quantities"))
    start = args.start if args.start is not None else preset.get("start")
    stop = args.stop if args.stop is not None else preset.get("stop")
    step = args.step if args.step is not None else preset.get("step")
    if None in (start, stop, step) or not quantities:
        raise UsageError("--start, --stop, --step and --quantities are required without --figure")
    spec = SweepSpec(family, fixed, param, start, stop, step,
                     [q.strip() for q in quantities], args.gamma, _quad_config(args))
    # validate model parameters once before launching the grid
    _build_model(family, spec.model_params(spec.grid()[0]))
    jobs = max(1, int(args.jobs or 1))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            failures = run_sweep(spec, fh, jobs)
        log.info("wrote %s", args.out)
    else:
        failures = run_sweep(spec, sys.stdout, jobs)
    return EXIT_NUMERICAL if failures else EXIT_OK


def cmd_verify_lemma2(args) -> int:
    rho, lam = args.rho, args.lam
    if not (0 < rho < 1 and 0 < lam < 1):
        raise UsageError("need 0 < rho < 1 and 0 < lambda < 1")
    if lam > rho:
        print(f"out of scope: the closed form holds only for lambda <= rho "
              f"(got lambda={lam}, rho={rho})")
        sol = envelope.lemma2_grid_oracle(rho, lam, envelope.D_RHO, args.resolution)
        print(f"oracle (D_rho) minimum {sol.min_value:.12f} at q={sol.q_star:.6f}, "
              f"sigma2={sol.sigma2_star:.6f} [{sol.branch}]")
        return EXIT_USAGE
    kkt = envelope.lemma2_kkt_point(rho, lam)
    sol = envelope.lemma2_grid_oracle(rho, lam, args.set_kind, args.resolution)
    gap = sol.min_value - kkt.min_value
    tol = args.tol if args.tol is not None else 5 * envelope.grid_step_variation(rho, lam, args.resolution)
    res = envelope.kkt_residuals(rho, lam, kkt.q_star, kkt.sigma2_star, kkt.mu_star)
    print(f"closed form     {kkt.min_value:.12f}")
    print(f"grid oracle     {sol.min_value:.12f}  ({args.set_kind}, resolution {args.resolution})")
    print(f"gap             {gap:.3e}  (tolerance {tol:.3e})")
    print(f"KKT point       q*={kkt.q_star:.6f} sigma2*={kkt.sigma2_star:.6f} mu*={kkt.mu_star:.6f}")
    print(f"oracle argmin   q={sol.q_star:.6f} sigma2={sol.sigma2_star:.6f}")
    print("KKT residuals   " + " ".join(f"{r:.2e}" for r in res))
    ok = -1e-12 <= gap <= tol and max(abs(r) for r in res) <= 1e-10
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_verify_gmu(args) -> int:
    rho, gamma = args.rho, args.gamma
    if not (0 < abs(rho) < 1):
        raise UsageError("need 0 < |rho| < 1")
    if not gamma > 0:
        raise UsageError("need gamma > 0 (mu* is unbounded at gamma = 0)")
    h = args.joint_entropy
    if h is None:
        h = math.log(2 * math.pi * math.e) + 0.5 * math.log1p(-rho * rho)
    mu_c, val_c = envelope.maximize_g(rho, gamma, h)
    mu_n, val_n = envelope.maximize_g_numeric(rho, gamma, h)
    eps = 1e-5 * mu_c
    fd = (envelope.g_mu(rho, gamma, h, mu_c + eps) - envelope.g_mu(rho, gamma, h, mu_c - eps)) / (2 * eps)
    print(f"mu* closed form {mu_c:.12f}   numeric {mu_n:.12f}   diff {abs(mu_c - mu_n):.2e}")
    print(f"g(mu*)          {val_c:.12f}   numeric {val_n:.12f}   diff {abs(val_c - val_n):.2e}")
    print(f"dg/dmu at mu*   analytic {envelope.g_mu_derivative(gamma, mu_c):.2e}  central diff {fd:.2e}")
    rp = relaxation_params(rho, gamma)
    print(f"mu* >= 1/|rho|  {rp.valid_mu_condition}")
    print(f"relaxed Gaussian common information {relaxed_gaussian_wyner(rho, gamma):.12f}"
          f" (gamma=0: {gaussian_wyner(rho):.12f})")
    ok = abs(mu_c - mu_n) <= 1e-6 and abs(val_c - val_n) <= 1e-8
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERICAL


def compare_rows(csv_path: str, fixture: str, column: Optional[str], tol: float):
    """Per-row absolute differences between a sweep CSV column and a fixture."""
    table = load_fixture(fixture)
    column = column or FIXTURE_COLUMNS[fixture]
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "param" not in reader.fieldnames:
            raise UsageError(f"{csv_path} has no 'param' column")
        if column not in reader.fieldnames:
            raise UsageError(f"{csv_path} has no {column!r} column")
        rows = [(float(r["param"]), r[column]) for r in reader]
    if len(rows) != len(table.rows) or any(
            abs(p - fp) > 1e-9 for (p, _), fp in zip(rows, table.params)):
        raise AlignmentError(f"parameter grid of {csv_path} does not match fixture {fixture} "
                             f"({len(rows)} vs {len(table.rows)} rows)")
    diffs = []
    for (p, cell), (_, ref) in zip(rows, table.rows):
        diffs.append((p, math.inf if cell == "" else abs(float(cell) - ref), cell, ref))
    return diffs


class AlignmentError(Exception):
    pass


def cmd_compare(args) -> int:
    try:
        diffs = compare_rows(args.csv_path, args.fixture, args.column, args.tol)
    except AlignmentError as exc:
        print(f"alignment error: {exc}")
        return EXIT_MISMATCH
    except OSError as exc:
        raise UsageError(str(exc)) from None
    bad = [d for d in diffs if not d[1] <= args.tol]
    worst = max(diffs, key=lambda d: d[1])
    for p, diff, cell, ref in bad:
        print(f"row param={format_number(p)}: got {cell or '<empty>'} expected {format_number(ref)} "
              f"|diff|={diff:.3e}")
    print(f"{args.fixture}: {len(diffs)} rows, max |diff| = {worst[1]:.3e} "
          f"at param={format_number(worst[0])}, tol = {args.tol:g}")
    print("PASS" if not bad else f"FAIL ({len(bad)} rows above tolerance)")
    return EXIT_OK if not bad else EXIT_MISMATCH


COMMANDS = {
    "bound": cmd_bound,
    "sweep": cmd_sweep,
    "verify-lemma2": cmd_verify_lemma2,
    "verify-gmu": cmd_verify_gmu,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args = _merge_config(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
