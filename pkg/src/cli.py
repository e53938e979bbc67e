"""
Command-line entry points for the rigidity experiments.

Every command builds a RunConfig, runs one experiment, writes its report
into the output tree and prints it. Exit codes: 0 when the check passes,
1 for usage or input errors, 2 when a mathematical check fails.
"""

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from . import __version__
from .body import (
    ConvexBody,
    ball,
    check_convexity,
    ellipsoid,
    ellipsoid_fit_distance,
    isotropic_position,
    perturbed_ball,
    random_convex_body_2d,
    random_near_ball,
)
from .bp_experiments import (
    bp5_mu,
    bp5_residual_2d,
    bp8_mu,
    contraction_spectrum,
    cap_average_sweep,
    cap_inequality_sweep,
    is_strong_contraction,
    radon_curve_build,
    residual,
    rigidity_scan,
)
from .config import RunConfig
from .entities import ExperimentReport, Problem, RigidityScanResult
from .errors import (
    ConvexityError,
    NonConvexPerturbationError,
    SolverDivergenceError,
    SphereRigidityError,
    UsageError,
)
from .logger import ExperimentLogger
from .ma_solver import ma_solve, phi_split_check
from .operators import funk_multiplier_exact, laplace_multiplier
from .path_manager import PathManager
from .report_writer import (
    ReportWriter,
    body_from_record,
    body_to_record,
    coeffs_from_record,
    dumps,
    load_json,
)
from .sphere_core import build_grid

SLOPE_TOLERANCE = 0.10
KERNEL_SLOPE_FRACTION = 0.05


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _csv_list(kind: type):
    def parse(text: str) -> list:
        items = [item for item in text.split(",") if item.strip()]
        try:
            return [kind(item) for item in items]
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e

    return parse


def _global_flags() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--n", dest="dim_n", type=int, help="Ambient dimension (2 or 3)")
    flags.add_argument("--band-limit", type=int, help="Harmonic band limit L")
    flags.add_argument("--resolution", type=int, help="Grid resolution")
    flags.add_argument("--problem", choices=[p.value for p in Problem], help="Busemann-Petty problem")
    flags.add_argument("--degrees", type=_csv_list(int), help="Comma-separated degrees m")
    flags.add_argument("--t-values", type=_csv_list(float), help="Comma-separated sizes t")
    flags.add_argument("--tol", dest="tolerance", type=float, help="Residual acceptance tolerance")
    flags.add_argument("--solver-tol", type=float, help="Fixed-point stopping increment")
    flags.add_argument("--max-iter", type=int, help="Fixed-point iteration cap")
    flags.add_argument("--alpha", type=float, help="Hölder exponent")
    flags.add_argument("--out", help="Output directory")
    flags.add_argument("--seed", type=int, help="Random seed")
    flags.add_argument("--threads", type=int, help="Worker threads")
    return flags


def _config(args: argparse.Namespace, **defaults: Any) -> RunConfig:
    keys = [
        "dim_n",
        "band_limit",
        "resolution",
        "problem",
        "degrees",
        "t_values",
        "tolerance",
        "solver_tol",
        "max_iter",
        "alpha",
        "out",
        "seed",
        "threads",
    ]
    overrides = {k: getattr(args, k, None) for k in keys}
    for key, value in defaults.items():
        if overrides.get(key) is None:
            overrides[key] = value
    if getattr(args, "problem_arg", None):
        overrides["problem"] = args.problem_arg
    if overrides.get("degrees") == []:
        raise UsageError("degree list is empty")
    if overrides.get("t_values") == []:
        raise UsageError("t list is empty")
    try:
        return RunConfig.from_env(**overrides)
    except ValidationError as e:
        raise UsageError(str(e)) from e


class _Run:
    """Output tree, logger and writer shared by one command invocation"""

    def __init__(self, command: str, config: RunConfig):
        self.command = command
        self.config = config
        self.paths = PathManager(Path(config.out), config.log_dir)
        self.logger = ExperimentLogger(self.paths.logs)
        self.writer = ReportWriter(self.paths, self.logger)
        self.started = time.perf_counter()

    def report(
        self,
        result: dict[str, Any],
        passed: bool | None,
        warnings: list[str] | None = None,
        name: str | None = None,
    ) -> ExperimentReport:
        report = ExperimentReport(
            command=self.command,
            version=__version__,
            config=self.config.model_dump(mode="json"),
            passed=passed,
            result=result,
            warnings=warnings or [],
        )
        payload = report.model_dump(mode="json")
        self.writer.write_json(name or f"{self.command}.json", payload)
        self.logger.log_operation(
            self.command,
            {"config": payload["config"]},
            {"passed": passed, "warnings": report.warnings},
            elapsed=time.perf_counter() - self.started,
        )
        print(dumps(payload))
        return report


def _exit_code(passed: bool | None) -> int:
    return 0 if passed in (True, None) else 2


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_verify(args: argparse.Namespace) -> int:
    config = _config(args)
    grid = build_grid(config.dim_n, config.resolution)
    body = body_from_record(load_json(args.body_file), grid)
    run = _Run("verify", config)
    margin = check_convexity(body)
    transform, positioned = isotropic_position(body)
    if config.dim_n == 2 and config.problem == Problem.BP5:
        result = bp5_residual_2d(positioned)
    else:
        result = residual(config.problem, positioned)
    passed = result.passes(config.tolerance)

    run.report(
        {
            "body": str(args.body_file),
            "convexity_margin": margin,
            "isotropic_transform": transform.tolist(),
            "residual": result.model_dump(mode="json"),
        },
        passed,
    )
    return _exit_code(passed)


def _scan_payload(scan: RigidityScanResult) -> dict[str, Any]:
    return {
        "degree": scan.degree,
        "fitted_slope": scan.fitted_slope,
        "predicted_slope": scan.predicted_slope,
        "slope_ratio": scan.slope_ratio,
        "pruned_t": scan.pruned_t,
    }


def _cmd_rigidity(args: argparse.Namespace) -> int:
    config = _config(args)
    grid = build_grid(config.dim_n, config.resolution)
    run = _Run("rigidity", config)

    def scan(m: int) -> RigidityScanResult | NonConvexPerturbationError:
        try:
            return rigidity_scan(
                grid,
                config.problem,
                m,
                config.t_values,
                config.band_limit,
                prune_nonconvex=True,
                logger=run.logger,
            )
        except NonConvexPerturbationError as e:
            return e

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        outcomes = list(pool.map(scan, config.degrees))

    header = ["problem", "n", "band_limit", "m", "t", "residual_l2", "residual_sup", "status"]
    rows: list[list[Any]] = []
    summaries: list[dict[str, Any]] = []
    warnings: list[str] = []
    passed = True
    slopes: dict[int, float] = {}
    for m, outcome in zip(config.degrees, outcomes, strict=True):
        if isinstance(outcome, NonConvexPerturbationError):
            warnings.append(f"m={m}: every t is nonconvex")
            prefix = [config.problem.value, config.dim_n, config.band_limit, m]
            rows.extend(prefix + [t, None, None, "pruned: nonconvex"] for t in config.t_values)
            passed = False
            continue
        rows.extend(
            [row.problem.value, row.dim_n, row.band_limit, row.degree, row.t]
            + [row.residual_l2, row.residual_sup, row.status]
            for row in outcome.rows
        )
        if outcome.pruned_t:
            warnings.append(f"m={m}: pruned nonconvex t {outcome.pruned_t}")
        summaries.append(_scan_payload(outcome))
        slopes[m] = outcome.fitted_slope
        ratio = outcome.slope_ratio
        if ratio is not None and m >= 4 and abs(ratio - 1.0) > SLOPE_TOLERANCE:
            passed = False
    if 2 in slopes and 4 in slopes and abs(slopes[2]) > KERNEL_SLOPE_FRACTION * slopes[4]:
        passed = False

    run.writer.write_csv("rigidity.csv", header, rows)
    run.report({"scans": summaries}, passed, warnings)
    return _exit_code(passed)


def _cmd_solve_ma(args: argparse.Namespace) -> int:
    config = _config(args)
    gamma = coeffs_from_record(load_json(args.gamma_file))
    if gamma.dim_n != config.dim_n:
        raise UsageError(f"γ file has n={gamma.dim_n}, config has n={config.dim_n}")
    grid = build_grid(config.dim_n, config.resolution)
    run = _Run("solve-ma", config)
    band_limit = max(config.band_limit, gamma.band_limit)
    if band_limit > grid.max_band_limit:
        raise UsageError(f"aliasing risk: γ band limit {band_limit} exceeds {grid.max_band_limit}")

    try:
        trace = ma_solve(
            grid,
            gamma,
            band_limit,
            alpha=config.alpha,
            max_iter=config.max_iter,
            tol=config.solver_tol,
            logger=run.logger,
        )
    except SolverDivergenceError as e:
        record = e.trace.to_record().model_dump(mode="json")
        run.writer.write_json("ma_trace.json", record, kind="traces")
        run.report({"trace": record}, False, [str(e)])
        return 2

    record = trace.to_record().model_dump(mode="json")
    exact, ratio = phi_split_check(trace, gamma)
    run.writer.write_json("ma_trace.json", record, kind="traces")
    passed = trace.converged and trace.final_residual <= config.tolerance
    run.report({"trace": record, "phi_prime_exact": exact, "phi_double_prime_ratio": ratio}, passed)
    return _exit_code(passed)


def _cmd_radon(args: argparse.Namespace) -> int:
    config = _config(args, dim_n=2)
    if config.dim_n != 2:
        raise UsageError("Radon curves are planar; use --n 2")
    record = load_json(args.arc_file)
    coefficients = record.get("coefficients")
    if not isinstance(coefficients, list) or not coefficients:
        raise UsageError("arc file needs a non-empty 'coefficients' list")
    run = _Run("radon", config)
    grid = build_grid(2, config.resolution)
    body = radon_curve_build(grid, coefficients, config.band_limit)
    result = bp5_residual_2d(body)
    distance, _ = ellipsoid_fit_distance(body)
    passed = result.passes(config.tolerance)

    body_record = body_to_record(body)
    body_record["radon_arc"] = [float(c) for c in coefficients]
    run.writer.write_json("radon_curve.json", body_record, kind="bodies")
    run.report(
        {"residual": result.model_dump(mode="json"), "ellipse_distance": distance},
        passed,
    )
    return _exit_code(passed)


def _cmd_multipliers(args: argparse.Namespace) -> int:
    config = _config(args)
    n, band_limit = config.dim_n, config.band_limit
    if n < 3:
        raise UsageError("multiplier tables need n >= 3")
    run = _Run("multipliers", config)
    mu = bp5_mu if config.problem == Problem.BP5 else bp8_mu
    header = ["m", "funk_lambda", "laplace", "mu", "mu_exact"]
    rows: list[list[Any]] = []
    for m in range(band_limit + 1):
        if m % 2:
            rows.append([m, None, laplace_multiplier(m, n), 0.0, "0"])
            continue
        value = mu(m, n)
        rows.append([m, float(funk_multiplier_exact(m, n)), laplace_multiplier(m, n), float(value), str(value)])
    spectrum = contraction_spectrum(config.problem, n, band_limit)
    strong = is_strong_contraction(spectrum)
    peak_degree, peak = spectrum.max_abs(4) if band_limit >= 4 else (None, 0.0)

    run.writer.write_csv(f"multipliers_{config.problem.value}.csv", header, rows)
    run.report(
        {"strong_contraction": strong, "max_abs_degree": peak_degree, "max_abs": peak},
        strong,
    )
    return _exit_code(strong)


def _cmd_make_body(args: argparse.Namespace) -> int:
    config = _config(args, dim_n=2 if args.kind == "random-2d" else None)
    grid = build_grid(config.dim_n, config.resolution)
    rng = np.random.default_rng(config.seed)
    matrix = None
    body: ConvexBody
    if args.kind == "ball":
        body = ball(grid, config.band_limit, args.radius)
    elif args.kind == "ellipsoid":
        if not args.axes or len(args.axes) != config.dim_n:
            raise UsageError(f"ellipsoid needs {config.dim_n} comma-separated --axes")
        matrix = np.diag(args.axes)
        body = ellipsoid(grid, config.band_limit, matrix=matrix)
    elif args.kind == "perturbed":
        body = perturbed_ball(grid, args.degree, args.order, args.t, config.band_limit)
    elif args.kind == "near-ball":
        body = random_near_ball(grid, config.band_limit, rng, args.delta)
    else:
        body = random_convex_body_2d(grid, rng, band_limit=config.band_limit)

    record = body_to_record(body, matrix)
    if args.kind == "ball":
        record["radius"] = args.radius
    run = _Run("make-body", config)
    info = run.writer.write_json(f"{args.name}.json", record, kind="bodies")
    run.report({"body": info["path"], "label": body.label}, None, name=f"make-body_{args.name}.json")
    return 0


def _cmd_cap_inequality(args: argparse.Namespace) -> int:
    config = _config(args, dim_n=2)
    if config.dim_n != 2:
        raise UsageError("the cap inequality is checked in the plane; use --n 2")
    grid = build_grid(2, config.resolution)
    run = _Run("cap-inequality", config)
    result = cap_inequality_sweep(
        grid, np.random.default_rng(config.seed), args.count, args.amplitude, logger=run.logger
    )
    run.report(
        {
            "bodies": result.bodies,
            "instances": result.instances,
            "violations": [v.model_dump() for v in result.violations],
            "worst_ratio": result.worst_ratio,
        },
        result.holds,
    )
    return _exit_code(result.holds)


def _cmd_cap_average(args: argparse.Namespace) -> int:
    config = _config(args)
    if config.dim_n != 3:
        raise UsageError("the cap-average check runs on the sphere; use --n 3")
    grid = build_grid(3, config.resolution)
    run = _Run("cap-average", config)
    result = cap_average_sweep(
        grid,
        config.band_limit,
        np.random.default_rng(config.seed),
        args.count,
        args.delta,
        logger=run.logger,
    )
    warnings: list[str] = []
    if result.rejected_bodies:
        warnings.append(f"redrew {result.rejected_bodies} nonconvex bodies")
    run.report(result.model_dump(mode="json"), result.holds, warnings)
    return _exit_code(result.holds)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    flags = _global_flags()
    parser = _Parser(prog="sphere-rigidity", description="Busemann-Petty rigidity experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[flags], help="Residual of a body against BP5 or BP8")
    p.add_argument("problem_arg", choices=[p.value for p in Problem], metavar="problem")
    p.add_argument("body_file")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("rigidity", parents=[flags], help="Residual slopes of perturbed balls")
    p.set_defaults(func=_cmd_rigidity)

    p = sub.add_parser("solve-ma", parents=[flags], help="Solve A(1 + φ) = 1 + γ")
    p.add_argument("gamma_file")
    p.set_defaults(func=_cmd_solve_ma)

    p = sub.add_parser("radon", parents=[flags], help="Build a Radon curve from an arc")
    p.add_argument("arc_file")
    p.set_defaults(func=_cmd_radon)

    p = sub.add_parser("multipliers", parents=[flags], help="Contraction multiplier table")
    p.set_defaults(func=_cmd_multipliers)

    p = sub.add_parser("make-body", parents=[flags], help="Write a body file")
    p.add_argument("kind", choices=["ball", "ellipsoid", "perturbed", "near-ball", "random-2d"])
    p.add_argument("--name", default="body")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--axes", type=_csv_list(float))
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--order", type=int, default=0)
    p.add_argument("--t", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.set_defaults(func=_cmd_make_body)

    p = sub.add_parser("cap-inequality", parents=[flags], help="Randomized check of the 35/ϑ cap inequality")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--amplitude", type=float, default=0.3)
    p.set_defaults(func=_cmd_cap_inequality)

    p = sub.add_parser("cap-average", parents=[flags], help="Cap-average inequality on random near-balls")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--delta", type=float, default=0.02)
    p.set_defaults(func=_cmd_cap_average)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return int(args.func(args))
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except ConvexityError as e:
        print(f"convexity error: {e}", file=sys.stderr)
        return 1
    except SphereRigidityError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
