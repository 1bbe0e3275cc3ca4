"""
dcone command line interface.
"""

import functools
from pathlib import Path

import click
import numpy as np

from dcone import (
    analysis,
    analytic_solutions,
    classifier,
    double_cone_3d,
    fd_solver,
    fitting,
    formats,
    free_boundary,
    reports,
)
from dcone.blowup import solution_from_dict
from dcone.boundary import resolve_boundary
from dcone.config import RunConfig, load_run_config
from dcone.corpus import CorpusRunner
from dcone.exception import (
    AmbiguousEnergyError,
    InadmissibleHalfspaceError,
    InsufficientCurvesError,
    InvalidConfigError,
    NoCurveError,
    NoHalfspaceFamilyError,
    NonCanonicalPairError,
    NotCase1Or2Error,
)
from dcone.obstacle_model import ObstaclePair, normalize, reduce_case1

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2
DEFAULT_OUT = "dcone_out"


def _load_pair(cfg):
    """
    :return: (pair as given, normalized pair, its transform record, record stored in the file)
    """
    original, stored = formats.read_pair(cfg.pair)
    normalized, record = normalize(original)
    return original, normalized, record, stored


def _out_dir(cfg, required=False):
    if cfg.out is None and not required:
        return None
    out = Path(cfg.out or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(command, cfg, status, filename, **sections):
    """Build the report and, when there is an output directory, write it there too."""
    out = _out_dir(cfg, required="artifacts" in sections)
    if out is not None:
        sections.setdefault("artifacts", {})["report"] = str(out / filename)
    report = reports.build_report(command, status, **sections)
    reports.validate_report(report)
    if out is not None:
        reports.write_report(out / filename, report)
    return report


def _classify(cfg, verbose):
    original, normalized, record, stored = _load_pair(cfg)
    summary = classifier.summarize(normalized)
    label = summary.label
    sections = {
        "pair": original.as_dict(),
        "normalized": normalized.as_dict(),
        "transform": record.as_dict(),
        "case": dict(label.as_dict(), label=str(label)),
        "alphas": summary.alphas.as_dict(),
        "opening_angle": summary.opening_angle,
        "double_cone_count": summary.count,
        "halfspace": {
            which: {
                "bound": bound.as_dict(),
                "alpha_interval": classifier.halfspace_alpha_interval(normalized, which),
            }
            for which, bound in (("lower", summary.lower), ("upper", summary.upper))
        },
    }
    if stored is not None:
        sections["stored_transform"] = stored.as_dict()
    if summary.opening_angle is not None:
        sections["opening_angle_deg"] = np.degrees(summary.opening_angle)
    if label.tag == classifier.CASE2:
        sections["cos2"] = classifier.opening_angle_cos2(normalized)
    if label.tag == classifier.CASE1:
        reduced, reduction = reduce_case1(normalized, record)
        sections["reduction"] = {"pair": reduced.as_dict(), "transform": reduction.as_dict()}

    out = _out_dir(cfg)
    if out is not None:
        path = formats.write_pair(out / "normalized.json", normalized.as_pair(), record)
        sections["artifacts"] = {"normalized_pair": str(path)}
    return _finish("classify", cfg, reports.SUCCESS, "classify.json", **sections)


def _default_solutions(pair, alphas):
    label = classifier.classify(pair)
    solutions = []
    if label.tag != classifier.CASE3:
        alpha1, alpha2 = alphas
        if label.tag == classifier.CASE1:
            window = classifier.double_cone_alphas(pair)
            alpha1 = 0.5 * (window.lo + window.hi) if alpha1 is None else alpha1
        solutions.extend(classifier.enumerate_double_cones(pair, alpha1, alpha2))
    for which in ("lower", "upper"):
        interval = classifier.halfspace_alpha_interval(pair, which)
        if interval is None:
            continue
        for alpha in sorted(set(interval)):
            try:
                solutions.append(analytic_solutions.build_halfspace(pair, which, alpha))
            except InadmissibleHalfspaceError:
                continue
    solutions.append(analytic_solutions.build_polynomial(pair, kind="lower"))
    solutions.append(analytic_solutions.build_polynomial(pair, kind="upper"))
    return solutions


def _constructed(cfg):
    """:return: (normalized pair, solutions, gallery name or None)"""
    if cfg.gallery is not None:
        gallery = analytic_solutions.gallery_solutions()
        if cfg.gallery not in gallery:
            expected = ", ".join(sorted(gallery))
            raise ValueError(
                "Unknown gallery entry '{}', expected one of {}.".format(cfg.gallery, expected)
            )
        pair, solutions = gallery[cfg.gallery]
        return pair, solutions, cfg.gallery
    _, normalized, _, _ = _load_pair(cfg)
    return normalized, _default_solutions(normalized, cfg.alphas), None


def _construct(cfg, verbose):
    pair, solutions, gallery = _constructed(cfg)
    entries = [
        {"solution": s.as_dict(), "weiss": analytic_solutions.weiss_of_blowup(s, pair)}
        for s in solutions
    ]
    sections = {"pair": pair.as_dict(), "solutions": entries}
    if gallery is not None:
        sections["gallery"] = gallery
    out = _out_dir(cfg)
    if out is not None:
        document = {"pair": pair.as_dict(), "solutions": entries}
        path = formats.write_json(out / "solutions.json", document)
        sections["artifacts"] = {"solutions": str(path)}
    return _finish("construct", cfg, reports.SUCCESS, "construct.json", **sections)


def _verify(cfg, verbose):
    if cfg.solutions is not None:
        data = formats.read_json(cfg.solutions)
        try:
            pair, _ = normalize(ObstaclePair.from_dict(data["pair"]))
            solutions = [solution_from_dict(entry["solution"]) for entry in data["solutions"]]
        except (KeyError, TypeError) as e:
            raise ValueError("{} is not a solutions file: missing {}".format(cfg.solutions, e))
    else:
        pair, solutions, _ = _constructed(cfg)
    rng = np.random.default_rng(cfg.seed)
    verifications = [
        analytic_solutions.verify_solution(solution, pair, rng=rng).as_dict()
        for solution in solutions
    ]
    passed = all(item["passed"] for item in verifications)
    return _finish(
        "verify",
        cfg,
        reports.check_status(passed),
        "verify.json",
        pair=pair.as_dict(),
        seed=cfg.seed,
        verifications=verifications,
    )


def _solve(cfg, verbose):
    _, normalized, record, _ = _load_pair(cfg)
    grid = fd_solver.GridSpec(cfg.n, cfg.L)
    solve_config = fd_solver.SolveConfig(cfg.omega, cfg.tol, cfg.max_iters, cfg.sweep, cfg.mask_tol)
    boundary = resolve_boundary(cfg.boundary, normalized)
    field = fd_solver.solve(normalized, grid, boundary, solve_config, verbose)

    ordering = max(float(np.max(field.psi1 - field.u)), float(np.max(field.u - field.psi2)), 0.0)
    checks = [
        {
            "name": "converged",
            "value": field.meta["residual"],
            "tolerance": field.meta["tol"],
            "passed": bool(field.meta["converged"]),
        },
        {"name": "ordering", "value": ordering, "tolerance": 1e-12, "passed": ordering <= 1e-12},
    ]
    sections = {
        "pair": normalized.as_dict(),
        "transform": record.as_dict(),
        "grid": grid.as_dict(),
        "solver": field.meta,
        "boundary": boundary.label,
        "residual": fd_solver.residual_report(field)._asdict(),
        "checks": checks,
    }
    if boundary.solution is not None:
        exact = fd_solver.sample_field(normalized, grid, boundary.solution)
        sections["exact_error"] = float(np.max(np.abs(field.u - exact.u)))

    out = _out_dir(cfg, required=True)
    sections["artifacts"] = {"field": str(formats.write_field_csv(out / "field.csv", field))}
    passed = all(check["passed"] for check in checks)
    return _finish("solve", cfg, reports.check_status(passed), "solve.json", **sections)


def _read_field(cfg):
    if cfg.field is None:
        raise ValueError("This command needs a field CSV (--field).")
    return formats.read_field_csv(cfg.field, cfg.mask_tol)


def _trace_dict(trace):
    return dict(trace._asdict())


def _weiss(cfg, verbose):
    field = _read_field(cfg)
    trace = analysis.weiss_trace(field, cfg.radii)
    out = _out_dir(cfg, required=True)
    path = formats.write_trace_csv(out / "trace.csv", trace)
    return _finish(
        "weiss",
        cfg,
        reports.check_status(trace.monotone),
        "weiss.json",
        field=cfg.field,
        trace=_trace_dict(trace),
        artifacts={"trace": str(path)},
    )


def _harmonic_candidate(rescaled, pair):
    """Least-squares harmonic quadratic, if it lies between the obstacles."""
    ball = rescaled.ball
    basis = np.column_stack([ball.x1**2 - ball.x2**2, 2.0 * ball.x1 * ball.x2])
    root = np.sqrt(ball.weights)
    coefficients, *_ = np.linalg.lstsq(basis * root[:, None], rescaled.values * root, rcond=None)
    a_h, b_h = (float(c) for c in coefficients)
    try:
        return analytic_solutions.build_polynomial(pair, (a_h, b_h, -a_h))
    except ValueError:
        return None


def _blowup_fits(rescaled, pair):
    fits = {}
    notes = []
    try:
        fits["double_cone"] = fitting.fit_minimal_double_cone(rescaled, pair)
    except (NotCase1Or2Error, NonCanonicalPairError) as e:
        notes.append(str(e))
    for which in ("lower", "upper"):
        try:
            fits["halfspace_" + which] = fitting.fit_halfspace(rescaled, pair, which)
        except NoHalfspaceFamilyError as e:
            notes.append(str(e))
    polynomials = {
        "polynomial_lower": analytic_solutions.build_polynomial(pair, kind="lower"),
        "polynomial_upper": analytic_solutions.build_polynomial(pair, kind="upper"),
        "polynomial_harmonic": _harmonic_candidate(rescaled, pair),
    }
    for name, solution in polynomials.items():
        if solution is not None:
            fits[name] = fitting.FitResult(solution, analysis.l2_distance(rescaled, solution))
    return fits, notes


def _agrees(energy_name, best):
    if energy_name == analysis.HALFSPACE_OR_DOUBLE_CONE:
        return best.family in ("halfspace", "double_cone")
    if energy_name == analysis.COINCIDENCE_POLYNOMIAL:
        return best.family == "polynomial" and best.solution.params["kind"] != "harmonic"
    if energy_name == analysis.POLYNOMIAL_HARMONIC:
        return best.family == "polynomial" and best.solution.params["kind"] == "harmonic"
    return False


def _curve_filename(label):
    return "curve_{}.csv".format(label.lower().replace("+", "_plus").replace("-", "_minus"))


def _blowup(cfg, verbose):
    field = _read_field(cfg)
    _, pair, _, _ = _load_pair(cfg)
    radii = cfg.radii
    out = _out_dir(cfg, required=True)
    artifacts = {}

    trace = analysis.weiss_trace(field, radii)
    w_limit = trace.values[-1]
    try:
        energy = dict(analysis.classify_blowup_energy(w_limit, pair)._asdict())
    except AmbiguousEnergyError as e:
        energy = {"name": None, "message": str(e)}
    energy["w_limit"] = w_limit

    fits, notes = _blowup_fits(analysis.rescale(field, min(radii)), pair)
    best_name = min(fits, key=lambda name: fits[name].distance)
    best = fits[best_name]
    try:
        rate = analysis.convergence_rate(field, best.solution, radii)
        gamma = rate.gamma
    except ValueError as e:
        notes.append(str(e))
        gamma = None

    curves_section = {}
    angles = None
    try:
        curves = free_boundary.extract_free_boundary(field)
    except NoCurveError as e:
        notes.append(str(e))
    else:
        curves_section = curves.as_dict()
        for label in curves.labels:
            path = formats.write_polyline_csv(out / _curve_filename(label), curves[label].points)
            curves_section[label]["polyline"] = str(path)
            artifacts[label] = str(path)
        try:
            angles = free_boundary.measure_angles(curves, pair).as_dict()
        except InsufficientCurvesError as e:
            notes.append(str(e))

    checks = [
        {
            "name": "weiss_monotone",
            "value": trace.min_difference,
            "tolerance": trace.slack,
            "passed": bool(trace.monotone),
        },
        {
            "name": "energy_fit_agreement",
            "value": best_name,
            "tolerance": None,
            "passed": _agrees(energy["name"], best),
        },
    ]
    if angles is not None:
        for check in angles["checks"]:
            checks.append(
                {
                    "name": "angle " + check["name"],
                    "value": check["deviation"],
                    "tolerance": angles["tolerance_deg"],
                    "passed": check["passed"],
                }
            )
    passed = all(check["passed"] for check in checks)
    best_fit = dict(best.as_dict(), name=best_name, gamma=gamma)
    return _finish(
        "blowup",
        cfg,
        reports.check_status(passed),
        "blowup.json",
        field=cfg.field,
        pair=pair.as_dict(),
        trace=_trace_dict(trace),
        energy_class=energy,
        best_fit=best_fit,
        fits={name: fit.as_dict() for name, fit in sorted(fits.items())},
        curves=curves_section,
        angles=angles,
        checks=checks,
        notes=notes,
        artifacts=artifacts,
    )


def _verify3d(cfg, verbose):
    solution = double_cone_3d.build_3d(cfg.a1, cfg.a2)
    report = double_cone_3d.verify_3d(solution)
    return _finish(
        "verify3d",
        cfg,
        reports.check_status(report.passed),
        "verify3d.json",
        solution=solution.as_dict(),
        checks=report.as_dict()["checks"],
    )


def _corpus(cfg, verbose):
    solve_config = fd_solver.SolveConfig(cfg.omega, cfg.tol, cfg.max_iters, cfg.sweep, cfg.mask_tol)
    runner = CorpusRunner(cfg.n, solve_config, cfg.radii, cfg.seed, cfg.threads, verbose)
    results = runner.run()
    return runner.write(_out_dir(cfg, required=True), results)


COMMANDS = {
    "classify": _classify,
    "construct": _construct,
    "verify": _verify,
    "solve": _solve,
    "weiss": _weiss,
    "blowup": _blowup,
    "verify3d": _verify3d,
    "corpus": _corpus,
}


def run(cfg, verbose=False):
    """
    Run one subcommand.

    :param RunConfig cfg: Configuration naming the subcommand.
    :param bool verbose: Print progress.
    :return: The report; artifacts are on disk.
    :rtype: dict
    """
    if cfg.subcommand not in COMMANDS:
        raise InvalidConfigError("subcommand", "expected one of {}".format(", ".join(COMMANDS)))
    return COMMANDS[cfg.subcommand](cfg, verbose)


def exit_code(report):
    return {reports.FAIL: EXIT_FAIL, reports.ERROR: EXIT_ERROR}.get(report["status"], EXIT_OK)


def _execute(subcommand, config_path, overrides, output_json, verbose):
    try:
        cfg = load_run_config(config_path) if config_path else RunConfig()
        if cfg.subcommand not in (None, subcommand):
            raise InvalidConfigError(
                "subcommand", "file is for '{}', not '{}'".format(cfg.subcommand, subcommand)
            )
        cfg = cfg.merged(dict(overrides, subcommand=subcommand))
        report = run(cfg, verbose)
    except (ValueError, OSError) as e:
        report = reports.error_report(subcommand, e)
    print(reports.render(report, output_json))
    click.get_current_context().exit(exit_code(report))


def _parse_radii(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(
            "expected a comma-separated list of numbers, got {!r}".format(value)
        )


def common_options(func):
    """--config, --out, --json and --verbose, shared by every command."""

    @click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        help="YAML or JSON run configuration; flags take precedence",
    )
    @click.option("--out", type=click.Path(file_okay=False), help="Output directory")
    @click.option("--json", "output_json", is_flag=True, help="Output result as JSON")
    @click.option("--verbose", "-v", is_flag=True, help="Show progress")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


pair_option = click.option("--pair", help="Pair JSON file, or a shipped pair name such as case2")
field_option = click.option(
    "--field",
    type=click.Path(exists=True, dir_okay=False),
    help="Field CSV written by 'dcone solve'",
)
radii_option = click.option(
    "--radii", callback=_parse_radii, help="Comma-separated decreasing radii, e.g. 0.4,0.3,0.2"
)
seed_option = click.option(
    "--seed", type=click.IntRange(min=0), help="Seed for random sample angles"
)


def solver_options(func):
    """Grid and PSOR flags."""

    @click.option("--n", type=int, help="Nodes per axis (odd, at least 33)")
    @click.option("--L", "half_width", type=float, help="Half-width of the square domain")
    @click.option("--omega", type=float, help="Relaxation factor in (1, 2)")
    @click.option("--tol", type=float, help="Projected residual tolerance")
    @click.option("--max-iters", type=int, help="Sweep cap")
    @click.option("--sweep", type=click.Choice(["lexicographic", "red_black"]), help="Sweep order")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def _grid_overrides(n, half_width, omega, tol, max_iters, sweep):
    return {
        "grid": {"n": n, "L": half_width},
        "solver": {"omega": omega, "tol": tol, "max_iters": max_iters, "sweep": sweep},
    }


@click.group()
@click.version_option(package_name="dcone")
def cli():
    """
    dcone: blow-ups of the two-dimensional polynomial double obstacle problem.
    """
    pass


@cli.command()
@pair_option
@common_options
def classify(pair, config_path, out, output_json, verbose):
    """
    Classify an obstacle pair into Case 1, 2 or 3.
    """
    _execute("classify", config_path, {"pair": pair, "out": out}, output_json, verbose)


@cli.command()
@pair_option
@click.option("--gallery", help="Emit a named example set instead, e.g. case2_double_cones")
@click.option("--alpha1", type=float, help="α of the sector running from p² to p¹ (Case 1)")
@click.option("--alpha2", type=float, help="α of the sector running from p¹ to p² (Case 1)")
@common_options
def construct(pair, gallery, alpha1, alpha2, config_path, out, output_json, verbose):
    """
    Build the closed-form blow-up solutions of a pair.
    """
    overrides = {"pair": pair, "gallery": gallery, "alpha1": alpha1, "alpha2": alpha2, "out": out}
    _execute("construct", config_path, overrides, output_json, verbose)


@cli.command()
@pair_option
@click.option("--gallery", help="Verify a named example set")
@click.option("--alpha1", type=float, help="α of the sector running from p² to p¹ (Case 1)")
@click.option("--alpha2", type=float, help="α of the sector running from p¹ to p² (Case 1)")
@click.option(
    "--solutions",
    type=click.Path(exists=True, dir_okay=False),
    help="solutions.json written by 'dcone construct --out'",
)
@seed_option
@common_options
def verify(pair, gallery, alpha1, alpha2, solutions, seed, config_path, out, output_json, verbose):
    """
    Check closed-form solutions for ordering, harmonicity, C¹ matching and complementarity.
    """
    overrides = {
        "pair": pair,
        "gallery": gallery,
        "alpha1": alpha1,
        "alpha2": alpha2,
        "solutions": solutions,
        "seed": seed,
        "out": out,
    }
    _execute("verify", config_path, overrides, output_json, verbose)


@cli.command()
@pair_option
@click.option("--boundary", help="Builtin solution id (optionally +EPS*h3 or +EPS*h4) or field CSV")
@solver_options
@common_options
def solve(
    pair,
    boundary,
    n,
    half_width,
    omega,
    tol,
    max_iters,
    sweep,
    config_path,
    out,
    output_json,
    verbose,
):
    """
    Solve the double obstacle problem on a grid with projected SOR.

    Writes field.csv and solve.json to the output directory.
    """
    overrides = _grid_overrides(n, half_width, omega, tol, max_iters, sweep)
    overrides.update(pair=pair, boundary=boundary, out=out)
    _execute("solve", config_path, overrides, output_json, verbose)


@cli.command()
@field_option
@radii_option
@common_options
def weiss(field, radii, config_path, out, output_json, verbose):
    """
    Weiss energy trace of a solved field; writes trace.csv (r, W, dW).
    """
    overrides = {"field": field, "radii": radii, "out": out}
    _execute("weiss", config_path, overrides, output_json, verbose)


@cli.command()
@field_option
@pair_option
@radii_option
@common_options
def blowup(field, pair, radii, config_path, out, output_json, verbose):
    """
    Blow-up analysis of a solved field: energy class, best fit, rate and free-boundary angles.
    """
    overrides = {"field": field, "pair": pair, "radii": radii, "out": out}
    _execute("blowup", config_path, overrides, output_json, verbose)


@cli.command()
@click.option("--a1", type=float, help="Lower obstacle constant (default -1)")
@click.option("--a2", type=float, help="Upper obstacle constant (default 1)")
@common_options
def verify3d(a1, a2, config_path, out, output_json, verbose):
    """
    Build and verify the axisymmetric double cone in three dimensions.
    """
    _execute("verify3d", config_path, {"a1": a1, "a2": a2, "out": out}, output_json, verbose)


@cli.command()
@radii_option
@seed_option
@solver_options
@common_options
def corpus(
    radii, seed, n, half_width, omega, tol, max_iters, sweep, config_path, out, output_json, verbose
):
    """
    Run the acceptance suite; writes summary.json and summary.csv.

    DCONE_THREADS caps the number of items run at once.
    """
    overrides = _grid_overrides(n, half_width, omega, tol, max_iters, sweep)
    overrides.update(radii=radii, seed=seed, out=out)
    _execute("corpus", config_path, overrides, output_json, verbose)


if __name__ == "__main__":
    cli()
