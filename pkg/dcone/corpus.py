"""
The acceptance suite behind `dcone corpus`.

Each item is an independent check returning a pass flag and the measured numbers.
Items run on a thread pool capped by DCONE_THREADS; results are ordered by item name.
"""

import math
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from dcone import (
    analysis,
    analytic_solutions,
    classifier,
    config,
    double_cone_3d,
    fd_solver,
    fitting,
    formats,
    free_boundary,
    reports,
)
from dcone.blowup import TWO_PI
from dcone.boundary import resolve_boundary
from dcone.obstacle_model import CANONICAL_PAIR, NormalizedPair

CASE2_PAIR = NormalizedPair(-1.0, -1.0, 2.0, 0.0)
CASE3_PAIR = NormalizedPair(-1.0, -1.0, 2.0, 2.0)

EXACT_TOL = 1e-12
WEISS_CLOSED_TOL = 1e-9
WEISS_GRID_TOL = 5e-3
ORDER_RATIO = (3.0, 5.0)
FIT_ANGLE_TOL = 1e-4
FIT_ORTHOGONALITY_TOL = 1e-6
WEISS_RADIUS = 0.25

HALF_PI = 0.5 * math.pi

# Dirichlet data of the monotonicity solves, all on the canonical pair.
MONOTONICITY_BOUNDARIES = (
    "mu:{0!r},{0!r}".format(HALF_PI),
    "mu:{!r},{!r}".format(math.pi / 3.0, HALF_PI),
    "mu:{!r},{!r},rot90".format(2.0 * math.pi / 3.0, 0.25 * math.pi),
    "john",
    "halfspace:lower:-1",
    "halfspace:lower:0.5:-",
    "mu:{0!r},{0!r}+0.25*h3".format(HALF_PI),
    "mu:{!r},{!r}+-0.5*h4".format(math.pi / 3.0, HALF_PI),
    "harmonic:0,0.5",
    "p2",
)
UNIQUENESS_BOUNDARY = "mu:{0!r},{0!r}+0.25*h3".format(HALF_PI)

CorpusItem = namedtuple("CorpusItem", ["name", "passed", "detail"])


class CorpusRunner(object):
    """
    :param int n: Grid size of the acceptance-scale solves; the order study also uses (n+1)/2.
    :param SolveConfig solve_config: PSOR settings.
    :param radii: Radii of Weiss traces and rate fits.
    :param int seed: Seed of the random sample angles in verifications.
    :param int threads: Worker cap; defaults to DCONE_THREADS or the CPU count.
    """

    def __init__(self, n=257, solve_config=None, radii=None, seed=0, threads=None, verbose=False):
        if (n + 1) // 2 < 33:
            raise ValueError("The corpus needs n >= 65 so the coarse grid has at least 33 nodes.")
        self.grid = fd_solver.GridSpec(n)
        self.coarse_grid = fd_solver.GridSpec((n + 1) // 2)
        self.solve_config = solve_config or fd_solver.SolveConfig()
        self.radii = list(radii or config.DEFAULTS["radii"])
        self.seed = seed
        self.threads = threads or config.thread_limit()
        self.verbose = verbose

    def _print(self, msg):
        if self.verbose:
            print(msg)

    def _solve(self, pair, boundary_id, grid=None):
        boundary = resolve_boundary(boundary_id, pair)
        return fd_solver.solve(pair, grid or self.grid, boundary, self.solve_config)

    def items(self):
        """Item name to bound method, in report order."""
        return {
            "01_classifier_exactness": self.classifier_exactness,
            "02_trichotomy": self.trichotomy,
            "03_constructions_verify": self.constructions_verify,
            "04_weiss_levels": self.weiss_levels,
            "05_weiss_monotonicity": self.weiss_monotonicity,
            "06_solver_order": self.solver_order,
            "07_free_boundary_angles": self.free_boundary_angles,
            "08_minimal_fit": self.minimal_fit,
            "09_uniqueness_signature": self.uniqueness_signature,
            "10_verify3d": self.verify3d,
        }

    def classifier_exactness(self):
        alphas = classifier.double_cone_alphas(CASE2_PAIR)
        sector = classifier.sector_from_alpha(CASE2_PAIR, alphas.lo, "+")
        theta = classifier.opening_angle(CASE2_PAIR)
        openings = sorted(
            {
                round(width, 12)
                for cone in classifier.enumerate_double_cones(CASE2_PAIR)
                for width in cone.sector_openings()
            }
        )
        errors = {
            "alpha": abs(alphas.lo - 0.5),
            "beta": abs(abs(sector.beta) - 0.5 * math.sqrt(3.0)),
            "opening_angle": abs(theta - math.pi / 3.0),
            "cos2": abs(classifier.opening_angle_cos2(CASE2_PAIR) - 0.25),
            "sector_openings": max(
                min(abs(width - target) for width in openings)
                for target in (math.pi / 3.0, 2.0 * math.pi / 3.0)
            ),
        }
        return max(errors.values()) <= EXACT_TOL, {"errors": errors, "openings": openings}

    def trichotomy(self):
        expected = {
            "canonical": (CANONICAL_PAIR, classifier.CASE1, "infinite"),
            "case2": (CASE2_PAIR, classifier.CASE2, 4),
            "case3": (CASE3_PAIR, classifier.CASE3, 0),
        }
        detail = {}
        passed = True
        for name, (pair, tag, count) in expected.items():
            label = classifier.classify(pair)
            found = classifier.double_cone_count(pair)
            if label.tag == classifier.CASE2:
                found = len(classifier.enumerate_double_cones(pair))
            detail[name] = {"case": str(label), "double_cones": found}
            passed = passed and label.tag == tag and found == count
        upper = classifier.halfspace_direction_bounds(CASE3_PAIR, "upper")
        no_upper = upper.kind == "count" and upper.count == 0
        no_upper = no_upper and classifier.halfspace_alpha_interval(CASE3_PAIR, "upper") is None
        detail["case3_upper_halfspaces"] = 0 if no_upper else "some"
        return passed and no_upper, detail

    def _constructions(self):
        for alphas in ((-1.0, 1.0), (-0.6, -0.6), (0.0, 0.5)):
            for cone in classifier.enumerate_double_cones(CANONICAL_PAIR, *alphas):
                yield CANONICAL_PAIR, cone
        for cone in classifier.enumerate_double_cones(CASE2_PAIR):
            yield CASE2_PAIR, cone
        for pair, solutions in analytic_solutions.gallery_solutions().values():
            for solution in solutions:
                yield pair, solution

    def constructions_verify(self):
        rng = np.random.default_rng(self.seed)
        failures = []
        count = 0
        for pair, solution in self._constructions():
            count += 1
            report = analytic_solutions.verify_solution(solution, pair, rng=rng)
            if not report.passed:
                failures.append(report.as_dict())
        return not failures, {"verified": count, "failures": failures}

    def weiss_levels(self):
        quarter = 0.25 * math.pi
        closed = {
            "lower": (analytic_solutions.build_polynomial(CANONICAL_PAIR, kind="lower"), TWO_PI),
            "upper": (analytic_solutions.build_polynomial(CANONICAL_PAIR, kind="upper"), TWO_PI),
            "harmonic": (analytic_solutions.build_polynomial(CANONICAL_PAIR, (0, 1, 0)), 0.0),
            "mu": (analytic_solutions.build_mu(HALF_PI, HALF_PI), math.pi),
            "mu_skew": (analytic_solutions.build_mu(quarter, 3 * quarter, "rot90"), math.pi),
            "halfspace": (
                analytic_solutions.build_halfspace(CANONICAL_PAIR, "lower", -1.0),
                math.pi,
            ),
        }
        detail = {"closed_form": {}, "grid": {}}
        passed = True
        for name, (solution, level) in closed.items():
            value = analytic_solutions.weiss_of_blowup(solution, CANONICAL_PAIR)
            detail["closed_form"][name] = value
            passed = passed and abs(value - level) <= WEISS_CLOSED_TOL
            field = fd_solver.sample_field(CANONICAL_PAIR, self.grid, solution)
            grid_value = analysis.weiss_energy(field, WEISS_RADIUS)
            detail["grid"][name] = grid_value
            passed = passed and abs(grid_value - level) <= WEISS_GRID_TOL
        return passed, detail

    def weiss_monotonicity(self):
        detail = {}
        passed = True
        for boundary_id in MONOTONICITY_BOUNDARIES:
            field = self._solve(CANONICAL_PAIR, boundary_id)
            trace = analysis.weiss_trace(field, self.radii)
            detail[boundary_id] = {
                "min_difference": trace.min_difference,
                "converged": field.meta["converged"],
            }
            passed = passed and trace.monotone
            self._print("  {}: min dW {:.3e}".format(boundary_id, trace.min_difference))
        return passed, detail

    def solver_order(self):
        mu = analytic_solutions.build_mu(HALF_PI, HALF_PI)
        errors = []
        for grid in (self.coarse_grid, self.grid):
            field = fd_solver.solve(CANONICAL_PAIR, grid, mu, self.solve_config)
            exact = fd_solver.sample_field(CANONICAL_PAIR, grid, mu)
            errors.append(float(np.max(np.abs(field.u - exact.u))))
        ratio = errors[0] / errors[1] if errors[1] > 0 else math.inf
        passed = ORDER_RATIO[0] <= ratio <= ORDER_RATIO[1]
        return passed, {"n": [self.coarse_grid.n, self.grid.n], "errors": errors, "ratio": ratio}

    def _case2_cone_index(self):
        third = math.pi / 3.0
        cones = classifier.enumerate_double_cones(CASE2_PAIR)
        for index, cone in enumerate(cones):
            if all(abs(width - third) <= 1e-9 for width in cone.sector_openings()):
                return index
        return 0

    def free_boundary_angles(self):
        detail = {}
        passed = True
        runs = (
            ("case1", CANONICAL_PAIR, "mu:{0!r},{0!r}".format(HALF_PI)),
            ("case2", CASE2_PAIR, "double_cone:{}".format(self._case2_cone_index())),
        )
        for name, pair, boundary_id in runs:
            field = self._solve(pair, boundary_id)
            curves = free_boundary.extract_free_boundary(field)
            report = free_boundary.measure_angles(curves, pair)
            detail[name] = {"branches": curves.labels, "angles": report.as_dict()}
            passed = passed and report.passed and len(report.checks) >= 1 and len(curves) == 4
        return passed, detail

    def minimal_fit(self):
        phi1, phi2 = math.pi / 3.0, HALF_PI
        target = analytic_solutions.build_mu(phi1, phi2)
        fit = fitting.fit_minimal_double_cone(analysis.sample_ball(target), CANONICAL_PAIR)
        params = fit.solution.params
        errors = {"phi1": abs(params["phi1"] - phi1), "phi2": abs(params["phi2"] - phi2)}
        passed = max(errors.values()) <= FIT_ANGLE_TOL and params["arrangement"] == "id"
        passed = passed and max(fit.orthogonality) <= FIT_ORTHOGONALITY_TOL
        return passed, {"errors": errors, "fit": fit.as_dict()}

    def uniqueness_signature(self):
        field = self._solve(CANONICAL_PAIR, UNIQUENESS_BOUNDARY)
        signature = fitting.uniqueness_signature(field, CANONICAL_PAIR, self.radii)
        gamma = signature.rate.gamma if signature.rate is not None else None
        detail = {
            "fit": signature.fit.as_dict(),
            "radii": signature.radii,
            "distances": signature.distances,
            "decreasing": signature.decreasing,
            "gamma": gamma,
        }
        return signature.decreasing and gamma is not None and gamma > 0, detail

    def verify3d(self):
        report = double_cone_3d.verify_3d(double_cone_3d.build_3d())
        return report.passed, report.as_dict()

    def _run_item(self, name, method):
        self._print("Running {}".format(name))
        try:
            passed, detail = method()
        except Exception as e:
            passed, detail = False, {"error": "{}: {}".format(type(e).__name__, e)}
        self._print("  {} {}".format(name, "passed" if passed else "FAILED"))
        return CorpusItem(name, bool(passed), detail)

    def run(self, names=None):
        """
        :param names: Item names to run; all by default.
        :return: Results ordered by item name.
        :rtype: list[CorpusItem]
        """
        selected = self.items()
        if names is not None:
            unknown = sorted(set(names) - set(selected))
            if unknown:
                raise ValueError("Unknown corpus items: {}".format(", ".join(unknown)))
            selected = {name: selected[name] for name in names}
        workers = max(1, min(self.threads, len(selected)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                name: pool.submit(self._run_item, name, method)
                for name, method in selected.items()
            }
            results = [future.result() for future in futures.values()]
        return sorted(results, key=lambda item: item.name)

    def write(self, out, results):
        """
        Write summary.json and summary.csv into `out`.

        :return: The corpus report.
        :rtype: dict
        """
        out = Path(out)
        artifacts = {
            "summary_json": str(out / "summary.json"),
            "summary_csv": str(out / "summary.csv"),
        }
        report = reports.build_report(
            "corpus",
            reports.check_status(all(item.passed for item in results)),
            grid={"n": self.grid.n, "coarse_n": self.coarse_grid.n},
            seed=self.seed,
            items=[item._asdict() for item in results],
            artifacts=artifacts,
        )
        reports.write_report(artifacts["summary_json"], report)
        formats.write_summary_csv(artifacts["summary_csv"], results)
        return report
