"""Benchmark harness: the four BEM experiments and the analytic-pair suite.

Each experiment inverts the boundary element solution of the transformed
diffusion benchmark at one observation point, for every requested
inversion method, and accounts for exactly how many image-function
evaluations (BEM solves) each method consumed.  CSV output is
deterministic and byte-stable for a fixed configuration.

Flux sign convention: the reported flux is the x-component of -grad(phi)
at the observation point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import bem, oracles
from .core import (FLAG_UNDEFINED_BEFORE_DELAY, CountingImage, SamplingStrategy,
                   TimeGrid, evaluate_image, invert_all, make_time_grid,
                   plan_samples)

ALL_METHODS = ("stehfest", "schapery", "weeks", "talbot", "dehoog")
SHARED_METHODS = ("schapery", "weeks", "talbot", "dehoog")

#: experiment id -> (behavior, strategy, default methods, default terms)
EXPERIMENT_DEFAULTS = {
    "A": (oracles.HEAVISIDE, SamplingStrategy.PER_TIME_OPTIMAL, ALL_METHODS, 9),
    "B": (oracles.HEAVISIDE, SamplingStrategy.SHARED_GLOBAL, SHARED_METHODS, 51),
    "C": (oracles.COSINE4T, SamplingStrategy.SHARED_GLOBAL, SHARED_METHODS, 51),
    "D": (oracles.DELAYED_STEP, SamplingStrategy.SHARED_GLOBAL, SHARED_METHODS, 51),
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    methods: tuple = ()
    terms: int = 0
    n_times: int = 15
    t_min: float = 0.01
    t_max: float = 10.0
    observation: tuple = (1.0 / 3.0, 1.0)
    n_per_unit: int = 8
    alpha: float = 1.0
    workers: int = 2
    fd_nx: int = 300
    fd_dt: float = 1e-3

    def resolved(self) -> "ExperimentConfig":
        """Fill defaults from the experiment id and validate compatibility."""
        if self.experiment not in EXPERIMENT_DEFAULTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose from {sorted(EXPERIMENT_DEFAULTS)}")
        behavior, strategy, methods, terms = EXPERIMENT_DEFAULTS[self.experiment]
        out = self
        if not out.methods:
            out = replace(out, methods=methods)
        if out.terms <= 0:
            out = replace(out, terms=terms)
        for m in out.methods:
            if m not in ALL_METHODS:
                raise ConfigError(f"unknown method {m!r}")
        if strategy is not SamplingStrategy.PER_TIME_OPTIMAL and "stehfest" in out.methods:
            raise ConfigError(
                "stehfest cannot join shared-sample experiments: its sample "
                "points depend explicitly on t")
        if not (0 < self.t_min < self.t_max):
            raise ConfigError("need 0 < t_min < t_max")
        return out

    @property
    def behavior(self) -> oracles.TimeBehavior:
        return EXPERIMENT_DEFAULTS[self.experiment][0]

    @property
    def strategy(self) -> SamplingStrategy:
        return EXPERIMENT_DEFAULTS[self.experiment][1]


class BemImage:
    """Image function of the benchmark: observation potential and flux.

    One boundary element solve per Laplace parameter yields both the
    potential and the x-flux transfer at the observation point; both are
    multiplied by the boundary behavior's image fbar_t(p).  The call
    counter measures actual solves, which the planner's deduplicated
    total must match.
    """

    def __init__(self, mesh: bem.BoundaryMesh, observation, behavior, alpha=1.0):
        self._counting = CountingImage(self._solve, sigma=behavior.sigma)
        self.mesh = mesh
        self.observation = tuple(observation)
        self.behavior = behavior
        self.alpha = alpha

    @property
    def calls(self) -> int:
        return self._counting.calls

    @property
    def sigma(self) -> float:
        return self._counting.sigma

    def _solve(self, p: complex):
        q = np.sqrt(p / self.alpha)
        system = bem.assemble(self.mesh, q)
        solution = bem.solve_boundary(system, self.mesh, 1.0)
        phi, grad, _ = bem.eval_interior(solution, self.mesh, self.observation)
        ft = self.behavior.image(p)
        return np.array([phi, -grad[0]]) * ft

    def __call__(self, p: complex):
        return self._counting(p)


@dataclass
class MethodRun:
    method: str
    potential: np.ndarray
    flux: np.ndarray
    flags: tuple
    evaluations_raw: int
    evaluations_planned: int
    evaluations_measured: int
    per_time_evaluations: tuple


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    grid: TimeGrid
    runs: dict
    reference_series: tuple | None
    reference_fd: tuple
    summary: list = field(default_factory=list)

    @property
    def reference(self) -> tuple:
        """Preferred reference columns (series when available, else FD)."""
        return self.reference_series if self.reference_series is not None else self.reference_fd


def _normalized_max_error(values: np.ndarray, reference: np.ndarray) -> float:
    scale = float(np.max(np.abs(reference)))
    if scale == 0:
        scale = 1.0
    finite = np.isfinite(values)
    if not finite.any():
        return math.inf
    return float(np.max(np.abs(values[finite] - reference[finite])) / scale)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run one benchmark experiment for every requested method.

    Per method: plan the Laplace samples, evaluate the BEM image once per
    distinct p, invert every grid time, and record per-time flags plus the
    evaluation accounting.  Reference columns come from the eigenfunction
    series (step-type behaviors) and the Crank-Nicolson march.
    """
    config = config.resolved()
    behavior = config.behavior
    grid = make_time_grid(config.t_min, config.t_max, config.n_times, "logarithmic")
    mesh = bem.benchmark_rectangle_mesh(config.n_per_unit)
    x_obs = config.observation[0]

    runs = {}
    for method in config.methods:
        image = BemImage(mesh, config.observation, behavior, config.alpha)
        plan = plan_samples(method, grid, config.terms, config.strategy,
                            sigma=behavior.sigma)
        samples = evaluate_image(plan, image, workers=config.workers)
        result = invert_all(method, samples, grid)
        if image.calls != plan.total_evaluations:
            raise RuntimeError(
                f"evaluation accounting broke for {method}: measured "
                f"{image.calls}, planned {plan.total_evaluations}")
        flags = list(result.flags)
        if behavior.tau > 0 and method == "weeks":
            # continuous basis functions cannot represent the dead time
            for i, t in enumerate(grid.times):
                if t < behavior.tau:
                    flags[i] = flags[i] + (FLAG_UNDEFINED_BEFORE_DELAY,)
        runs[method] = MethodRun(
            method=method,
            potential=result.values[:, 0],
            flux=result.values[:, 1],
            flags=tuple(flags),
            evaluations_raw=plan.raw_evaluations,
            evaluations_planned=plan.total_evaluations,
            evaluations_measured=result.evaluations_measured,
            per_time_evaluations=result.per_time_evaluations,
        )

    if behavior.name == oracles.COSINE4T.name:
        series = None
    else:
        sv = [oracles.benchmark_time_series_1d(x_obs, t, behavior) for t in grid.times]
        series = (np.array([s.potential for s in sv]),
                  np.array([s.flux for s in sv]))
    fd = oracles.crank_nicolson_1d(x_obs, grid, behavior,
                                   nx=config.fd_nx, dt=config.fd_dt,
                                   alpha=config.alpha)
    result = ExperimentResult(config=config, grid=grid, runs=runs,
                              reference_series=series,
                              reference_fd=(fd.potential, fd.flux))
    ref_pot, ref_flux = result.reference
    for method in config.methods:
        run = runs[method]
        result.summary.append({
            "experiment": config.experiment,
            "method": method,
            "terms": config.terms,
            "evaluations_raw": run.evaluations_raw,
            "evaluations_planned": run.evaluations_planned,
            "evaluations_measured": run.evaluations_measured,
            "max_err_potential": _normalized_max_error(run.potential, ref_pot),
            "max_err_flux": _normalized_max_error(run.flux, ref_flux),
            "flagged_times": sum(1 for f in run.flags if f),
        })
    return result


def write_experiment_csv(result: ExperimentResult, stream) -> None:
    """Rows: t,method,potential,flux,flag (methods first, then references)."""
    stream.write("# invlap experiment %s; flux is the x-component of "
                 "-grad(phi) at the observation point\n" % result.config.experiment)
    stream.write("t,method,potential,flux,flag\n")

    def fmt(v: float) -> str:
        return f"{v:.12e}"

    for method in result.config.methods:
        run = result.runs[method]
        for i, t in enumerate(result.grid.times):
            flag = "+".join(run.flags[i]) if run.flags[i] else "ok"
            stream.write(f"{fmt(t)},{method},{fmt(run.potential[i])},"
                         f"{fmt(run.flux[i])},{flag}\n")
    refs = [("reference-fd", result.reference_fd)]
    if result.reference_series is not None:
        refs.insert(0, ("reference-series", result.reference_series))
    for name, (pot, flux) in refs:
        for i, t in enumerate(result.grid.times):
            stream.write(f"{fmt(t)},{name},{fmt(pot[i])},{fmt(flux[i])},ok\n")


def write_summary_csv(summaries: list, stream) -> None:
    stream.write("experiment,method,terms,evaluations_raw,evaluations_planned,"
                 "evaluations_measured,max_err_potential,max_err_flux,flagged_times\n")
    for row in summaries:
        stream.write(
            f"{row['experiment']},{row['method']},{row['terms']},"
            f"{row['evaluations_raw']},{row['evaluations_planned']},"
            f"{row['evaluations_measured']},{row['max_err_potential']:.6e},"
            f"{row['max_err_flux']:.6e},{row['flagged_times']}\n")


def write_gnuplot(result: ExperimentResult, directory) -> list:
    """Optional whitespace-separated files, one per method plus references."""
    import pathlib

    directory = pathlib.Path(directory)
    written = []
    columns = {m: (result.runs[m].potential, result.runs[m].flux)
               for m in result.config.methods}
    columns["reference-fd"] = result.reference_fd
    if result.reference_series is not None:
        columns["reference-series"] = result.reference_series
    for name, (pot, flux) in columns.items():
        path = directory / f"experiment_{result.config.experiment}_{name}.dat"
        with open(path, "w") as fh:
            fh.write("# t potential flux\n")
            for i, t in enumerate(result.grid.times):
                fh.write(f"{t:.12e} {pot[i]:.12e} {flux[i]:.12e}\n")
        written.append(path)
    return written


def run_pairs_benchmark(methods, pairs, terms: int, grid: TimeGrid) -> list:
    """Per (method, pair) accuracy on closed-form transforms.

    Isolates algorithm error from PDE discretization error.  Stehfest
    plans per time; the complex-contour methods share one sample vector
    across the grid.  Errors are pointwise relative to the true inverse.
    """
    rows = []
    for method in methods:
        strategy = (SamplingStrategy.PER_TIME_OPTIMAL if method == "stehfest"
                    else SamplingStrategy.SHARED_GLOBAL)
        for pair in pairs:
            image = CountingImage(pair.image, sigma=pair.sigma)
            plan = plan_samples(method, grid, terms, strategy, sigma=pair.sigma)
            samples = evaluate_image(plan, image)
            result = invert_all(method, samples, grid)
            ref = np.array([float(pair.time_function(t)) for t in grid.times])
            err = np.abs(result.values - ref) / np.maximum(np.abs(ref), 1e-300)
            rows.append({
                "method": method,
                "pair": pair.name,
                "max_rel_err": float(np.max(err)),
                "mean_rel_err": float(np.mean(err)),
                "evaluations": image.calls,
            })
    return rows


def write_pairs_csv(rows: list, stream) -> None:
    stream.write("method,pair,max_rel_err,mean_rel_err,evaluations\n")
    for row in rows:
        stream.write(f"{row['method']},{row['pair']},{row['max_rel_err']:.6e},"
                     f"{row['mean_rel_err']:.6e},{row['evaluations']}\n")
