"""
Command-line front end.

    superrad.py simulate --n 50 --lambda_over_gamma0 0.5 -o trace.csv
    superrad.py critical-lambda --n 1 --format json
    superrad.py analytic --n 2 --rates canonical
    superrad.py sweep --n_list 2,5,10 --lambda_list 0.5,1,2 --threads 4

Every command writes one CSV or JSON document (stdout unless --output is
given). Failures print a JSON error record on stderr and exit nonzero.
"""

import json
import sys
from typing import Dict, Optional, Sequence

import numpy as np
from absl import logging

from analysis import (
    analysis_window,
    classify_regime,
    critical_lambda_scan,
    eternal_nm_check,
    find_critical_lambda,
    local_exponent,
    reabsorption_scan,
    relaxation_time,
    simulate,
)
from arguments import RunConfig, parse_config
from model import (
    IncompleteTraceError,
    IntensityTrace,
    ParameterError,
    SuperradianceError,
    __version__,
    horizon_cap,
    markovian_rate,
)
from utils.general_utils import configure_logging
from utils.report_utils import VOLATILE_META, csv_text, emit, json_text, provenance
from utils.sweep_utils import resolve_threads, run_jobs


def _header(config: RunConfig, extra: Optional[Dict] = None) -> Dict:
    return provenance(config.command, config.params.snapshot(), __version__, extra)


def _trace_meta(trace: IntensityTrace) -> Dict:
    return {f"meta_{key}": value for key, value in trace.meta.items()
            if key != "params" and key not in VOLATILE_META and isinstance(value, (str, int, float))}


def _sample_grid(config: RunConfig, t_end: float) -> np.ndarray:
    grid = config.grid
    return np.linspace(grid.t_start, grid.t_end if grid.t_end is not None else t_end, grid.n_samples)


def _regime_summary(trace: IntensityTrace) -> Dict:
    try:
        return classify_regime(trace).to_dict()
    except IncompleteTraceError as exc:
        return {"regime": "incomplete", "message": exc.message}


def _trace_document(config: RunConfig, trace: IntensityTrace) -> str:
    summary = _regime_summary(trace)
    header = _header(config, {**_trace_meta(trace), "regime": summary["regime"]})
    if config.format == "json":
        payload = dict(summary)
        payload["emitted_energy_omega0"] = trace.emitted_energy()
        payload["n_samples"] = len(trace)
        if config.params.lam > 0:
            estimate = relaxation_time(config.params)
            payload["tau_r_over_omega0_inv"] = estimate.tau_r
            payload["markovianity_indicator"] = estimate.indicator
        return json_text(payload, header)
    columns = {
        "t": trace.times,
        "intensity": trace.intensity,
        "excitation": trace.excitation,
        "regime_flag": [summary["regime"]] * len(trace),
    }
    return csv_text(columns, header)


def _restrict(trace: IntensityTrace, t_start: float) -> IntensityTrace:
    if t_start <= 0:
        return trace
    keep = trace.times >= t_start
    total = None if trace.total_excitation is None else trace.total_excitation[keep]
    return IntensityTrace(trace.times[keep], trace.intensity[keep], trace.excitation[keep], trace.meta, total)


def run_simulate(config: RunConfig) -> str:
    from pseudomode import evolve

    p = config.params
    solver = "pseudomode" if config.solver == "auto" else config.solver
    if solver != "pseudomode":
        t_end = config.grid.t_end if config.grid.t_end is not None else analysis_window(p)
        trace = simulate(p, solver, t_end=t_end, n_samples=config.grid.n_samples)
        return _trace_document(config, _restrict(trace, config.grid.t_start))
    if config.grid.adaptive:
        trace, _ = evolve(p, t_end=config.grid.t_end)
    else:
        grid = _sample_grid(config, horizon_cap(p))
        if grid[0] > 0:
            grid = np.concatenate([[0.0], grid])
        trace, _ = evolve(p, grid)
    return _trace_document(config, _restrict(trace, config.grid.t_start))


def run_analytic(config: RunConfig) -> str:
    from analytic import build_pair_propagators, pair_rate_trace, pair_trace, single_decay_rate, single_trace

    p = config.params
    if p.n_atoms not in (1, 2):
        raise ParameterError(f"closed forms exist for N = 1 and N = 2, got N = {p.n_atoms}", invariant="n_atoms <= 2")
    if p.n_atoms == 1:
        trace = single_trace(p, None if config.grid.t_end is None else _sample_grid(config, config.grid.t_end),
                             n_samples=config.grid.n_samples)
    else:
        pp = build_pair_propagators(p, allow_degenerate=True)
        grid = None if config.grid.t_end is None else _sample_grid(config, config.grid.t_end)
        trace = pair_trace(p, grid, n_samples=config.grid.n_samples, pp=pp)
    if not config.rates:
        return _trace_document(config, _restrict(trace, config.grid.t_start))

    times = trace.times[trace.times >= config.grid.t_start]
    header = _header(config, {"rates": config.rates})
    if p.n_atoms == 1:
        columns = {"t": times, "gamma": single_decay_rate(p, times)}
    else:
        _, rates, singular = pair_rate_trace(p, times, config.rates, pp=pp)
        columns = {"t": times, **rates, "singular": singular}
    if config.format == "json":
        return json_text({name: np.asarray(values).tolist() for name, values in columns.items()}, header)
    return csv_text(columns, header)


def run_critical_lambda(config: RunConfig) -> str:
    p = config.params
    n_list = list(config.n_list) or [p.n_atoms]
    threads = resolve_threads(config.threads)
    if len(n_list) == 1:
        values = [find_critical_lambda(p.with_atoms(n_list[0]), rel_width=config.rel_width, solver=config.solver)]
    else:
        values = critical_lambda_scan(p, n_list, config.rel_width, config.solver, threads, config.quiet).tolist()
    header = _header(config, {"rel_width": config.rel_width})
    ratios = [value / p.gamma0 for value in values]
    if config.format == "json":
        if len(n_list) == 1:
            payload = {"n_atoms": n_list[0], "lambda_crit_over_gamma0": ratios[0], "lambda_crit_omega0": values[0]}
        else:
            payload = {"n_atoms": n_list, "lambda_crit_over_gamma0": ratios, "lambda_crit_omega0": values}
        return json_text(payload, header)
    return csv_text({"n_atoms": n_list, "lambda_crit_over_gamma0": ratios}, header)


def run_exponent(config: RunConfig) -> str:
    table = local_exponent(config.params, config.n_list, config.solver, resolve_threads(config.threads), config.quiet)
    rows = table.rows()
    header = _header(config, {"solver": config.solver})
    columns = {
        "n_m": [row.n_atoms for row in rows],
        "n_next": [row.n_next for row in rows],
        "max_intensity_m": [row.max_intensity for row in rows],
        "nu": [row.nu for row in rows],
    }
    if config.format == "json":
        return json_text({"max_intensity_omega0": table.max_intensity.tolist(),
                          "n_atoms": table.n_values.tolist(), "nu": table.nu.tolist()}, header)
    return csv_text(columns, header)


def run_reabsorption(config: RunConfig) -> str:
    p = config.params
    table = reabsorption_scan(p, config.n_list, config.lambdas, config.solver, resolve_threads(config.threads),
                              config.quiet)
    header = _header(config, {"solver": config.solver})
    n_rows, n_cols = table.depth.shape
    slopes = np.vstack([table.slopes, np.full((1, n_cols), np.nan)])
    columns = {
        "n_atoms": np.repeat(table.n_values, n_cols),
        "lambda_over_gamma0": np.tile(table.lambdas / p.gamma0, n_rows),
        "reabsorption_depth": table.depth.ravel(),
        "slope_to_next_n": slopes.ravel(),
    }
    if config.format == "json":
        return json_text({name: np.asarray(values).tolist() for name, values in columns.items()}, header)
    return csv_text(columns, header)


def run_eternal(config: RunConfig) -> str:
    p = config.params
    if p.lam <= 0:
        raise ParameterError("eternal-nm needs lambda > 0", invariant="lambda > 0")
    t_end = config.grid.t_end if config.grid.t_end is not None else 20.0 / p.lam
    times = np.linspace(config.grid.t_start, t_end, config.grid.n_samples)
    report = eternal_nm_check(p.gamma0, p.lam, times, dps=config.dps)
    header = _header(config, {"dps": config.dps})
    if config.format == "json":
        return json_text(report.to_dict(), header)
    columns = {
        "t": report.times,
        "tau": report.times * p.lam,
        "g": report.g_values,
        "gamma3_exact": report.gamma3_exact,
        "gamma3_leading": report.gamma3_leading,
        "relative_residual": report.relative_residual,
    }
    return csv_text(columns, header)


def _regime_job(job):
    p, solver = job
    trace = simulate(p, solver)
    summary = _regime_summary(trace)
    indicator = p.lam / (np.sqrt(p.n_atoms) * p.gamma0)
    tau_r = 2.0 / (p.n_atoms * markovian_rate(p)) if p.lam > 0 else float("nan")
    return {
        "regime": summary["regime"],
        "min_intensity": summary.get("min_intensity_omega0", float("nan")),
        "max_intensity": summary.get("max_intensity_omega0", float("nan")),
        "t_max": summary.get("t_max_over_omega0_inv", float("nan")),
        "markovianity_indicator": indicator,
        "tau_r": tau_r,
    }


def run_sweep(config: RunConfig) -> str:
    p = config.params
    n_list = list(config.n_list) or [p.n_atoms]
    lambdas = list(config.lambdas) or [p.lam]
    points = [(n, lam) for n in n_list for lam in lambdas]
    jobs = [(p.with_atoms(n).with_lambda(lam), config.solver) for n, lam in points]
    results = run_jobs(_regime_job, jobs, resolve_threads(config.threads), desc="regime sweep", quiet=config.quiet)
    header = _header(config, {"solver": config.solver})
    columns = {
        "n_atoms": [n for n, _ in points],
        "lambda_over_gamma0": [lam / p.gamma0 for _, lam in points],
        **{key: [row[key] for row in results] for key in results[0]},
    }
    if config.format == "json":
        return json_text(columns, header)
    return csv_text(columns, header)


PIPELINES = {
    "simulate": run_simulate,
    "analytic": run_analytic,
    "critical-lambda": run_critical_lambda,
    "exponent": run_exponent,
    "reabsorption": run_reabsorption,
    "eternal-nm": run_eternal,
    "sweep": run_sweep,
}


def run(config: RunConfig) -> int:
    """Execute the configured pipeline and write its document; returns the exit status."""
    if config.threads is not None and config.command in ("simulate", "analytic"):
        import numba
        numba.set_num_threads(min(config.threads, numba.config.NUMBA_NUM_THREADS))
    logging.info("%s: %s", config.command, config.params)
    text = PIPELINES[config.command](config)
    emit(text, config.output)
    return 0


def _report_error(payload: Dict) -> None:
    sys.stderr.write(json.dumps(payload, sort_keys=True, default=str) + "\n")
    sys.stderr.flush()


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_config(argv)
        configure_logging(config.verbosity, config.quiet)
        return run(config)
    except SuperradianceError as exc:
        _report_error(exc.to_dict())
        return 1
    except (ValueError, ArithmeticError, MemoryError, RuntimeError, OSError) as exc:
        _report_error({"error": type(exc).__name__, "message": str(exc)})
        return 2


if __name__ == "__main__":
    sys.exit(main())
