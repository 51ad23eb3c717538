"""
Experiment runner: run, sweep and compare.

One experiment derives its dataset and its initial cluster from the spec seed, runs one solver
and writes every artifact needed to redraw the threshold and evaluation curves without
re-running the model. Solvers sharing a seed share both the dataset and the start matrix.
"""

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

import cgnsolve
from cgnsolve.core.constants import (
    CLUSTER_FINAL_CSV,
    COMPARISON_CSV,
    EVAL_CURVE_CSV,
    HISTORY_CSV,
    LM_RESULTS_CSV,
    PARAMETER_SPREAD_CSV,
    SOLVER_CGN,
    SPEC_JSON,
    SUMMARY_JSON,
    SWEEP_AXES,
    SWEEP_CURVES_CSV,
    THRESHOLD_CURVE_CSV,
    TRACE_CSV,
)
from cgnsolve.core.utils import ArtifactError, ConfigError, ContractViolationError, logger
from cgnsolve.harness.artifacts import (
    EvalCurve,
    ThresholdCurve,
    ensure_dir,
    read_csv,
    read_dataset,
    read_json,
    start_matrix_hash,
    write_csv,
    write_dataset,
    write_json,
)
from cgnsolve.harness.spec import ExperimentSpec
from cgnsolve.problems.base import Problem
from cgnsolve.problems.datasets import Dataset, apply_dataset, make_dataset_for
from cgnsolve.problems.registry import problem_template
from cgnsolve.solvers import baseline, cgn


@dataclass(frozen=True)
class ExperimentResult:
    output_dir: Path
    summary: Dict[str, Any]
    threshold_curve: ThresholdCurve
    eval_curve: EvalCurve


def prepare(spec: ExperimentSpec) -> Tuple[Problem, Dataset]:
    """Problem fitted against the spec's dataset (loaded from ``dataset_dir`` or generated)."""
    template = problem_template(spec.problem_id, spec.scale)
    if spec.dataset_dir:
        dataset = read_dataset(Path(spec.dataset_dir))
        if dataset.problem_id != template.problem_id:
            raise ConfigError(f"dataset in {spec.dataset_dir} belongs to {dataset.problem_id}, not {template.problem_id}")
    else:
        dataset = make_dataset_for(template, None, spec.noise_sd_frac, spec.seed)
    try:
        return apply_dataset(template, dataset), dataset
    except ContractViolationError as e:
        raise ConfigError(str(e)) from e


def _x_columns(problem: Problem) -> List[str]:
    names = problem.param_names or tuple(f"p{j + 1}" for j in range(problem.dim_x))
    return [f"x_{name}" for name in names]


def _write_cluster_final(path: Path, problem: Problem, X: np.ndarray, ssr: np.ndarray, lam: np.ndarray, frozen: np.ndarray) -> None:
    header = ["index", *_x_columns(problem), "ssr", "lambda", "frozen"]
    rows = ([i, *X[:, i], ssr[i], lam[i], bool(frozen[i])] for i in range(X.shape[1]))
    write_csv(path, header, rows)


def _write_parameter_spread(path: Path, problem: Problem, X: np.ndarray, acceptable: np.ndarray) -> None:
    """Per-parameter range over the acceptable members, relative to the initial box width."""
    header = ["parameter", "n_acceptable", "min", "median", "max", "relative_spread"]
    chosen = X[:, acceptable]
    rows = []
    if chosen.shape[1]:
        width = problem.range_hi - problem.range_lo
        for j, name in enumerate(_x_columns(problem)):
            values = chosen[j]
            spread = values.max() - values.min()
            rows.append([name[2:], chosen.shape[1], values.min(), np.median(values), values.max(), spread / width[j] if width[j] > 0 else 0.0])
    write_csv(path, header, rows)


def _summary(spec: ExperimentSpec, problem: Problem, dataset: Dataset, total_evals: int, ssr: np.ndarray, start_hash: str, **extra: Any) -> Dict[str, Any]:
    acceptable = dataset.acceptable(ssr)
    payload = {
        "problem_id": problem.problem_id,
        "solver": spec.solver,
        "seed": spec.seed,
        "residual_scale": problem.residual_scale,
        "noise_sd_frac": dataset.noise_sd_frac,
        "cluster_size": int(ssr.size),
        "total_evals": int(total_evals),
        "acceptable_count": int(acceptable.sum()),
        "truth_ssr": dataset.truth_ssr,
        "acceptance_threshold": dataset.acceptance_threshold,
        "best_ssr": float(ssr.min()) if ssr.size else None,
        "start_matrix_sha256": start_hash,
        "version": cgnsolve.__version__,
    }
    payload.update(extra)
    return payload


def _run_cgn(spec: ExperimentSpec, problem: Problem, dataset: Dataset, out: Path, initial: cgn.ClusterState) -> ExperimentResult:
    config = spec.cgn_config()
    state, trace = cgn.run(problem, config, keep_history=spec.keep_history, initial_state=initial)

    _write_cluster_final(out / CLUSTER_FINAL_CSV, problem, state.X, state.r, state.lam, state.frozen)
    trace_rows = (
        [k, i, trace.ssr[k][i], trace.lam[k][i], bool(trace.accepted[k][i]), trace.evaluations[k]]
        for k in range(len(trace.evaluations))
        for i in range(state.size)
    )
    write_csv(out / TRACE_CSV, ("iteration", "member", "ssr", "lambda", "accepted", "cum_evals"), trace_rows)
    if trace.history is not None:
        history_rows = ([k, i, *X[:, i]] for k, X in enumerate(trace.history) for i in range(X.shape[1]))
        write_csv(out / HISTORY_CSV, ("iteration", "member", *_x_columns(problem)), history_rows)

    _write_parameter_spread(out / PARAMETER_SPREAD_CSV, problem, state.X, dataset.acceptable(state.r))
    summary = _summary(
        spec,
        problem,
        dataset,
        state.evaluations,
        state.r,
        start_matrix_hash(initial.X),
        iterations=trace.iterations,
        frozen_count=int(state.frozen.sum()),
    )
    return ExperimentResult(out, summary, ThresholdCurve.from_ssr(state.r), EvalCurve.from_cgn_trace(trace, dataset))


def _run_lm(spec: ExperimentSpec, problem: Problem, dataset: Dataset, out: Path, initial: cgn.ClusterState) -> ExperimentResult:
    config = spec.lm_config()
    results = baseline.lm_multistart(problem, initial.X, config, workers=spec.workers)
    X = np.column_stack([r.x_final for r in results])
    ssr = np.array([r.ssr_final for r in results])
    lam = np.array([r.lambda_final for r in results])

    _write_cluster_final(out / CLUSTER_FINAL_CSV, problem, X, ssr, lam, lam > config.lambda_cap)
    offset = 0
    trace_rows = []
    for result in results:
        for step_index, step in enumerate(result.history):
            trace_rows.append([step_index, result.start_index, step.ssr, step.lam, step.accepted, offset + step.evaluations])
        offset += result.evals_used
    write_csv(out / TRACE_CSV, ("iteration", "member", "ssr", "lambda", "accepted", "cum_evals"), trace_rows)
    write_csv(
        out / LM_RESULTS_CSV,
        ("start_index", "ssr", "evals_used", "status", "lambda_final"),
        ([r.start_index, r.ssr_final, r.evals_used, r.status, r.lambda_final] for r in results),
    )

    _write_parameter_spread(out / PARAMETER_SPREAD_CSV, problem, X, dataset.acceptable(ssr))
    statuses = {status: sum(r.status == status for r in results) for status in baseline.LM_STATUSES}
    summary = _summary(
        spec, problem, dataset, baseline.total_evaluations(results), ssr, start_matrix_hash(initial.X), fd_step=config.fd_step, statuses=statuses
    )
    return ExperimentResult(out, summary, ThresholdCurve.from_ssr(ssr), EvalCurve.from_lm_results(results, dataset))


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run one experiment and write its artifact directory.

    Raises:
        ConfigError: Invalid spec or unknown problem id.
        ArtifactError: Output directory not writable.
    """
    spec.validate()
    problem, dataset = prepare(spec)
    out = ensure_dir(Path(spec.output_dir))
    write_json(out / SPEC_JSON, spec.to_dict())
    write_dataset(dataset, out)

    config = spec.cgn_config().validate(problem.dim_x)
    initial = cgn.create_initial_cluster(problem, config)
    if spec.solver == SOLVER_CGN:
        result = _run_cgn(spec, problem, dataset, out, initial)
    else:
        result = _run_lm(spec, problem, dataset, out, initial)

    write_csv(out / THRESHOLD_CURVE_CSV, ("threshold", "count"), result.threshold_curve.rows())
    write_csv(out / EVAL_CURVE_CSV, ("evaluations", "acceptable"), result.eval_curve.points)
    write_json(out / SUMMARY_JSON, result.summary)
    logger.info(
        "%s on %s: %d evaluations, %d/%d acceptable (truth SSR %.6g) -> %s",
        spec.solver,
        problem.problem_id,
        result.summary["total_evals"],
        result.summary["acceptable_count"],
        result.summary["cluster_size"],
        dataset.truth_ssr,
        out,
    )
    return result


def sweep_value_dir(output_dir: Path, parameter: str, value: float) -> Path:
    return Path(output_dir) / f"{parameter}_{value:g}"


def sweep(spec: ExperimentSpec, parameter: str, values: Sequence[float]) -> List[ExperimentResult]:
    """One experiment per value of ``gamma`` or ``lambda_init``.

    Every value is validated before anything runs. The runs share the seed, hence the dataset
    and the initial cluster. Writes ``sweep_threshold_curves.csv`` into ``spec.output_dir``.
    """
    if parameter not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep parameter {parameter!r}; expected one of {', '.join(SWEEP_AXES)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    specs = []
    for value in values:
        field_value = float(value)
        specs.append(
            dataclasses.replace(spec, **{parameter: field_value, "output_dir": str(sweep_value_dir(Path(spec.output_dir), parameter, field_value))}).validate()
        )

    results = [run_experiment(value_spec) for value_spec in specs]
    rows = (
        [parameter, getattr(value_spec, parameter), threshold, count]
        for value_spec, result in zip(specs, results)
        for threshold, count in result.threshold_curve.rows()
    )
    write_csv(ensure_dir(Path(spec.output_dir)) / SWEEP_CURVES_CSV, ("parameter", "value", "threshold", "count"), rows)
    logger.info("Sweep over %s finished: %d runs", parameter, len(results))
    return results


_COMPARISON_FIELDS = ("solver", "problem_id", "total_evals", "acceptable_count", "cluster_size", "truth_ssr", "best_ssr", "start_matrix_sha256")


def compare(dirs: Sequence[Path], out_path: Optional[Path] = None) -> Path:
    """Tabulate the summaries of finished runs side by side, without recomputation.

    Directories without ``summary.json`` are skipped with a warning.

    Raises:
        ConfigError: If fewer than two directories are given or none has a summary.
    """
    if len(dirs) < 2:
        raise ConfigError(f"compare needs at least two artifact directories, got {len(dirs)}")
    rows = []
    for directory in map(Path, dirs):
        summary_path = directory / SUMMARY_JSON
        if not summary_path.is_file():
            logger.warning("Skipping %s: no %s", directory, SUMMARY_JSON)
            continue
        summary = read_json(summary_path)
        rows.append([summary.get(name, "") for name in _COMPARISON_FIELDS] + [str(directory)])
    if not rows:
        raise ConfigError("none of the given directories contains a summary")
    out_path = Path(out_path) if out_path is not None else Path(COMPARISON_CSV)
    if out_path.parent != Path("."):
        ensure_dir(out_path.parent)
    write_csv(out_path, (*_COMPARISON_FIELDS, "directory"), rows)
    logger.info("Compared %d run(s) -> %s", len(rows), out_path)
    return out_path


def threshold_curve_from_artifacts(directory: Path) -> ThresholdCurve:
    """Threshold curve recomputed from ``cluster_final.csv`` alone."""
    rows = read_csv(Path(directory) / CLUSTER_FINAL_CSV)
    try:
        return ThresholdCurve.from_ssr([float(row["ssr"]) for row in rows])
    except (KeyError, ValueError) as e:
        raise ArtifactError(f"malformed {CLUSTER_FINAL_CSV} in {directory}: {e}") from e
