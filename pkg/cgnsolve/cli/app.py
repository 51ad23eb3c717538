"""
cgn-solve: command line entry point.

Commands:
    run        one experiment (cgn, lm or lm_def) into an artifact directory
    sweep      one experiment per gamma or lambda-init value
    compare    side-by-side table of finished runs
    make-data  synthetic dataset only

Exit codes: 0 success, 2 configuration error, 3 any other failure.
"""

from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

import typer

from cgnsolve.core.constants import EXIT_CONFIG_ERROR, EXIT_RUNTIME_ERROR, SWEEP_LAMBDA_INIT
from cgnsolve.core.output import print_error, print_info, print_success, print_warning
from cgnsolve.core.utils import CgnSolveError, ConfigError, default_workers, logger
from cgnsolve.harness.artifacts import write_dataset
from cgnsolve.harness.experiment import compare as compare_runs
from cgnsolve.harness.experiment import run_experiment
from cgnsolve.harness.experiment import sweep as sweep_runs
from cgnsolve.harness.spec import ExperimentSpec
from cgnsolve.problems.datasets import make_dataset
from cgnsolve.problems.registry import get_entry

app = typer.Typer(help="Cluster Gauss-Newton experiments on PK/PBPK benchmark problems.", no_args_is_help=True, add_completion=False)


@contextmanager
def _cli_errors() -> Iterator[None]:
    """Map package errors to the documented exit codes."""
    try:
        yield
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        print_error(str(e))
        raise typer.Exit(EXIT_CONFIG_ERROR)
    except CgnSolveError as e:
        logger.error("Run failed: %s", e)
        print_error(str(e))
        raise typer.Exit(EXIT_RUNTIME_ERROR)


def _build_spec(spec_file: Optional[Path], problem: Optional[str], **overrides) -> ExperimentSpec:
    if spec_file is not None:
        spec = ExperimentSpec.load(spec_file)
        if problem is not None:
            spec = spec.with_overrides(problem_id=problem)
    elif problem is not None:
        spec = ExperimentSpec(problem_id=problem)
    else:
        raise ConfigError("either --problem or --spec is required")
    if overrides.get("workers") is None and spec_file is None:
        overrides["workers"] = default_workers()
    return spec.with_overrides(**overrides).validate()


def _parse_values(raw: str) -> List[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"--values must be comma separated numbers, got {raw!r}") from e


@app.command()
def run(
    problem: Optional[str] = typer.Option(None, "--problem", help="Problem id"),
    solver: Optional[str] = typer.Option(None, "--solver", help="cgn | lm | lm_def"),
    n: Optional[int] = typer.Option(None, "--n", help="Cluster size / number of starts"),
    gamma: Optional[float] = typer.Option(None, "--gamma"),
    lambda_init: Optional[float] = typer.Option(None, "--lambda-init"),
    lambda_max: Optional[float] = typer.Option(None, "--lambda-max"),
    k_max: Optional[int] = typer.Option(None, "--k-max"),
    fd_step: Optional[float] = typer.Option(None, "--fd-step", help="LM finite-difference step"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    residual_scale: Optional[str] = typer.Option(None, "--residual-scale", help="log10 | linear"),
    noise: Optional[float] = typer.Option(None, "--noise", help="Relative noise SD of the generated dataset"),
    dataset_dir: Optional[Path] = typer.Option(None, "--dataset-dir", help="Reuse a make-data output"),
    workers: Optional[int] = typer.Option(None, "--workers"),
    keep_history: Optional[bool] = typer.Option(None, "--keep-history/--no-keep-history"),
    out: Optional[Path] = typer.Option(None, "--out", help="Artifact directory"),
    spec_file: Optional[Path] = typer.Option(None, "--spec", help="JSON spec; flags override its fields"),
):
    """Run one experiment."""
    with _cli_errors():
        spec = _build_spec(
            spec_file,
            problem,
            solver=solver,
            cluster_size=n,
            gamma=gamma,
            lambda_init=lambda_init,
            lambda_max=lambda_max,
            k_max=k_max,
            fd_step=fd_step,
            seed=seed,
            residual_scale=residual_scale,
            noise=noise,
            dataset_dir=str(dataset_dir) if dataset_dir else None,
            workers=workers,
            keep_history=keep_history,
            output_dir=str(out) if out else None,
        )
        result = run_experiment(spec)
        summary = result.summary
        if summary["acceptable_count"] == 0:
            print_warning(f"no member reached the acceptance threshold {summary['acceptance_threshold']:.6g}")
        print_success(
            f"{summary['solver']} on {summary['problem_id']}: {summary['total_evals']} evaluations, "
            f"{summary['acceptable_count']}/{summary['cluster_size']} acceptable -> {result.output_dir}"
        )


@app.command()
def sweep(
    param: str = typer.Option(..., "--param", help="gamma | lambda-init"),
    values: str = typer.Option(..., "--values", help="Comma separated values"),
    problem: Optional[str] = typer.Option(None, "--problem"),
    n: Optional[int] = typer.Option(None, "--n"),
    k_max: Optional[int] = typer.Option(None, "--k-max"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    residual_scale: Optional[str] = typer.Option(None, "--residual-scale"),
    workers: Optional[int] = typer.Option(None, "--workers"),
    out: Optional[Path] = typer.Option(None, "--out"),
    spec_file: Optional[Path] = typer.Option(None, "--spec"),
):
    """Run one experiment per value of gamma or lambda-init."""
    with _cli_errors():
        spec = _build_spec(
            spec_file,
            problem,
            cluster_size=n,
            k_max=k_max,
            seed=seed,
            residual_scale=residual_scale,
            workers=workers,
            output_dir=str(out) if out else None,
        )
        parameter = param.replace("-", "_")
        if parameter == "lambda":
            parameter = SWEEP_LAMBDA_INIT
        results = sweep_runs(spec, parameter, _parse_values(values))
        for result in results:
            print_info(f"{result.output_dir}: {result.summary['acceptable_count']}/{result.summary['cluster_size']} acceptable")
        print_success(f"Sweep over {parameter} finished ({len(results)} runs) -> {spec.output_dir}")


@app.command()
def compare(
    dirs: List[Path] = typer.Argument(None, help="Two or more artifact directories"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output CSV (default ./comparison.csv)"),
):
    """Tabulate finished runs side by side."""
    with _cli_errors():
        path = compare_runs(dirs or [], out)
        print_success(f"Comparison written to {path}")


@app.command("make-data")
def make_data(
    problem: str = typer.Option(..., "--problem"),
    seed: int = typer.Option(0, "--seed"),
    noise: Optional[float] = typer.Option(None, "--noise"),
    residual_scale: Optional[str] = typer.Option(None, "--residual-scale"),
    out: Path = typer.Option(Path("data"), "--out"),
):
    """Generate a synthetic dataset."""
    with _cli_errors():
        entry = get_entry(problem)
        dataset = make_dataset(problem, noise_sd_frac=entry.default_noise if noise is None else noise, seed=seed, residual_scale=residual_scale)
        write_dataset(dataset, out)
        print_success(f"Dataset for {problem} (truth SSR {dataset.truth_ssr:.6g}) written to {out}")


def main() -> None:
    """Console-script entry point."""
    app()


if __name__ == "__main__":
    main()
