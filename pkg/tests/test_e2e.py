"""
Desk-scale PBPK experiments. Deselected by default; run with ``pytest -m e2e``.
"""

import numpy as np
import pytest

from cgnsolve.core.utils import ConfigError
from cgnsolve.harness.experiment import prepare, run_experiment, sweep
from cgnsolve.harness.spec import ExperimentSpec
from cgnsolve.solvers import cgn


def desk_spec(output_dir, **overrides):
    return ExperimentSpec(problem_id="pbpk_ex1", cluster_size=50, k_max=50, seed=0, workers=4, output_dir=str(output_dir)).with_overrides(**overrides)


@pytest.mark.e2e
class TestPbpkExperiments:
    """CGN against multi-start LM on the PBPK problems."""

    def test_cgn_cheaper_than_lm(self, tmp_path):
        """With shared starts and data CGN spends less than half the evaluations of LM and finds at least as many fits."""
        cgn_run = run_experiment(desk_spec(tmp_path / "cgn"))
        lm_run = run_experiment(desk_spec(tmp_path / "lm", solver="lm"))
        assert cgn_run.summary["start_matrix_sha256"] == lm_run.summary["start_matrix_sha256"]
        assert cgn_run.summary["total_evals"] < 0.5 * lm_run.summary["total_evals"]
        assert cgn_run.summary["acceptable_count"] >= lm_run.summary["acceptable_count"]

    def test_rounded_model_defeats_fine_differences(self, tmp_path):
        """LM with a 1e-6 difference step sees a zero Jacobian and finds nothing acceptable."""
        spec = ExperimentSpec(problem_id="pbpk_ex1_rounded", solver="lm", cluster_size=20, seed=1, output_dir=str(tmp_path))
        result = run_experiment(spec)
        assert result.summary["acceptable_count"] == 0

    def test_cgn_fits_rounded_model(self, tmp_path):
        """Cluster slopes span the rounding steps, so CGN gets within twice the truth SSR."""
        result = run_experiment(desk_spec(tmp_path, problem_id="pbpk_ex1_rounded"))
        assert result.summary["best_ssr"] < 2.0 * result.summary["truth_ssr"]

    def test_member_ssr_never_increases(self):
        """Every member's SSR is non-increasing over the iterations."""
        spec = ExperimentSpec(problem_id="pbpk_single", cluster_size=20, k_max=10, seed=2, workers=4)
        problem, _ = prepare(spec)
        _, trace = cgn.run(problem, spec.cgn_config())
        ssr = np.vstack(trace.ssr)
        assert np.all(np.diff(ssr, axis=0) <= 0.0)


@pytest.mark.e2e
class TestPbpkSweeps:
    """Weight and regularisation sweeps on the multi-dose PBPK problem."""

    def test_distance_weights_help(self, tmp_path):
        """Below the truth SSR the gamma = 1 curve counts at least as many members as uniform weights."""
        uniform, weighted = sweep(desk_spec(tmp_path), "gamma", [0.0, 1.0])
        below = weighted.threshold_curve.thresholds <= weighted.summary["truth_ssr"]
        assert below.any()
        assert np.all(weighted.threshold_curve.counts[below] >= uniform.threshold_curve.counts[below])

    def test_initial_lambda_values_find_fits(self, tmp_path):
        """Both moderate initial lambdas end with an acceptable member."""
        results = sweep(desk_spec(tmp_path), "lambda_init", [0.01, 0.1])
        assert [result.summary["acceptable_count"] >= 1 for result in results] == [True, True]

    def test_unregularised_limit_rejected(self):
        """lambda_init = 0 fails validation."""
        with pytest.raises(ConfigError):
            cgn.CgnConfig(lambda_init=0.0).validate()
