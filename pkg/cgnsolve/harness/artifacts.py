"""
Artifact files and the curves derived from them.

All numbers are written with 17 significant digits and LF line endings so that identical runs
produce byte-identical files on every platform.
"""

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from cgnsolve.core.constants import (
    CSV_SIGNIFICANT_DIGITS,
    DATASET_CSV,
    DATASET_JSON,
    THRESHOLD_GRID_HIGH,
    THRESHOLD_GRID_LOW,
    THRESHOLD_GRID_POINTS,
)
from cgnsolve.core.utils import ArtifactError
from cgnsolve.problems.datasets import Dataset
from cgnsolve.solvers.baseline import StartResult
from cgnsolve.solvers.cgn import RunTrace

_FLOAT_FORMAT = f".{CSV_SIGNIFICANT_DIGITS}g"


def format_value(value: Any) -> str:
    """CSV cell text: bools as 0/1, floats with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), _FLOAT_FORMAT)
    return str(value)


def ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ArtifactError(f"cannot create output directory {path}: {e}") from e
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
    except OSError as e:
        raise ArtifactError(f"cannot write {path}: {e}") from e
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            return list(csv.DictReader(f))
    except OSError as e:
        raise ArtifactError(f"cannot read {path}: {e}") from e


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise ArtifactError(f"cannot write {path}: {e}") from e
    return path


def read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactError(f"cannot read {path}: {e}") from e


def start_matrix_hash(X: np.ndarray) -> str:
    """sha256 over the shape and the little-endian float64 bytes of the start matrix."""
    X = np.ascontiguousarray(np.asarray(X, dtype="<f8"))
    digest = hashlib.sha256(f"{X.shape[0]}x{X.shape[1]}:".encode("ascii"))
    digest.update(X.tobytes(order="C"))
    return digest.hexdigest()


def threshold_grid(points: int = THRESHOLD_GRID_POINTS, low: float = THRESHOLD_GRID_LOW, high: float = THRESHOLD_GRID_HIGH) -> np.ndarray:
    return np.logspace(np.log10(low), np.log10(high), points)


@dataclass(frozen=True, eq=False)
class ThresholdCurve:
    """Number of members with SSR below each threshold."""

    thresholds: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_ssr(cls, ssr: Sequence[float], thresholds: Optional[np.ndarray] = None) -> "ThresholdCurve":
        grid = threshold_grid() if thresholds is None else np.asarray(thresholds, dtype=np.float64)
        values = np.sort(np.asarray(ssr, dtype=np.float64))
        # count of values strictly below each threshold
        counts = np.searchsorted(values, grid, side="left")
        return cls(thresholds=grid, counts=counts)

    def rows(self) -> List[Tuple[float, int]]:
        return [(float(t), int(c)) for t, c in zip(self.thresholds, self.counts)]


@dataclass(frozen=True)
class EvalCurve:
    """Acceptable minimisers found against cumulative function evaluations."""

    points: Tuple[Tuple[int, int], ...]

    @classmethod
    def from_cgn_trace(cls, trace: RunTrace, dataset: Dataset) -> "EvalCurve":
        return cls(tuple((int(evals), int(dataset.acceptable(ssr).sum())) for evals, ssr in zip(trace.evaluations, trace.ssr)))

    @classmethod
    def from_lm_results(cls, results: Sequence[StartResult], dataset: Dataset) -> "EvalCurve":
        """Starts concatenated in index order."""
        points = []
        evals = 0
        found = 0
        for result in results:
            evals += result.evals_used
            found += int(dataset.acceptable(result.ssr_final))
            points.append((evals, found))
        return cls(tuple(points))

    @property
    def terminal(self) -> Tuple[int, int]:
        return self.points[-1] if self.points else (0, 0)


def write_dataset(dataset: Dataset, out_dir: Path) -> Path:
    """``dataset.csv`` plus the ``dataset.json`` sidecar."""
    ensure_dir(out_dir)
    rows = ((k, t, g, y) for k, (t, g, y) in enumerate(zip(dataset.obs_times, dataset.obs_groups, dataset.y_star)))
    write_csv(out_dir / DATASET_CSV, ("obs_index", "time", "dose_level", "y_star"), rows)
    write_json(
        out_dir / DATASET_JSON,
        {
            "problem_id": dataset.problem_id,
            "truth_x": [float(v) for v in dataset.truth_x],
            "seed": dataset.noise_seed,
            "residual_scale": dataset.residual_scale,
            "noise_sd_frac": dataset.noise_sd_frac,
            "truth_ssr": dataset.truth_ssr,
        },
    )
    return out_dir


def read_dataset(data_dir: Path) -> Dataset:
    """Inverse of :func:`write_dataset`."""
    meta = read_json(data_dir / DATASET_JSON)
    rows = read_csv(data_dir / DATASET_CSV)
    try:
        rows.sort(key=lambda row: int(row["obs_index"]))
        return Dataset(
            problem_id=meta["problem_id"],
            y_star=np.array([float(row["y_star"]) for row in rows]),
            truth_x=np.array(meta["truth_x"], dtype=np.float64),
            noise_seed=int(meta["seed"]),
            residual_scale=meta["residual_scale"],
            noise_sd_frac=float(meta["noise_sd_frac"]),
            truth_ssr=float(meta["truth_ssr"]),
            obs_times=np.array([float(row["time"]) for row in rows]),
            obs_groups=tuple(row["dose_level"] for row in rows),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise ArtifactError(f"malformed dataset in {data_dir}: {e}") from e
