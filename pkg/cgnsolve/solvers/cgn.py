"""
Cluster Gauss-Newton method.

A cluster of N parameter vectors is iterated simultaneously. For every member the Jacobian is
replaced by the slope of a weighted linear least squares fit through the whole cluster, so a
full iteration costs one model evaluation per active member and nothing else.

Functions:
    create_initial_cluster: uniform sampling in the initial box, resampling non-evaluable points
    compute_weights: distance weights of the linear approximation
    construct_linear_approximation: slope matrix for one anchor member
    propose_step: Tikhonov-damped Gauss-Newton proposal
    update_cluster: accept/reject proposals and adapt the damping
    run: the full driver
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from cgnsolve.core.constants import (
    DEFAULT_CLUSTER_SIZE,
    DEFAULT_GAMMA,
    DEFAULT_K_MAX,
    DEFAULT_LAMBDA_INIT,
    DEFAULT_LAMBDA_MAX,
    DEFAULT_MAX_RESAMPLE,
    LAMBDA_DECREASE,
    LAMBDA_INCREASE,
    WEIGHT_CAP,
)
from cgnsolve.core.linalg import regularized_solve, weighted_minnorm_ls
from cgnsolve.core.random_streams import member_streams
from cgnsolve.core.utils import ConfigError, ContractViolationError, DegenerateClusterError, InitializationError, logger
from cgnsolve.problems.base import Problem
from cgnsolve.solvers.evaluation import ordered_map


@dataclass(frozen=True)
class CgnConfig:
    cluster_size: int = DEFAULT_CLUSTER_SIZE
    lambda_init: float = DEFAULT_LAMBDA_INIT
    lambda_max: float = DEFAULT_LAMBDA_MAX
    gamma: float = DEFAULT_GAMMA
    k_max: int = DEFAULT_K_MAX
    seed: int = 0
    max_resample: int = DEFAULT_MAX_RESAMPLE
    workers: int = 1
    weight_cap: float = WEIGHT_CAP
    rank_tol: Optional[float] = None

    def validate(self, dim_x: Optional[int] = None) -> "CgnConfig":
        """Check the invariants; warn when the cluster is too small to span R^n.

        Raises:
            ConfigError: On any violated invariant.
        """
        if self.cluster_size < 1:
            raise ConfigError(f"cluster_size must be >= 1, got {self.cluster_size}")
        if not self.lambda_init > 0:
            raise ConfigError(f"lambda_init must be > 0, got {self.lambda_init}")
        if not self.lambda_max > self.lambda_init:
            raise ConfigError(f"lambda_max ({self.lambda_max}) must exceed lambda_init ({self.lambda_init})")
        if not self.gamma >= 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if self.k_max < 1:
            raise ConfigError(f"k_max must be >= 1, got {self.k_max}")
        if self.max_resample < 1:
            raise ConfigError(f"max_resample must be >= 1, got {self.max_resample}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.weight_cap > 0:
            raise ConfigError(f"weight_cap must be > 0, got {self.weight_cap}")
        if self.rank_tol is not None and self.rank_tol < 0:
            raise ConfigError(f"rank_tol must be >= 0, got {self.rank_tol}")
        if dim_x is not None and self.cluster_size < dim_x + 1:
            logger.warning("Cluster size %d < n+1 = %d: every linear approximation is rank-deficient", self.cluster_size, dim_x + 1)
        return self


@dataclass(frozen=True, eq=False)
class ClusterState:
    """Immutable snapshot of the cluster after ``iteration`` updates."""

    iteration: int
    X: np.ndarray
    Y: np.ndarray
    r: np.ndarray
    lam: np.ndarray
    frozen: np.ndarray
    accepted: np.ndarray
    evaluations: int

    @property
    def size(self) -> int:
        return self.X.shape[1]

    @property
    def active(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen)


@dataclass(frozen=True, eq=False)
class LinearModel:
    A: np.ndarray
    anchor_index: int
    anchor_x: np.ndarray
    anchor_y: np.ndarray


@dataclass
class RunTrace:
    """Per-iteration record of a run; entry 0 is the initial cluster."""

    ssr: List[np.ndarray] = field(default_factory=list)
    lam: List[np.ndarray] = field(default_factory=list)
    accepted: List[np.ndarray] = field(default_factory=list)
    evaluations: List[int] = field(default_factory=list)
    history: Optional[List[np.ndarray]] = None

    def record(self, state: ClusterState) -> None:
        self.ssr.append(state.r.copy())
        self.lam.append(state.lam.copy())
        self.accepted.append(state.accepted.copy())
        self.evaluations.append(state.evaluations)
        if self.history is not None:
            self.history.append(state.X.copy())

    @property
    def iterations(self) -> int:
        """Main iterations performed (the initial cluster not counted)."""
        return len(self.evaluations) - 1


def _sample_column(problem: Problem, rng: np.random.Generator, column: int, max_resample: int) -> Tuple[np.ndarray, np.ndarray, int]:
    for attempt in range(1, max_resample + 1):
        x = rng.uniform(problem.range_lo, problem.range_hi)
        y = problem.evaluate(x)
        if y is not None:
            if attempt > 1:
                logger.warning("Initial column %d resampled %d time(s) before it was evaluable", column, attempt - 1)
            return x, y, attempt
    raise InitializationError(column, max_resample)


def _initial_state(X: np.ndarray, Y: np.ndarray, problem: Problem, config: CgnConfig, evaluations: int) -> ClusterState:
    target = problem.target
    residual = Y - target[:, None]
    r = np.einsum("ij,ij->j", residual, residual)
    N = X.shape[1]
    lam = np.full(N, config.lambda_init)
    return ClusterState(
        iteration=0, X=X, Y=Y, r=r, lam=lam, frozen=lam > config.lambda_max, accepted=np.zeros(N, dtype=bool), evaluations=evaluations
    )


def create_initial_cluster(
    problem: Problem,
    config: CgnConfig,
    rngs: Optional[Sequence[np.random.Generator]] = None,
    starts: Optional[np.ndarray] = None,
) -> ClusterState:
    """Sample the initial cluster uniformly in the initial box.

    Every column draws from its own generator and is resampled until the model is evaluable,
    so the result does not depend on ``config.workers``.

    Args:
        problem (Problem): Problem with observed data.
        config (CgnConfig): Solver configuration.
        rngs (Optional[Sequence[np.random.Generator]]): One generator per column; derived from
            ``config.seed`` when omitted.
        starts (Optional[np.ndarray]): Pinned n x N starting points; no sampling is done.

    Returns:
        ClusterState: Iteration-0 state, ``evaluations`` counting every attempt.

    Raises:
        InitializationError: A column stayed non-evaluable (or a pinned start is not evaluable).
    """
    if starts is None:
        starts = problem.starts
    if starts is not None:
        X = np.array(starts, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != problem.dim_x:
            raise ContractViolationError(f"starts must be {problem.dim_x} x N, got {X.shape}")
        outputs = ordered_map(problem.evaluate, list(X.T), config.workers)
        for column, y in enumerate(outputs):
            if y is None:
                raise InitializationError(column, 1)
        return _initial_state(X, np.column_stack(outputs), problem, config, X.shape[1])

    N = config.cluster_size
    if rngs is None:
        rngs = member_streams(config.seed, N)
    if len(rngs) != N:
        raise ContractViolationError(f"expected {N} generators, got {len(rngs)}")
    columns = ordered_map(lambda j: _sample_column(problem, rngs[j], j, config.max_resample), range(N), config.workers)
    X = np.column_stack([c[0] for c in columns])
    Y = np.column_stack([c[1] for c in columns])
    attempts = sum(c[2] for c in columns)
    return _initial_state(X, Y, problem, config, attempts)


def compute_weights(
    X: np.ndarray, i: int, range_lo: np.ndarray, range_hi: np.ndarray, gamma: float, weight_cap: float = WEIGHT_CAP
) -> np.ndarray:
    """Weights ``d_j = (sum_l ((x_lj - x_li) / (x^U_l - x^L_l))^2)^(-gamma)``, ``d_i = 0``.

    Box components of zero width are not normalised. Weights are capped at ``weight_cap``,
    which is also the weight of a point coincident with the anchor.
    """
    X = np.asarray(X, dtype=np.float64)
    width = np.asarray(range_hi, dtype=np.float64) - np.asarray(range_lo, dtype=np.float64)
    width = np.where(width > 0, width, 1.0)
    if gamma == 0:
        d = np.ones(X.shape[1])
    else:
        scaled = (X - X[:, [i]]) / width[:, None]
        dist2 = np.einsum("ij,ij->j", scaled, scaled)
        with np.errstate(divide="ignore", over="ignore"):
            d = np.where(dist2 > 0, dist2 ** (-gamma), weight_cap)
        d = np.minimum(d, weight_cap)
    d[i] = 0.0
    return d


def construct_linear_approximation(state: ClusterState, i: int, problem: Problem, config: CgnConfig) -> LinearModel:
    """Slope of the weighted global linear approximation around member ``i``.

    Uses only stored outputs; no model evaluation takes place.

    Raises:
        ContractViolationError: If member ``i`` is frozen.
        DegenerateClusterError: If every weight is zero.
    """
    if state.frozen[i]:
        raise ContractViolationError(f"member {i} is frozen")
    d = compute_weights(state.X, i, problem.range_lo, problem.range_hi, config.gamma, config.weight_cap)
    if not np.any(d > 0):
        raise DegenerateClusterError(f"all linear-approximation weights of member {i} are zero")
    DX = state.X - state.X[:, [i]]
    DY = state.Y - state.Y[:, [i]]
    A = weighted_minnorm_ls(DX, DY, d, config.rank_tol)
    return LinearModel(A=A, anchor_index=i, anchor_x=state.X[:, i].copy(), anchor_y=state.Y[:, i].copy())


def propose_step(state: ClusterState, i: int, model: LinearModel, target: np.ndarray) -> np.ndarray:
    """``x_i + (A^T A + lam_i I)^-1 A^T (y* - y_i)``; not clipped to the initial box."""
    residual = np.asarray(target, dtype=np.float64) - state.Y[:, i]
    return state.X[:, i] + regularized_solve(model.A, residual, float(state.lam[i]))


def update_cluster(state: ClusterState, proposals: Dict[int, np.ndarray], problem: Problem, config: CgnConfig) -> ClusterState:
    """Evaluate the proposals of all active members and apply the damping schedule.

    A proposal is accepted only on a strict SSR decrease (damping / 10); otherwise, including a
    NOT-EVALUABLE proposal, the member keeps its point and the damping grows by 10. Frozen
    members are copied and their damping still grows.
    """
    active = state.active
    missing = [int(i) for i in active if int(i) not in proposals]
    if missing:
        raise ContractViolationError(f"no proposal for active member(s) {missing}")

    outputs = ordered_map(problem.evaluate, [proposals[int(i)] for i in active], config.workers)
    X, Y, r, lam = state.X.copy(), state.Y.copy(), state.r.copy(), state.lam.copy()
    accepted = np.zeros(state.size, dtype=bool)
    target = problem.target
    for i, y_new in zip(active, outputs):
        if y_new is not None and y_new.shape == target.shape:
            r_new = problem.ssr(y_new)
            if r_new < r[i]:
                X[:, i] = proposals[int(i)]
                Y[:, i] = y_new
                r[i] = r_new
                lam[i] *= LAMBDA_DECREASE
                accepted[i] = True
                continue
        lam[i] *= LAMBDA_INCREASE
    lam[state.frozen] *= LAMBDA_INCREASE
    return ClusterState(
        iteration=state.iteration + 1,
        X=X,
        Y=Y,
        r=r,
        lam=lam,
        frozen=lam > config.lambda_max,
        accepted=accepted,
        evaluations=state.evaluations + int(active.size),
    )


def iterate(state: ClusterState, problem: Problem, config: CgnConfig) -> ClusterState:
    """One main iteration: linear approximations, proposals and the update."""
    active = [int(i) for i in state.active]
    target = problem.target

    def propose(i: int) -> np.ndarray:
        return propose_step(state, i, construct_linear_approximation(state, i, problem, config), target)

    proposals = dict(zip(active, ordered_map(propose, active, config.workers)))
    return update_cluster(state, proposals, problem, config)


def run(
    problem: Problem,
    config: CgnConfig,
    starts: Optional[np.ndarray] = None,
    keep_history: bool = False,
    initial_state: Optional[ClusterState] = None,
) -> Tuple[ClusterState, RunTrace]:
    """Run the Cluster Gauss-Newton method.

    Args:
        problem (Problem): Problem with observed data.
        config (CgnConfig): Solver configuration.
        starts (Optional[np.ndarray]): Pinned initial cluster (n x N).
        keep_history (bool): Keep every iterate matrix in the trace.
        initial_state (Optional[ClusterState]): Already evaluated initial cluster, reused as is.

    Returns:
        Tuple[ClusterState, RunTrace]: Final state and the per-iteration trace.
    """
    config.validate(problem.dim_x)
    state = initial_state if initial_state is not None else create_initial_cluster(problem, config, starts=starts)
    trace = RunTrace(history=[] if keep_history else None)
    trace.record(state)
    for k in range(1, config.k_max + 1):
        if not state.active.size:
            logger.info("All %d members frozen; stopping after %d iterations", state.size, k - 1)
            break
        state = iterate(state, problem, config)
        trace.record(state)
        logger.debug(
            "CGN iteration %d: accepted=%d frozen=%d evaluations=%d best_ssr=%.6g",
            k,
            int(state.accepted.sum()),
            int(state.frozen.sum()),
            state.evaluations,
            float(state.r.min()),
        )
    return state, trace
