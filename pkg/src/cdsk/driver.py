"""Coordinate-descent clustering driver, lambda tuning, spectral baseline."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .data_io import ClusteringResult, SampleMatrix
from .embedding import solve_embedding
from .errors import ConfigError, DegenerateDataError, ValidationError
from .kernel import GramMatrix, KernelSpec, default_bandwidth, gram
from .kmeans_metrics import Partition, accuracy, kmeans, nmi
from .similarity import alpha_objective_terms, check_simplex, disc_similarity, laplacian_quadratic
from .simplex_qp import QpSolution, SimplexQP, assemble_alpha_qp, init_alpha_sparse

DEFAULT_LAMBDA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 11))
_VALIDATION_FRACTION = 0.1

_FEAS_TOL = 1e-11
_BOUND_EPS = 1e-14


def graph_degrees(kvals: np.ndarray, alpha: np.ndarray, lam: float) -> np.ndarray:
    """Row sums of the discriminative similarity matrix, in closed form.

    Equals disc_similarity(...).degree without materializing the n x n graph:
    D_ii = 2 (alpha_i (K 1)_i + (K alpha)_i - lam alpha_i (K alpha)_i).
    """
    ka = kvals @ alpha
    return 2.0 * (alpha * kvals.sum(axis=1) + ka - lam * alpha * ka)


def solve_alpha_coupled(
    qp: SimplexQP,
    y: np.ndarray,
    kernel: GramMatrix,
    lam: float,
    start: np.ndarray,
    tol: float = 1e-6,
    max_inner: int = 80,
) -> QpSolution:
    """Minimize the weight quadratic while keeping the embedding normalized.

    The embedding columns satisfy Y^T D(alpha) Y = I for the weights the graph
    was built from.  Re-fitting the weights with that normalization dropped
    lets all mass drain onto a single point (the linear term dominates), after
    which the degree matrix, and with it the whole alternation, degenerates.
    This solver therefore keeps the c(c+1)/2 normalization equalities as
    constraints next to the simplex, which is also what makes the recorded
    alternation objective provably nonincreasing: the previous weights stay
    feasible for the new embedding and each accepted step must lower q.

    A sequential quadratic programming pass proposes the step; the proposal
    is then pulled back onto the constraint manifold by a few Newton
    restoration rounds and accepted only if it strictly lowers q.  A stalled
    or infeasible proposal keeps the starting weights, so the returned point
    is always feasible and never worse than the start.
    """
    kvals = kernel.values
    n = start.size
    alpha = check_simplex(start, n=n).copy()
    y = np.asarray(y, dtype=np.float64)
    c = y.shape[1]
    d1 = kvals.sum(axis=1)

    pairs = [(p, q) for p in range(c) for q in range(p, c)]
    w_rows = np.array([y[:, p] * y[:, q] for p, q in pairs])
    kw_rows = w_rows @ kvals  # K w, one row per constraint; K symmetric
    targets = np.array([1.0 if p == q else 0.0 for p, q in pairs])

    def residual(a: np.ndarray) -> np.ndarray:
        deg = graph_degrees(kvals, a, lam)
        out = np.empty(1 + len(pairs))
        out[0] = a.sum() - 1.0
        out[1:] = w_rows @ deg - targets
        return out

    def jacobian(a: np.ndarray) -> np.ndarray:
        ka = kvals @ a
        jac = np.empty((1 + len(pairs), n))
        jac[0] = 1.0
        for i, w in enumerate(w_rows):
            jac[1 + i] = 2.0 * (w * d1 + kw_rows[i] - lam * (w * ka + kvals @ (w * a)))
        return jac

    def objective(a: np.ndarray) -> float:
        return float(a @ qp.a @ a + qp.b @ a + qp.constant)

    def restore(a: np.ndarray) -> np.ndarray | None:
        cand = np.clip(a, 0.0, None)
        for _ in range(6):
            r = residual(cand)
            if np.abs(r).max() <= _FEAS_TOL:
                return cand
            jac = jacobian(cand)
            gram_j = jac @ jac.T
            try:
                mult = np.linalg.solve(gram_j, r)
            except np.linalg.LinAlgError:
                mult, *_ = np.linalg.lstsq(gram_j, r, rcond=None)
            cand = np.clip(cand - jac.T @ mult, 0.0, None)
        return cand if np.abs(residual(cand)).max() <= _FEAS_TOL else None

    def stationarity(a: np.ndarray) -> float:
        grad = 2.0 * (qp.a @ a) + qp.b
        jac = jacobian(a)
        free = a > _BOUND_EPS
        mult, *_ = np.linalg.lstsq(jac[:, free].T, grad[free], rcond=None)
        zeta = grad - jac.T @ mult
        # free coordinates must be stationary; zero ones must not want mass
        worst = np.abs(np.where(free, zeta, 0.0)).max()
        pull = max(0.0, float(-(np.where(~free, zeta, 0.0)).min())) if (~free).any() else 0.0
        return float(max(worst, pull) / (1.0 + np.abs(grad).max()))

    restored = restore(alpha)
    if restored is None:
        raise ValidationError("starting weights are not feasible for this embedding")
    alpha = restored
    q_start = objective(alpha)

    if len(pairs) + 1 >= n:
        # as many normalization equalities as weights: the feasible set is
        # (generically) isolated points, so the start is already the answer
        residual_norm = stationarity(alpha)
        return QpSolution(
            alpha=alpha,
            objective=q_start,
            kkt_residual=residual_norm,
            iterations=0,
            converged=residual_norm <= max(tol, 1e-5),
            objective_trace=[q_start],
        )

    result = minimize(
        objective,
        alpha,
        jac=lambda a: 2.0 * (qp.a @ a) + qp.b,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * n,
        constraints=[{"type": "eq", "fun": residual, "jac": jacobian}],
        options={"maxiter": max_inner, "ftol": 1e-10},
    )
    iterations = int(result.nit)

    cand = restore(np.clip(result.x, 0.0, None))
    moved = False
    if cand is not None:
        q_new = objective(cand)
        if q_new < q_start - 1e-15 * (1.0 + abs(q_start)):
            alpha = cand
            moved = True
    # stalled proposals keep the (feasible) starting point, so descent and
    # feasibility hold regardless of how the inner solver exited
    alpha = np.clip(alpha, 0.0, None)
    alpha /= alpha.sum()
    q_final = objective(alpha)
    residual_norm = stationarity(alpha)
    converged = bool(result.status == 0) or residual_norm <= max(tol, 1e-5)
    return QpSolution(
        alpha=alpha,
        objective=q_final,
        kkt_residual=residual_norm,
        iterations=iterations,
        converged=converged,
        objective_trace=[q_start, q_final] if moved else [q_start],
    )


@dataclass(frozen=True)
class CdskConfig:
    """Knobs of one clustering run; defaults mirror the reference settings."""

    c: int
    lam: float = 0.1
    bandwidth: float | None = None
    max_iter: int = 20
    qp_tol: float = 1e-6
    convergence_tol: float = 1e-8
    seed: int = 0
    kmeans_restarts: int = 10
    alpha_init: str = "sparse"

    def __post_init__(self):
        if self.c < 1:
            raise ConfigError(f"cluster count must be >= 1, got {self.c}")
        if not np.isfinite(self.lam) or not 0.0 < self.lam <= 2.0:
            raise ConfigError(f"lambda must satisfy 0 < lambda <= 2, got {self.lam}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigError(f"bandwidth must be > 0, got {self.bandwidth}")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if self.qp_tol <= 0 or self.convergence_tol <= 0:
            raise ConfigError("tolerances must be > 0")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.kmeans_restarts < 1:
            raise ConfigError("kmeans_restarts must be >= 1")
        if self.alpha_init not in ("sparse", "uniform"):
            raise ConfigError(f"unknown alpha_init {self.alpha_init!r}")


def _metrics_against(labels: np.ndarray, truth: np.ndarray | None) -> dict | None:
    if truth is None:
        return None
    pred = Partition(labels=labels, c=int(labels.max()))
    ref = Partition(labels=truth, c=int(truth.max()))
    return {"accuracy": accuracy(pred, ref), "nmi": nmi(pred, ref)}


def run_cdsk(
    data: SampleMatrix, config: CdskConfig, alpha0: np.ndarray | None = None
) -> ClusteringResult:
    """Alternate spectral embedding and coupled weight updates, then k-means.

    Per iteration: build the discriminative similarity graph from the current
    weights, embed against its normalized Laplacian, re-fit the weights on the
    simplex while preserving the embedding normalization (warm-started at the
    previous weights, which are exactly feasible), and record the joint
    objective tr(Y^T L Y) - alpha^T K 1 + lam alpha^T K alpha.  Stops early
    once the recorded objective stalls in relative terms.  The trace is
    nonincreasing: the weight step only accepts descent at fixed Y, and the
    embedding step cannot raise the trace term because the previous embedding
    remains (to solver precision) feasible for the updated degree matrix.
    """
    if config.c < 2:
        raise ConfigError("clustering needs c >= 2")
    if data.n < config.c:
        raise ValidationError(f"n={data.n} is smaller than c={config.c}")
    bandwidth = config.bandwidth if config.bandwidth is not None else default_bandwidth(data)
    kmat = gram(data, KernelSpec(bandwidth))

    if alpha0 is not None:
        alpha = check_simplex(alpha0, n=data.n).copy()
    elif config.alpha_init == "uniform":
        alpha = np.full(data.n, 1.0 / data.n)
    else:
        alpha = init_alpha_sparse(data, seed=config.seed)

    try:
        graph = disc_similarity(kmat, alpha, config.lam)
    except DegenerateDataError:
        if alpha0 is not None or config.alpha_init == "uniform":
            raise
        # the sparse pilot weights can strand remote points at short bandwidth;
        # uniform weights keep every degree positive whenever the kernel does
        alpha = np.full(data.n, 1.0 / data.n)
        graph = disc_similarity(kmat, alpha, config.lam)
    trace: list[float] = []
    qp_converged = True
    y = None
    for _ in range(config.max_iter):
        emb = solve_embedding(graph, config.c)
        y = emb.y
        qp = assemble_alpha_qp(y, kmat, config.lam)
        sol = solve_alpha_coupled(qp, y, kmat, config.lam, start=alpha, tol=config.qp_tol)
        qp_converged = qp_converged and sol.converged
        try:
            next_graph = disc_similarity(kmat, sol.alpha, config.lam)
        except DegenerateDataError:
            # the weight step drained a neighborhood; the normalized Laplacian
            # needs positive degrees, so keep the last valid iterate and stop
            break
        alpha = sol.alpha
        graph = next_graph
        q_value = laplacian_quadratic(y, graph) + alpha_objective_terms(kmat, alpha, config.lam)
        trace.append(q_value)
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(trace[-1] - prev) <= config.convergence_tol * max(1.0, abs(prev)):
                break

    part = kmeans(y, config.c, restarts=config.kmeans_restarts, seed=config.seed)
    return ClusteringResult(
        labels=part.labels,
        alpha=alpha,
        objective_trace=trace,
        metrics=_metrics_against(part.labels, data.labels),
        lambda_used=config.lam,
        bandwidth_used=bandwidth,
        seed=config.seed,
        qp_converged=qp_converged,
    )


def embedding_entropy(y: np.ndarray) -> float:
    """Mean Shannon entropy of row-wise softmax; low entropy = crisp clusters."""
    y = np.asarray(y, dtype=np.float64)
    shifted = y - y.max(axis=1, keepdims=True)
    w = np.exp(shifted)
    p = w / w.sum(axis=1, keepdims=True)
    logs = np.where(p > 0.0, np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return float(np.mean(-np.sum(p * logs, axis=1)))


def _derived_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence((seed, index)).generate_state(1)[0])


def tune_lambda(
    data: SampleMatrix, config: CdskConfig, grid=DEFAULT_LAMBDA_GRID
) -> tuple[float, list[float]]:
    """Pick lambda by minimum embedding entropy on a validation subsample.

    The subsample holds 10% of the data, floored at max(2c, 10) points; one
    sparse initialization is shared across the grid and each grid point runs
    with a seed derived from (seed, grid index).  Ties keep the smaller
    lambda.
    """
    grid = [float(v) for v in grid]
    if not grid:
        raise ConfigError("lambda grid must be non-empty")
    size = max(int(np.ceil(_VALIDATION_FRACTION * data.n)), 2 * config.c, 10)
    if size > data.n:
        raise ValidationError(
            f"validation subset needs {size} points but the data has {data.n}"
        )
    rng = np.random.default_rng(config.seed)
    idx = np.sort(rng.choice(data.n, size=size, replace=False))
    subset = SampleMatrix(
        data.data[idx], None if data.labels is None else data.labels[idx]
    )
    alpha0 = (
        np.full(subset.n, 1.0 / subset.n)
        if config.alpha_init == "uniform"
        else init_alpha_sparse(subset, seed=config.seed)
    )
    bandwidth = config.bandwidth if config.bandwidth is not None else default_bandwidth(subset)
    try:
        # degrees shrink as lambda grows, so the largest grid value is the
        # worst case; a start that strands a subset point falls back to uniform
        disc_similarity(gram(subset, KernelSpec(bandwidth)), alpha0, max(grid))
    except DegenerateDataError:
        alpha0 = np.full(subset.n, 1.0 / subset.n)
    entropies: list[float] = []
    for i, lam in enumerate(grid):
        sub_config = replace(config, lam=lam, seed=_derived_seed(config.seed, i))
        graph_cfg = sub_config
        result = run_cdsk(subset, graph_cfg, alpha0=alpha0)
        emb_graph = disc_similarity(
            gram(subset, KernelSpec(result.bandwidth_used)), result.alpha, lam
        )
        emb = solve_embedding(emb_graph, config.c)
        entropies.append(embedding_entropy(emb.y))
    best = min(range(len(grid)), key=lambda i: (entropies[i], grid[i]))
    return grid[best], entropies


def run_baseline_spectral(
    data: SampleMatrix,
    c: int,
    seed: int = 0,
    bandwidth: float | None = None,
    restarts: int = 10,
) -> ClusteringResult:
    """Plain normalized spectral clustering on the raw gram matrix.

    Numerically identical to the uniform-weights special case: scaling the
    similarity by a constant leaves the normalized Laplacian unchanged, so
    lambda plays no role here (reported as the library default).
    """
    if c < 1:
        raise ConfigError(f"cluster count must be >= 1, got {c}")
    if data.n < c:
        raise ValidationError(f"n={data.n} is smaller than c={c}")
    bw = bandwidth if bandwidth is not None else default_bandwidth(data)
    kmat = gram(data, KernelSpec(bw))
    uniform = np.full(data.n, 1.0 / data.n)
    graph = disc_similarity(kmat, uniform, 0.1)
    emb = solve_embedding(graph, c)
    part = kmeans(emb.y, c, restarts=restarts, seed=seed)
    return ClusteringResult(
        labels=part.labels,
        alpha=uniform,
        objective_trace=[],
        metrics=_metrics_against(part.labels, data.labels),
        lambda_used=0.1,
        bandwidth_used=bw,
        seed=seed,
        qp_converged=True,
    )
