"""Lagrange polynomials and Lagrangians of k-graphs

    lambda_F(x) = k! * sum over edges e of prod_{v in e} x_v
    Lambda_F    = max of lambda_F over the standard simplex
"""

import math
from collections.abc import Sequence
from fractions import Fraction

import numpy as np
from rsxml import Logger

from pypalette.classes.config import SolverConfig
from pypalette.classes.exceptions import DimensionException, OracleBudgetException
from pypalette.classes.hypergraph import Hypergraph
from pypalette.classes.reports import LagrangianReport, SolverMethod
from pypalette.classes.weighting import Weighting
from pypalette.lib.parallel import parallel_map
from pypalette.lib.simplex import (
    AscentResult,
    best_of,
    compositions,
    count_compositions,
    face_point,
    kkt_residual,
    projected_gradient_ascent,
    random_simplex_points,
    uniform_point,
)

DEFAULT_ORACLE_BUDGET = 2_000_000


def _as_vector(graph: Hypergraph, x: Weighting | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(x, Weighting):
        return x.expect_keys(tuple(graph.vertices), 'this hypergraph')
    arr = np.asarray(x, dtype=float)
    if arr.shape != (graph.n,):
        raise DimensionException(f'Weight vector has shape {arr.shape} but the hypergraph has {graph.n} vertices')
    return arr


def _poly(edges: np.ndarray, k: int, x: np.ndarray) -> float:
    if edges.shape[0] == 0:
        return 0.0
    return math.factorial(k) * float(np.prod(x[edges], axis=1).sum())


def _grad(edges: np.ndarray, k: int, n: int, x: np.ndarray) -> np.ndarray:
    grad = np.zeros(n)
    if edges.shape[0] == 0:
        return grad
    xe = x[edges]
    for j in range(k):
        rest = np.prod(np.delete(xe, j, axis=1), axis=1)
        grad += np.bincount(edges[:, j], weights=rest, minlength=n)
    return math.factorial(k) * grad


def lagrange_poly(graph: Hypergraph, x: Weighting | Sequence[float] | np.ndarray) -> float:
    """Evaluate lambda_F at x

    Args:
        graph (Hypergraph): F
        x (Weighting | array): weights indexed by the vertices 1..n (array position v-1 for vertex v)

    Raises:
        DimensionException: x has the wrong length / keys
    """
    return _poly(graph.edge_array, graph.k, _as_vector(graph, x))


def lagrange_grad(graph: Hypergraph, x: Weighting | Sequence[float] | np.ndarray) -> np.ndarray:
    """Gradient of lambda_F: component v is k! * sum over edges e containing v of prod_{u in e, u != v} x_u"""
    return _grad(graph.edge_array, graph.k, graph.n, _as_vector(graph, x))


def grid_search(graph: Hypergraph, resolution: int, budget: int = DEFAULT_ORACLE_BUDGET) -> tuple[Fraction, np.ndarray]:
    """Exact maximum of lambda_F over the simplex points with denominator `resolution`

    Works in integers: with x = c / m, lambda_F(x) = k! * sum_e prod c / m^k.

    Returns:
        tuple[Fraction, np.ndarray]: the maximum and a maximising composition (first one found)

    Raises:
        OracleBudgetException: more than `budget` lattice points
    """
    if resolution < 1:
        raise ValueError(f'Grid resolution must be at least 1, got {resolution}')
    count = count_compositions(resolution, graph.n)
    if count > budget:
        raise OracleBudgetException(f'Grid oracle needs {count:,} points (n={graph.n}, m={resolution}), budget is {budget:,}')
    points = compositions(resolution, graph.n)
    totals = np.zeros(points.shape[0], dtype=np.int64)
    for edge in graph.edge_array:
        totals += np.prod(points[:, edge], axis=1)
    best = int(np.argmax(totals)) if totals.size else 0
    value = Fraction(math.factorial(graph.k) * int(totals[best]), resolution**graph.k) if totals.size else Fraction(0)
    return value, points[best] if points.size else np.zeros(graph.n, dtype=np.int64)


def lagrangian_grid_oracle(graph: Hypergraph, resolution: int, budget: int = DEFAULT_ORACLE_BUDGET) -> Fraction:
    """Exact maximum of lambda_F over all rational simplex points with denominator `resolution`

    Non-decreasing along divisibility chains of the resolution and converging to Lambda_F.
    """
    return grid_search(graph, resolution, budget)[0]


def start_points(graph: Hypergraph, config: SolverConfig) -> list[np.ndarray]:
    """Uniform point, the uniform point of every edge, then config.starts random points"""
    rng = np.random.default_rng(config.seed)
    starts = [uniform_point(graph.n)]
    starts += [face_point(graph.n, edge) for edge in graph.edge_array]
    starts += list(random_simplex_points(rng, config.starts, graph.n))
    return starts


def lagrangian(graph: Hypergraph, config: SolverConfig | None = None) -> LagrangianReport:
    """Lambda_F by multistart projected gradient ascent

    Starts from the uniform point, every single-edge face point and config.starts
    random simplex points; restarts are independent and may run on a thread pool.
    Graphs with at most config.oracle_cap vertices are certified against the grid
    oracle, and the ascent is re-run from the oracle point if it lost to the grid.

    Args:
        graph (Hypergraph): F (any uniformity)
        config (SolverConfig, optional): solver settings

    Returns:
        LagrangianReport: value, maximiser, iterations and KKT residual
    """
    config = config or SolverConfig()
    log = Logger('Lagrangian')
    n, k, edges = graph.n, graph.k, graph.edge_array

    if n == 0 or graph.m == 0:
        maximiser = Weighting.uniform(graph.vertices)
        return LagrangianReport(0.0, maximiser, SolverMethod.MULTISTART_GRADIENT, 0, 0.0, 0, config.seed)

    def objective(x):
        return _poly(edges, k, x)

    def gradient(x):
        return _grad(edges, k, n, x)

    def climb(x0: np.ndarray) -> AscentResult:
        return projected_gradient_ascent(objective, gradient, x0, config.grad_tol, config.max_iter)

    starts = start_points(graph, config)
    log.debug(f'{len(starts)} starts for a {k}-graph with n={n}, |E|={graph.m}')
    results = parallel_map(climb, starts, config.max_workers)
    best = best_of(results)
    iterations = sum(r.iterations for r in results)
    unconverged = sum(1 for r in results if not r.converged)
    if unconverged:
        log.debug(f'{unconverged} of {len(results)} restarts hit max_iter')

    method = SolverMethod.MULTISTART_GRADIENT
    oracle_value = None
    if n <= config.oracle_cap:
        oracle, point = grid_search(graph, config.oracle_resolution, config.oracle_budget)
        oracle_value = float(oracle)
        if best.value < oracle_value - config.tolerance:
            log.warning(f'Ascent value {best.value:.12f} is below the grid oracle {oracle_value:.12f}; restarting from the grid point')
            grid_x = point / config.oracle_resolution
            polished = climb(grid_x)
            iterations += polished.iterations
            best = best_of([best, polished])
            if best.value < oracle_value:
                best = AscentResult(grid_x, oracle_value, 0, True)
                method = SolverMethod.GRID

    maximiser = Weighting.from_array(graph.vertices, best.x)
    x = maximiser.as_array()
    value = _poly(edges, k, x)
    residual = kkt_residual(x, gradient(x))
    return LagrangianReport(value, maximiser, method, iterations, residual, len(starts), config.seed, oracle_value)
