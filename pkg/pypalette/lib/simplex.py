"""Tools for optimising over the standard simplex S_d = {x >= 0, sum x = 1}"""

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

ArrayFn = Callable[[np.ndarray], float]
GradFn = Callable[[np.ndarray], np.ndarray]
# values (c,), jacobian (c, d)
ComponentFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]

TIE_TOL = 1e-12
TIE_DECIMALS = 9


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the simplex by the sort-and-threshold method

    Returns argmin ||x - v||^2 subject to sum(x) = 1 and x >= 0.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if n == 0:
        return v.copy()
    u = -np.sort(-v)
    thresholds = (np.cumsum(u) - 1.0) / np.arange(1, n + 1)
    rho = np.nonzero(u > thresholds)[0][-1]
    x = np.maximum(v - thresholds[rho], 0.0)
    # keep the sum exactly 1 up to float dust
    return x / x.sum()


def uniform_point(dim: int) -> np.ndarray:
    return np.full(dim, 1.0 / dim) if dim > 0 else np.zeros(0)


def face_point(dim: int, support: Sequence[int]) -> np.ndarray:
    """Uniform point on the face spanned by `support` (0-based indices)"""
    x = np.zeros(dim)
    x[list(support)] = 1.0 / len(support)
    return x


def random_simplex_points(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniformly distributed simplex points (flat Dirichlet), shape (count, dim)"""
    if dim == 0:
        return np.zeros((count, 0))
    return rng.dirichlet(np.ones(dim), size=count)


def count_compositions(m: int, parts: int) -> int:
    """Number of ways to write m as an ordered sum of `parts` non-negative integers"""
    if parts == 0:
        return 1 if m == 0 else 0
    return math.comb(m + parts - 1, parts - 1)


def compositions(m: int, parts: int) -> np.ndarray:
    """Every composition of m into `parts` non-negative parts, shape (count, parts)

    Stars and bars: choose the parts-1 bar positions among m+parts-1 slots.
    Rows come out in a fixed (lexicographic bar position) order.
    """
    if parts == 0:
        return np.zeros((1 if m == 0 else 0, 0), dtype=np.int64)
    if parts == 1:
        return np.array([[m]], dtype=np.int64)
    slots = m + parts - 1
    bars = np.array(list(itertools.combinations(range(slots), parts - 1)), dtype=np.int64).reshape(-1, parts - 1)
    left = np.concatenate([np.full((bars.shape[0], 1), -1), bars], axis=1)
    right = np.concatenate([bars, np.full((bars.shape[0], 1), slots)], axis=1)
    return right - left - 1


def kkt_residual(x: np.ndarray, grad: np.ndarray, eps: float = 1e-12) -> float:
    """Largest violation of the first-order conditions for max f on the simplex

    With mu = <x, grad>, a KKT point has grad_i <= mu everywhere and grad_i = mu on the support.
    """
    if x.size == 0:
        return 0.0
    mu = float(x @ grad)
    outside = float(np.max(grad - mu))
    support = x > eps
    inside = float(np.max(np.abs(grad[support] - mu))) if support.any() else 0.0
    return max(outside, inside, 0.0)


@dataclass
class AscentResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool


def projected_gradient_ascent(objective: ArrayFn, gradient: GradFn, x0: np.ndarray, grad_tol: float = 1e-10, max_iter: int = 5000, armijo: float = 1e-4) -> AscentResult:
    """Maximise a smooth function over the simplex

    Step length by backtracking (Armijo) line search along the projection arc.
    Stops when the projected gradient step ||P(x + g) - x|| drops below grad_tol.
    """
    x = project_to_simplex(x0)
    f = objective(x)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        g = gradient(x)
        if np.linalg.norm(project_to_simplex(x + g) - x) < grad_tol:
            return AscentResult(x, f, it, True)
        s = min(step * 2.0, 1e6)
        while True:
            x_new = project_to_simplex(x + s * g)
            f_new = objective(x_new)
            if f_new >= f + armijo * float(g @ (x_new - x)):
                break
            s *= 0.5
            if s < 1e-20:
                return AscentResult(x, f, it, False)
        if np.max(np.abs(x_new - x)) < 1e-16:
            return AscentResult(x, f, it, True)
        x, f, step = x_new, f_new, s
    return AscentResult(x, f, it, False)


def best_of(results: Sequence[AscentResult]) -> AscentResult:
    """Deterministic reduction: highest value, ties broken by the lexicographically smallest rounded point"""
    top = max(r.value for r in results)
    contenders = [r for r in results if r.value >= top - TIE_TOL]
    return min(contenders, key=lambda r: tuple(np.round(r.x, TIE_DECIMALS)))


def softmin(values: np.ndarray, tau: float) -> tuple[float, np.ndarray]:
    """Smooth lower approximation of min(values) and its weights

    -tau * log(sum exp(-v / tau)) lies within tau * log(len(v)) below the true minimum.
    """
    low = float(values.min())
    w = np.exp(-(values - low) / tau)
    total = float(w.sum())
    return low - tau * math.log(total), w / total


def temperature_schedule(start: float, end: float, factor: float) -> list[float]:
    temps = []
    tau = start
    while tau > end * (1 + 1e-12):
        temps.append(tau)
        tau *= factor
    temps.append(end)
    return temps


def maxmin_ascent(components: ComponentFn, x0: np.ndarray, temperatures: Sequence[float], stage_iter: int = 200) -> tuple[np.ndarray, int]:
    """Approximately maximise min_i c_i(x) over the simplex with a softmin homotopy

    Each stage runs projected gradient ascent on the softmin surrogate at one
    temperature, warm started from the previous stage.

    Returns:
        tuple[np.ndarray, int]: final point and total iterations
    """

    x = project_to_simplex(x0)
    total = 0
    for tau in temperatures:

        def surrogate(y, tau=tau):
            return softmin(components(y)[0], tau)[0]

        def surrogate_grad(y, tau=tau):
            vals, jac = components(y)
            return softmin(vals, tau)[1] @ jac

        result = projected_gradient_ascent(surrogate, surrogate_grad, x, grad_tol=1e-12, max_iter=stage_iter)
        x = result.x
        total += result.iterations
    return x, total


def lattice_refine(objective: ArrayFn, x: np.ndarray, steps: Sequence[float], max_passes: int = 20) -> tuple[np.ndarray, float]:
    """Local grid search on the simplex: move mass h between coordinate pairs while it helps

    Used to polish max-min objectives, which are not differentiable at the optimum.
    """
    x = x.copy()
    f = objective(x)
    d = x.size
    for h in steps:
        for _ in range(max_passes):
            improved = False
            for i in range(d):
                for j in range(d):
                    if i == j or x[i] <= 0:
                        continue
                    t = min(h, x[i])
                    y = x.copy()
                    y[i] -= t
                    y[j] += t
                    fy = objective(y)
                    if fy > f + 1e-15:
                        x, f, improved = y, fy, True
            if not improved:
                break
    return x, f
