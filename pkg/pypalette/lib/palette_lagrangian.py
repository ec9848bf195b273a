"""Palette Lagrangians

For a palette P over colours Phi and a weighting x of Phi:

    lambda^vvv_P(x)  = sum over (a, b, c) in P of x_a x_b x_c
    lambda^a_P(x)    = min over the three positions of the weight of triples with a in that position
    lambda^{a,b}_P(x)= min over the six ordered position patterns of the weight of the remaining colour
    lambda^ev_P(x)   = min of lambda^a over colours with x_a > 0
    lambda^ee_P(x)   = min of lambda^{a,b} over (not necessarily distinct) a, b with x_a x_b > 0

ev and ee are discontinuous where a weight reaches zero, so their maxima are
found face by face: on the face spanned by a support S the objective is a
continuous min of finitely many components.
"""

import itertools
import math
from collections.abc import Sequence
from fractions import Fraction

import numpy as np
from rsxml import Logger

from pypalette.classes.config import PaletteSolverConfig
from pypalette.classes.exceptions import (
    DimensionException,
    OracleBudgetException,
    PaletteTooLargeException,
    PyPaletteException,
    WeightingException,
)
from pypalette.classes.hypergraph import Hypergraph
from pypalette.classes.palette import Palette
from pypalette.classes.reports import PaletteLagrangianReport, SolverMethod
from pypalette.classes.weighting import POSITIVITY_EPS, StarMode, Weighting
from pypalette.lib.parallel import parallel_map, spawn_generators
from pypalette.lib.simplex import (
    AscentResult,
    best_of,
    compositions,
    count_compositions,
    face_point,
    kkt_residual,
    lattice_refine,
    maxmin_ascent,
    projected_gradient_ascent,
    random_simplex_points,
    temperature_schedule,
    uniform_point,
)

# (position of a, the two other positions)
DEGREE_POSITIONS = ((0, 1, 2), (1, 0, 2), (2, 0, 1))
# (position of a, position of b, free position)
CODEGREE_PATTERNS = ((0, 1, 2), (1, 0, 2), (0, 2, 1), (2, 0, 1), (1, 2, 0), (2, 1, 0))

DEFAULT_ORACLE_BUDGET = 2_000_000


def _as_vector(palette: Palette, x: Weighting | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(x, Weighting):
        return x.expect_keys(palette.colours, 'this palette')
    arr = np.asarray(x, dtype=float)
    if arr.shape != (palette.r,):
        raise DimensionException(f'Weight vector has shape {arr.shape} but the palette has {palette.r} colours')
    return arr


# ---------------------------------------------------------------------------
# Building blocks on dense arrays: T is a (t, 3) array of colour indices
# ---------------------------------------------------------------------------


def _vvv(triples: np.ndarray, x: np.ndarray) -> float:
    if triples.shape[0] == 0:
        return 0.0
    return float(np.prod(x[triples], axis=1).sum())


def _vvv_grad(triples: np.ndarray, r: int, x: np.ndarray) -> np.ndarray:
    grad = np.zeros(r)
    if triples.shape[0] == 0:
        return grad
    xt = x[triples]
    for p, q, s in DEGREE_POSITIONS:
        grad += np.bincount(triples[:, p], weights=xt[:, q] * xt[:, s], minlength=r)
    return grad


def _degree_sums(triples: np.ndarray, r: int, x: np.ndarray) -> np.ndarray:
    """(3, r): row p, column a is the weight of the triples with a in position p"""
    sums = np.zeros((3, r))
    if triples.shape[0] == 0:
        return sums
    xt = x[triples]
    for row, (p, q, s) in enumerate(DEGREE_POSITIONS):
        sums[row] = np.bincount(triples[:, p], weights=xt[:, q] * xt[:, s], minlength=r)
    return sums


def _codegree_sums(triples: np.ndarray, r: int, x: np.ndarray) -> np.ndarray:
    """(6, r, r): pattern i, entry (a, b) is the weight of the free colour over triples matching the pattern"""
    sums = np.zeros((6, r * r))
    if triples.shape[0] == 0:
        return sums.reshape(6, r, r)
    for row, (p, q, s) in enumerate(CODEGREE_PATTERNS):
        sums[row] = np.bincount(triples[:, p] * r + triples[:, q], weights=x[triples[:, s]], minlength=r * r)
    return sums.reshape(6, r, r)


def _per_colour_ev(palette: Palette, x: np.ndarray, eps: float) -> dict[int, float]:
    table = _degree_sums(palette.triple_array, palette.r, x).min(axis=0)
    return {c: float(table[i]) for i, c in enumerate(palette.colours) if x[i] > eps}


def _per_colour_ee(palette: Palette, x: np.ndarray, eps: float) -> dict[tuple[int, int], float]:
    table = _codegree_sums(palette.triple_array, palette.r, x).min(axis=0)
    live = [i for i in range(palette.r) if x[i] > eps]
    colours = palette.colours
    return {(colours[i], colours[j]): float(table[i, j]) for i, j in itertools.combinations_with_replacement(live, 2)}


# ---------------------------------------------------------------------------
# Public evaluation
# ---------------------------------------------------------------------------


def lambda_vvv(palette: Palette, x: Weighting | Sequence[float] | np.ndarray) -> float:
    """Sum over the triples (a, b, c) of x_a x_b x_c"""
    return _vvv(palette.triple_array, _as_vector(palette, x))


def degree_lagrangian(palette: Palette, colour: int, x: Weighting | Sequence[float] | np.ndarray) -> float:
    """lambda^a: the smallest of the three position-restricted sums for colour a

    Raises:
        UnknownColourException: colour not in Phi(P)
    """
    i = palette.index_of(colour)
    return float(_degree_sums(palette.triple_array, palette.r, _as_vector(palette, x))[:, i].min())


def codegree_lagrangian(palette: Palette, a: int, b: int, x: Weighting | Sequence[float] | np.ndarray) -> float:
    """lambda^{a,b}: the smallest of the six ordered position-pattern sums (a == b allowed)"""
    i, j = palette.index_of(a), palette.index_of(b)
    return float(_codegree_sums(palette.triple_array, palette.r, _as_vector(palette, x))[:, i, j].min())


def lambda_ev(palette: Palette, x: Weighting | Sequence[float] | np.ndarray, eps: float = POSITIVITY_EPS) -> float:
    """min of lambda^a over the colours whose weight is above eps

    Raises:
        WeightingException: no colour has positive weight
    """
    per_colour = _per_colour_ev(palette, _as_vector(palette, x), eps)
    if not per_colour:
        raise WeightingException('lambda^ev needs at least one colour with positive weight')
    return min(per_colour.values())


def lambda_ee(palette: Palette, x: Weighting | Sequence[float] | np.ndarray, eps: float = POSITIVITY_EPS) -> float:
    """min of lambda^{a,b} over the colour pairs (a == b included) whose weights are above eps"""
    per_pair = _per_colour_ee(palette, _as_vector(palette, x), eps)
    if not per_pair:
        raise WeightingException('lambda^ee needs at least one colour with positive weight')
    return min(per_pair.values())


def evaluate(palette: Palette, star: StarMode, x: Weighting | Sequence[float] | np.ndarray) -> float:
    star = StarMode.parse(star)
    if star == StarMode.VVV:
        return lambda_vvv(palette, x)
    if star == StarMode.EV:
        return lambda_ev(palette, x)
    return lambda_ee(palette, x)


# ---------------------------------------------------------------------------
# Grid oracle
# ---------------------------------------------------------------------------


def palette_grid_search(palette: Palette, star: StarMode, resolution: int, budget: int = DEFAULT_ORACLE_BUDGET) -> tuple[Fraction, np.ndarray]:
    """Exact maximum of lambda^star over the simplex points c / resolution

    Everything is evaluated on the integer compositions c, so the result is an
    exact rational.

    Returns:
        tuple[Fraction, np.ndarray]: the maximum and the first maximising composition
    """
    star = StarMode.parse(star)
    r, m = palette.r, resolution
    if resolution < 1:
        raise ValueError(f'Grid resolution must be at least 1, got {resolution}')
    if r == 0:
        return Fraction(0), np.zeros(0, dtype=np.int64)
    count = count_compositions(m, r)
    if count > budget:
        raise OracleBudgetException(f'Palette grid oracle needs {count:,} points (|Phi|={r}, m={m}), budget is {budget:,}')
    points = compositions(m, r)
    triples = palette.triple_array
    npts = points.shape[0]

    if star == StarMode.VVV:
        scores = np.zeros(npts, dtype=np.int64)
        for tri in triples:
            scores += points[:, tri[0]] * points[:, tri[1]] * points[:, tri[2]]
        denominator = m**3
    elif star == StarMode.EV:
        sums = np.zeros((npts, 3, r), dtype=np.int64)
        for tri in triples:
            for row, (p, q, s) in enumerate(DEGREE_POSITIONS):
                sums[:, row, tri[p]] += points[:, tri[q]] * points[:, tri[s]]
        per_colour = sums.min(axis=1)
        big = np.iinfo(np.int64).max
        scores = np.where(points > 0, per_colour, big).min(axis=1)
        denominator = m**2
    else:
        sums = np.zeros((npts, 6, r, r), dtype=np.int64)
        for tri in triples:
            for row, (p, q, s) in enumerate(CODEGREE_PATTERNS):
                sums[:, row, tri[p], tri[q]] += points[:, tri[s]]
        per_pair = sums.min(axis=1)
        live = points > 0
        mask = live[:, :, None] & live[:, None, :]
        big = np.iinfo(np.int64).max
        scores = np.where(mask, per_pair, big).reshape(npts, -1).min(axis=1)
        denominator = m

    best = int(np.argmax(scores))
    return Fraction(int(scores[best]), denominator), points[best]


def palette_grid_oracle(palette: Palette, star: StarMode, resolution: int, budget: int = DEFAULT_ORACLE_BUDGET) -> Fraction:
    """Exact maximum of lambda^star_P over the rational simplex points with denominator `resolution`"""
    return palette_grid_search(palette, star, resolution, budget)[0]


# ---------------------------------------------------------------------------
# Max-min components on one face
# ---------------------------------------------------------------------------


def _restrict(triples: np.ndarray, r: int, support: Sequence[int]) -> np.ndarray:
    """Triples whose colours all lie in the support, re-indexed to positions in the support"""
    lookup = np.full(r, -1, dtype=np.int64)
    lookup[list(support)] = np.arange(len(support))
    mapped = lookup[triples]
    return mapped[(mapped >= 0).all(axis=1)].reshape(-1, 3)


def _ev_components(triples: np.ndarray, s: int):
    def components(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        values = _degree_sums(triples, s, y).ravel()
        jac = np.zeros((3, s, s))
        yt = y[triples]
        for row, (p, q, t) in enumerate(DEGREE_POSITIONS):
            np.add.at(jac[row], (triples[:, p], triples[:, q]), yt[:, t])
            np.add.at(jac[row], (triples[:, p], triples[:, t]), yt[:, q])
        return values, jac.reshape(3 * s, s)

    return components


def _ee_components(triples: np.ndarray, s: int):
    # every codegree sum is linear in y, so the jacobian is a fixed count tensor
    jac = np.zeros((6, s, s, s))
    for row, (p, q, t) in enumerate(CODEGREE_PATTERNS):
        np.add.at(jac[row], (triples[:, p], triples[:, q], triples[:, t]), 1.0)
    jac = jac.reshape(6 * s * s, s)

    def components(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return jac @ y, jac

    return components


def _quadratic_bound(pairs: np.ndarray) -> float:
    """Upper bound for the sum over the distinct ordered pairs (q, s) of y_q y_s on the simplex

    With a diagonal pair the plain bound 1 is used. Otherwise an unordered pair
    occurs at most `mult` times and Motzkin-Straus bounds the graph part by
    (1 - 1/k) / 2 on the k colours involved.
    """
    if pairs.shape[0] == 0:
        return 0.0
    if (pairs[:, 0] == pairs[:, 1]).any():
        return 1.0
    _, mult = np.unique(np.sort(pairs, axis=1), axis=0, return_counts=True)
    k = len(np.unique(pairs))
    return float(mult.max()) * (1 - 1 / k) / 2


def face_upper_bound(triples: np.ndarray, star: StarMode, s: int) -> float:
    """Upper bound for the ev or ee min on the closed face of s colours

    `triples` are already restricted to the face (colour indices 0..s-1). Both
    objectives are at most the y-weighted average of their components, which is
    lambda^vvv, so the sum of the per-monomial maxima (1/27, 4/27 or 1) bounds
    them. ev is also at most every single position sum, and ee is 0 as soon as
    some ordered pair pattern has no triple.
    """
    if triples.shape[0] == 0:
        return 0.0
    distinct = np.array([len(set(t)) for t in triples.tolist()])
    bound = min(1.0, float(np.select([distinct == 3, distinct == 2], [1 / 27, 4 / 27], 1.0).sum()))
    if star == StarMode.EV:
        for a in range(s):
            for p, q, t in DEGREE_POSITIONS:
                rows = triples[triples[:, p] == a]
                bound = min(bound, _quadratic_bound(rows[:, [q, t]]))
        return bound
    counts = np.zeros((6, s, s), dtype=np.int64)
    for row, (p, q, _) in enumerate(CODEGREE_PATTERNS):
        np.add.at(counts[row], (triples[:, p], triples[:, q]), 1)
    return 0.0 if counts.min() == 0 else bound


def _solve_face(palette: Palette, star: StarMode, support: tuple[int, ...], rng: np.random.Generator, config: PaletteSolverConfig, bound: float = math.inf) -> tuple[np.ndarray, int]:
    """Maximise the closed-face min over one support; returns the full-length point and iterations

    Restarts stop early once the face reaches `bound` or `config.face_patience`
    climbs in a row bring no improvement.
    """
    r, s = palette.r, len(support)
    triples = _restrict(palette.triple_array, r, support)
    y_best = uniform_point(s)
    iterations = 0
    tol = config.solver.tolerance
    if triples.shape[0] > 0:
        components = _ev_components(triples, s) if star == StarMode.EV else _ee_components(triples, s)

        def face_min(y):
            return float(components(y)[0].min())

        temperatures = temperature_schedule(config.temperature_start, config.temperature_end, config.temperature_factor)
        starts = [uniform_point(s), *random_simplex_points(rng, max(config.restarts_per_support - 1, 0), s)]
        climbs = []
        top, stale = -math.inf, 0
        for y0 in starts:
            y, its = maxmin_ascent(components, y0, temperatures, config.stage_iter)
            iterations += its
            value = face_min(y)
            climbs.append(AscentResult(y, value, its, True))
            if value > top + tol:
                top, stale = value, 0
            else:
                stale += 1
            if top >= bound - tol or (config.face_patience is not None and stale >= config.face_patience):
                break
        best = best_of(climbs)
        y_best, _ = lattice_refine(face_min, best.x, config.refine_steps)
    x = np.zeros(r)
    x[list(support)] = y_best
    return x, iterations


def _candidate_value(palette: Palette, star: StarMode, x: np.ndarray) -> float:
    per = _per_colour_ev(palette, x, POSITIVITY_EPS) if star == StarMode.EV else _per_colour_ee(palette, x, POSITIVITY_EPS)
    return min(per.values()) if per else 0.0


# ---------------------------------------------------------------------------
# Maximisation
# ---------------------------------------------------------------------------


def _maximise_vvv(palette: Palette, config: PaletteSolverConfig) -> tuple[np.ndarray, int, int]:
    solver = config.solver
    triples, r = palette.triple_array, palette.r
    rng = np.random.default_rng(solver.seed)
    starts = [uniform_point(r)]
    starts += [face_point(r, sorted(set(tri.tolist()))) for tri in triples]
    starts += list(random_simplex_points(rng, solver.starts, r))

    def climb(x0):
        return projected_gradient_ascent(lambda x: _vvv(triples, x), lambda x: _vvv_grad(triples, r, x), x0, solver.grad_tol, solver.max_iter)

    results = parallel_map(climb, starts, solver.max_workers)
    best = best_of(results)
    return best.x, sum(res.iterations for res in results), len(starts)


def _maximise_by_support(palette: Palette, star: StarMode, config: PaletteSolverConfig) -> tuple[np.ndarray, int]:
    log = Logger('PaletteLagrangian')
    r = palette.r
    supports = [tuple(c) for size in range(1, r + 1) for c in itertools.combinations(range(r), size)]
    generators = spawn_generators(config.solver.seed, len(supports))
    bounds = [face_upper_bound(_restrict(palette.triple_array, r, support), star, len(support)) for support in supports]
    # batch boundaries do not depend on the worker count, so neither does the result
    order = sorted(range(len(supports)), key=lambda i: (-bounds[i], i))
    solved: dict[int, tuple[np.ndarray, int]] = {}
    incumbent = -math.inf
    step = max(config.face_batch, 1)
    for start in range(0, len(order), step):
        batch = [i for i in order[start : start + step] if bounds[i] > incumbent + config.solver.tolerance]
        if not batch:
            break
        results = parallel_map(lambda i: _solve_face(palette, star, supports[i], generators[i], config, bounds[i]), batch, config.solver.max_workers)
        for i, (x, its) in zip(batch, results, strict=True):
            solved[i] = (x, its)
            incumbent = max(incumbent, _candidate_value(palette, star, x))
    log.debug(f'{star.value}: solved {len(solved)} of {len(supports)} supports, the rest are bounded by {incumbent:.9f}')
    candidates = [AscentResult(x, _candidate_value(palette, star, x), its, True) for x, its in (solved[i] for i in sorted(solved))]
    return best_of(candidates).x, sum(its for _, its in solved.values())


def palette_lagrangian(palette: Palette, star: StarMode | str, config: PaletteSolverConfig | None = None) -> PaletteLagrangianReport:
    """Maximise lambda^star_P over the simplex on Phi(P)

    vvv is smooth and uses the multistart projected ascent. ev and ee enumerate
    the non-empty supports when |Phi| <= config.support_cap and run a softmin
    homotopy on each face, polished by a local lattice search. Faces whose
    upper bound (face_upper_bound) cannot beat the best value found are
    skipped. Above the cap a single full-simplex run is returned and flagged as
    heuristic (or PaletteTooLargeException if config.strict). Palettes with few
    colours are cross-checked against the exact grid oracle.

    Args:
        palette (Palette): P
        star (StarMode | str): vvv, ev or ee
        config (PaletteSolverConfig, optional): solver settings

    Returns:
        PaletteLagrangianReport: the optimum estimate, its maximiser and support
    """
    config = config or PaletteSolverConfig()
    star = StarMode.parse(star)
    log = Logger('PaletteLagrangian')
    r = palette.r
    seed = config.solver.seed

    if r == 0:
        # the empty palette carries no weight at all
        return PaletteLagrangianReport(star, 0.0, Weighting((), ()), (), {}, SolverMethod.MULTISTART_GRADIENT, seed=seed)

    heuristic = False
    method = SolverMethod.MULTISTART_GRADIENT
    residual = 0.0
    if star == StarMode.VVV:
        x, iterations, _ = _maximise_vvv(palette, config)
    elif r <= config.support_cap:
        method = SolverMethod.SUPPORT_ENUM
        x, iterations = _maximise_by_support(palette, star, config)
    else:
        if config.strict:
            raise PaletteTooLargeException(f'palette too large for exact support enumeration: {r} colours, cap is {config.support_cap}')
        log.warning(f'palette too large for exact support enumeration ({r} colours > {config.support_cap}); falling back to a single heuristic run')
        heuristic = True
        x, iterations = _solve_face(palette, star, tuple(range(r)), np.random.default_rng(seed), config)

    oracle_value = None
    if r <= config.oracle_cap:
        oracle, point = palette_grid_search(palette, star, config.oracle_resolution, config.solver.oracle_budget)
        oracle_value = float(oracle)
        current = _vvv(palette.triple_array, x) if star == StarMode.VVV else _candidate_value(palette, star, x)
        if current < oracle_value - config.solver.tolerance:
            log.warning(f'{star.value} solver value {current:.12f} is below the grid oracle {oracle_value:.12f}; using the grid point')
            x = point / config.oracle_resolution
            method = SolverMethod.GRID

    maximiser = Weighting.from_array(palette.colours, x)
    x = maximiser.as_array()
    if star == StarMode.VVV:
        per_colour = {}
        value = _vvv(palette.triple_array, x)
        residual = kkt_residual(x, _vvv_grad(palette.triple_array, r, x))
    elif star == StarMode.EV:
        per_colour = _per_colour_ev(palette, x, POSITIVITY_EPS)
        value = min(per_colour.values())
    else:
        per_colour = _per_colour_ee(palette, x, POSITIVITY_EPS)
        value = min(per_colour.values())

    return PaletteLagrangianReport(
        star=star,
        value=value,
        maximiser=maximiser,
        support=maximiser.support(POSITIVITY_EPS),
        per_colour=per_colour,
        method=method,
        iterations=iterations,
        residual=residual,
        heuristic=heuristic,
        seed=seed,
        oracle_value=oracle_value,
    )


# ---------------------------------------------------------------------------
# p_t palettes
# ---------------------------------------------------------------------------


def build_pt(graph: Hypergraph, t: int) -> Palette:
    """The palette made of the lexicographically first t permutations of every edge

    Colours are the vertices of F, so lambda^vvv of the result is (t / 6) * lambda_F
    at every weighting.

    Raises:
        PyPaletteException: t outside 1..6 or F not 3-uniform
    """
    if graph.k != 3:
        raise PyPaletteException(f'p_t palettes are built from 3-graphs, got a {graph.k}-graph')
    if not 1 <= t <= math.factorial(3):
        raise PyPaletteException(f't must be between 1 and 6, got {t}')
    triples = []
    for edge in graph.edges:
        triples.extend(sorted(itertools.permutations(edge))[:t])
    return Palette(tuple(triples))
