"""Random palette constructions, exact witness counting and density audits

Counting conventions (vertices 1..n, pairs unordered):

    e_vvv(X, Y, Z)  ordered (x, y, z) in X x Y x Z with xyz an edge
    e_ev(X, P)      (x, {y, z}) with x in X, {y, z} in P and xyz an edge
    K_ee(P, Q)      ordered (x, y, z) with {x, y} in P and {y, z} in Q (x = z allowed)
    e_ee(P, Q)      the members of K_ee(P, Q) that are edges
"""

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence

import numpy as np
from rsxml import Logger, ProgressBar

from pypalette.classes.colouring import SENTINEL_COLOUR, UNCOLOURED, PairColouring
from pypalette.classes.config import AuditConfig, AuditMode
from pypalette.classes.exceptions import AuditSizeException, CertificateException, PyPaletteException
from pypalette.classes.hypergraph import Hypergraph
from pypalette.classes.palette import Palette
from pypalette.classes.reports import DensityAudit, PaletteConstruction
from pypalette.classes.weighting import StarMode, Weighting
from pypalette.lib.parallel import parallel_map, spawn_generators

ORIENTATIONS = tuple(itertools.permutations(range(3)))
# (position of x, the two positions forming the pair)
SPLITS = ((0, 1, 2), (1, 0, 2), (2, 0, 1))

Witness = tuple[tuple, ...]


def _require_3graph(graph: Hypergraph):
    if graph.k != 3:
        raise PyPaletteException(f'Expected a 3-graph, got a {graph.k}-graph')


def _indicator(graph: Hypergraph, vertices: Iterable[int], what: str) -> np.ndarray:
    mask = np.zeros(graph.n, dtype=bool)
    for v in vertices:
        v = int(v)
        if not 1 <= v <= graph.n:
            raise PyPaletteException(f'{what} contains vertex {v}, outside 1..{graph.n}')
        mask[v - 1] = True
    return mask


def _pair_matrix(graph: Hypergraph, pairs: Iterable[Iterable[int]], what: str) -> np.ndarray:
    mat = np.zeros((graph.n, graph.n), dtype=bool)
    for pair in pairs:
        u, v = (int(x) for x in pair)
        if u == v or not (1 <= u <= graph.n and 1 <= v <= graph.n):
            raise PyPaletteException(f'{what} contains ({u}, {v}), which is not a pair of distinct vertices in 1..{graph.n}')
        mat[u - 1, v - 1] = mat[v - 1, u - 1] = True
    return mat


def count_evvv(graph: Hypergraph, xs: Iterable[int], ys: Iterable[int], zs: Iterable[int]) -> int:
    """|E_vvv(X, Y, Z)|: ordered triples of X x Y x Z whose vertex set is an edge"""
    _require_3graph(graph)
    x, y, z = _indicator(graph, xs, 'X'), _indicator(graph, ys, 'Y'), _indicator(graph, zs, 'Z')
    edges = graph.edge_array
    return int(sum((x[edges[:, p]] & y[edges[:, q]] & z[edges[:, s]]).sum() for p, q, s in ORIENTATIONS))


def count_eev(graph: Hypergraph, xs: Iterable[int], pairs: Iterable[Iterable[int]]) -> int:
    """|E_ev(X, P)|: each (x, {y, z}) is counted once"""
    _require_3graph(graph)
    x, pm = _indicator(graph, xs, 'X'), _pair_matrix(graph, pairs, 'P')
    edges = graph.edge_array
    return int(sum((x[edges[:, p]] & pm[edges[:, q], edges[:, s]]).sum() for p, q, s in SPLITS))


def count_kee_and_eee(graph: Hypergraph, p_pairs: Iterable[Iterable[int]], q_pairs: Iterable[Iterable[int]]) -> tuple[int, int]:
    """(|K_ee(P, Q)|, |E_ee(P, Q)|)

    K_ee counts every hinge y with a P-neighbour x and a Q-neighbour z, so it is
    the sum over y of deg_P(y) * deg_Q(y) and includes the degenerate x = z
    triples, which are never edges.
    """
    _require_3graph(graph)
    pm, qm = _pair_matrix(graph, p_pairs, 'P'), _pair_matrix(graph, q_pairs, 'Q')
    k_ee = int((pm.sum(axis=1).astype(np.int64) * qm.sum(axis=1)).sum())
    edges = graph.edge_array
    e_ee = int(sum((pm[edges[:, p], edges[:, q]] & qm[edges[:, q], edges[:, s]]).sum() for p, q, s in ORIENTATIONS))
    return k_ee, e_ee


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def hypergraph_from_colouring(palette: Palette, ordering: Sequence[int], colouring: PairColouring) -> Hypergraph:
    """The 3-graph of all triples whose ordered colour shadow under (ordering, colouring) is in P"""
    n = colouring.n
    order = np.asarray(ordering, dtype=np.int64)
    if sorted(order.tolist()) != list(range(1, n + 1)):
        raise CertificateException(f'Ordering is not a permutation of 1..{n}')
    r = palette.r
    if r == 0 or n < 3:
        return Hypergraph(3, n, ())

    # colour matrix in ordering positions, mapped to dense palette indices (r = not a palette colour)
    mat = colouring.matrix[np.ix_(order, order)]
    colours = np.asarray(palette.colours, dtype=np.int64)
    idx = np.searchsorted(colours, mat).clip(max=r - 1)
    dense = np.where(colours[idx] == mat, idx, r)
    table = np.zeros((r + 1, r + 1, r + 1), dtype=bool)
    tri = palette.triple_array
    table[tri[:, 0], tri[:, 1], tri[:, 2]] = True

    chunks = []
    for j in range(1, n - 1):
        left, right = np.arange(j), np.arange(j + 1, n)
        hit = table[dense[left, j][:, None], dense[j, right][None, :], dense[np.ix_(left, right)]]
        ii, kk = np.nonzero(hit)
        if ii.size:
            chunks.append(np.stack([order[left[ii]], np.full(ii.size, order[j]), order[right[kk]]], axis=1))
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 3), dtype=np.int64)
    return Hypergraph(3, n, tuple(map(tuple, edges.tolist())))


def generate_construction(palette: Palette, weighting: Weighting, n: int, seed: int) -> PaletteConstruction:
    """The random construction behind the lower bound Lambda_P <= pi(F)

    Vertices keep their natural order, every pair {i < j} gets a colour drawn
    independently from the weighting, and {i < j < k} is an edge exactly when
    (phi(ij), phi(jk), phi(ik)) is a triple of P. The expected edge density is
    lambda^vvv_P(x).

    Args:
        palette (Palette): P
        weighting (Weighting): colour distribution over Phi(P)
        n (int): number of vertices, at least 3
        seed (int): generator seed

    Returns:
        PaletteConstruction: the hypergraph with its ordering and colouring
    """
    log = Logger('Construction')
    if n < 3:
        raise PyPaletteException(f'A construction needs at least 3 vertices, got {n}')
    ordering = tuple(range(1, n + 1))
    if palette.r == 0:
        return PaletteConstruction(Hypergraph(3, n, ()), ordering, PairColouring.constant(n, SENTINEL_COLOUR), weighting, seed)

    probs = weighting.expect_keys(palette.colours, 'this palette')
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    draws = rng.choice(palette.r, size=iu.size, p=probs)
    mat = np.full((n + 1, n + 1), UNCOLOURED, dtype=np.int64)
    mat[iu + 1, iv + 1] = mat[iv + 1, iu + 1] = np.asarray(palette.colours)[draws]
    colouring = PairColouring(n, mat)

    graph = hypergraph_from_colouring(palette, ordering, colouring)
    log.debug(f'Construction n={n} seed={seed}: {graph.m:,} edges, density {graph.density():.6f}')
    return PaletteConstruction(graph, ordering, colouring, weighting, seed)


def random_partite_colouring(sizes: Sequence[int], distributions: Mapping[tuple[int, int], Weighting], seed: int) -> tuple[PairColouring, tuple[tuple[int, ...], ...]]:
    """Colour the pairs between vertex classes independently, class pair by class pair

    Classes are consecutive blocks of vertices. Pairs between classes i < j
    (0-based) are coloured from distributions[(i, j)]; pairs inside a class stay
    uncoloured.

    Returns:
        tuple: the colouring and the classes as vertex tuples
    """
    n = sum(sizes)
    starts = np.concatenate([[1], 1 + np.cumsum(sizes)])
    classes = tuple(tuple(range(int(starts[i]), int(starts[i + 1]))) for i in range(len(sizes)))
    rng = np.random.default_rng(seed)
    mat = np.full((n + 1, n + 1), UNCOLOURED, dtype=np.int64)
    for i, j in itertools.combinations(range(len(sizes)), 2):
        if (i, j) not in distributions:
            raise PyPaletteException(f'No colour distribution for the class pair ({i}, {j})')
        dist = distributions[(i, j)]
        block = rng.choice(np.asarray(dist.keys), size=(sizes[i], sizes[j]), p=dist.as_array())
        rows, cols = np.asarray(classes[i])[:, None], np.asarray(classes[j])[None, :]
        mat[rows, cols] = block
        mat[cols.T, rows.T] = block.T
    return PairColouring(n, mat), classes


def count_colour_triangles(colouring: PairColouring, v1: Sequence[int], v2: Sequence[int], v3: Sequence[int], a: int, b: int, c: int) -> int:
    """|T_abc|: transversal triangles xyz (x in V1, y in V2, z in V3) with phi(xy)=a, phi(yz)=b, phi(xz)=c"""
    classes = [list(v1), list(v2), list(v3)]
    seen = set()
    for cls in classes:
        for v in cls:
            if not 1 <= v <= colouring.n:
                raise PyPaletteException(f'Vertex {v} outside 1..{colouring.n}')
            if v in seen:
                raise PyPaletteException(f'Vertex classes are not disjoint (vertex {v} repeats)')
            seen.add(v)
    mat = colouring.matrix
    m12 = (mat[np.ix_(classes[0], classes[1])] == a).astype(np.int64)
    m23 = (mat[np.ix_(classes[1], classes[2])] == b).astype(np.int64)
    m13 = (mat[np.ix_(classes[0], classes[2])] == c).astype(np.int64)
    return int(((m12 @ m23) * m13).sum())


# ---------------------------------------------------------------------------
# Density audits
# ---------------------------------------------------------------------------


def density_bound(count: int, size: int, eta: float, n: int) -> float:
    """Largest d with count >= d * size - eta * n^3, capped at 1"""
    if size <= 0:
        return 1.0
    return min(1.0, (count + eta * n**3) / size)


def _best_prefix(values: np.ndarray, weights: np.ndarray, slack: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per row, the item set minimising (sum values + slack) / (sum weights)

    The optimum is always a prefix of the items sorted by value / weight, so only
    prefixes are examined. Items of weight 0 are never useful.

    Returns:
        (bounds, prefix lengths, item orders), one entry per row
    """
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(weights > 0, values / np.where(weights > 0, weights, 1), np.inf)
    order = np.argsort(ratio, axis=1, kind='stable')
    cum_v = np.take_along_axis(values, order, axis=1).cumsum(axis=1)
    cum_w = np.take_along_axis(weights, order, axis=1).cumsum(axis=1)
    valid = np.take_along_axis(weights > 0, order, axis=1)
    with np.errstate(divide='ignore', invalid='ignore'):
        bounds = np.where(valid & (cum_w > 0), (cum_v + slack) / np.where(cum_w > 0, cum_w, 1), np.inf)
    if bounds.shape[1] == 0:
        return np.full(bounds.shape[0], np.inf), np.zeros(bounds.shape[0], dtype=np.int64), order
    best = np.argmin(bounds, axis=1)
    rows = np.arange(bounds.shape[0])
    return bounds[rows, best], best + 1, order


class _AuditGraph:
    """Adjacency in the shapes the batched witness evaluation needs"""

    def __init__(self, graph: Hypergraph, eta: float, dense_cap: int):
        self.graph = graph
        self.n = n = graph.n
        self.slack = eta * n**3
        edges = graph.edge_array
        self.orient = np.concatenate([edges[:, list(o)] for o in ORIENTATIONS]) if graph.m else np.zeros((0, 3), dtype=np.int64)
        self.iu, self.iv = np.triu_indices(n, 1)
        self.pair_id = np.full((n, n), -1, dtype=np.int64)
        self.pair_id[self.iu, self.iv] = self.pair_id[self.iv, self.iu] = np.arange(self.iu.size)
        self.adj = None
        if n <= dense_cap:
            adj = np.zeros((n, n, n), dtype=np.float32)
            adj[self.orient[:, 0], self.orient[:, 1], self.orient[:, 2]] = 1.0
            self.adj = adj

    @property
    def npairs(self) -> int:
        return self.iu.size

    def vvv_weights(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """(B, n): w[b, z] = number of (x, y) in X_b x Y_b with xyz an edge"""
        n = self.n
        if self.adj is not None:
            u = (xs.astype(np.float32) @ self.adj.reshape(n, n * n)).reshape(-1, n, n)
            return np.rint(np.einsum('by,byz->bz', ys.astype(np.float32), u)).astype(np.float64)
        o = self.orient
        return np.stack([np.bincount(o[:, 2], weights=(x[o[:, 0]] & y[o[:, 1]]).astype(np.float64), minlength=n) for x, y in zip(xs, ys, strict=True)])

    def vvv_slice(self, x: np.ndarray) -> np.ndarray:
        """(n, n): entry (y, z) is the number of x in X with xyz an edge (dense adjacency only)"""
        return (x.astype(np.float32) @ self.adj.reshape(self.n, self.n * self.n)).reshape(self.n, self.n)

    def ev_weights(self, xs: np.ndarray) -> np.ndarray:
        """(B, pairs): w[b, {u, v}] = number of x in X_b with xuv an edge"""
        n = self.n
        if self.adj is not None:
            u = (xs.astype(np.float32) @ self.adj.reshape(n, n * n)).reshape(-1, n, n)
            return np.rint(u[:, self.iu, self.iv]).astype(np.float64)
        edges = self.graph.edge_array
        out = np.zeros((xs.shape[0], self.npairs))
        for b, x in enumerate(xs):
            for p, q, s in SPLITS:
                out[b] += np.bincount(self.pair_id[edges[:, q], edges[:, s]], weights=x[edges[:, p]].astype(np.float64), minlength=self.npairs)
        return out

    def ee_weights(self, pms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """For pair sets P_b given as (B, n, n) matrices: e_q and |K_ee| contributions k_q per pair q"""
        n = self.n
        deg = pms.sum(axis=2).astype(np.float64)
        k = deg[:, self.iu] + deg[:, self.iv]
        if self.adj is not None:
            pf = pms.astype(np.float32)
            hinge = np.empty((pms.shape[0], n, n), dtype=np.float32)
            for u in range(n):
                hinge[:, u, :] = pf[:, u, :] @ self.adj[:, u, :]
            e = np.rint(hinge[:, self.iu, self.iv] + hinge[:, self.iv, self.iu]).astype(np.float64)
            return e, k
        o = self.orient
        qid = self.pair_id[o[:, 1], o[:, 2]]
        e = np.stack([np.bincount(qid, weights=pm[o[:, 0], o[:, 1]].astype(np.float64), minlength=self.npairs) for pm in pms])
        return e, k

    def pairs_to_matrix(self, chosen: np.ndarray) -> np.ndarray:
        """(B, pairs) booleans -> (B, n, n) symmetric matrices"""
        pms = np.zeros((chosen.shape[0], self.n, self.n), dtype=bool)
        pms[:, self.iu, self.iv] = chosen
        pms[:, self.iv, self.iu] = chosen
        return pms

    def pair_tuple(self, ids: Iterable[int]) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((int(self.iu[i]) + 1, int(self.iv[i]) + 1) for i in ids))


def _vertex_tuple(mask: np.ndarray) -> tuple[int, ...]:
    return tuple(int(v) + 1 for v in np.flatnonzero(mask))


def _pick_vvv(ag: _AuditGraph, xs: np.ndarray, ys: np.ndarray, w: np.ndarray) -> tuple[float, Witness | None]:
    size = (xs.sum(axis=1) * ys.sum(axis=1)).astype(np.float64)
    bounds, lengths, order = _best_prefix(w, np.repeat(size[:, None], ag.n, axis=1), ag.slack)
    b = int(np.argmin(bounds))
    if not np.isfinite(bounds[b]):
        return np.inf, None
    witness = (_vertex_tuple(xs[b]), _vertex_tuple(ys[b]), tuple(sorted(int(v) + 1 for v in order[b, : lengths[b]])))
    return float(bounds[b]), witness


def _evaluate(ag: _AuditGraph, star: StarMode, first: np.ndarray, second: np.ndarray | None = None) -> tuple[float, Witness | None]:
    """Best witness of a batch; the last argument of each witness is chosen optimally"""
    if first.shape[0] == 0:
        return np.inf, None
    if star == StarMode.VVV:
        return _pick_vvv(ag, first, second, ag.vvv_weights(first, second))
    if star == StarMode.EV:
        w = ag.ev_weights(first)
        size = first.sum(axis=1).astype(np.float64)
        bounds, lengths, order = _best_prefix(w, np.repeat(size[:, None], ag.npairs, axis=1), ag.slack)
        b = int(np.argmin(bounds))
        witness = (_vertex_tuple(first[b]), ag.pair_tuple(order[b, : lengths[b]]))
    else:
        e, k = ag.ee_weights(first)
        bounds, lengths, order = _best_prefix(e, k, ag.slack)
        b = int(np.argmin(bounds))
        p_ids = np.flatnonzero(first[b][ag.iu, ag.iv])
        witness = (ag.pair_tuple(p_ids), ag.pair_tuple(order[b, : lengths[b]]))
    if not np.isfinite(bounds[b]):
        return np.inf, None
    return float(bounds[b]), witness


def _structured_vertex_sets(graph: Hypergraph) -> np.ndarray:
    """V, the first and second halves, and the low- and high-degree halves"""
    n = graph.n
    half = max(n // 2, 1)
    by_degree = np.argsort(graph.degrees(), kind='stable')
    sets = np.zeros((5, n), dtype=bool)
    sets[0] = True
    sets[1, :half] = True
    sets[2, half:] = True
    sets[3, by_degree[:half]] = True
    sets[4, by_degree[n - half :]] = True
    return sets[sets.any(axis=1)]


def _structured_pair_sets(ag: _AuditGraph) -> np.ndarray:
    """All pairs, pairs inside the first half, crossing pairs, and the low/high codegree classes"""
    n, npairs = ag.n, ag.npairs
    if npairs == 0:
        return np.zeros((0, 0), dtype=bool)
    half = max(n // 2, 1)
    codegree = np.zeros(npairs, dtype=np.int64)
    edges = ag.graph.edge_array
    for _, q, s in SPLITS:
        np.add.at(codegree, ag.pair_id[edges[:, q], edges[:, s]], 1)
    by_codegree = np.argsort(codegree, kind='stable')
    mid = max(npairs // 2, 1)
    sets = np.zeros((5, npairs), dtype=bool)
    sets[0] = True
    sets[1] = ag.iv < half
    sets[2] = (ag.iu < half) & (ag.iv >= half)
    sets[3, by_codegree[:mid]] = True
    sets[4, by_codegree[npairs - mid :]] = True
    return sets[sets.any(axis=1)]


def _structured(ag: _AuditGraph, star: StarMode) -> tuple[float, Witness | None]:
    if star == StarMode.VVV:
        sets = _structured_vertex_sets(ag.graph)
        xi, yi = np.meshgrid(np.arange(len(sets)), np.arange(len(sets)), indexing='ij')
        return _evaluate(ag, star, sets[xi.ravel()], sets[yi.ravel()])
    if star == StarMode.EV:
        return _evaluate(ag, star, _structured_vertex_sets(ag.graph))
    return _evaluate(ag, star, ag.pairs_to_matrix(_structured_pair_sets(ag)))


def _sample_batch(ag: _AuditGraph, star: StarMode, rng: np.random.Generator, rhos: np.ndarray) -> tuple[float, Witness | None]:
    rho = rhos[:, None]
    size = rhos.size
    if star == StarMode.VVV:
        return _evaluate(ag, star, rng.random((size, ag.n)) < rho, rng.random((size, ag.n)) < rho)
    if star == StarMode.EV:
        return _evaluate(ag, star, rng.random((size, ag.n)) < rho)
    return _evaluate(ag, star, ag.pairs_to_matrix(rng.random((size, ag.npairs)) < rho))


def _all_masks(width: int) -> np.ndarray:
    """Every non-empty subset of range(width) as a boolean row"""
    codes = np.arange(1, 1 << width, dtype=np.int64)
    return ((codes[:, None] >> np.arange(width)) & 1).astype(bool)


def _exhaustive(ag: _AuditGraph, star: StarMode, config: AuditConfig, progress: bool) -> tuple[float, Witness | None, int]:
    log = Logger('DensityAudit')
    n = ag.n
    cap = config.vvv_exhaustive_cap if star == StarMode.VVV else config.pair_exhaustive_cap
    if n > cap:
        raise AuditSizeException(f'Exhaustive {star.value} audit is limited to n <= {cap}, got n={n}')

    best, witness = np.inf, None
    if star == StarMode.VVV:
        masks = _all_masks(n)
        bar = ProgressBar(len(masks), 50, 'Exhaustive vvv audit') if progress else None
        masks_f = masks.astype(np.float32)
        for i, x in enumerate(masks):
            # one (n, n) slice per X, then every Y at once
            w = np.rint(masks_f @ ag.vvv_slice(x)).astype(np.float64)
            bound, found = _pick_vvv(ag, np.broadcast_to(x, masks.shape), masks, w)
            if bound < best:
                best, witness = bound, found
            if bar:
                bar.update(i + 1)
        if bar:
            bar.finish()
        return best, witness, len(masks)

    if star == StarMode.EV:
        masks = _all_masks(n)
        bound, found = _evaluate(ag, star, masks)
        return bound, found, len(masks)

    total = (1 << ag.npairs) - 1
    chunk = 4096
    log.info(f'Exhaustive ee audit over {total:,} pair sets')
    bar = ProgressBar(total, 50, 'Exhaustive ee audit') if progress else None
    for start in range(1, total + 1, chunk):
        codes = np.arange(start, min(start + chunk, total + 1), dtype=np.int64)
        chosen = ((codes[:, None] >> np.arange(ag.npairs)) & 1).astype(bool)
        bound, found = _evaluate(ag, star, ag.pairs_to_matrix(chosen))
        if bound < best:
            best, witness = bound, found
        if bar:
            bar.update(int(codes[-1]))
    if bar:
        bar.finish()
    return best, witness, total


def _sampled(ag: _AuditGraph, star: StarMode, config: AuditConfig) -> tuple[float, Witness | None, int]:
    best, witness = (np.inf, None)
    if config.structured:
        best, witness = _structured(ag, star)

    batches = math.ceil(config.samples / config.batch_size) if config.samples > 0 else 0
    generators = spawn_generators(config.seed, batches)
    densities = np.asarray(config.densities, dtype=float)

    def run(job):
        index, rng = job
        start = index * config.batch_size
        stop = min(start + config.batch_size, config.samples)
        rhos = densities[np.arange(start, stop) % densities.size]
        return _sample_batch(ag, star, rng, rhos)

    for bound, found in parallel_map(run, list(enumerate(generators)), config.max_workers):
        if bound < best:
            best, witness = bound, found
    return best, witness, config.samples


def recount(graph: Hypergraph, star: StarMode, witness: Witness) -> tuple[int, int]:
    """Exact (count, size) of a witness: the edge count and the measure it is compared against"""
    if star == StarMode.VVV:
        x, y, z = witness
        return count_evvv(graph, x, y, z), len(x) * len(y) * len(z)
    if star == StarMode.EV:
        x, pairs = witness
        return count_eev(graph, x, pairs), len(x) * len(pairs)
    p, q = witness
    k_ee, e_ee = count_kee_and_eee(graph, p, q)
    return e_ee, k_ee


def audit_density(graph: Hypergraph, star: StarMode | str, config: AuditConfig | None = None, progress: bool = False) -> DensityAudit:
    """Largest d for which the (d, eta, star) inequality holds on every witness examined

    For each examined witness the last argument (Z for vvv, P for ev, Q for ee)
    is chosen optimally, since for fixed earlier arguments the worst one is a
    prefix of its items sorted by count per unit of measure. EXHAUSTIVE mode
    enumerates the remaining arguments completely and so certifies the bound for
    every choice of subsets; SAMPLED mode draws config.samples random subsets at
    the configured densities plus a few structured candidates. The reported
    d_estimate is recomputed exactly from the final witness.

    Args:
        graph (Hypergraph): the 3-graph H
        star (StarMode | str): vvv, ev or ee
        config (AuditConfig, optional): eta, mode and sampling settings
        progress (bool, optional): draw a progress bar in exhaustive mode

    Returns:
        DensityAudit: d_estimate with its witness
    """
    config = config or AuditConfig()
    star = StarMode.parse(star)
    log = Logger('DensityAudit')
    _require_3graph(graph)
    n = graph.n
    if n == 0:
        return DensityAudit(star, 0.0, config.eta, (), 0, 0, config.mode, 0, config.seed)

    exhaustive = config.mode == AuditMode.EXHAUSTIVE
    # the exhaustive vvv sweep works on dense adjacency slices
    ag = _AuditGraph(graph, config.eta, max(config.dense_cap, config.vvv_exhaustive_cap) if exhaustive else config.dense_cap)
    if exhaustive:
        best, witness, examined = _exhaustive(ag, star, config, progress)
    else:
        best, witness, examined = _sampled(ag, star, config)

    if witness is None:
        log.warning(f'No {star.value} witness with positive measure was found')
        return DensityAudit(star, 1.0, config.eta, (), 0, 0, config.mode, examined, config.seed)

    count, size = recount(graph, star, witness)
    d_estimate = density_bound(count, size, config.eta, n)
    log.debug(f'{star.value} audit: search bound {best:.9f}, recounted d={d_estimate:.9f} (count {count}, size {size})')
    return DensityAudit(star, d_estimate, config.eta, witness, count, size, config.mode, examined, config.seed)


def audit_induced_density(graph: Hypergraph, config: AuditConfig | None = None) -> DensityAudit:
    """Uniform density over vertex subsets: the largest d with e(U) >= d * C(|U|, 3) - eta * n^3 on the sets examined

    Exhaustive over every U when n <= config.induced_exhaustive_cap, sampled
    otherwise; requesting EXHAUSTIVE above the cap is an error.
    """
    config = config or AuditConfig()
    log = Logger('DensityAudit')
    _require_3graph(graph)
    n = graph.n
    slack = config.eta * n**3
    exhaustive = n <= config.induced_exhaustive_cap
    if config.mode == AuditMode.EXHAUSTIVE and not exhaustive:
        raise AuditSizeException(f'Exhaustive induced audit is limited to n <= {config.induced_exhaustive_cap}, got n={n}')
    if n < 3:
        return DensityAudit(None, 0.0, config.eta, (), 0, 0, AuditMode.EXHAUSTIVE, 0, config.seed)

    ag = None if exhaustive else _AuditGraph(graph, config.eta, config.dense_cap)

    def edge_counts(sets: np.ndarray) -> np.ndarray:
        if graph.m == 0:
            return np.zeros(len(sets))
        if ag is None:
            return np.all(sets[:, graph.edge_array], axis=2).sum(axis=1)
        # each edge inside U is seen once per ordering of its vertices
        return np.rint((ag.vvv_weights(sets, sets) * sets).sum(axis=1) / 6)

    def best_of_sets(sets: np.ndarray) -> tuple[float, np.ndarray | None]:
        sizes = sets.sum(axis=1)
        counts = edge_counts(sets)
        measure = np.array([math.comb(int(s), 3) for s in sizes], dtype=np.float64)
        with np.errstate(divide='ignore', invalid='ignore'):
            bounds = np.where(measure > 0, (counts + slack) / np.where(measure > 0, measure, 1), np.inf)
        i = int(np.argmin(bounds))
        return (float(bounds[i]), sets[i]) if np.isfinite(bounds[i]) else (np.inf, None)

    best, chosen = np.inf, None
    if exhaustive:
        mode = AuditMode.EXHAUSTIVE
        total = (1 << n) - 1
        for start in range(1, total + 1, 4096):
            codes = np.arange(start, min(start + 4096, total + 1), dtype=np.int64)
            bound, found = best_of_sets(((codes[:, None] >> np.arange(n)) & 1).astype(bool))
            if bound < best:
                best, chosen = bound, found
        examined = total
    else:
        mode = AuditMode.SAMPLED
        best, chosen = best_of_sets(_structured_vertex_sets(graph))
        densities = np.asarray(config.densities, dtype=float)
        batches = math.ceil(config.samples / config.batch_size) if config.samples > 0 else 0

        def run(job):
            index, rng = job
            start = index * config.batch_size
            stop = min(start + config.batch_size, config.samples)
            rhos = densities[np.arange(start, stop) % densities.size]
            return best_of_sets(rng.random((rhos.size, n)) < rhos[:, None])

        for bound, found in parallel_map(run, list(enumerate(spawn_generators(config.seed, batches))), config.max_workers):
            if bound < best:
                best, chosen = bound, found
        examined = config.samples

    if chosen is None:
        return DensityAudit(None, 1.0, config.eta, (), 0, 0, mode, examined, config.seed)
    witness = _vertex_tuple(chosen)
    count = graph.induced(witness).m
    size = math.comb(len(witness), 3)
    d_estimate = density_bound(count, size, config.eta, n)
    log.debug(f'induced audit: d={d_estimate:.9f} on |U|={len(witness)}')
    return DensityAudit(None, d_estimate, config.eta, (witness,), count, size, mode, examined, config.seed)
