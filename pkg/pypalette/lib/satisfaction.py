"""Deciding whether a 3-graph satisfies a palette

F satisfies P when some vertex ordering v_1..v_n and pair colouring phi put
(phi(v_i v_j), phi(v_j v_k), phi(v_i v_k)) in P for every edge v_i v_j v_k with
i < j < k.

The search places vertices one at a time. As soon as the three vertices of an
edge are placed the edge becomes a ternary constraint on its three pair
colours, and the pair domains (bitmasks over colour indices) are pruned by
generalised arc consistency. A complete ordering whose domains survive is
finished by a fail-first backtracking search over the remaining pair colours.
"""

import itertools
from collections import defaultdict, deque
from collections.abc import Sequence

from rsxml import Logger

from pypalette.classes.colouring import SENTINEL_COLOUR, UNCOLOURED, PairColouring, SatisfactionCertificate, pair_key
from pypalette.classes.config import SatisfactionBudget
from pypalette.classes.exceptions import CertificateException, PyPaletteException
from pypalette.classes.hypergraph import Hypergraph
from pypalette.classes.palette import Palette
from pypalette.classes.reports import DistanceResult, SatisfactionResult, SatisfactionStatus
from pypalette.lib.parallel import parallel_map


class _BudgetExhausted(Exception):
    pass


class _Counter:
    def __init__(self, limit: int):
        self.limit = limit
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.limit:
            raise _BudgetExhausted


def verify_certificate(graph: Hypergraph, palette: Palette, cert: SatisfactionCertificate) -> bool:
    """Check a certificate edge by edge

    Returns:
        bool: True iff every edge's ordered colour shadow is a triple of P

    Raises:
        CertificateException: the certificate does not fit F and P (wrong n, not a
            permutation, uncoloured pair, colour outside Phi(P))
    """
    n = graph.n
    if cert.n != n or cert.colouring.n != n:
        raise CertificateException(f'Certificate is for {cert.n} vertices but the hypergraph has {n}')
    if sorted(cert.ordering) != list(range(1, n + 1)):
        raise CertificateException(f'Ordering {cert.ordering} is not a permutation of 1..{n}')

    allowed = set(palette.colours)
    for (u, v), colour in cert.colouring.items():
        if palette.r == 0:
            # nothing to colour with: only the sentinel (or nothing) is acceptable
            if colour not in (SENTINEL_COLOUR, UNCOLOURED):
                raise CertificateException(f'Pair ({u}, {v}) has colour {colour} but the palette has no colours')
        elif colour == UNCOLOURED:
            raise CertificateException(f'Pair ({u}, {v}) is not coloured')
        elif colour not in allowed:
            raise CertificateException(f'Pair ({u}, {v}) has colour {colour}, which is not in {palette.colours}')

    pos = cert.positions()
    colouring = cert.colouring
    for edge in graph.edges:
        a, b, c = sorted(edge, key=pos.__getitem__)
        if (colouring[a, b], colouring[b, c], colouring[a, c]) not in palette:
            return False
    return True


def satisfies_brute_force(graph: Hypergraph, palette: Palette) -> bool:
    """Literal enumeration of every ordering and every colouring of the pairs inside edges

    Pairs outside edges never matter, so only those are enumerated. Exponential;
    meant as a reference for tiny instances.
    """
    if graph.m == 0:
        return True
    if palette.r == 0:
        return False
    pairs = sorted({pair_key(u, v) for e in graph.edges for u, v in itertools.combinations(e, 2)})
    for ordering in itertools.permutations(graph.vertices):
        pos = {v: i for i, v in enumerate(ordering)}
        shapes = []
        for edge in graph.edges:
            a, b, c = sorted(edge, key=pos.__getitem__)
            shapes.append((pair_key(a, b), pair_key(b, c), pair_key(a, c)))
        for colours in itertools.product(palette.colours, repeat=len(pairs)):
            phi = dict(zip(pairs, colours, strict=True))
            if all((phi[p], phi[q], phi[s]) in palette for p, q, s in shapes):
                return True
    return False


class _Problem:
    """Precomputed lookups shared by every search over one (F, P) pair"""

    def __init__(self, graph: Hypergraph, palette: Palette):
        self.graph = graph
        self.palette = palette
        self.r = palette.r
        self.full_mask = (1 << self.r) - 1
        self.pairs = list(itertools.combinations(graph.vertices, 2))
        self.pair_id = {p: i for i, p in enumerate(self.pairs)}
        self.triple_bits = [tuple(1 << int(c) for c in tri) for tri in palette.triple_array]
        self.triple_index = {tuple(int(c) for c in tri) for tri in palette.triple_array}

        degrees = graph.degrees()
        self.active = [v for v in graph.vertices if degrees[v - 1] > 0]
        self.isolated = [v for v in graph.vertices if degrees[v - 1] == 0]
        edges_at = defaultdict(list)
        for edge in graph.edges:
            for v in edge:
                edges_at[v].append(edge)
        self.edges_at = dict(edges_at)
        self.smaller_twins = self._twins()

    def _twins(self) -> dict[int, list[int]]:
        """For each vertex, the smaller-labelled vertices it can be swapped with by an automorphism"""
        edge_set = self.graph.edge_set
        twins = defaultdict(list)
        for u, v in itertools.combinations(self.active, 2):
            swap = {u: v, v: u}
            if all(tuple(sorted(swap.get(x, x) for x in e)) in edge_set for e in self.graph.edges):
                twins[v].append(u)
        return dict(twins)

    def roles(self, edge: Sequence[int], pos: dict[int, int]) -> tuple[int, int, int]:
        a, b, c = sorted(edge, key=pos.__getitem__)
        return self.pair_id[(a, b) if a < b else (b, a)], self.pair_id[(b, c) if b < c else (c, b)], self.pair_id[(a, c) if a < c else (c, a)]

    def may_place(self, v: int, placed: set[int]) -> bool:
        return v not in placed and all(t in placed for t in self.smaller_twins.get(v, ()))

    def certificate(self, ordering: Sequence[int], colour_idx: dict[int, int]) -> SatisfactionCertificate:
        """Certificate from a full ordering and colour indices on some pairs; other pairs get the first colour"""
        colours = self.palette.colours
        default = colours[0] if colours else SENTINEL_COLOUR
        mapping = {pair: colours[colour_idx[pid]] if pid in colour_idx else default for pid, pair in enumerate(self.pairs)}
        return SatisfactionCertificate(tuple(ordering), PairColouring.from_mapping(self.graph.n, mapping))


def _revise(problem: _Problem, con: tuple[int, int, int], domains: list[int]) -> tuple[int, int, int]:
    d0, d1, d2 = domains[con[0]], domains[con[1]], domains[con[2]]
    s0 = s1 = s2 = 0
    for b0, b1, b2 in problem.triple_bits:
        if b0 & d0 and b1 & d1 and b2 & d2:
            s0 |= b0
            s1 |= b1
            s2 |= b2
    return s0, s1, s2


def _propagate(problem: _Problem, domains: list[int], constraints: list, var_cons: dict, start: Sequence[int]) -> bool:
    """Arc consistency to a fixpoint from the given constraints; False on a wipe-out"""
    queue = deque(start)
    queued = set(queue)
    while queue:
        ci = queue.popleft()
        queued.discard(ci)
        con = constraints[ci]
        for var, dom in zip(con, _revise(problem, con, domains), strict=True):
            if dom == domains[var]:
                continue
            if dom == 0:
                return False
            domains[var] = dom
            for cj in var_cons[var]:
                if cj != ci and cj not in queued:
                    queue.append(cj)
                    queued.add(cj)
    return True


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class _OrderingSearch:
    """Depth-first search over vertex orderings with incremental constraint propagation"""

    def __init__(self, problem: _Problem, counter: _Counter):
        self.problem = problem
        self.counter = counter
        self.order: list[int] = []
        self.pos: dict[int, int] = {}
        self.placed: set[int] = set()
        self.constraints: list[tuple[int, int, int]] = []
        self.var_cons: dict[int, list[int]] = defaultdict(list)

    def run(self, first: int | None = None) -> tuple[list[int], dict[int, int]] | None:
        domains = [self.problem.full_mask] * len(self.problem.pairs)
        if first is None:
            return self._extend(domains)
        return self._place(first, domains)

    def _place(self, v: int, domains: list[int]):
        self.counter.tick()
        problem = self.problem
        self.pos[v] = len(self.order)
        self.order.append(v)
        self.placed.add(v)
        start = len(self.constraints)
        for edge in problem.edges_at[v]:
            if all(u in self.placed for u in edge):
                con = problem.roles(edge, self.pos)
                for var in con:
                    self.var_cons[var].append(len(self.constraints))
                self.constraints.append(con)
        child = list(domains)
        found = None
        if _propagate(problem, child, self.constraints, self.var_cons, range(start, len(self.constraints))):
            found = self._extend(child)
        if found is None:
            for con in reversed(self.constraints[start:]):
                for var in con:
                    self.var_cons[var].pop()
            del self.constraints[start:]
            self.order.pop()
            self.placed.discard(v)
            del self.pos[v]
        return found

    def _extend(self, domains: list[int]):
        if len(self.order) == len(self.problem.active):
            colours = self._colour(domains)
            return (list(self.order), colours) if colours is not None else None
        for v in self.problem.active:
            if self.problem.may_place(v, self.placed):
                found = self._place(v, domains)
                if found is not None:
                    return found
        return None

    def _colour(self, domains: list[int]) -> dict[int, int] | None:
        """Fail-first backtracking: smallest domain first, then the pair in most edges"""
        open_vars = [var for var, cons in self.var_cons.items() if cons and domains[var].bit_count() > 1]
        if not open_vars:
            return {var: _lowest_bit(domains[var]) for var, cons in self.var_cons.items() if cons}
        var = min(open_vars, key=lambda x: (domains[x].bit_count(), -len(self.var_cons[x]), x))
        mask = domains[var]
        while mask:
            bit = mask & -mask
            mask ^= bit
            self.counter.tick()
            child = list(domains)
            child[var] = bit
            if _propagate(self.problem, child, self.constraints, self.var_cons, self.var_cons[var]):
                found = self._colour(child)
                if found is not None:
                    return found
        return None


def satisfies(graph: Hypergraph, palette: Palette, budget: SatisfactionBudget | None = None) -> SatisfactionResult:
    """Decide whether F satisfies P

    Complete search up to budget.max_n vertices and budget.max_nodes search
    nodes. Running out of budget is reported as INDETERMINATE, never as
    UNSATISFIABLE. Every SATISFIED answer carries a certificate that has been
    checked with verify_certificate. With budget.max_workers > 1 the branches for
    the first vertex run on a thread pool, each with the full node budget, and
    the first satisfied branch in vertex order wins.

    Args:
        graph (Hypergraph): a 3-graph F
        palette (Palette): P
        budget (SatisfactionBudget, optional): search limits

    Returns:
        SatisfactionResult: status, certificate and the number of search nodes
    """
    budget = budget or SatisfactionBudget()
    log = Logger('Satisfaction')
    if graph.k != 3:
        raise PyPaletteException(f'Palette satisfaction is defined for 3-graphs, got a {graph.k}-graph')

    problem = _Problem(graph, palette)
    if graph.m == 0:
        # nothing is constrained; pairs get the sentinel when there is no colour to use
        return SatisfactionResult(SatisfactionStatus.SATISFIED, problem.certificate(tuple(graph.vertices), {}), 0, 'no edges')
    if palette.r == 0:
        return SatisfactionResult(SatisfactionStatus.UNSATISFIABLE, None, 0, 'empty palette cannot host an edge')
    if graph.n > budget.max_n:
        log.warning(f'n={graph.n} is above the complete-search limit {budget.max_n}')
        return SatisfactionResult(SatisfactionStatus.INDETERMINATE, None, 0, f'n exceeds max_n={budget.max_n}')

    firsts = [v for v in problem.active if problem.may_place(v, set())]

    def branch(first: int | None):
        counter = _Counter(budget.max_nodes)
        try:
            return _OrderingSearch(problem, counter).run(first), counter.nodes, False
        except _BudgetExhausted:
            return None, counter.nodes, True

    if budget.max_workers > 1:
        outcomes = parallel_map(branch, firsts, budget.max_workers)
    else:
        outcomes = [branch(None)]

    nodes = sum(o[1] for o in outcomes)
    for found, _, _ in outcomes:
        if found is not None:
            order, colours = found
            cert = problem.certificate(order + problem.isolated, colours)
            if not verify_certificate(graph, palette, cert):
                raise PyPaletteException('Search produced a certificate that does not verify')
            log.debug(f'Satisfied after {nodes:,} nodes with ordering {cert.ordering}')
            return SatisfactionResult(SatisfactionStatus.SATISFIED, cert, nodes, 'certificate found')
    if any(o[2] for o in outcomes):
        log.warning(f'Satisfaction search ran out of budget after {nodes:,} nodes')
        return SatisfactionResult(SatisfactionStatus.INDETERMINATE, None, nodes, f'node budget {budget.max_nodes:,} exhausted')
    return SatisfactionResult(SatisfactionStatus.UNSATISFIABLE, None, nodes, 'search exhausted')


# ---------------------------------------------------------------------------
# Almost-satisfaction distance
# ---------------------------------------------------------------------------


class _SoftColouring:
    """Colour the pairs of a fixed ordering so that at most `limit` edges are violated

    The bound counts edges that are already certainly violated: all three pairs
    coloured with a shadow outside P, or a partial shadow no triple of P extends.
    """

    def __init__(self, problem: _Problem, constraints: list[tuple[int, int, int]], counter: _Counter):
        self.problem = problem
        self.constraints = constraints
        self.counter = counter
        self.var_cons = defaultdict(list)
        for ci, con in enumerate(constraints):
            for var in con:
                self.var_cons[var].append(ci)
        self.variables = sorted(self.var_cons, key=lambda v: (-len(self.var_cons[v]), v))
        roles = [tuple(int(c) for c in tri) for tri in problem.palette.triple_array]
        self.role_single = [{tri[r] for tri in roles} for r in range(3)]
        self.role_pair = {(r1, r2): {(tri[r1], tri[r2]) for tri in roles} for r1, r2 in itertools.combinations(range(3), 2)}
        self.assign: dict[int, int] = {}

    def violated(self, ci: int) -> bool:
        con = self.constraints[ci]
        known = [(r, self.assign[var]) for r, var in enumerate(con) if var in self.assign]
        if len(known) == 3:
            return tuple(c for _, c in known) not in self.problem.triple_index
        if len(known) == 2:
            (r1, c1), (r2, c2) = known
            return (c1, c2) not in self.role_pair[(r1, r2)]
        if len(known) == 1:
            r1, c1 = known[0]
            return c1 not in self.role_single[r1]
        return False

    def solve(self, limit: int) -> dict[int, int] | None:
        self.assign = {}
        return self._dfs(0, 0, limit)

    def _dfs(self, i: int, bound: int, limit: int) -> dict[int, int] | None:
        if bound > limit:
            return None
        if i == len(self.variables):
            return dict(self.assign)
        var = self.variables[i]
        cons = self.var_cons[var]
        before = sum(self.violated(ci) for ci in cons)
        for colour in range(self.problem.r):
            self.counter.tick()
            self.assign[var] = colour
            found = self._dfs(i + 1, bound - before + sum(self.violated(ci) for ci in cons), limit)
            if found is not None:
                return found
        self.assign.pop(var, None)
        return None

    def greedy(self) -> dict[int, int]:
        self.assign = {}
        for var in self.variables:
            cons = self.var_cons[var]
            scores = []
            for colour in range(self.problem.r):
                self.assign[var] = colour
                scores.append(sum(self.violated(ci) for ci in cons))
            self.assign[var] = scores.index(min(scores))
        return dict(self.assign)

    def violations(self, assign: dict[int, int]) -> list[int]:
        self.assign = assign
        return [ci for ci in range(len(self.constraints)) if self.violated(ci)]


def _orderings(problem: _Problem):
    """Every ordering of the non-isolated vertices allowed by the twin rule"""
    order: list[int] = []
    placed: set[int] = set()

    def walk():
        if len(order) == len(problem.active):
            yield list(order)
            return
        for v in problem.active:
            if problem.may_place(v, placed):
                order.append(v)
                placed.add(v)
                yield from walk()
                order.pop()
                placed.discard(v)

    yield from walk()


def _soft_solution(problem: _Problem, ordering: Sequence[int], colours: dict[int, int], counter: _Counter):
    pos = {v: i for i, v in enumerate(ordering)}
    edges = list(problem.graph.edges)
    soft = _SoftColouring(problem, [problem.roles(e, pos) for e in edges], counter)
    removed = tuple(edges[ci] for ci in soft.violations(colours))
    return removed, problem.certificate(list(ordering) + problem.isolated, colours)


def almost_satisfies_distance(graph: Hypergraph, palette: Palette, budget: SatisfactionBudget | None = None) -> DistanceResult:
    """Fewest edge deletions after which F satisfies P

    Iterative deepening on the number d of deleted edges: level d searches every
    ordering (twin rule applied) for a colouring violating at most d edges, and
    the violated edges are the ones deleted. When the budget runs out the answer
    is the greedy upper bound on the first ordering (or the best level reached)
    and `optimal` is False.

    Args:
        graph (Hypergraph): a 3-graph F
        palette (Palette): P
        budget (SatisfactionBudget, optional): limits, distance_max_n caps n

    Returns:
        DistanceResult: distance, proven lower bound, the deleted edges and a certificate for what is left
    """
    budget = budget or SatisfactionBudget()
    log = Logger('Distance')
    if graph.k != 3:
        raise PyPaletteException(f'Palette satisfaction is defined for 3-graphs, got a {graph.k}-graph')
    problem = _Problem(graph, palette)

    if palette.r == 0:
        return DistanceResult(graph.m, graph.m, True, graph.edges, problem.certificate(tuple(graph.vertices), {}), 0)

    decided = satisfies(graph, palette, SatisfactionBudget(budget.max_n, budget.max_nodes, budget.distance_max_n, 1))
    if decided.satisfied:
        return DistanceResult(0, 0, True, (), decided.certificate, decided.nodes)

    counter = _Counter(budget.max_nodes)
    counter.nodes = decided.nodes
    first = next(_orderings(problem))
    pos = {v: i for i, v in enumerate(first)}
    greedy = _SoftColouring(problem, [problem.roles(e, pos) for e in graph.edges], counter).greedy()
    upper_removed, upper_cert = _soft_solution(problem, first, greedy, counter)
    upper = len(upper_removed)
    lower = 1 if decided.exhausted else 0

    if graph.n > budget.distance_max_n or not decided.exhausted:
        log.warning(f'Distance search skipped (n={graph.n}, limit {budget.distance_max_n}); reporting the greedy bound {upper}')
        return DistanceResult(upper, lower, upper == lower, upper_removed, upper_cert, counter.nodes)

    try:
        for level in range(lower, upper):
            log.debug(f'Searching for a colouring with at most {level} violated edges')
            for ordering in _orderings(problem):
                counter.tick()
                pos = {v: i for i, v in enumerate(ordering)}
                soft = _SoftColouring(problem, [problem.roles(e, pos) for e in graph.edges], counter)
                found = soft.solve(level)
                if found is not None:
                    removed, cert = _soft_solution(problem, ordering, found, counter)
                    return DistanceResult(len(removed), len(removed), True, removed, cert, counter.nodes)
            lower = level + 1
    except _BudgetExhausted:
        log.warning(f'Distance search ran out of budget at level {lower}; upper bound {upper}')
        return DistanceResult(upper, lower, False, upper_removed, upper_cert, counter.nodes)
    return DistanceResult(upper, upper, True, upper_removed, upper_cert, counter.nodes)
