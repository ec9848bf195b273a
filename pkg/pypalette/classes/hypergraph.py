from __future__ import annotations

import functools
import itertools
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

from pypalette.classes.exceptions import ParseException, PyPaletteException


def read_text(source: str | bytes | IO) -> str:
    """Normalise the things we accept as "text" into a str

    Args:
        source (str | bytes | IO): text, raw bytes or an open (text or binary) stream

    Returns:
        str: the decoded text
    """
    if hasattr(source, 'read'):
        source = source.read()
    if isinstance(source, bytes):
        return source.decode('utf-8')
    return source


def content_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    """Yield (line_number, tokens) for every non-empty, non-comment line"""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if len(stripped) == 0 or stripped.startswith('#'):
            continue
        yield line_no, stripped.split()


def parse_int(token: str, line_no: int) -> int:
    """Strict integer token parsing with a line-numbered error"""
    try:
        return int(token)
    except ValueError as err:
        raise ParseException(f'non-integer token "{token}"', line_no) from err


@dataclass(frozen=True)
class Hypergraph:
    """A k-uniform hypergraph on the vertices 1..n

    Edges are stored as sorted tuples in lexicographic order, so two hypergraphs
    with the same edge set compare (and hash) equal.
    """

    k: int
    n: int
    edges: tuple[tuple[int, ...], ...]
    edge_array: np.ndarray = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.k < 1:
            raise PyPaletteException(f'Uniformity must be positive, got {self.k}')
        if self.n < 0:
            raise PyPaletteException(f'Vertex count must be non-negative, got {self.n}')

        canonical = []
        for edge in self.edges:
            ordered = tuple(sorted(int(v) for v in edge))
            if len(ordered) != self.k:
                raise PyPaletteException(f'Edge {edge} does not have {self.k} vertices')
            if len(set(ordered)) != self.k:
                raise PyPaletteException(f'Edge {edge} repeats a vertex')
            if ordered[0] < 1 or ordered[-1] > self.n:
                raise PyPaletteException(f'Edge {edge} has a vertex outside 1..{self.n}')
            canonical.append(ordered)
        if len(set(canonical)) != len(canonical):
            raise PyPaletteException('Duplicate edge')

        canonical.sort()
        object.__setattr__(self, 'edges', tuple(canonical))
        # 0-based (m, k) array for the numeric code
        arr = np.array(canonical, dtype=np.int64).reshape(len(canonical), self.k) - 1
        arr.setflags(write=False)
        object.__setattr__(self, 'edge_array', arr)

    @property
    def m(self) -> int:
        """Number of edges"""
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def __contains__(self, edge: Iterable[int]) -> bool:
        return tuple(sorted(edge)) in self.edge_set

    @functools.cached_property
    def edge_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.edges)

    def degrees(self) -> np.ndarray:
        """Vertex degrees, 0-based (index v-1 is the degree of vertex v)"""
        return np.bincount(self.edge_array.ravel(), minlength=self.n)

    def density(self) -> float:
        """Edge density |E| / C(n, k)"""
        total = math.comb(self.n, self.k)
        return self.m / total if total > 0 else 0.0

    def with_edge(self, edge: Iterable[int]) -> Hypergraph:
        return Hypergraph(self.k, self.n, (*self.edges, tuple(edge)))

    def without_edges(self, edges: Iterable[Iterable[int]]) -> Hypergraph:
        """A copy on the same vertex set with the given edges removed"""
        drop = {tuple(sorted(e)) for e in edges}
        return Hypergraph(self.k, self.n, tuple(e for e in self.edges if e not in drop))

    def induced(self, vertices: Iterable[int]) -> Hypergraph:
        """The induced sub-hypergraph, relabelled to 1..n' keeping the relative vertex order"""
        keep = sorted(set(vertices))
        relabel = {v: i + 1 for i, v in enumerate(keep)}
        edges = tuple(tuple(relabel[v] for v in e) for e in self.edges if all(v in relabel for v in e))
        return Hypergraph(self.k, len(keep), edges)


def from_edges(edges: Iterable[Iterable[int]], k: int = 3, n: int | None = None) -> Hypergraph:
    """Build a hypergraph from an edge list, inferring n from the largest vertex when not given"""
    edges = [tuple(e) for e in edges]
    if n is None:
        n = max((max(e) for e in edges), default=0)
    return Hypergraph(k, n, tuple(edges))


def tight_cycle(length: int) -> Hypergraph:
    """The 3-uniform tight cycle C_l^(3): edges {i, i+1, i+2} with indices taken mod l

    Windows that coincide (l = 3) are only kept once.

    Args:
        length (int): number of vertices, at least 3

    Returns:
        Hypergraph: the tight cycle
    """
    if length < 3:
        raise PyPaletteException(f'A tight cycle needs at least 3 vertices, got {length}')
    windows = {tuple(sorted(((i + j) % length) + 1 for j in range(3))) for i in range(length)}
    return Hypergraph(3, length, tuple(windows))


def complete_graph(n: int, k: int = 3) -> Hypergraph:
    """K_n^(k)"""
    return Hypergraph(k, n, tuple(itertools.combinations(range(1, n + 1), k)))


def f32() -> Hypergraph:
    """F_{3,2}: vertices 1..5 and edges 123, 145, 245, 345"""
    return Hypergraph(3, 5, ((1, 2, 3), (1, 4, 5), (2, 4, 5), (3, 4, 5)))


def all_hypergraphs(n: int, k: int = 3) -> Iterator[Hypergraph]:
    """Every k-graph on 1..n, one per edge subset of K_n^(k) (no isomorphism reduction)"""
    candidates = list(itertools.combinations(range(1, n + 1), k))
    for mask in range(1 << len(candidates)):
        yield Hypergraph(k, n, tuple(e for i, e in enumerate(candidates) if mask >> i & 1))


def parse_hypergraph(source: str | bytes | IO) -> Hypergraph:
    """Parse the hypergraph text format

    First content line is "k n"; every following content line is one edge of k
    1-based vertex indices. Lines starting with '#' are comments.

    Raises:
        ParseException: on any malformed line, with its line number
    """
    text = read_text(source)
    lines = content_lines(text)
    try:
        header_no, header = next(lines)
    except StopIteration as err:
        raise ParseException('missing "k n" header') from err
    if len(header) != 2:
        raise ParseException('header must be "k n"', header_no)
    k, n = (parse_int(tok, header_no) for tok in header)
    if k < 1 or n < 0:
        raise ParseException(f'invalid header k={k} n={n}', header_no)

    seen = {}
    for line_no, tokens in lines:
        if len(tokens) != k:
            raise ParseException(f'expected {k} vertices, found {len(tokens)}', line_no)
        edge = tuple(sorted(parse_int(tok, line_no) for tok in tokens))
        for v in edge:
            if v < 1 or v > n:
                raise ParseException(f'vertex {v} out of range 1..{n}', line_no)
        if len(set(edge)) != k:
            raise ParseException(f'repeated vertex in edge {" ".join(tokens)}', line_no)
        if edge in seen:
            raise ParseException(f'duplicate edge {" ".join(tokens)} (first seen on line {seen[edge]})', line_no)
        seen[edge] = line_no
    return Hypergraph(k, n, tuple(seen))


def serialize_hypergraph(graph: Hypergraph) -> str:
    """Deterministic text form: header then the edges in lexicographic order"""
    lines = [f'{graph.k} {graph.n}'] + [' '.join(str(v) for v in e) for e in graph.edges]
    return '\n'.join(lines) + '\n'


def load_hypergraph(path: str | Path) -> Hypergraph:
    return parse_hypergraph(Path(path).read_text(encoding='utf-8'))
