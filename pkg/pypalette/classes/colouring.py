from __future__ import annotations

import itertools
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

from pypalette.classes.exceptions import CertificateException, ParseException
from pypalette.classes.hypergraph import content_lines, parse_int, read_text

# Stands in for a colour when the palette has no colours at all
SENTINEL_COLOUR = -1
# A pair nobody coloured
UNCOLOURED = -2


def pair_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class PairColouring:
    """A colouring of the unordered vertex pairs of 1..n

    Backed by a read-only symmetric (n+1) x (n+1) integer matrix so lookups from
    the numeric code are plain fancy indexing; row/column 0 and the diagonal are
    unused and hold UNCOLOURED.
    """

    n: int
    matrix: np.ndarray = field(repr=False, compare=False, hash=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.int64)
        if mat.shape != (self.n + 1, self.n + 1):
            raise CertificateException(f'Colour matrix has shape {mat.shape}, expected {(self.n + 1, self.n + 1)}')
        if not np.array_equal(mat, mat.T):
            raise CertificateException('Colour matrix must be symmetric')
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, 'matrix', mat)

    def __eq__(self, other) -> bool:
        return isinstance(other, PairColouring) and self.n == other.n and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash((self.n, self.matrix.tobytes()))

    @classmethod
    def from_mapping(cls, n: int, mapping: Mapping[tuple[int, int], int]) -> PairColouring:
        """Build from {(i, j): colour}; pairs missing from the mapping are UNCOLOURED"""
        mat = np.full((n + 1, n + 1), UNCOLOURED, dtype=np.int64)
        for (u, v), colour in mapping.items():
            if u == v or not (1 <= u <= n and 1 <= v <= n):
                raise CertificateException(f'Pair ({u}, {v}) is not a pair of distinct vertices in 1..{n}')
            mat[u, v] = mat[v, u] = colour
        return cls(n, mat)

    @classmethod
    def constant(cls, n: int, colour: int) -> PairColouring:
        mat = np.full((n + 1, n + 1), colour, dtype=np.int64)
        mat[0, :] = mat[:, 0] = UNCOLOURED
        np.fill_diagonal(mat, UNCOLOURED)
        return cls(n, mat)

    def __getitem__(self, pair: tuple[int, int]) -> int:
        u, v = pair
        return int(self.matrix[u, v])

    def pairs(self) -> Iterator[tuple[int, int]]:
        return itertools.combinations(range(1, self.n + 1), 2)

    def items(self) -> Iterator[tuple[tuple[int, int], int]]:
        for u, v in self.pairs():
            yield (u, v), int(self.matrix[u, v])

    def as_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.items())

    def missing_pairs(self) -> list[tuple[int, int]]:
        return [p for p, c in self.items() if c == UNCOLOURED]

    def colours_used(self) -> set[int]:
        return {c for _, c in self.items()}


@dataclass(frozen=True)
class SatisfactionCertificate:
    """A vertex ordering v_1..v_n plus a pair colouring witnessing that a 3-graph satisfies a palette"""

    ordering: tuple[int, ...]
    colouring: PairColouring

    @property
    def n(self) -> int:
        return len(self.ordering)

    def positions(self) -> dict[int, int]:
        """vertex -> position in the ordering"""
        return {v: i for i, v in enumerate(self.ordering)}


def parse_certificate(source: str | bytes | IO) -> SatisfactionCertificate:
    """Certificate text: first content line is the ordering, every following line is "i j c" """
    text = read_text(source)
    lines = content_lines(text)
    try:
        line_no, tokens = next(lines)
    except StopIteration as err:
        raise ParseException('missing ordering line') from err
    ordering = tuple(parse_int(tok, line_no) for tok in tokens)
    n = len(ordering)
    mapping = {}
    for line_no, tokens in lines:
        if len(tokens) != 3:
            raise ParseException(f'expected "i j c", found {len(tokens)} tokens', line_no)
        u, v, colour = (parse_int(tok, line_no) for tok in tokens)
        if u == v or not (1 <= u <= n and 1 <= v <= n):
            raise ParseException(f'pair ({u}, {v}) is not a pair of distinct vertices in 1..{n}', line_no)
        key = pair_key(u, v)
        if key in mapping:
            raise ParseException(f'pair ({u}, {v}) coloured twice', line_no)
        mapping[key] = colour
    return SatisfactionCertificate(ordering, PairColouring.from_mapping(n, mapping))


def serialize_certificate(cert: SatisfactionCertificate) -> str:
    lines = [' '.join(str(v) for v in cert.ordering)]
    lines += [f'{u} {v} {c}' for (u, v), c in cert.colouring.items() if c != UNCOLOURED]
    return '\n'.join(lines) + '\n'


def load_certificate(path: str | Path) -> SatisfactionCertificate:
    return parse_certificate(Path(path).read_text(encoding='utf-8'))
