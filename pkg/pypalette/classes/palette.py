from __future__ import annotations

import functools
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

from pypalette.classes.exceptions import ParseException, PyPaletteException, UnknownColourException
from pypalette.classes.hypergraph import content_lines, parse_int, read_text


@dataclass(frozen=True)
class Palette:
    """A finite set of ordered colour triples

    Triples are ordered, so (1, 2, 3) and (2, 1, 3) are different triples, and a
    colour may repeat inside a triple. `colours` is the set Phi(P) of every colour
    used by some triple, sorted; weight vectors over the palette are indexed by
    position in `colours`.
    """

    triples: tuple[tuple[int, int, int], ...]
    colours: tuple[int, ...] = field(init=False)
    triple_array: np.ndarray = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        canonical = []
        for triple in self.triples:
            triple = tuple(int(c) for c in triple)
            if len(triple) != 3:
                raise PyPaletteException(f'Palette entries are triples, got {triple}')
            if min(triple) < 0:
                raise PyPaletteException(f'Colours are non-negative integers, got {triple}')
            canonical.append(triple)
        if len(set(canonical)) != len(canonical):
            raise PyPaletteException('Duplicate palette triple')
        canonical.sort()
        colours = tuple(sorted({c for t in canonical for c in t}))
        object.__setattr__(self, 'triples', tuple(canonical))
        object.__setattr__(self, 'colours', colours)

        index = {c: i for i, c in enumerate(colours)}
        arr = np.array([[index[c] for c in t] for t in canonical], dtype=np.int64).reshape(len(canonical), 3)
        arr.setflags(write=False)
        object.__setattr__(self, 'triple_array', arr)

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, triple: Iterable[int]) -> bool:
        return tuple(triple) in self.triple_set

    @functools.cached_property
    def triple_set(self) -> frozenset[tuple[int, int, int]]:
        return frozenset(self.triples)

    @functools.cached_property
    def colour_index(self) -> dict[int, int]:
        """colour -> dense 0-based position in `colours`"""
        return {c: i for i, c in enumerate(self.colours)}

    @property
    def r(self) -> int:
        """|Phi(P)|"""
        return len(self.colours)

    def index_of(self, colour: int) -> int:
        try:
            return self.colour_index[colour]
        except KeyError as err:
            raise UnknownColourException(f'Colour {colour} is not in the palette colours {self.colours}') from err

    def with_triple(self, triple: Iterable[int]) -> Palette:
        return Palette((*self.triples, tuple(triple)))


def parse_palette(source: str | bytes | IO) -> Palette:
    """Parse the palette text format: one ordered triple "a b c" per content line

    Raises:
        ParseException: wrong arity, non-integer or negative colour, duplicate triple
    """
    text = read_text(source)
    seen = {}
    for line_no, tokens in content_lines(text):
        if len(tokens) != 3:
            raise ParseException(f'expected 3 colours, found {len(tokens)}', line_no)
        triple = tuple(parse_int(tok, line_no) for tok in tokens)
        if min(triple) < 0:
            raise ParseException(f'negative colour in {" ".join(tokens)}', line_no)
        if triple in seen:
            raise ParseException(f'duplicate triple {" ".join(tokens)} (first seen on line {seen[triple]})', line_no)
        seen[triple] = line_no
    return Palette(tuple(seen))


def serialize_palette(palette: Palette) -> str:
    """Deterministic text form: triples in lexicographic order"""
    return ''.join(f'{a} {b} {c}\n' for a, b, c in palette.triples)


def load_palette(path: str | Path) -> Palette:
    return parse_palette(Path(path).read_text(encoding='utf-8'))
