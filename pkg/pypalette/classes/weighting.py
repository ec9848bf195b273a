from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from pypalette.classes.exceptions import DimensionException, WeightingException

SIMPLEX_TOL = 1e-12
# A weight counts as "positive" for the ev/ee filters only above this
POSITIVITY_EPS = 1e-12


class StarMode(Enum):
    """Which of the three quasirandomness flavours we are talking about"""

    VVV = 'vvv'
    EV = 'ev'
    EE = 'ee'

    @classmethod
    def parse(cls, value: str | StarMode) -> StarMode:
        if isinstance(value, StarMode):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError as err:
            raise ValueError(f'Unknown star mode "{value}". Choose one of vvv, ev, ee') from err


@dataclass(frozen=True)
class Weighting:
    """A point of the standard simplex indexed by colours or vertices

    `keys` are kept in the order given (sorted colours for palettes, 1..n for
    graphs). Values are floats, or Fractions for the exact grid oracle.
    """

    keys: tuple[int, ...]
    values: tuple[float | Fraction, ...]

    def __post_init__(self):
        if len(self.keys) != len(self.values):
            raise DimensionException(f'{len(self.keys)} keys but {len(self.values)} weights')
        if len(set(self.keys)) != len(self.keys):
            raise WeightingException('Weighting keys must be distinct')
        if len(self.values) == 0:
            return
        if any(v < 0 for v in self.values):
            raise WeightingException(f'Negative weight in {self.values}')
        total = sum(self.values)
        exact = all(isinstance(v, Fraction | int) for v in self.values)
        if (exact and total != 1) or (not exact and abs(total - 1) > SIMPLEX_TOL):
            raise WeightingException(f'Weights sum to {float(total)!r}, not 1')

    @classmethod
    def uniform(cls, keys: Iterable[int]) -> Weighting:
        keys = tuple(keys)
        return cls(keys, tuple(1.0 / len(keys) for _ in keys)) if keys else cls((), ())

    @classmethod
    def from_array(cls, keys: Iterable[int], values: Sequence[float] | np.ndarray) -> Weighting:
        """Wrap a numeric vector, clipping float dust below zero and renormalising"""
        keys = tuple(keys)
        arr = np.clip(np.asarray(values, dtype=float), 0.0, None)
        if arr.size and arr.sum() > 0:
            arr = arr / arr.sum()
        return cls(keys, tuple(float(v) for v in arr))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float]) -> Weighting:
        keys = tuple(sorted(mapping))
        return cls(keys, tuple(mapping[k] for k in keys))

    def __len__(self) -> int:
        return len(self.keys)

    def __getitem__(self, key: int) -> float | Fraction:
        return self.values[self.keys.index(key)]

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=float)

    def as_dict(self) -> dict[int, float | Fraction]:
        return dict(zip(self.keys, self.values, strict=True))

    def support(self, eps: float = POSITIVITY_EPS) -> tuple[int, ...]:
        """Keys whose weight is strictly above eps"""
        return tuple(k for k, v in zip(self.keys, self.values, strict=True) if v > eps)

    def expect_keys(self, keys: Sequence[int], what: str) -> np.ndarray:
        """Return the weights as an array after checking they are indexed by `keys`"""
        if tuple(keys) != self.keys:
            raise DimensionException(f'Weighting is indexed by {self.keys} but {what} needs {tuple(keys)}')
        return self.as_array()
