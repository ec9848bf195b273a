"""Solver, search and audit settings

Defaults can be pushed in from the environment:
    PYPALETTE_SEED     default seed for every randomized routine
    PYPALETTE_WORKERS  default thread count for the parallel parts
"""

import os
from dataclasses import dataclass, field
from enum import Enum

SEED_ENV_VAR = 'PYPALETTE_SEED'
WORKERS_ENV_VAR = 'PYPALETTE_WORKERS'

DEFAULT_SEED = int(os.getenv(SEED_ENV_VAR, '0'))
DEFAULT_WORKERS = int(os.getenv(WORKERS_ENV_VAR, '1'))


@dataclass(frozen=True)
class SolverConfig:
    """Multistart projected gradient ascent for Lagrange polynomials"""

    starts: int = 200
    seed: int = DEFAULT_SEED
    tolerance: float = 1e-9
    grad_tol: float = 1e-10
    max_iter: int = 5000
    # certify against the grid oracle for graphs with at most this many vertices
    oracle_cap: int = 6
    oracle_resolution: int = 12
    oracle_budget: int = 2_000_000
    max_workers: int = DEFAULT_WORKERS


@dataclass(frozen=True)
class PaletteSolverConfig:
    """Palette Lagrangian maximisation.

    vvv reuses the SolverConfig ascent. ev/ee enumerate supports up to
    `support_cap` colours and run a softmin ascent on each face.
    """

    solver: SolverConfig = field(default_factory=SolverConfig)
    support_cap: int = 12
    restarts_per_support: int = 50
    # stop restarting a face after this many climbs in a row fail to improve it (None: always run them all)
    face_patience: int | None = 20
    # faces are solved best-bound-first in batches of this size; later batches are skipped once
    # their upper bound cannot beat the best value found
    face_batch: int = 8
    temperature_start: float = 1.0
    temperature_end: float = 1e-4
    temperature_factor: float = 0.5
    stage_iter: int = 200
    refine_steps: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
    # grid cross-check when |Phi(P)| is at most this
    oracle_cap: int = 5
    oracle_resolution: int = 12
    # raise instead of falling back to the heuristic when support_cap is exceeded
    strict: bool = False


@dataclass(frozen=True)
class SatisfactionBudget:
    max_n: int = 10
    max_nodes: int = 2_000_000
    # almost_satisfies_distance is exponential in the number of edges as well
    distance_max_n: int = 8
    max_workers: int = DEFAULT_WORKERS


class AuditMode(Enum):
    EXHAUSTIVE = 'exhaustive'
    SAMPLED = 'sampled'


@dataclass(frozen=True)
class AuditConfig:
    eta: float = 0.0
    mode: AuditMode = AuditMode.SAMPLED
    samples: int = 10_000
    densities: tuple[float, ...] = (0.1, 0.25, 0.5)
    seed: int = DEFAULT_SEED
    structured: bool = True
    batch_size: int = 256
    max_workers: int = DEFAULT_WORKERS
    vvv_exhaustive_cap: int = 12
    pair_exhaustive_cap: int = 7
    induced_exhaustive_cap: int = 16
    # dense n^3 adjacency for batched counting up to this many vertices
    dense_cap: int = 256
