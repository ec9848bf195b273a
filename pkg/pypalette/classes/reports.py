from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from pypalette.classes.colouring import PairColouring, SatisfactionCertificate
from pypalette.classes.config import AuditMode
from pypalette.classes.hypergraph import Hypergraph
from pypalette.classes.weighting import StarMode, Weighting


class SolverMethod(Enum):
    MULTISTART_GRADIENT = 'multistart_gradient'
    GRID = 'grid'
    SUPPORT_ENUM = 'support_enum'


def _weights_record(weighting: Weighting) -> dict[str, float]:
    return {str(k): float(v) for k, v in zip(weighting.keys, weighting.values, strict=True)}


@dataclass(frozen=True)
class LagrangianReport:
    """Result of maximising a Lagrange polynomial over the simplex"""

    value: float
    maximiser: Weighting
    method: SolverMethod
    iterations: int
    residual: float
    starts: int = 0
    seed: int | None = None
    oracle_value: float | None = None

    def to_record(self) -> dict:
        return {
            'value': self.value,
            'maximiser': _weights_record(self.maximiser),
            'method': self.method.value,
            'iterations': self.iterations,
            'residual': self.residual,
            'starts': self.starts,
            'seed': self.seed,
            'oracle_value': self.oracle_value,
        }


@dataclass(frozen=True)
class PaletteLagrangianReport:
    """Result of maximising lambda^star_P over the simplex on Phi(P)

    `per_colour` maps colour -> lambda^a (ev) or (a, b) -> lambda^{a,b} (ee) at the
    maximiser, restricted to the support; it is empty for vvv.
    """

    star: StarMode
    value: float
    maximiser: Weighting
    support: tuple[int, ...]
    per_colour: dict = field(default_factory=dict)
    method: SolverMethod = SolverMethod.MULTISTART_GRADIENT
    iterations: int = 0
    residual: float = 0.0
    heuristic: bool = False
    seed: int | None = None
    oracle_value: float | None = None

    def to_record(self) -> dict:
        return {
            'star': self.star.value,
            'value': self.value,
            'maximiser': _weights_record(self.maximiser),
            'support': list(self.support),
            'per_colour': {(str(k) if not isinstance(k, tuple) else f'{k[0]},{k[1]}'): v for k, v in self.per_colour.items()},
            'method': self.method.value,
            'iterations': self.iterations,
            'residual': self.residual,
            'heuristic': self.heuristic,
            'seed': self.seed,
            'oracle_value': self.oracle_value,
        }


class SatisfactionStatus(Enum):
    SATISFIED = 'satisfied'
    UNSATISFIABLE = 'unsatisfiable'
    # search budget ran out before a decision was reached
    INDETERMINATE = 'indeterminate'


@dataclass(frozen=True)
class SatisfactionResult:
    status: SatisfactionStatus
    certificate: SatisfactionCertificate | None = None
    nodes: int = 0
    reason: str = ''

    @property
    def satisfied(self) -> bool:
        return self.status == SatisfactionStatus.SATISFIED

    @property
    def exhausted(self) -> bool:
        """True when the answer is a proof (either way), False when the budget ran out"""
        return self.status != SatisfactionStatus.INDETERMINATE

    def __bool__(self) -> bool:
        return self.satisfied

    def to_record(self) -> dict:
        return {
            'status': self.status.value,
            'ordering': list(self.certificate.ordering) if self.certificate else None,
            'nodes': self.nodes,
            'reason': self.reason,
        }


@dataclass(frozen=True)
class DistanceResult:
    """Minimum number of edge deletions after which a 3-graph satisfies a palette

    When the budget runs out `optimal` is False: `distance` is then only an upper
    bound and `lower_bound` is the deepest level proven infeasible + 1.
    """

    distance: int
    lower_bound: int
    optimal: bool
    removed: tuple[tuple[int, ...], ...] = ()
    certificate: SatisfactionCertificate | None = None
    nodes: int = 0

    def to_record(self) -> dict:
        return {
            'distance': self.distance,
            'lower_bound': self.lower_bound,
            'optimal': self.optimal,
            'removed': [list(e) for e in self.removed],
            'nodes': self.nodes,
        }


@dataclass(frozen=True)
class PaletteConstruction:
    """A random palette construction: natural vertex order, iid pair colours, palette-membership edges"""

    hypergraph: Hypergraph
    ordering: tuple[int, ...]
    colouring: PairColouring
    weighting: Weighting
    seed: int

    def certificate(self) -> SatisfactionCertificate:
        return SatisfactionCertificate(self.ordering, self.colouring)

    def to_record(self) -> dict:
        return {
            'n': self.hypergraph.n,
            'edges': self.hypergraph.m,
            'density': self.hypergraph.density(),
            'weighting': _weights_record(self.weighting),
            'seed': self.seed,
        }


@dataclass(frozen=True)
class DensityAudit:
    """Adversarial minimum of the (d, eta, star)-density bound over the witnesses examined

    `star` is None for the induced-subset (uniformly dense) variant. `witnesses`
    holds the argument sets of the minimising witness: (X, Y, Z) vertex tuples
    for vvv, (X, P) for ev, (P, Q) for ee, (U,) for the induced variant. `count`
    and `size` are its exact edge count and the measure it is compared against.
    """

    star: StarMode | None
    d_estimate: float
    eta: float
    witnesses: tuple
    count: int
    size: int
    mode: AuditMode
    samples: int
    seed: int | None = None

    def to_record(self) -> dict:
        return {
            'star': self.star.value if self.star else 'induced',
            'd_estimate': self.d_estimate,
            'eta': self.eta,
            'witnesses': [[list(x) for x in w] if w and isinstance(w[0], tuple) else list(w) for w in self.witnesses],
            'count': self.count,
            'size': self.size,
            'mode': self.mode.value,
            'samples': self.samples,
            'seed': self.seed,
        }


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to replay a CLI run and check it produced the same records"""

    command: str
    argv: tuple[str, ...]
    seed: int | None
    version: str
    duration: float
    digest: str

    def to_record(self) -> dict:
        return {
            'command': self.command,
            'argv': list(self.argv),
            'seed': self.seed,
            'version': self.version,
            'duration': self.duration,
            'digest': self.digest,
        }

    @classmethod
    def from_record(cls, record: dict) -> RunManifest:
        return cls(record['command'], tuple(record['argv']), record.get('seed'), record['version'], float(record['duration']), record['digest'])


@dataclass(frozen=True)
class SpectrumEntry:
    """One value (t/6) * Lambda_F of the p_t construction with a representative F"""

    value: float
    t: int
    lagrangian: float
    graph: Hypergraph

    def to_record(self) -> dict:
        return {
            'value': self.value,
            't': self.t,
            'lagrangian': self.lagrangian,
            'n': self.graph.n,
            'edges': [list(e) for e in self.graph.edges],
        }
