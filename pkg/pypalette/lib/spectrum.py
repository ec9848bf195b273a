"""Values (t/6) * Lambda_F realised by p_t palettes of small 3-graphs

Every such value is the vvv Lagrangian of a palette, so each one is a
(lower bound for a) uniform Turan density. Enumerating small F gives an explicit
finite piece of that set.
"""

import itertools
from collections.abc import Sequence

from rsxml import Logger, ProgressBar

from pypalette.classes.config import SolverConfig
from pypalette.classes.exceptions import PyPaletteException
from pypalette.classes.hypergraph import Hypergraph, all_hypergraphs
from pypalette.classes.reports import SpectrumEntry
from pypalette.lib.lagrangian import lagrangian

MAX_SPECTRUM_N = 5
VALUE_DECIMALS = 9


def canonical_form(graph: Hypergraph) -> tuple[tuple[int, ...], ...]:
    """Smallest sorted edge list over all relabellings: equal exactly for isomorphic graphs"""
    best = None
    for perm in itertools.permutations(range(1, graph.n + 1)):
        relabelled = tuple(sorted(tuple(sorted(perm[v - 1] for v in e)) for e in graph.edges))
        if best is None or relabelled < best:
            best = relabelled
    return best or ()


def scaled_lagrangian_spectrum(max_n: int = 4, ts: Sequence[int] = (1, 2, 3, 4, 5, 6), config: SolverConfig | None = None, progress: bool = False) -> list[SpectrumEntry]:
    """Distinct values (t/6) * Lambda_F over all 3-graphs F on at most max_n vertices

    Graphs with an isolated vertex are skipped (they repeat a smaller graph) and
    each isomorphism class is solved once.

    Args:
        max_n (int, optional): largest vertex count, at most 5
        ts (Sequence[int], optional): the t values to scale by
        config (SolverConfig, optional): solver settings for each Lagrangian
        progress (bool, optional): draw a progress bar

    Returns:
        list[SpectrumEntry]: sorted by value, first-found representative for each value
    """
    log = Logger('Spectrum')
    if max_n > MAX_SPECTRUM_N:
        raise PyPaletteException(f'Spectrum enumeration is limited to {MAX_SPECTRUM_N} vertices, got {max_n}')
    if any(not 1 <= t <= 6 for t in ts):
        raise PyPaletteException(f't values must lie in 1..6, got {list(ts)}')
    config = config or SolverConfig(starts=40)

    classes: dict[tuple, Hypergraph] = {}
    for n in range(3, max_n + 1):
        for graph in all_hypergraphs(n):
            if graph.m == 0 or (graph.degrees() == 0).any():
                continue
            classes.setdefault(canonical_form(graph), graph)
    log.info(f'{len(classes)} isomorphism classes of 3-graphs on 3..{max_n} vertices without isolated vertices')

    bar = ProgressBar(len(classes), 50, 'Lagrangians') if progress else None
    entries: dict[float, SpectrumEntry] = {}
    for idx, graph in enumerate(classes.values()):
        value = lagrangian(graph, config).value
        for t in ts:
            scaled = t * value / 6
            key = round(scaled, VALUE_DECIMALS)
            if key not in entries:
                entries[key] = SpectrumEntry(scaled, t, value, graph)
        if bar:
            bar.update(idx + 1)
    if bar:
        bar.finish()

    return [entries[key] for key in sorted(entries)]
