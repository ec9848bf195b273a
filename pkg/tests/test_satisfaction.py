import itertools

import numpy as np
import pytest

from pypalette.classes.colouring import SENTINEL_COLOUR, PairColouring, SatisfactionCertificate
from pypalette.classes.config import SatisfactionBudget
from pypalette.classes.exceptions import CertificateException, PyPaletteException
from pypalette.classes.hypergraph import Hypergraph, all_hypergraphs, complete_graph, f32, tight_cycle
from pypalette.classes.palette import Palette
from pypalette.classes.reports import SatisfactionStatus
from pypalette.lib.palette_lagrangian import build_pt
from pypalette.lib.satisfaction import almost_satisfies_distance, satisfies, satisfies_brute_force, verify_certificate

EDGE = tight_cycle(3)
SINGLE = Palette(((1, 2, 3),))
EMPTY = Palette(())


def certificate(n: int, mapping: dict, ordering=None) -> SatisfactionCertificate:
    return SatisfactionCertificate(tuple(ordering or range(1, n + 1)), PairColouring.from_mapping(n, mapping))


def f32_certificate() -> SatisfactionCertificate:
    mapping = {(1, 2): 1, (2, 3): 2, (1, 3): 3, (4, 5): 4}
    for x in (1, 2, 3):
        mapping[(x, 4)] = x
        mapping[(x, 5)] = 5
    return certificate(5, mapping)


def brute_force_distance(graph: Hypergraph, palette: Palette) -> int:
    for size in range(graph.m + 1):
        for removed in itertools.combinations(graph.edges, size):
            if satisfies_brute_force(graph.without_edges(removed), palette):
                return size
    raise AssertionError('deleting every edge always satisfies')


def test_verify_single_edge():
    assert verify_certificate(EDGE, SINGLE, certificate(3, {(1, 2): 1, (2, 3): 2, (1, 3): 3}))
    assert not verify_certificate(EDGE, SINGLE, certificate(3, {(1, 2): 1, (2, 3): 2, (1, 3): 1}))


def test_verify_respects_ordering():
    # with ordering 2, 1, 3 the shadow of {1, 2, 3} is (phi(21), phi(13), phi(23))
    cert = certificate(3, {(1, 2): 1, (1, 3): 2, (2, 3): 3}, ordering=(2, 1, 3))
    assert verify_certificate(EDGE, SINGLE, cert)


def test_verify_f32_with_p6():
    assert verify_certificate(f32(), build_pt(f32(), 6), f32_certificate())


def test_verify_rejects_malformed_certificates():
    good = {(1, 2): 1, (2, 3): 2, (1, 3): 3}
    with pytest.raises(CertificateException):
        verify_certificate(EDGE, SINGLE, certificate(4, {**good, (1, 4): 1, (2, 4): 1, (3, 4): 1}))
    with pytest.raises(CertificateException):
        verify_certificate(EDGE, SINGLE, certificate(3, {(1, 2): 1, (2, 3): 2}))
    with pytest.raises(CertificateException):
        verify_certificate(EDGE, SINGLE, certificate(3, {**good, (1, 3): 9}))
    with pytest.raises(CertificateException):
        verify_certificate(EDGE, SINGLE, SatisfactionCertificate((1, 1, 3), PairColouring.from_mapping(3, good)))


def test_single_edge_satisfies_single_triple(small_budget):
    result = satisfies(EDGE, SINGLE, small_budget)
    assert result.status == SatisfactionStatus.SATISFIED
    assert result
    assert verify_certificate(EDGE, SINGLE, result.certificate)


def test_empty_palette_is_unsatisfiable():
    result = satisfies(EDGE, EMPTY)
    assert result.status == SatisfactionStatus.UNSATISFIABLE
    assert result.exhausted
    assert not satisfies_brute_force(EDGE, EMPTY)


def test_edgeless_graph_satisfies_everything():
    graph = Hypergraph(3, 4, ())
    result = satisfies(graph, EMPTY)
    assert result.satisfied
    assert result.certificate.colouring.colours_used() == {SENTINEL_COLOUR}
    assert verify_certificate(graph, EMPTY, result.certificate)
    assert satisfies(graph, SINGLE).satisfied


@pytest.mark.parametrize('graph', [tight_cycle(3), complete_graph(4), tight_cycle(5), tight_cycle(6), tight_cycle(7), f32()], ids=['c3', 'c4', 'c5', 'c6', 'c7', 'f32'])
def test_graph_satisfies_its_full_permutation_palette(graph, small_budget):
    result = satisfies(graph, build_pt(graph, 6), small_budget)
    assert result.satisfied
    assert verify_certificate(graph, build_pt(graph, 6), result.certificate)


def test_sub_hypergraphs_keep_satisfying(small_budget):
    rng = np.random.default_rng(13)
    for graph in (tight_cycle(6), f32()):
        palette = build_pt(graph, 6)
        for _ in range(5):
            fewer = Hypergraph(3, graph.n, tuple(e for e in graph.edges if rng.random() < 0.6))
            assert satisfies(fewer, palette, small_budget).satisfied
            vertices = [v for v in graph.vertices if rng.random() < 0.7]
            if len(vertices) >= 3:
                assert satisfies(graph.induced(vertices), palette, small_budget).satisfied


def test_p1_of_k4_is_not_satisfied_by_k4():
    palette = build_pt(complete_graph(4), 1)
    assert not satisfies_brute_force(complete_graph(4), palette)
    assert satisfies(complete_graph(4), palette).status == SatisfactionStatus.UNSATISFIABLE


def test_budget_exhaustion_is_indeterminate():
    result = satisfies(complete_graph(4), build_pt(complete_graph(4), 1), SatisfactionBudget(max_nodes=2))
    assert result.status == SatisfactionStatus.INDETERMINATE
    assert not result.exhausted
    assert result.certificate is None


def test_too_many_vertices_is_indeterminate():
    graph = Hypergraph(3, 12, ((1, 2, 3), (10, 11, 12)))
    result = satisfies(graph, SINGLE, SatisfactionBudget(max_n=10))
    assert result.status == SatisfactionStatus.INDETERMINATE


def test_isolated_vertices_are_appended():
    graph = Hypergraph(3, 6, ((2, 4, 6),))
    result = satisfies(graph, SINGLE)
    assert result.satisfied
    assert sorted(result.certificate.ordering) == list(range(1, 7))
    assert verify_certificate(graph, SINGLE, result.certificate)


def test_parallel_branches_agree(small_budget):
    budget = SatisfactionBudget(max_n=8, max_nodes=500_000, max_workers=3)
    for graph in (f32(), complete_graph(4), tight_cycle(5)):
        for t in (1, 2, 6):
            palette = build_pt(graph, t)
            assert satisfies(graph, palette, budget).status == satisfies(graph, palette, small_budget).status


def test_satisfaction_needs_a_3graph():
    with pytest.raises(PyPaletteException):
        satisfies(complete_graph(3, k=2), SINGLE)


@pytest.mark.slow
def test_search_agrees_with_brute_force():
    universe = list(itertools.product((1, 2), repeat=3))
    palettes = [Palette(c) for size in range(5) for c in itertools.combinations(universe, size)]
    graphs = [g for n in (3, 4) for g in all_hypergraphs(n)]
    disagreements = []
    for graph in graphs:
        for palette in palettes:
            result = satisfies(graph, palette)
            assert result.exhausted
            if result.satisfied != satisfies_brute_force(graph, palette):
                disagreements.append((graph.edges, palette.triples))
    assert disagreements == []


@pytest.mark.slow
def test_search_agrees_with_brute_force_on_five_vertices():
    """Three colours on five vertices, sampled so the literal enumeration stays small"""
    rng = np.random.default_rng(21)
    universe = list(itertools.product((1, 2, 3), repeat=3))
    candidates = []
    for edges in itertools.combinations(itertools.combinations(range(1, 6), 3), 3):
        pairs = {pair for e in edges for pair in itertools.combinations(e, 2)}
        if set().union(*edges) == {1, 2, 3, 4, 5} and len(pairs) <= 7:
            candidates.append(Hypergraph(3, 5, edges))
    graphs = [candidates[i] for i in rng.choice(len(candidates), 6, replace=False)]
    palettes = [Palette(tuple(universe[i] for i in sorted(rng.choice(len(universe), size, replace=False)))) for size in rng.integers(2, 8, size=8)]
    disagreements = []
    for graph in graphs:
        for palette in palettes:
            assert len(palette.colours) <= 3
            result = satisfies(graph, palette)
            assert result.exhausted
            if result.satisfied != satisfies_brute_force(graph, palette):
                disagreements.append((graph.edges, palette.triples))
    assert disagreements == []


def test_distance_zero_when_satisfied():
    result = almost_satisfies_distance(EDGE, SINGLE)
    assert result.distance == 0
    assert result.optimal


def test_distance_empty_palette_removes_everything():
    result = almost_satisfies_distance(f32(), EMPTY)
    assert result.distance == f32().m
    assert result.optimal
    assert set(result.removed) == set(f32().edges)


def test_distance_k4_single_triple():
    graph = complete_graph(4)
    result = almost_satisfies_distance(graph, SINGLE)
    assert result.optimal
    assert result.distance == brute_force_distance(graph, SINGLE)
    assert result.lower_bound == result.distance
    remaining = graph.without_edges(result.removed)
    assert verify_certificate(remaining, SINGLE, result.certificate)


def test_distance_matches_brute_force_on_small_graphs():
    rng = np.random.default_rng(8)
    universe = list(itertools.product((1, 2), repeat=3))
    candidates = list(itertools.combinations(range(1, 5), 3))
    for _ in range(15):
        graph = Hypergraph(3, 4, tuple(e for e in candidates if rng.random() < 0.7))
        palette = Palette(tuple(universe[i] for i in rng.choice(len(universe), size=int(rng.integers(1, 4)), replace=False)))
        result = almost_satisfies_distance(graph, palette)
        assert result.optimal
        assert result.distance == brute_force_distance(graph, palette)
        assert len(result.removed) == result.distance
        assert verify_certificate(graph.without_edges(result.removed), palette, result.certificate)


def test_distance_budget_gives_flagged_upper_bound():
    graph = complete_graph(5)
    palette = build_pt(complete_graph(4), 1)
    result = almost_satisfies_distance(graph, palette, SatisfactionBudget(max_nodes=3))
    assert not result.optimal
    assert result.lower_bound <= result.distance
    assert verify_certificate(graph.without_edges(result.removed), palette, result.certificate)
