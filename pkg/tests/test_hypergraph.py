import io

import numpy as np
import pytest

from pypalette.classes.colouring import SENTINEL_COLOUR, PairColouring, SatisfactionCertificate, parse_certificate, serialize_certificate
from pypalette.classes.exceptions import CertificateException, ParseException, PyPaletteException, UnknownColourException
from pypalette.classes.hypergraph import Hypergraph, all_hypergraphs, complete_graph, f32, from_edges, load_hypergraph, parse_hypergraph, serialize_hypergraph, tight_cycle
from pypalette.classes.palette import Palette, parse_palette, serialize_palette
from pypalette.classes.weighting import StarMode, Weighting


def test_parse_sorts_edges():
    graph = parse_hypergraph('3 4\n1 2 3\n1 4 2\n')
    assert graph.k == 3
    assert graph.n == 4
    assert graph.edges == ((1, 2, 3), (1, 2, 4))


def test_parse_f32_with_comments():
    graph = parse_hypergraph('# F_{3,2}\n3 5\n1 2 3\n\n1 4 5\n2 4 5\n3 4 5\n')
    assert graph == f32()


@pytest.mark.parametrize(
    'text, line',
    [
        ('3 3\n1 2 2\n', 2),
        ('3 3\n1 2 4\n', 2),
        ('3 3\n1 2\n', 2),
        ('3 4\n1 2 3\n3 2 1\n', 3),
        ('3 x\n', 1),
        ('3\n', 1),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseException) as err:
        parse_hypergraph(text)
    assert err.value.line == line


def test_parse_empty_file():
    with pytest.raises(ParseException):
        parse_hypergraph('')


def test_parse_accepts_bytes_and_streams():
    assert parse_hypergraph(b'3 3\n1 2 3\n').m == 1
    assert parse_hypergraph(io.StringIO('3 3\n1 2 3\n')).m == 1


def test_serialize_is_canonical():
    a = parse_hypergraph('3 5\n3 4 5\n2 1 3\n')
    b = parse_hypergraph('3 5\n1 2 3\n5 4 3\n')
    assert serialize_hypergraph(a) == serialize_hypergraph(b) == '3 5\n1 2 3\n3 4 5\n'
    assert parse_hypergraph(serialize_hypergraph(a)) == a


def test_hypergraph_validation():
    with pytest.raises(PyPaletteException):
        Hypergraph(3, 3, ((1, 2, 4),))
    with pytest.raises(PyPaletteException):
        Hypergraph(3, 4, ((1, 2, 3), (3, 2, 1)))
    with pytest.raises(PyPaletteException):
        Hypergraph(3, 4, ((1, 2),))


def test_tight_cycles():
    assert tight_cycle(3).edges == ((1, 2, 3),)
    assert tight_cycle(4) == complete_graph(4)
    assert tight_cycle(5).edges == ((1, 2, 3), (1, 2, 5), (1, 4, 5), (2, 3, 4), (3, 4, 5))
    assert tight_cycle(7).m == 7
    with pytest.raises(PyPaletteException):
        tight_cycle(2)


def test_degrees_and_density():
    graph = f32()
    assert graph.degrees().tolist() == [2, 2, 2, 3, 3]
    assert graph.density() == pytest.approx(4 / 10)
    assert Hypergraph(3, 0, ()).density() == 0.0


def test_induced_relabels():
    sub = f32().induced([1, 4, 5])
    assert sub.n == 3
    assert sub.edges == ((1, 2, 3),)


def test_without_edges():
    graph = complete_graph(4).without_edges([(3, 2, 1)])
    assert graph.m == 3
    assert (1, 2, 3) not in graph


def test_all_hypergraphs_count():
    assert sum(1 for _ in all_hypergraphs(4)) == 16
    assert from_edges([(1, 2, 3), (2, 3, 5)]).n == 5


def test_load_sample_data(data_dir):
    assert load_hypergraph(data_dir / 'f32.txt') == f32()
    assert load_hypergraph(data_dir / 'k4.txt') == complete_graph(4)
    assert load_hypergraph(data_dir / 'c5.txt') == tight_cycle(5)


def test_parse_palette():
    palette = parse_palette('1 2 3\n')
    assert palette.triples == ((1, 2, 3),)
    assert palette.colours == (1, 2, 3)

    empty = parse_palette('')
    assert len(empty) == 0
    assert empty.colours == ()

    p3 = parse_palette('1 2 3\n1 3 2\n2 1 3\n')
    assert len(p3) == 3


def test_palette_repeated_colours_and_dense_indices():
    palette = Palette(((5, 5, 7), (7, 5, 5)))
    assert palette.colours == (5, 7)
    assert palette.triple_array.tolist() == [[0, 0, 1], [1, 0, 0]]
    assert (5, 5, 7) in palette
    assert (5, 7, 5) not in palette
    with pytest.raises(UnknownColourException):
        palette.index_of(6)


@pytest.mark.parametrize('text', ['1 2\n', '1 2 -3\n', '1 2 3\n1 2 3\n', 'a b c\n'])
def test_palette_parse_errors(text):
    with pytest.raises(ParseException):
        parse_palette(text)


def test_palette_serialization_sorted():
    palette = parse_palette('3 2 1\n1 2 3\n')
    assert serialize_palette(palette) == '1 2 3\n3 2 1\n'


def test_weighting_validation():
    assert Weighting.uniform([1, 2, 3, 4]).as_array().sum() == pytest.approx(1.0)
    with pytest.raises(PyPaletteException):
        Weighting((1, 2), (0.5, 0.6))
    with pytest.raises(PyPaletteException):
        Weighting((1, 2), (1.5, -0.5))
    w = Weighting.from_array([1, 2, 3], [2.0, 1.0, -1e-18])
    assert w[1] == pytest.approx(2 / 3)
    assert w.support() == (1, 2)


def test_star_mode_parse():
    assert StarMode.parse('EV') == StarMode.EV
    with pytest.raises(ValueError):
        StarMode.parse('vv')


def test_certificate_text():
    cert = SatisfactionCertificate((1, 2, 3), PairColouring.from_mapping(3, {(1, 2): 1, (2, 3): 2, (1, 3): 3}))
    text = serialize_certificate(cert)
    assert text == '1 2 3\n1 2 1\n1 3 3\n2 3 2\n'
    parsed = parse_certificate(text)
    assert parsed.ordering == cert.ordering
    assert parsed.colouring == cert.colouring


def test_certificate_parse_errors():
    with pytest.raises(ParseException):
        parse_certificate('1 2 3\n1 1 2\n')
    with pytest.raises(ParseException):
        parse_certificate('1 2 3\n1 2 1\n2 1 1\n')


def test_pair_colouring_shape_checked():
    with pytest.raises(CertificateException):
        PairColouring(3, np.zeros((3, 3), dtype=np.int64))
    constant = PairColouring.constant(4, SENTINEL_COLOUR)
    assert constant.colours_used() == {SENTINEL_COLOUR}
    assert constant.missing_pairs() == []
