import json
import time

import pytest

from pypalette.classes.colouring import load_certificate
from pypalette.classes.hypergraph import load_hypergraph
from pypalette.classes.palette import load_palette
from pypalette.cli import EXIT_ERROR, EXIT_OK, EXIT_TOLERANCE, MANIFEST_NAME, build_parser, main, manifest_path, records_digest, records_text
from pypalette.lib.satisfaction import verify_certificate

QUICK = ['--starts', '30', '--seed', '11']


def run(tmp_path, *argv) -> tuple[int, list[dict]]:
    """Run the CLI writing JSON-lines records to a temp file and read them back"""
    out = tmp_path / 'records.jsonl'
    if out.exists():
        out.unlink()
    code = main([*argv, '--format', 'records', '--output', str(out), '--log-file', str(tmp_path / 'pypalette.log')])
    records = [json.loads(line) for line in out.read_text(encoding='utf-8').splitlines()] if out.exists() else []
    return code, records


def test_records_text_is_canonical():
    records = [{'b': 1, 'a': [1, 2]}, {'z': None}]
    assert records_text(records) == '{"a":[1,2],"b":1}\n{"z":null}\n'
    assert records_digest(records) == records_digest([{'a': [1, 2], 'b': 1}, {'z': None}])


def test_lagrangian_of_f32(tmp_path, data_dir):
    code, records = run(tmp_path, 'lagrangian', str(data_dir / 'f32.txt'), *QUICK)
    assert code == EXIT_OK
    (rec,) = records
    assert rec['graph'] == 'f32.txt'
    assert rec['value'] / 6 == pytest.approx(0.0385954, abs=1e-6)


def test_palette_lagrangian_ee_of_full_permutation_palette(tmp_path, data_dir):
    code, records = run(tmp_path, 'palette-lagrangian', str(data_dir / 'p6_single_edge.txt'), '--star', 'ee', *QUICK)
    assert code == EXIT_OK
    assert records[0]['star'] == 'ee'
    assert records[0]['value'] == pytest.approx(0.0, abs=1e-9)


def test_build_pt_writes_palette(tmp_path, data_dir):
    target = tmp_path / 'nested' / 'pt.txt'
    code, records = run(tmp_path, 'build-pt', str(data_dir / 'k4.txt'), '--t', '2', '-o', str(target))
    assert code == EXIT_OK
    palette = load_palette(target)
    assert len(palette.triples) == len(records[0]['triples']) == 8
    assert records[0]['colours'] == 4


def test_satisfies_emits_a_valid_certificate(tmp_path, data_dir):
    cert_path = tmp_path / 'edge.cert'
    code, records = run(tmp_path, 'satisfies', str(data_dir / 'single_edge.txt'), str(data_dir / 'p6_single_edge.txt'), '--emit-cert', str(cert_path))
    assert code == EXIT_OK
    assert records[0]['status'] == 'satisfied'
    graph = load_hypergraph(data_dir / 'single_edge.txt')
    assert verify_certificate(graph, load_palette(data_dir / 'p6_single_edge.txt'), load_certificate(cert_path))


def test_almost_distance_with_empty_palette(tmp_path, data_dir):
    empty = tmp_path / 'empty.txt'
    empty.write_text('# no triples\n', encoding='utf-8')
    code, records = run(tmp_path, 'almost-distance', str(data_dir / 'k4.txt'), str(empty))
    assert code == EXIT_OK
    assert records[0]['distance'] == 4
    assert records[0]['optimal'] is True


def test_construct_writes_graph_and_certificate(tmp_path, data_dir):
    palette_path = data_dir / 'p6_single_edge.txt'
    graph_path, cert_path = tmp_path / 'graph.txt', tmp_path / 'graph.cert'
    code, records = run(tmp_path, 'construct', str(palette_path), '--n', '15', '--seed', '3', '-o', str(graph_path), '--emit-cert', str(cert_path))
    assert code == EXIT_OK
    graph = load_hypergraph(graph_path)
    assert graph.n == 15
    assert records[0]['edges'] == graph.m
    assert verify_certificate(graph, load_palette(palette_path), load_certificate(cert_path))


def test_construct_with_explicit_weights(tmp_path, data_dir):
    code, records = run(tmp_path, 'construct', str(data_dir / 'p6_single_edge.txt'), '--n', '10', '--weights', '1/2,1/4,1/4')
    assert code == EXIT_OK
    assert records[0]['weighting'] == {'1': 0.5, '2': 0.25, '3': 0.25}


@pytest.mark.parametrize('weights', ['1,1', '1/2,1/2', 'a,b,c'])
def test_construct_rejects_bad_weights(tmp_path, data_dir, weights):
    code, _ = run(tmp_path, 'construct', str(data_dir / 'p6_single_edge.txt'), '--n', '10', '--weights', weights)
    assert code == EXIT_ERROR


def test_audit_exhaustive(tmp_path, data_dir):
    code, records = run(tmp_path, 'audit', str(data_dir / 'k4.txt'), '--star', 'vvv', '--eta', '0', '--exhaustive')
    assert code == EXIT_OK
    assert records[0]['d_estimate'] == 0.0
    assert records[0]['mode'] == 'exhaustive'


def test_audit_induced(tmp_path, data_dir):
    code, records = run(tmp_path, 'audit', str(data_dir / 'k4.txt'), '--star', 'induced', '--eta', '0')
    assert code == EXIT_OK
    assert records[0]['star'] == 'induced'
    assert records[0]['d_estimate'] == 1.0


def test_reproduce_observation_passes(tmp_path):
    code, records = run(tmp_path, 'reproduce-observation', *QUICK)
    assert code == EXIT_OK
    assert [rec['graph'] for rec in records] == ['C3', 'C4', 'C5', 'C6', 'C7', 'F32']
    assert all(rec['passed'] for rec in records)


@pytest.mark.parametrize('graph, t, expected', [('f32.txt', 6, 6 * (5 * 5**0.5 + 63) / 1922), ('single_edge.txt', 3, 1 / 9), ('k4.txt', 1, 1 / 16)])
def test_pt_check(tmp_path, data_dir, graph, t, expected):
    code, records = run(tmp_path, 'pt-check', str(data_dir / graph), '--t', str(t), *QUICK)
    assert code == EXIT_OK
    assert records[0]['passed'] is True
    assert records[0]['palette_lagrangian'] == pytest.approx(expected, abs=1e-6)


def test_spectrum_smallest_graphs(tmp_path):
    code, records = run(tmp_path, 'spectrum', '--max-n', '3', '--t', '1', '6')
    assert code == EXIT_OK
    assert [rec['value'] for rec in records] == pytest.approx([1 / 27, 2 / 9])


def test_missing_input_is_an_error(tmp_path):
    code, records = run(tmp_path, 'lagrangian', str(tmp_path / 'nope.txt'))
    assert code == EXIT_ERROR
    assert records == []


def test_malformed_input_is_an_error(tmp_path):
    bad = tmp_path / 'bad.txt'
    bad.write_text('3 4\n1 2 9\n', encoding='utf-8')
    code, _ = run(tmp_path, 'lagrangian', str(bad))
    assert code == EXIT_ERROR


def test_replay_matches_and_detects_tampering(tmp_path, data_dir):
    manifest_path = tmp_path / 'run.json'
    code, _ = run(tmp_path, 'construct', str(data_dir / 'p6_single_edge.txt'), '--n', '12', '--seed', '5', '--manifest', str(manifest_path))
    assert code == EXIT_OK
    manifest = json.loads(manifest_path.read_text(encoding='utf-8'))
    assert manifest['command'] == 'construct'
    assert manifest['seed'] == 5

    code, records = run(tmp_path, 'replay', str(manifest_path))
    assert code == EXIT_OK
    assert records[0]['match'] is True

    manifest['digest'] = '0' * 64
    manifest_path.write_text(json.dumps(manifest), encoding='utf-8')
    code, records = run(tmp_path, 'replay', str(manifest_path))
    assert code == EXIT_TOLERANCE
    assert records[0]['match'] is False


def test_replay_refuses_replay_manifests(tmp_path):
    manifest_path = tmp_path / 'run.json'
    manifest_path.write_text(json.dumps({'command': 'replay', 'argv': ['replay', 'x.json'], 'seed': None, 'version': '0.1.0', 'duration': 0.0, 'digest': ''}), encoding='utf-8')
    code, _ = run(tmp_path, 'replay', str(manifest_path))
    assert code == EXIT_ERROR


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(['--version'])
    assert exc.value.code == 0
    assert 'pypalette' in capsys.readouterr().out


def test_identical_runs_write_identical_records(tmp_path, data_dir):
    argv = ['audit', str(data_dir / 'f32.txt'), '--star', 'ev', '--eta', '0.01', '--samples', '500', '--seed', '4', '--format', 'records', '--log-file', str(tmp_path / 'log.txt')]
    first, second = tmp_path / 'first.jsonl', tmp_path / 'second.jsonl'
    assert main([*argv, '--output', str(first)]) == EXIT_OK
    assert main([*argv, '--output', str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_manifest_is_written_beside_the_output_by_default(tmp_path, data_dir):
    code, records = run(tmp_path, 'construct', str(data_dir / 'p6_single_edge.txt'), '--n', '12', '--seed', '8')
    assert code == EXIT_OK
    manifest_path = tmp_path / MANIFEST_NAME
    manifest = json.loads(manifest_path.read_text(encoding='utf-8'))
    assert manifest['command'] == 'construct'
    assert manifest['digest'] == records_digest(records)

    code, replayed = run(tmp_path, 'replay', str(manifest_path))
    assert code == EXIT_OK
    assert replayed[0]['match'] is True


def test_manifest_path_prefers_the_explicit_flag(tmp_path):
    parser = build_parser()
    explicit = parser.parse_args(['reproduce-observation', '--output', str(tmp_path / 'out' / 'r.jsonl'), '--manifest', str(tmp_path / 'm.json')])
    beside = parser.parse_args(['reproduce-observation', '--output', str(tmp_path / 'out' / 'r.jsonl')])
    nowhere = parser.parse_args(['reproduce-observation'])
    assert manifest_path(explicit) == str(tmp_path / 'm.json')
    assert manifest_path(beside) == str(tmp_path / 'out' / MANIFEST_NAME)
    assert manifest_path(nowhere) is None


def test_no_manifest_file_without_an_output_file(tmp_path, data_dir, monkeypatch, capsys):
    work = tmp_path / 'work'
    work.mkdir()
    monkeypatch.chdir(work)
    code = main(['build-pt', str(data_dir / 'k4.txt'), '--t', '1', '--format', 'records', '--log-file', str(tmp_path / 'pypalette.log')])
    assert code == EXIT_OK
    records = [json.loads(line) for line in capsys.readouterr().out.splitlines() if line.startswith('{')]
    assert records[0]['colours'] == 4
    assert list(work.iterdir()) == []


@pytest.mark.slow
def test_reproduce_observation_defaults_are_quick(tmp_path):
    parser = build_parser()
    assert parser.parse_args(['reproduce-observation']).starts == 40
    start = time.time()
    code, records = run(tmp_path, 'reproduce-observation')
    assert code == EXIT_OK
    assert all(rec['passed'] for rec in records)
    assert time.time() - start < 30


@pytest.mark.parametrize('fmt', ['records', 'table'])
def test_stdout_holds_only_results(data_dir, tmp_path, capsys, fmt):
    code = main(['audit', str(data_dir / 'k4.txt'), '--star', 'vvv', '--eta', '0', '--exhaustive', '--format', fmt, '--log-file', str(tmp_path / 'pypalette.log')])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert 'Exhaustive' not in out
    if fmt == 'records':
        assert [json.loads(line)['star'] for line in out.splitlines() if line.startswith('{')] == ['vvv']
    else:
        assert any(line.split()[:2] == ['graph', 'star'] for line in out.splitlines())


def test_spectrum_records_on_stdout_parse(tmp_path, capsys):
    code = main(['spectrum', '--max-n', '3', '--t', '1', '--format', 'records', '--log-file', str(tmp_path / 'pypalette.log')])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert 'Lagrangians' not in out
    assert [json.loads(line)['t'] for line in out.splitlines() if line.startswith('{')] == [1]
