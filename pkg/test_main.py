"""Tests for the bench command line and its run configuration."""

import csv
import io
import json
import logging

import pytest

from config import RunConfig, load_run_defaults
from main import EXIT_CAPACITY, EXIT_INCOMPATIBLE, EXIT_INVALID_CONFIG, EXIT_OK, log_level, main
from state_storage import ConfigurationError

SMALL = ['--scale-root', '10', '--scale-data', '10']


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------- configuration ----------

def test_env_overrides_defaults(monkeypatch):
    monkeypatch.setenv('DTREE_THREADS', '3')
    monkeypatch.setenv('DTREE_SCALE_ROOT', 'not-a-number')
    defaults = load_run_defaults()
    assert defaults['threads'] == 3
    assert defaults['scale_root'] == 20
    assert RunConfig.from_defaults(threads=None).threads == 3
    assert RunConfig.from_defaults(threads=5).threads == 5


@pytest.mark.parametrize("overrides", [
    {'storage': 'nope'},
    {'model': 'nope'},
    {'threads': 0},
    {'scale_data': 33},
    {'scale_root': 3},
    {'storage': 'treedbs_pad'},
    {'storage': 'treedbs_x_cchm', 'pad_length': 1},
    {'pad_length': 8},
    {'storage': 'cchm', 'scale_root': 33},
])
def test_invalid_configs(overrides):
    with pytest.raises(ConfigurationError):
        RunConfig(**overrides).validate()


def test_valid_padded_config():
    config = RunConfig(storage='treedbs_x_cchm', pad_length=4).validate()
    assert config.echo()['pad_length'] == 4


def test_progress_interval_from_environment_enables_info_logging(monkeypatch):
    monkeypatch.setenv('DTREE_PROGRESS_INTERVAL', '5')
    config = RunConfig.from_defaults(progress_interval=None)
    assert config.progress_interval == 5
    assert log_level(config) == logging.INFO
    assert log_level(RunConfig()) == logging.WARNING


# ---------- runs ----------

def test_json_report_with_histogram(capsys):
    code, out, _ = run_cli(capsys, '--model-arg', 'counters=2', *SMALL, '--format', 'json', '--histogram')
    assert code == EXIT_OK
    report = json.loads(out)
    assert report['visited_roots'] == 100
    assert report['transitions'] == 200
    assert report['error'] is None
    assert report['config']['model_args'] == {'counters': 2}
    assert report['config']['model_params'] == {'counters': 2, 'modulus': 10}
    assert report['length_histogram'] == [{'length': 2, 'root': True, 'inserted': 201, 'new': 100}]
    assert report['bytes_per_state'] == report['memory_bytes'] / 100


def test_csv_report_matches_json(capsys):
    argv = ['--model', 'dyn_alloc', *SMALL, '--histogram']
    _, out, _ = run_cli(capsys, *argv, '--format', 'json')
    report = json.loads(out)
    _, out, _ = run_cli(capsys, *argv, '--format', 'csv')
    rows = list(csv.reader(io.StringIO(out)))

    summary = {row[1]: row[2] for row in rows if row[0] == 'summary'}
    assert int(summary['visited_roots']) == report['visited_roots'] == 19
    assert int(summary['total_node_count']) == report['total_node_count']
    assert int(summary['memory_bytes']) == report['memory_bytes']

    hist = [[int(v) for v in row[1:]] for row in rows if row[0] == 'hist']
    assert hist == [[r['length'], int(r['root']), r['inserted'], r['new']]
                    for r in report['length_histogram']]


def test_table_report(capsys):
    code, out, err = run_cli(capsys, '--model-arg', 'counters=1', *SMALL)
    assert code == EXIT_OK
    assert 'DTREE BENCH' in out
    assert 'visited_roots' in out
    assert 'counters' in err


def test_dump_lists_sorted_canonical_states(capsys):
    code, out, _ = run_cli(capsys, '--model', 'process_tree', '--model-arg', 'n=1',
                           '--model-arg', 'modulus=3', '--storage', 'cchm', '--scale-root', '8',
                           '--format', 'json', '--dump', '--threads', '2')
    assert code == EXIT_OK
    assert json.loads(out)['states'] == [[1, 1, 0], [1, 1, 1], [1, 1, 2]]


def test_dump_in_csv(capsys):
    _, out, _ = run_cli(capsys, '--model-arg', 'counters=1', '--model-arg', 'modulus=2',
                        *SMALL, '--format', 'csv', '--dump')
    states = [row[1:] for row in csv.reader(io.StringIO(out)) if row[0] == 'state']
    assert states == [['0'], ['1']]


# ---------- exit codes ----------

@pytest.mark.parametrize("argv", [
    ['--storage', 'nope'],
    ['--scale-data', '33'],
    ['--storage', 'treedbs_pad'],
    ['--pad-length', '4'],
    ['--model-arg', 'counters'],
    ['--model-arg', 'digits=3'],
    ['--model-arg', 'counters=x'],
])
def test_invalid_configuration_exit_code(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == EXIT_INVALID_CONFIG
    assert 'Invalid configuration' in err
    assert out == ''


def test_capacity_exhausted_exit_code(capsys):
    code, out, _ = run_cli(capsys, '--scale-root', '4', '--scale-data', '10', '--format', 'json')
    assert code == EXIT_CAPACITY
    report = json.loads(out)
    assert report['error']
    assert 1 <= report['visited_roots'] <= 16


def test_incompatible_state_exit_code(capsys):
    code, out, _ = run_cli(capsys, '--storage', 'treedbs_pad', '--pad-length', '2', *SMALL, '--format', 'json')
    assert code == EXIT_INCOMPATIBLE
    assert 'pad length' in json.loads(out)['error']


def test_unallocatable_sets_exit_as_invalid_config(capsys, monkeypatch):
    def refuse(*args, **kwargs):
        raise MemoryError()

    monkeypatch.setattr('indexed_hash_set.np.zeros', refuse)
    code, out, err = run_cli(capsys, '--scale-root', '40', '--format', 'json')
    assert code == EXIT_INVALID_CONFIG
    assert 'Cannot allocate' in err
    assert out == ''


# ---------- schema comparison ----------

def test_shapes_builtin_scenario(capsys):
    code, out, _ = run_cli(capsys, '--shapes', 'fig34', '--format', 'json')
    assert code == EXIT_OK
    rows = json.loads(out)['shapes']
    assert len(rows) == 8
    dtree_rows = [r for r in rows if r['schema'] == 'dtree_chain']
    assert [r['total'] for r in dtree_rows] == [9, 11]


def test_shapes_builtin_csv_labels(capsys):
    code, out, _ = run_cli(capsys, '--shapes', 'fig34', '--format', 'csv')
    assert code == EXIT_OK
    second_step = {row[1]: (int(row[4]), int(row[5]))
                   for row in csv.reader(io.StringIO(out)) if row[2] == '1'}
    assert second_step == {
        'paper_treedbs': (7, 16),
        'impl_treedbs': (10, 19),
        'impl_backwards': (5, 14),
        'dtree_chain': (2, 11),
    }


def test_shapes_append_alias(capsys):
    _, fig34_out, _ = run_cli(capsys, '--shapes', 'fig34', '--format', 'json')
    _, alias_out, _ = run_cli(capsys, '--shapes', 'append', '--format', 'json')
    assert json.loads(alias_out) == json.loads(fig34_out)


def test_shapes_csv(capsys, tmp_path):
    scenario = tmp_path / 'scenario.txt'
    scenario.write_text("# tiny\n1,2\n1,2,3\n")
    code, out, _ = run_cli(capsys, '--shapes', str(scenario), '--format', 'csv')
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 8
    assert all(row[0] == 'shape' for row in rows)


def test_shapes_table(capsys):
    code, out, _ = run_cli(capsys, '--shapes', 'growth')
    assert code == EXIT_OK
    assert 'TREE SCHEMA COMPARISON' in out


def test_malformed_scenario(capsys, tmp_path):
    scenario = tmp_path / 'broken.txt'
    scenario.write_text("1,2\nthree\n")
    code, _, err = run_cli(capsys, '--shapes', str(scenario))
    assert code == EXIT_INVALID_CONFIG
    assert 'Line 2' in err
