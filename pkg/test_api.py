"""Tests for the bench HTTP API through the Flask test client."""

from datetime import datetime, timedelta

import pytest

from api import app, run_cache

SMALL = 'scale_root=10&scale_data=10'


@pytest.fixture
def client():
    run_cache['entries'].clear()
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


def test_storages(client):
    data = client.get('/api/storages').get_json()
    assert data['success']
    assert set(data['storages']) == {'dtree', 'cchm', 'treedbs_pad', 'treedbs_x_cchm'}


def test_models_list_parameter_defaults(client):
    models = client.get('/api/models').get_json()['models']
    assert models['counters']['parameters'] == {'counters': 4, 'modulus': 10}
    assert models['dyn_alloc']['parameters'] == {'P': 2, 'K': 2}


def test_run_report_is_cached(client):
    url = f'/api/run?model=counters&model_arg=counters=2&{SMALL}'
    first = client.get(url)
    assert first.status_code == 200
    data = first.get_json()
    assert data['success'] and data['exit_code'] == 0
    assert data['report']['visited_roots'] == 100
    assert len(run_cache['entries']) == 1

    second = client.get(url).get_json()
    assert second['timestamp'] == data['timestamp']
    refreshed = client.get(url + '&refresh=true').get_json()
    assert refreshed['report']['visited_roots'] == 100


def test_entries_older_than_a_day_are_stale(client):
    url = f'/api/run?model_arg=counters=2&{SMALL}'
    first = client.get(url).get_json()
    entry = next(iter(run_cache['entries'].values()))
    entry['timestamp'] -= timedelta(days=2)
    second = client.get(url).get_json()
    assert second['timestamp'] != first['timestamp']


def test_expired_entries_are_evicted_on_write(client):
    run_cache['entries']['expired'] = {'data': {}, 'timestamp': datetime.now() - timedelta(days=2)}
    client.get(f'/api/run?model_arg=counters=1&{SMALL}')
    assert 'expired' not in run_cache['entries']
    assert len(run_cache['entries']) == 1


def test_run_with_dump(client):
    data = client.get(f'/api/run?model_arg=counters=1&model_arg=modulus=3&dump=true&{SMALL}').get_json()
    assert data['report']['states'] == [[0], [1], [2]]


@pytest.mark.parametrize("query", [
    'storage=nope',
    'scale_root=abc',
    'model_arg=counters=x',
    'storage=treedbs_pad',
])
def test_run_rejects_bad_config(client, query):
    response = client.get(f'/api/run?{query}')
    assert response.status_code == 400
    assert response.get_json()['success'] is False


def test_run_reports_incompatible_storage(client):
    data = client.get(f'/api/run?storage=treedbs_pad&pad_length=2&{SMALL}').get_json()
    assert data['success'] is False
    assert data['exit_code'] == 4
    assert run_cache['entries'] == {}


def test_histogram(client):
    data = client.get(f'/api/histogram?model=dyn_alloc&{SMALL}').get_json()
    assert data['success']
    heap_rows = [row for row in data['histogram'] if not row['root']]
    assert [row['length'] for row in heap_rows] == [1, 2, 3, 4, 5]


def test_histogram_passes_errors_through(client):
    assert client.get('/api/histogram?storage=nope').status_code == 400


def test_shapes_builtin(client):
    data = client.get('/api/shapes?scenario=fig34').get_json()
    added = {row['schema']: row['added'] for row in data['shapes'] if row['step'] == 1}
    assert added['dtree_chain'] == 2
    assert added['impl_treedbs'] == 10


def test_shapes_refuses_file_paths(client):
    assert client.get('/api/shapes?scenario=/etc/hostname').status_code == 400


def test_shapes_posted_scenario(client):
    response = client.post('/api/shapes', data="1,2,3\n1,2,3,4\n")
    assert response.status_code == 200
    assert len(response.get_json()['shapes']) == 8
    assert client.post('/api/shapes', data="1,,2\n").status_code == 400
