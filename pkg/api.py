#!/usr/bin/env python3
"""
Flask API for the dtree bench
Serves run reports, histograms and tree schema comparisons as JSON
"""

import os
from datetime import datetime

from dotenv import load_dotenv
from flask import Flask, jsonify, request
from flask_cors import CORS

from config import CACHE_DURATION, MODELS, STORAGES, RunConfig
from main import MODEL_CLASSES, run_benchmark
from schema_analyzer import BUILTIN_SCENARIOS, ScenarioError, compare_schemas, load_scenario, parse_scenario
from state_storage import ConfigurationError

load_dotenv()

app = Flask(__name__)
CORS(app)

# Cache reports to avoid re-running identical configs
run_cache = {
    'entries': {},
    'cache_duration': CACHE_DURATION,
}


def _is_fresh(entry, now):
    return (now - entry['timestamp']).total_seconds() < run_cache['cache_duration']


def _get_cached_report(key, now, force_refresh=False):
    entry = run_cache['entries'].get(key)
    if not force_refresh and entry and _is_fresh(entry, now):
        return entry['data']
    return None


def _set_cached_report(key, data, timestamp):
    entries = run_cache['entries']
    # expired entries are evicted on write
    for stale in [k for k, entry in entries.items() if not _is_fresh(entry, timestamp)]:
        del entries[stale]
    entries[key] = {'data': data, 'timestamp': timestamp}


def _int_arg(name):
    value = request.args.get(name)
    if value is None or value == '':
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"Query parameter {name}={value!r} is not an integer")


def _config_from_request():
    model_args = {}
    for pair in request.args.getlist('model_arg'):
        key, _, value = pair.partition('=')
        try:
            model_args[key] = int(value)
        except ValueError:
            raise ConfigurationError(f"model_arg {pair!r} is not k=<integer>")
    return RunConfig.from_defaults(
        model=request.args.get('model', 'counters'),
        model_args=model_args,
        storage=request.args.get('storage', 'dtree'),
        scale_root=_int_arg('scale_root'),
        scale_data=_int_arg('scale_data'),
        scale_sub=_int_arg('scale_sub'),
        pad_length=_int_arg('pad_length'),
        threads=_int_arg('threads'),
        histogram=True,
        dump=request.args.get('dump', 'false').lower() == 'true',
        progress_interval=0,
    ).validate()


def _error(e, status):
    return jsonify({
        'success': False,
        'error': str(e),
        'timestamp': datetime.now().isoformat()
    }), status


@app.route('/api/run')
def get_run_report():
    """Run (or fetch from cache) a search and return its report"""
    try:
        config = _config_from_request()
    except ConfigurationError as e:
        return _error(e, 400)

    now = datetime.now()
    key = repr(sorted(config.echo().items())) + f"|dump={config.dump}"
    force_refresh = request.args.get('refresh', 'false').lower() == 'true'
    try:
        cached = _get_cached_report(key, now, force_refresh)
        if cached is not None:
            return jsonify(cached)
        report, code = run_benchmark(config)
        payload = {
            'success': code == 0,
            'exit_code': code,
            'report': report,
            'timestamp': now.isoformat(),
        }
        if code == 0:
            _set_cached_report(key, payload, now)
        return jsonify(payload)
    except ConfigurationError as e:
        return _error(e, 400)
    except Exception as e:
        return _error(e, 500)


@app.route('/api/histogram')
def get_histogram():
    """State-length histogram rows of a run"""
    response = get_run_report()
    if isinstance(response, tuple):
        return response
    data = response.get_json()
    return jsonify({
        'success': data['success'],
        'histogram': data['report']['length_histogram'],
        'timestamp': data['timestamp'],
    })


@app.route('/api/shapes', methods=['GET', 'POST'])
def get_shapes():
    """Node counts per tree schema for a built-in or posted scenario"""
    try:
        if request.method == 'POST':
            vectors = parse_scenario(request.get_data(as_text=True))
        else:
            vectors = load_scenario_name(request.args.get('scenario', 'fig34'))
        return jsonify({'success': True, 'shapes': compare_schemas(vectors)})
    except ScenarioError as e:
        return _error(e, 400)


def load_scenario_name(name):
    # only built-in names over HTTP, never file paths
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioError(f"Unknown scenario {name!r}; choose from {', '.join(BUILTIN_SCENARIOS)}")
    return load_scenario(name)


@app.route('/api/storages')
def get_storages():
    return jsonify({'success': True, 'storages': STORAGES})


@app.route('/api/models')
def get_models():
    models = {}
    for name, info in MODELS.items():
        params = {key: default for key, (default, _) in MODEL_CLASSES[name].PARAMETERS.items()}
        models[name] = dict(info, parameters=params)
    return jsonify({'success': True, 'models': models})


if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5001))
    print("🌲 dtree bench API Server")
    print(f"📊 Starting server at http://localhost:{port}")
    print(f"🔄 Reports cached for {CACHE_DURATION} seconds")

    app.run(debug=True, host='0.0.0.0', port=port, use_reloader=False)
