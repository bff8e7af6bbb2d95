#!/usr/bin/env python3
"""
dtree bench - explores a model on a chosen state storage and reports
state counts, bytes per state, node counts and state-length histograms
"""

import argparse
import csv
import json
import logging
import sys
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv

from cchm_store import ConcurrentChainingHashMap
from config import MODELS, OUTPUT_FORMATS, STORAGES, RunConfig
from counters_model import CountersModel
from dtree import DTree
from dyn_alloc_model import DynAllocModel
from models import Model
from process_tree_model import ProcessTreeModel, ProcessTreeRecursiveModel
from schema_analyzer import ScenarioError, compare_schemas, load_scenario
from search_core import SearchAborted, SearchStats, run
from state_storage import CapacityExhaustedError, ConfigurationError, StateStorage, StorageError
from treedbs_store import PaddedTreeDBS, TreeDBSHybridStore

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_INCOMPATIBLE = 4

MODEL_CLASSES = {
    'counters': CountersModel,
    'process_tree': ProcessTreeModel,
    'process_tree_recursive': ProcessTreeRecursiveModel,
    'dyn_alloc': DynAllocModel,
}


def build_storage(config: RunConfig) -> StateStorage:
    if config.storage == 'dtree':
        return DTree(config.scale_root, config.scale_data, config.seed)
    if config.storage == 'cchm':
        return ConcurrentChainingHashMap(config.scale_root)
    if config.storage == 'treedbs_pad':
        return PaddedTreeDBS(config.pad_length, config.scale_root, config.scale_data, config.seed)
    return TreeDBSHybridStore(config.pad_length, config.scale_root, config.scale_data,
                              config.scale_sub, config.seed)


def build_model(config: RunConfig) -> Model:
    return MODEL_CLASSES[config.model](**config.model_args)


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, ConfigurationError):
        return EXIT_INVALID_CONFIG
    if isinstance(error, CapacityExhaustedError):
        return EXIT_CAPACITY
    if isinstance(error, StorageError):
        return EXIT_INCOMPATIBLE
    return 1


def build_report(config: RunConfig, stats: SearchStats, error: Optional[BaseException] = None,
                 states: Optional[List[Sequence[int]]] = None) -> Dict:
    """
    Assemble the run report.

    Returns:
        Dictionary with counts, timing, memory metrics, histogram rows and
        the config echo. bytes_per_state divides occupied storage bytes by
        visited root states; bytes_per_insert divides by all insert/delta
        results seen during the run.
    """
    storage = stats.storage
    visited = stats.visited_roots
    memory = storage.get('memory_bytes', 0)
    allocated = storage.get('allocated_bytes', 0)
    report = {
        'visited_roots': visited,
        'transitions': stats.transitions,
        'operations': stats.operations,
        'inserts': stats.inserts,
        'wall_time_s': round(stats.wall_time, 6),
        'memory_bytes': memory,
        'allocated_bytes': allocated,
        'bytes_per_state': memory / visited if visited else None,
        'allocated_bytes_per_state': allocated / visited if visited else None,
        'bytes_per_insert': memory / stats.inserts if stats.inserts else None,
        'total_node_count': storage.get('node_count', 0),
        'root_occupancy': storage.get('root_occupancy', 0),
        'data_occupancy': storage.get('data_occupancy', 0),
        'length_histogram': [
            {'length': length, 'root': root, 'inserted': counts[0], 'new': counts[1]}
            for (length, root), counts in sorted(stats.histogram.items())
        ],
        'config': config.echo(),
        'error': str(error) if error is not None else None,
    }
    if states is not None:
        report['states'] = [list(s) for s in states]
    return report


def run_benchmark(config: RunConfig):
    """
    Run the search for one config.

    Returns:
        (report, exit code); aborted runs still report their partial stats
    """
    storage = build_storage(config)
    model = build_model(config)
    try:
        stats = run(model, storage, config.threads, config.progress_interval,
                    record_visited=config.dump)
    except SearchAborted as e:
        report, code = build_report(config, e.stats, e.cause), exit_code_for(e.cause)
    else:
        states = None
        if config.dump:
            states = sorted(model.canonical_state(storage, sid) for sid in stats.visited_ids)
        report, code = build_report(config, stats, states=states), EXIT_OK
    # model_args echoes the overrides; model_params has every resolved value
    report['config']['model_params'] = model.params()
    return report, code


# =======================
# Output
# =======================

SUMMARY_FIELDS = (
    'visited_roots', 'transitions', 'operations', 'inserts', 'wall_time_s',
    'memory_bytes', 'allocated_bytes', 'bytes_per_state', 'allocated_bytes_per_state',
    'bytes_per_insert', 'total_node_count', 'root_occupancy', 'data_occupancy', 'error',
)


def print_report_table(report: Dict, show_histogram: bool) -> None:
    config = report['config']
    print("\n" + "=" * 80)
    print(f"{'DTREE BENCH':^80}")
    title = f"{config['model']} on {config['storage']} with {config['threads']} thread(s)"
    print(f"{title:^80}")
    print("=" * 80)
    for name in SUMMARY_FIELDS:
        value = report[name]
        if value is None:
            continue
        if isinstance(value, float):
            value = f"{value:.3f}"
        print(f"   {name:28} {value}")

    if show_histogram:
        print("-" * 80)
        print(f"   {'length':>8} | {'root':>5} | {'inserted':>10} | {'new':>10}")
        for row in report['length_histogram']:
            print(f"   {row['length']:>8} | {'yes' if row['root'] else 'no':>5} | "
                  f"{row['inserted']:>10} | {row['new']:>10}")

    for state in report.get('states', []):
        print("   state " + ",".join(str(slot) for slot in state))

    print("=" * 80)
    if report['error']:
        print(f"❌ Search aborted: {report['error']}")
    print()


def report_rows(report: Dict, show_histogram: bool) -> List[List]:
    rows = [['summary', name, report[name]] for name in SUMMARY_FIELDS]
    rows.extend(['config', key, json.dumps(value) if isinstance(value, dict) else value]
                for key, value in report['config'].items())
    if show_histogram:
        rows.extend(['hist', row['length'], int(row['root']), row['inserted'], row['new']]
                    for row in report['length_histogram'])
    for state in report.get('states', []):
        rows.append(['state'] + list(state))
    return rows


def write_report(report: Dict, fmt: str, show_histogram: bool) -> None:
    if fmt == 'json':
        payload = dict(report)
        if not show_histogram:
            payload.pop('length_histogram')
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    elif fmt == 'csv':
        csv.writer(sys.stdout).writerows(report_rows(report, show_histogram))
    else:
        print_report_table(report, show_histogram)


def write_shapes(rows: List[Dict], fmt: str) -> None:
    if fmt == 'json':
        json.dump({'shapes': rows}, sys.stdout, indent=2)
        sys.stdout.write("\n")
    elif fmt == 'csv':
        csv.writer(sys.stdout).writerows(
            ['shape', r['schema'], r['step'], r['length'], r['added'], r['total']] for r in rows
        )
    else:
        print("\n" + "=" * 80)
        print(f"{'TREE SCHEMA COMPARISON':^80}")
        print("=" * 80)
        print(f"   {'schema':16} | {'step':>4} | {'length':>6} | {'added':>6} | {'total':>6}")
        for r in rows:
            print(f"   {r['schema']:16} | {r['step']:>4} | {r['length']:>6} | {r['added']:>6} | {r['total']:>6}")
        print("=" * 80 + "\n")


# =======================
# Command line
# =======================

def parse_model_args(pairs: Sequence[str]) -> Dict[str, int]:
    args = {}
    for pair in pairs:
        key, sep, value = pair.partition('=')
        if not sep or not key:
            raise ConfigurationError(f"--model-arg expects k=v, got {pair!r}")
        try:
            args[key.strip()] = int(value)
        except ValueError:
            raise ConfigurationError(f"--model-arg {key}: {value!r} is not an integer")
    return args


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='main.py',
        description='Explore a model on a state storage and report state counts and memory use.',
    )
    parser.add_argument('--model', default='counters', help=f"one of {', '.join(MODELS)}")
    parser.add_argument('--model-arg', action='append', default=[], metavar='K=V',
                        help='model parameter, repeatable (e.g. n=4, P=2, K=2, modulus=10)')
    parser.add_argument('--storage', default='dtree', help=f"one of {', '.join(STORAGES)}")
    parser.add_argument('--scale-root', type=int, help='root set scale (2^N buckets)')
    parser.add_argument('--scale-data', type=int, help='data set scale (2^N buckets, at most 32)')
    parser.add_argument('--scale-sub', type=int, help='cchm bucket scale inside treedbs_x_cchm')
    parser.add_argument('--pad-length', type=int, help='L for treedbs_pad / routing length for treedbs_x_cchm')
    parser.add_argument('--threads', type=int, help='worker threads')
    parser.add_argument('--format', default='table', choices=OUTPUT_FORMATS)
    parser.add_argument('--histogram', action='store_true', help='emit state-length histogram rows')
    parser.add_argument('--dump', action='store_true', help='emit every visited root state, sorted')
    parser.add_argument('--progress', type=int, help='log progress every N seconds')
    parser.add_argument('--shapes', metavar='FILE',
                        help='compare tree schemas on a scenario file (or built-in: fig34 (alias append), growth)')
    return parser


def log_level(config: RunConfig) -> int:
    """INFO while progress reporting is on."""
    return logging.INFO if config.progress_interval else logging.WARNING


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)

    if args.shapes:
        try:
            rows = compare_schemas(load_scenario(args.shapes))
        except ScenarioError as e:
            print(f"❌ Malformed scenario: {e}", file=sys.stderr)
            return EXIT_INVALID_CONFIG
        write_shapes(rows, args.format)
        return EXIT_OK

    try:
        config = RunConfig.from_defaults(
            model=args.model,
            model_args=parse_model_args(args.model_arg),
            storage=args.storage,
            scale_root=args.scale_root,
            scale_data=args.scale_data,
            scale_sub=args.scale_sub,
            pad_length=args.pad_length,
            threads=args.threads,
            format=args.format,
            histogram=args.histogram,
            dump=args.dump,
            progress_interval=args.progress,
        ).validate()
        logging.getLogger().setLevel(log_level(config))
        report, code = run_benchmark(config)
    except ConfigurationError as e:
        print(f"❌ Invalid configuration: {e}", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    if config.format == 'table':
        print(f"🔍 Explored {config.model} on {config.storage}", file=sys.stderr)
    write_report(report, config.format, config.histogram)
    return code


if __name__ == "__main__":
    sys.exit(main())
