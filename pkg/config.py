#!/usr/bin/env python3
"""
Configuration for the dtree bench harness
Defaults can be overridden through the environment (or a .env file)
"""

import os
from dataclasses import dataclass, field
from typing import Dict, Optional

from cchm_store import BUCKET_SCALE_MAX
from indexed_hash_set import DATA_SCALE_MAX, SET_SCALE_MAX, SET_SCALE_MIN
from state_storage import ConfigurationError

# =======================
# Storage backends
# =======================
STORAGES = {
    'dtree': {
        'name': 'dtree',
        'description': 'Chain of perfectly balanced trees, variable-length states',
        'requires_pad_length': False,
        'tree': True,
    },
    'cchm': {
        'name': 'cchm',
        'description': 'Concurrent chaining hash map, uncompressed',
        'requires_pad_length': False,
        'tree': False,
    },
    'treedbs_pad': {
        'name': 'TreeDBS_pad',
        'description': 'Fixed-length array-layout tree, states padded to L',
        'requires_pad_length': True,
        'tree': True,
    },
    'treedbs_x_cchm': {
        'name': 'TreeDBS x cchm',
        'description': 'States of length L in TreeDBS, all others in cchm',
        'requires_pad_length': True,
        'tree': True,
    },
}

# =======================
# Models
# =======================
MODELS = {
    'counters': {
        'description': 'Four counters modulo 10 (10^4 states)',
    },
    'process_tree': {
        'description': 'Processes as sub-states, get + delta + delta per step',
    },
    'process_tree_recursive': {
        'description': 'Processes as sub-states, recursive get + recursive sparse delta',
    },
    'dyn_alloc': {
        'description': 'P processes appending up to K slots each to a growing heap',
    },
}

# =======================
# Output settings
# =======================
OUTPUT_FORMATS = ('table', 'json', 'csv')

# =======================
# API cache settings
# =======================
CACHE_DURATION = 30  # seconds


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.environ.get(name, default))
    except (TypeError, ValueError):
        return default


def load_run_defaults() -> Dict[str, int]:
    """Defaults read at call time so a .env loaded by the driver takes effect."""
    return {
        'scale_root': _env_int('DTREE_SCALE_ROOT', 20),
        'scale_data': _env_int('DTREE_SCALE_DATA', 20),
        'scale_sub': _env_int('DTREE_SCALE_SUB', 16),
        'threads': _env_int('DTREE_THREADS', 1),
        'progress_interval': _env_int('DTREE_PROGRESS_INTERVAL', 0),
        'seed': _env_int('DTREE_HASH_SEED', 0x2545F4914F6CDD1D),
    }


@dataclass
class RunConfig:
    model: str = 'counters'
    model_args: Dict[str, int] = field(default_factory=dict)
    storage: str = 'dtree'
    scale_root: int = 20
    scale_data: int = 20
    scale_sub: int = 16
    pad_length: Optional[int] = None
    threads: int = 1
    format: str = 'table'
    histogram: bool = False
    dump: bool = False
    progress_interval: int = 0
    seed: int = 0x2545F4914F6CDD1D

    @classmethod
    def from_defaults(cls, **overrides) -> 'RunConfig':
        values = load_run_defaults()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def validate(self) -> 'RunConfig':
        if self.model not in MODELS:
            raise ConfigurationError(f"Unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.storage not in STORAGES:
            raise ConfigurationError(f"Unknown storage {self.storage!r}; choose from {', '.join(STORAGES)}")
        if self.format not in OUTPUT_FORMATS:
            raise ConfigurationError(f"Unknown format {self.format!r}")
        if self.threads < 1:
            raise ConfigurationError(f"Threads must be at least 1, got {self.threads}")

        backend = STORAGES[self.storage]
        if backend['tree']:
            for label, scale in (('root', self.scale_root), ('data', self.scale_data)):
                if not SET_SCALE_MIN <= scale <= SET_SCALE_MAX:
                    raise ConfigurationError(
                        f"{label} set scale {scale} outside {SET_SCALE_MIN}..{SET_SCALE_MAX}"
                    )
            if self.scale_data > DATA_SCALE_MAX:
                raise ConfigurationError(
                    f"data set scale {self.scale_data} exceeds {DATA_SCALE_MAX} (data indices must fit 32 bits)"
                )
        elif not 1 <= self.scale_root <= BUCKET_SCALE_MAX:
            # cchm sizes its bucket arrays with the root scale
            raise ConfigurationError(f"bucket scale {self.scale_root} outside 1..{BUCKET_SCALE_MAX}")
        if not 1 <= self.scale_sub <= BUCKET_SCALE_MAX:
            raise ConfigurationError(f"sub-store scale {self.scale_sub} outside 1..{BUCKET_SCALE_MAX}")

        if backend['requires_pad_length']:
            if self.pad_length is None or self.pad_length < 2:
                raise ConfigurationError(f"{self.storage} needs --pad-length L >= 2")
        elif self.pad_length is not None:
            raise ConfigurationError(f"--pad-length only applies to padded stores, not {self.storage}")
        return self

    def echo(self) -> Dict[str, object]:
        return {
            'model': self.model,
            'model_args': dict(self.model_args),
            'storage': self.storage,
            'scale_root': self.scale_root,
            'scale_data': self.scale_data,
            'scale_sub': self.scale_sub,
            'pad_length': self.pad_length,
            'threads': self.threads,
        }
