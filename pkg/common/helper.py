# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

import csv
import hashlib
import json
import logging
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from types import SimpleNamespace

import numpy as np

my_logger = logging.getLogger(__name__)

LOG_ENTRY = ('name', 'measured', 'expected', 'result')

CSV_FLOAT = '{:.17g}'

def create_entry(name, measured, expected, result):
    return SimpleNamespace(**{
        "name": name,
        "measured": measured,
        "expected": expected,
        "result": result
    })


def parse_range(string):
    """
    Parse a range string of the form start:stop:count, optionally followed by :log

    A bare scalar is accepted and returns a one element array.
    Examples: 0.005:0.08:8, 0.005:0.08:8:log, -20:20:401

    :param string: range as start:stop:count[:log]
    :type string: str
    :return: numpy array of values
    """
    parts = [x.strip() for x in str(string).split(':')]
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) not in [3, 4]:
        raise ValueError('Range {} must look like start:stop:count or start:stop:count:log'.format(string))
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError('Range {} must have a positive count'.format(string))
    if len(parts) == 4:
        if parts[3].lower() != 'log':
            raise ValueError('Unknown range spacing {}'.format(parts[3]))
        if start <= 0 or stop <= 0:
            raise ValueError('Log range {} must be positive'.format(string))
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def parse_triple(string):
    """Parse "x,y,z" into a tuple of three floats"""
    parts = [x.strip() for x in str(string).split(',')]
    if len(parts) != 3:
        raise ValueError('Expected three comma separated values, got {}'.format(string))
    return tuple(float(x) for x in parts)


def parse_kernel(string):
    """
    Parse a kernel string such as lorentzian:gamma=0.3 or gaussian:sigma=1.0

    :return: tuple of (kind, parameter dict)
    """
    kind, _, rest = str(string).partition(':')
    kind = kind.strip().lower()
    if kind not in ['lorentzian', 'gaussian']:
        raise ValueError('Unknown kernel {}'.format(kind))
    params = {}
    for item in [x for x in rest.split(',') if x.strip()]:
        key, sep, value = item.partition('=')
        if not sep:
            raise ValueError('Kernel parameter {} needs a value'.format(item))
        params[key.strip().lower()] = float(value)
    required = 'gamma' if kind == 'lorentzian' else 'sigma'
    if required not in params:
        raise ValueError('Kernel {} requires {}'.format(kind, required))
    return kind, params


def parse_grid(string):
    """Parse NxM into a pair of ints"""
    parts = str(string).lower().split('x')
    if len(parts) != 2:
        raise ValueError('Grid {} must look like 512x512'.format(string))
    return int(parts[0]), int(parts[1])


def derive_rng(seed, stream, *index):
    """
    Derive the random generator of a named stream

    The stream name is folded into the spawn key, so adding a stream never shifts another.

    :param seed: root seed of the run
    :param stream: name of the stream, such as a subcommand
    :param index: optional integers (chunk, run, sample) appended to the key
    :return: numpy Generator
    """
    key = (zlib.crc32(stream.encode('utf-8')),) + tuple(int(i) for i in index)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def resolve_threads(threads=None):
    """Worker count from the flag, then TEMPUS_THREADS, then 1"""
    if threads in [None, '', 0]:
        threads = os.environ.get('TEMPUS_THREADS', 1)
    try:
        threads = int(threads)
    except ValueError:
        my_logger.warning('Thread count {} is not an integer, using 1'.format(threads))
        threads = 1
    return max(1, threads)


def chunk_bounds(total, chunk):
    """Split range(total) into (start, stop) pairs of at most chunk items"""
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]


def map_chunks(func, bounds, threads=1):
    """
    Run func(index, start, stop) over every chunk and return results in chunk order

    Chunks carry their own index so any randomness inside is derived from it, not from the worker.
    """
    threads = resolve_threads(threads)
    if threads == 1 or len(bounds) < 2:
        return [func(i, a, b) for i, (a, b) in enumerate(bounds)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(func, i, a, b) for i, (a, b) in enumerate(bounds)]
        return [f.result() for f in futures]


def canonical_hash(params):
    """SHA-256 of a parameter dict with sorted keys"""
    text = json.dumps(params, sort_keys=True, default=str, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return CSV_FLOAT.format(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, columns, rows, header=None):
    """
    Write rows to CSV with 17 significant digits

    :param path: output file
    :param columns: column names
    :param rows: iterable of sequences
    :param header: optional comment line written first, prefixed with #
    """
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        if header:
            f.write('# {}\n'.format(header))
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(x) for x in row])
    my_logger.log(logging.INFO-1, 'Wrote {}'.format(path))


def to_jsonable(obj):
    """Convert numpy scalars, arrays and namespaces for json.dump"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, SimpleNamespace):
        return to_jsonable(vars(obj))
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj
