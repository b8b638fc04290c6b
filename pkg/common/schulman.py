# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Two weakly coupled Ehrenfest urn systems

Each subsystem holds N balls in two urns; per step one ball picked at random changes urn.
The coupling lets a subsystem out of equilibrium push the other one: every excess ball of A
fires with probability lambda per step, moving one A ball toward balance and one B ball into
the urn A overloads. Entropy is the Boltzmann entropy ln C(N, n) of the occupation n.
"""

import logging
from types import SimpleNamespace

import numpy as np
from scipy.special import gammaln
from scipy.stats import ks_2samp

from common.helper import chunk_bounds, derive_rng, map_chunks, write_csv

my_logger = logging.getLogger(__name__)

SCENARIOS = ['asymmetric_sizes', 'mirror']
MAX_COUPLING = 0.05
MIN_BALLS = 8
BLOCK = 1024
MONOTONE_SIGMAS = 5.0
DISPLACEMENT_SIGMAS = 3.0
SIGNIFICANCE = 0.05
MIRROR_PASS_RATE = 0.8


class UrnPair:
    """
    Subsystems A and B with n_a >= n_b >= 8 balls and coupling in [0, 0.05]

    max_coupling can be raised for exploratory runs beyond the weak coupling bound.
    """
    def __init__(self, n_a, n_b, coupling=0.01, max_coupling=MAX_COUPLING):
        self.n_a, self.n_b = int(n_a), int(n_b)
        self.coupling = float(coupling)
        if not self.n_a >= self.n_b >= MIN_BALLS:
            raise ValueError('Need N_A >= N_B >= {}, got {} and {}'.format(MIN_BALLS, self.n_a, self.n_b))
        if not 0 <= self.coupling <= max_coupling:
            raise ValueError('Coupling {} outside [0, {}]'.format(self.coupling, max_coupling))

    def to_dict(self):
        return {'n_a': self.n_a, 'n_b': self.n_b, 'coupling': self.coupling}


def entropy_table(n):
    """ln C(n, k) for k = 0..n"""
    k = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _start(rng, n, runs, far):
    return np.full(runs, n, dtype=np.int64) if far else rng.binomial(n, 0.5, size=runs).astype(np.int64)


def simulate_urns(n_a, n_b, coupling, steps, rng, runs=1, far_a=True):
    """
    Occupation histories of shape (steps + 1, runs) for both subsystems

    A starts with every ball in one urn when far_a, else at a draw from equilibrium; B always
    starts from equilibrium. Uniforms are drawn in blocks.

    :return: (occupation of A, occupation of B, conserved flag)
    """
    x_a = _start(rng, n_a, runs, far_a)
    x_b = _start(rng, n_b, runs, False)
    hist_a = np.empty((steps + 1, runs), dtype=np.int64)
    hist_b = np.empty((steps + 1, runs), dtype=np.int64)
    hist_a[0], hist_b[0] = x_a, x_b
    half_a = n_a / 2.0
    for first in range(0, steps, BLOCK):
        block = min(BLOCK, steps - first)
        uniforms = rng.random((block, 2, runs))
        for i in range(block):
            x_a = x_a + np.where(uniforms[i, 0] < x_a / n_a, -1, 1)
            x_b = x_b + np.where(uniforms[i, 1] < x_b / n_b, -1, 1)
            if coupling > 0:
                excess = x_a - half_a
                pushes = rng.binomial(np.floor(np.abs(excess)).astype(np.int64), coupling)
                direction = np.sign(excess).astype(np.int64)
                x_a = x_a - direction * pushes
                x_b = np.clip(x_b + direction * pushes, 0, n_b)
            hist_a[first + i + 1] = x_a
            hist_b[first + i + 1] = x_b
    conserved = bool(np.all((hist_a >= 0) & (hist_a <= n_a)) and np.all((hist_b >= 0) & (hist_b <= n_b)))
    return hist_a, hist_b, conserved


def block_window(n_a, steps):
    """Coarse graining window: 5 max(N_A, 50) steps, shortened to leave at least four blocks but never below max(N_A, 50)"""
    floor = max(n_a, 50)
    window = max(floor, min(5 * floor, steps // 4))
    if steps < 2 * window:
        raise ValueError('{} steps leave fewer than two coarse graining blocks of {}'.format(steps, window))
    return window


def block_means(series, window):
    """Means over consecutive full windows of a (steps + 1, runs) series, skipping the initial sample"""
    body = series[1:]
    n_blocks = body.shape[0] // window
    return body[:n_blocks * window].reshape(n_blocks, window, -1).mean(axis=1)


def _displacement(entropy_b, n_a, n_b):
    """Time average of S_B^max - S_B over the first N_A steps, per run"""
    return np.mean(entropy_table(n_b).max() - entropy_b[1:n_a + 1], axis=0)


def _reference(pair, steps, seed, runs, chunk, threads):
    """Uncoupled, equilibrium started runs: block mean difference spread and displacement statistics"""
    window = block_window(pair.n_a, steps)
    table_a, table_b = entropy_table(pair.n_a), entropy_table(pair.n_b)

    def work(index, start, stop):
        rng = derive_rng(seed, 'schulman.reference', index)
        occ_a, occ_b, _ = simulate_urns(pair.n_a, pair.n_b, 0.0, steps, rng, stop - start, far_a=False)
        entropy_b = table_b[occ_b]
        diffs = np.diff(block_means(table_a[occ_a] + entropy_b, window), axis=0)
        return diffs.ravel(), _displacement(entropy_b, pair.n_a, pair.n_b)

    parts = map_chunks(work, chunk_bounds(runs, chunk), threads)
    diffs = np.concatenate([p[0] for p in parts])
    stats = np.concatenate([p[1] for p in parts])
    tolerance = MONOTONE_SIGMAS * float(np.std(diffs))
    threshold = float(np.mean(stats) + DISPLACEMENT_SIGMAS * np.std(stats))
    my_logger.log(logging.INFO-1, 'Uncoupled reference: block tolerance {:.4g}, displacement threshold {:.4g}'.format(
        tolerance, threshold))
    return SimpleNamespace(window=window, tolerance=tolerance, threshold=threshold, mean=float(np.mean(stats)))


def _increments(entropy, stride):
    return np.diff(entropy)[::stride]


def _reversed_increments(entropy, stride):
    """Increments of a series read backward in time"""
    return -np.diff(entropy)[::stride]


def schulman_ensemble(pair, steps=20000, runs=100, seed=0, scenario='asymmetric_sizes', threads=1, chunk=25,
                      reference_runs=None):
    """
    Run an ensemble of coupled urn experiments

    asymmetric_sizes: A starts with all balls in one urn, B at equilibrium. A run is monotone when
    no coarse grained composite entropy block falls by more than five reference spreads, and
    displaced when its B displacement exceeds the uncoupled mean by three reference spreads.

    mirror: the A series of a relaxation run is joined with the time reversed B series of a run
    with the roles swapped. A run is symmetric when a two sample KS test cannot tell A's entropy
    increments from those of B read back in time.

    :return: SimpleNamespace with per-run verdicts, ensemble fractions and mean entropy series
    """
    if scenario not in SCENARIOS:
        raise ValueError('Unknown scenario {}, expected one of {}'.format(scenario, SCENARIOS))
    table_a, table_b = entropy_table(pair.n_a), entropy_table(pair.n_b)
    stream = 'schulman.' + scenario
    bounds = chunk_bounds(runs, chunk)

    if scenario == 'asymmetric_sizes':
        reference = _reference(pair, steps, seed, reference_runs or max(32, runs), chunk, threads)

        def work(index, start, stop):
            rng = derive_rng(seed, stream, index)
            occ_a, occ_b, conserved = simulate_urns(pair.n_a, pair.n_b, pair.coupling, steps, rng, stop - start)
            s_a, s_b = table_a[occ_a], table_b[occ_b]
            diffs = np.diff(block_means(s_a + s_b, reference.window), axis=0)
            monotone = np.all(diffs >= -reference.tolerance, axis=0)
            displacement = _displacement(s_b, pair.n_a, pair.n_b)
            return s_a, s_b, monotone, displacement, conserved

        parts = map_chunks(work, bounds, threads)
        s_a = np.concatenate([p[0] for p in parts], axis=1)
        s_b = np.concatenate([p[1] for p in parts], axis=1)
        monotone = np.concatenate([p[2] for p in parts])
        displacement = np.concatenate([p[3] for p in parts])
        displaced = displacement > reference.threshold
        result = SimpleNamespace(scenario=scenario, runs=runs, monotone=monotone, displacement=displacement,
                                 displaced=displaced, monotone_fraction=float(np.mean(monotone)),
                                 displaced_fraction=float(np.mean(displaced)), tolerance=reference.tolerance,
                                 threshold=reference.threshold, window=reference.window,
                                 conserved=all(p[4] for p in parts))
        my_logger.info('Asymmetric urns: monotone in {:.0%} of runs, B displaced in {:.0%}'.format(
            result.monotone_fraction, result.displaced_fraction))
    else:
        stride = max(1, min(pair.n_a, pair.n_b) // 20)

        def work(index, start, stop):
            rng = derive_rng(seed, stream, index)
            occ_x, _, ok_x = simulate_urns(pair.n_a, pair.n_b, pair.coupling, steps, rng, stop - start)
            occ_y, _, ok_y = simulate_urns(pair.n_b, pair.n_a, pair.coupling, steps, rng, stop - start)
            s_a = table_a[occ_x]
            # B is stored time reversed: its last sample is the swapped run's start, all balls in one urn
            s_b = table_b[occ_y][::-1]
            stats = []
            for r in range(s_a.shape[1]):
                stats.append(ks_2samp(_increments(s_a[:, r], stride), _reversed_increments(s_b[:, r], stride)))
            return s_a, s_b, stats, ok_x and ok_y

        parts = map_chunks(work, bounds, threads)
        s_a = np.concatenate([p[0] for p in parts], axis=1)
        s_b = np.concatenate([p[1] for p in parts], axis=1)
        tests = [t for p in parts for t in p[2]]
        p_values = np.array([t.pvalue for t in tests])
        symmetric = p_values >= SIGNIFICANCE
        result = SimpleNamespace(scenario=scenario, runs=runs, statistics=np.array([t.statistic for t in tests]),
                                 p_values=p_values, symmetric=symmetric, symmetric_fraction=float(np.mean(symmetric)),
                                 stride=stride, conserved=all(p[3] for p in parts))
        my_logger.info('Mirror urns ({} vs {}): symmetric in {:.0%} of runs'.format(pair.n_a, pair.n_b,
                                                                                   result.symmetric_fraction))
    result.S_A = s_a
    result.S_B = s_b
    result.pair = pair
    result.steps = steps
    if not result.conserved:
        my_logger.error('Ball count left its range in the {} ensemble'.format(scenario))
    return result


def schulman_sim(pair, steps=20000, seed=0, scenario='asymmetric_sizes', reference_runs=32):
    """
    Single run of a scenario with its entropy series and verdicts

    :return: SimpleNamespace(t, S_A, S_B, S_total, ...) with scalar verdicts for the one run
    """
    ensemble = schulman_ensemble(pair, steps, 1, seed, scenario, reference_runs=reference_runs)
    s_a, s_b = ensemble.S_A[:, 0], ensemble.S_B[:, 0]
    result = SimpleNamespace(scenario=scenario, t=np.arange(steps + 1), S_A=s_a, S_B=s_b, S_total=s_a + s_b,
                             conserved=ensemble.conserved)
    if scenario == 'asymmetric_sizes':
        result.monotone = bool(ensemble.monotone[0])
        result.displaced = bool(ensemble.displaced[0])
        result.displacement = float(ensemble.displacement[0])
        result.threshold = ensemble.threshold
        result.tolerance = ensemble.tolerance
    else:
        result.symmetric = bool(ensemble.symmetric[0])
        result.p_value = float(ensemble.p_values[0])
        result.statistic = float(ensemble.statistics[0])
    return result


def mirror_verdict(equal, unequal):
    """Mirror symmetry holds for equal sizes and is broken for unequal ones"""
    return equal.symmetric_fraction >= MIRROR_PASS_RATE and unequal.symmetric_fraction <= 1 - MIRROR_PASS_RATE


ENTROPY_COLUMNS = ['step', 'S_A', 'S_B', 'S_total']


def export_entropy_csv(result, path, header=None):
    """Ensemble mean entropy series, one row per step"""
    s_a = result.S_A if result.S_A.ndim == 1 else result.S_A.mean(axis=1)
    s_b = result.S_B if result.S_B.ndim == 1 else result.S_B.mean(axis=1)
    rows = zip(np.arange(len(s_a)), s_a, s_b, s_a + s_b)
    write_csv(path, ENTROPY_COLUMNS, rows, header)
