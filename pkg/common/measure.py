# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Coarse grained measures of time symmetric cosmologies

Points live in the cube [-L/2, L/2]^3 over (a_dot, phi, phi_dot). The symmetry axes are
(0, phi, 0) (even) and (0, 0, phi_dot) (odd); grains are max-norm boxes of side epsilon.
"""

import logging
from types import SimpleNamespace

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import linregress, t as student_t

import common.cosmology as cosmology
import common.symmetry as symmetry
import common.trajectory as trajectory
from common.helper import derive_rng, map_chunks, chunk_bounds, write_csv

my_logger = logging.getLogger(__name__)

MODES = ['axis_set', 'solution_tube', 'dynamic']
MIN_HITS = 30
MIN_SAMPLES = 10**4
NEIGHBOURS = 4
CUBE_AXES = [2, 1, 3]


class InsufficientHitsError(Exception):
    """Too few hits at some grain size for a stable fraction"""
    pass


class MeshTooCoarseError(Exception):
    """Surface mesh spacing exceeds a quarter of the smallest grain"""
    pass


class MeasureScanConfig:
    """
    Parameters of a measure scan

    Args:
        L: cube side
        epsilons: grain sizes
        n_samples: uniform samples per grain size (shared across sizes)
        seed: root seed
        model: FRWModel
        mode: axis_set, solution_tube or dynamic
        threads: worker cap for chunked sampling
        chunk: samples per chunk; chunk seeds follow the chunk index
        strict: enforce 0 < eps < L/4 and n_samples >= 10^4
    """
    def __init__(self, L=2.0, epsilons=None, n_samples=10**6, seed=0, model=None, mode='axis_set', threads=1,
                 chunk=10**5, strict=True):
        self.L = float(L)
        self.epsilons = np.sort(np.asarray(epsilons if epsilons is not None else np.geomspace(0.005, 0.08, 8) * L, dtype=float))
        self.n_samples = int(n_samples)
        self.seed = int(seed)
        self.model = model if model is not None else cosmology.FRWModel(k=1, m=0.5)
        self.mode = mode
        self.threads = threads
        self.chunk = int(chunk)
        if mode not in MODES:
            raise ValueError('Unknown mode {}, expected one of {}'.format(mode, MODES))
        if not self.L > 0:
            raise ValueError('Cube side must be positive')
        if np.any(self.epsilons <= 0):
            raise ValueError('Grain sizes must be positive')
        if strict:
            if np.any(self.epsilons >= self.L / 4):
                raise ValueError('Grain sizes must be below L/4 = {}'.format(self.L / 4))
            if self.n_samples < MIN_SAMPLES:
                raise ValueError('Need at least {} samples, got {}'.format(MIN_SAMPLES, self.n_samples))

    def to_dict(self):
        return {'L': self.L, 'epsilons': self.epsilons.tolist(), 'n_samples': self.n_samples, 'seed': self.seed,
                'model': self.model.to_dict(), 'mode': self.mode}


class MeasureScanResult:
    """Per grain fractions with binomial errors, the predicted ratio and the log-log slope"""
    def __init__(self, mode, epsilons, hits, n, predicted, L):
        self.mode = mode
        self.epsilons = np.asarray(epsilons, dtype=float)
        self.hits = np.asarray(hits)
        self.n = int(n)
        self.fractions = np.clip(self.hits / float(n), 0.0, 1.0)
        self.stderr = np.sqrt(self.fractions * (1 - self.fractions) / n)
        self.predicted = np.asarray(predicted, dtype=float)
        self.L = L
        self.slope, self.intercept, self.slope_ci, self.slope_stderr = fit_loglog(self.epsilons, self.fractions)

    def rows(self):
        return [[e, f, s, p] for e, f, s, p in zip(self.epsilons, self.fractions, self.stderr, self.predicted)]

    def to_dict(self):
        return {'mode': self.mode, 'epsilons': self.epsilons, 'fractions': self.fractions, 'stderr': self.stderr,
                'predicted': self.predicted, 'slope': self.slope, 'slope_ci': self.slope_ci, 'n': self.n}


RESULT_COLUMNS = ['epsilon', 'fraction', 'stderr', 'predicted']


def fit_loglog(epsilons, fractions, level=0.95):
    """Least squares slope of log fraction against log epsilon with a t based interval"""
    ok = fractions > 0
    if np.sum(ok) < 2:
        return np.nan, np.nan, (np.nan, np.nan), np.nan
    fit = linregress(np.log(epsilons[ok]), np.log(fractions[ok]))
    dof = int(np.sum(ok)) - 2
    if dof < 1:
        return float(fit.slope), float(fit.intercept), (np.nan, np.nan), np.nan
    half = student_t.ppf(0.5 + level / 2, dof) * fit.stderr
    return float(fit.slope), float(fit.intercept), (float(fit.slope - half), float(fit.slope + half)), float(fit.stderr)


def predicted_fraction(mode, epsilons, L, exact=False):
    """
    Analytic fractions 2 (eps/L)^2 for the axis set and 2 eps/L for the tube

    With exact=True the axis set value drops the doubly counted box where the axes cross,
    2 (eps/L)^2 - (eps/L)^3.
    """
    r = np.asarray(epsilons, dtype=float) / L
    if mode == 'axis_set' or mode == 'dynamic':
        return 2 * r**2 - r**3 if exact else 2 * r**2
    return 2 * r


def axis_distance(points):
    """Max-norm distance of (..., 3) points (a_dot, phi, phi_dot) to the nearer symmetry axis"""
    points = np.asarray(points, dtype=float)
    a_dot, phi, phi_dot = np.abs(points[..., 0]), np.abs(points[..., 1]), np.abs(points[..., 2])
    return np.minimum(np.maximum(a_dot, phi_dot), np.maximum(a_dot, phi))


def axis_membership(point, epsilon):
    """True iff the point lies in the epsilon grain around either axis"""
    if not epsilon > 0:
        raise ValueError('Grain size must be positive')
    return axis_distance(point) < epsilon / 2


def _uniform(rng, n, L):
    return rng.uniform(-L / 2, L / 2, size=(n, 3))


def _count_below(distances, thresholds):
    """Number of distances strictly below each threshold"""
    ordered = np.sort(distances)
    return np.searchsorted(ordered, thresholds, side='left')


def scan_axis_measure(config):
    """
    Monte Carlo fraction of cube points in the axis grains

    One sample set serves every grain size, so the estimate is nondecreasing in epsilon.

    :raises InsufficientHitsError: fewer than 30 hits at some grain size
    """
    if config.mode != 'axis_set':
        raise ValueError('scan_axis_measure needs mode axis_set')
    thresholds = config.epsilons / 2

    def work(index, start, stop):
        rng = derive_rng(config.seed, 'measure.axis', index)
        return _count_below(axis_distance(_uniform(rng, stop - start, config.L)), thresholds)

    hits = np.sum(map_chunks(work, chunk_bounds(config.n_samples, config.chunk), config.threads), axis=0)
    _check_hits(config.epsilons, hits)
    result = MeasureScanResult('axis_set', config.epsilons, hits, config.n_samples,
                               predicted_fraction('axis_set', config.epsilons, config.L), config.L)
    my_logger.info('Axis set slope {:.4f} CI ({:.4f}, {:.4f})'.format(result.slope, *result.slope_ci))
    return result


def _check_hits(epsilons, hits):
    low = [(e, h) for e, h in zip(epsilons, hits) if h < MIN_HITS]
    if low:
        raise InsufficientHitsError('Grain sizes with fewer than {} hits: {}'.format(
            MIN_HITS, ', '.join('{:.4g} ({})'.format(e, h) for e, h in low)))


class SymmetricSurface:
    """
    Two parameter family of time symmetric solutions through one axis

    states has shape (n_time, n_axis, 4) in (a, phi, a_dot, phi_dot) with NaN after a member
    stopped; tau runs from -tau_max to tau_max with the axis at the middle row.
    """
    def __init__(self, parity, axis_values, tau, states, model, dtau):
        self.parity = parity
        self.axis_values = np.asarray(axis_values)
        self.tau = np.asarray(tau)
        self.states = states
        self.model = model
        self.dtau = dtau
        self.points = states[..., CUBE_AXES]
        with np.errstate(invalid='ignore'):
            self.d_axis = np.gradient(self.points, axis=1)
            self.d_time = np.gradient(self.points, axis=0)

    @property
    def n_trajectories(self):
        return self.axis_values.size

    def finite_mask(self):
        return np.all(np.isfinite(self.points), axis=-1) & np.all(np.isfinite(self.d_axis), axis=-1) & np.all(np.isfinite(self.d_time), axis=-1)

    def trajectory(self, i):
        """Member i as a Trajectory over its finite samples, or None if too short"""
        column = self.states[:, i, :]
        good = np.all(np.isfinite(column), axis=1)
        if np.sum(good) < 33:
            return None
        idx = np.nonzero(good)[0]
        if np.any(np.diff(idx) != 1):
            idx = idx[:np.argmax(np.diff(idx) != 1) + 1]
        return trajectory.Trajectory(self.tau[idx], column[idx], self.dtau, 'rk4', 2)

    def spacing(self):
        """Nominal mesh spacing in cube coordinates: axis spacing or median distance per time step"""
        axis_step = float(np.median(np.abs(np.diff(self.axis_values)))) if self.axis_values.size > 1 else np.inf
        steps = np.linalg.norm(self.d_time, axis=-1)
        steps = steps[np.isfinite(steps)]
        time_step = float(np.median(steps)) if steps.size else np.inf
        return max(axis_step, time_step)


def _stop_outside(L, model, dtau):
    half = L / 2

    def stop(x):
        outside = (np.abs(x[:, 2]) > half) | (np.abs(x[:, 1]) > half) | (np.abs(x[:, 3]) > half)
        singular = (x[:, 0] <= 0) | (np.abs(x[:, 0]) < cosmology.SINGULAR_STEPS * abs(dtau) * np.abs(x[:, 2]))
        return outside | singular
    return stop


def build_symmetric_surfaces(model, n_axis=420, n_time=2001, L=2.0, dtau=0.004):
    """
    Propagate axis points forward and backward to sweep the two symmetric surfaces

    Axis coordinates run over a grid of n_axis values in [-L/2, L/2] that avoids zero; n_time
    is the number of time rows (odd, centred on the axis). Points without a physical scale
    factor or that fail during propagation are logged and left as NaN.

    :return: dict {'even': SymmetricSurface, 'odd': SymmetricSurface}
    """
    if n_time % 2 == 0:
        n_time += 1
    steps = n_time // 2
    half = L / 2
    values = np.linspace(-half, half, n_axis)
    if np.any(values == 0):
        values = np.linspace(-half, half, n_axis + 1)
        values = values[values != 0][:n_axis] if n_axis % 2 else values[values != 0]
    system = cosmology.cosmo_system(model)
    stop = _stop_outside(L, model, dtau)
    surfaces = {}
    for parity in ['even', 'odd']:
        starts = np.full((values.size, 4), np.nan)
        failed = 0
        for i, v in enumerate(values):
            phi, phi_dot = (v, 0.0) if parity == 'even' else (0.0, v)
            try:
                a = cosmology.solve_constraint_for_a(0.0, phi, phi_dot, model).a
            except cosmology.NoPhysicalRootError:
                failed += 1
                continue
            starts[i] = [a, phi, 0.0, phi_dot]
        if failed:
            my_logger.warning('{} surface: {} axis points have no physical scale factor'.format(parity, failed))
        fwd, alive_f = trajectory.propagate_ensemble(system.vector_field, starts, dtau, steps, stop=stop)
        back, alive_b = trajectory.propagate_ensemble(system.vector_field, starts, -dtau, steps, stop=stop)
        states = np.concatenate([back[::-1], fwd[1:]], axis=0)
        tau = dtau * np.arange(-steps, steps + 1)
        stopped = int(np.sum(~alive_f)) + int(np.sum(~alive_b))
        my_logger.log(logging.INFO-1, '{} surface: {} members, {} half runs stopped early'.format(parity, values.size, stopped))
        surfaces[parity] = SymmetricSurface(parity, values, tau, states, model, dtau)
    return surfaces


def _tube_distances(surfaces, samples):
    """Max-norm distance of samples to the nearer surface, via tangent planes of the nearest mesh nodes"""
    nodes, du, dv = [], [], []
    for surface in surfaces.values():
        mask = surface.finite_mask()
        nodes.append(surface.points[mask])
        du.append(surface.d_axis[mask])
        dv.append(surface.d_time[mask])
    nodes, du, dv = np.concatenate(nodes), np.concatenate(du), np.concatenate(dv)
    tree = cKDTree(nodes)
    k = min(NEIGHBOURS, nodes.shape[0])
    _, idx = tree.query(samples, k=k)
    idx = idx.reshape(samples.shape[0], k)
    offset = samples[:, None, :] - nodes[idx]
    u, v = du[idx], dv[idx]
    normal = np.cross(u, v)
    n1 = np.sum(np.abs(normal), axis=-1)
    with np.errstate(invalid='ignore', divide='ignore'):
        plane = np.abs(np.sum(normal * offset, axis=-1)) / n1
        # in-plane coordinates of the Euclidean foot, in cells
        uu, uv, vv = np.sum(u * u, -1), np.sum(u * v, -1), np.sum(v * v, -1)
        ou, ov = np.sum(offset * u, -1), np.sum(offset * v, -1)
        det = uu * vv - uv**2
        alpha = (ou * vv - ov * uv) / det
        beta = (ov * uu - ou * uv) / det
    inside = np.isfinite(plane) & (n1 > 0) & (np.abs(alpha) <= 1.0) & (np.abs(beta) <= 1.0)
    node_dist = np.max(np.abs(offset), axis=-1)
    dist = np.where(inside, np.minimum(plane, node_dist), node_dist)
    return np.min(dist, axis=1)


def scan_tube_measure(config, surfaces, refine=False, max_refinements=2):
    """
    Monte Carlo fraction of cube points within max-norm eps/2 of either symmetric surface

    With refine=True the surfaces are rebuilt at doubled density until the fraction at the
    smallest grain changes by less than 5%.

    :raises MeshTooCoarseError: mesh spacing above a quarter of the smallest grain
    """
    if config.mode != 'solution_tube':
        raise ValueError('scan_tube_measure needs mode solution_tube')
    eps_min = float(np.min(config.epsilons))
    spacing = max(s.spacing() for s in surfaces.values())
    if spacing > eps_min / 4:
        raise MeshTooCoarseError('Mesh spacing {:.4g} exceeds eps/4 = {:.4g}'.format(spacing, eps_min / 4))
    thresholds = config.epsilons / 2

    def work(index, start, stop):
        rng = derive_rng(config.seed, 'measure.tube', index)
        return _count_below(_tube_distances(surfaces, _uniform(rng, stop - start, config.L)), thresholds)

    hits = np.sum(map_chunks(work, chunk_bounds(config.n_samples, config.chunk), config.threads), axis=0)
    saturated = config.epsilons >= config.L
    if np.any(saturated):
        my_logger.warning('Grain sizes {} reach the cube side; fractions clamped to 1'.format(config.epsilons[saturated].tolist()))
        hits = np.where(saturated, config.n_samples, hits)
    result = MeasureScanResult('solution_tube', config.epsilons, hits, config.n_samples,
                               predicted_fraction('solution_tube', config.epsilons, config.L), config.L)

    if refine:
        sample = next(iter(surfaces.values()))
        n_axis, n_time, dtau = sample.n_trajectories, sample.tau.size, sample.dtau
        for _ in range(max_refinements):
            n_axis, n_time, dtau = 2 * n_axis, 2 * n_time - 1, dtau / 2
            finer = build_symmetric_surfaces(config.model, n_axis, n_time, config.L, dtau)
            candidate = scan_tube_measure(config, finer)
            change = abs(candidate.fractions[0] - result.fractions[0]) / max(result.fractions[0], 1e-300)
            my_logger.log(logging.INFO-1, 'Refined mesh to {} members: change {:.3%}'.format(n_axis, change))
            result = candidate
            if change < 0.05:
                break

    ratio = result.fractions / result.predicted
    off = (ratio < 0.5) | (ratio > 2.0)
    if np.any(off & ~saturated):
        my_logger.warning('Tube fractions differ from 2 eps/L by more than a factor 2 at eps = {}'.format(
            result.epsilons[off & ~saturated].tolist()))
    my_logger.info('Tube slope {:.4f} CI ({:.4f}, {:.4f})'.format(result.slope, *result.slope_ci))
    return result


def _sample_census(rng, n, L, sampler, epsilon):
    if sampler == 'uniform':
        return _uniform(rng, n, L)
    if sampler == 'on_axis':
        points = np.zeros((n, 3))
        which = rng.integers(0, 2, size=n)
        values = rng.uniform(0.05 * L, L / 2, size=n) * rng.choice([-1.0, 1.0], size=n)
        points[which == 0, 1] = values[which == 0]
        points[which == 1, 2] = values[which == 1]
        return points
    if sampler == 'off_axis':
        points = _uniform(rng, 4 * n, L)
        points = points[axis_distance(points) >= 10 * epsilon]
        while points.shape[0] < n:
            extra = _uniform(rng, 4 * n, L)
            points = np.concatenate([points, extra[axis_distance(extra) >= 10 * epsilon]])
        return points[:n]
    raise ValueError('Unknown sampler {}'.format(sampler))


def _grain_symmetric(traj, epsilon, residual_tol):
    """Whether the run passes through an axis grain from t = 0 without a_dot leaving the grain, and mirrors about it"""
    t, x = traj.t, traj.x
    half = epsilon / 2
    centre = int(np.argmin(np.abs(t)))
    for t_c in cosmology._crossings(x[:, 2], t):
        i = int(np.argmin(np.abs(t - t_c)))
        lo, hi = sorted((centre, i))
        if np.max(np.abs(x[lo:hi + 1, 2])) >= half:
            continue
        for parity, column in [('even', 3), ('odd', 1)]:
            if abs(x[i, column]) >= half:
                continue
            width = min(t_c - t[0], t[-1] - t_c)
            if width < 16 * traj.step:
                continue
            residual, _ = symmetry.reflection_residual(traj, t_c, cosmology.PARITIES[parity])
            if residual <= residual_tol:
                return True
    return False


def dynamic_symmetry_census(config, epsilon=None, t_half=0.5, dtau=0.005, sampler='uniform', residual_tol=None):
    """
    Evolve sampled initial conditions and count those whose solution is symmetric within the grain

    All samples are propagated together; only those with |a_dot| < eps/2 can pass, and for them the
    run must reach a zero of a_dot inside the grain with phi_dot or phi inside the grain there and
    a reflection residual at most residual_tol (default eps).

    :return: SimpleNamespace(fraction, stderr, predicted, predicted_stderr, agree, n)
    """
    if config.mode != 'dynamic':
        raise ValueError('dynamic_symmetry_census needs mode dynamic')
    epsilon = float(epsilon if epsilon is not None else config.epsilons[0])
    residual_tol = epsilon if residual_tol is None else residual_tol
    model = config.model
    system = cosmology.cosmo_system(model)
    steps = int(round(t_half / dtau))
    stop = _stop_outside(4 * config.L, model, dtau)

    def work(index, start, stop_index):
        rng = derive_rng(config.seed, 'measure.dynamic.' + sampler, index)
        points = _sample_census(rng, stop_index - start, config.L, sampler, epsilon)
        predicted = int(np.sum(axis_membership(points, epsilon)))
        candidates = np.nonzero(np.abs(points[:, 0]) < epsilon / 2)[0]
        starts = np.full((candidates.size, 4), np.nan)
        for j, c in enumerate(candidates):
            a_dot, phi, phi_dot = points[c]
            try:
                starts[j] = [cosmology.solve_constraint_for_a(a_dot, phi, phi_dot, model).a, phi, a_dot, phi_dot]
            except cosmology.NoPhysicalRootError:
                pass
        if candidates.size == 0:
            return predicted, 0, 0.0
        fwd, _ = trajectory.propagate_ensemble(system.vector_field, starts, dtau, steps, stop=stop)
        back, _ = trajectory.propagate_ensemble(system.vector_field, starts, -dtau, steps, stop=stop)
        history = np.concatenate([back[::-1], fwd[1:]], axis=0)
        tau = dtau * np.arange(-steps, steps + 1)
        symmetric, worst = 0, 0.0
        for j in range(candidates.size):
            column = history[:, j, :]
            good = np.all(np.isfinite(column), axis=1)
            if not good[steps] or np.sum(good) < 33:
                continue
            idx = np.nonzero(good)[0]
            traj = trajectory.Trajectory(tau[idx], column[idx], dtau, 'rk4', 2)
            worst = max(worst, float(np.max(cosmology.residuals(column[idx], model))))
            symmetric += int(_grain_symmetric(traj, epsilon, residual_tol))
        return predicted, symmetric, worst

    parts = map_chunks(work, chunk_bounds(config.n_samples, config.chunk), config.threads)
    n = config.n_samples
    predicted = sum(p[0] for p in parts) / n
    fraction = sum(p[1] for p in parts) / n
    worst = max(p[2] for p in parts)
    se = np.sqrt(fraction * (1 - fraction) / n)
    se_pred = np.sqrt(predicted * (1 - predicted) / n)
    combined = np.sqrt(se**2 + se_pred**2)
    agree = bool(abs(fraction - predicted) <= 3 * combined) if combined > 0 else fraction == predicted
    my_logger.info('Dynamic census ({}): symmetric {:.5f} vs axis prediction {:.5f}'.format(sampler, fraction, predicted))
    return SimpleNamespace(fraction=float(fraction), stderr=float(se), predicted=float(predicted),
                           predicted_stderr=float(se_pred), agree=agree, n=n, max_residual=worst)


def axis_census(model, n_runs=200, epsilon=1e-3, tol=1e-4, t_half=2.0, step=1e-3, seed=0, L=2.0):
    """
    Symmetry detection on evolve_cosmo runs started on an axis and at least 10 eps off every axis

    Half the runs start on an axis, half off; each is evolved both ways from t = 0.

    :return: SimpleNamespace(on_axis_rate, off_axis_rate, max_residual, failures)
    """
    rng = derive_rng(seed, 'axis_census')
    on = _sample_census(rng, n_runs // 2, L, 'on_axis', epsilon)
    off = _sample_census(rng, n_runs - n_runs // 2, L, 'off_axis', epsilon)
    outcome = {'on': [], 'off': []}
    worst, failures = 0.0, []
    for label, points in [('on', on), ('off', off)]:
        for a_dot, phi, phi_dot in points:
            try:
                a = cosmology.solve_constraint_for_a(a_dot, phi, phi_dot, model).a
                state = cosmology.make_cosmo_state(a, a_dot, phi, phi_dot, 0.0)
                traj = cosmology.evolve_cosmo(state, model, t_half, step, t_start=-t_half)
            except (cosmology.NoPhysicalRootError, cosmology.ConstraintDriftError, trajectory.NonFiniteError) as ex:
                failures.append('{} ({:.4g}, {:.4g}, {:.4g}): {}'.format(label, a_dot, phi, phi_dot, repr(ex)))
                outcome[label].append(label == 'off')
                continue
            worst = max(worst, traj.diagnostics['max_residual'])
            outcome[label].append(cosmology.detect_cosmo_symmetry(traj, tol) is not None)
    for line in failures:
        my_logger.error(line)
    return SimpleNamespace(on_axis_rate=float(np.mean(outcome['on'])), off_axis_rate=float(np.mean(outcome['off'])),
                           max_residual=worst, failures=failures)


def export_scan_csv(result, path, header=None):
    write_csv(path, RESULT_COLUMNS, result.rows(), header)
