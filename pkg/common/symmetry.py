# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Executable tests for time reversal invariance, reversibility and time symmetry
"""

import logging
from collections import namedtuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

import common.trajectory as trajectory

my_logger = logging.getLogger(__name__)

REVERSIBLE = 'Reversible'
IRREVERSIBLE = 'Irreversible'
UNDETERMINED = 'Undetermined'
MIXED = 'Mixed'

Verdict = namedtuple('Verdict', ['kind', 'period', 'reason'])

MIN_SIDE_SAMPLES = 16
SCREEN_POINTS = 16
ESCAPE_FACTOR = 1e3
ALIGNMENT = 0.99


class WindowTooShortError(Exception):
    """Fewer than 16 samples on either side of every symmetry candidate"""
    pass


class ClassificationReport:
    """
    Outcome of the three tests on one system

    :param system: name of the system
    :param tri: time reversal invariance of the equation
    :param reversible: one of Reversible, Irreversible, Undetermined or Mixed
    :param period: return period when reversible
    :param time_symmetric: symmetry centre t_S, or None
    :param tolerances: dict of the tolerances used
    :param per_trajectory: verdicts keyed by trajectory label, for systems with several regimes
    """
    def __init__(self, system, tri, reversible, period=None, time_symmetric=None, tolerances=None, per_trajectory=None):
        self.system = system
        self.tri = tri
        self.reversible = reversible
        self.period = period
        self.time_symmetric = time_symmetric
        self.tolerances = dict(tolerances or {})
        self.per_trajectory = dict(per_trajectory or {})
        if reversible == REVERSIBLE and not (period is not None and period > 0):
            raise ValueError('A reversible verdict needs a positive period')

    def as_row(self):
        detail = '; '.join('{}: {}'.format(k, v.kind) for k, v in sorted(self.per_trajectory.items()))
        return [self.system, self.tri, self.reversible, self.period if self.period is not None else '',
                self.time_symmetric if self.time_symmetric is not None else '', detail]

    def to_dict(self):
        return {'system': self.system, 'tri': self.tri, 'reversible': self.reversible, 'period': self.period,
                'time_symmetric': self.time_symmetric, 'tolerances': self.tolerances,
                'per_trajectory': {k: v._asdict() for k, v in self.per_trajectory.items()}}

    def __repr__(self):
        return 'ClassificationReport({}, tri={}, {})'.format(self.system, self.tri, self.reversible)


REPORT_COLUMNS = ['system', 'tri', 'reversible', 'period', 'time_symmetric', 'per_trajectory']


def check_time_reversal_invariance(system, samples=64, seed=0, tol=1e-10):
    """
    Infinitesimal reversal test R(F(R x)) = -F(x) at random phase points

    :param system: DynamicalSystem
    :param samples: number of points, uniform in [-2, 2]^dim
    :param seed: seed of the sampling generator
    :param tol: tolerance, relative to the largest field component
    :return: bool
    """
    if samples < 1:
        raise ValueError('Need at least one sample')
    rng = np.random.default_rng(seed)
    points = rng.uniform(-2.0, 2.0, size=(samples, system.dim))
    forward = np.asarray(system.vector_field(0.0, points))
    mirrored = system.reversal_involution(np.asarray(system.vector_field(0.0, system.reversal_involution(points))))
    defect = float(np.max(np.abs(mirrored + forward)))
    scale = max(1.0, float(np.max(np.abs(forward))))
    my_logger.log(logging.INFO-2, '{}: reversal defect {:.3e}'.format(system.name, defect))
    return defect <= tol * scale


def _parabolic_min(values, i):
    """Vertex of the parabola through values[i-1:i+2], as (offset in samples, value)"""
    a, b, c = values[i - 1], values[i], values[i + 1]
    denom = a - 2 * b + c
    if denom <= 0:
        return 0.0, b
    offset = 0.5 * (a - c) / denom
    return offset, b - 0.25 * (a - c) * offset


def check_reversibility(traj, tol_close=1e-2, t_horizon=None, angle_index=None):
    """
    Decide whether a single solution traces a closed curve

    Returns a Verdict: Reversible(period) after at least two aligned returns within tol_close;
    Irreversible when the state escapes, an angle winds monotonically past 4 pi, or the path
    settles onto an attractor; Undetermined otherwise.
    """
    if t_horizon is None:
        t_horizon = traj.span
    if traj.span < t_horizon * (1 - 1e-12):
        raise ValueError('Trajectory spans {} but the horizon is {}'.format(traj.span, t_horizon))
    keep = traj.t - traj.t[0] <= t_horizon * (1 + 1e-12)
    t, x = traj.t[keep], traj.x[keep]
    x0 = x[0]
    norms = np.linalg.norm(x, axis=1)
    if np.max(norms) > ESCAPE_FACTOR * max(np.linalg.norm(x0), 1.0):
        return Verdict(IRREVERSIBLE, None, 'escape')
    if angle_index is not None:
        theta = x[:, angle_index]
        steps = np.diff(theta)
        monotone = np.all(steps >= 0) or np.all(steps <= 0)
        if monotone and abs(theta[-1] - theta[0]) > 4 * np.pi:
            return Verdict(IRREVERSIBLE, None, 'unbounded angle')

    dist2 = np.sum((x - x0)**2, axis=1)
    away = np.nonzero(dist2 > tol_close**2)[0]
    returns = []
    if away.size:
        velocity = np.gradient(x, t, axis=0)
        v0 = velocity[0] / max(np.linalg.norm(velocity[0]), 1e-300)
        for i in range(max(away[0], 1), len(t) - 1):
            if dist2[i] <= dist2[i - 1] and dist2[i] < dist2[i + 1]:
                offset, d2 = _parabolic_min(dist2, i)
                if d2 > tol_close**2:
                    continue
                v = velocity[i] / max(np.linalg.norm(velocity[i]), 1e-300)
                if float(np.dot(v, v0)) > ALIGNMENT:
                    returns.append(t[i] + offset * (t[i + 1] - t[i]))
    if len(returns) >= 2:
        period = float(returns[0] - t[0])
        my_logger.log(logging.INFO-2, '{} returns, period {:.6f}'.format(len(returns), period))
        return Verdict(REVERSIBLE, period, 'closed')

    quarter = max(len(t) // 4, 2)
    head = np.linalg.norm(np.ptp(x[:quarter], axis=0))
    tail = np.linalg.norm(np.ptp(x[-quarter:], axis=0))
    if head > 0 and tail < 1e-2 * head:
        return Verdict(IRREVERSIBLE, None, 'attractor')
    return Verdict(UNDETERMINED, None, '{} returns'.format(len(returns)))


def default_parity(n_dof):
    return np.concatenate([np.ones(n_dof), -np.ones(n_dof)])


def reflection_residual(traj, t_s, parity, spline=None):
    """
    Continuous symmetry residual about t_s

    max over tau in the largest window of ||f(t_s + tau) - M f(t_s - tau)||, on a cubic spline
    of the samples, tau stepped at the trajectory step, divided by the largest state norm in the
    window (at least 1e-300) so a decayed tail cannot pass for a symmetric stretch.

    :return: (residual, window half width)
    """
    if spline is None:
        spline = CubicSpline(traj.t, traj.x, axis=0)
    half = min(t_s - traj.t[0], traj.t[-1] - t_s)
    if half <= 0:
        return np.inf, 0.0
    n = max(int(np.floor(half / traj.step)), 1)
    tau = np.linspace(0.0, half, n + 1)
    ahead, behind = spline(t_s + tau), spline(t_s - tau)
    scale = max(np.max(np.linalg.norm(ahead, axis=1)), np.max(np.linalg.norm(behind, axis=1)), 1e-300)
    diff = ahead - parity * behind
    return float(np.max(np.linalg.norm(diff, axis=1)) / scale), float(half)


def _screen(x, parity, centers):
    """Relative residual of each grid centre on SCREEN_POINTS offsets spread across its window"""
    n = x.shape[0]
    windows = np.minimum(centers, n - 1 - centers)
    frac = np.linspace(0.0, 1.0, SCREEN_POINTS)
    offsets = np.rint(windows[:, None] * frac[None, :]).astype(int)
    ahead = x[centers[:, None] + offsets]
    behind = x[centers[:, None] - offsets]
    scale = np.maximum(np.max(np.linalg.norm(ahead, axis=2), axis=1), np.max(np.linalg.norm(behind, axis=2), axis=1))
    scale = np.maximum(scale, 1e-300)
    return np.max(np.linalg.norm(ahead - parity * behind, axis=2), axis=1) / scale, scale


def refine_symmetry_center(traj, t_guess, parity, spline=None):
    """Refine a grid candidate to within a fraction of a step by bounded minimization"""
    if spline is None:
        spline = CubicSpline(traj.t, traj.x, axis=0)
    lo = max(traj.t[0], t_guess - traj.step)
    hi = min(traj.t[-1], t_guess + traj.step)
    result = minimize_scalar(lambda s: reflection_residual(traj, s, parity, spline)[0], bounds=(lo, hi),
                             method='bounded', options={'xatol': 1e-12})
    t_s = float(result.x)
    residual, half = reflection_residual(traj, t_s, parity, spline)
    guess_residual, guess_half = reflection_residual(traj, t_guess, parity, spline)
    if guess_residual < residual:
        return float(t_guess), guess_residual, guess_half
    return t_s, residual, half


def find_time_symmetry(traj, tol=1e-6, parity=None):
    """
    Find t_S with f(t_S + tau) = M f(t_S - tau) over the largest window

    Grid centres are screened cheaply, survivors are refined on a spline, and among those within
    tol the one with the largest window wins, then the smallest residual.

    :param traj: uniformly sampled Trajectory
    :param tol: acceptance tolerance on the residual
    :param parity: sign vector M, default coordinates even and momenta odd
    :return: t_S or None
    """
    n = len(traj)
    if n < 2 * MIN_SIDE_SAMPLES + 1:
        raise WindowTooShortError('Trajectory has {} samples, need {}'.format(n, 2 * MIN_SIDE_SAMPLES + 1))
    if parity is None:
        parity = default_parity(traj.n_dof)
    parity = np.asarray(parity, dtype=float)
    centers = np.arange(MIN_SIDE_SAMPLES, n - MIN_SIDE_SAMPLES)
    screened, scale = _screen(traj.x, parity, centers)
    speed = np.max(np.linalg.norm(np.diff(traj.x, axis=0), axis=1)) / traj.step
    slack = tol + 2 * traj.step * speed / scale
    passing = screened <= slack
    if not np.any(passing):
        my_logger.log(logging.INFO-2, 'No symmetry candidate, best screen {:.3e}'.format(float(np.min(screened))))
        return None

    # one representative per run of neighbouring survivors
    reps = []
    idx = np.nonzero(passing)[0]
    runs = np.split(idx, np.nonzero(np.diff(idx) > 1)[0] + 1)
    for run in runs:
        reps.append(centers[run[np.argmin(screened[run])]])

    spline = CubicSpline(traj.t, traj.x, axis=0)
    found = []
    for c in reps:
        t_s, residual, half = refine_symmetry_center(traj, traj.t[c], parity, spline)
        my_logger.debug('candidate t_S {:.10f} residual {:.3e} window {:.4f}'.format(t_s, residual, half))
        if residual <= tol:
            found.append((round(half / traj.step), -residual, t_s))
    if not found:
        return None
    found.sort(reverse=True)
    return found[0][2]


def classify_catalog(step=2e-3, horizon=25.0, tol_close=1e-2, tri_samples=64, seed=0, symmetry_tol=1e-5):
    """
    Classify the four reference systems

    :return: list of four ClassificationReports in the order a, b, c, d
    """
    tolerances = {'tol_close': tol_close, 'step': step, 'horizon': horizon, 'symmetry_tol': symmetry_tol}
    start = trajectory.make_state([1.0], [0.0])
    reports = []

    def run(system, state, t_end=horizon):
        return trajectory.integrate(system, state, t_end, step)

    def symmetric(traj):
        return find_time_symmetry(traj, symmetry_tol)

    system = trajectory.harmonic_oscillator(1.0)
    traj = run(system, start)
    verdict = check_reversibility(traj, tol_close, horizon)
    reports.append(ClassificationReport('a', check_time_reversal_invariance(system, tri_samples, seed), verdict.kind,
                                        verdict.period, symmetric(traj), tolerances))

    system = trajectory.pendulum(1.0)
    inside = run(system, trajectory.make_state([np.pi], [0.6]))
    above = run(system, trajectory.make_state([np.pi], [2.2]))
    verdicts = {'inside': check_reversibility(inside, tol_close, horizon, system.angle_index),
                'above': check_reversibility(above, tol_close, horizon, system.angle_index)}
    kinds = set(v.kind for v in verdicts.values())
    kind = kinds.pop() if len(kinds) == 1 else MIXED
    reports.append(ClassificationReport('b', check_time_reversal_invariance(system, tri_samples, seed), kind,
                                        verdicts['inside'].period if kind == REVERSIBLE else None,
                                        symmetric(inside), tolerances, verdicts))

    system = trajectory.modified_oscillator(1.0, 2.0)
    traj = run(system, start)
    verdict = check_reversibility(traj, tol_close, horizon)
    reports.append(ClassificationReport('c', check_time_reversal_invariance(system, tri_samples, seed), verdict.kind,
                                        verdict.period, symmetric(traj), tolerances))

    system = trajectory.damped_oscillator(1.0, 1.0)
    traj = run(system, start, 2 * horizon)
    verdict = check_reversibility(traj, tol_close, 2 * horizon)
    reports.append(ClassificationReport('d', check_time_reversal_invariance(system, tri_samples, seed), verdict.kind,
                                        verdict.period, symmetric(traj), tolerances))

    for report in reports:
        my_logger.info('System {}: tri={} {} period={} t_S={}'.format(report.system, report.tri, report.reversible,
                                                                        report.period, report.time_symmetric))
    return reports
