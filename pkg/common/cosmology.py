# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
FRW models with a minimally coupled scalar field

Units have kappa = 8 pi G / 3. The state vector is (a, phi, a_dot, phi_dot), so the coordinate
block is (a, phi) and the momentum block is (a_dot, phi_dot):

    a_dot^2 = (kappa rho + Lambda / 3) a^2 - k,    rho = phi_dot^2 / 2 + V(phi)
    a_ddot = a (kappa (V - phi_dot^2) + Lambda / 3)
    phi_ddot = -3 (a_dot / a) phi_dot - V'(phi)
"""

import logging
from collections import namedtuple
from types import SimpleNamespace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar
from scipy.stats import linregress

import common.trajectory as trajectory
import common.symmetry as symmetry
from common.helper import derive_rng, map_chunks, chunk_bounds, write_csv

my_logger = logging.getLogger(__name__)

CosmoState = namedtuple('CosmoState', ['a', 'a_dot', 'phi', 'phi_dot', 't'])
RootResult = namedtuple('RootResult', ['a', 'multiplicity'])

EVEN_PARITY = np.array([1.0, 1.0, -1.0, -1.0])
ODD_PARITY = np.array([1.0, -1.0, -1.0, 1.0])
PARITIES = {'even': EVEN_PARITY, 'odd': ODD_PARITY}

DRIFT_LIMIT = 1e-5
START_LIMIT = 1e-8
SINGULAR_FRACTION = 1e-6
SINGULAR_STEPS = 100
ROOT_MERGE = 1e-6


class SingularStateError(Exception):
    """Scale factor is zero"""
    pass


class NoPhysicalRootError(Exception):
    """No positive scale factor satisfies the constraint"""
    pass


class ConstraintDriftError(Exception):
    """Hamiltonian constraint residual exceeded its limit"""
    def __init__(self, msg=None, time=None, residual=None):
        self.time = time
        self.residual = residual
        super().__init__(msg or 'Constraint residual {:.3e} at t = {}'.format(residual, time))


class FRWModel:
    """
    Closed, flat or open FRW universe with one scalar field

    :param k: curvature, one of -1, 0, 1
    :param m: field mass for the default potential m^2 phi^2 / 2
    :param kappa: 8 pi G / 3
    :param Lambda: cosmological constant
    :param potential: optional V(phi) replacing the default
    :param potential_prime: V'(phi); a central difference is used if omitted
    """
    def __init__(self, k=1, m=1.0, kappa=1.0, Lambda=0.0, potential=None, potential_prime=None, name=None):
        if k not in [-1, 0, 1]:
            raise ValueError('Curvature must be -1, 0 or 1, got {}'.format(k))
        if not kappa > 0:
            raise ValueError('kappa must be positive, got {}'.format(kappa))
        self.k = int(k)
        self.m = float(m)
        self.kappa = float(kappa)
        self.Lambda = float(Lambda)
        self._potential = potential
        self._potential_prime = potential_prime
        if not np.isfinite(self.V(0.0)):
            raise ValueError('Potential is not finite at phi = 0')
        self.name = name or 'k={} m={} Lambda={}'.format(self.k, self.m, self.Lambda)

    def V(self, phi):
        if self._potential is None:
            return 0.5 * self.m**2 * np.asarray(phi)**2
        return self._potential(phi)

    def dV(self, phi):
        if self._potential is None:
            return self.m**2 * np.asarray(phi)
        if self._potential_prime is not None:
            return self._potential_prime(phi)
        h = 1e-6 * np.maximum(1.0, np.abs(phi))
        return (self._potential(phi + h) - self._potential(phi - h)) / (2 * h)

    @classmethod
    def constant_potential(cls, V0, k=0, kappa=1.0):
        """Flat potential V = V0; with k = 0 the expansion is de Sitter with H^2 = kappa V0"""
        return cls(k=k, m=0.0, kappa=kappa, potential=lambda phi: V0 + 0.0 * np.asarray(phi),
                   potential_prime=lambda phi: 0.0 * np.asarray(phi), name='V={} k={}'.format(V0, k))

    def to_dict(self):
        return {'k': self.k, 'm': self.m, 'kappa': self.kappa, 'Lambda': self.Lambda, 'name': self.name}

    def __repr__(self):
        return 'FRWModel({})'.format(self.name)


def make_cosmo_state(a, a_dot, phi, phi_dot, t=0.0):
    values = [a, a_dot, phi, phi_dot, t]
    if not all(np.isfinite(v) for v in values):
        raise trajectory.NonFiniteError('Cosmology state is not finite', last_time=t)
    if a < 0:
        raise ValueError('Scale factor must be nonnegative, got {}'.format(a))
    return CosmoState(float(a), float(a_dot), float(phi), float(phi_dot), float(t))


def to_phase_state(state):
    return trajectory.PhaseState(np.array([state.a, state.phi]), np.array([state.a_dot, state.phi_dot]), state.t)


def from_vector(x, t=0.0):
    return CosmoState(float(x[0]), float(x[2]), float(x[1]), float(x[3]), float(t))


def _density(x, model):
    return 0.5 * x[..., 3]**2 + model.V(x[..., 1])


def residuals(x, model):
    """Normalized constraint residual of state vectors (..., 4)"""
    a, a_dot = x[..., 0], x[..., 2]
    source = (model.kappa * _density(x, model) + model.Lambda / 3.0) * a**2
    raw = a_dot**2 - source + model.k
    scale = np.maximum(np.maximum(a_dot**2, abs(model.k)), np.abs(source))
    with np.errstate(invalid='ignore', divide='ignore'):
        out = np.where(scale > 0, np.abs(raw) / np.where(scale > 0, scale, 1.0), 0.0)
    return out


def constraint_residual(state, model):
    """
    Dimensionless constraint residual |a_dot^2 - (kappa rho + Lambda/3) a^2 + k| / max(a_dot^2, |k|, |kappa rho + Lambda/3| a^2)

    :raises SingularStateError: when a = 0
    """
    if state.a == 0:
        raise SingularStateError('Scale factor is zero at t = {}'.format(state.t))
    x = np.array([state.a, state.phi, state.a_dot, state.phi_dot])
    return float(residuals(x, model))


def solve_constraint_for_a(a_dot, phi, phi_dot, model):
    """
    Positive a with a_dot^2 + k = (kappa rho + Lambda / 3) a^2

    The constraint is even in a, so its roots are +a and -a. They merge into a double root at a = 0,
    and a positive root within ROOT_MERGE of that scale is reported with multiplicity 2.

    :return: RootResult(a, multiplicity)
    """
    D = model.kappa * (0.5 * phi_dot**2 + float(model.V(phi))) + model.Lambda / 3.0
    N = a_dot**2 + model.k
    if D == 0:
        raise NoPhysicalRootError('Constraint is independent of a for ({}, {}, {})'.format(a_dot, phi, phi_dot))
    if N == 0 or N / D < 0:
        raise NoPhysicalRootError('No positive scale factor for ({}, {}, {})'.format(a_dot, phi, phi_dot))
    a = float(np.sqrt(N / D))
    scale = np.sqrt((a_dot**2 + abs(model.k)) / abs(D))
    multiplicity = 2 if a <= ROOT_MERGE * scale else 1
    return RootResult(a, multiplicity)


def solve_constraint_for_phi_dot(a, a_dot, phi, model, sign=1.0):
    """phi_dot on the constraint surface for given (a, a_dot, phi), with the requested sign"""
    if a <= 0:
        raise SingularStateError('Scale factor must be positive')
    kinetic = 2.0 * (((a_dot**2 + model.k) / a**2 - model.Lambda / 3.0) / model.kappa - float(model.V(phi)))
    if kinetic < 0:
        raise NoPhysicalRootError('Negative kinetic energy {} required'.format(kinetic))
    return float(np.copysign(np.sqrt(kinetic), sign))


def cosmo_system(model):
    def field(t, x):
        a, phi, a_dot, phi_dot = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
        a_ddot = a * (model.kappa * (model.V(phi) - phi_dot**2) + model.Lambda / 3.0)
        phi_ddot = -3.0 * (a_dot / a) * phi_dot - model.dV(phi)
        return np.stack([a_dot, phi_dot, a_ddot, phi_ddot], axis=-1)
    return trajectory.DynamicalSystem(4, field, name='frw {}'.format(model.name))


def accelerations(x, model):
    """a_ddot from the equations of motion for state vectors (..., 4)"""
    return x[..., 0] * (model.kappa * (model.V(x[..., 1]) - x[..., 3]**2) + model.Lambda / 3.0)


class _Monitor:
    """Halt callback: stops at the singularity, raises on constraint drift"""
    def __init__(self, model, step, a0):
        self.model = model
        self.step = step
        self.a_max = a0
        self.worst = 0.0
        self.singular = None

    def __call__(self, t, x):
        a, a_dot = x[0], x[2]
        self.a_max = max(self.a_max, a)
        if a < SINGULAR_FRACTION * self.a_max or (a_dot != 0 and a / abs(a_dot) < SINGULAR_STEPS * self.step):
            self.singular = (t, a)
            return True
        residual = float(residuals(x, self.model))
        self.worst = max(self.worst, residual)
        if residual > DRIFT_LIMIT:
            raise ConstraintDriftError(time=t, residual=residual)
        return False


def evolve_cosmo(state, model, t_end, step=1e-3, t_start=None):
    """
    Evolve an FRW state, monitoring the constraint every step

    The run halts cleanly when a falls below 1e-6 of its maximum so far or the expansion time
    a/|a_dot| drops below 100 steps; the halt is recorded in diagnostics['singular_end'].
    Passing t_start (< state.t < t_end) evolves in both directions from the same state.

    :raises ConstraintDriftError: residual above 1e-5, or the initial state off the constraint
    """
    start = constraint_residual(state, model)
    if start > START_LIMIT:
        raise ConstraintDriftError('Initial residual {:.3e} exceeds {}'.format(start, START_LIMIT), time=state.t, residual=start)
    system = cosmo_system(model)
    initial = to_phase_state(state)
    monitors = []

    def run(target):
        monitor = _Monitor(model, step, state.a)
        monitors.append(monitor)
        return trajectory.integrate(system, initial, target, step, halt=monitor)

    if t_start is None:
        traj = run(t_end)
    else:
        if not t_start < state.t < t_end:
            raise ValueError('Need t_start < t < t_end')
        back, fwd = run(t_start), run(t_end)
        traj = trajectory.Trajectory(np.concatenate([back.t, fwd.t[1:]]), np.concatenate([back.x, fwd.x[1:]]),
                                     fwd.step, 'rk4', 2, {'steps': back.diagnostics['steps'] + fwd.diagnostics['steps']})
    res = residuals(traj.x, model)
    traj.diagnostics['residual'] = res
    traj.diagnostics['max_residual'] = float(np.max(res))
    traj.diagnostics['model'] = model.to_dict()
    ends = [m.singular for m in monitors if m.singular is not None]
    if ends:
        traj.diagnostics['singular_end'] = ends
        for t, a in ends:
            my_logger.warning('Singular end at t = {:.6f} (a = {:.3e})'.format(t, a))
    my_logger.log(logging.INFO-1, 'evolve_cosmo: {} samples, max residual {:.3e}'.format(len(traj), traj.diagnostics['max_residual']))
    return traj


def export_cosmo_csv(traj, path, header=None):
    """Columns t,a,adot,phi,phidot,residual"""
    res = traj.diagnostics.get('residual')
    rows = ([t, x[0], x[2], x[1], x[3], r] for t, x, r in zip(traj.t, traj.x, res))
    write_csv(path, ['t', 'a', 'adot', 'phi', 'phidot', 'residual'], rows, header)


def _crossings(values, t):
    """Times where values crosses or touches zero, linear interpolated, deduplicated"""
    found = []
    for i in range(len(values) - 1):
        v0, v1 = values[i], values[i + 1]
        if v0 == 0:
            found.append(t[i])
        elif v0 * v1 < 0:
            found.append(t[i] - v0 * (t[i + 1] - t[i]) / (v1 - v0))
    if values[-1] == 0:
        found.append(t[-1])
    deduped = []
    for c in found:
        if not deduped or c - deduped[-1] > 2 * (t[1] - t[0]):
            deduped.append(c)
    return deduped


def detect_cosmo_symmetry(traj, tol=1e-4, axis_tol=None):
    """
    Find a symmetry centre where the solution passes through a symmetry axis

    Candidates are zeros of a_dot with phi_dot = 0 (even) or phi = 0 (odd) within axis_tol;
    each is refined and confirmed with the full reflection residual.

    :return: (t_S, 'even' | 'odd') or None
    """
    if axis_tol is None:
        axis_tol = tol
    spline = CubicSpline(traj.t, traj.x, axis=0)
    margin = symmetry.MIN_SIDE_SAMPLES * traj.step
    best = None
    for t_c in _crossings(traj.x[:, 2], traj.t):
        if t_c - traj.t[0] < margin or traj.t[-1] - t_c < margin:
            continue
        a, phi, a_dot, phi_dot = spline(t_c)
        scale = max(1.0, abs(phi), abs(phi_dot))
        for parity_name, coordinate in [('even', phi_dot), ('odd', phi)]:
            if abs(coordinate) > axis_tol * scale:
                continue
            t_s, residual, half = symmetry.refine_symmetry_center(traj, t_c, PARITIES[parity_name], spline)
            my_logger.debug('axis candidate {} at {:.8f}: residual {:.3e}'.format(parity_name, t_s, residual))
            if residual <= tol and (best is None or half > best[2]):
                best = (t_s, parity_name, half)
    if best is None:
        return None
    return best[0], best[1]


def frozen_field_rate(model, phi):
    """Squared expansion rate g(a) = (kappa V(phi) + Lambda/3) a^2 - k with the field held at phi"""
    D = model.kappa * float(model.V(phi)) + model.Lambda / 3.0
    return lambda a: D * np.asarray(a)**2 - model.k


def pure_frw_turning_symmetry(rate_squared, a_bounds=(1e-3, 10.0), rate_squared_prime=None, t_half=None,
                              step=1e-3, grid=4096):
    """
    Check that a turning point of a_dot^2 = g(a) is a symmetry centre

    A simple root a_S of g is integrated forward and backward from (a_S, 0) with
    a_ddot = g'(a)/2 and the two halves compared. Double roots are reported as non-generic;
    a g without roots gives a monotone radius.

    :return: SimpleNamespace with status in {symmetric, asymmetric, non_generic, no_turning_point}
    """
    lo, hi = a_bounds
    a_grid = np.linspace(lo, hi, grid)
    g = np.array([float(rate_squared(a)) for a in a_grid])
    if rate_squared_prime is None:
        def rate_squared_prime(a):
            h = 1e-6 * max(abs(a), 1e-3)
            return (rate_squared(a + h) - rate_squared(a - h)) / (2 * h)

    scale = max(np.max(np.abs(g)), 1e-300)
    roots, degenerate = [], []
    for i in range(grid - 1):
        if g[i] == 0 or g[i] * g[i + 1] < 0:
            roots.append(a_grid[i] if g[i] == 0 else brentq(rate_squared, a_grid[i], a_grid[i + 1], xtol=1e-14))
    for i in range(1, grid - 1):
        if abs(g[i]) <= abs(g[i - 1]) and abs(g[i]) < abs(g[i + 1]) and g[i - 1] * g[i + 1] > 0:
            found = minimize_scalar(lambda a: abs(rate_squared(a)), bounds=(a_grid[i - 1], a_grid[i + 1]), method='bounded',
                                    options={'xatol': 1e-12})
            if abs(rate_squared(found.x)) <= 1e-10 * scale:
                degenerate.append(float(found.x))

    report = SimpleNamespace(status=None, a_S=None, kind=None, mirror_residual=None, constraint_residual=None,
                             trajectory=None, roots=roots, degenerate_roots=degenerate)
    simple = [r for r in roots if abs(rate_squared_prime(r)) > 1e-8 * scale / max(hi - lo, 1e-300)]
    if not simple:
        if degenerate or roots:
            report.status = 'non_generic'
            report.a_S = (degenerate or roots)[0]
            my_logger.warning('Turning point at a = {:.6g} is a double root of the rate'.format(report.a_S))
        else:
            report.status = 'no_turning_point'
            report.kind = 'monotone'
        return report

    a_S = float(simple[0])
    slope = float(rate_squared_prime(a_S))
    report.a_S = a_S
    report.kind = 'maximum' if slope < 0 else 'minimum'

    def field(t, x):
        return np.stack([x[..., 1], 0.5 * np.vectorize(rate_squared_prime)(x[..., 0])], axis=-1)
    system = trajectory.DynamicalSystem(2, field, name='radius only')
    if t_half is None:
        # time for the radius to move by a fraction of a_S from rest: a'' ~ g'/2
        t_half = 2.0 * np.sqrt(2.0 * 0.5 * a_S / max(abs(0.5 * slope), 1e-300))
    halt = lambda t, x: x[0] < 1e-3 * a_S or x[0] > hi
    start = trajectory.make_state([a_S], [0.0])
    fwd = trajectory.integrate(system, start, t_half, step, halt=halt)
    back = trajectory.integrate(system, start, -t_half, step, halt=halt)
    n = min(len(fwd), len(back))
    ahead = fwd.x[:n]
    behind = back.x[::-1][:n]
    mirror = float(np.max(np.abs(ahead[:, 0] - behind[:, 0])) / a_S)
    joined = trajectory.Trajectory(np.concatenate([back.t, fwd.t[1:]]), np.concatenate([back.x, fwd.x[1:]]), fwd.step, 'rk4', 1)
    drift = np.abs(joined.x[:, 1]**2 - np.array([float(rate_squared(a)) for a in joined.x[:, 0]])) / scale
    report.mirror_residual = mirror
    report.constraint_residual = float(np.max(drift))
    report.trajectory = joined
    report.status = 'symmetric' if mirror <= 1e-8 else 'asymmetric'
    my_logger.log(logging.INFO-1, 'Turning point a_S = {:.8g} ({}), mirror residual {:.3e}'.format(a_S, report.kind, mirror))
    return report


def _big_bang_sample(model, rng, delta, perturbation):
    """One finite time divergence exponent per e-fold of a toward the singularity"""
    phi = rng.uniform(-1.0, 1.0)
    a_dot = rng.uniform(1.0, 10.0)
    sign = 1.0 if rng.uniform() < 0.5 else -1.0
    phi_dot = solve_constraint_for_phi_dot(delta, a_dot, phi, model, sign)
    ref = np.array([delta, phi, a_dot, phi_dot])
    phi_p = phi * (1 + perturbation)
    a_dot_p = a_dot * (1 + perturbation)
    other = np.array([delta, phi_p, a_dot_p, solve_constraint_for_phi_dot(delta, a_dot_p, phi_p, model, sign)])
    system = cosmo_system(model)

    def shrunk(t, x):
        return x[0] - delta / np.e
    shrunk.terminal = True
    horizon = -10.0 * delta / a_dot
    sol = solve_ivp(system.vector_field, (0.0, horizon), ref, method='DOP853', rtol=1e-11, atol=1e-14, events=shrunk)
    if not sol.t_events[0].size:
        return np.nan
    T = float(sol.t_events[0][0])
    end_ref = sol.y_events[0][0]
    sol_p = solve_ivp(system.vector_field, (0.0, T), other, method='DOP853', rtol=1e-11, atol=1e-14)
    if not sol_p.success:
        return np.nan
    end_p = sol_p.y[:, -1]

    def logs(x):
        return np.array([np.log(x[0]), np.log(abs(x[2])), x[1], np.log(abs(x[3]))])
    d0 = np.linalg.norm(logs(ref) - logs(other))
    dT = np.linalg.norm(logs(end_ref) - logs(end_p))
    if d0 == 0:
        return 0.0
    efolds = np.log(delta / end_ref[0])
    return float(np.log(dT / d0) / efolds)


def big_bang_surface_instability(model, n_samples=100, seed=0, delta=1e-3, perturbation=None, threads=1, chunk=25):
    """
    Divergence of neighbours of near singular states

    States with a = delta, phi in [-1, 1], a_dot in [1, 10] and phi_dot from the constraint
    are paired with a copy whose phi and a_dot are scaled by (1 + perturbation); both are
    integrated toward the singularity until a shrinks by e. The exponent is the growth of the
    log coordinate separation per e-fold of a.

    :return: SimpleNamespace(fraction_positive, exponents, median, n)
    """
    if not delta > 0:
        raise ValueError('delta must be positive')
    if perturbation is None:
        perturbation = delta

    def work(index, start, stop):
        return [_big_bang_sample(model, derive_rng(seed, 'big_bang', i), delta, perturbation) for i in range(start, stop)]

    exponents = np.array([e for part in map_chunks(work, chunk_bounds(n_samples, chunk), threads) for e in part])
    valid = exponents[np.isfinite(exponents)]
    if valid.size < exponents.size:
        my_logger.warning('{} of {} samples did not reach the shrink event'.format(exponents.size - valid.size, exponents.size))
    fraction = float(np.mean(valid > 0)) if valid.size else 0.0
    median = float(np.median(valid)) if valid.size else np.nan
    my_logger.info('Big Bang surface: {:.3f} of {} samples diverge, median exponent {:.4f}'.format(fraction, valid.size, median))
    return SimpleNamespace(fraction_positive=fraction, exponents=exponents, median=median, n=int(valid.size))


def _epochs(mask, t):
    """Contiguous (start, stop) time intervals where mask holds"""
    out = []
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return out
    for run in np.split(idx, np.nonzero(np.diff(idx) > 1)[0] + 1):
        out.append((float(t[run[0]]), float(t[run[-1]])))
    return out


def lyapunov_variable(traj, model=None, tol=1e-9):
    """
    L = -a_dot along a run

    The verdict is whether L is nondecreasing wherever a_ddot <= 0; accelerating epochs
    are listed separately, and when there are no decelerating samples no verdict is given.
    """
    t = traj.t
    L = -traj.x[:, 2]
    if model is not None:
        a_ddot = accelerations(traj.x, model)
    else:
        a_ddot = np.gradient(traj.x[:, 2], t, edge_order=2)
    decel = a_ddot <= tol * max(1.0, float(np.max(np.abs(a_ddot))))
    premise = bool(np.all(decel))
    steps = np.diff(L)
    both = decel[:-1] & decel[1:]
    scale = max(1.0, float(np.max(np.abs(L))))
    monotone = bool(np.all(steps[both] >= -tol * scale)) if np.any(both) else None
    crossings = _crossings(traj.x[:, 2], t)
    report = SimpleNamespace(t=t, L=L, a_ddot=a_ddot, premise_holds=premise, monotone=monotone,
                             accelerating_epochs=_epochs(~decel, t), zero_crossings=crossings)
    if not premise:
        my_logger.log(logging.INFO-1, 'Lyapunov premise a_ddot <= 0 fails on {} epochs'.format(len(report.accelerating_epochs)))
    return report


def stress_energy(state, model, boost_rapidity=0.0):
    """
    Stress energy of the homogeneous field in an orthonormal frame boosted along x

    The mixed tensor T^mu_nu is diagonalized; the eigenvector with negative norm under
    eta = diag(-1, 1, 1, 1) carries s0 and the others carry s1..s3.

    :return: SimpleNamespace(rho, P, s0, si, tensor)
    """
    rho = 0.5 * state.phi_dot**2 + float(model.V(state.phi))
    P = 0.5 * state.phi_dot**2 - float(model.V(state.phi))
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    ch, sh = np.cosh(boost_rapidity), np.sinh(boost_rapidity)
    boost = np.eye(4)
    boost[0, 0] = boost[1, 1] = ch
    boost[0, 1] = boost[1, 0] = sh
    upper = boost @ np.diag([rho, P, P, P]) @ boost.T
    mixed = upper @ eta
    values, vectors = np.linalg.eig(mixed)
    values = values.real
    spread = np.ptp(values)
    if spread <= 1e-12 * max(np.max(np.abs(values)), 1e-300):
        s0 = -float(np.mean(values))
        si = [float(np.mean(values))] * 3
    else:
        vectors = vectors.real
        norms = np.einsum('im,ij,jm->m', vectors, eta, vectors) / np.sum(vectors**2, axis=0)
        timelike = int(np.argmin(norms))
        s0 = -float(values[timelike])
        si = [float(v) for i, v in enumerate(values) if i != timelike]
    return SimpleNamespace(rho=rho, P=P, s0=s0, si=si, tensor=mixed)


def dominant_energy_check(state, model, boost_rapidity=0.0, rel_tol=1e-9):
    """
    Dominant energy condition for the scalar field, by two routes

    Direct: rho >= |P|. Type I: s0 >= 0 and |s_i| <= s0 from the eigen decomposition.

    :return: SimpleNamespace(holds, s0, si, margin, type_i_holds)
    """
    tensor = stress_energy(state, model, boost_rapidity)
    scale = max(abs(tensor.rho), abs(tensor.P), 1e-300)
    margin = tensor.rho - abs(tensor.P)
    holds = bool(tensor.rho >= -rel_tol * scale and margin >= -rel_tol * scale)
    type_i = bool(tensor.s0 >= -rel_tol * scale and all(abs(s) <= tensor.s0 + rel_tol * scale for s in tensor.si))
    return SimpleNamespace(holds=holds, s0=tensor.s0, si=tensor.si, margin=float(margin), type_i_holds=type_i,
                           rho=tensor.rho, P=tensor.P)


def dominant_energy_sweep(traj, model):
    """DEC at every state of a run; returns (all hold, smallest margin, disagreements between routes)"""
    holds, margins, disagreements = True, [], 0
    for t, x in zip(traj.t, traj.x):
        report = dominant_energy_check(from_vector(x, t), model)
        holds = holds and report.holds
        margins.append(report.margin)
        disagreements += int(report.holds != report.type_i_holds)
    return holds, float(np.min(margins)), disagreements


EXPANSION_LAWS = [(1.0 / 3.0, 'stiff'), (0.5, 'radiation'), (2.0 / 3.0, 'matter')]


def fit_expansion_law(traj, model=None):
    """
    Classify the growth of the radius over the expanding part of a run

    The deceleration parameter q = -a a_ddot / a_dot^2 separates exponential growth (q = -1)
    from power laws a ~ (t - t_BB)^n with n = 1/(1+q). Exponentials are fitted as log a against t,
    power laws as log a against log(t - t_BB) with t_BB = t - n a / a_dot.

    :return: SimpleNamespace(law, exponent, rate, r_squared, deceleration)
    """
    t, a, a_dot = traj.t, traj.x[:, 0], traj.x[:, 2]
    keep = a_dot > 0
    if np.sum(keep) < 8:
        raise ValueError('Run has fewer than 8 expanding samples')
    t, a, a_dot = t[keep], a[keep], a_dot[keep]
    if model is not None:
        a_ddot = accelerations(traj.x[keep], model)
    else:
        a_ddot = np.gradient(a_dot, t, edge_order=2)
    q = float(np.median(-a * a_ddot / a_dot**2))
    result = SimpleNamespace(law=None, exponent=None, rate=None, r_squared=None, deceleration=q)
    if abs(q + 1.0) < 1e-3:
        fit = linregress(t, np.log(a))
        result.law, result.rate, result.r_squared = 'exponential', float(fit.slope), float(fit.rvalue**2)
        return result
    if q <= -1.0:
        result.law = 'super-exponential'
        return result
    n = 1.0 / (1.0 + q)
    t_bb = float(np.median(t - n * a / a_dot))
    fit = linregress(np.log(t - t_bb), np.log(a))
    result.exponent, result.r_squared = float(fit.slope), float(fit.rvalue**2)
    result.law = 'power'
    for value, label in EXPANSION_LAWS:
        if abs(result.exponent - value) <= 0.02 * value:
            result.law = label
    return result
