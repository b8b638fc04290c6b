# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Fixed step integration of finite dimensional dynamical systems

A state vector is the concatenation (q, p); a system of n degrees of freedom has dim = 2n.
Vector fields take (t, x) with x of shape (..., dim) so the same field drives single
trajectories and whole ensembles.
"""

import logging
from collections import namedtuple

import numpy as np
from scipy.integrate import solve_ivp

from common.helper import write_csv

my_logger = logging.getLogger(__name__)

PhaseState = namedtuple('PhaseState', ['q', 'p', 't'])

EVENT_TOL = 1e-10


class NonFiniteError(Exception):
    """Integration produced a non finite state"""
    def __init__(self, msg=None, last_time=None):
        self.last_time = last_time
        if msg is None:
            msg = 'State blew up after t = {}'.format(last_time)
        super().__init__(msg)


class DimensionMismatchError(Exception):
    """State length disagrees with the system dimension"""
    pass


def make_state(q, p, t=0.0):
    """Build a PhaseState from sequences, checking lengths and finiteness"""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if q.shape != p.shape:
        raise DimensionMismatchError('q has {} entries, p has {}'.format(q.size, p.size))
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p)) and np.isfinite(t)):
        raise NonFiniteError('Initial state is not finite', last_time=t)
    return PhaseState(q, p, float(t))


def state_vector(state):
    return np.concatenate([state.q, state.p])


class DynamicalSystem:
    """
    Autonomous or driven system dx/dt = F(t, x)

    Args:
        dim: length of the state vector (2 x degrees of freedom)
        vector_field: callable (t, x) -> dx/dt, broadcasting over leading axes of x
        reversal_involution: callable x -> R(x); defaults to negating the momentum block
        hamiltonian: optional callable x -> energy
        name: label used in logs and reports
        angle_index: index of a coordinate that is an angle (unbounded advance signals escape)
        event: optional switching function g(x); the field is smooth on each side of g = 0
        branch_field: callable (t, x, side) -> dx/dt on the side sign(g) = side
    """
    def __init__(self, dim, vector_field, reversal_involution=None, hamiltonian=None, name='system',
                 angle_index=None, event=None, branch_field=None):
        if dim < 2 or dim % 2:
            raise DimensionMismatchError('Dimension {} is not a positive even number'.format(dim))
        self.dim = int(dim)
        self.n_dof = self.dim // 2
        self.vector_field = vector_field
        self.parity = np.concatenate([np.ones(self.n_dof), -np.ones(self.n_dof)])
        self.reversal_involution = reversal_involution if reversal_involution is not None else self._negate_momenta
        self.hamiltonian = hamiltonian
        self.name = name
        self.angle_index = angle_index
        self.event = event
        self.branch_field = branch_field
        if (event is None) != (branch_field is None):
            raise ValueError('event and branch_field must be given together')
        self._check_involution()

    def _negate_momenta(self, x):
        return x * self.parity

    def _check_involution(self, samples=8):
        rng = np.random.default_rng(0)
        points = rng.uniform(-1.0, 1.0, size=(samples, self.dim))
        back = self.reversal_involution(self.reversal_involution(points))
        if not np.allclose(back, points, rtol=0, atol=1e-12):
            raise ValueError('Reversal map of {} is not an involution'.format(self.name))
        out = np.asarray(self.vector_field(0.0, points))
        if out.shape != points.shape:
            raise DimensionMismatchError('Vector field of {} returns shape {}, expected {}'.format(self.name, out.shape, points.shape))

    def side(self, t, x, sign=1):
        """Side of the switching surface the flow is on, resolving g = 0 by a short nudge along the flow"""
        g = self.event(x)
        if g != 0:
            return 1 if g > 0 else -1
        nudged = x + sign * 1e-9 * self.branch_field(t, x, 1)
        return 1 if self.event(nudged) > 0 else -1

    def energy(self, x):
        if self.hamiltonian is None:
            return None
        return self.hamiltonian(x)

    def __repr__(self):
        return 'DynamicalSystem({}, dim={})'.format(self.name, self.dim)


class Trajectory:
    """
    Time sampled phase space path, stored in increasing time

    A backward run keeps its initial state as start_state (the last sample) and has direction -1.
    """
    def __init__(self, t, x, step, integrator_id, n_dof=None, diagnostics=None, direction=1):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if t.ndim != 1 or x.ndim != 2 or x.shape[0] != t.size:
            raise DimensionMismatchError('Times {} and states {} do not line up'.format(t.shape, x.shape))
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError('Trajectory times must be strictly increasing')
        self.t = t
        self.x = x
        self.step = float(step)
        self.integrator_id = integrator_id
        self.n_dof = n_dof if n_dof is not None else x.shape[1] // 2
        self.diagnostics = dict(diagnostics or {})
        self.direction = direction

    def __len__(self):
        return self.t.size

    @property
    def q(self):
        return self.x[:, :self.n_dof]

    @property
    def p(self):
        return self.x[:, self.n_dof:]

    @property
    def states(self):
        return [PhaseState(row[:self.n_dof].copy(), row[self.n_dof:].copy(), float(ti)) for ti, row in zip(self.t, self.x)]

    def state(self, i):
        row = self.x[i]
        return PhaseState(row[:self.n_dof].copy(), row[self.n_dof:].copy(), float(self.t[i]))

    @property
    def start_state(self):
        return self.state(0 if self.direction > 0 else -1)

    @property
    def end_state(self):
        return self.state(-1 if self.direction > 0 else 0)

    @property
    def span(self):
        return float(self.t[-1] - self.t[0])

    def is_uniform(self, rel=1e-12):
        if len(self) < 3:
            return True
        dt = np.diff(self.t)
        return bool(np.max(np.abs(dt - self.step)) <= max(rel * abs(self.step), 64 * np.finfo(float).eps * np.max(np.abs(self.t))))


def rk4_step(field, t, x, h):
    k1 = field(t, x)
    k2 = field(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = field(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = field(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _switched_step(system, t, x, h, sign):
    """
    One RK4 step across a switching surface

    The step is taken with the field of the current side; if g changes sign, the crossing
    time is bisected to EVENT_TOL and the rest of the step uses the other side's field.
    """
    remaining = h
    for _ in range(64):
        side = system.side(t, x, sign)
        field = _branch(system, side, sign)
        trial = rk4_step(field, t, x, remaining)
        if system.event(trial) * side >= 0:
            return trial
        lo, hi = 0.0, remaining
        while hi - lo > EVENT_TOL:
            mid = 0.5 * (lo + hi)
            if system.event(rk4_step(field, t, x, mid)) * side > 0:
                lo = mid
            else:
                hi = mid
        x = rk4_step(field, t, x, hi)
        t = t + hi
        remaining = remaining - hi
        if remaining <= 0:
            return x
    raise NonFiniteError('Switching surface chatter in {}'.format(system.name), last_time=t)


def _branch(system, side, sign):
    if sign > 0:
        return lambda t, x: system.branch_field(t, x, side)
    return lambda t, x: -system.branch_field(t, x, side)


def _steps_for(span, step):
    return max(1, int(round(abs(span) / step)))


def integrate(system, initial, t_end, step, halt=None):
    """
    Integrate with classic fixed step RK4

    Backward runs (t_end < initial.t) integrate the negated field in the reversed time variable.
    A halt callback (t, x) -> bool stops the run cleanly after the current step.

    Args:
        system: DynamicalSystem
        initial: PhaseState
        t_end: final time
        step: nominal positive step; the actual step divides the span evenly
        halt: optional stop condition

    Returns:
        Trajectory in increasing time
    """
    if step <= 0:
        raise ValueError('Step must be positive, got {}'.format(step))
    if t_end == initial.t:
        raise ValueError('t_end equals the initial time {}'.format(initial.t))
    x = state_vector(initial)
    if x.size != system.dim:
        raise DimensionMismatchError('State has {} entries, {} expects {}'.format(x.size, system.name, system.dim))

    span = t_end - initial.t
    sign = 1 if span > 0 else -1
    n = _steps_for(span, step)
    h = abs(span) / n
    reverse_field = lambda s, y: -system.vector_field(initial.t - s, y)
    field = system.vector_field if sign > 0 else reverse_field

    xs = np.empty((n + 1, system.dim))
    xs[0] = x
    s = 0.0
    taken = n
    halted = None
    for i in range(n):
        if system.event is not None:
            x_new = _switched_step(system, initial.t + sign * s, x, h, sign)
        else:
            x_new = rk4_step(field, initial.t + s if sign > 0 else s, x, h)
        if not np.all(np.isfinite(x_new)):
            last = initial.t + sign * s
            my_logger.log(logging.INFO-1, '{}: non finite state after t = {}'.format(system.name, last))
            raise NonFiniteError(last_time=last)
        s = (i + 1) * h
        x = x_new
        xs[i + 1] = x
        if halt is not None and halt(initial.t + sign * s, x):
            taken = i + 1
            halted = initial.t + sign * s
            break

    xs = xs[:taken + 1]
    times = initial.t + sign * h * np.arange(taken + 1)
    if halted is None:
        times[-1] = t_end
    if sign < 0:
        times, xs = times[::-1].copy(), xs[::-1].copy()

    diagnostics = {'steps': taken}
    if halted is not None:
        diagnostics['halted_at'] = halted
    if system.hamiltonian is not None:
        energy = system.hamiltonian(xs)
        e0 = system.hamiltonian(state_vector(initial))
        scale = abs(e0) if abs(e0) > 0 else 1.0
        diagnostics['energy_drift'] = float(np.max(np.abs(energy - e0)) / scale)
    return Trajectory(times, xs, h, 'rk4', system.n_dof, diagnostics, direction=sign)


def integrate_adaptive(system, initial, t_end, step, rtol=1e-10, atol=1e-12, halt_event=None):
    """
    Adaptive Dormand-Prince 8(5,3) run sampled on the uniform grid of the given step

    :param halt_event: optional scipy style event g(t, x); the run stops where it crosses zero
    """
    if step <= 0:
        raise ValueError('Step must be positive, got {}'.format(step))
    x0 = state_vector(initial)
    if x0.size != system.dim:
        raise DimensionMismatchError('State has {} entries, {} expects {}'.format(x0.size, system.name, system.dim))
    span = t_end - initial.t
    n = _steps_for(span, step)
    t_eval = initial.t + span * np.arange(n + 1) / n
    t_eval[-1] = t_end
    events = None
    if halt_event is not None:
        halt_event.terminal = True
        events = [halt_event]
    sol = solve_ivp(system.vector_field, (initial.t, t_end), x0, method='DOP853', t_eval=t_eval,
                    rtol=rtol, atol=atol, events=events)
    if sol.status == -1:
        last = float(sol.t[-1]) if sol.t.size else initial.t
        raise NonFiniteError('Adaptive integration failed: {}'.format(sol.message), last_time=last)
    times, xs = sol.t, sol.y.T
    if not np.all(np.isfinite(xs)):
        good = np.all(np.isfinite(xs), axis=1)
        last = float(times[good][-1]) if np.any(good) else initial.t
        raise NonFiniteError(last_time=last)
    diagnostics = {'steps': int(sol.nfev), 'status': int(sol.status)}
    if sol.status == 1 and sol.t_events and len(sol.t_events[0]):
        diagnostics['halted_at'] = float(sol.t_events[0][0])
    sign = 1 if span > 0 else -1
    if sign < 0:
        times, xs = times[::-1].copy(), xs[::-1].copy()
    if system.hamiltonian is not None:
        e0 = system.hamiltonian(x0)
        scale = abs(e0) if abs(e0) > 0 else 1.0
        diagnostics['energy_drift'] = float(np.max(np.abs(system.hamiltonian(xs) - e0)) / scale)
    return Trajectory(times, xs, abs(span) / n, 'dop853', system.n_dof, diagnostics, direction=sign)


def integrate_bidirectional(system, initial, t_start, t_end, step, halt=None):
    """
    Integrate back to t_start and forward to t_end from the same state and join the halves

    The shared initial sample appears once.
    """
    if not t_start < initial.t < t_end:
        raise ValueError('Need t_start < initial.t < t_end, got {} {} {}'.format(t_start, initial.t, t_end))
    back = integrate(system, initial, t_start, step, halt=halt)
    fwd = integrate(system, initial, t_end, step, halt=halt)
    t = np.concatenate([back.t, fwd.t[1:]])
    x = np.concatenate([back.x, fwd.x[1:]])
    diagnostics = {'steps': back.diagnostics['steps'] + fwd.diagnostics['steps'], 'center': initial.t}
    for key in ['energy_drift']:
        if key in fwd.diagnostics:
            diagnostics[key] = max(back.diagnostics[key], fwd.diagnostics[key])
    for name, part in [('halted_before', back), ('halted_after', fwd)]:
        if 'halted_at' in part.diagnostics:
            diagnostics[name] = part.diagnostics['halted_at']
    return Trajectory(t, x, fwd.step, 'rk4', system.n_dof, diagnostics, direction=1)


def propagate_ensemble(field, x0, h, n_steps, t0=0.0, stop=None, keep_history=True):
    """
    Advance a batch of states with RK4, freezing members that fail or hit a stop condition

    :param field: callable (t, x) with x of shape (M, dim)
    :param x0: array (M, dim)
    :param h: signed step
    :param n_steps: number of steps
    :param stop: optional callable x -> boolean mask of members to freeze
    :param keep_history: when False only the final states are returned (NaN for stopped members)
    :return: (history of shape (n_steps + 1, M, dim) with NaN after a member stops, alive mask)
    """
    x = np.array(x0, dtype=float)
    history = np.full((n_steps + 1,) + x.shape, np.nan) if keep_history else None
    alive = np.all(np.isfinite(x), axis=1)
    if keep_history:
        history[0] = x
    for i in range(n_steps):
        if not np.any(alive):
            break
        nxt = x.copy()
        with np.errstate(all='ignore'):
            nxt[alive] = rk4_step(field, t0 + i * h, x[alive], h)
        ok = np.all(np.isfinite(nxt), axis=1)
        if stop is not None:
            with np.errstate(all='ignore'):
                ok &= ~stop(nxt)
        alive &= ok
        x = nxt
        if keep_history:
            history[i + 1][alive] = x[alive]
    if not keep_history:
        x[~alive] = np.nan
        return x, alive
    return history, alive


def time_reverse(trajectory, system):
    """
    Reflect the time grid and apply the reversal map to every state

    t -> t_first + t_last - t, so the grid maps onto itself and reversing twice gives back the input.
    """
    if len(trajectory) == 0:
        raise ValueError('Cannot reverse an empty trajectory')
    t = trajectory.t
    times = (t[0] + t[-1]) - t[::-1]
    states = system.reversal_involution(trajectory.x[::-1])
    diagnostics = dict(trajectory.diagnostics)
    diagnostics['reversed'] = not trajectory.diagnostics.get('reversed', False)
    return Trajectory(times, states, trajectory.step, trajectory.integrator_id, trajectory.n_dof, diagnostics,
                      direction=-trajectory.direction)


def field_residual(trajectory, system):
    """Max distance between the finite difference derivative and the vector field over interior samples"""
    if len(trajectory) < 3:
        raise ValueError('Need at least 3 samples for a residual')
    deriv = np.gradient(trajectory.x, trajectory.t, axis=0, edge_order=2)
    if system.event is not None:
        field = np.array([system.branch_field(ti, xi, system.side(ti, xi)) for ti, xi in zip(trajectory.t, trajectory.x)])
    else:
        field = np.asarray(system.vector_field(trajectory.t[:, None], trajectory.x))
    diff = np.linalg.norm(deriv - field, axis=1)
    return float(np.max(diff[1:-1]))


def export_csv(trajectory, path, header=None):
    """Write t,q0..,p0.. rows with 17 significant digits"""
    n = trajectory.n_dof
    columns = ['t'] + ['q{}'.format(i) for i in range(n)] + ['p{}'.format(i) for i in range(n)]
    rows = (np.concatenate([[ti], xi]) for ti, xi in zip(trajectory.t, trajectory.x))
    write_csv(path, columns, rows, header)


# reference systems

def harmonic_oscillator(K=1.0):
    def field(t, x):
        return np.stack([x[..., 1], -K**2 * x[..., 0]], axis=-1)

    def energy(x):
        return 0.5 * x[..., 1]**2 + 0.5 * K**2 * x[..., 0]**2
    return DynamicalSystem(2, field, hamiltonian=energy, name='harmonic_oscillator')


def pendulum(K=1.0):
    """H = p^2/2 + (K^2/2) cos(theta); the separatrix sits at energy K^2/2"""
    def field(t, x):
        return np.stack([x[..., 1], 0.5 * K**2 * np.sin(x[..., 0])], axis=-1)

    def energy(x):
        return 0.5 * x[..., 1]**2 + 0.5 * K**2 * np.cos(x[..., 0])
    system = DynamicalSystem(2, field, hamiltonian=energy, name='pendulum', angle_index=0)
    system.separatrix_energy = 0.5 * K**2
    return system


def modified_oscillator(K_plus=1.0, K_minus=2.0):
    """
    Oscillator whose stiffness switches with the sign of p

    Each half plane conserves its own quadratic energy, so no single hamiltonian is attached.
    """
    def branch(t, x, side):
        K = K_plus if side > 0 else K_minus
        return np.stack([x[..., 1], -K**2 * x[..., 0]], axis=-1)

    def field(t, x):
        K = np.where(x[..., 1] > 0, K_plus, K_minus)
        return np.stack([x[..., 1], -K**2 * x[..., 0]], axis=-1)
    return DynamicalSystem(2, field, name='modified_oscillator',
                           event=lambda x: x[..., 1], branch_field=branch)


def damped_oscillator(K=1.0, A=1.0):
    def field(t, x):
        return np.stack([x[..., 1], -K**2 * x[..., 0] - A**2 * x[..., 1]], axis=-1)
    return DynamicalSystem(2, field, name='damped_oscillator')
