# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Spectral mean values, their weak limit and decoherence times

A state carries a diagonal density rho(w) and an off-diagonal kernel rho(w, w'); an observable
carries O(w) and O(w, w'). Kernels are either full matrices on the quadrature grid or separable,
k(w, w') = f(w) conj(f(w')), given by the factor f.
"""

import logging
from collections import namedtuple
from types import SimpleNamespace

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import linregress

from common.helper import write_csv

my_logger = logging.getLogger(__name__)

PANEL_NODES = 32
DEFAULT_NODES = 256
# largest phase w*t swept across one panel
PANEL_PHASE = 16.0
NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12
EDGE_DECAY = 1e-8
IMAG_TOL = 1e-10
FIT_WINDOW = (1e-3, 0.5)
FORMS = ['exponential', 'gaussian']
FAMILY = ['flat', 'linear', 'window']

DecayFit = namedtuple('DecayFit', ['rate', 'r_squared', 'n_points'])


class GridMismatchError(Exception):
    """State and observable live on different quadrature grids"""
    pass


class NoLowerPoleError(Exception):
    """Pole model has no pole in the lower half plane"""
    pass


class NoUpperPoleError(Exception):
    """Pole model has no pole in the upper half plane"""
    pass


class WindowEmptyError(Exception):
    """No samples of the decay curve fall in the fit window"""
    pass


class SpectralGrid:
    """
    Composite Gauss-Legendre rule on [0, omega_max]

    panels equal panels of panel_nodes nodes each.
    """
    def __init__(self, omega_max, panels, panel_nodes=PANEL_NODES):
        if not omega_max > 0:
            raise ValueError('omega_max must be positive')
        if panels < 1 or panel_nodes < 1:
            raise ValueError('Grid needs at least one panel and one node')
        self.omega_max = float(omega_max)
        self.panels = int(panels)
        self.panel_nodes = int(panel_nodes)
        x, w = leggauss(self.panel_nodes)
        edges = np.linspace(0.0, self.omega_max, self.panels + 1)
        half = np.diff(edges) / 2
        mid = edges[:-1] + half
        self.nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        self.weights = (half[:, None] * w[None, :]).ravel()

    @property
    def size(self):
        return self.nodes.size

    def same_as(self, other):
        return self is other or (self.size == other.size and np.array_equal(self.nodes, other.nodes))

    def integrate(self, values):
        return np.sum(self.weights * values)

    def to_dict(self):
        return {'omega_max': self.omega_max, 'panels': self.panels, 'panel_nodes': self.panel_nodes}


def spectral_grid(omega_max, n_nodes=DEFAULT_NODES, panel_nodes=PANEL_NODES, t_max=None):
    """
    Build a grid of about n_nodes nodes; with t_max the panel count grows until one panel
    spans a phase of at most 16 radians at |t| = t_max
    """
    panels = max(1, int(np.ceil(n_nodes / float(panel_nodes))))
    if t_max:
        panels = max(panels, int(np.ceil(omega_max * abs(t_max) / PANEL_PHASE)))
    return SpectralGrid(omega_max, panels, panel_nodes)


class _SpectralData:
    kind = 'spectral'

    def __init__(self, grid, diag, kernel=None, factor=None, name=None):
        self.grid = grid
        self.diag = np.asarray(diag, dtype=float)
        self.kernel = None if kernel is None else np.asarray(kernel, dtype=complex)
        self.factor = None if factor is None else np.asarray(factor, dtype=complex)
        self.name = name or self.kind
        if kernel is not None and factor is not None:
            raise ValueError('Give either a full kernel or a separable factor, not both')
        if self.diag.shape != grid.nodes.shape:
            raise GridMismatchError('Diagonal has {} values on a grid of {} nodes'.format(self.diag.size, grid.size))
        if self.factor is not None and self.factor.shape != grid.nodes.shape:
            raise GridMismatchError('Kernel factor has {} values on a grid of {} nodes'.format(self.factor.size, grid.size))
        if self.kernel is not None:
            if self.kernel.shape != (grid.size, grid.size):
                raise GridMismatchError('Kernel shape {} does not fit a grid of {} nodes'.format(self.kernel.shape, grid.size))
            peak = max(np.max(np.abs(self.kernel)), 1e-300)
            defect = np.max(np.abs(self.kernel - self.kernel.conj().T)) / peak
            if defect > HERMITIAN_TOL:
                raise ValueError('{} kernel is not Hermitian: defect {:.3g}'.format(self.name, defect))

    @property
    def has_kernel(self):
        return self.kernel is not None or self.factor is not None

    def full_kernel(self):
        if self.kernel is not None:
            return self.kernel
        if self.factor is not None:
            return np.outer(self.factor, self.factor.conj())
        return np.zeros((self.grid.size, self.grid.size), dtype=complex)

    def edge_ratio(self):
        """Largest kernel magnitude on the first and last node relative to the peak"""
        if self.factor is not None:
            mag = np.abs(self.factor)
            return float(max(mag[0], mag[-1]) / max(np.max(mag), 1e-300))
        if self.kernel is not None:
            mag = np.abs(self.kernel)
            edge = max(np.max(mag[0]), np.max(mag[-1]))
            return float(edge / max(np.max(mag), 1e-300))
        return 0.0

    def stripped(self):
        """Same diagonal, no kernel"""
        return type(self)(self.grid, self.diag, name=self.name)


class SpectralState(_SpectralData):
    """Spectral density: nonnegative normalized diagonal plus a Hermitian kernel that decays at the grid edges"""
    kind = 'state'

    def __init__(self, grid, diag, kernel=None, factor=None, name=None):
        super().__init__(grid, diag, kernel, factor, name)
        if np.any(self.diag < 0):
            raise ValueError('State diagonal must be nonnegative')
        mass = grid.integrate(self.diag)
        if abs(mass - 1) > NORM_TOL:
            raise ValueError('State diagonal integrates to {:.12g}, not 1'.format(mass))
        ratio = self.edge_ratio()
        if ratio > EDGE_DECAY:
            my_logger.warning('{} kernel is {:.3g} of its peak at the grid edge; truncation is not controlled'.format(self.name, ratio))


class SpectralObservable(_SpectralData):
    kind = 'observable'


PoleModel = namedtuple('PoleModel', ['poles', 'residues'])
PoleModel.__new__.__defaults__ = (None,)


def make_pole_model(poles, residues=None):
    poles = [complex(z) for z in poles]
    model = PoleModel(poles, residues)
    if not is_conjugate_symmetric(model):
        my_logger.log(logging.INFO-1, 'Pole model {} is not closed under conjugation'.format(poles))
    return model


def is_conjugate_symmetric(model, tol=1e-12):
    poles = np.asarray(model.poles, dtype=complex)
    return all(np.min(np.abs(poles - np.conj(z))) <= tol * max(1.0, abs(z)) for z in poles)


def _check_grid(state, obs):
    if not state.grid.same_as(obs.grid):
        raise GridMismatchError('State grid ({} nodes) differs from observable grid ({} nodes)'.format(
            state.grid.size, obs.grid.size))


def _diagonal_term(state, obs):
    return float(state.grid.integrate(state.diag * obs.diag))


def _kernel_terms(state, obs, times):
    """Complex kernel contraction at every time"""
    grid = state.grid
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros(times.shape, dtype=complex)
    if not (state.has_kernel and obs.has_kernel):
        return out
    if state.kernel is None and obs.kernel is None:
        amplitude = grid.weights * state.factor * obs.factor
        for i, t in enumerate(times):
            s = np.sum(amplitude * np.exp(-1j * grid.nodes * t))
            out[i] = s.real**2 + s.imag**2
        return out
    weighted = np.outer(grid.weights, grid.weights) * state.full_kernel() * obs.full_kernel()
    for i, t in enumerate(times):
        phase = np.exp(-1j * grid.nodes * t)
        out[i] = np.sum(phase[:, None] * weighted * phase.conj()[None, :])
    return out


def mean_value(state, obs, t):
    """
    Mean value of obs in state at time t (scalar or array)

    The imaginary part vanishes for Hermitian kernels; a larger one is logged as a warning.

    :raises GridMismatchError: state and obs on different grids
    """
    _check_grid(state, obs)
    scalar = np.isscalar(t)
    terms = _kernel_terms(state, obs, t)
    diagonal = _diagonal_term(state, obs)
    scale = max(1.0, abs(diagonal), float(np.max(np.abs(terms))) if terms.size else 0.0)
    imag = float(np.max(np.abs(terms.imag))) if terms.size else 0.0
    if imag > IMAG_TOL * scale:
        my_logger.warning('Mean value of {} has imaginary part {:.3g}'.format(obs.name, imag))
    values = diagonal + terms.real
    return float(values[0]) if scalar else values


def equilibrium_mean(state, obs):
    """Weak-limit mean value: the diagonal contraction only"""
    _check_grid(state, obs)
    return _diagonal_term(state, obs)


def _is_symmetric_grid(t_grid):
    t_grid = np.asarray(t_grid, dtype=float)
    scale = max(1.0, float(np.max(np.abs(t_grid))))
    return np.allclose(t_grid, -t_grid[::-1], rtol=0, atol=1e-12 * scale)


def offdiag_envelope(state, obs, t_grid):
    """
    Distance D(t) of the mean value from its weak limit over a t grid symmetric about 0

    :return: SimpleNamespace(t, mean, envelope, mirrored, twin_asymmetry, equilibrium)
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or not _is_symmetric_grid(t_grid):
        raise ValueError('Envelope needs a time grid symmetric about 0')
    means = mean_value(state, obs, t_grid)
    eq = equilibrium_mean(state, obs)
    envelope = np.abs(means - eq)
    mirrored = envelope[::-1]
    asymmetry = float(np.max(np.abs(envelope - mirrored)))
    my_logger.log(logging.INFO-1, 'Envelope of {}: D(0) {:.6g}, twin asymmetry {:.3g}'.format(
        obs.name, float(np.max(envelope)), asymmetry))
    return SimpleNamespace(t=t_grid, mean=means, envelope=envelope, mirrored=mirrored, twin_asymmetry=asymmetry,
                           equilibrium=eq)


def _nearest_pole(poles, lower):
    poles = [complex(z) for z in poles]
    side = [z for z in poles if (z.imag < 0 if lower else z.imag > 0)]
    if not side:
        return None, []
    closest = min(abs(z.imag) for z in side)
    ties = [z for z in side if abs(abs(z.imag) - closest) <= 1e-12 * max(1.0, closest)]
    ties.sort(key=lambda z: (abs(z.real), z.real))
    return ties[0], ties


def decoherence_time_from_poles(model):
    """
    Inverse imaginary part of the lower half plane pole nearest the real axis

    Ties in |Im z| go to the smallest |Re z|; all tied poles are logged.

    :raises NoLowerPoleError: the model has no decaying pole
    """
    pole, ties = _nearest_pole(model.poles, lower=True)
    if pole is None:
        raise NoLowerPoleError('No pole with negative imaginary part among {}'.format(list(model.poles)))
    if len(ties) > 1:
        my_logger.info('Poles tied for nearest to the real axis: {}; chose {}'.format(ties, pole))
    return 1.0 / abs(pole.imag)


def growth_time_from_poles(model):
    """Twin of the decoherence time from the upper half plane"""
    pole, ties = _nearest_pole(model.poles, lower=False)
    if pole is None:
        raise NoUpperPoleError('No pole with positive imaginary part among {}'.format(list(model.poles)))
    if len(ties) > 1:
        my_logger.info('Upper poles tied for nearest to the real axis: {}; chose {}'.format(ties, pole))
    return 1.0 / pole.imag


def fit_decoherence_time(t, curve, form='exponential', window=FIT_WINDOW):
    """
    Fit log D against |t| (exponential) or t^2 (gaussian) where D/D(0) lies in the window

    D(0) is the curve value at the sample nearest t = 0.

    :return: DecayFit(rate, r_squared, n_points); rate is the decay constant of the chosen form
    :raises WindowEmptyError: fewer than two samples in the window
    """
    if form not in FORMS:
        raise ValueError('Unknown decay form {}, expected one of {}'.format(form, FORMS))
    t = np.asarray(t, dtype=float)
    curve = np.asarray(curve, dtype=float)
    d0 = curve[int(np.argmin(np.abs(t)))]
    if not d0 > 0:
        raise WindowEmptyError('Curve vanishes at t = 0; nothing decays')
    ratio = curve / d0
    inside = (ratio >= window[0]) & (ratio <= window[1])
    if np.sum(inside) < 2:
        raise WindowEmptyError('{} samples with D/D(0) in [{}, {}]'.format(int(np.sum(inside)), *window))
    x = np.abs(t[inside]) if form == 'exponential' else t[inside]**2
    if np.ptp(x) == 0:
        raise WindowEmptyError('Fit window holds a single abscissa')
    fit = linregress(x, np.log(curve[inside]))
    return DecayFit(float(-fit.slope), float(fit.rvalue**2), int(np.sum(inside)))


def lorentzian_pair(gamma, t_max=20.0, center=None, panel_nodes=PANEL_NODES):
    """
    State and flat observable whose envelope decays as exp(-gamma |t|)

    The kernel factor is a unit-area Lorentzian of half width gamma/2 centred far enough from
    both grid edges for the kernel to fall below 1e-8 of its peak there.

    :return: (SpectralState, SpectralObservable)
    """
    if not gamma > 0:
        raise ValueError('gamma must be positive')
    half = gamma / 2
    center = center if center is not None else 6000 * gamma
    grid = spectral_grid(2 * center, panel_nodes=panel_nodes, t_max=t_max)
    w = grid.nodes
    factor = (half / np.pi) / ((w - center)**2 + half**2)
    return _pair(grid, factor, 'lorentzian')


def gaussian_pair(sigma, t_max=20.0, center=None, panel_nodes=PANEL_NODES):
    """State and flat observable whose envelope decays as exp(-sigma^2 t^2 / 2)"""
    if not sigma > 0:
        raise ValueError('sigma must be positive')
    width = sigma / np.sqrt(2)
    center = center if center is not None else 10 * width
    grid = spectral_grid(2 * center, panel_nodes=panel_nodes, t_max=t_max)
    w = grid.nodes
    factor = np.exp(-(w - center)**2 / (2 * width**2)) / (width * np.sqrt(2 * np.pi))
    return _pair(grid, factor, 'gaussian')


def pair_from_pole(z, t_max=20.0):
    """Lorentzian pair whose decay rate is |Im z|"""
    return lorentzian_pair(abs(complex(z).imag), t_max)


def _pair(grid, factor, name):
    diag = factor / grid.integrate(factor)
    state = SpectralState(grid, diag, factor=factor, name=name)
    return state, observable_family(grid, ['flat'])[0]


def observable_family(grid, names=None):
    """
    Smooth bounded observables for weak-limit checks

    flat has O = 1 everywhere, linear grows as w/omega_max and window is a broad Gaussian
    bump in the middle of the band.
    """
    names = FAMILY if names is None else names
    w = grid.nodes / grid.omega_max
    profiles = {'flat': np.ones_like(w), 'linear': w, 'window': np.exp(-((w - 0.5) / 0.25)**2)}
    family = []
    for name in names:
        if name not in profiles:
            raise ValueError('Unknown observable {}, expected one of {}'.format(name, list(profiles)))
        family.append(SpectralObservable(grid, profiles[name], factor=profiles[name], name=name))
    return family


def weak_limit_times(state, observables, t_grid, threshold=1e-3):
    """
    For each observable, the earliest time after which |<O>(t) - <O>*| stays below threshold,
    separately toward the future and the past

    :return: list of SimpleNamespace(name, future, past); None where the grid never settles
    """
    t_grid = np.asarray(t_grid, dtype=float)
    results = []
    for obs in observables:
        gap = np.abs(mean_value(state, obs, t_grid) - equilibrium_mean(state, obs))
        times = {}
        for label, side in [('future', t_grid >= 0), ('past', t_grid <= 0)]:
            t_side, gap_side = np.abs(t_grid[side]), gap[side]
            order = np.argsort(t_side)
            t_side, gap_side = t_side[order], gap_side[order]
            # running sup from the far end
            tail = np.maximum.accumulate(gap_side[::-1])[::-1]
            settled = np.nonzero(tail < threshold)[0]
            times[label] = float(t_side[settled[0]]) if settled.size else None
        results.append(SimpleNamespace(name=obs.name, future=times['future'], past=times['past']))
        my_logger.log(logging.INFO-1, 'Weak limit of {}: future {}, past {}'.format(obs.name, times['future'], times['past']))
    return results


ENVELOPE_COLUMNS = ['t', 'mean', 'envelope']


def export_envelope_csv(result, path, header=None):
    write_csv(path, ENVELOPE_COLUMNS, zip(result.t, result.mean, result.envelope), header)
