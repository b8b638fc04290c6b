# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Classical limit of energy diagonal states on a (q, p) lattice

Shells are Gaussians in energy around a level set of the Hamiltonian; mixtures weight shells by
probabilities over energies; transport advects a density along Hamilton's equations and
re-bins it with cloud-in-cell deposition. One lattice cell has area dq*dp, the model's hbar.
"""

import logging
from types import SimpleNamespace

import numpy as np

import common.trajectory as trajectory
from common.helper import chunk_bounds, map_chunks, write_csv

my_logger = logging.getLogger(__name__)

MASS_TOL = 1e-6
SHELL_WIDTHS = 3.0
RESOLUTION_FACTOR = 2.0
ESCAPE_TOL = 1e-12
WEIGHT_TOL = 1e-10
SUBSAMPLE = 2
HAMILTONIANS = ['sho', 'pendulum']


class EmptyShellError(Exception):
    """Requested energy is not attained on the grid"""
    pass


class ShellUnderResolvedError(Exception):
    """Smoothing width is too small for the grid spacing across the shell"""
    pass


class WeightMismatchError(Exception):
    """Mixture weights do not match the shells or are not normalized"""
    pass


class FlowEscapedGridError(Exception):
    """Transported mass left the grid domain"""
    def __init__(self, msg, escaped=0.0):
        super().__init__(msg)
        self.escaped = escaped


class PhaseGrid:
    """
    Rectangular lattice of cell centres over [q_min, q_max] x [p_min, p_max]

    Args:
        q_range: (q_min, q_max)
        p_range: (p_min, p_max)
        shape: (n_q, n_p) cells
        periodic_q: wrap the q axis (angles)
    """
    def __init__(self, q_range, p_range, shape, periodic_q=False):
        self.q_min, self.q_max = map(float, q_range)
        self.p_min, self.p_max = map(float, p_range)
        self.n_q, self.n_p = map(int, shape)
        if self.q_max <= self.q_min or self.p_max <= self.p_min:
            raise ValueError('Grid ranges must be increasing')
        if self.n_q < 2 or self.n_p < 2:
            raise ValueError('Grid needs at least 2x2 cells')
        self.periodic_q = periodic_q
        self.dq = (self.q_max - self.q_min) / self.n_q
        self.dp = (self.p_max - self.p_min) / self.n_p
        self.q = self.q_min + self.dq * (np.arange(self.n_q) + 0.5)
        self.p = self.p_min + self.dp * (np.arange(self.n_p) + 0.5)
        self.Q, self.P = np.meshgrid(self.q, self.p, indexing='ij')

    @property
    def shape(self):
        return (self.n_q, self.n_p)

    @property
    def cell_area(self):
        return self.dq * self.dp

    @property
    def hbar_model(self):
        """Phase space area of one cell; no admissible state is narrower"""
        return self.cell_area

    def points(self):
        return np.stack([self.Q, self.P], axis=-1)

    def same_as(self, other):
        return (self.shape == other.shape and self.periodic_q == other.periodic_q and
                np.allclose([self.q_min, self.q_max, self.p_min, self.p_max],
                            [other.q_min, other.q_max, other.p_min, other.p_max], rtol=0, atol=1e-15))

    def to_dict(self):
        return {'q_range': [self.q_min, self.q_max], 'p_range': [self.p_min, self.p_max], 'shape': list(self.shape),
                'periodic_q': self.periodic_q}


def hamiltonian_system(name, K=1.0):
    """DynamicalSystem of a named Hamiltonian: sho (p^2 + K^2 q^2)/2 or the pendulum"""
    if name == 'sho':
        return trajectory.harmonic_oscillator(K)
    if name == 'pendulum':
        return trajectory.pendulum(K)
    raise ValueError('Unknown hamiltonian {}, expected one of {}'.format(name, HAMILTONIANS))


def default_grid(name, shape=(512, 512), extent=3.0):
    """sho on [-extent, extent]^2; pendulum periodic in angle with |p| <= extent"""
    if name == 'pendulum':
        return PhaseGrid((-np.pi, np.pi), (-extent, extent), shape, periodic_q=True)
    return PhaseGrid((-extent, extent), (-extent, extent), shape)


class WignerDensity:
    """
    Nonnegative density on a PhaseGrid with unit Riemann-sum mass

    sigma and omega record the shell the density was built from, if any. observables holds
    optional (A_i, a_i) pairs for a richer set of commuting constants; they are carried, not used.
    """
    def __init__(self, grid, values, sigma=None, omega=None, observables=None, label='density'):
        self.grid = grid
        self.values = np.asarray(values, dtype=float)
        self.sigma = sigma
        self.omega = omega
        self.observables = list(observables or [])
        self.label = label
        if self.values.shape != grid.shape:
            raise ValueError('Density shape {} does not match grid {}'.format(self.values.shape, grid.shape))
        if np.any(self.values < 0):
            raise ValueError('Density must be nonnegative')
        mass = self.mass()
        if abs(mass - 1) > MASS_TOL:
            raise ValueError('Density {} has mass {:.9g}'.format(label, mass))

    def mass(self):
        return float(np.sum(self.values) * self.grid.cell_area)


def energy_on_grid(system, grid):
    return system.hamiltonian(grid.points())


def _gradient_norm(system, grid):
    # Hamilton's field is the rotated gradient, so their norms agree
    return np.linalg.norm(system.vector_field(0.0, grid.points()), axis=-1)


def wigner_energy_shell(omega, system, sigma, grid, check_resolution=True):
    """
    Normalized Gaussian in H(q, p) - omega of width sigma

    :raises EmptyShellError: omega outside the energies attained on the grid
    :raises ShellUnderResolvedError: sigma < 2 |grad H| max(dq, dp) somewhere on the shell
    """
    if not sigma > 0:
        raise ValueError('Shell width must be positive')
    H = energy_on_grid(system, grid)
    if not H.min() <= omega <= H.max():
        raise EmptyShellError('Energy {} outside [{:.6g}, {:.6g}] attained on the grid'.format(omega, H.min(), H.max()))
    band = np.abs(H - omega) < SHELL_WIDTHS * sigma
    if check_resolution and np.any(band):
        needed = RESOLUTION_FACTOR * float(np.max(_gradient_norm(system, grid)[band])) * max(grid.dq, grid.dp)
        if sigma < needed:
            raise ShellUnderResolvedError('Shell width {} below {:.4g} required by the grid spacing'.format(sigma, needed))
    values = np.exp(-(H - omega)**2 / (2 * sigma**2))
    total = np.sum(values) * grid.cell_area
    if not total > 0:
        raise EmptyShellError('Shell at {} carries no mass on the grid'.format(omega))
    density = WignerDensity(grid, values / total, sigma=sigma, omega=omega, label='shell({:g})'.format(omega))
    my_logger.log(logging.INFO-1, 'Shell at {:g}, sigma {:g}: normalization {:.6g}'.format(omega, sigma, 1 / total))
    return density


def wigner_mix(weights, shells):
    """
    Probability weighted sum of shells

    :raises WeightMismatchError: count mismatch, negative weights, weights not summing to one,
        or shells on different grids
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size != len(shells) or not shells:
        raise WeightMismatchError('{} weights for {} shells'.format(weights.size, len(shells)))
    if np.any(weights < 0):
        raise WeightMismatchError('Weights must be nonnegative')
    if abs(np.sum(weights) - 1) > WEIGHT_TOL:
        raise WeightMismatchError('Weights sum to {:.12g}, not 1'.format(np.sum(weights)))
    grid = shells[0].grid
    if any(not s.grid.same_as(grid) for s in shells):
        raise WeightMismatchError('Shells live on different grids')
    values = np.zeros(grid.shape)
    for w, shell in zip(weights, shells):
        values += w * shell.values
    sigmas = {s.sigma for s in shells}
    return WignerDensity(grid, values, sigma=sigmas.pop() if len(sigmas) == 1 else None, label='mixture')


def energy_marginal(density, system, bins=64, energy_range=None):
    """Distribution of H under the density as (bin edges, probability density)"""
    H = energy_on_grid(system, density.grid)
    mass, edges = np.histogram(H, bins=bins, range=energy_range, weights=density.values * density.grid.cell_area)
    return edges, mass / np.diff(edges)


def mass_within(density, system, omega, width):
    """Mass where |H - omega| < width"""
    H = energy_on_grid(system, density.grid)
    return float(np.sum(density.values[np.abs(H - omega) < width]) * density.grid.cell_area)


def shell_thickness(density, system, omega):
    """Root mean square of H - omega"""
    H = energy_on_grid(system, density.grid)
    return float(np.sqrt(np.sum(density.values * (H - omega)**2) * density.grid.cell_area))


def point_state(grid, q, p):
    """All mass in the single cell holding (q, p)"""
    i = int(np.floor((q - grid.q_min) / grid.dq))
    j = int(np.floor((p - grid.p_min) / grid.dp))
    if not (0 <= i < grid.n_q and 0 <= j < grid.n_p):
        raise ValueError('Point ({}, {}) is outside the grid'.format(q, p))
    values = np.zeros(grid.shape)
    values[i, j] = 1.0 / grid.cell_area
    return WignerDensity(grid, values, label='point({:g}, {:g})'.format(q, p))


def gaussian_blob(grid, q0, p0, width):
    """Isotropic Gaussian in (q, p); not a function of H, so the flow deforms it"""
    values = np.exp(-((grid.Q - q0)**2 + (grid.P - p0)**2) / (2 * width**2))
    return WignerDensity(grid, values / (np.sum(values) * grid.cell_area), label='blob')


def _deposit(grid, points, masses):
    """Cloud-in-cell deposition onto cell centres; returns (mass grid, escaped mass)"""
    fq = (points[:, 0] - grid.q[0]) / grid.dq
    fp = (points[:, 1] - grid.p[0]) / grid.dp
    iq, ip = np.floor(fq).astype(np.int64), np.floor(fp).astype(np.int64)
    wq, wp = fq - iq, fp - ip
    out = np.zeros(grid.shape)
    escaped = 0.0
    for dq_, wq_ in [(0, 1 - wq), (1, wq)]:
        for dp_, wp_ in [(0, 1 - wp), (1, wp)]:
            i, j = iq + dq_, ip + dp_
            share = masses * wq_ * wp_
            if grid.periodic_q:
                i = np.mod(i, grid.n_q)
            inside = (i >= 0) & (i < grid.n_q) & (j >= 0) & (j < grid.n_p)
            escaped += float(np.sum(share[~inside]))
            np.add.at(out, (i[inside], j[inside]), share[inside])
    return out, escaped


def _subsamples(grid, centres, masses, subsample):
    """Split each cell into subsample x subsample equal samples at the sub-cell centres"""
    offsets = (np.arange(subsample) + 0.5) / subsample - 0.5
    dq, dp = np.meshgrid(offsets * grid.dq, offsets * grid.dp, indexing='ij')
    shift = np.stack([dq.ravel(), dp.ravel()], axis=-1)
    points = (centres[:, None, :] + shift[None, :, :]).reshape(-1, 2)
    return points, np.repeat(masses / shift.shape[0], shift.shape[0])


def transport_density(density, system, t, step=1e-2, threads=1, chunk=65536, subsample=SUBSAMPLE):
    """
    Advect every occupied cell for time t along the flow and re-bin the carried mass

    Each cell travels as subsample^2 samples at its sub-cell centres. Chunks deposit into
    their own buffers, summed in chunk order.

    :return: SimpleNamespace(values, escaped, mass)
    """
    if subsample < 1:
        raise ValueError('subsample must be at least 1')
    grid = density.grid
    occupied = np.nonzero(density.values.ravel() > 0)[0]
    points, masses = _subsamples(grid, grid.points().reshape(-1, 2)[occupied],
                                 density.values.ravel()[occupied] * grid.cell_area, int(subsample))
    n_steps = max(1, int(round(abs(t) / step)))
    h = t / n_steps

    def work(index, start, stop):
        final, alive = trajectory.propagate_ensemble(system.vector_field, points[start:stop], h, n_steps,
                                                     keep_history=False)
        lost = float(np.sum(masses[start:stop][~alive]))
        final = final[alive]
        if grid.periodic_q:
            span = grid.q_max - grid.q_min
            final[:, 0] = grid.q_min + np.mod(final[:, 0] - grid.q_min, span)
        deposited, escaped = _deposit(grid, final, masses[start:stop][alive])
        return deposited, escaped + lost

    parts = map_chunks(work, chunk_bounds(masses.size, chunk), threads)
    values = np.zeros(grid.shape)
    escaped = 0.0
    for deposited, lost in parts:
        values += deposited
        escaped += lost
    values /= grid.cell_area
    return SimpleNamespace(values=values, escaped=escaped, mass=float(np.sum(values) * grid.cell_area))


def shell_transport_invariance(density, system, t, step=1e-2, threads=1):
    """
    Sup-norm change of the density under transport for time t, relative to its peak

    :raises FlowEscapedGridError: more than 1e-12 of the mass left the grid
    """
    if t == 0:
        return 0.0
    moved = transport_density(density, system, t, step, threads)
    if moved.escaped > ESCAPE_TOL:
        raise FlowEscapedGridError('Mass {:.3g} left the grid after t = {}'.format(moved.escaped, t), moved.escaped)
    if abs(moved.mass - 1) > 0.02:
        my_logger.warning('Transport changed the mass of {} to {:.6f}'.format(density.label, moved.mass))
    change = float(np.max(np.abs(moved.values - density.values)) / np.max(density.values))
    my_logger.log(logging.INFO-1, 'Transport of {} for t = {:g}: relative change {:.4g}'.format(density.label, t, change))
    return change


DENSITY_COLUMNS = ['q', 'p', 'value']


def export_density_csv(density, path, header=None):
    grid = density.grid
    rows = zip(grid.Q.ravel(), grid.P.ravel(), density.values.ravel())
    write_csv(path, DENSITY_COLUMNS, rows, header)
