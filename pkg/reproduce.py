# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Acceptance suite behind `tempus reproduce`

Every criterion is a function (scale, seed, threads) -> list of entries. Failures are rows, never
exceptions; an exception inside a criterion is caught and counted against it.
"""

import logging
import time
from collections import Counter, OrderedDict
from io import StringIO
from types import SimpleNamespace

import numpy as np

import common.branchnet as branchnet
import common.cosmology as cosmology
import common.decoherence as decoherence
import common.measure as measure
import common.schulman as schulman
import common.symmetry as symmetry
import common.wigner as wigner
from common.helper import create_entry, derive_rng

my_logger = logging.getLogger(__name__)

SCALES = {
    'quick': SimpleNamespace(axis_n=10**6, tube_n=2 * 10**5, census_runs=40, graphs=200, urn_runs=30, urn_steps=20000,
                             mirror_steps=5000, dec_runs=6, dec_states=2000, wigner_shape=(512, 512)),
    'full': SimpleNamespace(axis_n=10**6, tube_n=10**6, census_runs=200, graphs=1000, urn_runs=100, urn_steps=20000,
                            mirror_steps=20000, dec_runs=24, dec_states=10**4, wigner_shape=(512, 512)),
}

# wall clock budget of each criterion in seconds; overruns warn
BUDGETS = {'taxonomy': 10, 'axis_scaling': 120, 'tube_scaling': 600, 'axis_census': 300, 'decoherence_oracle': 60,
           'pole_rule': 30, 'wigner_shells': 120, 'branch_laws': 60, 'urn_experiments': 300, 'energy_conditions': 30}


class WarnFilter(logging.Filter):
    def filter(self, rec):
        return rec.levelno == logging.WARN


fmt = logging.Formatter('%(levelname)s - %(message)s')


def create_logging_capture(this_logger):
    errorMessages = StringIO()
    warnMessages = StringIO()

    errh = logging.StreamHandler(errorMessages)
    errh.setLevel(logging.ERROR)
    errh.setFormatter(fmt)

    warnh = logging.StreamHandler(warnMessages)
    warnh.setLevel(logging.WARN)
    warnh.addFilter(WarnFilter())
    warnh.setFormatter(fmt)

    this_logger.addHandler(errh)
    this_logger.addHandler(warnh)

    return errh, warnh


def get_my_capture(this_logger, handler):
    this_logger.removeHandler(handler)
    strings = handler.stream.getvalue()
    handler.stream.close()
    return strings


def _show(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return '{:.6g}'.format(float(value))
    return str(value)


def check(name, measured, expected, ok):
    return create_entry(name, _show(measured), expected, 'PASS' if ok else 'FAIL')


def taxonomy(scale, seed, threads):
    """Four reference systems fall into the four combinations of invariance and reversibility"""
    expected = {'a': (True, symmetry.REVERSIBLE), 'b': (True, symmetry.MIXED),
                'c': (False, symmetry.REVERSIBLE), 'd': (False, symmetry.IRREVERSIBLE)}
    entries = []
    for report in symmetry.classify_catalog(seed=seed):
        tri, kind = expected[report.system]
        entries.append(check('system {}'.format(report.system), 'TRI={} {}'.format(report.tri, report.reversible),
                             'TRI={} {}'.format(tri, kind), report.tri == tri and report.reversible == kind))
        if report.system == 'b':
            kinds = sorted(v.kind for v in report.per_trajectory.values())
            entries.append(check('system b regimes', ', '.join(kinds), 'Irreversible, Reversible',
                                 kinds == [symmetry.IRREVERSIBLE, symmetry.REVERSIBLE]))
    return entries


def axis_scaling(scale, seed, threads):
    """Fraction of the cube within a grain of the symmetry axes scales as 2 (eps/L)^2"""
    L = 2.0
    config = measure.MeasureScanConfig(L, np.geomspace(0.005, 0.08, 8) * L, scale.axis_n, seed, mode='axis_set',
                                       threads=threads)
    result = measure.scan_axis_measure(config)
    entries = [check('log-log slope', result.slope, '2.0 +- 0.15', abs(result.slope - 2.0) <= 0.15)]
    for eps, fraction, _, predicted in result.rows():
        ratio = fraction / predicted
        entries.append(check('fraction at eps/L {:.4g}'.format(eps / L), fraction, 'within x2 of {:.4g}'.format(predicted),
                             0.5 <= ratio <= 2.0))
    return entries


def tube_scaling(scale, seed, threads):
    """Fraction of the cube within a grain of the symmetric solutions scales as 2 eps/L"""
    L = 2.0
    config = measure.MeasureScanConfig(L, np.geomspace(0.01, 0.1, 6) * L, scale.tube_n, seed, mode='solution_tube',
                                       threads=threads)
    surfaces = measure.build_symmetric_surfaces(config.model, L=L)
    result = measure.scan_tube_measure(config, surfaces)
    return [check('log-log slope', result.slope, '1.0 +- 0.15', abs(result.slope - 1.0) <= 0.15),
            check('slope interval', '{:.4f} to {:.4f}'.format(*result.slope_ci), 'reported', True)]


def axis_census(scale, seed, threads):
    """Symmetry is detected exactly on the runs started on an axis"""
    model = cosmology.FRWModel(k=1, m=0.5)
    census = measure.axis_census(model, scale.census_runs, epsilon=1e-3, tol=1e-4, seed=seed)
    return [check('on-axis detection rate', census.on_axis_rate, '1.0', census.on_axis_rate == 1.0),
            check('off-axis detection rate', census.off_axis_rate, '0.0', census.off_axis_rate == 0.0),
            check('max constraint residual', census.max_residual, '<= 1e-6', census.max_residual <= 1e-6),
            check('failed runs', len(census.failures), '0', not census.failures)]


def _oracle_error(state, obs, t, exact):
    envelope = decoherence.offdiag_envelope(state, obs, t)
    d0 = envelope.envelope[int(np.argmin(np.abs(t)))]
    return float(np.max(np.abs(envelope.envelope / d0 - exact))), envelope.twin_asymmetry


def decoherence_oracle(scale, seed, threads):
    """Envelopes of separable kernels against their analytic Fourier transforms"""
    entries = []
    gamma = 0.3
    t = np.linspace(-5 / gamma, 5 / gamma, 401)
    state, obs = decoherence.lorentzian_pair(gamma, t_max=5 / gamma)
    error, twin = _oracle_error(state, obs, t, np.exp(-gamma * np.abs(t)))
    entries.append(check('lorentzian max error', error, '<= 1e-3', error <= 1e-3))
    entries.append(check('lorentzian twin asymmetry', twin, '<= 1e-10', twin <= 1e-10))

    sigma = 1.0
    t = np.linspace(-5 / sigma, 5 / sigma, 401)
    state, obs = decoherence.gaussian_pair(sigma, t_max=5 / sigma)
    error, twin = _oracle_error(state, obs, t, np.exp(-sigma**2 * t**2 / 2))
    entries.append(check('gaussian max error', error, '<= 1e-3', error <= 1e-3))
    entries.append(check('gaussian twin asymmetry', twin, '<= 1e-10', twin <= 1e-10))

    diagonal = state.stripped()
    means = decoherence.mean_value(diagonal, obs, t)
    drift = float(np.max(np.abs(means - decoherence.mean_value(diagonal, obs, 0.0))))
    entries.append(check('diagonal state drift', drift, '<= 1e-10', drift <= 1e-10))
    return entries


def pole_rule(scale, seed, threads):
    """Fitted decay rate of a pole's Lorentzian equals the imaginary part of the pole"""
    entries = []
    for z in [1.0 - 0.2j, 2.0 - 0.5j, 0.5 - 1.0j]:
        model = decoherence.make_pole_model([z, z.conjugate()])
        rate = 1.0 / decoherence.decoherence_time_from_poles(model)
        t_max = 8.0 / abs(z.imag)
        t = np.linspace(-t_max, t_max, 801)
        state, obs = decoherence.pair_from_pole(z, t_max)
        envelope = decoherence.offdiag_envelope(state, obs, t)
        fit = decoherence.fit_decoherence_time(envelope.t, envelope.envelope, 'exponential')
        relative = abs(fit.rate - rate) / rate
        entries.append(check('pole {}'.format(z), fit.rate, '{:.6g} within 1%'.format(rate), relative <= 0.01))
    return entries


def wigner_shells(scale, seed, threads):
    """Shell mass, mixture normalization, and transport of shells against an off-shell control"""
    system = wigner.hamiltonian_system('sho')
    grid = wigner.default_grid('sho', scale.wigner_shape, 3.0)
    sigma = 0.1
    entries = []
    shells = [wigner.wigner_energy_shell(omega, system, sigma, grid) for omega in [0.5, 1.0, 1.5]]
    for omega, shell in zip([0.5, 1.0, 1.5], shells):
        within = wigner.mass_within(shell, system, omega, 3 * sigma)
        entries.append(check('mass within 3 sigma of {}'.format(omega), within, '>= 0.99', within >= 0.99))
    mixture = wigner.wigner_mix([0.2, 0.3, 0.5], shells)
    error = abs(mixture.mass() - 1)
    entries.append(check('mixture normalization error', error, '<= 1e-6', error <= 1e-6))
    change = wigner.shell_transport_invariance(shells[1], system, 1.0, threads=threads)
    entries.append(check('shell transport change', change, '<= 2%', change <= 0.02))
    blob = wigner.gaussian_blob(grid, 1.0, 0.0, 0.2)
    control = wigner.shell_transport_invariance(blob, system, 1.0, threads=threads)
    entries.append(check('off-shell control change', control, '>= 20%', control >= 0.2))
    return entries


def _partial_order_violations(graph):
    nodes = list(graph.graph.nodes)
    relation = {(a, b): branchnet.causally_related(graph, a, b) for a in nodes for b in nodes}
    bad = 0
    for a in nodes:
        bad += relation[(a, a)] != 'unrelated'
        for b in nodes:
            if relation[(a, b)] == 'cause_of':
                bad += relation[(b, a)] != 'effect_of'
                bad += sum(1 for c in nodes if relation[(b, c)] == 'cause_of' and relation[(a, c)] != 'cause_of')
    return bad


def branch_laws(scale, seed, threads):
    """Causal order, entropy growth and mirror verdicts on random valid graphs"""
    rng = derive_rng(seed, 'reproduce.branch')
    counts = Counter()
    for _ in range(scale.graphs):
        graph = branchnet.random_branch_graph(int(rng.integers(3, 11)), rng)
        counts['invalid'] += not branchnet.validate_graph(graph).valid
        counts['order'] += _partial_order_violations(graph)
        counts['entropy'] += not branchnet.entropy_audit(graph).monotone
        reversed_graph = branchnet.time_reverse_graph(graph)
        flipped = branchnet.global_arrow(reversed_graph).orientation == 'reversed' and \
            branchnet.global_arrow(graph).orientation == 'forward'
        same = branchnet.is_mirror_symmetric(graph) == branchnet.is_mirror_symmetric(reversed_graph)
        counts['mirror'] += not (flipped and same)
    n = scale.graphs
    return [check('invalid generated graphs', counts['invalid'], '0 of {}'.format(n), counts['invalid'] == 0),
            check('partial order violations', counts['order'], '0', counts['order'] == 0),
            check('entropy decreases on a driving path', counts['entropy'], '0', counts['entropy'] == 0),
            check('mirror verdict or orientation violations', counts['mirror'], '0', counts['mirror'] == 0),
            check('palindrome mirror symmetric', branchnet.is_mirror_symmetric(branchnet.palindromic_chain()), 'True',
                  branchnet.is_mirror_symmetric(branchnet.palindromic_chain())),
            check('reference graph mirror symmetric', branchnet.is_mirror_symmetric(branchnet.reference_graph()), 'False',
                  not branchnet.is_mirror_symmetric(branchnet.reference_graph()))]


def urn_experiments(scale, seed, threads):
    """Entropy growth and displacement of a small urn driven by a large one; mirror test of the composite"""
    pair = schulman.UrnPair(200, 20, 0.01)
    result = schulman.schulman_ensemble(pair, scale.urn_steps, scale.urn_runs, seed, 'asymmetric_sizes', threads)
    equal = schulman.schulman_ensemble(schulman.UrnPair(50, 50, 0.01), scale.mirror_steps, scale.urn_runs, seed, 'mirror',
                                       threads)
    unequal = schulman.schulman_ensemble(schulman.UrnPair(50, 20, 0.01), scale.mirror_steps, scale.urn_runs, seed,
                                         'mirror', threads)
    return [check('monotone composite entropy', result.monotone_fraction, '>= 0.95', result.monotone_fraction >= 0.95),
            check('B displaced from equilibrium', result.displaced_fraction, '>= 0.90', result.displaced_fraction >= 0.9),
            check('mirror pass rate, equal sizes', equal.symmetric_fraction, '>= {}'.format(schulman.MIRROR_PASS_RATE),
                  equal.symmetric_fraction >= schulman.MIRROR_PASS_RATE),
            check('mirror pass rate, unequal sizes', unequal.symmetric_fraction,
                  '<= {:.2g}'.format(1 - schulman.MIRROR_PASS_RATE), unequal.symmetric_fraction <= 1 - schulman.MIRROR_PASS_RATE),
            check('mirror verdict', schulman.mirror_verdict(equal, unequal), 'True', schulman.mirror_verdict(equal, unequal)),
            check('ball counts conserved', result.conserved and equal.conserved and unequal.conserved, 'True',
                  result.conserved and equal.conserved and unequal.conserved)]


def energy_conditions(scale, seed, threads):
    """Dominant energy condition along runs from drawn nonnegative potential states, against a negative potential, and by two routes"""
    entries = []
    rng = derive_rng(seed, 'reproduce.energy')
    model = cosmology.FRWModel(k=1, m=1.0)
    nonnegative = [model, cosmology.FRWModel.constant_potential(0.5)]
    failed, smallest, states = 0, np.inf, 0
    for i in range(scale.dec_runs):
        a_dot, phi_dot = rng.uniform(-1, 1, size=2)
        phi = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.5)
        run_model = nonnegative[i % len(nonnegative)]
        root = cosmology.solve_constraint_for_a(a_dot, phi, phi_dot, run_model)
        traj = cosmology.evolve_cosmo(cosmology.make_cosmo_state(root.a, a_dot, phi, phi_dot), run_model, 2.0, 1e-3)
        holds, margin, _ = cosmology.dominant_energy_sweep(traj, run_model)
        my_logger.debug('DEC run {} from ({:.3f}, {:.3f}, {:.3f}): {} states, margin {:.3e}'.format(
            i, a_dot, phi, phi_dot, len(traj), margin))
        failed += not holds
        smallest = min(smallest, margin)
        states += len(traj)
    entries.append(check('V >= 0 runs from {} drawn states ({} sampled)'.format(scale.dec_runs, states), smallest,
                         'holds in every run, margin >= 0', failed == 0))

    negative = cosmology.FRWModel.constant_potential(-1.0, k=-1)
    report = cosmology.dominant_energy_check(cosmology.make_cosmo_state(1.0, 0.0, 0.0, 0.1), negative)
    entries.append(check('V < 0 state', report.margin, 'fails', not report.holds))

    models = [model, cosmology.FRWModel.constant_potential(-0.5), cosmology.FRWModel.constant_potential(0.5)]
    disagreements = 0
    for i in range(scale.dec_states):
        state = cosmology.make_cosmo_state(1.0, 0.0, rng.uniform(-2, 2), rng.uniform(-2, 2))
        report = cosmology.dominant_energy_check(state, models[i % len(models)], rng.uniform(-2, 2))
        disagreements += report.holds != report.type_i_holds
    entries.append(check('Type I against direct on {} states'.format(scale.dec_states), disagreements, '0', disagreements == 0))
    return entries


CRITERIA = OrderedDict([
    ('taxonomy', taxonomy),
    ('axis_scaling', axis_scaling),
    ('tube_scaling', tube_scaling),
    ('axis_census', axis_census),
    ('decoherence_oracle', decoherence_oracle),
    ('pole_rule', pole_rule),
    ('wigner_shells', wigner_shells),
    ('branch_laws', branch_laws),
    ('urn_experiments', urn_experiments),
    ('energy_conditions', energy_conditions),
])


def select_criteria(string=None):
    """Criterion names from a comma separated list; None or empty selects all"""
    if not string:
        return list(CRITERIA)
    names = [x.strip() for x in str(string).split(',') if x.strip()]
    unknown = [x for x in names if x not in CRITERIA]
    if unknown:
        raise ValueError('Unknown criteria {}, expected some of {}'.format(unknown, list(CRITERIA)))
    return names


def _title(name):
    return ''.join(x.capitalize() for x in name.split('_'))


def run_criterion(name, scale, seed=0, threads=1):
    """Run one criterion with its own log capture; returns its result dict"""
    root = logging.getLogger()
    counts = Counter()
    messages = OrderedDict()
    me = {'name': name, 'description': CRITERIA[name].__doc__, 'success': False, 'counts': counts, 'messages': messages,
          'errors': '', 'warns': '', 'elapsed': 0.0}
    ehandler, whandler = create_logging_capture(root)
    my_logger.info('\n*** {}'.format(name))
    start = time.perf_counter()
    try:
        entries = CRITERIA[name](scale, seed, threads)
    except Exception as ex:
        my_logger.log(logging.INFO-1, 'Exception caught while running {}'.format(name), exc_info=1)
        my_logger.error('{}: criterion stopped: {}'.format(name, repr(ex)))
        counts['exception' + _title(name)] += 1
        entries = [create_entry('exception', repr(ex), 'no exception', 'FAIL')]
    elapsed = time.perf_counter() - start
    me['elapsed'] = elapsed
    budget = BUDGETS[name]
    entries.append(create_entry('elapsed seconds', '{:.1f}'.format(elapsed), '< {}'.format(budget),
                                'PASS' if elapsed < budget else 'WARN'))
    for entry in entries:
        messages[entry.name] = entry
        counts['{}{}'.format(entry.result.lower(), _title(name))] += 1
        if entry.result == 'FAIL':
            my_logger.error('{}: {} measured {}, expected {}'.format(name, entry.name, entry.measured, entry.expected))
        elif entry.result == 'WARN':
            my_logger.warning('{}: {} measured {}, expected {}'.format(name, entry.name, entry.measured, entry.expected))
    me['errors'] = get_my_capture(root, ehandler)
    me['warns'] = get_my_capture(root, whandler)
    me['success'] = not any(e.result == 'FAIL' for e in entries)
    my_logger.info('{}: {} in {:.1f} s'.format(name, 'PASS' if me['success'] else 'FAIL', elapsed))
    return me


def run_suite(suite='quick', seed=0, threads=1, names=None):
    """
    Run the selected criteria at the given scale

    :return: OrderedDict name -> result dict with counts, messages, errors, warns, success, elapsed
    """
    if suite not in SCALES:
        raise ValueError('Unknown suite {}, expected one of {}'.format(suite, list(SCALES)))
    scale = SCALES[suite]
    results = OrderedDict()
    for name in names or list(CRITERIA):
        results[name] = run_criterion(name, scale, seed, threads)
    return results
