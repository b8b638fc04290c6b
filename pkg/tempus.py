# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

import os
import sys
import argparse
import logging
import json
from datetime import datetime

tool_version = '1.0.0'

my_logger = logging.getLogger()
my_logger.setLevel(logging.DEBUG)
standard_out = logging.StreamHandler(sys.stdout)
standard_out.setLevel(logging.INFO)
my_logger.addHandler(standard_out)

logging.addLevelName(logging.INFO-1, "VERBOSE1")
logging.addLevelName(logging.INFO-2, "VERBOSE2")

SUBCOMMANDS = ['classify', 'cosmo', 'measure', 'deco', 'wigner', 'branch', 'schulman', 'reproduce']

MEASURE_MODES = {'axis': 'axis_set', 'tube': 'solution_tube', 'dynamic': 'dynamic'}


def build_parser():
    """Top level parser with one subparser per subcommand; returns (parser, {subcommand: subparser})"""
    shared = argparse.ArgumentParser(add_help=False)
    # base tool
    shared.add_argument('-v', '--verbose', action='count', default=0, help='Verbosity of tool in stdout')
    shared.add_argument('-c', '--config', type=str, help='Configuration for this run: INI, JSON or a previous manifest')
    # run options
    shared.add_argument('--logdir', type=str, default='./logs', help='directory for logs, manifests and reports')
    shared.add_argument('--debugging', action='store_true', help='Output debug statements to text log, otherwise it only uses INFO')
    shared.add_argument('--seed', type=int, default=0, help='root seed; every random stream is derived from it')
    shared.add_argument('--threads', type=int, help='worker cap for chunked sampling (fallback TEMPUS_THREADS, then 1)')
    shared.add_argument('--json', type=str, help='also write the machine readable result to this path')

    argget = argparse.ArgumentParser(description='tempus, a numerical laboratory for the arrow of time, version {}'.format(tool_version))
    sub = argget.add_subparsers(dest='subcommand', metavar='subcommand')
    sub.required = True
    parsers = {}

    p = parsers['classify'] = sub.add_parser('classify', parents=[shared], help='reversal invariance, reversibility and time symmetry of the reference systems')
    p.add_argument('--system', type=str, default='all', choices=['a', 'b', 'c', 'd', 'all'], help='reference system to report')
    p.add_argument('--step', type=float, default=2e-3, help='integration step')
    p.add_argument('--horizon', type=float, default=25.0, help='time horizon of the return test')
    p.add_argument('--tol-close', type=float, default=1e-2, help='closeness of a return')
    p.add_argument('--tri-samples', type=int, default=64, help='phase points of the reversal invariance test')
    p.add_argument('--symmetry-tol', type=float, default=1e-5, help='residual accepted for a symmetry centre')
    p.add_argument('--csv', type=str, help='report CSV path')

    p = parsers['cosmo'] = sub.add_parser('cosmo', parents=[shared], help='evolve an FRW universe with a scalar field')
    p.add_argument('--k', type=int, default=1, choices=[-1, 0, 1], help='spatial curvature')
    p.add_argument('--m', type=float, default=1.0, help='field mass of V = m^2 phi^2 / 2')
    p.add_argument('--kappa', type=float, default=1.0, help='8 pi G / 3')
    p.add_argument('--cosmological-constant', type=float, default=0.0, help='cosmological constant')
    p.add_argument('--potential', type=str, default='quadratic', choices=['quadratic', 'constant'], help='shape of V(phi)')
    p.add_argument('--v0', type=float, default=0.0, help='value of a constant potential')
    p.add_argument('--ic', type=str, help='initial "adot,phi,phidot"; a follows from the constraint')
    p.add_argument('--t-end', type=float, default=5.0, help='final time')
    p.add_argument('--t-start', type=float, help='also evolve backward to this time')
    p.add_argument('--step', type=float, default=1e-3, help='integration step')
    p.add_argument('--symmetry-tol', type=float, default=1e-4, help='residual accepted for a symmetry centre')
    p.add_argument('--big-bang', type=int, default=0, help='also sample this many near singular states')
    p.add_argument('--delta', type=float, default=1e-3, help='scale factor of the near singular states')
    p.add_argument('--csv', type=str, help='trajectory CSV path')

    p = parsers['measure'] = sub.add_parser('measure', parents=[shared], help='Monte Carlo measure of symmetric initial conditions')
    p.add_argument('--mode', type=str, default='axis', choices=list(MEASURE_MODES), help='set being measured')
    p.add_argument('--L', type=float, default=2.0, dest='cube_side', help='side of the sampled cube')
    p.add_argument('--eps', type=str, help='grain sizes as start:stop:count[:log]')
    p.add_argument('--n', type=int, default=10**6, help='samples per grain size')
    p.add_argument('--k', type=int, default=1, choices=[-1, 0, 1], help='spatial curvature')
    p.add_argument('--m', type=float, default=0.5, help='field mass')
    p.add_argument('--n-axis', type=int, default=420, help='symmetric solutions per axis for the tube')
    p.add_argument('--n-time', type=int, default=2001, help='samples per symmetric solution')
    p.add_argument('--dtau', type=float, help='step of the symmetric solutions or the census runs')
    p.add_argument('--sampler', type=str, default='uniform', choices=['uniform', 'on_axis', 'off_axis'], help='initial conditions of the dynamic census')
    p.add_argument('--t-half', type=float, default=0.5, help='half length of the census runs')
    p.add_argument('--refine', action='store_true', help='refine the tube mesh until the smallest grain settles')
    p.add_argument('--chunk', type=int, default=10**5, help='samples per chunk')
    p.add_argument('--csv', type=str, help='scan CSV path')

    p = parsers['deco'] = sub.add_parser('deco', parents=[shared], help='decoherence of mean values in a spectral state')
    p.add_argument('--kernel', type=str, default='lorentzian:gamma=0.3', help='lorentzian:gamma=G or gaussian:sigma=S')
    p.add_argument('--t-grid', type=str, default='-20:20:401', help='times as start:stop:count, symmetric about 0')
    p.add_argument('--observables', type=str, default='flat', help='comma separated observables: flat, linear, window')
    p.add_argument('--threshold', type=float, default=1e-3, help='settling threshold of the weak limit')
    p.add_argument('--poles', type=str, help='comma separated complex poles such as 0.5-0.3j,0.5+0.3j')
    p.add_argument('--form', type=str, choices=['exponential', 'gaussian'], help='decay form of the fit; default follows the kernel')
    p.add_argument('--csv', type=str, help='envelope CSV path')

    p = parsers['wigner'] = sub.add_parser('wigner', parents=[shared], help='energy shells and their transport')
    p.add_argument('--hamiltonian', type=str, default='sho', choices=['sho', 'pendulum'], help='Hamiltonian')
    p.add_argument('--omega', type=str, default='1.0', help='comma separated shell energies')
    p.add_argument('--weights', type=str, help='comma separated mixture weights, default equal')
    p.add_argument('--sigma', type=float, default=0.1, help='shell width')
    p.add_argument('--grid', type=str, default='512x512', help='cells as NxM')
    p.add_argument('--extent', type=float, default=3.0, help='half width of the phase grid')
    p.add_argument('--transport', type=float, default=0.0, help='transport the density for this time')
    p.add_argument('--step', type=float, default=1e-2, help='transport step')
    p.add_argument('--csv', type=str, help='density CSV path')

    p = parsers['branch'] = sub.add_parser('branch', parents=[shared], help='causal and entropic analysis of a branch graph')
    p.add_argument('--graph', type=str, default='reference', help='reference, palindrome, or a JSON graph file')
    p.add_argument('--query', type=str, help='"a,b": causal relation of two nodes')
    p.add_argument('--path', type=str, help='"n1,n2,...": information gathered along a path')
    p.add_argument('--reverse', action='store_true', help='time reverse the graph first')

    p = parsers['schulman'] = sub.add_parser('schulman', parents=[shared], help='weakly coupled urn experiments')
    p.add_argument('--na', type=int, default=200, help='balls in subsystem A')
    p.add_argument('--nb', type=int, default=20, help='balls in subsystem B')
    p.add_argument('--lambda', type=float, default=0.01, dest='coupling', help='coupling strength')
    p.add_argument('--steps', type=int, default=20000, help='steps per run')
    p.add_argument('--runs', type=int, default=100, help='runs in the ensemble')
    p.add_argument('--scenario', type=str, default='asymmetric_sizes', choices=['asymmetric_sizes', 'mirror'], help='experiment')
    p.add_argument('--csv', type=str, help='entropy CSV path')

    p = parsers['reproduce'] = sub.add_parser('reproduce', parents=[shared], help='run the acceptance suite')
    p.add_argument('--suite', type=str, default='quick', choices=['quick', 'full'], help='sample sizes of the suite')
    p.add_argument('--criteria', type=str, help='comma separated criterion names, default all')

    return argget, parsers


def explicit_dests(parser, argslist):
    """Dests of the options spelled out on the command line"""
    tokens = [x.split('=', 1)[0] for x in argslist if x.startswith('-')]
    found = set()
    for action in parser._actions:
        if any(opt in tokens for opt in action.option_strings):
            found.add(action.dest)
    # -vv style
    if any(x.startswith('-v') and set(x[1:]) == {'v'} for x in tokens):
        found.add('verbose')
    return found


def _field(name, parse, value):
    """Parse one option, reporting a bad value against its field"""
    from common.config import ConfigInvalidError
    try:
        return parse(value)
    except (TypeError, ValueError) as ex:
        raise ConfigInvalidError('Bad value {!r} for {}: {}'.format(value, name, ex), field=name)


def _floats(string):
    return [float(x) for x in str(string).split(',') if x.strip()]


def _write_json(path, data):
    from common.helper import to_jsonable
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(to_jsonable(data), f, indent=2, sort_keys=True)
    my_logger.log(logging.INFO-1, 'Wrote {}'.format(path))


def run_classify(args, header):
    import common.symmetry as symmetry
    from common.helper import write_csv
    reports = symmetry.classify_catalog(args.step, args.horizon, args.tol_close, args.tri_samples, args.seed, args.symmetry_tol)
    if args.system != 'all':
        reports = [r for r in reports if r.system == args.system]
    for report in reports:
        for label, verdict in sorted(report.per_trajectory.items()):
            my_logger.info('  {} {}: {} ({})'.format(report.system, label, verdict.kind, verdict.reason))
    write_csv(args.csv, symmetry.REPORT_COLUMNS, [r.as_row() for r in reports], header)
    if args.json:
        _write_json(args.json, [r.to_dict() for r in reports])
    return True, args.csv, 'Classified {} systems'.format(len(reports))


def _frw_model(args):
    import common.cosmology as cosmology
    if args.potential == 'constant':
        model = cosmology.FRWModel.constant_potential(args.v0, args.k, args.kappa)
        model.Lambda = args.cosmological_constant
        return model
    return cosmology.FRWModel(args.k, args.m, args.kappa, args.cosmological_constant)


def run_cosmo(args, header):
    import common.cosmology as cosmology
    from common.config import ConfigInvalidError
    from common.helper import parse_triple
    if not args.ic:
        raise ConfigInvalidError('cosmo needs initial conditions --ic "adot,phi,phidot"', field='ic')
    a_dot, phi, phi_dot = _field('ic', parse_triple, args.ic)
    model = _field('potential', _frw_model, args)
    root = cosmology.solve_constraint_for_a(a_dot, phi, phi_dot, model)
    if root.multiplicity > 1:
        my_logger.warning('Scale factor {:.6g} is a repeated root of the constraint'.format(root.a))
    state = cosmology.make_cosmo_state(root.a, a_dot, phi, phi_dot, 0.0)
    my_logger.info('Initial state: a = {:.10g}, adot = {}, phi = {}, phidot = {}'.format(root.a, a_dot, phi, phi_dot))
    traj = cosmology.evolve_cosmo(state, model, args.t_end, args.step, args.t_start)
    summary = {'model': model.to_dict(), 'a0': root.a, 'samples': len(traj), 'max_residual': traj.diagnostics['max_residual'],
               'singular_end': traj.diagnostics.get('singular_end', [])}
    my_logger.info('Max constraint residual {:.3e} over {} samples'.format(summary['max_residual'], len(traj)))

    found = cosmology.detect_cosmo_symmetry(traj, args.symmetry_tol)
    summary['symmetry'] = list(found) if found else None
    if found:
        my_logger.info('Time symmetric about t = {:.10f} ({} axis)'.format(*found))
    else:
        my_logger.info('No symmetry centre within tolerance {}'.format(args.symmetry_tol))

    lyapunov = cosmology.lyapunov_variable(traj, model)
    summary['lyapunov'] = {'premise_holds': lyapunov.premise_holds, 'monotone': lyapunov.monotone,
                           'accelerating_epochs': lyapunov.accelerating_epochs}
    my_logger.info('Lyapunov variable -adot: premise {}, monotone {}'.format(lyapunov.premise_holds, lyapunov.monotone))

    holds, margin, disagreements = cosmology.dominant_energy_sweep(traj, model)
    summary['dominant_energy'] = {'holds': holds, 'min_margin': margin, 'disagreements': disagreements}
    my_logger.info('Dominant energy condition: holds {}, smallest margin {:.6g}'.format(holds, margin))
    if disagreements:
        my_logger.error('Type I and direct energy checks disagree on {} states'.format(disagreements))

    try:
        law = cosmology.fit_expansion_law(traj, model)
        summary['expansion'] = vars(law)
        my_logger.info('Expansion law: {} (exponent {}, rate {})'.format(law.law, law.exponent, law.rate))
    except ValueError as ex:
        my_logger.log(logging.INFO-1, 'No expansion law: {}'.format(ex))

    if args.big_bang > 0:
        unstable = cosmology.big_bang_surface_instability(model, args.big_bang, args.seed, args.delta, threads=args.threads)
        summary['big_bang'] = {'fraction_positive': unstable.fraction_positive, 'median': unstable.median, 'n': unstable.n}

    cosmology.export_cosmo_csv(traj, args.csv, header)
    if args.json:
        _write_json(args.json, summary)
    return disagreements == 0, args.csv, 'Evolved {} samples'.format(len(traj))


def run_measure(args, header):
    import common.cosmology as cosmology
    import common.measure as measure
    from common.helper import parse_range
    mode = MEASURE_MODES[args.mode]
    epsilons = _field('eps', parse_range, args.eps) if args.eps else None
    if epsilons is None and mode == 'solution_tube':
        epsilons = parse_range('0.01:0.1:8:log') * args.cube_side
    model = cosmology.FRWModel(k=args.k, m=args.m)
    config = _field('n', lambda _: measure.MeasureScanConfig(args.cube_side, epsilons, args.n, args.seed, model, mode,
                                                          args.threads, args.chunk), args.n)
    summary = {'config': config.to_dict()}
    if mode == 'dynamic':
        kwargs = {'dtau': args.dtau} if args.dtau else {}
        census = measure.dynamic_symmetry_census(config, t_half=args.t_half, sampler=args.sampler, **kwargs)
        summary['census'] = vars(census)
        from common.helper import write_csv
        write_csv(args.csv, ['epsilon', 'fraction', 'stderr', 'predicted', 'predicted_stderr', 'agree'],
                  [[config.epsilons[0], census.fraction, census.stderr, census.predicted, census.predicted_stderr,
                    census.agree]], header)
        if not census.agree:
            my_logger.warning('Dynamic census disagrees with the axis prediction')
        success, message = True, 'Census of {} samples'.format(census.n)
    else:
        if mode == 'axis_set':
            result = measure.scan_axis_measure(config)
        else:
            kwargs = {'dtau': args.dtau} if args.dtau else {}
            surfaces = measure.build_symmetric_surfaces(model, args.n_axis, args.n_time, args.cube_side, **kwargs)
            result = measure.scan_tube_measure(config, surfaces, refine=args.refine)
        summary['result'] = result.to_dict()
        for eps, fraction, stderr, predicted in result.rows():
            my_logger.log(logging.INFO-1, 'eps {:.6g}: fraction {:.6g} +- {:.2g}, predicted {:.6g}'.format(eps, fraction, stderr, predicted))
        my_logger.info('Log-log slope {:.4f} (95% CI {:.4f} to {:.4f})'.format(result.slope, *result.slope_ci))
        measure.export_scan_csv(result, args.csv, header)
        success, message = True, 'Slope {:.4f}'.format(result.slope)
    if args.json:
        _write_json(args.json, summary)
    return success, args.csv, message


def run_deco(args, header):
    import common.decoherence as decoherence
    from common.helper import parse_kernel, parse_range
    kind, params = _field('kernel', parse_kernel, args.kernel)
    t_grid = _field('t_grid', parse_range, args.t_grid)
    t_max = float(max(abs(t_grid[0]), abs(t_grid[-1])))
    if kind == 'lorentzian':
        state, flat = decoherence.lorentzian_pair(params['gamma'], t_max)
        expected = params['gamma']
    else:
        state, flat = decoherence.gaussian_pair(params['sigma'], t_max)
        expected = params['sigma']**2 / 2
    names = [x.strip() for x in args.observables.split(',') if x.strip()]
    observables = _field('observables', lambda n: decoherence.observable_family(state.grid, n), names)
    envelope = decoherence.offdiag_envelope(state, observables[0], t_grid)
    summary = {'kernel': kind, 'params': params, 'grid': state.grid.to_dict(), 'twin_asymmetry': envelope.twin_asymmetry,
               'equilibrium': envelope.equilibrium}
    my_logger.info('Twin asymmetry |D(t) - D(-t)|: {:.3e}'.format(envelope.twin_asymmetry))

    form = args.form or ('exponential' if kind == 'lorentzian' else 'gaussian')
    try:
        fit = decoherence.fit_decoherence_time(envelope.t, envelope.envelope, form)
        summary['fit'] = fit._asdict()
        my_logger.info('Fitted {} decay constant {:.6g} (kernel gives {:.6g}), r^2 {:.6f}'.format(form, fit.rate, expected, fit.r_squared))
    except decoherence.WindowEmptyError as ex:
        my_logger.warning('No decay fit: {}'.format(ex))

    if args.poles:
        poles = _field('poles', lambda s: [complex(x.strip().replace(' ', '')) for x in s.split(',') if x.strip()], args.poles)
        model = decoherence.make_pole_model(poles)
        summary['decoherence_time'] = decoherence.decoherence_time_from_poles(model)
        my_logger.info('Decoherence time from poles: {:.6g}'.format(summary['decoherence_time']))
        try:
            summary['growth_time'] = decoherence.growth_time_from_poles(model)
            my_logger.info('Growth time from poles: {:.6g}'.format(summary['growth_time']))
        except decoherence.NoUpperPoleError as ex:
            my_logger.info('{}'.format(ex))

    settled = decoherence.weak_limit_times(state, observables, t_grid, args.threshold)
    summary['weak_limit'] = [vars(x) for x in settled]
    for item in settled:
        my_logger.info('Weak limit of {}: future {}, past {}'.format(item.name, item.future, item.past))

    decoherence.export_envelope_csv(envelope, args.csv, header)
    if args.json:
        _write_json(args.json, summary)
    return True, args.csv, 'Envelope over {} times'.format(t_grid.size)


def run_wigner(args, header):
    import common.wigner as wigner
    from common.helper import parse_grid
    omegas = _field('omega', _floats, args.omega)
    if not omegas:
        from common.config import ConfigInvalidError
        raise ConfigInvalidError('wigner needs at least one shell energy', field='omega')
    weights = _field('weights', _floats, args.weights) if args.weights else [1.0 / len(omegas)] * len(omegas)
    grid = wigner.default_grid(args.hamiltonian, _field('grid', parse_grid, args.grid), args.extent)
    system = wigner.hamiltonian_system(args.hamiltonian)
    shells = [wigner.wigner_energy_shell(omega, system, args.sigma, grid) for omega in omegas]
    density = shells[0] if len(shells) == 1 else wigner.wigner_mix(weights, shells)
    summary = {'grid': grid.to_dict(), 'hbar_model': grid.hbar_model, 'mass_error': abs(density.mass() - 1), 'shells': []}
    for omega, shell in zip(omegas, shells):
        within = wigner.mass_within(shell, system, omega, wigner.SHELL_WIDTHS * args.sigma)
        thickness = wigner.shell_thickness(shell, system, omega)
        summary['shells'].append({'omega': omega, 'mass_within': within, 'thickness': thickness})
        my_logger.info('Shell {:g}: mass within 3 sigma {:.6f}, thickness {:.4g}'.format(omega, within, thickness))
    my_logger.info('Normalization error {:.3e}'.format(summary['mass_error']))
    if args.transport:
        change = wigner.shell_transport_invariance(density, system, args.transport, args.step, args.threads)
        summary['transport_change'] = change
        my_logger.info('Relative change after transport for t = {:g}: {:.4%}'.format(args.transport, change))
    wigner.export_density_csv(density, args.csv, header)
    if args.json:
        _write_json(args.json, summary)
    return True, args.csv, 'Density on {}x{} cells'.format(*grid.shape)


def run_branch(args, header):
    import common.branchnet as branchnet
    builders = {'reference': branchnet.reference_graph, 'palindrome': branchnet.palindromic_chain}
    if args.graph in builders:
        graph = builders[args.graph]()
    else:
        graph = _field('graph', branchnet.load_graph, args.graph)
    if args.reverse:
        graph = branchnet.time_reverse_graph(graph)
    my_logger.info('{}'.format(graph))
    validation = branchnet.validate_graph(graph)
    summary = {'graph': branchnet.dump_graph(graph), 'valid': validation.valid, 'violations': validation.violations}
    for rule, detail in validation.violations:
        my_logger.error('{}: {}'.format(rule, detail))
    try:
        arrow = branchnet.global_arrow(graph)
        summary['arrow'] = vars(arrow)
        my_logger.info('Global arrow from {}: {}'.format(arrow.source, arrow.orientation))
    except branchnet.NoUniqueSourceError as ex:
        my_logger.info('No global arrow: {}'.format(ex))
    try:
        summary['mirror_symmetric'] = branchnet.is_mirror_symmetric(graph)
    except branchnet.TooLargeForExactError as ex:
        my_logger.warning('{}'.format(ex))
        summary['mirror_symmetric'] = branchnet.is_mirror_symmetric(graph, allow_heuristic=True)
    my_logger.info('Mirror symmetric: {}'.format(summary['mirror_symmetric']))
    audit = branchnet.entropy_audit(graph)
    summary['entropy'] = vars(audit)
    my_logger.info('Entropy nondecreasing along driving paths: {}'.format(audit.monotone))
    if args.query:
        pair = [x.strip() for x in args.query.split(',')]
        if len(pair) != 2:
            from common.config import ConfigInvalidError
            raise ConfigInvalidError('query needs two nodes "a,b"', field='query')
        summary['relation'] = branchnet.causally_related(graph, *pair)
        my_logger.info('{} is {} {}'.format(pair[0], summary['relation'], pair[1]))
    if args.path:
        path = [x.strip() for x in args.path.split(',') if x.strip()]
        summary['information'] = branchnet.observer_information(graph, path)
        my_logger.info('Information along {}: {}'.format(' -> '.join(path), summary['information']))
    _write_json(args.json, summary)
    return validation.valid, args.json, 'Graph {} checked'.format(graph.name)


def run_schulman(args, header):
    import common.schulman as schulman
    pair = _field('na', lambda _: schulman.UrnPair(args.na, args.nb, args.coupling), args.na)
    result = schulman.schulman_ensemble(pair, args.steps, args.runs, args.seed, args.scenario, args.threads)
    summary = {'pair': pair.to_dict(), 'scenario': args.scenario, 'steps': args.steps, 'runs': args.runs,
               'conserved': result.conserved}
    if args.scenario == 'asymmetric_sizes':
        summary.update({'monotone_fraction': result.monotone_fraction, 'displaced_fraction': result.displaced_fraction,
                        'window': result.window, 'tolerance': result.tolerance, 'threshold': result.threshold})
    else:
        summary.update({'symmetric_fraction': result.symmetric_fraction, 'stride': result.stride})
    schulman.export_entropy_csv(result, args.csv, header)
    if args.json:
        _write_json(args.json, summary)
    return result.conserved, args.csv, 'Ran {} urn experiments'.format(args.runs)


def run_reproduce(args, startTick, effective):
    import reproduce
    import tohtml
    names = _field('criteria', reproduce.select_criteria, args.criteria)
    results = reproduce.run_suite(args.suite, args.seed, args.threads, names)
    nowTick = datetime.now()
    error_lines, finalCounts = tohtml.count_errors(results)
    for line in error_lines:
        my_logger.error(line)
    fails = 0
    for key in [key for key in finalCounts.keys()]:
        if finalCounts[key] == 0:
            del finalCounts[key]
            continue
        if any(x in key for x in ['problem', 'fail', 'bad', 'exception']):
            fails += finalCounts[key]
    my_logger.info("\n".join('{}: {}   '.format(x, y) for x, y in sorted(finalCounts.items())))
    html_str = tohtml.renderHtml(results, tool_version, startTick, nowTick, effective)
    lastResultsPage = datetime.strftime(startTick, os.path.join(args.logdir, "TempusReport_%m_%d_%Y_%H%M%S.html"))
    tohtml.writeHtml(html_str, lastResultsPage)
    if args.json:
        _write_json(args.json, {name: {k: v for k, v in item.items() if k != 'messages'} for name, item in results.items()})
    if fails:
        my_logger.error("Reproduction has failed: {} problems found".format(fails))
    return fails == 0, lastResultsPage, '{} criteria, {} problems'.format(len(results), fails)


RUNNERS = {'classify': run_classify, 'cosmo': run_cosmo, 'measure': run_measure, 'deco': run_deco,
           'wigner': run_wigner, 'branch': run_branch, 'schulman': run_schulman}


def main(argslist=None, configfile=None):
    """Main command

    Args:
        argslist ([type], optional): List of arguments in the form of argv. Defaults to None.
        configfile (str, optional): Configuration applied under the command line. Defaults to None.

    Returns:
        (status code, path of the last result, message); 0 success, 1 module error or failed check,
        2 invalid configuration
    """
    from common.config import ConfigInvalidError, convert_config_to_args

    if argslist is None:
        argslist = sys.argv[1:]
    argget, parsers = build_parser()

    # parse...
    args = argget.parse_args(argslist)
    subcommand = args.subcommand
    subparser = parsers[subcommand]

    if configfile is None:
        configfile = args.config

    startTick = datetime.now()

    if configfile:
        actions = {a.dest: a for a in subparser._actions if a.dest not in ['help', 'config']}
        try:
            convert_config_to_args(args, configfile, actions, subcommand, explicit_dests(subparser, argslist))
        except ConfigInvalidError as ex:
            my_logger.error('Configuration invalid ({}): {}'.format(ex.field, ex))
            return 2, None, 'Configuration Invalid'

    standard_out.setLevel(logging.INFO - args.verbose if args.verbose < 3 else logging.DEBUG)

    logpath = args.logdir

    if not os.path.isdir(logpath):
        os.makedirs(logpath)

    fmt = logging.Formatter('%(levelname)s - %(message)s')
    file_handler = logging.FileHandler(datetime.strftime(startTick, os.path.join(logpath, "TempusLog_{}_%m_%d_%Y_%H%M%S.txt".format(subcommand))))
    file_handler.setLevel(min(logging.INFO if not args.debugging else logging.DEBUG, standard_out.level))
    file_handler.setFormatter(fmt)
    my_logger.addHandler(file_handler)

    try:
        return _run(args, subcommand, configfile, startTick, logpath)
    finally:
        my_logger.removeHandler(file_handler)
        file_handler.close()


def _run(args, subcommand, configfile, startTick, logpath):
    from common.config import ConfigInvalidError, convert_args_to_config, config_hash, config_parse_to_dict
    from common.helper import resolve_threads

    # begin logging
    my_logger.info("tempus {}, version {}".format(subcommand, tool_version))
    my_logger.info("")

    args.threads = resolve_threads(args.threads)
    my_config = convert_args_to_config(args, subcommand)
    if not configfile:
        my_logger.info('Writing config file to log directory')
        configfilename = datetime.strftime(startTick, os.path.join(logpath, "ConfigFile_%m_%d_%Y_%H%M%S.ini"))
        with open(configfilename, 'w') as f:
            my_config.write(f)

    run_hash = config_hash(my_config)
    effective = config_parse_to_dict(my_config)
    manifest = {'version': tool_version, 'subcommand': subcommand, 'seed': args.seed, 'config': effective, 'hash': run_hash}
    manifestname = datetime.strftime(startTick, os.path.join(logpath, "Manifest_{}_%m_%d_%Y_%H%M%S.json".format(subcommand)))
    _write_json(manifestname, manifest)
    header = 'tempus {} manifest {}'.format(tool_version, run_hash)

    # start printing config details
    my_logger.info('\n'.join(
        ['{}: {}'.format(x, vars(args)[x]) for x in sorted(list(vars(args).keys() - set(['config']))) if vars(args)[x] not in ['', None]]))
    my_logger.info('Manifest hash: {}'.format(run_hash))
    my_logger.info('Start time: ' + startTick.strftime('%x - %X'))
    my_logger.info("")

    stamp = datetime.strftime(startTick, '%m_%d_%Y_%H%M%S')
    if 'csv' in vars(args) and not args.csv:
        args.csv = os.path.join(logpath, 'Results_{}_{}.csv'.format(subcommand, stamp))
    if subcommand == 'branch' and not args.json:
        args.json = os.path.join(logpath, 'Results_{}_{}.json'.format(subcommand, stamp))

    status_code = 1
    try:
        if subcommand == 'reproduce':
            success, lastResultsPage, message = run_reproduce(args, startTick, effective)
        else:
            success, lastResultsPage, message = RUNNERS[subcommand](args, header)
    except ConfigInvalidError as ex:
        my_logger.error('Configuration invalid ({}): {}'.format(ex.field, ex))
        return 2, None, 'Configuration Invalid'
    except Exception as ex:
        my_logger.log(logging.INFO-1, 'Exception caught while running {}'.format(subcommand), exc_info=1)
        my_logger.error('{} stopped: {}'.format(subcommand, repr(ex)))
        return 1, manifestname, '{} Exception'.format(type(ex).__name__)

    nowTick = datetime.now()
    my_logger.info('\nElapsed time: {}'.format(str(nowTick-startTick).rsplit('.', 1)[0]))

    if not success:
        my_logger.error("{} has failed: {}".format(subcommand, message))
    else:
        my_logger.info("{} has succeeded: {}".format(subcommand, message))
        status_code = 0

    return status_code, lastResultsPage, message


if __name__ == '__main__':
    status_code, lastResultsPage, exit_string = main()
    sys.exit(status_code)
