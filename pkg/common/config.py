# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

import argparse
import configparser
import json
import logging
import os

from common.helper import canonical_hash

my_logger = logging.getLogger(__name__)

config_struct = {
    'Tool': ['verbose'],
    'Run': ['logdir', 'debugging', 'seed', 'threads', 'json'],
    'Classify': ['system', 'step', 'horizon', 'tol_close', 'tri_samples', 'symmetry_tol', 'csv'],
    'Cosmo': ['k', 'm', 'kappa', 'cosmological_constant', 'potential', 'v0', 'ic', 't_end', 't_start', 'step',
              'symmetry_tol', 'big_bang', 'delta', 'csv'],
    'Measure': ['mode', 'cube_side', 'eps', 'n', 'k', 'm', 'n_axis', 'n_time', 'dtau', 'sampler', 't_half', 'refine', 'chunk',
                'csv'],
    'Deco': ['kernel', 't_grid', 'observables', 'threshold', 'poles', 'form', 'csv'],
    'Wigner': ['hamiltonian', 'omega', 'weights', 'sigma', 'grid', 'extent', 'transport', 'step', 'csv'],
    'Branch': ['graph', 'query', 'path', 'reverse'],
    'Schulman': ['na', 'nb', 'coupling', 'steps', 'runs', 'scenario', 'csv'],
    'Reproduce': ['suite', 'criteria'],
}

# excluded from the manifest hash: where output goes and how loudly
hash_exempt = {'Tool': ['verbose'], 'Run': ['logdir', 'debugging', 'json', 'threads']}
hash_exempt_options = ['csv']

config_options = {section: set(options) for section, options in config_struct.items()}


class ConfigInvalidError(Exception):
    """Configuration does not fit the subcommand's options"""
    def __init__(self, msg, field=None):
        super().__init__(msg)
        self.field = field


def section_for(subcommand):
    return subcommand.capitalize()


def convert_args_to_config(args, subcommand):
    """Tool, Run and the subcommand's section as a ConfigParser of strings"""
    my_config = configparser.ConfigParser()
    for section in ['Tool', 'Run', section_for(subcommand)]:
        my_config.add_section(section)
        for option in config_struct[section]:
            my_var = vars(args).get(option)
            if isinstance(my_var, list):
                my_var = ' '.join(str(x) for x in my_var)
            my_config.set(section, option, str(my_var) if my_var is not None else '')
    return my_config


def read_config(config):
    """Load a ConfigParser from a parser, an INI or JSON path, or a dict (a manifest's 'config' is used when present)"""
    my_config = configparser.ConfigParser()
    if isinstance(config, configparser.ConfigParser):
        return config
    if isinstance(config, str):
        if not os.path.isfile(config):
            raise ConfigInvalidError('Config file {} not found'.format(config))
        if config.lower().endswith('.json'):
            try:
                with open(config, 'r') as f:
                    config = json.load(f)
            except ValueError as ex:
                raise ConfigInvalidError('Cannot parse {}: {}'.format(config, ex))
        else:
            try:
                with open(config, 'r') as f:
                    my_config.read_file(f)
            except configparser.Error as ex:
                raise ConfigInvalidError('Cannot parse {}: {}'.format(config, ex))
            return my_config
    if isinstance(config, dict):
        if 'config' in config and isinstance(config['config'], dict):
            config = config['config']
        my_config.read_dict({section: {k: '' if v is None else str(v) for k, v in options.items()}
                             for section, options in config.items() if isinstance(options, dict)})
        return my_config
    raise ConfigInvalidError('Unsupported configuration source {}'.format(type(config).__name__))


def _convert(action, value):
    if isinstance(action, argparse._CountAction):
        return int(value)
    if action.nargs == 0:
        if value.lower() in ['1', 'yes', 'true', 'on']:
            return action.const if action.const is not None else True
        if value.lower() in ['0', 'no', 'false', 'off']:
            return action.default
        raise ValueError('{} is not a boolean'.format(value))
    if action.type is not None:
        return action.type(value)
    return value


def convert_config_to_args(args, config, actions, subcommand, explicit=()):
    """
    Apply a configuration to parsed arguments

    Options given explicitly on the command line win. Sections of other subcommands are
    checked for unknown options but not applied.

    :param actions: dict of dest -> argparse action of the subcommand's parser
    :param explicit: dests given on the command line
    :raises ConfigInvalidError: unknown sections or options, or values that do not parse
    """
    my_config = read_config(config)
    problems = []
    active = ['Tool', 'Run', section_for(subcommand)]
    for section in my_config.sections():
        if section not in config_struct:
            if section.lower() not in ['manifest']:
                problems.append(('{}'.format(section), 'Section {} not supported'.format(section)))
            continue
        for option in my_config[section]:
            name = option.lower()
            if name not in config_options[section]:
                if name not in ['version', 'copyright']:
                    problems.append(('{}.{}'.format(section, option), 'Option {} not supported in [{}]'.format(option, section)))
                continue
            value = my_config[section][option]
            if section not in active or name in explicit or value in ['', None, 'None']:
                continue
            if name not in actions:
                problems.append(('{}.{}'.format(section, option), 'Option {} does not apply to {}'.format(option, subcommand)))
                continue
            try:
                setattr(args, actions[name].dest, _convert(actions[name], value))
            except (TypeError, ValueError) as ex:
                problems.append(('{}.{}'.format(section, option), 'Bad value {!r} for {}: {}'.format(value, option, ex)))
    for field, message in problems:
        my_logger.error(message)
    if problems:
        raise ConfigInvalidError('; '.join(m for _, m in problems), field=problems[0][0])
    return args


def config_parse_to_dict(config):
    my_dict = {}
    for section in config.sections():
        my_dict[section] = {}
        for option in [x for x in config[section] if x not in ['version', 'copyright']]:
            my_dict[section][option] = config[section][option]
    return my_dict


def config_hash(config):
    """SHA-256 of the configuration without output paths or logging options"""
    my_dict = config_parse_to_dict(config)
    for section, options in hash_exempt.items():
        for option in options:
            my_dict.get(section, {}).pop(option, None)
    for options in my_dict.values():
        for option in hash_exempt_options:
            options.pop(option, None)
    return canonical_hash(my_dict)
