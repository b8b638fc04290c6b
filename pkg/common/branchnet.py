# Copyright Notice:
# Copyright 2026 The tempus contributors.
# License: BSD 3-Clause License. For full text see LICENSE.md

"""
Branch system graphs

A branch graph is a DAG of boxes fed by a single initial instability. Driving edges carry
energy that creates new instabilities downstream; degraded edges carry the energy a box
cannot reuse into sink nodes. The orientation label is conventional: reversing a graph flips
every edge and the label, and leaves its structure untouched.
"""

import json
import logging
from collections import Counter
from types import SimpleNamespace

import networkx as nx
import numpy as np

my_logger = logging.getLogger(__name__)

KINDS = ['initial_instability', 'branch', 'degraded_sink']
TAGS = ['driving', 'degraded']
ORIENTATIONS = ['forward', 'reversed']
BALANCE_TOL = 1e-9
EXACT_LIMIT = 24
ROUND = 9


class UnknownNodeError(Exception):
    """Node id is not in the graph"""
    pass


class NoUniqueSourceError(Exception):
    """Graph has zero or several initial instabilities"""
    pass


class PathViolatesOrderError(Exception):
    """Consecutive path nodes are not joined by an edge in its direction"""
    pass


class TooLargeForExactError(Exception):
    """Graph exceeds the size for an exact mirror symmetry verdict"""
    pass


class BranchGraph:
    """
    Directed graph of branch systems with energy flux edges

    Node attributes: kind, stored_energy, entropy_in, entropy_out.
    Edge attributes: amount, tag.
    """
    def __init__(self, graph=None, orientation='forward', name='graph'):
        if orientation not in ORIENTATIONS:
            raise ValueError('Unknown orientation {}'.format(orientation))
        self.graph = graph if graph is not None else nx.DiGraph()
        self.orientation = orientation
        self.name = name

    def add_system(self, node_id, kind='branch', stored_energy=0.0, entropy_in=0.0, entropy_out=0.0):
        if kind not in KINDS:
            raise ValueError('Unknown kind {} for {}'.format(kind, node_id))
        self.graph.add_node(node_id, kind=kind, stored_energy=float(stored_energy),
                            entropy_in=float(entropy_in), entropy_out=float(entropy_out))
        return self

    def add_flux(self, source, target, amount, tag='driving'):
        if tag not in TAGS:
            raise ValueError('Unknown tag {} on {}->{}'.format(tag, source, target))
        for node in (source, target):
            if node not in self.graph:
                raise UnknownNodeError('Flux {}->{} names unknown node {}'.format(source, target, node))
        self.graph.add_edge(source, target, amount=float(amount), tag=tag)
        return self

    def nodes_of_kind(self, kind):
        return [n for n, d in self.graph.nodes(data=True) if d['kind'] == kind]

    def driving_subgraph(self):
        edges = [(u, v) for u, v, d in self.graph.edges(data=True) if d['tag'] == 'driving']
        sub = nx.DiGraph()
        sub.add_nodes_from(self.graph.nodes)
        sub.add_edges_from(edges)
        return sub

    def forward_view(self):
        """The graph with edges pointing away from the instability"""
        return self if self.orientation == 'forward' else time_reverse_graph(self)

    def __len__(self):
        return self.graph.number_of_nodes()

    def __contains__(self, node):
        return node in self.graph

    def __repr__(self):
        return 'BranchGraph({}, {} nodes, {} edges, {})'.format(self.name, len(self), self.graph.number_of_edges(),
                                                              self.orientation)


def _production(data):
    return data['entropy_out'] - data['entropy_in']


def validate_graph(graph):
    """
    Check structure, balance and entropy laws on the forward view of a graph

    Violations are returned, never raised.

    :return: SimpleNamespace(valid, violations [(rule, detail)], counts Counter)
    """
    view = graph.forward_view().graph
    violations = []
    counts = Counter()

    def flag(rule, detail):
        violations.append((rule, detail))
        counts['fail' + rule] += 1

    if not nx.is_directed_acyclic_graph(view):
        flag('Acyclicity', 'cycle {}'.format(nx.find_cycle(view)))
    sources = [n for n, d in view.nodes(data=True) if d['kind'] == 'initial_instability']
    if len(sources) != 1:
        flag('UniqueSource', '{} initial instabilities: {}'.format(len(sources), sources))

    for u, v, d in view.edges(data=True):
        if not d['amount'] > 0:
            flag('Amount', '{}->{} carries {}'.format(u, v, d['amount']))
        if d['tag'] == 'degraded':
            if view.nodes[v]['kind'] != 'degraded_sink':
                flag('DegradedPlacement', 'degraded edge {}->{} ends in a {}'.format(u, v, view.nodes[v]['kind']))
            if view.nodes[u]['kind'] != 'branch':
                flag('DegradedPlacement', 'degraded edge {}->{} starts at a {}'.format(u, v, view.nodes[u]['kind']))

    for node, d in view.nodes(data=True):
        if d['stored_energy'] < 0:
            flag('StoredEnergy', '{} stores {}'.format(node, d['stored_energy']))
        if d['kind'] != 'branch':
            continue
        incoming = [e for e in view.in_edges(node, data=True)]
        if not any(e[2]['tag'] == 'driving' for e in incoming):
            flag('DrivingInput', '{} has no incoming driving edge'.format(node))
        inflow = sum(e[2]['amount'] for e in incoming)
        outflow = sum(e[2]['amount'] for e in view.out_edges(node, data=True))
        defect = inflow - d['stored_energy'] - outflow
        if abs(defect) > BALANCE_TOL * max(1.0, inflow):
            flag('EnergyBalance', '{}: in {:.12g}, stored {:.12g}, out {:.12g}'.format(node, inflow, d['stored_energy'], outflow))
        if _production(d) < 0:
            flag('Entropy', '{}: entropy falls from {} to {}'.format(node, d['entropy_in'], d['entropy_out']))

    counts['passGraph' if not violations else 'failGraph'] += 1
    for rule, detail in violations:
        my_logger.log(logging.INFO-1, '{} violation in {}: {}'.format(rule, graph.name, detail))
    return SimpleNamespace(valid=not violations, violations=violations, counts=counts)


def _check_node(graph, node):
    if node not in graph:
        raise UnknownNodeError('{} is not a node of {}'.format(node, graph.name))


def causally_related(graph, a, b):
    """
    cause_of if a reaches b along driving edges, effect_of if b reaches a, else unrelated

    A node is not its own cause.
    """
    _check_node(graph, a)
    _check_node(graph, b)
    if a == b:
        return 'unrelated'
    driving = graph.driving_subgraph()
    if nx.has_path(driving, a, b):
        return 'cause_of'
    if nx.has_path(driving, b, a):
        return 'effect_of'
    return 'unrelated'


def global_arrow(graph):
    """
    Locate the initial instability and read the orientation off the edge directions

    :return: SimpleNamespace(source, orientation, unreached, label_agrees)
    :raises NoUniqueSourceError: zero or several instabilities
    """
    sources = graph.nodes_of_kind('initial_instability')
    if len(sources) != 1:
        raise NoUniqueSourceError('{} has {} initial instabilities: {}'.format(graph.name, len(sources), sources))
    source = sources[0]
    g = graph.graph
    orientation = 'forward' if g.out_degree(source) >= g.in_degree(source) else 'reversed'
    driving = graph.driving_subgraph()
    if orientation == 'reversed':
        driving = driving.reverse(copy=False)
    reached = nx.descendants(driving, source) | {source}
    unreached = [(u, v) for u, v in driving.edges if u not in reached]
    if unreached:
        my_logger.warning('Driving edges off every path from {}: {}'.format(source, unreached))
    agrees = orientation == graph.orientation
    if not agrees:
        my_logger.warning('{} is labelled {} but its edges point {}'.format(graph.name, graph.orientation, orientation))
    return SimpleNamespace(source=source, orientation=orientation, unreached=unreached, label_agrees=agrees)


def observer_information(graph, path):
    """
    Cumulative count of driving edges entering the path from nodes off the path

    :raises PathViolatesOrderError: a consecutive pair is not joined by an edge in path order
    :raises UnknownNodeError: a path node is not in the graph
    """
    path = list(path)
    for node in path:
        _check_node(graph, node)
    g = graph.graph
    for u, v in zip(path, path[1:]):
        if not g.has_edge(u, v):
            raise PathViolatesOrderError('No edge {}->{} in {}'.format(u, v, graph.name))
    on_path = set(path)
    series, total = [], 0
    for node in path:
        total += sum(1 for u, _, d in g.in_edges(node, data=True) if d['tag'] == 'driving' and u not in on_path)
        series.append(total)
    return series


def time_reverse_graph(graph):
    """Flip every edge, swap each node's entropies and flip the orientation label"""
    reversed_graph = graph.graph.reverse(copy=True)
    for node, d in reversed_graph.nodes(data=True):
        d['entropy_in'], d['entropy_out'] = d['entropy_out'], d['entropy_in']
    orientation = 'reversed' if graph.orientation == 'forward' else 'forward'
    return BranchGraph(reversed_graph, orientation, name=graph.name)


def _node_label(d):
    return (d['kind'], round(d['stored_energy'], ROUND), round(abs(_production(d)), ROUND))


def _edge_label(d):
    return (d['tag'], round(d['amount'], ROUND))


def is_mirror_symmetric(graph, allow_heuristic=False):
    """
    True iff the graph is isomorphic to its own reversal, matching node kinds, stored energy,
    entropy production magnitude, edge tags and amounts

    :raises TooLargeForExactError: more than 24 nodes and allow_heuristic is False
    """
    reversed_graph = time_reverse_graph(graph).graph
    g = graph.graph
    if len(g) <= EXACT_LIMIT:
        return nx.is_isomorphic(g, reversed_graph,
                                node_match=lambda x, y: _node_label(x) == _node_label(y),
                                edge_match=lambda x, y: _edge_label(x) == _edge_label(y))
    if not allow_heuristic:
        raise TooLargeForExactError('{} has {} nodes; exact verdicts stop at {}'.format(graph.name, len(g), EXACT_LIMIT))
    labelled = []
    for h in (g, reversed_graph):
        copy = nx.DiGraph()
        copy.add_nodes_from((n, {'label': str(_node_label(d))}) for n, d in h.nodes(data=True))
        copy.add_edges_from((u, v, {'label': str(_edge_label(d))}) for u, v, d in h.edges(data=True))
        labelled.append(nx.weisfeiler_lehman_graph_hash(copy, node_attr='label', edge_attr='label'))
    my_logger.warning('Mirror symmetry of {} decided heuristically'.format(graph.name))
    return labelled[0] == labelled[1]


def entropy_audit(graph):
    """
    Cumulative entropy production along driving paths from the instability

    :return: SimpleNamespace(monotone, cumulative {node: largest cumulative production on a path to it}, violations)
    """
    view = graph.forward_view()
    driving = view.driving_subgraph()
    if not nx.is_directed_acyclic_graph(driving):
        return SimpleNamespace(monotone=False, cumulative={}, violations=['driving edges form a cycle'])
    sources = view.nodes_of_kind('initial_instability')
    on_paths = set()
    for source in sources:
        on_paths |= nx.descendants(driving, source) | {source}
    data = view.graph.nodes
    cumulative, violations = {}, []
    for node in nx.topological_sort(driving):
        if node not in on_paths:
            continue
        before = [cumulative[u] for u in driving.predecessors(node) if u in cumulative]
        step = _production(data[node])
        cumulative[node] = (max(before) if before else 0.0) + step
        if step < 0:
            violations.append('{} lowers entropy by {:.6g}'.format(node, -step))
    return SimpleNamespace(monotone=not violations, cumulative=cumulative, violations=violations)


def reference_graph():
    """
    Six boxes fed by one instability: two parallel cascades that merge in the last box

    I drives A and B; A -> C -> D -> F and B -> E -> F. Every box sends its degraded energy
    to its own sink.
    """
    g = BranchGraph(name='reference')
    g.add_system('I', 'initial_instability', 0.0, 0.0, 1.0)
    boxes = {'A': (2.0, 1.0, 2.0), 'B': (2.0, 1.0, 1.5), 'C': (1.0, 2.0, 2.5),
             'D': (0.5, 2.5, 3.0), 'E': (1.0, 1.5, 2.5), 'F': (1.0, 3.0, 4.0)}
    for box, (stored, s_in, s_out) in boxes.items():
        g.add_system(box, 'branch', stored, s_in, s_out)
        g.add_system('sink_' + box, 'degraded_sink')
    for u, v, amount in [('I', 'A', 10.0), ('I', 'B', 8.0), ('A', 'C', 5.0), ('C', 'D', 3.0), ('D', 'F', 1.5),
                         ('B', 'E', 4.0), ('E', 'F', 2.0)]:
        g.add_flux(u, v, amount)
    for box, amount in [('A', 3.0), ('B', 2.0), ('C', 1.0), ('D', 1.0), ('E', 1.0), ('F', 2.5)]:
        g.add_flux(box, 'sink_' + box, amount, 'degraded')
    return g


def palindromic_chain(half_length=2):
    """
    source -> b1 -> ... -> bk -> ... -> b1' -> source', mirror symmetric by construction

    Two instabilities, so it defines no global arrow; the composite is symmetric instead.
    """
    g = BranchGraph(name='palindrome')
    left = ['b{}'.format(i) for i in range(1, half_length + 1)]
    right = ["b{}'".format(i) for i in range(half_length - 1, 0, -1)]
    chain = ['source'] + left + right + ["source'"]
    g.add_system('source', 'initial_instability')
    for node in chain[1:-1]:
        g.add_system(node, 'branch', 0.0, 0.0, 0.0)
    g.add_system("source'", 'initial_instability')
    for u, v in zip(chain, chain[1:]):
        g.add_flux(u, v, 1.0)
    return g


def random_branch_graph(n_branches, rng, p_edge=0.3, n_sinks=2, p_degraded=0.8):
    """
    Random valid graph: every branch gets a driving parent among earlier nodes, extra forward
    edges appear with probability p_edge and inflows are split by Dirichlet shares so every box
    balances
    """
    if n_branches < 1:
        raise ValueError('Need at least one branch')
    g = BranchGraph(name='random{}'.format(n_branches))
    g.add_system('S', 'initial_instability', 0.0, 0.0, float(rng.uniform(0, 1)))
    branches = ['b{}'.format(i) for i in range(n_branches)]
    sinks = ['sink{}'.format(i) for i in range(n_sinks)]
    for sink in sinks:
        g.add_system(sink, 'degraded_sink')
    order = ['S'] + branches
    children = {node: [] for node in order}
    for i, node in enumerate(branches, start=1):
        parent = order[rng.integers(0, i)]
        children[parent].append(node)
        for earlier in order[:i]:
            if earlier != parent and rng.random() < p_edge:
                children[earlier].append(node)
        s_in = float(rng.uniform(0, 5))
        g.add_system(node, 'branch', 0.0, s_in, s_in + float(rng.exponential(1.0)))

    inflow = {node: 0.0 for node in branches}
    for target in children['S']:
        amount = float(rng.uniform(1.0, 10.0))
        g.add_flux('S', target, amount)
        inflow[target] += amount
    # earlier branches are complete before any later one splits its inflow
    for node in branches:
        targets = children[node]
        degraded = sinks[rng.integers(0, n_sinks)] if rng.random() < p_degraded else None
        shares = rng.dirichlet(np.ones(1 + len(targets) + (degraded is not None)))
        total = inflow[node]
        g.graph.nodes[node]['stored_energy'] = total * shares[0]
        for k, target in enumerate(targets, start=1):
            g.add_flux(node, target, total * shares[k])
            inflow[target] += total * shares[k]
        if degraded is not None:
            g.add_flux(node, degraded, total * shares[-1], 'degraded')
    return g


def dump_graph(graph, path=None):
    """Serialize to the JSON layout {orientation, nodes: [...], edges: [...]}; returns the dict"""
    data = {
        'name': graph.name,
        'orientation': graph.orientation,
        'nodes': [{'id': n, 'kind': d['kind'], 'stored_energy': d['stored_energy'], 'entropy_in': d['entropy_in'],
                   'entropy_out': d['entropy_out']} for n, d in graph.graph.nodes(data=True)],
        'edges': [{'source': u, 'target': v, 'amount': d['amount'], 'tag': d['tag']}
                  for u, v, d in graph.graph.edges(data=True)],
    }
    if path:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2)
    return data


def load_graph(source):
    """Build a BranchGraph from a JSON file path or an already parsed dict"""
    if isinstance(source, dict):
        data = source
    else:
        with open(source, encoding='utf-8') as f:
            data = json.load(f)
    try:
        g = BranchGraph(orientation=data.get('orientation', 'forward'), name=data.get('name', 'graph'))
        for node in data['nodes']:
            g.add_system(node['id'], node.get('kind', 'branch'), node.get('stored_energy', 0.0),
                         node.get('entropy_in', 0.0), node.get('entropy_out', 0.0))
        for edge in data['edges']:
            g.add_flux(edge['source'], edge['target'], edge['amount'], edge.get('tag', 'driving'))
    except KeyError as ex:
        raise ValueError('Graph description is missing field {}'.format(ex))
    return g
