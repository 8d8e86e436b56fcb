import itertools

import numpy as np
import pytest

from helm.networks import (
    EvidentialLink,
    PropositionNetwork,
    PropositionNode,
    VariableNetwork,
    VariableNode,
)


def make_chain():
    """Two-node chain: root (0.6, 0.4), child rows (0.9, 0.1) / (0.2, 0.8)."""
    return VariableNetwork([
        VariableNode(id="A", label="A", states=["a1", "a2"],
                     prior=np.array([0.6, 0.4])),
        VariableNode(id="B", label="B", states=["b1", "b2"], parents=["A"],
                     cpt=np.array([[0.9, 0.1], [0.2, 0.8]])),
    ])


@pytest.fixture
def chain():
    return make_chain()


def brute_posterior(net: VariableNetwork, like: dict[str, np.ndarray] | None = None):
    """Reference posterior via itertools enumeration; shares nothing with
    the package's inference code paths."""
    like = like or {}
    marg = {n.id: np.zeros(len(n.states)) for n in net.nodes}
    total = 0.0
    for combo in itertools.product(*[range(len(n.states)) for n in net.nodes]):
        assign = {n.id: combo[i] for i, n in enumerate(net.nodes)}
        w = 1.0
        for i, n in enumerate(net.nodes):
            if n.is_root():
                w *= n.prior[combo[i]]
            else:
                row = 0
                for p in n.parents:
                    row = row * len(net.by_id[p].states) + assign[p]
                w *= n.cpt[row, combo[i]]
            if n.id in like:
                w *= like[n.id][combo[i]]
        for i, n in enumerate(net.nodes):
            marg[n.id][combo[i]] += w
        total += w
    return {k: v / total for k, v in marg.items()}


def naive_bayes_pair(seed, n_features=4):
    """Consistent naive-Bayes model as a proposition network and its
    variable-network twin describing the same joint distribution."""
    rng = np.random.default_rng(seed)
    p_class = float(rng.uniform(0.1, 0.9))
    feat_true = rng.uniform(0.05, 0.95, size=n_features)
    feat_false = rng.uniform(0.05, 0.95, size=n_features)

    prop_nodes = [PropositionNode(id="cls", label="class", prior=p_class)]
    links = []
    var_nodes = [VariableNode(id="cls", label="class", states=["yes", "no"],
                              prior=np.array([p_class, 1 - p_class]))]
    for i in range(n_features):
        fid = f"f{i}"
        p_f = feat_true[i] * p_class + feat_false[i] * (1 - p_class)
        lam1 = feat_true[i] * p_class / p_f
        lam2 = (1 - feat_true[i]) * p_class / (1 - p_f)
        prop_nodes.append(PropositionNode(id=fid, label=fid, prior=p_f, askable=True))
        links.append(EvidentialLink(fid, "cls", lambda1=lam1, lambda2=lam2))
        var_nodes.append(VariableNode(
            id=fid, label=fid, states=["detected", "not-detected"], parents=["cls"],
            cpt=np.array([[feat_true[i], 1 - feat_true[i]],
                          [feat_false[i], 1 - feat_false[i]]])))
    return (PropositionNetwork(prop_nodes, links, top=["cls"]),
            VariableNetwork(var_nodes))


def random_tree_network(seed: int, max_nodes: int = 7, max_states: int = 3,
                        reorient: bool = False) -> VariableNetwork:
    """Small random singly-connected network for cross-checking; kept local
    to the tests on purpose (the shipped generator is tested against it)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    cards = rng.integers(2, max_states + 1, size=n)
    parent_of = {0: None}
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        if reorient and rng.random() < 0.5:
            edges.append((i, j))
        else:
            edges.append((j, i))
    parents: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        parents[b].append(a)
    nodes = []
    for i in range(n):
        states = [f"s{k}" for k in range(cards[i])]
        if parents[i]:
            rows = int(np.prod([cards[p] for p in parents[i]]))
            cpt = rng.gamma(1.0, 1.0, size=(rows, cards[i]))
            cpt /= cpt.sum(axis=1, keepdims=True)
            nodes.append(VariableNode(id=f"n{i:02d}", label=f"n{i:02d}", states=states,
                                      parents=[f"n{p:02d}" for p in parents[i]],
                                      cpt=cpt))
        else:
            prior = rng.gamma(1.0, 1.0, size=cards[i])
            prior /= prior.sum()
            nodes.append(VariableNode(id=f"n{i:02d}", label=f"n{i:02d}", states=states,
                                      prior=prior))
    return VariableNetwork(nodes)
