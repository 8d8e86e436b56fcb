"""Exact posterior computation by full enumeration of the joint.

This is the reference answer every inference engine in the package is
tested against, so it deliberately shares no propagation machinery with
them: it walks every joint state combination, multiplies prior, table
and likelihood entries, and normalizes the accumulated marginals. The
state space is capped; this exists for desk-scale verification, not
production inference.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import EnumerationLimitError, InconsistentEvidenceError
from .networks import (
    Evidence,
    NetworkIndex,
    VariableNetwork,
    likelihood_vector,
    require_valid,
)

ENUMERATION_CAP = 1 << 24


def _flat_encoding(idx: NetworkIndex):
    card = idx.card
    par_idx = []
    rstride = []
    par_ptr = [0]
    tab_flat = []
    tab_ptr = [0]
    for i in range(len(idx.ids)):
        parents = idx.parents[i]
        stride = 1
        strides = []
        for p in parents[::-1]:
            strides.append(stride)
            stride *= int(card[p])
        par_idx.extend(int(p) for p in parents)
        rstride.extend(reversed(strides))
        par_ptr.append(len(par_idx))
        tab_flat.append(idx.tables[i].ravel())
        tab_ptr.append(tab_ptr[-1] + idx.tables[i].size)
    return (
        card,
        np.array(par_idx, dtype=np.int64),
        np.array(par_ptr, dtype=np.int64),
        np.array(rstride, dtype=np.int64),
        np.array(tab_ptr, dtype=np.int64),
        np.concatenate(tab_flat) if tab_flat else np.zeros(0),
    )


def _enumerate(idx: NetworkIndex, like: np.ndarray):
    card, par_idx, par_ptr, rstride, tab_ptr, tab_flat = _flat_encoding(idx)
    return kernels.enumerate_marginals(
        card, par_idx, par_ptr, rstride, tab_ptr, tab_flat, like, idx.joint_size)


def _uniform_likelihood(idx: NetworkIndex) -> np.ndarray:
    max_states = int(idx.card.max())
    like = np.zeros((len(idx.ids), max_states))
    for i in range(len(idx.ids)):
        like[i, : idx.card[i]] = 1.0
    return like


def joint_size(network: VariableNetwork) -> int:
    return NetworkIndex(network).joint_size


def exact_posterior(network: VariableNetwork, evidence: list[Evidence] | tuple = ()):
    """P(node | evidence) for every node, by enumeration.

    Evidence entries on the same node multiply. Raises
    InconsistentEvidenceError when the conditioned joint has zero mass
    and EnumerationLimitError when the state space exceeds the cap.
    """
    require_valid(network)
    idx = NetworkIndex(network)
    if idx.joint_size > ENUMERATION_CAP:
        raise EnumerationLimitError(
            f"joint has {idx.joint_size} configurations, cap is {ENUMERATION_CAP}")

    like = _uniform_likelihood(idx)
    graded = [ev for ev in evidence if ev.form == "graded"]
    priors: dict[str, np.ndarray] = {}
    if graded:
        base_marg, base_total = _enumerate(idx, _uniform_likelihood(idx))
        for ev in graded:
            i = idx.index[network.node(ev.node).id]
            priors[ev.node] = base_marg[i, : idx.card[i]] / base_total
    for ev in evidence:
        node = network.node(ev.node)
        vec = likelihood_vector(ev, node.states, priors.get(ev.node))
        i = idx.index[node.id]
        like[i, : idx.card[i]] *= vec

    marginals, total = _enumerate(idx, like)
    if total <= 0.0:
        raise InconsistentEvidenceError("evidence excludes all joint probability mass")
    return {
        node_id: marginals[i, : idx.card[i]] / total
        for i, node_id in enumerate(idx.ids)
    }


def prior_marginals(network: VariableNetwork):
    return exact_posterior(network, ())
