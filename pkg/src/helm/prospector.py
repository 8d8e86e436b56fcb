"""Subjective-Bayes updating over proposition networks.

Each evidential link maps the antecedent's current probability to a
posterior contribution for its consequent by piecewise-linear
interpolation through three anchors: antecedent certainly false gives
lambda2, antecedent at its prior gives the consequent's prior,
antecedent certainly true gives lambda1. Independent contributions on
one consequent combine through posterior-odds products. Changes flow
forward through the acyclic network in topological order, so each node
is revised at most once per propagation call.
"""

from __future__ import annotations

from .errors import DegenerateLinkError, EvidenceFormError, NotAskableError
from .networks import (
    CLAMP,
    RANK_DECIMALS,
    PropositionNetwork,
    clamp_probability,
    require_valid,
)
from .networks import _proposition_topo_order as _topo_order

CHANGE_THRESHOLD = 1e-12


def _odds(p: float) -> float:
    return p / (1.0 - p)


def _from_odds(o: float) -> float:
    return o / (1.0 + o)


def interpolate_posterior(prior: float, p_e: float, lambda1: float, lambda2: float,
                          p_obs: float) -> float:
    """Posterior for a consequent given one link and an uncertain
    antecedent at probability p_obs; p_e is the antecedent's prior."""
    if not CLAMP <= p_e <= 1.0 - CLAMP:
        raise DegenerateLinkError(
            f"antecedent prior {p_e} makes the interpolation anchors degenerate")
    if p_obs <= p_e:
        value = lambda2 + (p_obs / p_e) * (prior - lambda2)
    else:
        value = prior + ((p_obs - p_e) / (1.0 - p_e)) * (lambda1 - prior)
    return clamp_probability(value)


def combine_evidence(prior: float, contributions: list[float]) -> float:
    """Fold independent per-link posteriors into one probability via
    odds products; an empty list returns the prior."""
    prior_odds = _odds(clamp_probability(prior))
    combined = prior_odds
    for c in contributions:
        combined *= _odds(clamp_probability(c)) / prior_odds
    return clamp_probability(_from_odds(combined))


class PropositionState:
    """Current probabilities plus per-link contributions and the dirty
    set awaiting propagation. Cloneable for what-if simulation."""

    def __init__(self, network: PropositionNetwork):
        self.network = network
        self.prob: dict[str, float] = {}
        self.contrib: dict[int, float] = {}
        self.posted: dict[str, float] = {}
        self.dirty: set[str] = set()
        self.last_propagation_visits = 0
        self._out: dict[str, list[int]] = {n.id: [] for n in network.nodes}
        self._in: dict[str, list[int]] = {n.id: [] for n in network.nodes}
        for i, link in enumerate(network.links):
            self._out[link.antecedent].append(i)
            self._in[link.consequent].append(i)
        self._topo = _topo_order(network)

    def clone(self) -> "PropositionState":
        other = PropositionState.__new__(PropositionState)
        other.network = self.network
        other.prob = dict(self.prob)
        other.contrib = dict(self.contrib)
        other.posted = dict(self.posted)
        other.dirty = set(self.dirty)
        other.last_propagation_visits = self.last_propagation_visits
        other._out = self._out
        other._in = self._in
        other._topo = self._topo
        return other

    def probability(self, node_id: str) -> float:
        self.network.node(node_id)
        return self.prob[node_id]

    def observed_nodes(self) -> set[str]:
        return set(self.posted)


def init_state(network: PropositionNetwork) -> PropositionState:
    require_valid(network)
    state = PropositionState(network)
    for node in network.nodes:
        state.prob[node.id] = clamp_probability(node.prior)
    for i, link in enumerate(network.links):
        state.contrib[i] = clamp_probability(network.by_id[link.consequent].prior)
    return state


def post_graded_evidence(state: PropositionState, node_id: str,
                         p_obs: float) -> PropositionState:
    """Set an askable node's probability from an operator report;
    re-answering replaces the previous value."""
    node = state.network.node(node_id)
    if not node.askable:
        raise NotAskableError(
            f"{node_id!r} is not askable; interior propositions take values "
            "only via propagation")
    if not 0.0 <= p_obs <= 1.0:
        raise EvidenceFormError(f"graded probability {p_obs} outside [0, 1]")
    state.prob[node_id] = clamp_probability(p_obs)
    state.posted[node_id] = float(p_obs)
    state.dirty.add(node_id)
    return state


def propagate(state: PropositionState) -> PropositionState:
    """Flush the dirty set forward in topological order. Every node is
    visited at most once; consequents whose combined value moves by more
    than the change threshold become dirty in turn."""
    net = state.network
    visits = 0
    for node_id in state._topo:
        if node_id not in state.dirty:
            continue
        state.dirty.discard(node_id)
        visits += 1
        for i in state._out[node_id]:
            link = net.links[i]
            antecedent = net.by_id[link.antecedent]
            consequent = net.by_id[link.consequent]
            state.contrib[i] = interpolate_posterior(
                clamp_probability(consequent.prior),
                antecedent.prior,
                link.lambda1,
                link.lambda2,
                state.prob[link.antecedent],
            )
            updated = combine_evidence(
                consequent.prior,
                [state.contrib[k] for k in state._in[link.consequent]],
            )
            if abs(updated - state.prob[link.consequent]) > CHANGE_THRESHOLD:
                state.dirty.add(link.consequent)
            state.prob[link.consequent] = updated
    state.last_propagation_visits = visits
    return state


def rank_classes(state: PropositionState) -> list[tuple[str, float]]:
    """Designated top-level propositions ordered by probability,
    descending, ties broken by ascending id. Ordering quantizes away
    probability differences below clamp noise."""
    pairs = [(t, state.prob[t]) for t in state.network.top]
    return sorted(pairs, key=lambda kv: (-round(kv[1], RANK_DECIMALS), kv[0]))
