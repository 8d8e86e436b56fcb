"""Belief maintenance over singly-connected variable networks.

Each node keeps two support vectors: diagnostic support collected from
its descendants and causal support collected from its ancestors. Belief
is their normalized product. Evidence perturbs a node's support, which
activates it; activation recomputes the node's belief and its outgoing
messages, and any neighbor whose inbound message moved beyond tolerance
is scheduled for activation in turn. Propagation runs until the agenda
drains. The scheduling policy (stack, queue, or deduplicating queue)
changes the number of activations needed, never the fixpoint.
"""

from __future__ import annotations

import time
from collections import OrderedDict, deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import (
    InconsistentEvidenceError,
    NonConvergenceError,
    StaleReadError,
    UnknownNodeError,
)
from .networks import (
    RANK_DECIMALS,
    Evidence,
    NetworkIndex,
    VariableNetwork,
    likelihood_vector,
    require_valid,
)

DEFAULT_TOLERANCE = 1e-9
MAX_ACTIVATIONS = 10 ** 6


class SchedulerPolicy(str, Enum):
    LIFO = "lifo"
    FIFO = "fifo"
    FIFO_DEDUP = "fifo-dedup"


class BeliefState:
    """Mutable inference state for one network; single-threaded, cheaply
    cloneable for what-if simulation."""

    def __init__(self, network: VariableNetwork, idx: NetworkIndex):
        self.network = network
        self.idx = idx
        n = len(idx.ids)
        self.diag: list[np.ndarray] = [np.ones(int(idx.card[i])) for i in range(n)]
        self.caus: list[np.ndarray] = [np.zeros(int(idx.card[i])) for i in range(n)]
        self.bel: list[np.ndarray] = [np.zeros(int(idx.card[i])) for i in range(n)]
        # inbound messages, keyed by sender index
        self.pi_in: list[dict[int, np.ndarray]] = [{} for _ in range(n)]
        self.lam_in: list[dict[int, np.ndarray]] = [{} for _ in range(n)]
        self.evidence_vec: dict[int, np.ndarray] = {}
        self.evidence_log: list[Evidence] = []
        self.agenda: list[int] = []
        self.activations = 0
        self.prior_bel: list[np.ndarray] = []

    def clone(self) -> "BeliefState":
        other = BeliefState(self.network, self.idx)
        other.diag = [v.copy() for v in self.diag]
        other.caus = [v.copy() for v in self.caus]
        other.bel = [v.copy() for v in self.bel]
        other.pi_in = [{k: v.copy() for k, v in d.items()} for d in self.pi_in]
        other.lam_in = [{k: v.copy() for k, v in d.items()} for d in self.lam_in]
        other.evidence_vec = {k: v.copy() for k, v in self.evidence_vec.items()}
        other.evidence_log = list(self.evidence_log)
        other.agenda = list(self.agenda)
        other.activations = self.activations
        other.prior_bel = [v.copy() for v in self.prior_bel]
        return other

    def at_equilibrium(self) -> bool:
        return not self.agenda

    def node_index(self, node_id: str) -> int:
        try:
            return self.idx.index[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def observed_nodes(self) -> set[str]:
        return {ev.node for ev in self.evidence_log}


def _normalize(vec: np.ndarray, what: str) -> np.ndarray:
    total = vec.sum()
    if total <= 0.0:
        raise InconsistentEvidenceError(f"{what} vanished: evidence is contradictory")
    return vec / total


def init_equilibrium(network: VariableNetwork) -> BeliefState:
    """Build the no-evidence equilibrium: diagnostic support uniform,
    causal support swept down from the priors, beliefs equal to prior
    marginals, agenda empty."""
    require_valid(network)
    idx = NetworkIndex(network)
    state = BeliefState(network, idx)
    for x in range(len(idx.ids)):
        for c in idx.children[x]:
            state.lam_in[x][int(c)] = np.full(int(idx.card[x]), 1.0 / int(idx.card[x]))
    for x in idx.topo:
        if idx.parents[x].size == 0:
            state.caus[x] = idx.tables[x][0].copy()
        else:
            parent_pi = _padded_parent_messages(state, x)
            state.caus[x], _ = kernels.node_update(
                idx.tables[x], idx.digits[x], parent_pi,
                np.ones(int(idx.card[x])))
        state.diag[x] = _diagnostic_support(state, x)
        state.bel[x] = _normalize(state.caus[x] * state.diag[x], f"belief at {idx.ids[x]}")
        for c in idx.children[x]:
            state.pi_in[int(c)][x] = _normalize(state.caus[x].copy(),
                                                f"causal message from {idx.ids[x]}")
    state.prior_bel = [v.copy() for v in state.bel]
    return state


def _padded_parent_messages(state: BeliefState, x: int) -> np.ndarray:
    idx = state.idx
    parents = idx.parents[x]
    width = max((int(idx.card[p]) for p in parents), default=1)
    out = np.zeros((parents.size, width))
    for j, p in enumerate(parents):
        out[j, : int(idx.card[p])] = state.pi_in[x][int(p)]
    return out


def _diagnostic_support(state: BeliefState, x: int) -> np.ndarray:
    idx = state.idx
    vec = state.evidence_vec.get(x, np.ones(int(idx.card[x]))).copy()
    for c in idx.children[x]:
        vec *= state.lam_in[x][int(c)]
    return vec


def post_evidence(state: BeliefState, evidence: Evidence) -> BeliefState:
    """Fold evidence into the node's support and put the node on the
    agenda; beliefs are only recomputed during propagation. Evidence on
    the same node accumulates multiplicatively."""
    x = state.node_index(evidence.node)
    node = state.network.nodes[x]
    vec = likelihood_vector(evidence, node.states, state.prior_bel[x])
    combined = state.evidence_vec.get(x, np.ones(len(node.states))) * vec
    if not np.any(combined > 0.0):
        raise InconsistentEvidenceError(
            f"evidence on {node.id!r} contradicts earlier evidence")
    state.evidence_vec[x] = combined
    state.evidence_log.append(evidence)
    state.agenda.append(x)
    return state


def activate(state: BeliefState, node_id: str | int,
             tolerance: float = DEFAULT_TOLERANCE) -> list[str]:
    """Recompute one node's belief and outgoing messages.

    Returns the neighbors whose inbound message moved by more than
    `tolerance` in max-norm (parents first, then children, declaration
    order). Increments the state's activation counter by one.
    """
    idx = state.idx
    x = state.node_index(node_id) if isinstance(node_id, str) else node_id
    diag = _diagnostic_support(state, x)
    parents = idx.parents[x]
    if parents.size == 0:
        caus = idx.tables[x][0].copy()
        lam_rows = None
    else:
        parent_pi = _padded_parent_messages(state, x)
        caus, lam_rows = kernels.node_update(idx.tables[x], idx.digits[x],
                                             parent_pi, diag)
    state.diag[x] = diag
    state.caus[x] = caus
    state.bel[x] = _normalize(caus * diag, f"belief at {idx.ids[x]}")

    changed: list[str] = []
    for j, p in enumerate(parents):
        p = int(p)
        msg = _normalize(lam_rows[j, : int(idx.card[p])].copy(),
                         f"diagnostic message {idx.ids[x]} -> {idx.ids[p]}")
        old = state.lam_in[p].get(x)
        if old is None or np.max(np.abs(msg - old)) > tolerance:
            changed.append(idx.ids[p])
        state.lam_in[p][x] = msg
    evidence = state.evidence_vec.get(x)
    for c in idx.children[x]:
        c = int(c)
        msg = caus.copy()
        if evidence is not None:
            msg = msg * evidence
        for k in idx.children[x]:
            k = int(k)
            if k != c:
                msg = msg * state.lam_in[x][k]
        msg = _normalize(msg, f"causal message {idx.ids[x]} -> {idx.ids[c]}")
        old = state.pi_in[c].get(x)
        if old is None or np.max(np.abs(msg - old)) > tolerance:
            changed.append(idx.ids[c])
        state.pi_in[c][x] = msg
    state.activations += 1
    return changed


class _Agenda:
    """Activation queue under one scheduling policy."""

    def __init__(self, policy: SchedulerPolicy, initial: list[int]):
        self.policy = SchedulerPolicy(policy)
        if self.policy is SchedulerPolicy.LIFO:
            self.stack = list(initial)
        elif self.policy is SchedulerPolicy.FIFO:
            self.queue = deque(initial)
        else:
            self.ordered: OrderedDict[int, None] = OrderedDict()
            for x in initial:
                if x in self.ordered:
                    del self.ordered[x]
                self.ordered[x] = None

    def __bool__(self) -> bool:
        if self.policy is SchedulerPolicy.LIFO:
            return bool(self.stack)
        if self.policy is SchedulerPolicy.FIFO:
            return bool(self.queue)
        return bool(self.ordered)

    def pop(self) -> int:
        if self.policy is SchedulerPolicy.LIFO:
            return self.stack.pop()
        if self.policy is SchedulerPolicy.FIFO:
            return self.queue.popleft()
        return self.ordered.popitem(last=False)[0]

    def push(self, x: int) -> None:
        if self.policy is SchedulerPolicy.LIFO:
            self.stack.append(x)
        elif self.policy is SchedulerPolicy.FIFO:
            self.queue.append(x)
        else:
            # re-activation moves an already queued node to the end,
            # postponing it until neighbor information is more complete
            if x in self.ordered:
                del self.ordered[x]
            self.ordered[x] = None


def propagate_to_equilibrium(state: BeliefState,
                             policy: SchedulerPolicy = SchedulerPolicy.FIFO_DEDUP,
                             tolerance: float = DEFAULT_TOLERANCE,
                             max_activations: int = MAX_ACTIVATIONS) -> int:
    """Drain the agenda under the given policy; returns the number of
    activations performed by this call."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    agenda = _Agenda(policy, state.agenda)
    state.agenda = []
    count = 0
    while agenda:
        if count >= max_activations:
            raise NonConvergenceError(
                f"no equilibrium after {max_activations} activations")
        x = agenda.pop()
        for neighbor in activate(state, x, tolerance):
            agenda.push(state.idx.index[neighbor])
        count += 1
    return count


def belief(state: BeliefState, node_id: str, allow_stale: bool = False) -> np.ndarray:
    if not state.at_equilibrium() and not allow_stale:
        raise StaleReadError(
            f"agenda not empty; belief at {node_id!r} may be stale")
    return state.bel[state.node_index(node_id)].copy()


def beliefs(state: BeliefState, allow_stale: bool = False) -> dict[str, np.ndarray]:
    return {node_id: belief(state, node_id, allow_stale) for node_id in state.idx.ids}


def rank_states(state: BeliefState, node_id: str) -> list[tuple[str, float]]:
    """States of one variable ordered by belief, ties broken by name."""
    x = state.node_index(node_id)
    vec = belief(state, node_id)
    pairs = list(zip(state.idx.states(x), (float(v) for v in vec)))
    return sorted(pairs, key=lambda kv: (-round(kv[1], RANK_DECIMALS), kv[0]))


# ---------------------------------------------------------------------------
# instrumentation

CSV_COLUMNS = "policy,nodes,links,evidence,activations,micros"


@dataclass
class PropagationRun:
    policy: str
    nodes: int
    links: int
    evidence: int
    activations: int
    micros: int

    def csv_row(self) -> str:
        return (f"{self.policy},{self.nodes},{self.links},{self.evidence},"
                f"{self.activations},{self.micros}")


def link_count(network: VariableNetwork) -> int:
    return sum(len(n.parents) for n in network.nodes)


def timed_propagation(state: BeliefState, policy: SchedulerPolicy,
                      tolerance: float = DEFAULT_TOLERANCE) -> PropagationRun:
    evidence_count = len({ev.node for ev in state.evidence_log})
    start = time.perf_counter()
    activations = propagate_to_equilibrium(state, policy, tolerance)
    elapsed = time.perf_counter() - start
    return PropagationRun(
        policy=SchedulerPolicy(policy).value,
        nodes=len(state.idx.ids),
        links=link_count(state.network),
        evidence=evidence_count,
        activations=activations,
        micros=int(round(elapsed * 1e6)),
    )


def runs_to_csv(runs: list[PropagationRun]) -> str:
    return "\n".join([CSV_COLUMNS, *(r.csv_row() for r in runs)]) + "\n"
