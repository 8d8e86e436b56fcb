"""Network data model: multi-valued variable networks and binary
proposition networks, with validation and JSON (de)serialization.

Variable networks carry conditional probability tables over the joint
parent configuration (rows ordered lexicographically, first parent
varying slowest) and must be singly connected. Proposition networks
carry evidential links with a pair of conditionals (lambda1 = P(to|from),
lambda2 = P(to|not from)) and must only be acyclic.

Networks are immutable after load/validation by convention: nothing in
this package mutates them, so they are safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EvidenceFormError,
    InvalidNetworkError,
    NetworkFormatError,
    UnknownNodeError,
    UnknownStateError,
)

PROB_TOL = 1e-9
# Probabilities entering odds arithmetic are clamped away from 0 and 1.
CLAMP = 1e-9
# Rankings quantize probabilities to this many decimals for ordering
# only, so ranks cannot flip on float noise far below engine accuracy.
RANK_DECIMALS = 8


def clamp_probability(p: float) -> float:
    return min(max(float(p), CLAMP), 1.0 - CLAMP)


# ---------------------------------------------------------------------------
# node / network types


@dataclass
class VariableNode:
    """Multi-valued variable. Roots carry `prior`; others carry `cpt` with
    one row per joint parent configuration."""

    id: str
    label: str
    states: list[str]
    parents: list[str] = field(default_factory=list)
    prior: np.ndarray | None = None
    cpt: np.ndarray | None = None

    def is_root(self) -> bool:
        return not self.parents


class VariableNetwork:
    kind = "variable"

    def __init__(self, nodes: list[VariableNode]):
        self.nodes = list(nodes)
        self.by_id = {n.id: n for n in self.nodes}
        self.children: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            for p in n.parents:
                if p in self.children:
                    self.children[p].append(n.id)

    def node(self, node_id: str) -> VariableNode:
        try:
            return self.by_id[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.by_id


@dataclass
class PropositionNode:
    """Binary proposition. `askable` marks leaf observations the operator
    can report; `cost` feeds the question-selection ratio."""

    id: str
    label: str
    prior: float
    askable: bool = False
    cost: float = 1.0


@dataclass
class EvidentialLink:
    antecedent: str
    consequent: str
    lambda1: float
    lambda2: float


class PropositionNetwork:
    kind = "proposition"

    def __init__(self, nodes: list[PropositionNode], links: list[EvidentialLink],
                 top: list[str] | None = None):
        self.nodes = list(nodes)
        self.links = list(links)
        self.top = list(top or [])
        self.by_id = {n.id: n for n in self.nodes}
        self.outgoing: dict[str, list[EvidentialLink]] = {n.id: [] for n in self.nodes}
        self.incoming: dict[str, list[EvidentialLink]] = {n.id: [] for n in self.nodes}
        for link in self.links:
            if link.antecedent in self.outgoing:
                self.outgoing[link.antecedent].append(link)
            if link.consequent in self.incoming:
                self.incoming[link.consequent].append(link)

    def node(self, node_id: str) -> PropositionNode:
        try:
            return self.by_id[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.by_id


# ---------------------------------------------------------------------------
# evidence


@dataclass
class Evidence:
    """One observation: hard state, virtual likelihood vector, or a graded
    probability that a binary attribute holds."""

    node: str
    form: str  # "hard" | "virtual" | "graded"
    state: str | None = None
    likelihood: np.ndarray | None = None
    p_obs: float | None = None

    @staticmethod
    def hard(node: str, state: str) -> "Evidence":
        return Evidence(node=node, form="hard", state=state)

    @staticmethod
    def virtual(node: str, likelihood) -> "Evidence":
        vec = np.asarray(likelihood, dtype=float)
        if vec.ndim != 1 or vec.size == 0:
            raise EvidenceFormError("virtual likelihood must be a nonempty vector")
        if np.any(vec < 0) or not np.any(vec > 0):
            raise EvidenceFormError(
                "virtual likelihood entries must be nonnegative and not all zero")
        return Evidence(node=node, form="virtual", likelihood=vec)

    @staticmethod
    def graded(node: str, p_obs: float) -> "Evidence":
        p = float(p_obs)
        if not 0.0 <= p <= 1.0:
            raise EvidenceFormError(f"graded probability {p} outside [0, 1]")
        return Evidence(node=node, form="graded", p_obs=p)


def likelihood_vector(evidence: Evidence, states: list[str],
                      prior_marginal: np.ndarray | None = None) -> np.ndarray:
    """Turn evidence on a variable into a likelihood vector over its states.

    Graded evidence applies to binary variables only and is calibrated
    against the variable's prior marginal so that, posted alone, the
    posterior of the first state equals p_obs. Calibrating against the
    stored prior (never the current belief) keeps evidence posting
    order-independent.
    """
    if evidence.form == "hard":
        if evidence.state not in states:
            raise UnknownStateError(
                f"unknown state {evidence.state!r} for node {evidence.node!r}")
        vec = np.zeros(len(states))
        vec[states.index(evidence.state)] = 1.0
        return vec
    if evidence.form == "virtual":
        if evidence.likelihood.size != len(states):
            raise EvidenceFormError(
                f"likelihood length {evidence.likelihood.size} != {len(states)} states "
                f"for node {evidence.node!r}")
        return np.asarray(evidence.likelihood, dtype=float)
    if evidence.form == "graded":
        if len(states) != 2:
            raise EvidenceFormError(
                f"graded evidence requires a binary variable, node {evidence.node!r} "
                f"has {len(states)} states")
        if prior_marginal is None:
            raise EvidenceFormError("graded evidence needs the node's prior marginal")
        p = clamp_probability(float(prior_marginal[0]))
        vec = np.array([evidence.p_obs / p, (1.0 - evidence.p_obs) / (1.0 - p)])
        return vec / vec.sum()
    raise EvidenceFormError(f"unknown evidence form {evidence.form!r}")


# ---------------------------------------------------------------------------
# validation


@dataclass
class Problem:
    severity: str  # "error" | "warning"
    where: str
    message: str


@dataclass
class ValidationReport:
    problems: list[Problem] = field(default_factory=list)

    def error(self, where: str, message: str) -> None:
        self.problems.append(Problem("error", where, message))

    def warn(self, where: str, message: str) -> None:
        self.problems.append(Problem("warning", where, message))

    @property
    def errors(self) -> list[Problem]:
        return [p for p in self.problems if p.severity == "error"]

    @property
    def warnings(self) -> list[Problem]:
        return [p for p in self.problems if p.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def summary(self) -> str:
        return "\n".join(f"{p.severity}: {p.where}: {p.message}" for p in self.problems)


def _check_distribution(report: ValidationReport, where: str, vec: np.ndarray) -> None:
    if np.any(vec < -PROB_TOL) or np.any(vec > 1 + PROB_TOL):
        report.error(where, "entries outside [0, 1]")
    total = float(vec.sum())
    if abs(total - 1.0) > PROB_TOL:
        report.error(where, f"row sum {total:.6g} != 1")


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _validate_variable(net: VariableNetwork) -> ValidationReport:
    report = ValidationReport()
    seen: set[str] = set()
    for n in net.nodes:
        if n.id in seen:
            report.error(n.id, "duplicate node id")
        seen.add(n.id)

    order = {n.id: i for i, n in enumerate(net.nodes)}
    uf = _UnionFind(len(net.nodes))
    for n in net.nodes:
        where = f"node {n.id}"
        if len(n.states) < 2:
            report.error(where, f"{len(n.states)} states, need at least 2")
        if len(set(n.states)) != len(n.states) or any(not s for s in n.states):
            report.error(where, "states must be distinct and nonempty")
        if len(set(n.parents)) != len(n.parents):
            report.error(where, "duplicate parent")
        resolved = True
        for p in n.parents:
            if p == n.id:
                report.error(where, "self-loop")
                resolved = False
            elif p not in net.by_id:
                report.error(where, f"unknown parent {p!r}")
                resolved = False
        if n.is_root():
            if n.prior is None:
                report.error(where, "root node missing prior")
            elif n.prior.size != len(n.states):
                report.error(where, f"prior length {n.prior.size} != {len(n.states)} states")
            else:
                _check_distribution(report, f"{where} prior", n.prior)
        else:
            if n.cpt is None:
                report.error(where, "non-root node missing cpt")
            elif resolved:
                rows = math.prod(len(net.by_id[p].states) for p in n.parents)
                if n.cpt.shape != (rows, len(n.states)):
                    report.error(
                        where,
                        f"cpt shape {n.cpt.shape} != ({rows}, {len(n.states)}): "
                        "need one row per parent-state combination")
                else:
                    for r in range(rows):
                        _check_distribution(report, f"{where} cpt row {r}", n.cpt[r])
        if resolved:
            for p in n.parents:
                if not uf.union(order[n.id], order[p]):
                    report.error(where, "undirected cycle: not singly connected")
    return report


def _proposition_topo_order(net: PropositionNetwork) -> list[str] | None:
    """Kahn order over links; None when a directed cycle exists."""
    indeg = {n.id: 0 for n in net.nodes}
    for link in net.links:
        if link.consequent in indeg and link.antecedent in indeg:
            indeg[link.consequent] += 1
    ready = [n.id for n in net.nodes if indeg[n.id] == 0]
    out: list[str] = []
    while ready:
        node = ready.pop(0)
        out.append(node)
        for link in net.outgoing.get(node, []):
            indeg[link.consequent] -= 1
            if indeg[link.consequent] == 0:
                ready.append(link.consequent)
    if len(out) != len(net.nodes):
        return None
    return out


def _validate_proposition(net: PropositionNetwork) -> ValidationReport:
    report = ValidationReport()
    seen: set[str] = set()
    for n in net.nodes:
        where = f"node {n.id}"
        if n.id in seen:
            report.error(n.id, "duplicate node id")
        seen.add(n.id)
        if not 0.0 < n.prior < 1.0:
            report.error(where, f"prior {n.prior} must lie strictly inside (0, 1)")
        elif n.prior <= CLAMP or n.prior >= 1.0 - CLAMP:
            report.warn(where, f"degenerate prior {n.prior} at the clamp boundary")
        if n.cost <= 0:
            report.error(where, f"cost {n.cost} must be positive")
    for i, link in enumerate(net.links):
        where = f"link {link.antecedent}->{link.consequent}"
        if link.antecedent not in net.by_id:
            report.error(where, f"unknown antecedent {link.antecedent!r}")
            continue
        if link.consequent not in net.by_id:
            report.error(where, f"unknown consequent {link.consequent!r}")
            continue
        if link.antecedent == link.consequent:
            report.error(where, "antecedent equals consequent")
        for name, lam in (("lambda1", link.lambda1), ("lambda2", link.lambda2)):
            if not 0.0 <= lam <= 1.0:
                report.error(where, f"{name} {lam} outside [0, 1]")
        ante = net.by_id[link.antecedent]
        cons = net.by_id[link.consequent]
        if 0.0 < ante.prior < 1.0 and 0.0 < cons.prior < 1.0:
            implied = link.lambda1 * ante.prior + link.lambda2 * (1.0 - ante.prior)
            if abs(implied - cons.prior) > 1e-6:
                report.warn(
                    where,
                    f"conditionals imply prior {implied:.6g} for {cons.id}, "
                    f"stored prior is {cons.prior:.6g}")
    for t in net.top:
        if t not in net.by_id:
            report.error(f"top {t}", "unknown top-level proposition")
    if _proposition_topo_order(net) is None:
        report.error("network", "directed cycle")
    return report


def validate(network) -> ValidationReport:
    """Collect every violated invariant; an empty error list means valid."""
    if isinstance(network, VariableNetwork):
        return _validate_variable(network)
    if isinstance(network, PropositionNetwork):
        return _validate_proposition(network)
    raise TypeError(f"not a network: {type(network)!r}")


def require_valid(network):
    report = validate(network)
    if not report.ok:
        raise InvalidNetworkError(report)
    return network


# ---------------------------------------------------------------------------
# serialization (UTF-8 JSON documents)


def network_to_document(network) -> dict:
    if isinstance(network, VariableNetwork):
        nodes = []
        for n in network.nodes:
            entry: dict = {"id": n.id, "label": n.label, "states": list(n.states)}
            if n.is_root():
                entry["prior"] = [float(x) for x in n.prior]
            else:
                entry["parents"] = list(n.parents)
                entry["cpt"] = [[float(x) for x in row] for row in n.cpt]
            nodes.append(entry)
        return {"kind": "variable", "nodes": nodes}
    if isinstance(network, PropositionNetwork):
        return {
            "kind": "proposition",
            "nodes": [
                {"id": n.id, "label": n.label, "prior": float(n.prior),
                 "askable": bool(n.askable), "cost": float(n.cost)}
                for n in network.nodes
            ],
            "links": [
                {"from": l.antecedent, "to": l.consequent,
                 "lambda1": float(l.lambda1), "lambda2": float(l.lambda2)}
                for l in network.links
            ],
            "top": list(network.top),
        }
    raise TypeError(f"not a network: {type(network)!r}")


def save_network(network) -> str:
    """Serialize deterministically; identical networks give identical bytes."""
    return json.dumps(network_to_document(network), indent=2) + "\n"


def _field(obj: dict, name: str, where: str, kind=None):
    if name not in obj:
        raise NetworkFormatError(f"missing field {name!r}", where)
    value = obj[name]
    if kind is not None and not isinstance(value, kind):
        raise NetworkFormatError(f"field {name!r} has wrong type", where)
    return value


def _variable_from_document(doc: dict) -> VariableNetwork:
    nodes = []
    for i, entry in enumerate(_field(doc, "nodes", "document", list)):
        where = f"nodes[{i}]"
        if not isinstance(entry, dict):
            raise NetworkFormatError("node entry must be an object", where)
        node_id = _field(entry, "id", where, str)
        where = f"nodes[{i}] ({node_id})"
        states = _field(entry, "states", where, list)
        label = str(entry.get("label", node_id))
        parents = entry.get("parents", [])
        if not isinstance(parents, list):
            raise NetworkFormatError("field 'parents' has wrong type", where)
        prior = cpt = None
        if parents:
            raw = _field(entry, "cpt", where, list)
            try:
                cpt = np.asarray(raw, dtype=float)
            except ValueError:
                raise NetworkFormatError("cpt is not a rectangular number table", where)
            if cpt.ndim != 2:
                raise NetworkFormatError("cpt must be a list of rows", where)
        else:
            raw = _field(entry, "prior", where, list)
            try:
                prior = np.asarray(raw, dtype=float)
            except ValueError:
                raise NetworkFormatError("prior is not a number list", where)
        nodes.append(VariableNode(id=node_id, label=label,
                                  states=[str(s) for s in states],
                                  parents=[str(p) for p in parents],
                                  prior=prior, cpt=cpt))
    return VariableNetwork(nodes)


def _proposition_from_document(doc: dict) -> PropositionNetwork:
    nodes = []
    for i, entry in enumerate(_field(doc, "nodes", "document", list)):
        where = f"nodes[{i}]"
        if not isinstance(entry, dict):
            raise NetworkFormatError("node entry must be an object", where)
        node_id = _field(entry, "id", where, str)
        where = f"nodes[{i}] ({node_id})"
        prior = _field(entry, "prior", where, (int, float))
        nodes.append(PropositionNode(
            id=node_id,
            label=str(entry.get("label", node_id)),
            prior=float(prior),
            askable=bool(entry.get("askable", False)),
            cost=float(entry.get("cost", 1.0)),
        ))
    links = []
    for i, entry in enumerate(doc.get("links", [])):
        where = f"links[{i}]"
        if not isinstance(entry, dict):
            raise NetworkFormatError("link entry must be an object", where)
        links.append(EvidentialLink(
            antecedent=str(_field(entry, "from", where, str)),
            consequent=str(_field(entry, "to", where, str)),
            lambda1=float(_field(entry, "lambda1", where, (int, float))),
            lambda2=float(_field(entry, "lambda2", where, (int, float))),
        ))
    top = doc.get("top", [])
    if not isinstance(top, list):
        raise NetworkFormatError("field 'top' has wrong type", "document")
    return PropositionNetwork(nodes, links, [str(t) for t in top])


def network_from_document(doc: dict):
    kind = _field(doc, "kind", "document", str)
    if kind == "variable":
        return _variable_from_document(doc)
    if kind == "proposition":
        return _proposition_from_document(doc)
    raise NetworkFormatError(f"unknown network kind {kind!r}", "document")


def load_network(text: str, check: bool = True):
    """Parse a network document; `check=True` also enforces invariants."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"not valid JSON: {exc.msg}",
                                 f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise NetworkFormatError("document must be a JSON object", "document")
    network = network_from_document(doc)
    if check:
        require_valid(network)
    return network


# ---------------------------------------------------------------------------
# flat index used by the inference kernels


class NetworkIndex:
    """Array encoding of a variable network for the numeric kernels.

    Tables are stored per node as (rows, states) matrices where rows
    enumerate joint parent configurations lexicographically with the
    first parent varying slowest; roots get a single prior row. `digits`
    caches each row's per-parent state index.
    """

    def __init__(self, net: VariableNetwork):
        self.net = net
        self.ids = [n.id for n in net.nodes]
        self.index = {node_id: i for i, node_id in enumerate(self.ids)}
        self.card = np.array([len(n.states) for n in net.nodes], dtype=np.int64)
        self.parents = [
            np.array([self.index[p] for p in n.parents], dtype=np.int64)
            for n in net.nodes
        ]
        self.children = [
            np.array([self.index[c] for c in net.children[n.id]], dtype=np.int64)
            for n in net.nodes
        ]
        self.tables = []
        self.digits = []
        for n in net.nodes:
            if n.is_root():
                self.tables.append(np.asarray(n.prior, dtype=float).reshape(1, -1))
                self.digits.append(np.zeros((1, 0), dtype=np.int64))
            else:
                table = np.asarray(n.cpt, dtype=float)
                self.tables.append(table)
                cards = [len(net.by_id[p].states) for p in n.parents]
                rows = np.arange(table.shape[0], dtype=np.int64)
                digit_cols = []
                stride = table.shape[0]
                for c in cards:
                    stride //= c
                    digit_cols.append((rows // stride) % c)
                self.digits.append(np.stack(digit_cols, axis=1)
                                   if digit_cols else np.zeros((1, 0), dtype=np.int64))
        self.joint_size = math.prod(int(c) for c in self.card)
        self.topo = self._topological_order()

    def _topological_order(self) -> list[int]:
        indeg = [len(p) for p in self.parents]
        ready = [i for i, d in enumerate(indeg) if d == 0]
        out: list[int] = []
        while ready:
            i = ready.pop(0)
            out.append(i)
            for c in self.children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(int(c))
        if len(out) != len(self.ids):
            raise InvalidNetworkError(validate(self.net))
        return out

    def states(self, i: int) -> list[str]:
        return self.net.nodes[i].states
