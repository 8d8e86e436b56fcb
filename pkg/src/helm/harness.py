"""Batch experimentation: seeded network generation, scheduler
benchmarking, two-engine agreement runs, and the numba-vs-numpy kernel
benchmark.

Every run is reproducible from (seed, config). Reference figures from
the original study are surfaced in output headers for context only;
its test network and image set were never published, so nothing here
asserts against them.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import bms, kernels
from .compiler import FeatureModel, askable_ids
from .errors import NonConvergenceError
from .networks import Evidence, VariableNetwork, VariableNode, require_valid
from .oracle import ENUMERATION_CAP, exact_posterior
from .session import Session

BENCH_REFERENCE_NOTE = (
    "reference counts reported for the original 24-node, 23-link network "
    "with 8 simultaneous evidence posts: stack 195, fifo 108, fifo-dedup 71 "
    "(context only, that network is unpublished)")
COMPARE_REFERENCE_NOTE = (
    "reference from the original two-engine study: the same top class on "
    "39 of 52 images, rankings differing on 4 (context only, the image set "
    "is unavailable)")

BENCHMARK_CSV_COLUMNS = bms.CSV_COLUMNS + ",seed,trial"

DEFAULT_ORACLE_LIMIT = 1 << 20


def random_polytree(nodes: int, max_states: int, seed: int,
                    orientation: str = "forward") -> VariableNetwork:
    """Seed-deterministic singly-connected network: uniform random tree
    (each node attaches to a random earlier node), state counts uniform
    in [2, max_states], rows sampled symmetric-Dirichlet.

    orientation="forward" points every edge from the earlier node to the
    later one, giving a single-parent tree. orientation="random" flips
    each edge by coin toss, which produces multi-parent polytree nodes
    while keeping the underlying tree acyclic.
    """
    if nodes < 1:
        raise ValueError("need at least one node")
    if max_states < 2:
        raise ValueError("need at least two states")
    if orientation not in ("forward", "random"):
        raise ValueError(f"unknown orientation {orientation!r}")
    rng = np.random.default_rng(seed)
    cards = rng.integers(2, max_states + 1, size=nodes)
    parents: list[list[int]] = [[] for _ in range(nodes)]
    for i in range(1, nodes):
        j = int(rng.integers(0, i))
        if orientation == "random" and rng.random() < 0.5:
            parents[j].append(i)
        else:
            parents[i].append(j)
    ids = [f"n{i:03d}" for i in range(nodes)]
    network_nodes = []
    for i in range(nodes):
        states = [f"s{k}" for k in range(int(cards[i]))]
        if parents[i]:
            rows = math.prod(int(cards[p]) for p in parents[i])
            table = rng.gamma(1.0, 1.0, size=(rows, int(cards[i])))
            table /= table.sum(axis=1, keepdims=True)
            network_nodes.append(VariableNode(
                id=ids[i], label=ids[i], states=states,
                parents=[ids[p] for p in parents[i]], cpt=table))
        else:
            prior = rng.gamma(1.0, 1.0, size=int(cards[i]))
            prior /= prior.sum()
            network_nodes.append(VariableNode(id=ids[i], label=ids[i],
                                              states=states, prior=prior))
    return require_valid(VariableNetwork(network_nodes))


def leaf_ids(network: VariableNetwork) -> list[str]:
    return [n.id for n in network.nodes if not network.children[n.id]]


@dataclass
class BenchmarkRecord:
    seed: int
    trial: int
    policy: str
    nodes: int
    links: int
    evidence: int
    activations: int
    micros: int
    deviation: float
    reference: str
    failed: bool

    def csv_row(self) -> str:
        return (f"{self.policy},{self.nodes},{self.links},{self.evidence},"
                f"{self.activations},{self.micros},{self.seed},{self.trial}")


def benchmark_csv(records: list[BenchmarkRecord]) -> str:
    return "\n".join([BENCHMARK_CSV_COLUMNS,
                      *(r.csv_row() for r in records)]) + "\n"


def scheduler_benchmark(network: VariableNetwork, evidence_count: int,
                        policies: list[bms.SchedulerPolicy] | None = None,
                        seed: int = 0, trials: int = 1,
                        tolerance: float = bms.DEFAULT_TOLERANCE,
                        oracle_limit: int = DEFAULT_ORACLE_LIMIT
                        ) -> list[BenchmarkRecord]:
    """Per trial: sample distinct evidence leaves with random hard
    states, post them simultaneously, then drain identical initial
    states once per policy, recording activation counts and the maximum
    belief deviation from the reference.

    The reference is the exact enumeration oracle when the joint fits
    under oracle_limit; above that the first policy's equilibrium is the
    reference, so the deviation measures cross-policy agreement.
    """
    policies = list(policies or bms.SchedulerPolicy)
    leaves = leaf_ids(network)
    if evidence_count > len(leaves):
        raise ValueError(
            f"{evidence_count} evidence nodes requested, network has "
            f"{len(leaves)} leaves")
    base = bms.init_equilibrium(network)
    use_oracle = base.idx.joint_size <= min(oracle_limit, ENUMERATION_CAP)
    records = []
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        picked = [leaves[i] for i in rng.choice(len(leaves), size=evidence_count,
                                                replace=False)]
        evidence = []
        for node_id in picked:
            states = network.node(node_id).states
            evidence.append(Evidence.hard(
                node_id, states[int(rng.integers(len(states)))]))

        per_policy: dict[str, bms.BeliefState] = {}
        runs: dict[str, bms.PropagationRun | None] = {}
        for policy in policies:
            state = base.clone()
            for ev in evidence:
                bms.post_evidence(state, ev)
            try:
                runs[policy.value] = bms.timed_propagation(state, policy, tolerance)
            except NonConvergenceError:
                runs[policy.value] = None
            per_policy[policy.value] = state

        if use_oracle:
            reference = "oracle"
            expected = exact_posterior(network, evidence)
            threshold = 1e-6
        else:
            reference = f"policy:{policies[0].value}"
            expected = bms.beliefs(per_policy[policies[0].value])
            threshold = 10.0 * tolerance
        for policy in policies:
            state = per_policy[policy.value]
            run = runs[policy.value]
            if run is None:
                records.append(BenchmarkRecord(
                    seed=seed, trial=trial, policy=policy.value,
                    nodes=len(network.nodes), links=bms.link_count(network),
                    evidence=evidence_count, activations=-1, micros=-1,
                    deviation=float("inf"), reference=reference, failed=True))
                continue
            deviation = max(
                float(np.max(np.abs(bms.belief(state, node_id) - expected[node_id])))
                for node_id in state.idx.ids)
            records.append(BenchmarkRecord(
                seed=seed, trial=trial, policy=policy.value, nodes=run.nodes,
                links=run.links, evidence=run.evidence,
                activations=run.activations, micros=run.micros,
                deviation=deviation, reference=reference,
                failed=deviation > threshold))
    return records


def scheduler_sweep(nodes: int, max_states: int, evidence_count: int,
                    trials: int, seed: int = 0,
                    policies: list[bms.SchedulerPolicy] | None = None,
                    tolerance: float = bms.DEFAULT_TOLERANCE
                    ) -> list[BenchmarkRecord]:
    """Scheduler benchmark across fresh networks: each trial generates
    its own seeded tree and evidence set. Networks with fewer leaves
    than the evidence count are skipped deterministically. Per-network
    activation counts are topology-noisy; the policy ordering is a
    property of the aggregate."""
    records: list[BenchmarkRecord] = []
    trial = 0
    net_seed = seed
    while trial < trials:
        network = random_polytree(nodes, max_states, net_seed)
        net_seed += 1
        if len(leaf_ids(network)) < evidence_count:
            continue
        batch = scheduler_benchmark(network, evidence_count, policies,
                                    seed=net_seed, trials=1, tolerance=tolerance)
        for record in batch:
            record.trial = trial
        records.extend(batch)
        trial += 1
    return records


def median_activations(records: list[BenchmarkRecord]) -> dict[str, float]:
    by_policy: dict[str, list[int]] = {}
    for r in records:
        if not r.failed:
            by_policy.setdefault(r.policy, []).append(r.activations)
    return {policy: statistics.median(counts)
            for policy, counts in by_policy.items()}


# ---------------------------------------------------------------------------
# engine comparison


@dataclass
class CaseResult:
    case: list[dict]
    bms_ranking: list[tuple[str, float]]
    prospector_ranking: list[tuple[str, float]]
    top_agreement: bool
    rank_difference: float

    def as_dict(self) -> dict:
        return {
            "case": self.case,
            "bms_ranking": [{"class": c, "probability": p}
                            for c, p in self.bms_ranking],
            "prospector_ranking": [{"class": c, "probability": p}
                                   for c, p in self.prospector_ranking],
            "top_agreement": self.top_agreement,
            "rank_difference": self.rank_difference,
        }


@dataclass
class AgreementReport:
    cases: list[CaseResult] = field(default_factory=list)

    @property
    def top_agreement_rate(self) -> float:
        if not self.cases:
            return 1.0
        return sum(c.top_agreement for c in self.cases) / len(self.cases)

    @property
    def mean_rank_difference(self) -> float:
        if not self.cases:
            return 0.0
        return sum(c.rank_difference for c in self.cases) / len(self.cases)

    def as_dict(self) -> dict:
        return {
            "context": COMPARE_REFERENCE_NOTE,
            "top_agreement_rate": self.top_agreement_rate,
            "mean_rank_difference": self.mean_rank_difference,
            "cases": [c.as_dict() for c in self.cases],
        }


def hard_single_attribute_cases(model: FeatureModel) -> list[list[dict]]:
    """All single-observation hard cases: each attribute detected and
    not detected."""
    return [[{"node": q, "form": "hard", "value": value}]
            for q in askable_ids(model)
            for value in ("detected", "not-detected")]


def compare_engines(model: FeatureModel,
                    cases: list[list[dict]] | None = None) -> AgreementReport:
    """Run both engines over the same evidence cases and compare the
    class rankings they produce."""
    if cases is None:
        cases = hard_single_attribute_cases(model)
    report = AgreementReport()
    for case in cases:
        rankings = {}
        for engine in ("bms", "prospector"):
            session = Session(model, engine)
            for item in case:
                session.volunteer(item["node"], item["form"], item["value"])
            rankings[engine] = session.ranking()
        bms_rank = {c: i for i, (c, _) in enumerate(rankings["bms"])}
        pros_rank = {c: i for i, (c, _) in enumerate(rankings["prospector"])}
        diff = (sum(abs(bms_rank[c] - pros_rank[c]) for c in bms_rank)
                / len(bms_rank)) if bms_rank else 0.0
        top_bms = rankings["bms"][0][0] if rankings["bms"] else None
        top_pros = rankings["prospector"][0][0] if rankings["prospector"] else None
        report.cases.append(CaseResult(
            case=case,
            bms_ranking=rankings["bms"],
            prospector_ranking=rankings["prospector"],
            top_agreement=top_bms == top_pros,
            rank_difference=diff,
        ))
    return report


# ---------------------------------------------------------------------------
# kernel backend benchmark


def backend_benchmark(seed: int = 0, nodes: int = 12, max_states: int = 4,
                      networks: int = 20, propagations: int = 50) -> list[dict]:
    """Time the enumeration oracle and agenda propagation under each
    available kernel backend on an identical seeded workload."""
    nets = [random_polytree(nodes, max_states, seed + i) for i in range(networks)]
    evidence = []
    for i, net in enumerate(nets):
        rng = np.random.default_rng([seed, i])
        leaves = leaf_ids(net)
        node_id = leaves[int(rng.integers(len(leaves)))]
        states = net.node(node_id).states
        evidence.append(Evidence.hard(node_id,
                                      states[int(rng.integers(len(states)))]))
    rows = []
    previous = kernels.active_backend()
    try:
        for backend in kernels.available_backends():
            kernels.set_backend(backend)
            kernels.warmup()
            start = time.perf_counter()
            for net, ev in zip(nets, evidence):
                exact_posterior(net, [ev])
            oracle_seconds = time.perf_counter() - start
            start = time.perf_counter()
            for k in range(propagations):
                net, ev = nets[k % len(nets)], evidence[k % len(nets)]
                state = bms.init_equilibrium(net)
                bms.post_evidence(state, ev)
                bms.propagate_to_equilibrium(state)
            propagation_seconds = time.perf_counter() - start
            rows.append({
                "backend": backend,
                "oracle_runs": len(nets),
                "oracle_micros": int(oracle_seconds * 1e6),
                "propagation_runs": propagations,
                "propagation_micros": int(propagation_seconds * 1e6),
            })
    finally:
        kernels.set_backend(previous)
    return rows
