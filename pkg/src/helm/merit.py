"""Merit-based question selection.

The merit of an unanswered question is the expected absolute change of
a tracked target quantity per unit answer cost. The expectation runs
over the engine's current predictive distribution for the answers; each
answer is simulated as hard evidence on a cloned state, so the numbers
are exact rather than incrementally approximated. Adapters give both
engines the same shape: enumerate answers with predictive
probabilities, run a what-if, read the target.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import bms, prospector
from .errors import NotAskableError, QuestionStateError, UnknownStateError
from .networks import Evidence


@dataclass
class MeritRecord:
    question: str
    delta_p: float
    cost: float
    merit: float

    def as_dict(self) -> dict:
        return {"question": self.question, "deltaP": self.delta_p,
                "cost": self.cost, "merit": self.merit}


WHAT_IF_TOLERANCE = 1e-12


class BmsAdapter:
    """Merit view over a belief-maintenance state. The target is a
    (variable, state) pair; answers are the question variable's states
    weighted by its current belief."""

    def __init__(self, state: bms.BeliefState, costs: dict[str, float] | None = None,
                 askables: set[str] | None = None):
        self.state = state
        self.costs = costs or {}
        self.askables = askables

    def check_question(self, question: str) -> None:
        self.state.node_index(question)
        if self.askables is not None and question not in self.askables:
            raise NotAskableError(f"{question!r} is not an askable observation")
        if question in self.state.observed_nodes():
            raise QuestionStateError(f"{question!r} already answered")

    def answers(self, question: str) -> list[tuple[str, float]]:
        x = self.state.node_index(question)
        belief = bms.belief(self.state, question)
        return [(s, float(p)) for s, p in zip(self.state.idx.states(x), belief)]

    def target_value(self, target: tuple[str, str]) -> float:
        node, state_name = target
        x = self.state.node_index(node)
        states = self.state.idx.states(x)
        if state_name not in states:
            raise UnknownStateError(f"unknown state {state_name!r} of {node!r}")
        return float(bms.belief(self.state, node)[states.index(state_name)])

    def what_if(self, question: str, answer: str, target) -> float:
        clone = self.state.clone()
        bms.post_evidence(clone, Evidence.hard(question, answer))
        bms.propagate_to_equilibrium(clone, tolerance=WHAT_IF_TOLERANCE)
        return BmsAdapter(clone, self.costs, self.askables).target_value(target)

    def cost(self, question: str) -> float:
        return float(self.costs.get(question, 1.0))


class ProspectorAdapter:
    """Merit view over a subjective-Bayes state. The target is a
    proposition id; answers are yes/no weighted by the question's
    current probability."""

    def __init__(self, state: prospector.PropositionState):
        self.state = state

    def check_question(self, question: str) -> None:
        node = self.state.network.node(question)
        if not node.askable:
            raise NotAskableError(f"{question!r} is not askable")
        if question in self.state.posted:
            raise QuestionStateError(f"{question!r} already answered")

    def answers(self, question: str) -> list[tuple[str, float]]:
        p = self.state.probability(question)
        return [("yes", p), ("no", 1.0 - p)]

    def target_value(self, target: str) -> float:
        return self.state.probability(target)

    def what_if(self, question: str, answer: str, target) -> float:
        clone = self.state.clone()
        prospector.post_graded_evidence(clone, question,
                                        1.0 if answer == "yes" else 0.0)
        prospector.propagate(clone)
        return clone.probability(target)

    def cost(self, question: str) -> float:
        return float(self.state.network.node(question).cost)


def expected_delta(adapter, question: str, target) -> float:
    """Predictive-weighted mean absolute change of the target if the
    question were answered now."""
    adapter.check_question(question)
    now = adapter.target_value(target)
    total = 0.0
    for answer, p_answer in adapter.answers(question):
        if p_answer == 0.0:
            continue
        total += p_answer * abs(adapter.what_if(question, answer, target) - now)
    return total


def merit(adapter, question: str, target) -> MeritRecord:
    delta = expected_delta(adapter, question, target)
    cost = adapter.cost(question)
    return MeritRecord(question=question, delta_p=delta, cost=cost,
                       merit=delta / cost)


def merit_table(adapter, askables: list[str], target) -> list[MeritRecord]:
    """Merits of all unanswered askables, descending, ties by id."""
    records = []
    for question in askables:
        try:
            records.append(merit(adapter, question, target))
        except QuestionStateError:
            continue
    return sorted(records, key=lambda r: (-r.merit, r.question))


def next_question(adapter, askables: list[str], target,
                  stop_on_zero_merit: bool = False) -> str | None:
    """Unanswered askable with maximal merit; None when exhausted, or
    when every merit is zero and the zero-merit stop is enabled."""
    table = merit_table(adapter, askables, target)
    if not table:
        return None
    if stop_on_zero_merit and table[0].merit == 0.0:
        return None
    return table[0].question
