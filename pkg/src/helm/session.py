"""Mixed-initiative classification sessions.

A session binds a compiled feature model to one inference engine and
records every piece of operator input in an ordered journal. The
journal fully determines the engine state: re-answering a question
removes the stale entry and replays the rest into a fresh engine, so
evidence revision never needs in-place belief surgery. Questions are
proposed by merit against the currently top-ranked class and the
session stops when that class is confident enough or the questions run
out.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass
from enum import Enum

from . import bms, merit, prospector
from .compiler import (
    DETECTION_STATES,
    CLASS_NODE,
    FeatureModel,
    askable_ids,
    compile_bms,
    compile_prospector,
    question_cost,
)
from .errors import (
    EvidenceFormError,
    NotAskableError,
    SessionStateError,
    UnknownStateError,
)
from .networks import Evidence

DEFAULT_CONFIDENCE = 0.95

SOURCE_VOLUNTEERED = "volunteered"
SOURCE_ASKED = "asked"


class EngineKind(str, Enum):
    PROSPECTOR = "prospector"
    BMS = "bms"


@dataclass
class JournalEntry:
    seq: int
    node: str
    form: str  # hard | graded | virtual
    value: object
    source: str
    timestamp: float

    def as_dict(self) -> dict:
        return {"seq": self.seq, "node": self.node, "form": self.form,
                "value": self.value, "source": self.source}


class Session:
    """One operator's classification dialogue over one model."""

    def __init__(self, model: FeatureModel, engine: EngineKind | str,
                 session_id: str | None = None):
        self.id = session_id or uuid.uuid4().hex
        self.model = model
        self.model_name = ""
        self.engine = EngineKind(engine)
        self.askables = askable_ids(model)
        self.costs = {q: question_cost(model, q) for q in self.askables}
        if self.engine is EngineKind.BMS:
            self.network = compile_bms(model)
            self.state = bms.init_equilibrium(self.network)
        else:
            self.network = compile_prospector(model)
            self.state = prospector.init_state(self.network)
        self.journal: list[JournalEntry] = []
        self.status = "active"
        self.stop_reason: str | None = None
        self._seq = 0

    # -- engine plumbing ---------------------------------------------------

    def _fresh_state(self):
        if self.engine is EngineKind.BMS:
            return bms.init_equilibrium(self.network)
        return prospector.init_state(self.network)

    def _apply(self, state, entry: JournalEntry):
        if self.engine is EngineKind.BMS:
            if entry.form == "hard":
                ev = Evidence.hard(entry.node, str(entry.value))
            elif entry.form == "graded":
                ev = Evidence.graded(entry.node, float(entry.value))
            elif entry.form == "virtual":
                ev = Evidence.virtual(entry.node, entry.value)
            else:
                raise EvidenceFormError(f"unknown evidence form {entry.form!r}")
            bms.post_evidence(state, ev)
            bms.propagate_to_equilibrium(state)
            return state
        if entry.form == "hard":
            states = self.question_states(entry.node)
            if entry.value not in states:
                raise UnknownStateError(
                    f"unknown value {entry.value!r} for {entry.node!r}")
            p_obs = 1.0 if entry.value == states[0] else 0.0
        elif entry.form == "graded":
            p_obs = float(entry.value)
        else:
            raise EvidenceFormError(
                "the subjective-Bayes engine takes hard or graded reports only")
        prospector.post_graded_evidence(state, entry.node, p_obs)
        prospector.propagate(state)
        return state

    def _post(self, node: str, form: str, value, source: str) -> None:
        if self.status != "active":
            raise SessionStateError(f"session is stopped ({self.stop_reason})")
        self._seq += 1
        entry = JournalEntry(seq=self._seq, node=node, form=form, value=value,
                             source=source, timestamp=time.time())
        if any(e.node == node for e in self.journal):
            # replacement: drop the stale entry and replay from scratch
            kept = [e for e in self.journal if e.node != node] + [entry]
            state = self._fresh_state()
            for e in kept:
                self._apply(state, e)
            self.journal = kept
            self.state = state
            return
        # engine errors must leave the journal and state untouched
        state = self.state.clone()
        self._apply(state, entry)
        self.state = state
        self.journal.append(entry)

    # -- operations --------------------------------------------------------

    def volunteer(self, node: str, form: str, value) -> "Session":
        self._post(node, form, value, SOURCE_VOLUNTEERED)
        return self

    def answer(self, question: str, value) -> "Session":
        if question not in self.askables:
            raise NotAskableError(f"{question!r} is not an askable observation")
        form = "graded" if isinstance(value, (int, float)) and not isinstance(
            value, bool) else "hard"
        self._post(question, form, value, SOURCE_ASKED)
        return self

    def answered(self) -> set[str]:
        return {e.node for e in self.journal}

    def unanswered_askables(self) -> list[str]:
        answered = self.answered()
        return [q for q in self.askables if q not in answered]

    def _adapter(self):
        if self.engine is EngineKind.BMS:
            return merit.BmsAdapter(self.state, costs=self.costs,
                                    askables=set(self.askables))
        return merit.ProspectorAdapter(self.state)

    def _target(self):
        top_class = self.ranking()[0][0]
        if self.engine is EngineKind.BMS:
            return (CLASS_NODE, top_class)
        return top_class

    def ask(self, exclude: set[str] | None = None) -> str | None:
        remaining = [q for q in self.unanswered_askables()
                     if not exclude or q not in exclude]
        if not remaining:
            return None
        return merit.next_question(self._adapter(), remaining, self._target())

    def merits(self) -> list[merit.MeritRecord]:
        return merit.merit_table(self._adapter(), self.unanswered_askables(),
                                 self._target())

    def question_states(self, question: str) -> list[str]:
        if self.engine is EngineKind.BMS:
            return self.network.node(question).states
        return list(DETECTION_STATES)

    def question_label(self, question: str) -> str:
        return self.network.node(question).label

    def ranking(self) -> list[tuple[str, float]]:
        if self.engine is EngineKind.BMS:
            return bms.rank_states(self.state, CLASS_NODE)
        return prospector.rank_classes(self.state)

    def beliefs(self) -> dict:
        if self.engine is EngineKind.BMS:
            return {node_id: dict(zip(self.network.node(node_id).states,
                                      (float(p) for p in vec)))
                    for node_id, vec in bms.beliefs(self.state).items()}
        return {n.id: float(self.state.prob[n.id]) for n in self.network.nodes}

    def stop_check(self, threshold: float = DEFAULT_CONFIDENCE) -> str:
        """Stop confident once the leading class reaches the threshold,
        stop exhausted when no questions remain, else stay active."""
        if self.status == "active":
            top_probability = self.ranking()[0][1]
            if top_probability >= threshold:
                self.status, self.stop_reason = "stopped", "confident"
            elif not self.unanswered_askables():
                self.status, self.stop_reason = "stopped", "exhausted"
        return self.status

    def stop(self, reason: str = "operator") -> str:
        self.status, self.stop_reason = "stopped", reason
        return self.status

    # -- persistence -------------------------------------------------------

    def journal_export(self) -> list[dict]:
        return [e.as_dict() for e in self.journal]

    @classmethod
    def replay(cls, model: FeatureModel, engine: EngineKind | str,
               entries: list[dict], session_id: str | None = None) -> "Session":
        """Rebuild a session from an exported journal; posting order is
        preserved, so beliefs reproduce deterministically."""
        session = cls(model, engine, session_id=session_id)
        for raw in sorted(entries, key=lambda e: e["seq"]):
            session._post(raw["node"], raw["form"], raw["value"],
                          raw.get("source", SOURCE_VOLUNTEERED))
        return session


def start(model: FeatureModel, engine: EngineKind | str) -> Session:
    return Session(model, engine)
