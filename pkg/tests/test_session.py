from pathlib import Path

import numpy as np
import pytest

from helm.compiler import FeatureModel, ClassSpec, ComponentSpec, load_model
from helm.errors import (
    InconsistentEvidenceError,
    InvalidModelError,
    NotAskableError,
    SessionStateError,
)
from helm.session import EngineKind, Session, start

MODEL_PATH = Path(__file__).resolve().parent.parent / "models" / "stern-plan-view.json"
ENGINES = [EngineKind.BMS, EngineKind.PROSPECTOR]


@pytest.fixture(scope="module")
def stern_model():
    return load_model(MODEL_PATH.read_text())


def test_fresh_bms_session_ranks_uniform_tie(stern_model):
    session = start(stern_model, "bms")
    ranking = session.ranking()
    assert [c for c, _ in ranking] == sorted(c.id for c in stern_model.classes)
    assert all(p == pytest.approx(0.1, abs=1e-9) for _, p in ranking)
    assert session.status == "active"


def test_fresh_prospector_session_has_prior_tenths(stern_model):
    session = start(stern_model, "prospector")
    for _, p in session.ranking():
        assert p == pytest.approx(0.1, abs=1e-6)


def test_invalid_model_rejected_at_start():
    broken = FeatureModel(
        classes=[ClassSpec("a", 1)],
        components=[ComponentSpec(name="hull", types=["t"], membership={},
                                  attributes=["wide"], weights={"t": {"wide": 3}})],
    )
    with pytest.raises(InvalidModelError) as err:
        start(broken, "bms")
    assert "no type assignment" in str(err.value)


@pytest.mark.parametrize("engine", ENGINES)
def test_volunteer_tapered_promotes_sverdlov(stern_model, engine):
    session = start(stern_model, engine)
    session.volunteer("stern-tapered", "hard", "detected")
    ranking = session.ranking()
    assert ranking[0][0] == "sverdlov"
    assert ranking[0][1] == pytest.approx(1.0, abs=1e-6)
    assert session.journal[0].source == "volunteered"


@pytest.mark.parametrize("engine", ENGINES)
def test_graded_tapered_report_strictly_raises_sverdlov(stern_model, engine):
    session = start(stern_model, engine)
    before = dict(session.ranking())["sverdlov"]
    session.volunteer("stern-tapered", "graded", 0.75)
    after = dict(session.ranking())["sverdlov"]
    assert after > before


def test_uninformative_virtual_keeps_ranking(stern_model):
    session = start(stern_model, "bms")
    before = session.ranking()
    session.volunteer("stern-round", "virtual", [1.0, 1.0])
    after = session.ranking()
    for (c1, p1), (c2, p2) in zip(before, after):
        assert c1 == c2 and p2 == pytest.approx(p1, abs=1e-9)


def test_volunteer_on_stopped_session_rejected(stern_model):
    session = start(stern_model, "bms")
    session.stop()
    with pytest.raises(SessionStateError):
        session.volunteer("stern-tapered", "hard", "detected")


def test_engine_error_leaves_journal_untouched(stern_model):
    session = start(stern_model, "bms")
    session.volunteer("stern-tapered", "hard", "detected")
    with pytest.raises(InconsistentEvidenceError):
        session.volunteer("stern-round", "hard", "detected")
    assert [e.node for e in session.journal] == ["stern-tapered"]
    assert session.ranking()[0][0] == "sverdlov"


@pytest.mark.parametrize("engine", ENGINES)
def test_ask_proposes_highest_merit_question(stern_model, engine):
    session = start(stern_model, engine)
    table = session.merits()
    assert session.ask() == table[0].question
    assert [r.merit for r in table] == sorted((r.merit for r in table), reverse=True)


@pytest.mark.parametrize("engine", ENGINES)
def test_ask_exhausts_after_all_answers(stern_model, engine):
    session = start(stern_model, engine)
    for q, v in (("stern-square", "not-detected"), ("stern-round", "not-detected"),
                 ("stern-tapered", "detected")):
        session.answer(q, v)
    assert session.ask() is None
    assert session.unanswered_askables() == []


def test_answer_requires_askable(stern_model):
    session = start(stern_model, "bms")
    with pytest.raises(NotAskableError):
        session.answer("stern", "virginia-stern")


@pytest.mark.parametrize("engine", ENGINES)
def test_reanswer_equals_fresh_session_with_second_answer(stern_model, engine):
    twice = start(stern_model, engine)
    twice.answer("stern-round", "detected")
    twice.answer("stern-round", "not-detected")
    once = start(stern_model, engine)
    once.answer("stern-round", "not-detected")
    for (c1, p1), (c2, p2) in zip(twice.ranking(), once.ranking()):
        assert c1 == c2 and p1 == pytest.approx(p2, abs=1e-9)
    assert [e.node for e in twice.journal] == ["stern-round"]
    assert twice.journal[0].value == "not-detected"


@pytest.mark.parametrize("engine", ENGINES)
def test_volunteer_answer_order_commutes(stern_model, engine):
    ab = start(stern_model, engine)
    ab.volunteer("stern-square", "graded", 0.2)
    ab.answer("stern-tapered", "detected")
    ba = start(stern_model, engine)
    ba.answer("stern-tapered", "detected")
    ba.volunteer("stern-square", "graded", 0.2)
    for (c1, p1), (c2, p2) in zip(ab.ranking(), ba.ranking()):
        assert c1 == c2 and p1 == pytest.approx(p2, abs=1e-6)


def test_ranking_has_one_entry_per_class(stern_model):
    session = start(stern_model, "bms")
    session.volunteer("stern-round", "hard", "detected")
    ranking = session.ranking()
    assert len(ranking) == 10
    assert len({c for c, _ in ranking}) == 10


def test_stop_confident(stern_model):
    session = start(stern_model, "bms")
    session.volunteer("stern-tapered", "hard", "detected")
    assert session.stop_check(threshold=0.95) == "stopped"
    assert session.stop_reason == "confident"


def test_stop_exhausted(stern_model):
    session = start(stern_model, "prospector")
    for q in list(session.askables):
        session.answer(q, 0.5)
    assert session.stop_check(threshold=0.999999) == "stopped"
    assert session.stop_reason == "exhausted"


def test_unreachable_threshold_only_exhausts(stern_model):
    session = start(stern_model, "bms")
    session.volunteer("stern-tapered", "hard", "detected")
    assert session.stop_check(threshold=1.01) == "active"
    for q in session.unanswered_askables():
        session.answer(q, "not-detected")
    assert session.stop_check(threshold=1.01) == "stopped"
    assert session.stop_reason == "exhausted"


@pytest.mark.parametrize("engine", ENGINES)
def test_journal_replay_reproduces_beliefs(stern_model, engine):
    session = start(stern_model, engine)
    session.volunteer("stern-square", "graded", 0.3)
    session.answer("stern-round", "detected")
    exported = session.journal_export()
    assert all(set(e) == {"seq", "node", "form", "value", "source"}
               for e in exported)
    again = Session.replay(stern_model, engine, exported)
    want = session.beliefs()
    got = again.beliefs()
    for node, value in want.items():
        if isinstance(value, dict):
            for s, p in value.items():
                assert got[node][s] == pytest.approx(p, abs=1e-9)
        else:
            assert got[node] == pytest.approx(value, abs=1e-9)


def test_session_ids_unique(stern_model):
    assert start(stern_model, "bms").id != start(stern_model, "bms").id
