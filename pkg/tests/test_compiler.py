import itertools
import json
from pathlib import Path

import numpy as np
import pytest

from helm import prospector
from helm.compiler import (
    ClassSpec,
    ComponentSpec,
    FeatureModel,
    class_priors,
    compile_bms,
    compile_prospector,
    load_model,
    model_problems,
    askable_ids,
)
from helm.errors import InvalidModelError, NetworkFormatError
from helm.networks import CLAMP, Evidence, save_network, validate
from helm.oracle import exact_posterior

MODEL_PATH = Path(__file__).resolve().parent.parent / "models" / "stern-plan-view.json"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="module")
def stern_model():
    return load_model(MODEL_PATH.read_text())


def enumerate_joint(model):
    """Independent counting oracle: weight over every (class, detections)
    row of the joint the model implies."""
    priors = {c.id: c.count for c in model.classes}
    total = sum(priors.values())
    attrs = [(comp, attr) for comp in model.components for attr in comp.attributes]
    rows = []
    for c in model.classes:
        for values in itertools.product([1, 0], repeat=len(attrs)):
            w = priors[c.id] / total
            for (comp, attr), v in zip(attrs, values):
                d = comp.weights[comp.membership[c.id]][attr] / 10
                w *= d if v else 1.0 - d
            rows.append((c.id, dict(zip([f"{comp.name}-{attr}" for comp, attr in attrs],
                                        values)), w))
    return rows


def test_class_priors_uniform(stern_model):
    priors = class_priors(stern_model)
    assert np.allclose(priors, 0.1)
    assert priors.sum() == pytest.approx(1.0)


def test_class_priors_proportional():
    model = FeatureModel(classes=[ClassSpec("a", 3), ClassSpec("b", 1)], components=[])
    assert np.allclose(class_priors(model), [0.75, 0.25])


def test_class_priors_empty_rejected():
    with pytest.raises(InvalidModelError):
        class_priors(FeatureModel(classes=[], components=[]))


def test_bms_structure_is_a_tree(stern_model):
    net = compile_bms(stern_model)
    assert validate(net).ok
    assert len(net.nodes) == 5
    assert sum(len(n.parents) for n in net.nodes) == 4
    class_node = net.node("class")
    assert class_node.states == [c.id for c in stern_model.classes]
    stern = net.node("stern")
    assert len(stern.states) == 5
    assert askable_ids(stern_model) == ["stern-square", "stern-round", "stern-tapered"]


def test_bms_detection_entries_from_weights(stern_model):
    net = compile_bms(stern_model)
    stern = net.node("stern")
    t = stern.states.index("sverdlov-stern")
    assert net.node("stern-tapered").cpt[t, 0] == 1.0
    assert net.node("stern-square").cpt[t, 0] == 0.1
    v = stern.states.index("virginia-stern")
    assert net.node("stern-round").cpt[v, 0] == 0.0


def test_membership_rows_are_indicators(stern_model):
    net = compile_bms(stern_model)
    stern = net.node("stern")
    for i, c in enumerate(stern_model.classes):
        row = stern.cpt[i]
        assert row.sum() == 1.0
        assert row[stern.states.index(
            stern_model.components[0].membership[c.id])] == 1.0


def test_single_class_weight_five_gives_even_row():
    model = FeatureModel(
        classes=[ClassSpec("only", 1)],
        components=[ComponentSpec(
            name="hull", types=["t"], membership={"only": "t"},
            attributes=["wide"], weights={"t": {"wide": 5}})],
    )
    net = compile_bms(model)
    assert np.allclose(net.node("hull-wide").cpt[0], [0.5, 0.5])


def test_prospector_leaf_priors(stern_model):
    net = compile_prospector(stern_model)
    assert validate(net).ok
    assert net.node("stern-tapered").prior == pytest.approx(0.1, abs=1e-12)
    assert net.node("stern-round").prior == pytest.approx(0.47, abs=1e-12)
    assert net.node("stern-square").prior == pytest.approx(0.12, abs=1e-12)
    assert net.node("stern-tapered").askable
    assert not net.node("sverdlov").askable
    assert net.top == [c.id for c in stern_model.classes]


def test_prospector_sverdlov_tapered_link_clamped(stern_model):
    net = compile_prospector(stern_model)
    link = next(l for l in net.links
                if l.antecedent == "stern-tapered"
                and l.consequent == "stern-fits-sverdlov")
    assert link.lambda1 == pytest.approx(1.0 - CLAMP, abs=1e-15)
    assert link.lambda2 == pytest.approx(CLAMP, abs=1e-15)


def test_prospector_round_to_belknap_path(stern_model):
    net = compile_prospector(stern_model)
    leaf_to_fit = next(l for l in net.links
                       if l.antecedent == "stern-round"
                       and l.consequent == "stern-fits-belknap")
    fit_to_class = next(l for l in net.links
                        if l.antecedent == "stern-fits-belknap"
                        and l.consequent == "belknap")
    assert leaf_to_fit.lambda1 == pytest.approx(0.2 / 0.47, abs=1e-12)
    assert fit_to_class.lambda1 == pytest.approx(0.5, abs=1e-12)
    assert leaf_to_fit.lambda1 * fit_to_class.lambda1 == pytest.approx(
        0.1 / 0.47, abs=1e-12)


def test_all_link_parameters_match_counting_oracle(stern_model):
    rows = enumerate_joint(stern_model)
    net = compile_prospector(stern_model)
    comp = stern_model.components[0]

    def prob(predicate):
        return sum(w for c, vals, w in rows if predicate(c, vals))

    members = {c.id: [d.id for d in stern_model.classes
                      if comp.membership[d.id] == comp.membership[c.id]]
               for c in stern_model.classes}
    for link in net.links:
        if link.antecedent.startswith("stern-fits-"):
            class_id = link.antecedent.removeprefix("stern-fits-")
            in_fit = prob(lambda c, v, m=members[class_id]: c in m)
            want1 = prob(lambda c, v, cid=class_id: c == cid) / in_fit
            want2 = 0.0
        else:
            class_id = link.consequent.removeprefix("stern-fits-")
            attr = link.antecedent
            p_e = prob(lambda c, v: v[attr] == 1)
            want1 = prob(lambda c, v, m=members[class_id]: c in m and v[attr] == 1) / p_e
            want2 = prob(lambda c, v, m=members[class_id]:
                         c in m and v[attr] == 0) / (1 - p_e)
        assert link.lambda1 == pytest.approx(max(min(want1, 1 - CLAMP), CLAMP),
                                             abs=1e-9), link
        assert link.lambda2 == pytest.approx(max(min(want2, 1 - CLAMP), CLAMP),
                                             abs=1e-9), link


def test_compiled_networks_describe_the_same_joint(stern_model):
    bms_net = compile_bms(stern_model)
    rows = enumerate_joint(stern_model)
    for attr in askable_ids(stern_model):
        for value, state in ((1, "detected"), (0, "not-detected")):
            post = exact_posterior(bms_net, [Evidence.hard(attr, state)])["class"]
            p_e = sum(w for _, vals, w in rows if vals[attr] == value)
            for i, c in enumerate(stern_model.classes):
                counting = sum(w for cid, vals, w in rows
                               if cid == c.id and vals[attr] == value) / p_e
                assert post[i] == pytest.approx(counting, abs=1e-9)


def test_prospector_single_evidence_matches_exact_inference(stern_model):
    bms_net = compile_bms(stern_model)
    pnet = compile_prospector(stern_model)
    for attr in askable_ids(stern_model):
        for p_obs, state in ((1.0, "detected"), (0.0, "not-detected")):
            state_p = prospector.init_state(pnet)
            prospector.post_graded_evidence(state_p, attr, p_obs)
            prospector.propagate(state_p)
            expected = exact_posterior(bms_net, [Evidence.hard(attr, state)])["class"]
            for i, c in enumerate(stern_model.classes):
                assert state_p.prob[c.id] == pytest.approx(
                    float(expected[i]), abs=1e-6), (attr, state, c.id)


def test_tapered_detection_puts_sverdlov_first(stern_model):
    pnet = compile_prospector(stern_model)
    state = prospector.init_state(pnet)
    prospector.post_graded_evidence(state, "stern-tapered", 1.0)
    prospector.propagate(state)
    ranking = prospector.rank_classes(state)
    assert ranking[0][0] == "sverdlov"
    assert ranking[0][1] == pytest.approx(1.0, abs=1e-6)


def test_round_detection_puts_virginia_below_round_capable_classes(stern_model):
    pnet = compile_prospector(stern_model)
    state = prospector.init_state(pnet)
    prospector.post_graded_evidence(state, "stern-round", 1.0)
    prospector.propagate(state)
    round_capable = {"belknap", "leahy", "bainbridge", "california", "coontz",
                     "long-beach", "truxtun", "forrest-sherman"}
    virginia = state.prob["virginia"]
    assert virginia < 1e-6
    for c in round_capable:
        assert state.prob[c] > virginia


def test_recompilation_is_byte_identical(stern_model):
    assert save_network(compile_bms(stern_model)) == save_network(
        compile_bms(stern_model))
    assert save_network(compile_prospector(stern_model)) == save_network(
        compile_prospector(stern_model))


def test_compiled_networks_match_goldens(stern_model):
    bms_golden = (GOLDEN_DIR / "stern-plan-view-bms.json").read_text()
    prospector_golden = (GOLDEN_DIR / "stern-plan-view-prospector.json").read_text()
    assert save_network(compile_bms(stern_model)) == bms_golden
    assert save_network(compile_prospector(stern_model)) == prospector_golden


def test_model_schema_errors():
    with pytest.raises(NetworkFormatError):
        load_model("{not json")
    with pytest.raises(NetworkFormatError):
        load_model('{"classes": [{"id": "a"}], "components": []}')
    with pytest.raises(NetworkFormatError):
        load_model('{"classes": [{"id": "a", "count": 1}]}')


def test_model_semantic_errors():
    doc = {
        "classes": [{"id": "a", "count": 1}],
        "components": [{
            "name": "hull", "types": ["t"], "membership": {},
            "attributes": ["wide"], "weights": {"t": {"wide": 11}},
        }],
    }
    with pytest.raises(InvalidModelError) as err:
        load_model(json.dumps(doc))
    text = str(err.value)
    assert "no type assignment" in text
    assert "not an integer in 0..10" in text


def test_degenerate_attribute_emitted_clamped_and_flagged():
    model = FeatureModel(
        classes=[ClassSpec("a", 1), ClassSpec("b", 1)],
        components=[ComponentSpec(
            name="hull", types=["ta", "tb"],
            membership={"a": "ta", "b": "tb"},
            attributes=["ghost"], weights={"ta": {"ghost": 0}, "tb": {"ghost": 0}})],
    )
    net = compile_prospector(model)
    leaf = net.node("hull-ghost")
    assert leaf.prior == CLAMP
    report = validate(net)
    assert report.ok
    assert any("degenerate prior" in p.message and "hull-ghost" in p.where
               for p in report.warnings)


def test_model_problems_clean_for_shipped_model(stern_model):
    assert model_problems(stern_model) == []
