"""Compile weighted ship-feature descriptions into inference networks.

A feature model lists classes with fleet counts and, per structural
component, the component types, the class-to-type membership, and a
0..10 detection weight for each (type, attribute) pair: weight w means
the attribute is detected with probability w/10 when that type is in
the image. Class counts give priors by proportion.

The same model compiles two ways. The variable-network form is a tree:
class variable at the root, one type variable per component with a
deterministic membership table, one binary detection variable per
attribute. The proposition-network form mirrors the classic rule
hierarchy: askable detection leaves, "component fits class"
intermediates, and class propositions on top, with link conditionals
derived by exact counting over the joint the model implies (attributes
conditionally independent given the class). Both forms therefore
describe the same distribution, which is what makes the two inference
engines comparable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelError, NetworkFormatError
from .networks import (
    EvidentialLink,
    PropositionNetwork,
    PropositionNode,
    VariableNetwork,
    VariableNode,
    clamp_probability,
)

CLASS_NODE = "class"
MAX_WEIGHT = 10
DETECTION_STATES = ["detected", "not-detected"]


@dataclass
class ClassSpec:
    id: str
    count: int
    label: str = ""

    def __post_init__(self):
        if not self.label:
            self.label = self.id.replace("-", " ").title()


@dataclass
class ComponentSpec:
    name: str
    types: list[str]
    membership: dict[str, str]
    attributes: list[str]
    weights: dict[str, dict[str, int]]
    costs: dict[str, float] = field(default_factory=dict)

    def detection_probability(self, type_name: str, attribute: str) -> float:
        return self.weights[type_name][attribute] / MAX_WEIGHT


@dataclass
class FeatureModel:
    classes: list[ClassSpec]
    components: list[ComponentSpec]

    def class_ids(self) -> list[str]:
        return [c.id for c in self.classes]


def observation_id(component: str, attribute: str) -> str:
    return f"{component}-{attribute}"


def fit_id(component: str, class_id: str) -> str:
    return f"{component}-fits-{class_id}"


def model_problems(model: FeatureModel) -> list[str]:
    problems = []
    if not model.classes:
        problems.append("no classes declared")
    ids = [c.id for c in model.classes]
    if len(set(ids)) != len(ids):
        problems.append("duplicate class ids")
    for c in model.classes:
        if c.count < 1:
            problems.append(f"class {c.id}: count {c.count} must be >= 1")
    for comp in model.components:
        where = f"component {comp.name}"
        if len(set(comp.types)) != len(comp.types) or not comp.types:
            problems.append(f"{where}: types must be nonempty and distinct")
        if len(set(comp.attributes)) != len(comp.attributes) or not comp.attributes:
            problems.append(f"{where}: attributes must be nonempty and distinct")
        for c in model.classes:
            t = comp.membership.get(c.id)
            if t is None:
                problems.append(f"{where}: class {c.id} has no type assignment")
            elif t not in comp.types:
                problems.append(f"{where}: class {c.id} assigned unknown type {t!r}")
        for extra in set(comp.membership) - set(ids):
            problems.append(f"{where}: membership for unknown class {extra!r}")
        for t in comp.types:
            table = comp.weights.get(t)
            if table is None:
                problems.append(f"{where}: no weights for type {t!r}")
                continue
            for attr in comp.attributes:
                w = table.get(attr)
                if w is None:
                    problems.append(f"{where}: type {t!r} missing weight for {attr!r}")
                elif not isinstance(w, int) or not 0 <= w <= MAX_WEIGHT:
                    problems.append(
                        f"{where}: weight {w!r} for ({t}, {attr}) not an integer "
                        f"in 0..{MAX_WEIGHT}")
        for attr, cost in comp.costs.items():
            if attr not in comp.attributes:
                problems.append(f"{where}: cost for unknown attribute {attr!r}")
            elif cost <= 0:
                problems.append(f"{where}: cost for {attr!r} must be positive")
    return problems


def require_valid_model(model: FeatureModel) -> FeatureModel:
    problems = model_problems(model)
    if problems:
        raise InvalidModelError(problems)
    return model


def class_priors(model: FeatureModel) -> np.ndarray:
    """Relative belief in each class from fleet counts."""
    if not model.classes:
        raise InvalidModelError(["no classes declared"])
    counts = np.array([c.count for c in model.classes], dtype=float)
    return counts / counts.sum()


def askable_ids(model: FeatureModel) -> list[str]:
    return [observation_id(comp.name, attr)
            for comp in model.components for attr in comp.attributes]


def question_cost(model: FeatureModel, question_id: str) -> float:
    for comp in model.components:
        for attr in comp.attributes:
            if observation_id(comp.name, attr) == question_id:
                return float(comp.costs.get(attr, 1.0))
    return 1.0


def _observation_label(component: str, attribute: str) -> str:
    return f"{component.replace('-', ' ').title()} appears {attribute.replace('-', ' ')}"


def compile_bms(model: FeatureModel) -> VariableNetwork:
    """Tree-structured variable network: class -> component type ->
    binary detections, with weight/10 detection probabilities."""
    require_valid_model(model)
    priors = class_priors(model)
    nodes = [VariableNode(id=CLASS_NODE, label="Naval class",
                          states=model.class_ids(), prior=priors)]
    for comp in model.components:
        membership = np.zeros((len(model.classes), len(comp.types)))
        for i, c in enumerate(model.classes):
            membership[i, comp.types.index(comp.membership[c.id])] = 1.0
        nodes.append(VariableNode(
            id=comp.name, label=comp.name.replace("-", " ").title() + " type",
            states=list(comp.types), parents=[CLASS_NODE], cpt=membership))
        for attr in comp.attributes:
            detect = np.array([
                [comp.detection_probability(t, attr),
                 1.0 - comp.detection_probability(t, attr)]
                for t in comp.types
            ])
            nodes.append(VariableNode(
                id=observation_id(comp.name, attr),
                label=_observation_label(comp.name, attr),
                states=list(DETECTION_STATES), parents=[comp.name], cpt=detect))
    return VariableNetwork(nodes)


def compile_prospector(model: FeatureModel) -> PropositionNetwork:
    """Rule-form proposition network with link conditionals obtained by
    exact counting over the model's joint distribution."""
    require_valid_model(model)
    priors = class_priors(model)
    prior_of = dict(zip(model.class_ids(), (float(p) for p in priors)))

    nodes = [
        PropositionNode(id=c.id, label=f"Class {c.label}",
                        prior=clamp_probability(prior_of[c.id]))
        for c in model.classes
    ]
    links: list[EvidentialLink] = []

    for comp in model.components:
        fit_prior = {}
        for c in model.classes:
            members = [d.id for d in model.classes
                       if comp.membership[d.id] == comp.membership[c.id]]
            fit_prior[c.id] = sum(prior_of[m] for m in members)
            nodes.append(PropositionNode(
                id=fit_id(comp.name, c.id),
                label=f"{comp.name.replace('-', ' ').title()} fits {c.label}",
                prior=clamp_probability(fit_prior[c.id])))
        for attr in comp.attributes:
            detect = {c.id: comp.detection_probability(comp.membership[c.id], attr)
                      for c in model.classes}
            p_detect = sum(prior_of[c.id] * detect[c.id] for c in model.classes)
            nodes.append(PropositionNode(
                id=observation_id(comp.name, attr),
                label=_observation_label(comp.name, attr),
                prior=clamp_probability(p_detect),
                askable=True,
                cost=float(comp.costs.get(attr, 1.0))))
        for attr in comp.attributes:
            detect = {c.id: comp.detection_probability(comp.membership[c.id], attr)
                      for c in model.classes}
            p_detect = sum(prior_of[c.id] * detect[c.id] for c in model.classes)
            for c in model.classes:
                members = [d.id for d in model.classes
                           if comp.membership[d.id] == comp.membership[c.id]]
                joint_detect = sum(prior_of[m] * detect[m] for m in members)
                # conditioning collapses for fleet-wide certain/impossible
                # attributes; the link is emitted neutral in that case
                if 0.0 < p_detect:
                    lam1 = joint_detect / p_detect
                else:
                    lam1 = fit_prior[c.id]
                if p_detect < 1.0:
                    lam2 = (fit_prior[c.id] - joint_detect) / (1.0 - p_detect)
                else:
                    lam2 = fit_prior[c.id]
                links.append(EvidentialLink(
                    antecedent=observation_id(comp.name, attr),
                    consequent=fit_id(comp.name, c.id),
                    lambda1=clamp_probability(lam1),
                    lambda2=clamp_probability(lam2)))
        for c in model.classes:
            links.append(EvidentialLink(
                antecedent=fit_id(comp.name, c.id),
                consequent=c.id,
                lambda1=clamp_probability(prior_of[c.id] / fit_prior[c.id]),
                lambda2=clamp_probability(0.0)))
    return PropositionNetwork(nodes, links, top=model.class_ids())


# ---------------------------------------------------------------------------
# model document handling


def model_from_document(doc: dict) -> FeatureModel:
    if not isinstance(doc, dict):
        raise NetworkFormatError("model document must be a JSON object", "document")
    classes = []
    raw_classes = doc.get("classes")
    if not isinstance(raw_classes, list):
        raise NetworkFormatError("missing field 'classes'", "document")
    for i, entry in enumerate(raw_classes):
        where = f"classes[{i}]"
        if not isinstance(entry, dict) or "id" not in entry:
            raise NetworkFormatError("class entry needs an 'id'", where)
        if "count" not in entry:
            raise NetworkFormatError("class entry needs a 'count'", where)
        classes.append(ClassSpec(id=str(entry["id"]), count=int(entry["count"]),
                                 label=str(entry.get("label", ""))))
    components = []
    raw_components = doc.get("components")
    if not isinstance(raw_components, list):
        raise NetworkFormatError("missing field 'components'", "document")
    for i, entry in enumerate(raw_components):
        where = f"components[{i}]"
        if not isinstance(entry, dict):
            raise NetworkFormatError("component entry must be an object", where)
        for name in ("name", "types", "membership", "attributes", "weights"):
            if name not in entry:
                raise NetworkFormatError(f"missing field {name!r}", where)
        components.append(ComponentSpec(
            name=str(entry["name"]),
            types=[str(t) for t in entry["types"]],
            membership={str(k): str(v) for k, v in entry["membership"].items()},
            attributes=[str(a) for a in entry["attributes"]],
            weights={str(t): {str(a): w for a, w in table.items()}
                     for t, table in entry["weights"].items()},
            costs={str(a): float(v)
                   for a, v in entry.get("costs", {}).items()},
        ))
    return FeatureModel(classes=classes, components=components)


def load_model(text: str) -> FeatureModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"not valid JSON: {exc.msg}",
                                 f"line {exc.lineno} column {exc.colno}") from None
    model = model_from_document(doc)
    require_valid_model(model)
    return model
