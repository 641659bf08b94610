from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Literal

import networkx as nx

from hdts.services.core import (
    ArgumentError,
    InvariantError,
    Morphism,
    Transition,
    TransitionSystem,
    closure,
    identity,
    inclusion,
    pair_id,
    validate,
)
from hdts.services.cyl import cocylinder, internal_states, quotient_cyl, side
from hdts.services.generators import cube, cube_action
from hdts.services.search import enumerate_morphisms
from hdts.services.unionfind import DisjointSet


logger = logging.getLogger(__name__)

Variant = Literal["wts", "cts", "rts"]
VARIANTS: tuple[Variant, ...] = ("wts", "cts", "rts")


class VariantError(ArgumentError):
    pass


@dataclass(frozen=True)
class ClassificationReport:
    is_weak: bool
    all_actions_used: bool
    intermediate_state: bool
    unique_intermediate_state: bool
    witnesses: dict[str, tuple] = field(default_factory=dict)

    @property
    def is_cubical(self) -> bool:
        return self.is_weak and self.all_actions_used and self.intermediate_state

    @property
    def is_regular(self) -> bool:
        return self.is_cubical and self.unique_intermediate_state

    def belongs_to(self, variant: Variant) -> bool:
        if variant == "wts":
            return self.is_weak
        if variant == "cts":
            return self.is_cubical
        return self.is_regular


@dataclass(frozen=True)
class PointedSystem:
    system: TransitionSystem
    base: str

    def __post_init__(self) -> None:
        if self.base not in self.system.states:
            raise ArgumentError(f"Base state {self.base!r} is not a state of the system.")


@dataclass(frozen=True)
class Coreflection:
    system: TransitionSystem
    counit: Morphism


@dataclass(frozen=True)
class Reflection:
    system: TransitionSystem
    unit: Morphism


def classify(system: TransitionSystem) -> ClassificationReport:
    witnesses: dict[str, tuple] = {}
    report = validate(system)
    if not report.ok:
        witnesses["weak"] = report.violations[0].witness

    used = {acts[0] for _, acts, _ in system.transitions if len(acts) == 1}
    unused = [u for u in system.action_ids if u not in used]
    if unused:
        witnesses["all_actions_used"] = (unused[0],)

    index = system.index
    undivided = None
    ambiguous = None
    for transition in system.sorted_transitions:
        n = len(transition[1])
        for p in range(1, n):
            dividing = index.dividing_states(transition, p)
            if not dividing and undivided is None:
                undivided = (transition, p)
            if len(dividing) > 1 and ambiguous is None:
                ambiguous = (transition, p, tuple(sorted(dividing)))
    if undivided is not None:
        witnesses["intermediate_state"] = undivided
    if ambiguous is not None:
        witnesses["unique_intermediate_state"] = ambiguous

    return ClassificationReport(
        is_weak=report.ok,
        all_actions_used=not unused,
        intermediate_state=undivided is None,
        unique_intermediate_state=ambiguous is None,
        witnesses=witnesses,
    )


def require_variant(system: TransitionSystem, variant: Variant) -> ClassificationReport:
    if variant not in VARIANTS:
        raise VariantError(f"Unknown variant {variant!r}; expected one of {VARIANTS}")
    report = classify(system)
    if not report.belongs_to(variant):
        raise VariantError(f"System is not in the {variant} subcategory: {report.witnesses}")
    return report


def _cube_filler(system: TransitionSystem, transition: Transition) -> Morphism | None:
    """A map from the labelled cube whose top transition lands on `transition`, if any."""
    src, acts, tgt = transition
    labels = system.label_word(transition)
    model = cube(system.alphabet, labels)
    n = len(acts)
    fixed_actions = {cube_action(label, i): u for i, (label, u) in enumerate(zip(labels, acts), start=1)}
    return next(
        enumerate_morphisms(
            model,
            system,
            fixed_states={"0" * n: src, "1" * n: tgt},
            fixed_actions=fixed_actions,
        ),
        None,
    )


def cubicalify(system: TransitionSystem) -> Coreflection:
    covered: set[Transition] = set()
    for transition in system.sorted_transitions:
        if transition in covered:
            continue
        filler = _cube_filler(system, transition)
        if filler is None:
            continue
        covered.update(filler.apply(t) for t in filler.source.transitions)
    used = {acts[0] for _, acts, _ in covered if len(acts) == 1}
    result = closure(
        TransitionSystem(
            alphabet=system.alphabet,
            states=system.states,
            actions=tuple((u, label) for u, label in system.actions if u in used),
            transitions=frozenset(covered),
        )
    )
    if not result.transitions <= system.transitions:
        raise InvariantError("cubical coreflection produced transitions outside the system")
    if not classify(result).is_cubical:
        raise InvariantError("cubical coreflection is not cubical")
    logger.debug("cubicalify kept %d of %d transitions", len(result.transitions), len(system.transitions))
    return Coreflection(system=result, counit=inclusion(result, system))


def _quotient_states(system: TransitionSystem, classes: DisjointSet[str]) -> Morphism:
    reps = {s: classes.find(s) for s in system.states}
    quotient = closure(
        TransitionSystem(
            alphabet=system.alphabet,
            states=tuple(sorted(set(reps.values()))),
            actions=system.actions,
            transitions=frozenset(
                (reps[src], acts, reps[tgt]) for src, acts, tgt in system.transitions
            ),
        )
    )
    return Morphism(
        source=system,
        target=quotient,
        state_map=reps,
        action_map={u: u for u in system.action_ids},
    )


def quotient_states(system: TransitionSystem, pairs: list[tuple[str, str]]) -> Morphism:
    """State quotient by the equivalence generated by `pairs`, transitions re-closed."""
    classes: DisjointSet[str] = DisjointSet(system.states)
    for left, right in pairs:
        classes.union(left, right)
    return _quotient_states(system, classes)


def regularize(system: TransitionSystem) -> Reflection:
    if not classify(system).is_cubical:
        raise VariantError("regularize needs a cubical system.")
    unit = identity(system)
    current = system
    rounds = 0
    while True:
        classes: DisjointSet[str] = DisjointSet(current.states)
        merged = False
        index = current.index
        for transition in current.sorted_transitions:
            for p in range(1, len(transition[1])):
                dividing = sorted(index.dividing_states(transition, p))
                for other in dividing[1:]:
                    merged |= classes.union(dividing[0], other)
        if not merged:
            break
        rounds += 1
        step = _quotient_states(current, classes)
        logger.debug("regularize round %d: %d -> %d states", rounds, len(current.states), len(step.target.states))
        unit = unit.then(step)
        current = step.target
        if not classify(current).is_cubical:
            raise InvariantError("state quotient lost cubicality")
    if not classify(current).is_regular:
        raise InvariantError("regularize did not reach a regular system")
    return Reflection(system=current, unit=unit)


def path_space(system: TransitionSystem, variant: Variant = "wts") -> TransitionSystem:
    require_variant(system, variant)
    path = cocylinder(system).system
    if variant == "wts":
        return path
    result = cubicalify(path).system
    if variant == "rts" and not classify(result).is_regular:
        raise InvariantError("path space of a regular system is not regular")
    return result


def reachable(pointed: PointedSystem) -> frozenset[str]:
    graph = nx.DiGraph()
    graph.add_nodes_from(pointed.system.states)
    graph.add_edges_from((src, tgt) for src, _, tgt in pointed.system.transitions)
    return frozenset(nx.descendants(graph, pointed.base) | {pointed.base})


def star_coreflect(pointed: PointedSystem, variant: Variant = "wts") -> PointedSystem:
    system = pointed.system
    require_variant(system, variant)
    kept = reachable(pointed)
    transitions = frozenset(t for t in system.transitions if t[0] in kept)
    if variant == "wts":
        actions = system.actions
    else:
        used = {u for _, acts, _ in transitions for u in acts}
        actions = tuple((u, label) for u, label in system.actions if u in used)
    result = TransitionSystem(
        alphabet=system.alphabet,
        states=tuple(sorted(kept)),
        actions=actions,
        transitions=transitions,
    )
    if variant != "wts" and not classify(result).belongs_to(variant):
        raise InvariantError("star-shaped coreflection left the subcategory")
    return PointedSystem(system=result, base=pointed.base)


def star_cylinder(pointed: PointedSystem, variant: Variant = "wts") -> PointedSystem:
    system = pointed.system
    require_variant(system, variant)
    collapsed = {pointed.base}
    if variant == "rts":
        collapsed |= internal_states(system)
    quotient = quotient_cyl(system, collapsed).system
    if variant == "rts" and not classify(quotient).is_regular:
        raise InvariantError("star cylinder of a regular system is not regular")
    return PointedSystem(system=quotient, base=side(pointed.base, 0))


def same_past_pairs(pointed: PointedSystem, variant: Variant = "wts") -> frozenset[tuple[str, str]]:
    path = cocylinder(pointed.system)
    space = path_space(pointed.system, variant)
    base = pair_id(pointed.base, pointed.base)
    return frozenset(path.state_pairs[s] for s in reachable(PointedSystem(space, base)))
