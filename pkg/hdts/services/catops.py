from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
import logging
from typing import Literal, Sequence

from hdts.services.core import (
    Alphabet,
    ArgumentError,
    InvariantError,
    Morphism,
    TransitionSystem,
    closure,
    is_mono,
    pair_id,
)
from hdts.services.cyl import cylinder, cylinder_inclusion, cylinder_map
from hdts.services.generators import terminal
from hdts.services.search import enumerate_morphisms
from hdts.services.subcats import Variant, VariantError, classify, regularize
from hdts.services.unionfind import DisjointSet


logger = logging.getLogger(__name__)

Which = Literal["gamma0", "gamma1", "gamma"]


@dataclass(frozen=True)
class Diagram:
    objects: tuple[TransitionSystem, ...]
    arrows: tuple[tuple[int, int, Morphism], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "arrows", tuple(self.arrows))
        alphabets = {obj.alphabet for obj in self.objects}
        if len(alphabets) > 1:
            raise ArgumentError("All objects of a diagram must share one alphabet.")
        for i, j, morphism in self.arrows:
            if morphism.source != self.objects[i] or morphism.target != self.objects[j]:
                raise ArgumentError(f"Arrow {i} -> {j} does not match the diagram objects.")


@dataclass(frozen=True)
class Cocone:
    apex: TransitionSystem
    legs: tuple[Morphism, ...]

    def copair(self, maps: Sequence[Morphism]) -> Morphism:
        """Induced map out of the apex, given one map per leg; assumes they are compatible."""
        if len(maps) != len(self.legs):
            raise ArgumentError("Need exactly one map per cocone leg.")
        state_map: dict[str, str] = {}
        action_map: dict[str, str] = {}
        for leg, other in zip(self.legs, maps):
            for s, image in leg.state_map.items():
                _assign(state_map, image, other.state_map[s])
            for u, image in leg.action_map.items():
                _assign(action_map, image, other.action_map[u])
        return Morphism(self.apex, maps[0].target, state_map, action_map)


def _assign(mapping: dict[str, str], key: str, value: str) -> None:
    if mapping.setdefault(key, value) != value:
        raise ArgumentError(f"Maps disagree on {key!r}: {mapping[key]!r} vs {value!r}")


@dataclass(frozen=True)
class Product:
    system: TransitionSystem
    left: Morphism
    right: Morphism

    def pair(self, f: Morphism, g: Morphism) -> Morphism:
        return Morphism(
            source=f.source,
            target=self.system,
            state_map={s: pair_id(f.state_map[s], g.state_map[s]) for s in f.source.states},
            action_map={u: pair_id(f.action_map[u], g.action_map[u]) for u in f.source.action_ids},
        )


@dataclass(frozen=True)
class StarProduct:
    morphism: Morphism
    corner: Cocone
    which: Which = field(default="gamma0")


def hom(source: TransitionSystem, target: TransitionSystem) -> list[Morphism]:
    if source.alphabet != target.alphabet:
        raise ArgumentError("hom needs both systems over the same alphabet.")
    return list(enumerate_morphisms(source, target))


def product(left: TransitionSystem, right: TransitionSystem) -> Product:
    if left.alphabet != right.alphabet:
        raise ArgumentError("product needs both systems over the same alphabet.")
    actions = {
        pair_id(u, v): (u, v, label)
        for u, label in left.actions
        for v in right.actions_labelled(label)
    }
    transitions = set()
    for t in left.transitions:
        word = left.label_word(t)
        for s in right.transitions:
            if right.label_word(s) == word:
                transitions.add(
                    (
                        pair_id(t[0], s[0]),
                        tuple(pair_id(u, v) for u, v in zip(t[1], s[1])),
                        pair_id(t[2], s[2]),
                    )
                )
    system = TransitionSystem(
        alphabet=left.alphabet,
        states=tuple(pair_id(a, b) for a in left.states for b in right.states),
        actions=tuple((name, label) for name, (_, _, label) in actions.items()),
        transitions=frozenset(transitions),
    )
    projections = [
        Morphism(
            source=system,
            target=factor,
            state_map={pair_id(a, b): (a, b)[k] for a in left.states for b in right.states},
            action_map={name: value[k] for name, value in actions.items()},
        )
        for k, factor in enumerate((left, right))
    ]
    return Product(system=system, left=projections[0], right=projections[1])


def coproduct(systems: Sequence[TransitionSystem], alphabet: Alphabet | None = None) -> Cocone:
    if not systems:
        if alphabet is None:
            raise ArgumentError("An empty coproduct needs an explicit alphabet.")
        return Cocone(TransitionSystem(alphabet=alphabet, states=(), actions=()), ())
    if len({x.alphabet for x in systems}) > 1:
        raise ArgumentError("coproduct needs systems over one alphabet.")

    def tag(i: int, name: str) -> str:
        return pair_id(str(i), name)

    apex = TransitionSystem(
        alphabet=systems[0].alphabet,
        states=tuple(tag(i, s) for i, x in enumerate(systems) for s in x.states),
        actions=tuple((tag(i, u), label) for i, x in enumerate(systems) for u, label in x.actions),
        transitions=frozenset(
            (tag(i, src), tuple(tag(i, u) for u in acts), tag(i, tgt))
            for i, x in enumerate(systems)
            for src, acts, tgt in x.transitions
        ),
    )
    legs = tuple(
        Morphism(
            source=x,
            target=apex,
            state_map={s: tag(i, s) for s in x.states},
            action_map={u: tag(i, u) for u in x.action_ids},
        )
        for i, x in enumerate(systems)
    )
    return Cocone(apex, legs)


def _canonical_names(representatives: list[tuple[int, str]]) -> dict[tuple[int, str], str]:
    """Keep a representative's own name when that is unambiguous; tag it otherwise."""
    counts = Counter(name for _, name in representatives)
    names = {rep: rep[1] if counts[rep[1]] == 1 else pair_id(str(rep[0]), rep[1]) for rep in representatives}
    if len(set(names.values())) != len(names):
        names = {rep: pair_id(str(rep[0]), rep[1]) for rep in representatives}
    return names


def _set_colimit(
    families: Sequence[Sequence[str]],
    arrows: Sequence[tuple[int, int, dict[str, str]]],
) -> dict[tuple[int, str], str]:
    classes: DisjointSet[tuple[int, str]] = DisjointSet(
        (i, element) for i, family in enumerate(families) for element in family
    )
    for i, j, mapping in arrows:
        for element, image in mapping.items():
            classes.union((i, element), (j, image))
    reps = classes.representative_map()
    names = _canonical_names(sorted(set(reps.values())))
    return {element: names[rep] for element, rep in reps.items()}


def colimit(diagram: Diagram, variant: Variant = "wts") -> Cocone:
    objects = diagram.objects
    if not objects:
        raise ArgumentError("Colimit of an empty diagram needs coproduct([], alphabet).")
    if variant in ("cts", "rts"):
        for obj in objects:
            report = classify(obj)
            if not report.is_cubical:
                raise VariantError("cts/rts colimits need cubical inputs.")

    state_names = _set_colimit(
        [x.states for x in objects], [(i, j, f.state_map) for i, j, f in diagram.arrows]
    )
    action_names = _set_colimit(
        [x.action_ids for x in objects], [(i, j, f.action_map) for i, j, f in diagram.arrows]
    )
    labels = {action_names[(i, u)]: x.label_of[u] for i, x in enumerate(objects) for u in x.action_ids}
    images = {
        (state_names[(i, src)], tuple(action_names[(i, u)] for u in acts), state_names[(i, tgt)])
        for i, x in enumerate(objects)
        for src, acts, tgt in x.transitions
    }
    apex = closure(
        TransitionSystem(
            alphabet=objects[0].alphabet,
            states=tuple(sorted(set(state_names.values()))),
            actions=tuple(sorted(labels.items())),
            transitions=frozenset(images),
        )
    )
    legs = tuple(
        Morphism(
            source=x,
            target=apex,
            state_map={s: state_names[(i, s)] for s in x.states},
            action_map={u: action_names[(i, u)] for u in x.action_ids},
        )
        for i, x in enumerate(objects)
    )
    logger.debug("colimit of %d objects: %s", len(objects), apex.summary())

    if variant == "cts":
        if not classify(apex).is_cubical:
            raise InvariantError("colimit of cubical systems is not cubical")
    elif variant == "rts":
        reflection = regularize(apex)
        legs = tuple(leg.then(reflection.unit) for leg in legs)
        apex = reflection.system
    return Cocone(apex, legs)


def pushout(left: Morphism, right: Morphism, variant: Variant = "wts") -> Cocone:
    """Pushout of B ← A → C; legs are (B, A, C) → apex."""
    if left.source != right.source:
        raise ArgumentError("Pushout needs two morphisms out of the same object.")
    diagram = Diagram(
        objects=(left.target, left.source, right.target),
        arrows=((1, 0, left), (1, 2, right)),
    )
    return colimit(diagram, variant)


def factorizations(cocone: Cocone, maps: Sequence[Morphism]) -> list[Morphism]:
    """All morphisms h out of the apex with h ∘ leg_i = maps_i."""
    fixed_states: dict[str, str] = {}
    fixed_actions: dict[str, str] = {}
    for leg, other in zip(cocone.legs, maps):
        for s, image in leg.state_map.items():
            if fixed_states.setdefault(image, other.state_map[s]) != other.state_map[s]:
                return []
        for u, image in leg.action_map.items():
            if fixed_actions.setdefault(image, other.action_map[u]) != other.action_map[u]:
                return []
    target = maps[0].target
    return list(
        enumerate_morphisms(cocone.apex, target, fixed_states=fixed_states, fixed_actions=fixed_actions)
    )


def terminal_map(system: TransitionSystem, d: int) -> Morphism:
    if system.dimension > d:
        raise ArgumentError(f"System of dimension {system.dimension} does not map to the terminal truncated at {d}.")
    return Morphism(
        source=system,
        target=terminal(system.alphabet, d),
        state_map={s: "0" for s in system.states},
        action_map=dict(system.label_of),
    )


def star_product(morphism: Morphism, which: Which = "gamma0") -> StarProduct:
    """Map from the pushout corner B ⊔_A cyl(A) (or (B⊔B) ⊔_{A⊔A} cyl(A)) into cyl(B)."""
    source, target = morphism.source, morphism.target
    cyl_source, cyl_target = cylinder(source), cylinder(target)
    if which == "gamma":
        doubled_source = coproduct([source, source])
        doubled_target = coproduct([target, target])
        along = doubled_source.copair([morphism.then(doubled_target.legs[0]), morphism.then(doubled_target.legs[1])])
        left = along
        corner = pushout(along, cylinder_inclusion(source))
        into_cyl = doubled_target.copair([cyl_target.gamma0, cyl_target.gamma1])
    else:
        epsilon = 0 if which == "gamma0" else 1
        left = morphism
        corner = pushout(morphism, cyl_source.gamma(epsilon))
        into_cyl = cyl_target.gamma(epsilon)
    induced = corner.copair([into_cyl, left.then(into_cyl), cylinder_map(morphism)])
    if is_mono(morphism).ok and not is_mono(induced).ok:
        raise InvariantError("pushout-product of a mono is not a mono")
    return StarProduct(morphism=induced, corner=corner, which=which)

