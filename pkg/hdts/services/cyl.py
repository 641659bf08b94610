from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Iterable

from hdts.services.core import (
    ArgumentError,
    InvariantError,
    Morphism,
    Transition,
    TransitionSystem,
    inclusion,
    pair_id,
    restrict,
)


SIDES = ("0", "1")


class CylinderError(ArgumentError):
    pass


def side(element: str, epsilon: int | str) -> str:
    return pair_id(element, str(epsilon))


@dataclass(frozen=True)
class Cylinder:
    base: TransitionSystem
    system: TransitionSystem
    gamma0: Morphism
    gamma1: Morphism
    sigma: Morphism

    def gamma(self, epsilon: int) -> Morphism:
        return self.gamma0 if epsilon == 0 else self.gamma1


@dataclass(frozen=True)
class Cocylinder:
    base: TransitionSystem
    system: TransitionSystem
    pi0: Morphism
    pi1: Morphism
    state_pairs: dict[str, tuple[str, str]]
    action_pairs: dict[str, tuple[str, str]]


@dataclass(frozen=True)
class QuotientCylinder:
    base: TransitionSystem
    collapsed: frozenset[str]
    system: TransitionSystem
    projection: Morphism
    section: Morphism


def _decorations(transition: Transition) -> Iterable[Transition]:
    src, acts, tgt = transition
    for bits in product(SIDES, repeat=len(acts) + 2):
        yield (
            side(src, bits[0]),
            tuple(side(u, bit) for u, bit in zip(acts, bits[1:-1])),
            side(tgt, bits[-1]),
        )


def cylinder(system: TransitionSystem) -> Cylinder:
    cyl_system = TransitionSystem(
        alphabet=system.alphabet,
        states=tuple(side(s, e) for s in system.states for e in SIDES),
        actions=tuple((side(u, e), label) for u, label in system.actions for e in SIDES),
        transitions=frozenset(d for t in system.transitions for d in _decorations(t)),
    )
    gammas = [
        Morphism(
            source=system,
            target=cyl_system,
            state_map={s: side(s, e) for s in system.states},
            action_map={u: side(u, e) for u in system.action_ids},
        )
        for e in SIDES
    ]
    sigma = Morphism(
        source=cyl_system,
        target=system,
        state_map={side(s, e): s for s in system.states for e in SIDES},
        action_map={side(u, e): u for u in system.action_ids for e in SIDES},
    )
    for gamma in gammas:
        if gamma.then(sigma).state_map != {s: s for s in system.states}:
            raise InvariantError("sigma does not retract the cylinder insertions")
    return Cylinder(base=system, system=cyl_system, gamma0=gammas[0], gamma1=gammas[1], sigma=sigma)


def cylinder_map(morphism: Morphism) -> Morphism:
    source, target = cylinder(morphism.source), cylinder(morphism.target)
    return Morphism(
        source=source.system,
        target=target.system,
        state_map={side(s, e): side(t, e) for s, t in morphism.state_map.items() for e in SIDES},
        action_map={side(u, e): side(v, e) for u, v in morphism.action_map.items() for e in SIDES},
    )


def cylinder_inclusion(system: TransitionSystem) -> Morphism:
    """γ = γ⁰ ⊔ γ¹ : X ⊔ X → cyl(X)."""
    from hdts.services.catops import coproduct

    cyl = cylinder(system)
    doubled = coproduct([system, system])
    return doubled.copair([cyl.gamma0, cyl.gamma1])


def _mixtures_present(
    first: Transition, second: Transition, transitions: frozenset[Transition]
) -> bool:
    pair = (first, second)
    n = len(first[1])
    for bits in product((0, 1), repeat=n + 2):
        candidate = (
            pair[bits[0]][0],
            tuple(pair[bit][1][i] for i, bit in enumerate(bits[1:-1])),
            pair[bits[-1]][2],
        )
        if candidate not in transitions:
            return False
    return True


def cocylinder(system: TransitionSystem) -> Cocylinder:
    state_pairs = {pair_id(a, b): (a, b) for a in system.states for b in system.states}
    action_pairs = {
        pair_id(u, v): (u, v)
        for u, label in system.actions
        for v in system.actions_labelled(label)
    }
    by_word: dict[tuple[str, ...], list[Transition]] = defaultdict(list)
    for transition in system.sorted_transitions:
        by_word[system.label_word(transition)].append(transition)

    transitions = set()
    for group in by_word.values():
        for first in group:
            for second in group:
                if _mixtures_present(first, second, system.transitions):
                    transitions.add(
                        (
                            pair_id(first[0], second[0]),
                            tuple(pair_id(u, v) for u, v in zip(first[1], second[1])),
                            pair_id(first[2], second[2]),
                        )
                    )

    path_system = TransitionSystem(
        alphabet=system.alphabet,
        states=tuple(state_pairs),
        actions=tuple((name, system.label_of[u]) for name, (u, _) in action_pairs.items()),
        transitions=frozenset(transitions),
    )
    projections = [
        Morphism(
            source=path_system,
            target=system,
            state_map={name: pair[e] for name, pair in state_pairs.items()},
            action_map={name: pair[e] for name, pair in action_pairs.items()},
        )
        for e in (0, 1)
    ]
    return Cocylinder(
        base=system,
        system=path_system,
        pi0=projections[0],
        pi1=projections[1],
        state_pairs=state_pairs,
        action_pairs=action_pairs,
    )


def cocylinder_map(morphism: Morphism) -> Morphism:
    source, target = cocylinder(morphism.source), cocylinder(morphism.target)
    smap, amap = morphism.state_map, morphism.action_map
    return Morphism(
        source=source.system,
        target=target.system,
        state_map={name: pair_id(smap[a], smap[b]) for name, (a, b) in source.state_pairs.items()},
        action_map={name: pair_id(amap[u], amap[v]) for name, (u, v) in source.action_pairs.items()},
    )


def transpose(morphism: Morphism, base: TransitionSystem) -> Morphism:
    """Φ(f) : X → cocyl(Y) for f : cyl(X) → Y."""
    if morphism.source != cylinder(base).system:
        raise CylinderError("Transpose expects a morphism out of the cylinder of the given base.")
    path = cocylinder(morphism.target)
    smap, amap = morphism.state_map, morphism.action_map
    return Morphism(
        source=base,
        target=path.system,
        state_map={s: pair_id(smap[side(s, 0)], smap[side(s, 1)]) for s in base.states},
        action_map={u: pair_id(amap[side(u, 0)], amap[side(u, 1)]) for u in base.action_ids},
    )


def untranspose(morphism: Morphism, base: TransitionSystem) -> Morphism:
    """Φ⁻¹(g) : cyl(X) → Y for g : X → cocyl(Y)."""
    path = cocylinder(base)
    if morphism.target != path.system:
        raise CylinderError("Untranspose expects a morphism into the cocylinder of the given base.")
    cyl = cylinder(morphism.source)
    smap, amap = morphism.state_map, morphism.action_map
    return Morphism(
        source=cyl.system,
        target=base,
        state_map={
            side(s, e): path.state_pairs[smap[s]][e] for s in morphism.source.states for e in (0, 1)
        },
        action_map={
            side(u, e): path.action_pairs[amap[u]][e] for u in morphism.source.action_ids for e in (0, 1)
        },
    )


def quotient_cyl(system: TransitionSystem, collapsed: Iterable[str]) -> QuotientCylinder:
    """cyl(X)//Z: glue the two sides of every state of Z, keeping both action copies."""
    zset = frozenset(collapsed)
    unknown = zset - set(system.states)
    if unknown:
        raise CylinderError(f"Collapsed states are not states of the system: {sorted(unknown)}")
    cyl = cylinder(system)
    kept = [side(s, 0) for s in system.states] + [side(s, 1) for s in system.states if s not in zset]
    quotient = restrict(cyl.system, kept)
    projection = Morphism(
        source=cyl.system,
        target=quotient,
        state_map={
            side(s, e): side(s, 0 if s in zset else e) for s in system.states for e in (0, 1)
        },
        action_map={u: u for u in cyl.system.action_ids},
    )
    section = inclusion(quotient, cyl.system)
    if section.then(projection).state_map != {s: s for s in quotient.states}:
        raise InvariantError("quotient cylinder section is not split by the projection")
    return QuotientCylinder(
        base=system,
        collapsed=zset,
        system=quotient,
        projection=projection,
        section=section,
    )


def internal_states(system: TransitionSystem) -> frozenset[str]:
    index = system.index
    found: set[str] = set()
    for transition in system.transitions:
        n = len(transition[1])
        for p in range(1, n):
            found |= index.dividing_states(transition, p)
    return frozenset(found)
