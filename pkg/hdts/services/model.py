from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product as cartesian
import logging
from typing import Iterable, Literal, Mapping

from hdts.services.catops import Cocone, Diagram, StarProduct, colimit, pushout, star_product
from hdts.services.core import (
    Alphabet,
    ArgumentError,
    InvariantError,
    Morphism,
    Transition,
    TransitionSystem,
    check_morphism,
    discrete_part,
    find_isomorphism,
    inclusion,
    is_mono,
    pair_id,
    quote_id,
)
from hdts.services.generators import boundary_cube, cube, cube_action, double, empty, point, pure_cube, action
from hdts.services.search import enumerate_morphisms
from hdts.services.subcats import Variant, classify, quotient_states, regularize, require_variant


logger = logging.getLogger(__name__)

SetName = Literal["I", "I_CTS", "I_RTS"]
R_NAME = "R"


class LiftingError(ArgumentError):
    pass


class RelocationError(ArgumentError):
    pass


@dataclass(frozen=True)
class Generator:
    name: str
    morphism: Morphism

    @property
    def is_r(self) -> bool:
        return self.name == R_NAME


@dataclass(frozen=True)
class GeneratingSet:
    name: SetName
    members: tuple[Generator, ...]

    def __len__(self) -> int:
        return len(self.members)


def r_map(alphabet: Alphabet) -> Generator:
    two = TransitionSystem(alphabet=alphabet, states=("0", "1"), actions=())
    return Generator(R_NAME, Morphism(two, point(alphabet), {"0": "0", "1": "0"}, {}))


def _words(alphabet: Alphabet, d: int):
    for n in range(1, d + 1):
        yield from cartesian(alphabet.labels, repeat=n)


def _word_name(kind: str, word: tuple[str, ...]) -> str:
    return f"{kind}[{','.join(quote_id(x) for x in word)}]"


def generating_set(name: SetName, alphabet: Alphabet, d: int) -> GeneratingSet:
    if d < 1:
        raise ArgumentError("Generating sets need a dimension bound of at least 1.")
    nothing = empty(alphabet)
    members = [Generator("point", Morphism(nothing, point(alphabet), {}, {}))]
    if name == "I":
        for x in alphabet.labels:
            members.append(Generator(_word_name("action", (x,)), Morphism(nothing, action(alphabet, x), {}, {})))
        for word in _words(alphabet, d):
            top = pure_cube(alphabet, word)
            members.append(Generator(_word_name("pure", word), inclusion(discrete_part(top), top)))
    elif name in ("I_CTS", "I_RTS"):
        for word in _words(alphabet, d):
            members.append(
                Generator(_word_name("boundary", word), inclusion(boundary_cube(alphabet, word), cube(alphabet, word)))
            )
        for x in alphabet.labels:
            members.append(
                Generator(
                    _word_name("double", (x,)),
                    Morphism(cube(alphabet, (x,)), double(alphabet, x), {"0": "1", "1": "2"}, {cube_action(x, 1): x}),
                )
            )
    else:
        raise ArgumentError(f"Unknown generating set {name!r}")
    return GeneratingSet(name=name, members=tuple(members))


@dataclass(frozen=True)
class CofibrationVerdict:
    ok: bool
    procedure: str
    witness: tuple | None = None
    note: str = ""


def _preimage_system(morphism: Morphism) -> tuple[TransitionSystem, Morphism, Morphism]:
    """Unmerge f's target: keep A's elements apart, pull back every target transition."""
    source, target = morphism.source, morphism.target

    def tag(kind: str, name: str) -> str:
        return pair_id(kind, name)

    state_image = {tag("a", s): morphism.state_map[s] for s in source.states}
    covered = set(morphism.state_map.values())
    state_image.update({tag("b", s): s for s in target.states if s not in covered})
    action_image = {tag("a", u): morphism.action_map[u] for u in source.action_ids}
    hit = set(morphism.action_map.values())
    action_image.update({tag("b", u): u for u in target.action_ids if u not in hit})

    preimages: dict[str, list[str]] = {}
    for name, image in sorted(state_image.items()):
        preimages.setdefault(image, []).append(name)
    action_preimage = {image: name for name, image in action_image.items()}

    transitions = set()
    for src, acts, tgt in target.transitions:
        word = tuple(action_preimage[u] for u in acts)
        for start in preimages[src]:
            for end in preimages[tgt]:
                transitions.add((start, word, end))
    unmerged = TransitionSystem(
        alphabet=target.alphabet,
        states=tuple(state_image),
        actions=tuple((name, target.label_of[image]) for name, image in action_image.items()),
        transitions=frozenset(transitions),
    )
    embedding = Morphism(
        source=source,
        target=unmerged,
        state_map={s: tag("a", s) for s in source.states},
        action_map={u: tag("a", u) for u in source.action_ids},
    )
    projection = Morphism(unmerged, target, state_image, action_image)
    return unmerged, embedding, projection


def is_cofibration(morphism: Morphism, variant: Variant = "wts") -> CofibrationVerdict:
    if variant in ("wts", "cts"):
        verdict = is_mono(morphism)
        return CofibrationVerdict(
            ok=verdict.ok,
            procedure="injective on states and on actions",
            witness=verdict.witness,
        )

    # the source may be weak: ∂C_1[x] carries an action with no transition
    require_variant(morphism.target, "rts")
    procedure = "regular reflection of a monomorphism onto the full preimage of the target"
    if not morphism.actions_injective():
        verdict = is_mono(morphism)
        return CofibrationVerdict(False, procedure, verdict.witness, "cofibrations never identify actions")

    unmerged, embedding, projection = _preimage_system(morphism)
    unit = regularize(unmerged).unit
    induced: dict[str, str] = {}
    consistent = True
    for name, rep in unit.state_map.items():
        image = projection.state_map[name]
        consistent &= induced.setdefault(rep, image) == image
    bijective = consistent and len(induced) == len(morphism.target.states)
    if bijective:
        pushed = {
            (induced[src], tuple(projection.action_map[u] for u in acts), induced[tgt])
            for src, acts, tgt in unit.target.transitions
        }
        if pushed == set(morphism.target.transitions):
            return CofibrationVerdict(
                True,
                procedure,
                note="exact: the map is the regular reflection of a mono into a cubical system",
            )
    reflected = embedding.then(unit).state_map
    unexplained = next(
        (
            (s, t)
            for s in morphism.source.states
            for t in morphism.source.states
            if s < t and morphism.state_map[s] == morphism.state_map[t] and reflected[s] != reflected[t]
        ),
        None,
    )
    return CofibrationVerdict(
        False,
        procedure,
        witness=unexplained,
        note="sound but incomplete: no presentation as a reflected mono was found",
    )


@dataclass(frozen=True)
class LiftingProblem:
    f: Morphism
    g: Morphism
    top: Morphism
    bottom: Morphism

    def __post_init__(self) -> None:
        if self.top.source != self.f.source or self.top.target != self.g.source:
            raise LiftingError("top must go from the source of f to the source of g.")
        if self.bottom.source != self.f.target or self.bottom.target != self.g.target:
            raise LiftingError("bottom must go from the target of f to the target of g.")
        left = self.top.then(self.g)
        right = self.f.then(self.bottom)
        if left.state_map != right.state_map or left.action_map != right.action_map:
            raise LiftingError("The lifting square does not commute.")


def _extensions(f: Morphism, top: Morphism, bottom: Morphism | None = None, g: Morphism | None = None):
    fixed_states: dict[str, str] = {}
    fixed_actions: dict[str, str] = {}
    for s, image in f.state_map.items():
        if fixed_states.setdefault(image, top.state_map[s]) != top.state_map[s]:
            return iter(())
    for u, image in f.action_map.items():
        if fixed_actions.setdefault(image, top.action_map[u]) != top.action_map[u]:
            return iter(())
    state_candidates = action_candidates = None
    if bottom is not None and g is not None:
        over_states: dict[str, list[str]] = {}
        for x, y in g.state_map.items():
            over_states.setdefault(y, []).append(x)
        over_actions: dict[str, list[str]] = {}
        for x, y in g.action_map.items():
            over_actions.setdefault(y, []).append(x)
        state_candidates = {b: over_states.get(y, []) for b, y in bottom.state_map.items()}
        action_candidates = {b: over_actions.get(y, []) for b, y in bottom.action_map.items()}
    return enumerate_morphisms(
        f.target,
        top.target,
        fixed_states=fixed_states,
        fixed_actions=fixed_actions,
        state_candidates=state_candidates,
        action_candidates=action_candidates,
    )


def lift(problem: LiftingProblem) -> Morphism | None:
    return next(_extensions(problem.f, problem.top, problem.bottom, problem.g), None)


@dataclass(frozen=True)
class Factorization:
    minus: Morphism
    plus: Morphism


def factor_R(morphism: Morphism) -> Factorization:
    by_image: dict[str, list[str]] = {}
    for s in sorted(morphism.state_map):
        by_image.setdefault(morphism.state_map[s], []).append(s)
    pairs = [(group[0], other) for group in by_image.values() for other in group[1:]]
    minus = quotient_states(morphism.source, pairs)
    plus = Morphism(
        source=minus.target,
        target=morphism.target,
        state_map={rep: morphism.state_map[s] for s, rep in minus.state_map.items()},
        action_map=dict(morphism.action_map),
    )
    if check_morphism(plus).violations or not plus.states_injective():
        raise InvariantError("factor_R produced an invalid or non-injective right factor")
    return Factorization(minus=minus, plus=plus)


@dataclass(frozen=True)
class Cell:
    generator: Generator
    attach: Morphism

    def __post_init__(self) -> None:
        if self.attach.source != self.generator.morphism.source:
            raise ArgumentError(f"Attaching map of cell {self.generator.name} has the wrong source.")


@dataclass(frozen=True)
class CellularDecomposition:
    base: TransitionSystem
    cells: tuple[Cell, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", tuple(self.cells))
        stage = self.base
        cocones = []
        for position, cell in enumerate(self.cells):
            if cell.attach.target != stage:
                raise ArgumentError(f"Cell {position} is not attached to the stage before it.")
            cocones.append(pushout(cell.attach, cell.generator.morphism))
            stage = cocones[-1].apex
        object.__setattr__(self, "_pushouts", tuple(cocones))

    @property
    def pushouts(self) -> tuple[Cocone, ...]:
        return self._pushouts

    @cached_property
    def stages(self) -> tuple[TransitionSystem, ...]:
        return (self.base, *(p.apex for p in self.pushouts))

    @cached_property
    def composite(self) -> Morphism:
        result = inclusion(self.base, self.base)
        for cocone in self.pushouts:
            result = result.then(cocone.legs[0])
        return result

    def front_loaded(self) -> bool:
        seen_other = False
        for cell in self.cells:
            if cell.generator.is_r and seen_other:
                return False
            seen_other |= not cell.generator.is_r
        return True


def build_decomposition(
    base: TransitionSystem,
    cells: Iterable[tuple[Generator, Mapping[str, str], Mapping[str, str]]],
) -> CellularDecomposition:
    """Attach cells one after the other; each attaching map is read against the stage built so far."""
    stage = base
    built: list[Cell] = []
    for generator, state_map, action_map in cells:
        attach = Morphism(generator.morphism.source, stage, state_map, action_map)
        built.append(Cell(generator, attach))
        stage = pushout(attach, generator.morphism).apex
    return CellularDecomposition(base=base, cells=tuple(built))


def _descend(cover: Morphism, mapping: Morphism) -> Morphism:
    """The map m with m ∘ cover = mapping, for cover onto its target."""
    state_map: dict[str, str] = {}
    action_map: dict[str, str] = {}
    for s, image in cover.state_map.items():
        if state_map.setdefault(image, mapping.state_map[s]) != mapping.state_map[s]:
            raise InvariantError("relocated stage does not descend to the final composite")
    for u, image in cover.action_map.items():
        if action_map.setdefault(image, mapping.action_map[u]) != mapping.action_map[u]:
            raise InvariantError("relocated stage does not descend to the final composite")
    return Morphism(cover.target, mapping.target, state_map, action_map)


def _fresh_states(generator: Generator) -> list[str]:
    g = generator.morphism
    hit = set(g.state_map.values())
    return [s for s in g.target.states if s not in hit]


def relocate(decomposition: CellularDecomposition) -> CellularDecomposition:
    cells = decomposition.cells
    for cell in cells:
        if not cell.generator.is_r and not cell.generator.morphism.states_injective():
            raise RelocationError(f"Cell {cell.generator.name} is not injective on states.")
    if decomposition.front_loaded():
        return decomposition

    base = decomposition.base
    alphabet = base.alphabet
    stages, cocones = decomposition.stages, decomposition.pushouts
    # to_final[k] : X_k -> last stage
    to_final = [inclusion(stages[-1], stages[-1])]
    for cocone in reversed(cocones):
        to_final.insert(0, cocone.legs[0].then(to_final[0]))

    r = r_map(alphabet)
    spare = {g.name: g for g in generating_set("I_CTS", alphabet, 1).members}
    new_cells: list[Cell] = []
    current = base
    # psi : X_k -> current, onto
    psi = inclusion(base, base)

    def attach(generator: Generator, state_map: Mapping[str, str], action_map: Mapping[str, str]) -> Cocone:
        nonlocal current, psi
        glue = Morphism(generator.morphism.source, current, state_map, action_map)
        square = pushout(glue, generator.morphism)
        new_cells.append(Cell(generator, glue))
        psi = psi.then(square.legs[0])
        current = square.apex
        return square

    by_image: dict[str, list[str]] = {}
    for s in base.states:
        by_image.setdefault(to_final[0].state_map[s], []).append(s)
    for group in by_image.values():
        group.sort()
        for other in group[1:]:
            attach(r, {"0": psi.state_map[group[0]], "1": psi.state_map[other]}, {})

    for k, cell in enumerate(cells):
        cocone = cocones[k]
        g = cell.generator.morphism
        if cell.generator.is_r:
            # psi already identifies the two states
            w = Morphism(g.target, current, {"0": psi.state_map[cell.attach.state_map["0"]]}, {})
            psi = cocone.copair([psi, cell.attach.then(psi), w])
            continue

        reverse = {image: y for y, image in _descend(psi, to_final[k]).state_map.items()}
        fresh = _fresh_states(cell.generator)
        fresh_images = [cocone.legs[2].then(to_final[k + 1]).state_map[s] for s in fresh]
        if len(set(fresh_images)) == len(fresh_images) and not any(image in reverse for image in fresh_images):
            glue = cell.attach.then(psi)
            square = attach(cell.generator, glue.state_map, glue.action_map)
            psi = cocone.copair([psi, cell.attach.then(psi), square.legs[2]])
            continue

        # Later R-cells glue fresh states of this cell onto others: add only the missing
        # states as points, then each new 1-transition as a filled ∂C_1.
        glue = cell.attach.then(psi)
        w_states = {g.state_map[s]: glue.state_map[s] for s in g.source.states}
        w_actions = {g.action_map[u]: glue.action_map[u] for u in g.source.action_ids}
        if set(w_actions) != set(g.target.action_ids):
            raise RelocationError(f"Cell {cell.generator.name} adds actions on states that a later R-cell identifies.")

        def follow(leg: Morphism) -> None:
            nonlocal w_states, w_actions, reverse
            w_states = {t: leg.state_map[v] for t, v in w_states.items()}
            w_actions = {u: leg.action_map[v] for u, v in w_actions.items()}
            reverse = {image: leg.state_map[v] for image, v in reverse.items()}

        for s, image in zip(fresh, fresh_images):
            if image not in reverse:
                square = attach(spare["point"], {}, {})
                follow(square.legs[0])
                reverse[image] = square.legs[2].state_map["0"]
            w_states[s] = reverse[image]

        covered = {g.apply(t) for t in g.source.transitions}
        for src, acts, tgt in sorted(g.target.transitions - covered):
            if len(acts) != 1:
                raise RelocationError(
                    f"Cell {cell.generator.name} adds a {len(acts)}-transition on states that a later R-cell identifies."
                )
            edge = (w_states[src], (w_actions[acts[0]],), w_states[tgt])
            if edge in current.transitions:
                continue
            label = g.target.label_of[acts[0]]
            square = attach(
                spare[_word_name("boundary", (label,))],
                {"0": edge[0], "1": edge[2]},
                {cube_action(label, 1): edge[1][0]},
            )
            follow(square.legs[0])

        w = Morphism(g.target, current, w_states, w_actions)
        psi = cocone.copair([psi, cell.attach.then(psi), w])

    logger.debug("relocated %d cells into %d", len(cells), len(new_cells))
    return CellularDecomposition(base=base, cells=tuple(new_cells))


def composites_agree(left: CellularDecomposition, right: CellularDecomposition) -> Morphism | None:
    """An isomorphism between the two final stages under the common base, if one exists."""
    if left.base != right.base:
        raise ArgumentError("Decompositions must share their base.")
    fixed_states: dict[str, str] = {}
    fixed_actions: dict[str, str] = {}
    for s in left.base.states:
        image = left.composite.state_map[s]
        if fixed_states.setdefault(image, right.composite.state_map[s]) != right.composite.state_map[s]:
            return None
    for u in left.base.action_ids:
        image = left.composite.action_map[u]
        if fixed_actions.setdefault(image, right.composite.action_map[u]) != right.composite.action_map[u]:
            return None
    return find_isomorphism(left.stages[-1], right.stages[-1], fixed_states, fixed_actions)


@dataclass(frozen=True)
class SaturationCell:
    round: int
    generator: str
    which: str
    top: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Saturation:
    system: TransitionSystem
    insertion: Morphism
    trace: tuple[SaturationCell, ...] = field(default_factory=tuple)


def _anodyne(system: TransitionSystem, variant: Variant) -> list[tuple[str, StarProduct]]:
    d = max(system.dimension, 1)
    generators = generating_set("I" if variant == "wts" else "I_CTS", system.alphabet, d)
    return [
        (generator.name, star_product(generator.morphism, which))
        for generator in generators.members
        for which in ("gamma0", "gamma1")
    ]


def saturate(system: TransitionSystem, variant: Variant = "wts", rounds: int = 1) -> Saturation:
    if rounds < 1:
        raise ArgumentError("saturate needs at least one round.")
    require_variant(system, variant)
    anodyne = _anodyne(system, variant)
    current = system
    insertion = inclusion(system, system)
    trace: list[SaturationCell] = []

    for round_number in range(1, rounds + 1):
        defects: list[tuple[str, StarProduct, Morphism]] = []
        for name, star in anodyne:
            j = star.morphism
            for top in enumerate_morphisms(j.source, current):
                if next(_extensions(j, top), None) is None:
                    defects.append((name, star, top))
        logger.debug("saturation round %d: %d unsolved squares", round_number, len(defects))
        if not defects:
            break

        objects = [current]
        arrows = []
        for name, star, top in defects:
            objects.extend([star.morphism.source, star.morphism.target])
            p, cyl_b = len(objects) - 2, len(objects) - 1
            arrows.append((p, 0, top))
            arrows.append((p, cyl_b, star.morphism))
            trace.append(
                SaturationCell(
                    round=round_number,
                    generator=name,
                    which=star.which,
                    top=tuple(sorted(top.state_map.items())),
                )
            )
        glued = colimit(Diagram(objects=tuple(objects), arrows=tuple(arrows)))
        step = glued.legs[0]
        if variant == "rts":
            reflection = regularize(glued.apex)
            step = step.then(reflection.unit)
        elif variant == "cts" and not classify(glued.apex).is_cubical:
            raise InvariantError("cubical saturation left the cubical subcategory")
        insertion = insertion.then(step)
        current = step.target

    return Saturation(system=current, insertion=insertion, trace=tuple(trace))


@dataclass(frozen=True)
class CollapseReport:
    collapsed: bool
    obligations: int
    # (transition of the original, its label word, start, end) per unmet obligation
    missing: tuple[tuple[Transition, tuple[str, ...], str, str], ...] = ()


def causal_collapse_check(original: TransitionSystem, saturated: TransitionSystem, insertion: Morphism) -> CollapseReport:
    if insertion.source != original or insertion.target != saturated:
        raise ArgumentError("The insertion must map the original system into the saturated one.")
    if not check_morphism(insertion).ok:
        raise ArgumentError("The insertion is not a valid morphism.")

    words_between: dict[tuple[str, str], set[tuple[str, ...]]] = {}
    for transition in saturated.transitions:
        words_between.setdefault((transition[0], transition[2]), set()).add(saturated.label_word(transition))

    obligations = 0
    missing = []
    for transition in original.sorted_transitions:
        word = original.label_word(transition)
        for start in original.states:
            for end in original.states:
                obligations += 1
                pair = (insertion.state_map[start], insertion.state_map[end])
                if word not in words_between.get(pair, set()):
                    missing.append((transition, word, start, end))
    return CollapseReport(collapsed=not missing, obligations=obligations, missing=tuple(missing))
