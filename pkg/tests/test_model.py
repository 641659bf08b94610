import random

import pytest

from hdts.services.catops import hom, pushout, terminal_map
from hdts.services.core import (
    Alphabet,
    ArgumentError,
    Morphism,
    TransitionSystem,
    check_morphism,
    find_isomorphism,
    identity,
)
from hdts.services.cyl import cylinder, cylinder_inclusion
from hdts.services.generators import action, cube, double, empty, interval, point
from hdts.services.model import (
    LiftingError,
    LiftingProblem,
    build_decomposition,
    causal_collapse_check,
    composites_agree,
    factor_R,
    generating_set,
    is_cofibration,
    lift,
    r_map,
    relocate,
    saturate,
)
from hdts.services.subcats import regularize
from tests.corpus import SIGMA, corpus, small

A = Alphabet(("a",))


def _seed() -> TransitionSystem:
    return TransitionSystem(
        alphabet=A,
        states=("0", "1", "p"),
        actions=(("u", "a"),),
        transitions=frozenset({("0", ("u",), "1")}),
    )


def _discrete(alphabet: Alphabet, *states: str) -> TransitionSystem:
    return TransitionSystem(alphabet=alphabet, states=states, actions=())


def _unused_action_base() -> TransitionSystem:
    return TransitionSystem(alphabet=A, states=("0", "1"), actions=(("u", "a"),))


def test_generating_set_sizes() -> None:
    assert len(generating_set("I", A, 1)) == 3
    assert len(generating_set("I_CTS", A, 1)) == 3
    assert len(generating_set("I", SIGMA, 2)) == 1 + 2 + 6
    cts, rts = generating_set("I_CTS", SIGMA, 2), generating_set("I_RTS", SIGMA, 2)
    assert [g.name for g in cts.members] == [g.name for g in rts.members]
    assert [g.morphism for g in cts.members] == [g.morphism for g in rts.members]
    with pytest.raises(ArgumentError):
        generating_set("I", A, 0)


def test_generators_are_cofibrations() -> None:
    for member in generating_set("I", SIGMA, 2).members:
        assert is_cofibration(member.morphism, "wts").ok, member.name
        assert member.morphism.states_injective()
    for member in generating_set("I_CTS", SIGMA, 2).members:
        assert is_cofibration(member.morphism, "cts").ok, member.name
    for member in generating_set("I_RTS", SIGMA, 2).members:
        assert is_cofibration(member.morphism, "rts").ok, member.name


def test_cofibration_verdicts() -> None:
    square = cube(SIGMA, ("a", "b"))
    assert is_cofibration(cylinder_inclusion(square), "wts").ok
    r = r_map(SIGMA).morphism
    assert not is_cofibration(r, "wts").ok
    assert not is_cofibration(r, "cts").ok
    assert is_cofibration(r, "wts").witness == ("state", "0", "1")


def test_regular_cofibration_may_identify_states() -> None:
    square = cube(SIGMA, ("a", "b"))
    reflection = regularize(cylinder(square).system)
    glued = cylinder_inclusion(square).then(reflection.unit)
    verdict = is_cofibration(glued, "rts")
    assert verdict.ok
    assert not glued.states_injective()


def test_regular_cofibration_rejects_identified_actions() -> None:
    edge = cube(SIGMA, ("a",))
    doubled = TransitionSystem(
        alphabet=SIGMA,
        states=("0", "1"),
        actions=(("u", "a"), ("v", "a")),
        transitions=frozenset({("0", ("u",), "1"), ("0", ("v",), "1")}),
    )
    folded = Morphism(doubled, edge, {"0": "0", "1": "1"}, {"u": "(a,1)", "v": "(a,1)"})
    assert not is_cofibration(folded, "rts").ok


def test_lifting_against_the_terminal() -> None:
    v = interval(SIGMA, 2)
    g = terminal_map(v, 2)
    nothing, dot = empty(SIGMA), point(SIGMA)
    f = Morphism(nothing, dot, {}, {})
    problem = LiftingProblem(f=f, g=g, top=Morphism(nothing, v, {}, {}), bottom=Morphism(dot, g.target, {"0": "0"}, {}))
    found = lift(problem)
    assert found is not None
    assert found.then(g) == problem.bottom

    letter = action(SIGMA, "a")
    f = Morphism(nothing, letter, {}, {})
    problem = LiftingProblem(f=f, g=g, top=Morphism(nothing, v, {}, {}), bottom=Morphism(letter, g.target, {}, {"a": "a"}))
    assert lift(problem).action_map["a"] in ("(a,0)", "(a,1)")


def test_collapse_has_no_lift_into_separated_states() -> None:
    r = r_map(SIGMA).morphism
    cyl = cylinder(point(SIGMA))
    top = Morphism(r.source, cyl.system, {"0": "(0,0)", "1": "(0,1)"}, {})
    bottom = Morphism(r.target, point(SIGMA), {"0": "0"}, {})
    assert lift(LiftingProblem(f=r, g=cyl.sigma, top=top, bottom=bottom)) is None


def test_lifting_rejects_squares_that_do_not_commute() -> None:
    r = r_map(SIGMA).morphism
    edge = cube(SIGMA, ("a",))
    g = identity(edge)
    top = Morphism(r.source, edge, {"0": "0", "1": "1"}, {})
    bottom = Morphism(r.target, edge, {"0": "0"}, {})
    with pytest.raises(LiftingError):
        LiftingProblem(f=r, g=g, top=top, bottom=bottom)


def test_lift_agrees_with_exhaustive_search() -> None:
    members = generating_set("I", A, 1).members
    targets = [cylinder(point(A)).sigma, cylinder(cube(A, ("a",))).sigma, terminal_map(interval(A, 1), 1)]
    checked = 0
    for member in members:
        f = member.morphism
        for g in targets:
            for bottom in hom(f.target, g.target):
                for top in hom(f.source, g.source):
                    if top.then(g) != f.then(bottom):
                        continue
                    expected = any(
                        f.then(candidate) == top and candidate.then(g) == bottom
                        for candidate in hom(f.target, g.source)
                    )
                    found = lift(LiftingProblem(f=f, g=g, top=top, bottom=bottom))
                    assert (found is not None) == expected
                    checked += 1
    assert checked > 0


def test_factor_r_examples() -> None:
    inclusion_like = cylinder(cube(SIGMA, ("a",))).gamma0
    factors = factor_R(inclusion_like)
    assert factors.minus.source == factors.minus.target

    three = _discrete(SIGMA, "0", "1", "2")
    collapse = Morphism(three, point(SIGMA), {s: "0" for s in three.states}, {})
    assert len(factor_R(collapse).minus.target.states) == 1

    sigma = cylinder(cube(SIGMA, ("a",))).sigma
    factors = factor_R(sigma)
    assert len(factors.minus.target.states) == 2
    assert factors.plus.states_injective()
    assert check_morphism(factors.plus).ok
    assert factors.minus.then(factors.plus) == sigma


def test_factor_r_is_unique_up_to_isomorphism() -> None:
    x, y = cylinder(cube(SIGMA, ("a", "b"))).system, cube(SIGMA, ("a", "b"))
    for f in hom(x, y)[:6]:
        first = factor_R(f)
        again = factor_R(first.minus.then(first.plus))
        assert find_isomorphism(first.minus.target, again.minus.target) is not None


def _generators(name: str):
    members = {g.name: g for g in generating_set(name, A, 1).members}
    return members, r_map(A)


def _random_decomposition(rng: random.Random, name: str, length: int):
    members, r = _generators(name)
    base = _unused_action_base()
    stage = base
    cells = []
    for _ in range(length):
        generator = rng.choice(list(members.values()) + [r])
        if generator.is_r:
            if len(stage.states) < 2:
                continue
            left, right = rng.sample(list(stage.states), 2)
            state_map, action_map = {"0": left, "1": right}, {}
        else:
            options = hom(generator.morphism.source, stage)
            if not options:
                continue
            chosen = rng.choice(options)
            state_map, action_map = chosen.state_map, chosen.action_map
        cells.append((generator, state_map, action_map))
        attach = Morphism(generator.morphism.source, stage, state_map, action_map)
        stage = pushout(attach, generator.morphism).apex
    return build_decomposition(base, cells)


def test_relocate_example() -> None:
    members, r = _generators("I")
    base = _discrete(A, "0", "1")
    decomposition = build_decomposition(base, [(members["action[a]"], {}, {}), (r, {"0": "0", "1": "1"}, {})])
    relocated = relocate(decomposition)
    assert relocated.front_loaded()
    assert [cell.generator.name for cell in relocated.cells] == ["R", "action[a]"]
    assert composites_agree(decomposition, relocated) is not None


def test_relocate_keeps_front_loaded_input() -> None:
    members, r = _generators("I")
    base = _discrete(A, "0", "1", "2")
    plain = build_decomposition(base, [(members["point"], {}, {}), (members["action[a]"], {}, {})])
    assert relocate(plain) is plain
    collapses = build_decomposition(base, [(r, {"0": "0", "1": "1"}, {}), (r, {"0": "0", "1": "2"}, {})])
    assert relocate(collapses) is collapses


def _edge_then_double(r_state_map: dict[str, str]):
    members, r = _generators("I_CTS")
    base = _unused_action_base()
    return build_decomposition(
        base,
        [
            (members["boundary[a]"], {"0": "0", "1": "1"}, {"(a,1)": "u"}),
            (members["double[a]"], {"0": "0", "1": "1"}, {"(a,1)": "u"}),
            (r, r_state_map, {}),
        ],
    )


def test_relocate_glues_a_doubled_state_onto_an_existing_one() -> None:
    decomposition = _edge_then_double({"0": "3", "1": "0"})
    relocated = relocate(decomposition)
    assert relocated.front_loaded()
    assert [cell.generator.name for cell in relocated.cells] == ["boundary[a]", "point", "boundary[a]"]
    assert len(relocated.stages[-1].states) == 3
    assert composites_agree(decomposition, relocated) is not None


def test_relocate_glues_both_doubled_states_together() -> None:
    decomposition = _edge_then_double({"0": "3", "1": "4"})
    relocated = relocate(decomposition)
    assert [cell.generator.name for cell in relocated.cells] == ["boundary[a]", "point", "boundary[a]"]
    final = relocated.stages[-1]
    assert any(src == tgt for src, _, tgt in final.transitions)
    assert composites_agree(decomposition, relocated) is not None


@pytest.mark.parametrize("name", ["I", "I_CTS"])
def test_relocate_random_decompositions(name: str) -> None:
    rng = random.Random(7 if name == "I" else 11)
    reordered = 0
    for _ in range(50):
        decomposition = _random_decomposition(rng, name, rng.randint(1, 5))
        relocated = relocate(decomposition)
        assert relocated.front_loaded()
        assert composites_agree(decomposition, relocated) is not None
        reordered += not decomposition.front_loaded()
    assert reordered > 0


def test_saturation_of_a_point_changes_nothing() -> None:
    for variant in ("wts", "cts", "rts"):
        result = saturate(point(SIGMA), variant)
        assert result.system == point(SIGMA)
        assert result.trace == ()


def test_saturation_connects_every_pair_of_states() -> None:
    seed = _seed()
    result = saturate(seed, "wts")
    assert result.insertion.states_injective()
    assert check_morphism(result.insertion).ok
    images = result.insertion.state_map
    between = {(t[0], t[2]) for t in result.system.transitions if result.system.label_word(t) == ("a",)}
    for start in seed.states:
        for end in seed.states:
            assert (images[start], images[end]) in between


def test_saturation_needs_a_round() -> None:
    with pytest.raises(ArgumentError):
        saturate(point(SIGMA), "wts", rounds=0)


def test_causal_collapse() -> None:
    seed = _seed()
    result = saturate(seed, "wts")
    report = causal_collapse_check(seed, result.system, result.insertion)
    assert report.collapsed
    assert report.obligations == 9

    unchanged = causal_collapse_check(seed, seed, identity(seed))
    assert not unchanged.collapsed
    assert len(unchanged.missing) == 8

    dot = point(SIGMA)
    empty_report = causal_collapse_check(dot, dot, identity(dot))
    assert empty_report.collapsed
    assert empty_report.obligations == 0


def test_collapse_obligations_count_each_transition_at_each_state_pair() -> None:
    twice = double(SIGMA, "a")
    report = causal_collapse_check(twice, twice, identity(twice))
    assert report.obligations == 2 * 4 * 4
    assert not report.collapsed
    assert len(report.missing) == 2 * (16 - 2)
    assert report.missing[0] == (("1", ("a",), "2"), ("a",), "1", "1")


def test_causal_collapse_over_the_corpus() -> None:
    systems = {name: x for name, x in small(corpus(), max_states=5).items() if x.transitions}
    assert {"cube[a]", "double[a]", "fig1", "amalgam", "interval"} <= set(systems)
    for name, system in systems.items():
        result = saturate(system, "wts")
        assert causal_collapse_check(system, result.system, result.insertion).collapsed, name
