from hypothesis import given, settings
import pytest

from hdts.services.catops import hom
from hdts.services.core import (
    ArgumentError,
    Morphism,
    StructureError,
    TransitionSystem,
    check_morphism,
    closure,
    find_isomorphism,
    identity,
    is_mono,
    is_term,
    pair_id,
    restrict,
    validate,
)
from hdts.services.cyl import cylinder
from hdts.services.generators import action, cube, double, fig1, point
from hdts.services.model import r_map
from tests.corpus import SIGMA, corpus
from tests.strategies import raw_systems, systems


def test_fig1_is_valid() -> None:
    assert validate(fig1(SIGMA, "a", "b")).ok


def test_every_corpus_system_is_valid() -> None:
    for name, system in corpus().items():
        assert validate(system).ok, name


def test_dropping_a_permutation_is_detected() -> None:
    full = cube(SIGMA, ("a", "b"))
    removed = ("00", ("(b,2)", "(a,1)"), "11")
    broken = full.with_transitions(full.transitions - {removed})

    report = validate(broken)

    assert not report.ok
    assert [v.axiom for v in report.violations] == ["multiset"]
    assert report.violations[0].witness == (("00", ("(a,1)", "(b,2)"), "11"), removed)


def test_dropping_a_patching_consequence_is_detected_and_closure_restores_it() -> None:
    full = cube(SIGMA, ("a", "b", "b"))
    removed = ("100", ("(b,2)",), "110")
    broken = full.with_transitions(full.transitions - {removed})

    report = validate(broken)

    assert report.violations
    assert {v.axiom for v in report.violations} == {"patching"}
    assert {v.witness[-1] for v in report.violations} == {removed}
    assert closure(broken).transitions == full.transitions


def test_every_forced_transition_dropped_from_the_corpus_is_detected() -> None:
    dropped = 0
    for name, system in corpus().items():
        for removed in system.sorted_transitions:
            broken = system.with_transitions(system.transitions - {removed})
            if closure(broken).transitions != system.transitions:
                continue
            report = validate(broken)
            assert not report.ok, (name, removed)
            for violation in report.violations:
                present, missing = violation.witness[0], violation.witness[-1]
                assert missing == removed, (name, violation)
                assert present in broken.transitions
                if violation.axiom == "multiset":
                    assert (present[0], present[2]) == (missing[0], missing[2])
                    assert sorted(present[1]) == sorted(missing[1])
                else:
                    assert violation.witness[1:3] == (missing[0], missing[2])
            dropped += 1
    assert dropped > 100


@settings(max_examples=60, deadline=None)
@given(raw_systems())
def test_closure_is_extensive_idempotent_and_valid(system: TransitionSystem) -> None:
    closed = closure(system)
    assert system.transitions <= closed.transitions
    assert closure(closed) == closed
    assert validate(closed).ok


@settings(max_examples=40, deadline=None)
@given(systems())
def test_restriction_of_a_valid_system_is_valid(system: TransitionSystem) -> None:
    kept = system.states[: len(system.states) // 2 + 1]
    restricted = restrict(system, kept)
    assert restricted.transitions <= system.transitions
    assert validate(restricted).ok


def test_restrict_rejects_unknown_states() -> None:
    with pytest.raises(ArgumentError):
        restrict(point(SIGMA), ["nowhere"])


def test_structure_errors() -> None:
    with pytest.raises(StructureError):
        TransitionSystem(alphabet=SIGMA, states=("0",), actions=(), transitions=frozenset({("0", ("u",), "0")}))
    with pytest.raises(StructureError):
        Morphism(cube(SIGMA, ("a",)), point(SIGMA), {"0": "0"}, {})


def test_label_mismatch_is_reported() -> None:
    morphism = Morphism(action(SIGMA, "a"), action(SIGMA, "b"), {}, {"a": "b"})
    report = check_morphism(morphism)
    assert [v.axiom for v in report.violations] == ["label"]


def test_identity_and_cylinder_insertions_are_valid_morphisms() -> None:
    system = double(SIGMA, "a")
    cyl = cylinder(system)
    assert check_morphism(identity(system)).ok
    assert check_morphism(cyl.gamma0).ok
    assert check_morphism(cyl.sigma).ok


def test_monomorphism_witnesses() -> None:
    cyl = cylinder(cube(SIGMA, ("a",)))
    assert is_mono(cyl.gamma0).ok
    assert is_mono(cyl.sigma).witness == ("state", "(0,0)", "(0,1)")
    assert is_mono(r_map(SIGMA).morphism).witness == ("state", "0", "1")


def _cancellable(f: Morphism, tests: list[TransitionSystem]) -> bool:
    for w in tests:
        maps = hom(w, f.source)
        for g in maps:
            for h in maps:
                if g != h and g.then(f) == h.then(f):
                    return False
    return True


def test_mono_agrees_with_left_cancellation() -> None:
    tests = [point(SIGMA), action(SIGMA, "a"), action(SIGMA, "b")]
    objects = [point(SIGMA), cube(SIGMA, ("a",)), double(SIGMA, "a"), cube(SIGMA, ("a", "b"))]
    checked = 0
    for x in objects:
        for y in objects:
            for f in hom(x, y):
                assert is_mono(f).ok == _cancellable(f, tests), (x.summary(), y.summary())
                checked += 1
    assert checked > 0


def test_composition_is_associative() -> None:
    x, y, z = cube(SIGMA, ("a",)), double(SIGMA, "a"), cube(SIGMA, ("a", "a"))
    for f in hom(x, y):
        for g in hom(y, z):
            for h in hom(z, z)[:3]:
                assert f.then(g).then(h) == f.then(g.then(h))


def test_find_isomorphism() -> None:
    hand_built = TransitionSystem(
        alphabet=SIGMA,
        states=("p", "q", "r", "s"),
        actions=(("u", "a"), ("v", "a")),
        transitions=frozenset(
            (src, (act,), tgt) for src in ("p", "q") for act in ("u", "v") for tgt in ("r", "s")
        ),
    )
    assert find_isomorphism(cylinder(cube(SIGMA, ("a",))).system, hand_built) is not None
    assert find_isomorphism(cube(SIGMA, ("a",)), cube(SIGMA, ("b",))) is None


def test_term_identifiers() -> None:
    assert is_term("(a,b)")
    assert is_term("((a,1),0)")
    assert not is_term("a,b")
    assert not is_term("(a")
    assert not is_term("a b")
    assert not is_term("")


def test_any_nonempty_name_is_accepted() -> None:
    system = TransitionSystem(
        alphabet=SIGMA,
        states=("p q", "r,s", "(t"),
        actions=(("go right", "a"),),
        transitions=frozenset({("p q", ("go right",), "r,s")}),
    )
    assert validate(system).ok
    assert len(cylinder(system).system.states) == 6
    with pytest.raises(StructureError):
        TransitionSystem(alphabet=SIGMA, states=("",), actions=())


def test_pair_names_stay_unambiguous() -> None:
    assert pair_id("a", "1") == "(a,1)"
    assert pair_id("(a,1)", "0") == "((a,1),0)"
    assert pair_id("a,b", "c") != pair_id("a", "b,c")
    assert pair_id("a b", "c") == "('a b',c)"
    assert pair_id("'a b'", "c") != pair_id("a b", "c")
    assert pair_id("x\\", "'") != pair_id("x", "\\'")
