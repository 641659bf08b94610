from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations, product
from typing import Literal

from hdts.services.core import (
    Alphabet,
    ArgumentError,
    InvariantError,
    TransitionSystem,
    pair_id,
)
from hdts.services.search import count_morphisms


GeneratorKind = Literal[
    "point",
    "action",
    "pure_cube",
    "cube",
    "boundary_cube",
    "double",
    "interval",
    "terminal",
    "fig1",
]

CUBE_KINDS = {"pure_cube", "cube", "boundary_cube"}
DEFAULT_DMAX = 4


class CharacterizationMismatch(InvariantError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    kind: GeneratorKind
    alphabet: Alphabet
    labels: tuple[str, ...] = ()
    d: int = DEFAULT_DMAX

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        for label in self.labels:
            if label not in self.alphabet:
                raise ArgumentError(f"Unknown label {label!r}; alphabet is {list(self.alphabet.labels)}")
        if self.kind in CUBE_KINDS and not self.labels:
            raise ArgumentError(f"{self.kind} needs at least one label.")
        if self.kind in {"action", "double"} and len(self.labels) != 1:
            raise ArgumentError(f"{self.kind} takes exactly one label.")
        if self.kind == "fig1" and len(self.labels) != 2:
            raise ArgumentError("fig1 takes exactly two labels.")
        if self.d < 1:
            raise ArgumentError("Dimension bound must be at least 1.")


def empty(alphabet: Alphabet) -> TransitionSystem:
    return TransitionSystem(alphabet=alphabet, states=(), actions=())


def point(alphabet: Alphabet) -> TransitionSystem:
    return TransitionSystem(alphabet=alphabet, states=("0",), actions=())


def action(alphabet: Alphabet, label: str) -> TransitionSystem:
    return TransitionSystem(alphabet=alphabet, states=(), actions=((label, label),))


def cube_action(label: str, index: int) -> str:
    return pair_id(label, str(index))


def _cube_actions(labels: tuple[str, ...]) -> tuple[tuple[str, str], ...]:
    return tuple((cube_action(label, i), label) for i, label in enumerate(labels, start=1))


def pure_cube(alphabet: Alphabet, labels: tuple[str, ...]) -> TransitionSystem:
    n = len(labels)
    actions = _cube_actions(labels)
    top = tuple(a for a, _ in actions)
    return TransitionSystem(
        alphabet=alphabet,
        states=("0" * n, "1" * n),
        actions=actions,
        transitions=frozenset(("0" * n, perm, "1" * n) for perm in permutations(top)),
    )


def cube(alphabet: Alphabet, labels: tuple[str, ...]) -> TransitionSystem:
    n = len(labels)
    actions = _cube_actions(labels)
    ids = [a for a, _ in actions]
    states = ["".join(bits) for bits in product("01", repeat=n)]
    transitions = set()
    for start in states:
        free = [i for i, bit in enumerate(start) if bit == "0"]
        for size in range(1, len(free) + 1):
            for flipped in combinations(free, size):
                end = "".join("1" if i in flipped else bit for i, bit in enumerate(start))
                for order in permutations(flipped):
                    transitions.add((start, tuple(ids[i] for i in order), end))
    return TransitionSystem(
        alphabet=alphabet,
        states=tuple(states),
        actions=actions,
        transitions=frozenset(transitions),
    )


def boundary_cube(alphabet: Alphabet, labels: tuple[str, ...]) -> TransitionSystem:
    full = cube(alphabet, labels)
    n = len(labels)
    # ∂C_1 keeps its action with no transition on it, so it is weak but not cubical.
    return full.with_transitions(t for t in full.transitions if len(t[1]) < n)


def double(alphabet: Alphabet, label: str) -> TransitionSystem:
    return TransitionSystem(
        alphabet=alphabet,
        states=("1", "2", "3", "4"),
        actions=((label, label),),
        transitions=frozenset({("1", (label,), "2"), ("3", (label,), "4")}),
    )


def interval(alphabet: Alphabet, d: int = DEFAULT_DMAX) -> TransitionSystem:
    actions = tuple((pair_id(x, side), x) for x in alphabet for side in "01")
    ids = [a for a, _ in actions]
    transitions = {
        (src, word, tgt)
        for n in range(1, d + 1)
        for word in product(ids, repeat=n)
        for src in "01"
        for tgt in "01"
    }
    return TransitionSystem(alphabet=alphabet, states=("0", "1"), actions=actions, transitions=frozenset(transitions))


def terminal(alphabet: Alphabet, d: int = DEFAULT_DMAX) -> TransitionSystem:
    labels = alphabet.labels
    return TransitionSystem(
        alphabet=alphabet,
        states=("0",),
        actions=tuple((x, x) for x in labels),
        transitions=frozenset(("0", word, "0") for n in range(1, d + 1) for word in product(labels, repeat=n)),
    )


def fig1(alphabet: Alphabet, a: str, b: str) -> TransitionSystem:
    return TransitionSystem(
        alphabet=alphabet,
        states=("alpha", "beta", "gamma", "delta"),
        actions=tuple(sorted({(a, a), (b, b)})),
        transitions=frozenset(
            {
                ("alpha", (a,), "beta"),
                ("beta", (b,), "delta"),
                ("alpha", (b,), "gamma"),
                ("gamma", (a,), "delta"),
                ("alpha", (a, b), "delta"),
                ("alpha", (b, a), "delta"),
            }
        ),
    )


def make(spec: GeneratorSpec) -> TransitionSystem:
    alphabet, labels = spec.alphabet, spec.labels
    if spec.kind == "point":
        return point(alphabet)
    if spec.kind == "action":
        return action(alphabet, labels[0])
    if spec.kind == "pure_cube":
        return pure_cube(alphabet, labels)
    if spec.kind == "cube":
        return cube(alphabet, labels)
    if spec.kind == "boundary_cube":
        return boundary_cube(alphabet, labels)
    if spec.kind == "double":
        return double(alphabet, labels[0])
    if spec.kind == "interval":
        return interval(alphabet, spec.d)
    if spec.kind == "terminal":
        return terminal(alphabet, spec.d)
    if spec.kind == "fig1":
        return fig1(alphabet, labels[0], labels[1])
    raise ArgumentError(f"Unknown generator kind: {spec.kind!r}")


def _direct_count(kind: str, labels: tuple[str, ...], system: TransitionSystem) -> int:
    if kind == "point":
        return len(system.states)
    if kind == "action":
        return len(system.actions_labelled(labels[0]))
    if kind == "pure_cube":
        return sum(1 for t in system.transitions if system.label_word(t) == labels)
    raise ArgumentError(f"No hom characterization for kind {kind!r}")


def hom_characterization_check(kind: str, system: TransitionSystem, labels: tuple[str, ...] = ()) -> int:
    """Count morphisms out of a representing object and compare with the direct count."""
    spec = GeneratorSpec(kind=kind, alphabet=system.alphabet, labels=labels)  # type: ignore[arg-type]
    expected = _direct_count(kind, spec.labels, system)
    counted = count_morphisms(make(spec), system)
    if counted != expected:
        raise CharacterizationMismatch(
            f"|Hom({kind}, X)| = {counted} but the direct count is {expected}"
        )
    return counted
