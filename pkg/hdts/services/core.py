from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import permutations
import logging
from typing import Iterable, Iterator, Mapping


logger = logging.getLogger(__name__)

Transition = tuple[str, tuple[str, ...], str]


class StructureError(ValueError):
    pass


class ArgumentError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


def quote_id(identifier: str) -> str:
    """Terms pass through; any other name is quoted so that pair names stay unambiguous."""
    if is_term(identifier) and "'" not in identifier and "\\" not in identifier:
        return identifier
    escaped = identifier.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def pair_id(left: str, right: str) -> str:
    return f"({quote_id(left)},{quote_id(right)})"


def is_term(identifier: str) -> bool:
    """Balanced parentheses, no whitespace, commas only inside parentheses."""
    if not identifier:
        return False
    depth = 0
    for char in identifier:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                return False
        elif char == "," and depth == 0:
            return False
        elif char.isspace():
            return False
    return depth == 0


def _require_name(identifier: object, kind: str) -> None:
    if not isinstance(identifier, str) or not identifier:
        raise StructureError(f"Malformed {kind} identifier: {identifier!r}")


def distinct_permutations(acts: tuple[str, ...]) -> list[tuple[str, ...]]:
    return sorted(set(permutations(acts)))


@dataclass(frozen=True)
class Alphabet:
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise ArgumentError("Alphabet must contain at least one label.")
        if len(set(self.labels)) != len(self.labels):
            raise ArgumentError(f"Alphabet has duplicate labels: {list(self.labels)}")
        for label in self.labels:
            _require_name(label, "label")

    @classmethod
    def of(cls, labels: Iterable[str]) -> Alphabet:
        return cls(tuple(labels))

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)


@dataclass(frozen=True)
class TransitionSystem:
    alphabet: Alphabet
    states: tuple[str, ...]
    actions: tuple[tuple[str, str], ...]
    transitions: frozenset[Transition] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        states = tuple(sorted(self.states))
        if len(set(states)) != len(states):
            raise StructureError("Duplicate state identifiers.")
        actions = tuple(sorted((str(a), str(l)) for a, l in self.actions))
        if len({a for a, _ in actions}) != len(actions):
            raise StructureError("Duplicate action identifiers.")
        transitions = frozenset((src, tuple(acts), tgt) for src, acts, tgt in self.transitions)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "transitions", transitions)

        for state in states:
            _require_name(state, "state")
        for action, label in actions:
            _require_name(action, "action")
            if label not in self.alphabet:
                raise StructureError(f"Action {action} carries unknown label {label!r}")
        state_set = set(states)
        labels = dict(actions)
        for src, acts, tgt in transitions:
            if not acts:
                raise StructureError(f"Transition from {src} to {tgt} has no actions.")
            for endpoint in (src, tgt):
                if endpoint not in state_set:
                    raise StructureError(f"Transition refers to unknown state {endpoint!r}")
            for action in acts:
                if action not in labels:
                    raise StructureError(f"Transition refers to unknown action {action!r}")

    @cached_property
    def label_of(self) -> dict[str, str]:
        return dict(self.actions)

    @cached_property
    def action_ids(self) -> tuple[str, ...]:
        return tuple(action for action, _ in self.actions)

    @cached_property
    def dimension(self) -> int:
        return max((len(acts) for _, acts, _ in self.transitions), default=0)

    @cached_property
    def sorted_transitions(self) -> list[Transition]:
        return sorted(self.transitions, key=lambda t: (len(t[1]), t))

    @cached_property
    def index(self) -> TransitionIndex:
        return TransitionIndex.build(self.transitions)

    def actions_labelled(self, label: str) -> list[str]:
        return [action for action, value in self.actions if value == label]

    def label_word(self, transition: Transition) -> tuple[str, ...]:
        return tuple(self.label_of[u] for u in transition[1])

    def count_by_dimension(self) -> dict[int, int]:
        counts: dict[int, int] = defaultdict(int)
        for _, acts, _ in self.transitions:
            counts[len(acts)] += 1
        return dict(sorted(counts.items()))

    def with_transitions(self, transitions: Iterable[Transition]) -> TransitionSystem:
        return replace(self, transitions=frozenset(transitions))

    def summary(self) -> str:
        return (
            f"{len(self.states)} states, {len(self.actions)} actions, "
            f"{len(self.transitions)} transitions (dimension {self.dimension})"
        )


@dataclass
class TransitionIndex:
    forward: dict[tuple[str, tuple[str, ...]], set[str]]
    backward: dict[tuple[tuple[str, ...], str], set[str]]

    @classmethod
    def build(cls, transitions: Iterable[Transition]) -> TransitionIndex:
        forward: dict[tuple[str, tuple[str, ...]], set[str]] = defaultdict(set)
        backward: dict[tuple[tuple[str, ...], str], set[str]] = defaultdict(set)
        for src, acts, tgt in transitions:
            forward[(src, acts)].add(tgt)
            backward[(acts, tgt)].add(src)
        return cls(forward=forward, backward=backward)

    def dividing_states(self, transition: Transition, p: int) -> set[str]:
        """States ν with (src, u_1..u_p, ν) and (ν, u_{p+1}..u_n, tgt) both present."""
        src, acts, tgt = transition
        head = self.forward.get((src, acts[:p]), set())
        tail = self.backward.get((acts[p:], tgt), set())
        return head & tail


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Morphism:
    source: TransitionSystem
    target: TransitionSystem
    state_map: Mapping[str, str]
    action_map: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "state_map", dict(self.state_map))
        object.__setattr__(self, "action_map", dict(self.action_map))
        missing_states = set(self.source.states) - set(self.state_map)
        if missing_states:
            raise StructureError(f"State map is partial; missing {sorted(missing_states)}")
        missing_actions = set(self.source.action_ids) - set(self.action_map)
        if missing_actions:
            raise StructureError(f"Action map is partial; missing {sorted(missing_actions)}")
        source_states = set(self.source.states)
        target_states = set(self.target.states)
        for key, value in self.state_map.items():
            if key not in source_states or value not in target_states:
                raise StructureError(f"State map entry {key!r} -> {value!r} does not resolve")
        for key, value in self.action_map.items():
            if key not in self.source.label_of or value not in self.target.label_of:
                raise StructureError(f"Action map entry {key!r} -> {value!r} does not resolve")

    def __hash__(self) -> int:
        return hash((self.source, self.target, tuple(sorted(self.state_map.items())), tuple(sorted(self.action_map.items()))))

    def state(self, state: str) -> str:
        return self.state_map[state]

    def action(self, action: str) -> str:
        return self.action_map[action]

    def apply(self, transition: Transition) -> Transition:
        src, acts, tgt = transition
        return (self.state_map[src], tuple(self.action_map[u] for u in acts), self.state_map[tgt])

    def then(self, other: Morphism) -> Morphism:
        """Composite `other ∘ self`."""
        if other.source != self.target:
            raise ArgumentError("Cannot compose morphisms whose objects do not match.")
        return Morphism(
            source=self.source,
            target=other.target,
            state_map={s: other.state_map[t] for s, t in self.state_map.items()},
            action_map={u: other.action_map[v] for u, v in self.action_map.items()},
        )

    def states_injective(self) -> bool:
        return len(set(self.state_map.values())) == len(self.state_map)

    def actions_injective(self) -> bool:
        return len(set(self.action_map.values())) == len(self.action_map)


def identity(system: TransitionSystem) -> Morphism:
    return Morphism(
        source=system,
        target=system,
        state_map={s: s for s in system.states},
        action_map={u: u for u in system.action_ids},
    )


def inclusion(sub: TransitionSystem, system: TransitionSystem) -> Morphism:
    return Morphism(
        source=sub,
        target=system,
        state_map={s: s for s in sub.states},
        action_map={u: u for u in sub.action_ids},
    )


def discrete_part(system: TransitionSystem) -> TransitionSystem:
    return system.with_transitions(())


def _multiset_gaps(transitions: frozenset[Transition] | set[Transition]) -> Iterator[tuple[Transition, Transition]]:
    for transition in sorted(transitions):
        src, acts, tgt = transition
        if len(acts) < 2:
            continue
        for perm in distinct_permutations(acts):
            candidate = (src, perm, tgt)
            if candidate not in transitions:
                yield transition, candidate


def _patching_gaps(
    transitions: frozenset[Transition] | set[Transition],
    index: TransitionIndex,
) -> Iterator[tuple[Transition, str, str, Transition]]:
    for transition in sorted(transitions):
        src, acts, tgt = transition
        n = len(acts)
        if n < 3:
            continue
        for p in range(1, n - 1):
            first = index.dividing_states(transition, p)
            if not first:
                continue
            for q in range(1, n - p):
                second = index.dividing_states(transition, p + q)
                for nu1 in sorted(first):
                    for nu2 in sorted(second):
                        candidate = (nu1, acts[p : p + q], nu2)
                        if candidate not in transitions:
                            yield transition, nu1, nu2, candidate


def validate(system: TransitionSystem) -> ValidationReport:
    violations: list[Violation] = []
    for transition, missing in _multiset_gaps(system.transitions):
        violations.append(Violation("multiset", (transition, missing)))
    for transition, nu1, nu2, missing in _patching_gaps(system.transitions, system.index):
        violations.append(Violation("patching", (transition, nu1, nu2, missing)))
    return ValidationReport(tuple(violations))


def closure(system: TransitionSystem) -> TransitionSystem:
    current = set(system.transitions)
    rounds = 0
    while True:
        additions = {missing for _, missing in _multiset_gaps(current)}
        index = TransitionIndex.build(current)
        additions.update(missing for *_, missing in _patching_gaps(current, index))
        if not additions:
            break
        rounds += 1
        current |= additions
        logger.debug("closure round %d added %d transitions", rounds, len(additions))
    if len(current) == len(system.transitions):
        return system
    return system.with_transitions(current)


def restrict(system: TransitionSystem, states: Iterable[str]) -> TransitionSystem:
    kept = set(states)
    unknown = kept - set(system.states)
    if unknown:
        raise ArgumentError(f"Cannot restrict to states outside the system: {sorted(unknown)}")
    return TransitionSystem(
        alphabet=system.alphabet,
        states=tuple(sorted(kept)),
        actions=system.actions,
        transitions=frozenset(t for t in system.transitions if t[0] in kept and t[2] in kept),
    )


def check_morphism(morphism: Morphism) -> ValidationReport:
    violations: list[Violation] = []
    source, target = morphism.source, morphism.target
    for action in source.action_ids:
        image = morphism.action_map[action]
        if source.label_of[action] != target.label_of[image]:
            violations.append(
                Violation("label", (action, source.label_of[action], image, target.label_of[image]))
            )
    for transition in source.sorted_transitions:
        image = morphism.apply(transition)
        if image not in target.transitions:
            violations.append(Violation("transition", (transition, image)))
    return ValidationReport(tuple(violations))


@dataclass(frozen=True)
class MonoVerdict:
    ok: bool
    witness: tuple[str, str, str] | None = None


def is_mono(morphism: Morphism) -> MonoVerdict:
    for kind, mapping in (("state", morphism.state_map), ("action", morphism.action_map)):
        seen: dict[str, str] = {}
        for element in sorted(mapping):
            image = mapping[element]
            if image in seen:
                return MonoVerdict(False, (kind, seen[image], element))
            seen[image] = element
    return MonoVerdict(True)


def _label_profile(system: TransitionSystem) -> tuple:
    labels = sorted(system.label_of.values())
    words = sorted(tuple(sorted(system.label_word(t))) for t in system.transitions)
    return (len(system.states), labels, words)


def find_isomorphism(
    left: TransitionSystem,
    right: TransitionSystem,
    fixed_states: Mapping[str, str] | None = None,
    fixed_actions: Mapping[str, str] | None = None,
) -> Morphism | None:
    from hdts.services.search import enumerate_morphisms

    if left.alphabet != right.alphabet or _label_profile(left) != _label_profile(right):
        return None
    for candidate in enumerate_morphisms(
        left,
        right,
        fixed_states=fixed_states,
        fixed_actions=fixed_actions,
        injective=True,
    ):
        return candidate
    return None
