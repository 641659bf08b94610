from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from hdts.services.core import Morphism, Transition, TransitionSystem


Variable = tuple[str, str]


def _variable_order(source: TransitionSystem, pinned: set[Variable]) -> list[Variable]:
    order: list[Variable] = sorted(pinned)
    seen = set(order)

    def visit(variable: Variable) -> None:
        if variable not in seen:
            seen.add(variable)
            order.append(variable)

    # Elements of low-dimensional transitions first, so that checks fire early.
    for src, acts, tgt in source.sorted_transitions:
        visit(("s", src))
        for action in acts:
            visit(("a", action))
        visit(("s", tgt))
    for action in source.action_ids:
        visit(("a", action))
    for state in source.states:
        visit(("s", state))
    return order


def enumerate_morphisms(
    source: TransitionSystem,
    target: TransitionSystem,
    *,
    fixed_states: Mapping[str, str] | None = None,
    fixed_actions: Mapping[str, str] | None = None,
    state_candidates: Mapping[str, Iterable[str]] | None = None,
    action_candidates: Mapping[str, Iterable[str]] | None = None,
    injective: bool = False,
) -> Iterator[Morphism]:
    """Backtracking enumeration of morphisms source -> target in a deterministic order.

    Fixed assignments pin single elements; candidate maps restrict the allowed images.
    With `injective` only maps injective on states and on actions are produced.
    """
    fixed_states = dict(fixed_states or {})
    fixed_actions = dict(fixed_actions or {})
    state_candidates = state_candidates or {}
    action_candidates = action_candidates or {}

    domains: dict[Variable, list[str]] = {}
    for state in source.states:
        if state in fixed_states:
            allowed = [value for value in target.states if value == fixed_states[state]]
        else:
            allowed = list(target.states)
        if state in state_candidates:
            permitted = set(state_candidates[state])
            allowed = [value for value in allowed if value in permitted]
        domains[("s", state)] = allowed
    for action in source.action_ids:
        label = source.label_of[action]
        allowed = target.actions_labelled(label)
        if action in fixed_actions:
            allowed = [value for value in allowed if value == fixed_actions[action]]
        if action in action_candidates:
            permitted = set(action_candidates[action])
            allowed = [value for value in allowed if value in permitted]
        domains[("a", action)] = allowed
    if any(not values for values in domains.values()):
        return

    pinned = {("s", s) for s in fixed_states} | {("a", u) for u in fixed_actions}
    variables = _variable_order(source, pinned & set(domains))
    position = {variable: k for k, variable in enumerate(variables)}
    checks: list[list[Transition]] = [[] for _ in variables]
    for transition in source.sorted_transitions:
        src, acts, tgt = transition
        last = max(position[("s", src)], position[("s", tgt)], *(position[("a", u)] for u in acts))
        checks[last].append(transition)

    state_map: dict[str, str] = {}
    action_map: dict[str, str] = {}
    used: dict[str, set[str]] = {"s": set(), "a": set()}
    targets = target.transitions

    def holds(transition: Transition) -> bool:
        src, acts, tgt = transition
        return (state_map[src], tuple(action_map[u] for u in acts), state_map[tgt]) in targets

    def extend(k: int) -> Iterator[Morphism]:
        if k == len(variables):
            yield Morphism(source, target, dict(state_map), dict(action_map))
            return
        kind, name = variables[k]
        assignment = state_map if kind == "s" else action_map
        for value in domains[variables[k]]:
            if injective and value in used[kind]:
                continue
            assignment[name] = value
            if all(holds(t) for t in checks[k]):
                used[kind].add(value)
                yield from extend(k + 1)
                used[kind].discard(value)
            del assignment[name]

    yield from extend(0)


def count_morphisms(source: TransitionSystem, target: TransitionSystem) -> int:
    return sum(1 for _ in enumerate_morphisms(source, target))
