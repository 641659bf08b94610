from __future__ import annotations

from itertools import combinations_with_replacement
import random

from hdts.services.core import Alphabet, TransitionSystem, closure
from hdts.services.generators import action, boundary_cube, cube, double, fig1, interval, point, pure_cube, terminal
from hdts.services.subcats import classify


SIGMA = Alphabet(("a", "b"))
SEED = 20240611


def words(max_length: int = 3) -> list[tuple[str, ...]]:
    # up to permutation; cubes on permuted words are isomorphic
    return [w for n in range(1, max_length + 1) for w in combinations_with_replacement(SIGMA.labels, n)]


def amalgam() -> TransitionSystem:
    """C_1[a] and C_1[b] glued end to start."""
    return TransitionSystem(
        alphabet=SIGMA,
        states=("x", "m", "y"),
        actions=(("u", "a"), ("v", "b")),
        transitions=frozenset({("x", ("u",), "m"), ("m", ("v",), "y")}),
    )


def random_system(rng: random.Random, max_states: int = 5, max_actions: int = 4, max_dim: int = 3) -> TransitionSystem:
    states = [f"s{k}" for k in range(rng.randint(1, max_states))]
    actions = [(f"u{k}", rng.choice(SIGMA.labels)) for k in range(rng.randint(0, max_actions))]
    ids = [u for u, _ in actions]
    transitions = set()
    for _ in range(rng.randint(0, 5) if ids else 0):
        n = rng.randint(1, min(max_dim, len(ids)))
        transitions.add((rng.choice(states), tuple(rng.sample(ids, n)), rng.choice(states)))
    raw = TransitionSystem(alphabet=SIGMA, states=tuple(states), actions=tuple(actions), transitions=frozenset(transitions))
    return closure(raw)


def random_systems(count: int = 20, seed: int = SEED) -> dict[str, TransitionSystem]:
    rng = random.Random(seed)
    return {f"random[{k}]": random_system(rng) for k in range(count)}


def generator_corpus(max_length: int = 3) -> dict[str, TransitionSystem]:
    systems: dict[str, TransitionSystem] = {"point": point(SIGMA)}
    for x in SIGMA:
        systems[f"action[{x}]"] = action(SIGMA, x)
        systems[f"double[{x}]"] = double(SIGMA, x)
    for w in words(max_length):
        key = ",".join(w)
        systems[f"cube[{key}]"] = cube(SIGMA, w)
        systems[f"pure[{key}]"] = pure_cube(SIGMA, w)
        systems[f"boundary[{key}]"] = boundary_cube(SIGMA, w)
    systems["interval"] = interval(SIGMA, 2)
    systems["terminal"] = terminal(SIGMA, 2)
    return systems


def corpus() -> dict[str, TransitionSystem]:
    systems = generator_corpus()
    systems["fig1"] = fig1(SIGMA, "a", "b")
    systems["amalgam"] = amalgam()
    systems.update(random_systems())
    return systems


def small(systems: dict[str, TransitionSystem], max_states: int = 4) -> dict[str, TransitionSystem]:
    return {name: x for name, x in systems.items() if len(x.states) <= max_states}


def regular(systems: dict[str, TransitionSystem]) -> dict[str, TransitionSystem]:
    return {name: x for name, x in systems.items() if classify(x).is_regular}
