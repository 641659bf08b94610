from __future__ import annotations

from collections import defaultdict
from typing import Generic, Iterable, TypeVar


T = TypeVar("T")


class DisjointSet(Generic[T]):
    """Union-find whose representatives are the least member of each class."""

    def __init__(self, elements: Iterable[T] = ()) -> None:
        self.parent: dict[T, T] = {}
        for element in elements:
            self.make_set(element)

    def make_set(self, element: T) -> None:
        if element not in self.parent:
            self.parent[element] = element

    def find(self, element: T) -> T:
        self.make_set(element)
        root = element
        while self.parent[root] != root:
            root = self.parent[root]
        # path compression
        while self.parent[element] != root:
            self.parent[element], element = root, self.parent[element]
        return root

    def union(self, left: T, right: T) -> bool:
        left_root, right_root = self.find(left), self.find(right)
        if left_root == right_root:
            return False
        # keep the least member on top so roots are canonical
        if right_root < left_root:  # type: ignore[operator]
            left_root, right_root = right_root, left_root
        self.parent[right_root] = left_root
        return True

    def classes(self) -> list[list[T]]:
        grouped: dict[T, list[T]] = defaultdict(list)
        for element in self.parent:
            grouped[self.find(element)].append(element)
        return sorted(sorted(members) for members in grouped.values())  # type: ignore[type-var]

    def representative_map(self) -> dict[T, T]:
        return {element: self.find(element) for element in self.parent}
