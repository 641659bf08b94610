from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import json
import logging
from typing import Any

import networkx as nx
from pydantic import ValidationError

from hdts.models import DOCUMENT_VERSION, DocumentModel
from hdts.services.core import Alphabet, Morphism, StructureError, TransitionSystem
from hdts.services.model import (
    CellularDecomposition,
    Generator,
    SetName,
    build_decomposition,
    generating_set,
    r_map,
)
from hdts.services.subcats import PointedSystem


logger = logging.getLogger(__name__)


class DocumentError(ValueError):
    pass


@dataclass(frozen=True)
class DecompositionEntry:
    generating_set: SetName
    decomposition: CellularDecomposition


@dataclass
class Document:
    alphabet: Alphabet
    systems: dict[str, TransitionSystem] = field(default_factory=dict)
    morphisms: dict[str, Morphism] = field(default_factory=dict)
    pointed: dict[str, PointedSystem] = field(default_factory=dict)
    decompositions: dict[str, DecompositionEntry] = field(default_factory=dict)
    report: dict[str, Any] | None = None
    # source and target system names per morphism; equal systems may carry several names
    morphism_ends: dict[str, tuple[str, str]] = field(default_factory=dict)

    def name_of(self, system: TransitionSystem) -> str | None:
        for name, candidate in self.systems.items():
            if candidate == system:
                return name
        return None

    def _free(self, table: dict, name: str) -> str:
        candidate, k = name, 1
        while candidate in table:
            k += 1
            candidate = f"{name}~{k}"
        return candidate

    def put_system(self, name: str, system: TransitionSystem) -> str:
        if system.alphabet != self.alphabet:
            raise DocumentError(f"System {name!r} is over a different alphabet than the document.")
        existing = self.name_of(system)
        if existing is not None:
            return existing
        name = self._free(self.systems, name)
        self.systems[name] = system
        return name

    def put_morphism(self, name: str, morphism: Morphism) -> str:
        source = self.put_system(f"{name}.source", morphism.source)
        target = self.put_system(f"{name}.target", morphism.target)
        name = self._free(self.morphisms, name)
        self.morphisms[name] = morphism
        self.morphism_ends[name] = (source, target)
        return name

    def ends_of(self, name: str) -> tuple[str, str]:
        if name in self.morphism_ends:
            return self.morphism_ends[name]
        f = self.morphisms[name]
        owner = f"Morphism {name!r}"
        return _name_required(self, f.source, owner), _name_required(self, f.target, owner)

    def put_pointed(self, name: str, pointed: PointedSystem) -> str:
        self.put_system(name, pointed.system)
        name = self._free(self.pointed, name)
        self.pointed[name] = pointed
        return name

    def put_decomposition(self, name: str, entry: DecompositionEntry) -> str:
        self.put_system(f"{name}.base", entry.decomposition.base)
        name = self._free(self.decompositions, name)
        self.decompositions[name] = entry
        return name


def _reject_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    result: dict[str, Any] = {}
    for key, value in pairs:
        if key in result:
            raise DocumentError(f"Duplicate name {key!r}")
        result[key] = value
    return result


def _system(name: str, item, alphabet: Alphabet) -> TransitionSystem:
    try:
        return TransitionSystem(
            alphabet=alphabet,
            states=tuple(item.states),
            actions=tuple((action.id, action.label) for action in item.actions),
            transitions=frozenset((t.source, tuple(t.acts), t.target) for t in item.transitions),
        )
    except StructureError as exc:
        raise DocumentError(f"System {name!r}: {exc}") from exc


def _lookup(table: dict, name: str, kind: str, owner: str):
    if name not in table:
        raise DocumentError(f"{owner} refers to unknown {kind} {name!r}")
    return table[name]


def _generator_bound(names: list[str]) -> int:
    lengths = [name.count(",") + 1 for name in names if "[" in name]
    return max(lengths, default=1)


def decode(model: DocumentModel) -> Document:
    try:
        alphabet = Alphabet.of(model.sigma)
    except ValueError as exc:
        raise DocumentError(f"sigma: {exc}") from exc
    document = Document(alphabet=alphabet, report=model.report)

    for name, item in model.systems.items():
        document.systems[name] = _system(name, item, alphabet)

    for name, item in model.morphisms.items():
        owner = f"Morphism {name!r}"
        source = _lookup(document.systems, item.source, "system", owner)
        target = _lookup(document.systems, item.target, "system", owner)
        try:
            document.morphisms[name] = Morphism(source, target, item.states, item.actions)
        except StructureError as exc:
            raise DocumentError(f"{owner}: {exc}") from exc
        document.morphism_ends[name] = (item.source, item.target)

    for name, item in model.pointed.items():
        system = _lookup(document.systems, item.system, "system", f"Pointed system {name!r}")
        try:
            document.pointed[name] = PointedSystem(system, item.base)
        except ValueError as exc:
            raise DocumentError(f"Pointed system {name!r}: {exc}") from exc

    for name, item in model.decompositions.items():
        owner = f"Decomposition {name!r}"
        base = _lookup(document.systems, item.base, "system", owner)
        bound = _generator_bound([cell.generator for cell in item.cells])
        known: dict[str, Generator] = {g.name: g for g in generating_set(item.generating_set, alphabet, bound).members}
        known[r_map(alphabet).name] = r_map(alphabet)
        cells = [
            (_lookup(known, cell.generator, "generator", owner), cell.states, cell.actions)
            for cell in item.cells
        ]
        try:
            decomposition = build_decomposition(base, cells)
        except ValueError as exc:
            raise DocumentError(f"{owner}: {exc}") from exc
        document.decompositions[name] = DecompositionEntry(item.generating_set, decomposition)
    return document


def from_payload(raw: Any) -> Document:
    try:
        model = DocumentModel.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "document"
        raise DocumentError(f"Invalid document at {where}: {first['msg']}") from exc
    document = decode(model)
    logger.debug("decoded document with %d systems and %d morphisms", len(document.systems), len(document.morphisms))
    return document


def parse(text: str) -> Document:
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"Syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return from_payload(raw)


def load(path: Path) -> Document:
    return parse(path.read_text(encoding="utf-8"))


def _system_payload(system: TransitionSystem) -> dict[str, Any]:
    return {
        "states": list(system.states),
        "actions": [{"id": u, "label": label} for u, label in system.actions],
        "transitions": [
            {"from": src, "acts": list(acts), "to": tgt} for src, acts, tgt in sorted(system.transitions)
        ],
    }


def _name_required(document: Document, system: TransitionSystem, owner: str) -> str:
    name = document.name_of(system)
    if name is None:
        raise DocumentError(f"{owner} refers to a system that is not part of the document")
    return name


def encode(document: Document) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "version": DOCUMENT_VERSION,
        "sigma": list(document.alphabet.labels),
        "systems": {name: _system_payload(system) for name, system in document.systems.items()},
        "morphisms": {
            name: {
                "source": document.ends_of(name)[0],
                "target": document.ends_of(name)[1],
                "states": dict(sorted(f.state_map.items())),
                "actions": dict(sorted(f.action_map.items())),
            }
            for name, f in document.morphisms.items()
        },
        "pointed": {
            name: {"system": _name_required(document, p.system, f"Pointed system {name!r}"), "base": p.base}
            for name, p in document.pointed.items()
        },
        "decompositions": {
            name: {
                "base": _name_required(document, entry.decomposition.base, f"Decomposition {name!r}"),
                "set": entry.generating_set,
                "cells": [
                    {
                        "generator": cell.generator.name,
                        "states": dict(sorted(cell.attach.state_map.items())),
                        "actions": dict(sorted(cell.attach.action_map.items())),
                    }
                    for cell in entry.decomposition.cells
                ],
            }
            for name, entry in document.decompositions.items()
        },
    }
    if document.report is not None:
        payload["report"] = document.report
    return payload


def emit(document: Document) -> str:
    return json.dumps(encode(document), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save(document: Document, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit(document), encoding="utf-8")


def skeleton(system: TransitionSystem) -> nx.MultiDiGraph:
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(system.states)
    for src, acts, tgt in sorted(system.transitions):
        if len(acts) == 1:
            graph.add_edge(src, tgt, action=acts[0], label=system.label_of[acts[0]])
    return graph


def to_dot(system: TransitionSystem, name: str = "X") -> str:
    graph = skeleton(system)
    lines = [f"digraph {json.dumps(name)} {{"]
    for node in sorted(graph.nodes):
        lines.append(f"  {json.dumps(node)};")
    for src, tgt, data in sorted(graph.edges(data=True), key=lambda e: (e[0], e[1], e[2]["action"])):
        lines.append(f"  {json.dumps(src)} -> {json.dumps(tgt)} [label={json.dumps(data['action'] + ':' + data['label'])}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
