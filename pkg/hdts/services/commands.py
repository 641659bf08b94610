from __future__ import annotations

from dataclasses import dataclass, replace
import logging
from typing import Any, Callable

from hdts.models import CommandOptions
from hdts.services import catops, core, cyl, generators, model, subcats
from hdts.services.codec import DecompositionEntry, Document, to_dot
from hdts.settings import Settings


logger = logging.getLogger(__name__)


class CommandError(ValueError):
    pass


@dataclass
class CommandResult:
    exit_code: int
    report: dict[str, Any]
    document: Document | None = None
    text: str | None = None

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


def plain(value: Any) -> Any:
    """JSON-friendly copy: tuples become lists, sets become sorted lists."""
    if isinstance(value, dict):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted(plain(item) for item in value)
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    return value


@dataclass
class Context:
    command: str
    options: CommandOptions
    settings: Settings
    document: Document | None = None

    @property
    def variant(self) -> subcats.Variant:
        return self.options.variant or self.settings.variant

    @property
    def dmax(self) -> int:
        return self.options.dmax or self.settings.dmax

    def source(self) -> Document:
        if self.document is None:
            raise CommandError(f"{self.command} needs an input document (--in).")
        return self.document

    def output(self) -> Document:
        """A copy of the input document that results are added to."""
        document = self.source()
        return replace(
            document,
            systems=dict(document.systems),
            morphisms=dict(document.morphisms),
            morphism_ends=dict(document.morphism_ends),
            pointed=dict(document.pointed),
            decompositions=dict(document.decompositions),
            report=None,
        )

    def _pick(self, table: dict, position: int, kind: str) -> tuple[str, Any]:
        operands = self.options.operands
        if position < len(operands):
            name = operands[position]
            if name not in table:
                raise CommandError(f"{self.command}: no {kind} named {name!r} in the document")
            return name, table[name]
        if position == 0 and len(table) == 1:
            return next(iter(table.items()))
        raise CommandError(f"{self.command} needs a {kind} name as operand {position + 1}")

    def system(self, position: int = 0) -> tuple[str, core.TransitionSystem]:
        return self._pick(self.source().systems, position, "system")

    def morphism(self, position: int = 0) -> tuple[str, core.Morphism]:
        return self._pick(self.source().morphisms, position, "morphism")

    def pointed(self, position: int = 0) -> tuple[str, subcats.PointedSystem]:
        return self._pick(self.source().pointed, position, "pointed system")

    def decomposition(self, position: int = 0) -> tuple[str, DecompositionEntry]:
        return self._pick(self.source().decompositions, position, "decomposition")

    def alphabet(self) -> core.Alphabet:
        if self.document is not None:
            return self.document.alphabet
        if not self.options.labels:
            raise CommandError(f"{self.command} needs --labels or an input document to fix the alphabet.")
        return core.Alphabet.of(sorted(set(self.options.labels)))


Handler = Callable[[Context], CommandResult]
COMMANDS: dict[str, Handler] = {}
STATEMENTS: dict[str, str] = {}


def command(name: str, statement: str) -> Callable[[Handler], Handler]:
    def register(handler: Handler) -> Handler:
        COMMANDS[name] = handler
        STATEMENTS[name] = statement
        return handler

    return register


def _verdict(ok: bool, report: dict[str, Any], document: Document | None = None) -> CommandResult:
    return CommandResult(exit_code=0 if ok else 1, report=plain({"ok": ok, **report}), document=document)


def _done(report: dict[str, Any], document: Document | None = None) -> CommandResult:
    return _verdict(True, report, document)


def _violations(report: core.ValidationReport) -> list[dict[str, Any]]:
    return [{"axiom": v.axiom, "witness": v.witness} for v in report.violations]


def _shape(system: core.TransitionSystem) -> dict[str, Any]:
    return {
        "states": len(system.states),
        "actions": len(system.actions),
        "transitions": len(system.transitions),
        "by_dimension": system.count_by_dimension(),
    }


@command("validate", "multiset and patching axioms hold")
def _validate(ctx: Context) -> CommandResult:
    if ctx.options.morphism:
        name, f = ctx.morphism()
        report = core.check_morphism(f)
        statement = "labels and transitions are preserved"
    else:
        name, f = ctx.system()
        report = core.validate(f)
        statement = "multiset and patching axioms hold"
    return _verdict(report.ok, {"subject": name, "statement": statement, "violations": _violations(report)})


@command("closure", "the closure is the least system containing the input that satisfies both axioms")
def _closure(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    closed = core.closure(system)
    document = ctx.output()
    result = document.put_system(f"{name}.closed", closed)
    added = len(closed.transitions) - len(system.transitions)
    return _done({"subject": name, "result": result, "added": added, "shape": _shape(closed)}, document)


@command("restrict", "restricting to a set of states keeps every transition between them")
def _restrict(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    restricted = core.restrict(system, ctx.options.states)
    document = ctx.output()
    result = document.put_system(f"{name}.restricted", restricted)
    return _done({"subject": name, "result": result, "shape": _shape(restricted)}, document)


@command("iso", "an isomorphism is a bijection on states and actions preserving labels and transitions")
def _iso(ctx: Context) -> CommandResult:
    (left_name, left), (right_name, right) = ctx.system(0), ctx.system(1)
    found = core.find_isomorphism(left, right)
    document = ctx.output()
    report: dict[str, Any] = {"left": left_name, "right": right_name}
    if found is not None:
        report["result"] = document.put_morphism(f"{left_name}~{right_name}", found)
    return _verdict(found is not None, report, document)


@command("classify", "cubical systems use every action and have a dividing state; regular ones have exactly one")
def _classify(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    variant = ctx.options.variant or "rts"
    report = subcats.classify(system)
    return _verdict(
        report.belongs_to(variant),
        {
            "subject": name,
            "variant": variant,
            "is_weak": report.is_weak,
            "all_actions_used": report.all_actions_used,
            "intermediate_state": report.intermediate_state,
            "unique_intermediate_state": report.unique_intermediate_state,
            "is_cubical": report.is_cubical,
            "is_regular": report.is_regular,
            "witnesses": report.witnesses,
        },
    )


@command("make", "each generator is determined by its kind and labels")
def _make(ctx: Context) -> CommandResult:
    if not ctx.options.kind:
        raise CommandError("make needs --kind.")
    alphabet = ctx.alphabet()
    spec = generators.GeneratorSpec(
        kind=ctx.options.kind,  # type: ignore[arg-type]
        alphabet=alphabet,
        labels=tuple(ctx.options.labels),
        d=ctx.dmax,
    )
    system = generators.make(spec)
    document = ctx.output() if ctx.document is not None else Document(alphabet=alphabet)
    label = f"{spec.kind}[{','.join(spec.labels)}]" if spec.labels else spec.kind
    result = document.put_system(label, system)
    return _done({"kind": spec.kind, "result": result, "shape": _shape(system)}, document)


@command("hom", "morphisms preserve labels and carry transitions to transitions")
def _hom(ctx: Context) -> CommandResult:
    (source_name, source), (target_name, target) = ctx.system(0), ctx.system(1)
    maps = catops.hom(source, target)
    document = ctx.output()
    names = [document.put_morphism(f"hom.{k}", f) for k, f in enumerate(maps)]
    return _done({"source": source_name, "target": target_name, "count": len(maps), "morphisms": names}, document)


@command("hom-count", "maps out of a representing object count states, actions or transitions directly")
def _hom_count(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    kind = ctx.options.kind or "point"
    report: dict[str, Any] = {"subject": name, "kind": kind, "labels": ctx.options.labels}
    try:
        report["count"] = generators.hom_characterization_check(kind, system, tuple(ctx.options.labels))
    except generators.CharacterizationMismatch as exc:
        return _verdict(False, {**report, "mismatch": str(exc)})
    return _done(report)


@command("product", "the product carries the pairing of its two projections")
def _product(ctx: Context) -> CommandResult:
    (left_name, left), (right_name, right) = ctx.system(0), ctx.system(1)
    result = catops.product(left, right)
    document = ctx.output()
    name = document.put_system(f"{left_name}*{right_name}", result.system)
    projections = [document.put_morphism(f"{name}.left", result.left), document.put_morphism(f"{name}.right", result.right)]
    return _done({"result": name, "projections": projections, "shape": _shape(result.system)}, document)


def _listed_systems(ctx: Context) -> list[tuple[str, core.TransitionSystem]]:
    document = ctx.source()
    names = ctx.options.operands or list(document.systems)
    missing = [name for name in names if name not in document.systems]
    if missing:
        raise CommandError(f"{ctx.command}: unknown systems {missing}")
    return [(name, document.systems[name]) for name in names]


@command("coproduct", "the coproduct is the disjoint union")
def _coproduct(ctx: Context) -> CommandResult:
    listed = _listed_systems(ctx)
    cocone = catops.coproduct([system for _, system in listed], ctx.source().alphabet)
    document = ctx.output()
    name = document.put_system("coproduct", cocone.apex)
    legs = [document.put_morphism(f"{name}.in{k}", leg) for k, leg in enumerate(cocone.legs)]
    return _done({"result": name, "insertions": legs, "shape": _shape(cocone.apex)}, document)


@command("colimit", "every arrow of the diagram commutes with the legs of the colimit")
def _colimit(ctx: Context) -> CommandResult:
    listed = _listed_systems(ctx)
    source = ctx.source()
    position: dict[str, int] = {}
    for k, (name, _) in enumerate(listed):
        position.setdefault(name, k)
    arrows = []
    for name, f in sorted(source.morphisms.items()):
        start, end = source.ends_of(name)
        if start in position and end in position:
            arrows.append((position[start], position[end], f))
    diagram = catops.Diagram(objects=tuple(system for _, system in listed), arrows=tuple(arrows))
    cocone = catops.colimit(diagram, ctx.variant)
    document = ctx.output()
    name = document.put_system("colimit", cocone.apex)
    legs = [document.put_morphism(f"{name}.leg{k}", leg) for k, leg in enumerate(cocone.legs)]
    return _done(
        {"variant": ctx.variant, "objects": [n for n, _ in listed], "arrows": len(arrows), "result": name, "legs": legs, "shape": _shape(cocone.apex)},
        document,
    )


@command("star-product", "the star product of a mono is a mono")
def _star_product(ctx: Context) -> CommandResult:
    name, f = ctx.morphism()
    star = catops.star_product(f, ctx.options.which)
    document = ctx.output()
    result = document.put_morphism(f"{name}.star.{star.which}", star.morphism)
    return _done(
        {"subject": name, "which": star.which, "result": result, "mono": core.is_mono(star.morphism).ok},
        document,
    )


@command("cyl", "the cylinder has 2^(n+2) n-transitions over each n-transition of the input")
def _cyl(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    result = cyl.cylinder(system)
    document = ctx.output()
    apex = document.put_system(f"{name}.cyl", result.system)
    maps = {
        key: document.put_morphism(f"{apex}.{key}", f)
        for key, f in (("gamma0", result.gamma0), ("gamma1", result.gamma1), ("sigma", result.sigma))
    }
    return _done({"subject": name, "result": apex, "maps": maps, "shape": _shape(result.system)}, document)


@command("cocyl", "maps out of a cylinder correspond to maps into the cocylinder")
def _cocyl(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    result = cyl.cocylinder(system)
    document = ctx.output()
    apex = document.put_system(f"{name}.cocyl", result.system)
    maps = {key: document.put_morphism(f"{apex}.{key}", f) for key, f in (("pi0", result.pi0), ("pi1", result.pi1))}
    return _done({"subject": name, "result": apex, "maps": maps, "shape": _shape(result.system)}, document)


@command("transpose", "transpose and untranspose are inverse bijections")
def _transpose(ctx: Context) -> CommandResult:
    name, f = ctx.morphism()
    base_name, base = ctx.system(1)
    if ctx.options.inverse:
        result, suffix = cyl.untranspose(f, base), "untransposed"
    else:
        result, suffix = cyl.transpose(f, base), "transposed"
    document = ctx.output()
    out = document.put_morphism(f"{name}.{suffix}", result)
    return _done({"subject": name, "base": base_name, "inverse": ctx.options.inverse, "result": out}, document)


@command("quotient-cyl", "collapsing internal states regularizes the cylinder and the projection has a section")
def _quotient_cyl(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    result = cyl.quotient_cyl(system, ctx.options.states)
    document = ctx.output()
    apex = document.put_system(f"{name}.cyl//", result.system)
    maps = {
        "projection": document.put_morphism(f"{apex}.projection", result.projection),
        "section": document.put_morphism(f"{apex}.section", result.section),
    }
    return _done(
        {"subject": name, "collapsed": result.collapsed, "result": apex, "maps": maps, "shape": _shape(result.system)},
        document,
    )


@command("internal", "a state is internal when it divides some transition")
def _internal(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    return _done({"subject": name, "internal": cyl.internal_states(system)})


@command("cubicalify", "the cubical coreflection keeps the transitions that sit inside a filled cube")
def _cubicalify(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    result = subcats.cubicalify(system)
    document = ctx.output()
    out = document.put_system(f"{name}.cubical", result.system)
    counit = document.put_morphism(f"{out}.counit", result.counit)
    return _done({"subject": name, "result": out, "counit": counit, "shape": _shape(result.system)}, document)


@command("regularize", "the regular reflection identifies dividing states until they are unique")
def _regularize(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    result = subcats.regularize(system)
    document = ctx.output()
    out = document.put_system(f"{name}.regular", result.system)
    unit = document.put_morphism(f"{out}.unit", result.unit)
    return _done({"subject": name, "result": out, "unit": unit, "shape": _shape(result.system)}, document)


@command("path", "the path space stays in the requested variant and is regular for regular input")
def _path(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    result = subcats.path_space(system, ctx.variant)
    document = ctx.output()
    out = document.put_system(f"{name}.path.{ctx.variant}", result)
    return _done({"subject": name, "variant": ctx.variant, "result": out, "shape": _shape(result)}, document)


@command("reach", "a state is reachable when a chain of transitions leads to it from the base")
def _reach(ctx: Context) -> CommandResult:
    name, pointed = ctx.pointed()
    return _done({"subject": name, "base": pointed.base, "reachable": subcats.reachable(pointed)})


@command("star", "the star coreflection keeps what is reachable from the base and is idempotent")
def _star(ctx: Context) -> CommandResult:
    name, pointed = ctx.pointed()
    result = subcats.star_coreflect(pointed, ctx.variant)
    document = ctx.output()
    out = document.put_pointed(f"{name}.star", result)
    return _done({"subject": name, "variant": ctx.variant, "result": out, "shape": _shape(result.system)}, document)


@command("star-cyl", "the star cylinder of a star-shaped regular system is star-shaped and regular")
def _star_cyl(ctx: Context) -> CommandResult:
    name, pointed = ctx.pointed()
    result = subcats.star_cylinder(pointed, ctx.variant)
    document = ctx.output()
    out = document.put_pointed(f"{name}.starcyl", result)
    return _done(
        {"subject": name, "variant": ctx.variant, "result": out, "base": result.base, "shape": _shape(result.system)},
        document,
    )


@command("same-past", "a pair shares a past when the path space reaches it from the base pair")
def _same_past(ctx: Context) -> CommandResult:
    name, pointed = ctx.pointed()
    pairs = subcats.same_past_pairs(pointed, ctx.variant)
    return _done({"subject": name, "variant": ctx.variant, "pairs": pairs})


@command("gen-set", "every member of a generating set is a cofibration")
def _gen_set(ctx: Context) -> CommandResult:
    alphabet = ctx.alphabet()
    members = model.generating_set(ctx.options.generating_set, alphabet, ctx.dmax)
    document = ctx.output() if ctx.document is not None else Document(alphabet=alphabet)
    names = [document.put_morphism(member.name, member.morphism) for member in members.members]
    return _done({"set": members.name, "dmax": ctx.dmax, "count": len(members), "members": names}, document)


@command("cofib", "cofibrations have the left lifting property against the trivial fibrations")
def _cofib(ctx: Context) -> CommandResult:
    name, f = ctx.morphism()
    verdict = model.is_cofibration(f, ctx.variant)
    return _verdict(
        verdict.ok,
        {
            "subject": name,
            "variant": ctx.variant,
            "procedure": verdict.procedure,
            "witness": verdict.witness,
            "note": verdict.note,
        },
    )


@command("lift", "the diagonal makes both triangles of the square commute")
def _lift(ctx: Context) -> CommandResult:
    names, maps = zip(*(ctx.morphism(k) for k in range(4)))
    problem = model.LiftingProblem(*maps)
    diagonal = model.lift(problem)
    document = ctx.output()
    report: dict[str, Any] = {"square": list(names)}
    if diagonal is not None:
        report["result"] = document.put_morphism("lift", diagonal)
    return _verdict(diagonal is not None, report, document)


@command("factor-r", "every map factors through state identifications followed by a map injective on states")
def _factor_r(ctx: Context) -> CommandResult:
    name, f = ctx.morphism()
    factors = model.factor_R(f)
    document = ctx.output()
    minus = document.put_morphism(f"{name}.minus", factors.minus)
    plus = document.put_morphism(f"{name}.plus", factors.plus)
    return _done(
        {"subject": name, "minus": minus, "plus": plus, "identified": len(f.source.states) - len(factors.minus.target.states)},
        document,
    )


@command("relocate", "R-cells move to the front and the composite stays isomorphic over the base")
def _relocate(ctx: Context) -> CommandResult:
    name, entry = ctx.decomposition()
    relocated = model.relocate(entry.decomposition)
    agree = model.composites_agree(entry.decomposition, relocated) is not None
    document = ctx.output()
    out = document.put_decomposition(f"{name}.relocated", DecompositionEntry(entry.generating_set, relocated))
    return _verdict(
        agree,
        {
            "subject": name,
            "result": out,
            "cells_before": [cell.generator.name for cell in entry.decomposition.cells],
            "cells_after": [cell.generator.name for cell in relocated.cells],
            "front_loaded": relocated.front_loaded(),
            "composites_isomorphic": agree,
        },
        document,
    )


@command("saturate", "each round attaches a cell along every square that has no lift")
def _saturate(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    result = model.saturate(system, ctx.variant, ctx.options.rounds)
    document = ctx.output()
    out = document.put_system(f"{name}.saturated", result.system)
    insertion = document.put_morphism(f"{name}.insertion", result.insertion)
    trace = [
        {"round": cell.round, "generator": cell.generator, "which": cell.which, "top": cell.top}
        for cell in result.trace
    ]
    return _done(
        {
            "subject": name,
            "variant": ctx.variant,
            "rounds": ctx.options.rounds,
            "result": out,
            "insertion": insertion,
            "cells": len(trace),
            "trace": trace,
            "shape": _shape(result.system),
        },
        document,
    )


@command("collapse-check", "for every transition of the original, every state pair carries a transition with its label word")
def _collapse_check(ctx: Context) -> CommandResult:
    name, insertion = ctx.morphism()
    report = model.causal_collapse_check(insertion.source, insertion.target, insertion)
    return _verdict(
        report.collapsed,
        {
            "insertion": name,
            "obligations": report.obligations,
            "missing": [
                {"transition": transition, "word": word, "from": start, "to": end}
                for transition, word, start, end in report.missing
            ],
        },
    )


@command("dot", "the drawing shows states and 1-dimensional transitions")
def _dot(ctx: Context) -> CommandResult:
    name, system = ctx.system()
    result = _done({"subject": name})
    result.text = to_dot(system, name)
    return result


def execute(
    name: str,
    options: CommandOptions,
    document: Document | None = None,
    settings: Settings | None = None,
) -> CommandResult:
    if name not in COMMANDS:
        raise CommandError(f"Unknown command {name!r}; expected one of {sorted(COMMANDS)}")
    ctx = Context(command=name, options=options, settings=settings or Settings(), document=document)
    logger.debug("running %s with variant=%s dmax=%d", name, ctx.variant, ctx.dmax)
    result = COMMANDS[name](ctx)
    result.report.setdefault("statement", STATEMENTS[name])
    if result.document is None and document is not None:
        result.document = ctx.output()
    if result.document is not None:
        result.document.report = {"command": name, **result.report}
    return result
