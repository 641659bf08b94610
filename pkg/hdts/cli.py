from __future__ import annotations

import argparse
from pathlib import Path
import logging
import sys

from hdts.models import CommandOptions
from hdts.services.codec import emit, load, save
from hdts.services.commands import COMMANDS, CommandResult, execute
from hdts.services.core import InvariantError
from hdts.settings import Settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdts",
        description="Build, check and transform finite higher-dimensional transition systems.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Operation to run.")
    parser.add_argument("operands", nargs="*", help="Names of document entries the command works on, in order.")
    parser.add_argument("--in", dest="input", default=None, help="Input document (JSON).")
    parser.add_argument("--out", default=None, help="Write the result document here.")
    parser.add_argument("--variant", choices=["wts", "cts", "rts"], default=None, help="Category variant.")
    parser.add_argument("--dmax", type=int, default=None, help="Dimension bound; overrides HDTS_DMAX.")
    parser.add_argument("--rounds", type=int, default=1, help="Saturation rounds.")
    parser.add_argument("--format", choices=["text", "machine"], default="text", help="Report format on stdout.")

    parser.add_argument("--kind", default=None, help="Generator kind for make and hom-count.")
    parser.add_argument("--labels", nargs="+", default=[], help="Labels for make, hom-count and gen-set.")
    parser.add_argument("--states", nargs="*", default=[], help="States for restrict and quotient-cyl.")
    parser.add_argument("--set", dest="generating_set", choices=["I", "I_CTS", "I_RTS"], default="I")
    parser.add_argument("--which", choices=["gamma0", "gamma1", "gamma"], default="gamma0")
    parser.add_argument("--inverse", action="store_true", help="transpose: run the inverse direction.")
    parser.add_argument("--morphism", action="store_true", help="validate: check a morphism instead of a system.")
    parser.add_argument("--verbose", action="store_true", help="Log fixpoint progress to stderr.")
    return parser


def render(command: str, result: CommandResult, fmt: str) -> str:
    if fmt == "machine" and result.document is not None:
        return emit(result.document)
    if result.text is not None:
        return result.text
    lines = [f"{command}: {'ok' if result.ok else 'negative'}"]
    for key, value in result.report.items():
        if key != "ok":
            lines.append(f"- {key}: {value}")
    return "\n".join(lines) + "\n"


def run(argv: list[str] | None = None) -> tuple[int, str]:
    parser = build_parser()
    try:
        args = parser.parse_intermixed_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""

    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, format="%(levelname)s %(name)s: %(message)s")

    try:
        settings = Settings.from_env().override(dmax=args.dmax, variant=args.variant)
        document = load(Path(args.input)) if args.input else None
        options = CommandOptions(
            operands=args.operands,
            variant=args.variant,
            dmax=args.dmax,
            rounds=args.rounds,
            kind=args.kind,
            labels=args.labels,
            states=args.states,
            generating_set=args.generating_set,
            which=args.which,
            inverse=args.inverse,
            morphism=args.morphism,
        )
        result = execute(args.command, options, document, settings)
        if args.out and result.document is not None:
            save(result.document, Path(args.out))
    except FileNotFoundError as exc:
        return 2, f"File not found: {exc}\n"
    except (ValueError, InvariantError) as exc:
        return 2, f"hdts {args.command} failed: {exc}\n"
    return result.exit_code, render(args.command, result, args.format)


def main(argv: list[str] | None = None) -> int:
    code, output = run(argv)
    sys.stdout.write(output)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
