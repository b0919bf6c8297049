"""Command line: render a batch of figures from a figure-spec file.

Usage::

    oseenfig render SPECFILE

``SPECFILE`` is a JSON file holding one figure spec or a list of them;
relative paths inside it resolve against its own directory.  Exit
codes: 0 on success, 1 when an input file violates the documented
table formats (message carries the file, the offending column or key,
and the row number where that applies), 2 when the spec file itself is
malformed (message names the offending field).
"""

from __future__ import annotations

import sys

from .figspec import SpecError, load_specs
from .readers import FormatError
from .render import render_all

__all__ = ["main", "main_entry"]

_USAGE = """\
usage: oseenfig render SPECFILE

Render the figure specs in SPECFILE (a JSON object or list of objects
with keys: kind, inputs, out, style).  Figure kinds: localization,
scaling, gap-decay, decay-curves.
"""


def main(argv=None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if not args or args[0] in ("-h", "--help", "help"):
        print(_USAGE, end="")
        return 0 if args and args[0] in ("-h", "--help", "help") else 2
    command, rest = args[0], args[1:]
    if command != "render":
        print(f"config error: unknown command {command!r}; the only "
              f"command is 'render'", file=sys.stderr)
        return 2
    if len(rest) != 1:
        print("config error: 'render' takes exactly one argument, the "
              "figure-spec file", file=sys.stderr)
        return 2

    try:
        specs = load_specs(rest[0])
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2

    try:
        reports = render_all(specs)
    except FormatError as exc:
        print(f"input format error: {exc}", file=sys.stderr)
        return 1

    for rep in reports:
        print(f"[OK] {rep.kind} -> {rep.path}")
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
