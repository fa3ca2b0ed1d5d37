"""Command line entry point: gnodefigs render --spec figure.json"""

import argparse
import sys

from .errors import SchemaError, SpecError
from .render import render
from .spec import load_spec

__all__ = ["entry", "main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gnodefigs",
        description="Render figures from gnodelab result files.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure from a spec")
    p_render.add_argument("--spec", required=True,
                          help="path to a figure spec JSON file")
    args = parser.parse_args(argv)

    try:
        spec = load_spec(args.spec)
        out = render(spec)
    except SpecError as exc:
        loc = f" (at {exc.path})" if exc.path else ""
        print(f"error: {exc.args[0]}{loc}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        where = exc.filename or "?"
        col = f", column {exc.column!r}" if exc.column else ""
        print(f"error: {where}{col}: {exc.args[0]}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(out)
    return 0


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
