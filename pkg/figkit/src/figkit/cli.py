"""figures <kind> --in <paths...> --out <file.svg|pdf>

Exit codes: 0 on success, 2 on schema violations or bad arguments.
"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, render
from .schemas import SchemaMismatch


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="figures",
                                 description="render spikelab bundle files")
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("--in", dest="inputs", nargs="+", required=True,
                    help="input files in the documented order for the kind")
    ap.add_argument("--out", required=True, help="output figure (.svg or .pdf)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.kind, args.inputs, args.out)
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
