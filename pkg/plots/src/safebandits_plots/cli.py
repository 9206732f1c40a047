"""plot --kind <means|regret|alpha-sweep> --in <csv...> --out <path>"""

from __future__ import annotations

import argparse
import sys

from .plotting import KINDS, PlotJob, SchemaError, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="safebandits-plot",
        description="Render figures from safebandits experiment CSVs",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", required=True, nargs="+", metavar="CSV")
    parser.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    parser.add_argument(
        "--changepoints", type=int, nargs="*", default=[],
        help="rounds to mark with vertical dashed lines",
    )
    parser.add_argument("--title", default="")
    parser.add_argument(
        "--dump", default=None,
        help="also write the plotted data series to this CSV",
    )
    args = parser.parse_args(argv)
    job = PlotJob(
        kind=args.kind,
        inputs=args.inputs,
        output=args.out,
        changepoints=args.changepoints,
        title=args.title,
        dump=args.dump,
    )
    try:
        render(job)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
