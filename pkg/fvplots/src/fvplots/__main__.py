import argparse
import sys

from .render import EmptyDataError, SchemaMismatchError, render_run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fvplots", description="Regenerate figures from a run directory")
    parser.add_argument("--run-dir", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        written = render_run(args.run_dir, args.out)
    except (SchemaMismatchError, EmptyDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
