from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from pydantic import ValidationError

from nonlocal_bh.core.errors import InvalidArgumentError, StudyRunError
from nonlocal_bh.core.logging_config import setup_logging
from nonlocal_bh.experiments.config import build_config
from nonlocal_bh.experiments.problems import available_problems
from nonlocal_bh.experiments.study import run_study

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_SOLVER_FAILURE = 3
EXIT_IO_FAILURE = 4

_STUDIES = {"delta-sweep": "delta_sweep", "c-sweep": "c_sweep"}


def _float_list(raw: str) -> list[float]:
    parts = [p.strip() for p in raw.split(",")]
    try:
        return [float(p) for p in parts if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocal_bh",
        description="Nonlocal biharmonic solver: delta/c convergence studies written to CSV.",
    )
    parser.add_argument("--dim", type=int, choices=(1, 2), required=True)
    parser.add_argument("--n-cells", type=int, default=None, help="cells per axis (default 20)")
    parser.add_argument("--deltas", type=_float_list, default=None, help="comma-separated horizons")
    parser.add_argument("--c", type=float, default=None, help="penalty strength, xi = delta / c")
    parser.add_argument("--c-values", type=_float_list, default=None, help="c values for c-sweep")
    parser.add_argument("--problem", default=None, help=f"one of: {', '.join(available_problems())}")
    parser.add_argument("--study", choices=sorted(_STUDIES), default="delta-sweep")
    parser.add_argument("--out", required=True, help="CSV output path")
    parser.add_argument("--dump-system", default=None, help="write the assembled system as text")
    parser.add_argument("--reference-n", type=int, default=None, help="compare against a finer nonlocal solve")
    parser.add_argument("--workers", type=int, default=None, help="parallel runs (default NLBH_WORKERS)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse 는 잘못된 인수에 대해 2 로 종료한다 (--help 는 0).
        return int(exc.code or 0)

    setup_logging()
    try:
        config = build_config(
            dim=args.dim,
            output_path=args.out,
            n_cells=args.n_cells,
            deltas=args.deltas,
            c=args.c,
            c_values=args.c_values,
            problem=args.problem,
            study=_STUDIES[args.study],
            dump_system=args.dump_system,
            reference_n=args.reference_n,
            workers=args.workers,
        )
    except (ValidationError, InvalidArgumentError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    try:
        summary = run_study(config)
    except StudyRunError as exc:
        dim, n_cells, delta, c = exc.params
        print(f"solver failure | dim={dim} N={n_cells} delta={delta!r} c={c!r}: {exc.cause}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO_FAILURE

    if summary.slope is not None:
        print(f"slope={summary.slope:.17g}")
    return EXIT_OK
