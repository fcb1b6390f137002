#! /usr/bin/env python3

import sys
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Optional, Sequence

from gfswe.scheme.cases import catalog
from gfswe.scheme.config import build_config
from gfswe.scheme.dec_time import DecNodes
from gfswe.scheme.runner import convergence, run
from gfswe.scheme.solver import Scheme
from gfswe.util.exceptions import ConfigError, OracleError, SolverError
from gfswe.util.log import LOG, set_verbosity

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

DEFAULT_MESHES = (25, 50, 100, 150, 200, 400, 800)


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _config(args: Namespace):
    return build_config(
        args.config,
        {
            "case": args.case,
            "scheme": args.scheme,
            "order": args.order,
            "cells": args.cells,
            "cfl": args.cfl,
            "tend": args.tend,
            "out": args.out,
            "snapshots": args.snapshots,
            "dec_nodes": args.dec_nodes,
            "quadrature_nodes": args.quadrature_nodes,
        },
    )


def _run(args: Namespace) -> int:
    config = _config(args)
    summary = run(config)
    LOG.info(f"wrote {len(summary.files)} state files to {config.out}")
    return EXIT_OK


def _convergence(args: Namespace) -> int:
    rows, path = convergence(_config(args), args.meshes, jobs=args.jobs)
    for row in rows:
        LOG.info(f"N={row.n_cells}: L2(h)={row.l2_h:.4e} L2(q)={row.l2_q:.4e}")
    LOG.info(f"convergence table written to {path}")
    return EXIT_OK


def _cases(args: Namespace) -> int:
    for case in catalog():
        print(f"{case.name:24s} T={case.t_end:<6g} g={case.g:<6g} {case.description}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = ArgumentParser(prog="gfswe")
    parser.add_argument("-v", action="store_true", help="verbose logging")

    subparsers = parser.add_subparsers(dest="command", required=True)

    run_options = ArgumentParser(add_help=False)
    run_options.add_argument("--config", type=Path, help="TOML file with run settings")
    run_options.add_argument("--case", help="benchmark name, see the cases command")
    run_options.add_argument("--scheme", choices=[s.value for s in Scheme])
    run_options.add_argument("--order", type=int, help="WENO order, 3 or 5")
    run_options.add_argument("--cells", type=int, help="number of cells")
    run_options.add_argument("--cfl", type=float, help="CFL number in (0, 1]")
    run_options.add_argument("--tend", type=float, help="final time, the case's by default")
    run_options.add_argument("--out", type=Path, help="output directory")
    run_options.add_argument("--snapshots", type=_float_list, help="comma separated snapshot times")
    run_options.add_argument("--dec-nodes", dest="dec_nodes", choices=[n.value for n in DecNodes])
    run_options.add_argument("--quadrature-nodes", dest="quadrature_nodes", type=int)

    run_parser = subparsers.add_parser("run", parents=[run_options], help="run one case")
    run_parser.set_defaults(run=_run)

    convergence_parser = subparsers.add_parser(
        "convergence", parents=[run_options], help="errors and EOA over several meshes"
    )
    convergence_parser.add_argument(
        "--meshes", type=_int_list, default=list(DEFAULT_MESHES), help="comma separated cell counts"
    )
    convergence_parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    convergence_parser.set_defaults(run=_convergence)

    cases_parser = subparsers.add_parser("cases", help="list the benchmarks")
    cases_parser.set_defaults(run=_cases)

    args = parser.parse_args(argv)
    set_verbosity(args.v)

    try:
        return args.run(args)
    except (ConfigError, OracleError) as e:
        LOG.error(f"configuration error: {e}")
        return EXIT_CONFIG
    except OSError as e:
        LOG.error(f"cannot write output: {e}")
        return EXIT_CONFIG
    except SolverError as e:
        LOG.error(f"solver failure: {e}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
