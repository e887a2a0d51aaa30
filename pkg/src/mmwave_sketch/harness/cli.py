"""Command-line entry point.

    mmwave-sketch simulate --config scenario.yaml --out traces.csv
    mmwave-sketch oneshot  --trials 20 --out oneshot.csv
    mmwave-sketch subspace --seed 3 --out subspace.csv
    mmwave-sketch ccdf     --config scenario.yaml --out ccdf.csv --records trials.csv

Exit status: 0 on success, 2 on invalid configuration, 3 when any trial
failed (solver non-convergence or estimator error), 1 on I/O errors.  On a
nonzero exit a JSON summary is printed to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .config import ScenarioError, dump_scenario, load_scenario
from .experiment import cells, failure_counts, run_sweep, simulate_channels
from .io import emit_results, render

COMMAND_ESTIMATORS = {
    "oneshot": ("oneshot", "time_average"),
    "subspace": ("subspace_only", "subspace_ls"),
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML scenario file (defaults: reference scenario)")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, help="solver relative tolerance")
    common.add_argument("--max-iters", type=int, help="solver iteration cap")
    common.add_argument("--penalty", type=float, help="initial ADMM penalty")
    common.add_argument("--workers", type=int)
    common.add_argument("--allow-failures", action="store_true",
                        help="exit 0 even if some trials failed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mmwave-sketch", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="channel traces only")
    sub.add_parser("oneshot", parents=[common], help="one-shot and time-averaged estimators")
    sub.add_parser("subspace", parents=[common], help="RMMV subspace and subspace-aided LS")
    c = sub.add_parser("ccdf", parents=[common], help="full sweep, CCDF tables")
    c.add_argument("--records", help="also write per-trial records to this path")
    sub.add_parser("show-config", parents=[common], help="print the resolved scenario as YAML")
    return p


def _fail(code: int, kind: str, **detail) -> int:
    print(json.dumps({"error": kind, **detail}, sort_keys=True), file=sys.stderr)
    return code


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = load_scenario(args.config)
        sc = sc.with_overrides(seed=args.seed, trials=args.trials, workers=args.workers,
                               tolerance=args.tol, max_iterations=args.max_iters, penalty=args.penalty)
        if args.command in COMMAND_ESTIMATORS:
            sc = sc.with_overrides(estimators=COMMAND_ESTIMATORS[args.command])
    except ScenarioError as exc:
        return _fail(2, "validation", problems=exc.problems)
    except (ValueError, TypeError) as exc:
        return _fail(2, "validation", problems={"<overrides>": str(exc)})
    except OSError as exc:
        return _fail(1, "io", message=str(exc))

    try:
        if args.command == "show-config":
            _write(dump_scenario(sc), args.out)
            return 0
        if args.command == "simulate":
            _write(render(_trace_rows(sc), TRACE_HEADER, args.format), args.out)
            return 0
        records = run_sweep(sc)
        if args.command == "ccdf":
            from .io import ccdf_table

            _write(emit_results(ccdf_table(records), None, args.format, kind="ccdf"), args.out)
            if args.records:
                emit_results(records, args.records, args.format)
        else:
            _write(emit_results(records, None, args.format), args.out)
    except OSError as exc:
        return _fail(1, "io", message=str(exc))
    failures = failure_counts(records)
    if failures and not args.allow_failures:
        return _fail(3, "trial_failures", failures=failures,
                     total=sum(len(r.results) for r in records))
    return 0


TRACE_HEADER = ("trial", "snr_db", "tau_c", "slot", "element", "h_re", "h_im")


def _trace_rows(sc):
    for cell in cells(sc):
        for trial in range(sc.trials):
            _, H, _ = simulate_channels(sc, cell, trial)
            for slot in range(H.shape[1]):
                for k, v in enumerate(H[:, slot]):
                    yield {"trial": trial, "snr_db": cell.snr_db, "tau_c": cell.tau_c, "slot": slot,
                           "element": k, "h_re": float(np.real(v)), "h_im": float(np.imag(v))}


if __name__ == "__main__":
    sys.exit(main())
