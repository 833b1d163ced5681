"""Command-line surface: run tests and confidence procedures on loss files.

The input format is the natural export of a benchmarking run: a CSV with
one row per evaluation example and one column per model (or arm, or
configuration), each cell a loss. ``test`` asks whether a named column
can be ruled out as the lowest-mean column, ``confset``/``mcs`` collect
the columns that survive, ``minmean`` brackets the smallest mean itself,
and ``simulate`` reruns the named Monte Carlo suites.

Everything is min-oriented; ``--mode max`` simply negates the matrix
right after loading, so a report under ``--mode max`` is exactly the
``--mode min`` report of the negated data.

Exit codes: 0 on success, 2 for malformed input (unreadable or ragged
files, non-numeric cells), 3 for domain violations (alpha outside
(0, 1), a target column that does not exist, too few rows).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .argmin import TestOutcome, split_test
from .confsets import IndexSet, Interval, mcs_one_step, mcs_two_step, pointwise_confset, smallest_mean_c1, smallest_mean_c2
from .errors import DomainError, InputError, SplitArgminError
from .estimators import RobustParams
from .harness import run_suite, suite_names, write_csv, write_json, _row_record
from .multisplit import MultiSplitConfig, multisplit_test
from .selection import SelectorKind

__all__ = ["RunConfig", "load_matrix", "emit_report", "main"]

_SELECTOR_BASES = {"plug": "plugin", "adj": "adjusted"}


@dataclass(frozen=True)
class RunConfig:
    """A fully parsed invocation, independent of argparse."""

    command: str
    path: Optional[str] = None
    r: int = 1
    alpha: float = 0.05
    selector: str = "adj"
    robust: Optional[str] = None
    splits: int = 1
    subsamples: int = 500
    mode: str = "min"
    seed: int = 0
    fmt: str = "json"
    threads: int = 1
    reps: Optional[int] = None
    method: str = "pointwise"
    variant: str = "two-step"
    set_kind: str = "c2"
    suite: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self) -> None:
        if self.command not in ("test", "confset", "mcs", "minmean", "simulate"):
            raise DomainError(f"unknown command {self.command!r}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.mode not in ("min", "max"):
            raise DomainError(f"mode must be min or max, got {self.mode!r}")
        if self.fmt not in ("json", "csv"):
            raise DomainError(f"format must be json or csv, got {self.fmt!r}")
        if self.selector not in _SELECTOR_BASES:
            raise DomainError(f"selector must be plug or adj, got {self.selector!r}")
        if self.robust not in (None, "mom", "catoni"):
            raise DomainError(f"robust must be mom or catoni, got {self.robust!r}")
        if self.splits < 1:
            raise DomainError("splits must be >= 1")
        if self.subsamples < 1:
            raise DomainError("subsamples must be >= 1")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")
        if self.reps is not None and self.reps < 1:
            raise DomainError("reps must be >= 1")


def load_matrix(path) -> tuple[np.ndarray, Optional[list[str]]]:
    """Read a losses CSV into an (n, d) array, detecting a header row.

    The first row is taken as column names when any of its cells fails
    to parse as a number. Returns (matrix, names) with names None for
    headerless files. Blank lines are skipped; everything else must be
    rectangular, numeric, and finite, and the errors point at the
    offending 1-based line.
    """
    try:
        with open(path, newline="") as handle:
            raw = list(csv.reader(handle))
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from None
    rows = [
        (lineno, [cell.strip() for cell in cells])
        for lineno, cells in enumerate(raw, start=1)
        if any(cell.strip() for cell in cells)
    ]
    if not rows:
        raise InputError(f"{path}: no data rows")

    def parse_row(cells):
        try:
            return [float(cell) for cell in cells]
        except ValueError:
            return None

    names: Optional[list[str]] = None
    start = 0
    width = len(rows[0][1])
    if parse_row(rows[0][1]) is None:
        names = rows[0][1]
        start = 1

    data = []
    for lineno, cells in rows[start:]:
        if len(cells) != width:
            raise InputError(
                f"{path}: line {lineno} has {len(cells)} columns, expected {width}"
            )
        values = parse_row(cells)
        if values is None:
            bad = next(c for c in cells if parse_row([c]) is None)
            raise InputError(f"{path}: line {lineno} has non-numeric cell {bad!r}")
        if not all(np.isfinite(values)):
            raise InputError(f"{path}: line {lineno} has a non-finite value")
        data.append(values)

    if len(data) < 4:
        raise InputError(f"{path}: need at least 4 data rows, found {len(data)}")
    if width < 2:
        raise InputError(f"{path}: need at least 2 columns, found {width}")
    return np.asarray(data, dtype=float), names


def _json_bytes(record) -> bytes:
    return (json.dumps(record, indent=2) + "\n").encode("utf-8")


def _csv_bytes(header, row) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerow(row)
    return buffer.getvalue().encode("utf-8")


def emit_report(result, fmt: str, *, names=None, alpha=None, method=None) -> bytes:
    """Serialize a test outcome, an index set, an interval, or suite rows.

    ``names`` (from a CSV header) annotates index-valued fields;
    ``alpha`` and ``method`` are echoed into set reports. The payload is
    a pure function of its inputs, so a fixed seed and input file always
    produce the same bytes.
    """
    if fmt not in ("json", "csv"):
        raise DomainError(f"format must be json or csv, got {fmt!r}")

    if isinstance(result, TestOutcome):
        record = {
            "statistic": float(result.statistic),
            "threshold": float(result.threshold),
            "p_value": float(result.p_value),
            "selected": int(result.selected),
            "reject": bool(result.reject),
            "seed": result.seed,
        }
        if names is not None:
            record["selected_name"] = names[result.selected - 1]
        if fmt == "json":
            return _json_bytes(record)
        return _csv_bytes(list(record), [_csv_cell(v) for v in record.values()])

    if isinstance(result, IndexSet):
        record = {
            "members": list(result.members),
            "alpha": alpha,
            "method": method,
            "d_hat": len(result),
        }
        if names is not None:
            record["member_names"] = [names[k - 1] for k in result.members]
        if fmt == "json":
            return _json_bytes(record)
        joined = ";".join(str(k) for k in result.members)
        return _csv_bytes(
            ["members", "alpha", "method", "d_hat"],
            [joined, _csv_cell(alpha), method, len(result)],
        )

    if isinstance(result, tuple) and len(result) == 2 and isinstance(result[0], Interval):
        interval, d_hat = result
        record = {"lo": float(interval.lo), "hi": float(interval.hi), "d_hat": int(d_hat)}
        if fmt == "json":
            return _json_bytes(record)
        return _csv_bytes(["lo", "hi", "d_hat"], [interval.lo, interval.hi, int(d_hat)])

    if isinstance(result, list):  # suite rows
        records = [_row_record(row) for row in result]
        if fmt == "json":
            return _json_bytes(records)
        buffer = io.StringIO()
        writer = csv.DictWriter(
            buffer,
            fieldnames=list(records[0]) if records else ["scenario"],
            lineterminator="\n",
        )
        writer.writeheader()
        for record in records:
            writer.writerow({k: ("" if v is None else v) for k, v in record.items()})
        return buffer.getvalue().encode("utf-8")

    raise DomainError(f"cannot serialize {type(result).__name__}")


def _csv_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def _selector_from(cfg: RunConfig) -> SelectorKind:
    robust = RobustParams(cfg.robust) if cfg.robust is not None else None
    return SelectorKind(_SELECTOR_BASES[cfg.selector], robust)


def _method_label(cfg: RunConfig, head: str) -> str:
    label = f"{head}-{cfg.selector}"
    if cfg.robust is not None:
        label += f"-{cfg.robust}"
    return label


def _load_oriented(cfg: RunConfig):
    data, names = load_matrix(cfg.path)
    if cfg.mode == "max":
        data = -data
    return data, names


def _execute(cfg: RunConfig) -> bytes:
    if cfg.command == "simulate":
        rows = run_suite(cfg.suite, reps=cfg.reps, seed=cfg.seed, threads=cfg.threads)
        if cfg.out is not None:
            os.makedirs(cfg.out, exist_ok=True)
            csv_path = os.path.join(cfg.out, f"{cfg.suite}.csv")
            json_path = os.path.join(cfg.out, f"{cfg.suite}.json")
            write_csv(rows, csv_path)
            write_json(rows, json_path)
            return f"wrote {csv_path}\nwrote {json_path}\n".encode("utf-8")
        return emit_report(rows, cfg.fmt)

    data, names = _load_oriented(cfg)

    if cfg.command == "test":
        selector = _selector_from(cfg)
        if cfg.splits > 1:
            ms = MultiSplitConfig(
                splits=cfg.splits,
                subsamples=cfg.subsamples,
                base_selector=selector,
                seed=cfg.seed,
            )
            outcome = multisplit_test(data, cfg.r, cfg.alpha, ms)
        else:
            outcome = split_test(data, cfg.r, cfg.alpha, selector, cfg.seed)
        return emit_report(outcome, cfg.fmt, names=names)

    if cfg.command == "confset":
        selector = _selector_from(cfg)
        if cfg.method == "multisplit":
            tester = MultiSplitConfig(
                splits=cfg.splits,
                subsamples=cfg.subsamples,
                base_selector=selector,
                seed=cfg.seed,
            )
        else:
            tester = selector
        members = pointwise_confset(data, cfg.alpha, tester, cfg.seed)
        label = _method_label(cfg, cfg.method)
        return emit_report(members, cfg.fmt, names=names, alpha=cfg.alpha, method=label)

    if cfg.command == "mcs":
        selector = _selector_from(cfg)
        build = mcs_one_step if cfg.variant == "one-step" else mcs_two_step
        members = build(data, cfg.alpha, selector, cfg.seed)
        label = _method_label(cfg, f"mcs-{cfg.variant}")
        return emit_report(members, cfg.fmt, names=names, alpha=cfg.alpha, method=label)

    # minmean
    if cfg.set_kind == "c1":
        interval = smallest_mean_c1(data, cfg.alpha)
        report = (interval, data.shape[1])
    else:
        report = smallest_mean_c2(data, cfg.alpha, cfg.seed)
    return emit_report(report, cfg.fmt, names=names)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed for all split randomness")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--mode", choices=("min", "max"), default="min",
                        help="max negates the data so the largest mean is targeted")
    common.add_argument("--threads", type=int, default=1)

    selector_opts = argparse.ArgumentParser(add_help=False)
    selector_opts.add_argument("--selector", choices=("plug", "adj"), default="adj",
                               help="runner-up rule: raw locations or studentized gaps")
    selector_opts.add_argument("--robust", choices=("mom", "catoni"),
                               help="swap column means for a robust location estimate")

    parser = argparse.ArgumentParser(
        prog="splitargmin",
        description="Split-sample inference for the column with the smallest mean loss.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", parents=[common, selector_opts],
                       help="test whether column r can still be the argmin")
    p.add_argument("--r", type=int, required=True, help="1-based column under test")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--splits", type=int, default=1,
                   help="average this many random splits (calibrated by resampling)")
    p.add_argument("--subsamples", type=int, default=500,
                   help="calibration resamples when --splits > 1")
    p.add_argument("path", metavar="FILE")

    p = sub.add_parser("confset", parents=[common, selector_opts],
                       help="confidence set for the argmin by test inversion")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", choices=("pointwise", "multisplit"), default="pointwise")
    p.add_argument("--splits", type=int, default=10)
    p.add_argument("--subsamples", type=int, default=500)
    p.add_argument("path", metavar="FILE")

    p = sub.add_parser("mcs", parents=[common, selector_opts],
                       help="model confidence set with uniform coverage")
    p.add_argument("--variant", choices=("one-step", "two-step"), required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("path", metavar="FILE")

    p = sub.add_parser("minmean", parents=[common],
                       help="confidence interval for the smallest column mean")
    p.add_argument("--set", dest="set_kind", choices=("c1", "c2"), required=True,
                   help="c1 keeps every column; c2 screens first and pays for fewer")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("path", metavar="FILE")

    p = sub.add_parser("simulate", parents=[common],
                       help="rerun one of the named Monte Carlo suites")
    p.add_argument("--suite", choices=suite_names(), required=True)
    p.add_argument("--reps", type=int, help="replications per cell (suite default otherwise)")
    p.add_argument("--out", help="directory for <suite>.csv and <suite>.json")

    return parser


def _config_from(args: argparse.Namespace) -> RunConfig:
    fields = (
        "path", "r", "alpha", "selector", "robust", "splits", "subsamples",
        "mode", "seed", "fmt", "threads", "reps", "method", "variant",
        "set_kind", "suite", "out",
    )
    present = {name: getattr(args, name) for name in fields if getattr(args, name, None) is not None}
    return RunConfig(command=args.command, **present)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from(args)
        payload = _execute(cfg)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SplitArgminError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    sys.stdout.write(payload.decode("utf-8"))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
