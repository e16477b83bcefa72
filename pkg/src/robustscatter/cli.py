"""Command-line interface: fit, flag, ddplot, ellipse and bench subcommands.

Reads a delimited matrix (CSV, optional header row), fits the requested
estimator, and writes JSON or CSV to stdout or a file.  Output is
byte-identical for identical input, flags and seed.  Exit codes: 0 on
success, 2 for data problems (unreadable input, non-numeric or non-finite
cells, degenerate data), 3 for configuration problems (bad flags, invalid
h/alpha/rho for the data at hand).

Row indices in all output are 0-based.  Outlier flags are always computed
from the raw robust fit's distances; the reported center and scatter are
the reweighted ones unless ``--no-reweight`` is given.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import bench as bench_mod
from .core import (
    DataMatrix,
    EstimatorKind,
    LocationScatter,
    chi2_quantile,
    classical_estimate,
    h_from_alpha,
)
from .detmcd import det_mcd
from .errors import (
    DegenerateData,
    DomainError,
    InstanceTooLarge,
    RobustScatterError,
    SingularMatrix,
    TooFewInliers,
    ZeroScale,
)
from .fastmcd import FastMcdConfig, fast_mcd
from .mrcd import MrcdConfig, mrcd
from .reweight import dd_plot_data, outlier_report, reweight, robust_correlation
from .univariate import UniMcdResult, uni_mcd

__all__ = ["main"]

THREADS_ENV_VAR = "ROBUST_SCATTER_THREADS"

_ESTIMATORS = ("fastmcd", "detmcd", "mrcd", "unimcd", "classical")


class _UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 3."""


class _DataError(Exception):
    """Unreadable or invalid input data; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="robust-scatter", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser, figure: bool = False) -> None:
        p.add_argument("input", help="delimited input matrix (CSV, optional header row)")
        p.add_argument("--estimator", choices=_ESTIMATORS, default="detmcd")
        p.add_argument("--alpha", type=float, default=None, help="coverage h/n in [0.5, 1]")
        p.add_argument("--h", type=int, default=None, help="subset size (overrides --alpha)")
        p.add_argument("--seed", type=int, default=0, help="seed for the randomized search")
        p.add_argument("--no-reweight", action="store_true", help="report the raw estimate only")
        p.add_argument("--rho", type=float, default=None, help="mrcd blend weight in (0, 1]")
        p.add_argument(
            "--target",
            choices=("identity", "equicorr"),
            default="identity",
            help="mrcd regularization target",
        )
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--output", default=None, help="write here instead of stdout")
        p.add_argument("--threads", type=int, default=1, help="worker threads for fastmcd starts")
        if figure:
            p.add_argument("--figure", default=None, help="also render a figure to this path")

    common(sub.add_parser("fit", help="fit a robust location/scatter estimate"))
    common(sub.add_parser("flag", help="per-row outlier flags and distances"), figure=True)
    common(sub.add_parser("ddplot", help="classical vs robust distance table"), figure=True)
    common(sub.add_parser("ellipse", help="tolerance ellipse boundaries (p = 2)"), figure=True)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", choices=("efficiency", "breakdown", "equivariance", "all"), default="all")
    b.add_argument("--n", type=int, default=None)
    b.add_argument("--p", type=int, default=None)
    b.add_argument("--alpha", type=float, default=None)
    b.add_argument("--reps", type=int, default=None)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--format", choices=("json", "csv"), default=None)
    b.add_argument("--output", default=None)
    return parser


# ---------------------------------------------------------------------------
# input parsing


def _read_matrix(path: str) -> DataMatrix:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line.rstrip("\n").rstrip("\r") for line in fh]
    except OSError as exc:
        raise _DataError(f"cannot read {path}: {exc}") from exc
    lines = [line for line in lines if line.strip()]
    if not lines:
        raise _DataError(f"{path} is empty")
    header: list[str] | None = None
    first = lines[0].split(",")
    try:
        [float(f) for f in first]
    except ValueError:
        header = [f.strip() for f in first]
        lines = lines[1:]
        if not lines:
            raise _DataError(f"{path} has a header but no data rows")
    width = len(lines[0].split(","))
    rows = []
    for r, line in enumerate(lines):
        fields = line.split(",")
        if len(fields) != width:
            raise _DataError(f"row {r} has {len(fields)} fields, expected {width}")
        row = []
        for c, field in enumerate(fields):
            try:
                value = float(field)
            except ValueError:
                raise _DataError(f"non-numeric cell at row {r}, column {c}: {field!r}") from None
            if not math.isfinite(value):
                raise _DataError(f"non-finite cell at row {r}, column {c}: {field!r}")
            row.append(value)
        rows.append(row)
    if header is not None and len(header) != width:
        raise _DataError(f"header has {len(header)} names for {width} columns")
    return DataMatrix(np.asarray(rows), column_names=tuple(header) if header else None)


# ---------------------------------------------------------------------------
# fitting


def _resolve_h(args: argparse.Namespace, n: int, p: int) -> int | None:
    if args.h is not None and args.alpha is not None:
        raise _UsageError("--h and --alpha are mutually exclusive")
    if args.h is not None:
        return args.h
    if args.alpha is not None:
        if args.estimator == "mrcd":
            # The breakdown-calibrated interpolation assumes p < n; for the
            # regularized estimator coverage maps straight to a fraction.
            if not 0.5 <= args.alpha <= 1.0:
                raise DomainError(f"coverage alpha must lie in [0.5, 1], got {args.alpha}")
            return max(2, min(n, int(math.floor(args.alpha * n))))
        return h_from_alpha(n, p, args.alpha)
    return None


def _uni_to_estimate(result: UniMcdResult, values: np.ndarray) -> LocationScatter:
    order = np.argsort(values, kind="stable")
    support = np.sort(order[result.subset_start : result.subset_start + result.h])
    variance = result.scale**2
    c0 = variance / result.raw_variance if result.raw_variance > 0.0 else 1.0
    return LocationScatter.create(
        np.array([result.location]),
        np.array([[variance]]),
        EstimatorKind.UNI_MCD,
        result.h,
        result.alpha,
        consistency_applied=True,
        c0=c0,
        support=support,
        exact_fit=result.exact_fit,
    )


def _fit_raw(dm: DataMatrix, args: argparse.Namespace) -> LocationScatter:
    h = _resolve_h(args, dm.n, dm.p)
    estimator = args.estimator
    if estimator == "unimcd":
        if dm.p != 1:
            raise _UsageError(f"unimcd requires a single-column input, got p={dm.p}")
        x = dm.values[:, 0]
        return _uni_to_estimate(uni_mcd(x, h), x)
    if estimator == "fastmcd":
        threads = _effective_threads(args.threads)
        config = FastMcdConfig(h=h, seed=args.seed, n_threads=threads)
        return fast_mcd(dm, config)
    if estimator == "detmcd":
        if dm.p < 2:
            raise _UsageError("detmcd requires p >= 2; use --estimator unimcd")
        return det_mcd(dm, h)
    if estimator == "mrcd":
        config = MrcdConfig(h=h, rho=args.rho, target=args.target)
        return mrcd(dm, config).to_location_scatter()
    if estimator == "classical":
        return classical_estimate(dm)
    raise _UsageError(f"unknown estimator {estimator!r}")


def _effective_threads(requested: int) -> int:
    if requested < 1:
        raise _UsageError(f"--threads must be >= 1, got {requested}")
    cap = os.environ.get(THREADS_ENV_VAR)
    if cap is None:
        return requested
    try:
        cap_value = int(cap)
    except ValueError:
        raise _UsageError(f"{THREADS_ENV_VAR} must be an integer, got {cap!r}") from None
    return max(1, min(requested, cap_value))


def _reweightable(raw: LocationScatter) -> bool:
    return raw.kind in (EstimatorKind.RAW_MCD, EstimatorKind.UNI_MCD) and not raw.exact_fit


# ---------------------------------------------------------------------------
# serialization


def _py(value):
    if isinstance(value, np.ndarray):
        return [_py(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def _fmt(value) -> str:
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    return str(value)


def _render_fit(dm: DataMatrix, args: argparse.Namespace) -> str:
    raw = _fit_raw(dm, args)
    weighted = None
    if _reweightable(raw) and not args.no_reweight:
        weighted = reweight(dm, raw)
    reported = weighted if weighted is not None else raw
    if raw.exact_fit:
        flags = None
    else:
        flags = np.flatnonzero(outlier_report(dm, raw).flagged) if dm.n > dm.p else None
    fmt = args.format or "json"
    if fmt == "json":
        payload = {
            "center": _py(reported.center),
            "scatter": _py(reported.scatter),
            "h": reported.h,
            "alpha": reported.alpha,
            "log_det": _py(reported.log_det),
            "c0": _py(reported.c0),
            "c1": _py(reported.c1),
            "flags": _py(flags) if flags is not None else None,
            "estimator": args.estimator,
            "correlation": _py(robust_correlation(reported)) if not raw.exact_fit else None,
            "exact_fit": raw.exact_fit,
        }
        return json.dumps(payload, indent=2) + "\n"
    lines = ["key,value"]
    for j, v in enumerate(reported.center):
        lines.append(f"center_{j},{_fmt(v)}")
    for i in range(reported.p):
        for j in range(reported.p):
            lines.append(f"scatter_{i}_{j},{_fmt(reported.scatter[i, j])}")
    lines.append(f"h,{reported.h}")
    lines.append(f"alpha,{_fmt(reported.alpha)}")
    lines.append(f"log_det,{_fmt(reported.log_det)}")
    lines.append(f"c0,{_fmt(reported.c0)}")
    lines.append(f"c1,{_fmt(reported.c1) if reported.c1 is not None else ''}")
    lines.append("flags," + (";".join(str(int(i)) for i in flags) if flags is not None else ""))
    return "\n".join(lines) + "\n"


def _raw_and_report(dm: DataMatrix, args: argparse.Namespace):
    raw = _fit_raw(dm, args)
    if raw.exact_fit:
        raise SingularMatrix(
            "exact fit: scatter is singular, distance-based diagnostics are undefined"
        )
    return raw, outlier_report(dm, raw)


def _render_flag(dm: DataMatrix, args: argparse.Namespace) -> str:
    raw, report = _raw_and_report(dm, args)
    if args.figure:
        from .plots import distance_figure, save_figure

        save_figure(distance_figure(report.rd, report.cutoff), args.figure)
    fmt = args.format or "csv"
    if fmt == "json":
        payload = {
            "cutoff": _py(report.cutoff),
            "md": _py(report.md),
            "rd": _py(report.rd),
            "weights": _py(report.weights),
            "flagged": _py(np.flatnonzero(report.flagged)),
        }
        return json.dumps(payload, indent=2) + "\n"
    lines = ["index,md,rd,cutoff,weight,flagged"]
    for i in range(dm.n):
        lines.append(
            f"{i},{_fmt(report.md[i])},{_fmt(report.rd[i])},{_fmt(report.cutoff)},"
            f"{int(report.weights[i])},{int(report.flagged[i])}"
        )
    return "\n".join(lines) + "\n"


def _render_ddplot(dm: DataMatrix, args: argparse.Namespace) -> str:
    raw = _fit_raw(dm, args)
    if raw.exact_fit:
        raise SingularMatrix(
            "exact fit: scatter is singular, distance-based diagnostics are undefined"
        )
    dd = dd_plot_data(dm, raw)
    if args.figure:
        from .plots import dd_figure, save_figure

        save_figure(dd_figure(dd), args.figure)
    fmt = args.format or "csv"
    if fmt == "json":
        payload = {"cutoff": _py(dd.cutoff), "md": _py(dd.md), "rd": _py(dd.rd)}
        return json.dumps(payload, indent=2) + "\n"
    lines = ["index,md,rd,cutoff"]
    for i in range(dm.n):
        lines.append(f"{i},{_fmt(dd.md[i])},{_fmt(dd.rd[i])},{_fmt(dd.cutoff)}")
    return "\n".join(lines) + "\n"


def _render_ellipse(dm: DataMatrix, args: argparse.Namespace) -> str:
    if dm.p != 2:
        raise _UsageError(f"ellipse requires a two-column input, got p={dm.p}")
    raw = _fit_raw(dm, args)
    if raw.exact_fit:
        raise SingularMatrix("exact fit: tolerance ellipse is degenerate")
    estimates: list[tuple[str, LocationScatter]] = []
    if args.estimator != "classical" and dm.n > dm.p:
        estimates.append(("classical", classical_estimate(dm)))
    robust = raw
    if _reweightable(raw) and not args.no_reweight:
        robust = reweight(dm, raw)
    estimates.append((args.estimator, robust))
    if args.figure:
        from .plots import ellipse_figure, save_figure

        save_figure(ellipse_figure(dm, estimates), args.figure)
    fmt = args.format or "csv"
    if fmt == "json":
        payload = {
            "cutoff_prob": 0.975,
            "estimates": [
                {
                    "label": label,
                    "center": _py(est.center),
                    "scatter": _py(est.scatter),
                    "log_det": _py(est.log_det),
                }
                for label, est in estimates
            ],
        }
        return json.dumps(payload, indent=2) + "\n"
    from .plots import _ellipse_path

    radius = math.sqrt(chi2_quantile(0.975, 2))
    lines = ["label,x0,x1"]
    for label, est in estimates:
        path = _ellipse_path(est, radius)
        for k in range(path.shape[1]):
            lines.append(f"{label},{_fmt(path[0, k])},{_fmt(path[1, k])}")
    return "\n".join(lines) + "\n"


def _render_bench(args: argparse.Namespace) -> str:
    suites = []
    kwargs = {}
    if args.n is not None:
        kwargs["n"] = args.n
    if args.p is not None:
        kwargs["p"] = args.p
    if args.reps is not None:
        kwargs["reps"] = args.reps
    if args.suite in ("efficiency", "all"):
        eff_kwargs = dict(kwargs)
        if args.alpha is not None:
            eff_kwargs["alpha"] = args.alpha
        if args.suite == "all":
            eff_kwargs.setdefault("n", 200)
            eff_kwargs.setdefault("reps", 50)
        suites.append(bench_mod.bench_efficiency(seed=args.seed, **eff_kwargs))
    if args.suite in ("breakdown", "all"):
        bd_kwargs = {}
        if args.n is not None:
            bd_kwargs["n"] = args.n
        if args.p is not None:
            bd_kwargs["p"] = args.p
        if args.reps is not None:
            bd_kwargs["trials"] = args.reps
        if args.suite == "all":
            bd_kwargs.setdefault("trials", 25)
        suites.append(bench_mod.bench_breakdown(seed=args.seed, **bd_kwargs))
    if args.suite in ("equivariance", "all"):
        eq_kwargs = {}
        if args.n is not None:
            eq_kwargs["n"] = args.n
        if args.p is not None:
            eq_kwargs["p"] = args.p
        if args.reps is not None:
            eq_kwargs["trials"] = args.reps
        if args.suite == "all":
            eq_kwargs.setdefault("trials", 10)
        suites.append(bench_mod.bench_equivariance(seed=args.seed, **eq_kwargs))
    fmt = args.format or "csv"
    if fmt == "json":
        payload = [
            {
                "suite": report.suite,
                "seconds": _py(report.seconds),
                "rows": [
                    {"name": row.name, "value": _py(row.value), "stderr": _py(row.stderr)}
                    for row in report.rows
                ],
            }
            for report in suites
        ]
        return json.dumps(payload, indent=2) + "\n"
    lines = ["suite,name,value,stderr,seconds"]
    for report in suites:
        for row in report.rows:
            stderr = _fmt(row.stderr) if row.stderr is not None else ""
            lines.append(
                f"{report.suite},{row.name},{_fmt(row.value)},{stderr},{_fmt(report.seconds)}"
            )
    return "\n".join(lines) + "\n"


def _write_output(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "bench":
            text = _render_bench(args)
        else:
            dm = _read_matrix(args.input)
            render = {
                "fit": _render_fit,
                "flag": _render_flag,
                "ddplot": _render_ddplot,
                "ellipse": _render_ellipse,
            }[args.command]
            text = render(dm, args)
        _write_output(text, args.output)
        return 0
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, InstanceTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (_DataError, ZeroScale, DegenerateData, SingularMatrix, TooFewInliers) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RobustScatterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
