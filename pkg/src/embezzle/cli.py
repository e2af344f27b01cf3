"""Command-line experiment runner.

Subcommands cover family inspection (``coeffs``), fidelity sweeps
(``sweep``, ``figure1``), entropy and order reports (``entropy``,
``orders``, ``ratios``), randomized protocol property runs
(``protocol``), and fitting (``fit``).  Tabular output is CSV with floats
at 17 significant digits so round-trips are bit-exact; reports are JSON.

Exit codes: 0 success, 1 usage error, 2 computation error.  The
EMBEZZLE_OUT environment variable sets the default output directory.
A ``key = value`` config file can pre-set any long flag of a subcommand;
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, fidelity, fitting, protocol
from .families import (
    FamilyKind,
    FamilySpec,
    build_spectrum,
)
from .targets import BUILTIN_TARGETS, TargetState

CSV_HEADER = "family,N,n,target,fidelity,norm_method,norm_value,elapsed_ms"

LONG_RUN_N = 30

FIGURE1_FAMILIES = ("gh", "fdh")
FIGURE1_TARGETS = ("phi+", "phi*", "phio")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1, not argparse's default 2
        raise UsageError(message)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_int_expr(text: str) -> int:
    """Integer, allowing the 2^k shorthand."""
    t = text.strip()
    if "^" in t:
        base, exp = t.split("^", 1)
        return int(base) ** int(exp)
    return int(t)


def parse_range(text: str) -> list[int]:
    """Inclusive integer range 'a..b', or a single integer."""
    t = text.strip()
    if ".." in t:
        lo, hi = t.split("..", 1)
        lo_i, hi_i = parse_int_expr(lo), parse_int_expr(hi)
        if hi_i < lo_i:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo_i, hi_i + 1))
    return [parse_int_expr(t)]


def parse_int_list(text: str) -> list[int]:
    return [parse_int_expr(part) for part in text.split(",") if part.strip()]


def _range_arg(text: str) -> list[int]:
    try:
        return parse_range(text)
    except ValueError as exc:
        raise UsageError(str(exc) if str(exc) else f"malformed range {text!r}")


def _int_arg(text: str) -> int:
    try:
        return parse_int_expr(text)
    except ValueError:
        raise UsageError(f"malformed integer {text!r}")


def _int_list_arg(text: str) -> list[int]:
    try:
        return parse_int_list(text)
    except ValueError:
        raise UsageError(f"malformed integer list {text!r}")


def parse_target(text: str) -> TargetState:
    t = text.strip()
    if t in BUILTIN_TARGETS:
        return BUILTIN_TARGETS[t]
    try:
        weights = tuple(float(p) for p in t.split(","))
        return TargetState.normalized(weights, name=None)
    except ValueError:
        raise UsageError(f"unknown target {text!r}")


def parse_family(text: str) -> FamilySpec:
    try:
        return FamilySpec.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc))


def _out_path(args, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    base = os.environ.get("EMBEZZLE_OUT", ".")
    return Path(base) / default_name


def _load_config(argv: list[str]) -> list[str]:
    """Inject config-file entries as flags for any option not given."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = argv[idx + 1]
    rest = argv[:idx] + argv[idx + 2 :]
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}")
    injected: list[str] = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"malformed config line {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if flag in rest:
            continue  # explicit flags win
        for item in value.split():
            injected.extend([flag, item])
    if not rest:
        return injected
    return [rest[0]] + injected + rest[1:]


def _records_to_csv(records, timing: str) -> list[str]:
    lines = [CSV_HEADER]
    for rec in records:
        ms = 0.0 if timing == "none" else rec.elapsed_s * 1e3
        lines.append(
            ",".join(
                [
                    rec.family.label,
                    str(rec.N),
                    str(rec.n),
                    rec.target.label,
                    _fmt(rec.fidelity),
                    rec.norm_method,
                    _fmt(rec.norm_value),
                    _fmt(ms),
                ]
            )
        )
    return lines


def _write_text(path: Path, lines: list[str]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise RuntimeError(f"cannot write {path}: {exc}") from exc


def _check_long_run(args, Ns: list[int]) -> None:
    if max(Ns) <= LONG_RUN_N:
        return
    if not args.allow_long:
        raise UsageError(
            f"N={max(Ns)} exceeds {LONG_RUN_N}; pass --allow-long to proceed "
            "(expect a minutes-scale merge per point)"
        )
    probe_n = 1 << 20
    start = time.perf_counter()
    src = build_spectrum(FamilySpec.parse("fdh"), probe_n)
    fidelity.optimal_fidelity(src, BUILTIN_TARGETS["phio"])
    rate = probe_n / max(time.perf_counter() - start, 1e-9)
    total = sum(2**N for N in Ns) * len(getattr(args, "family", ["x"])) * max(
        len(getattr(args, "target", ["x"])), 1
    )
    eta_min = total / rate / 60.0 * 4.0  # gh scans roughly quadruple the work
    print(f"estimated long-run time: ~{eta_min:.0f} min", file=sys.stderr)


def _cmd_coeffs(args) -> int:
    spec = parse_family(args.family)
    n = _int_arg(args.n)
    src = build_spectrum(spec, n, norm_method=args.norm)
    print(f"family={spec.label} n={src.total_count} norm_sq={_fmt(src.norm_sq)}")
    for value, count in src.first_runs(args.top):
        print(f"{_fmt(value)} x{count}")
    return 0


def _sweep_records(args, families, targets, Ns):
    records = []
    for spec in families:
        for target in targets:
            records.extend(
                fidelity.fidelity_sweep(
                    spec, target, Ns, norm_method=args.norm, jobs=args.jobs
                )
            )
    records.sort(key=lambda r: (r.family.label, r.target.label, r.N))
    return records


def _cmd_sweep(args) -> int:
    families = [parse_family(f) for f in args.family]
    targets = [parse_target(t) for t in args.target]
    Ns = _range_arg(args.n)
    _check_long_run(args, Ns)
    records = _sweep_records(args, families, targets, Ns)
    path = _out_path(args, "sweep.csv")
    _write_text(path, _records_to_csv(records, args.timing))
    print(f"wrote {len(records)} rows to {path}")
    return 0


def _cmd_figure1(args) -> int:
    args.family = list(FIGURE1_FAMILIES)
    args.target = list(FIGURE1_TARGETS)
    families = [parse_family(f) for f in args.family]
    targets = [parse_target(t) for t in args.target]
    Ns = _range_arg(args.n)
    _check_long_run(args, Ns)
    records = _sweep_records(args, families, targets, Ns)
    path = _out_path(args, "figure1.csv")
    _write_text(path, _records_to_csv(records, args.timing))
    print(f"wrote {len(records)} rows to {path}")
    return 0


def _cmd_entropy(args) -> int:
    n = _int_arg(args.n)
    lines = ["family,n,entropy_bits,prediction,ratio"]
    for name in args.family:
        spec = parse_family(name)
        src = build_spectrum(spec, n)
        ent = analysis.entanglement_entropy(src)
        try:
            pred = analysis.entropy_prediction(spec, n)
            lines.append(
                f"{spec.label},{src.total_count},{_fmt(ent)},{_fmt(pred)},{_fmt(ent / pred)}"
            )
        except ValueError:
            lines.append(f"{spec.label},{src.total_count},{_fmt(ent)},,")
    path = _out_path(args, "entropy.csv")
    _write_text(path, lines)
    print(f"wrote {path}")
    return 0


def _cmd_orders(args) -> int:
    if args.report == "order-ratio":
        spec = parse_family(args.family)
        lines = ["family,m,n,ratio"]
        for n in _int_list_arg(args.n_points):
            r = analysis.order_ratio(spec, args.m, n)
            lines.append(f"{spec.label},{args.m},{n},{_fmt(r)}")
    elif args.report == "divergence":
        report = analysis.order_divergence_check(args.r, _int_list_arg(args.n_points))
        lines = ["r,n,ratio"]
        for n, ratio in zip(report.samples, report.ratios):
            lines.append(f"{report.r},{n},{_fmt(ratio)}")
        lines.append(f"# increasing={report.increasing} all_ge_one={report.all_at_least_one}")
    elif args.report == "mu1":
        spec = parse_family(args.family)
        pairs = analysis.mu1_decay(spec, _range_arg(args.n), check=False)
        lines = ["family,N,mu1"]
        for N, mu1 in pairs:
            lines.append(f"{spec.label},{N},{_fmt(mu1)}")
    elif args.report == "ln-dev":
        rows = analysis.gh_ln_deviation(_range_arg(args.n))
        lines = ["N,n,norm,deviation,bound,within"]
        for row in rows:
            lines.append(
                f"{int(math.log2(row.n))},{row.n},{_fmt(row.norm)},"
                f"{_fmt(row.deviation)},{_fmt(row.bound)},{row.within_bound}"
            )
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown report {args.report!r}")
    path = _out_path(args, f"orders_{args.report}.csv")
    _write_text(path, lines)
    print(f"wrote {path}")
    return 0


def _cmd_ratios(args) -> int:
    spec = parse_family(args.family)
    target = parse_target(args.target)
    upto = _int_arg(args.upto)
    # normalization cancels in the ratios, so skip the exact gh norm scan
    method = "ln_approx" if spec.kind is FamilyKind.GH else "exact"
    src = build_spectrum(spec, upto, norm_method=method)
    rho = fidelity.ratio_profile(src, target, upto)
    lines = ["family,target,i,rho"]
    for i in range(0, upto, args.stride):
        lines.append(f"{spec.label},{target.label},{i + 1},{_fmt(rho[i])}")
    path = _out_path(args, "ratios.csv")
    _write_text(path, lines)
    print(f"wrote {path}")
    return 0


def _cmd_protocol(args) -> int:
    reports = []
    if args.lemma in ("superposition", "both"):
        reports.append(protocol.superposition_suite(args.trials, args.seed))
    if args.lemma in ("rank-recursion", "both"):
        reports.append(protocol.rank_recursion_suite(args.trials, args.seed))
    payload = {
        "seed": args.seed,
        "reports": [
            {
                "lemma": r.lemma,
                "trials": r.trials,
                "violations": r.violations,
                "worst_margin": r.worst_margin,
            }
            for r in reports
        ],
    }
    path = _out_path(args, "protocol.json")
    _write_text(path, [json.dumps(payload, indent=2)])
    print(f"wrote {path}")
    return 0 if all(r.violations == 0 for r in reports) else 2


def _read_sweep_csv(path: str):
    import csv as _csv

    series: dict[tuple[str, str], list[tuple[float, float]]] = {}
    try:
        with open(path, newline="") as fh:
            for row in _csv.DictReader(fh):
                key = (row["family"], row["target"])
                series.setdefault(key, []).append(
                    (float(row["N"]), float(row["fidelity"]))
                )
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise RuntimeError(f"cannot read sweep csv {path!r}: {exc}") from exc
    if not series:
        raise RuntimeError(f"no data rows in {path!r}")
    return series


def _cmd_fit(args) -> int:
    series = _read_sweep_csv(args.input)
    n0_range = _range_arg(args.n0_range) if args.n0_range else []
    fits = []
    models: dict[tuple[str, str], fitting.FitModel] = {}
    for (family, target), points in sorted(series.items()):
        model = fitting.fit_inverse_poly(points, args.n0)
        models[(family, target)] = model
        entry = {
            "family": family,
            "target": target,
            "model": {"a": model.a, "b": model.b, "c": model.c},
            "window": list(model.window),
            "rms": model.rms_residual,
            "sensitivity": [],
        }
        if n0_range:
            scan = fitting.sensitivity_scan(points, n0_range)
            entry["sensitivity"] = [
                {
                    "n0": m.window[0],
                    "a": m.a,
                    "b": m.b,
                    "c": m.c,
                    "rms": m.rms_residual,
                }
                for m in scan.models
            ]
            entry["spread"] = {
                "a": scan.spread_a,
                "b": scan.spread_b,
                "c": scan.spread_c,
            }
        fits.append(entry)
    crossovers = []
    targets = sorted({t for _, t in models})
    families = sorted({f for f, _ in models})
    for target in targets:
        present = [f for f in families if (f, target) in models]
        for i, fam_a in enumerate(present):
            for fam_b in present[i + 1 :]:
                n_star = fitting.crossover(models[(fam_a, target)], models[(fam_b, target)])
                crossovers.append(
                    {
                        "target": target,
                        "family_a": fam_a,
                        "family_b": fam_b,
                        "n_star": n_star,
                    }
                )
    payload = {"fits": fits, "crossovers": crossovers}
    path = _out_path(args, "fit.json")
    _write_text(path, [json.dumps(payload, indent=2)])
    print(f"wrote {path}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="embezzle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file pre-setting flags")
        p.add_argument("--out", help="output path (default under $EMBEZZLE_OUT)")

    p = sub.add_parser("coeffs", help="print leading spectrum runs")
    common(p)
    p.add_argument("--family", required=True)
    p.add_argument("--n", required=True)
    p.add_argument("--top", type=int, default=8)
    p.add_argument("--norm", default="exact", choices=["exact", "ln_approx"])
    p.set_defaults(fn=_cmd_coeffs)

    p = sub.add_parser("sweep", help="fidelity sweep over N, CSV out")
    common(p)
    p.add_argument("--family", action="append", required=True)
    p.add_argument("--target", action="append", required=True)
    p.add_argument("--n", required=True, help="inclusive range, e.g. 3..26")
    p.add_argument("--norm", default="auto", choices=["auto", "exact", "ln_approx"])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", default="wall", choices=["wall", "none"])
    p.add_argument("--allow-long", action="store_true")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("figure1", help="both families x three targets sweep")
    common(p)
    p.add_argument("--n", default="3..26")
    p.add_argument("--norm", default="auto", choices=["auto", "exact", "ln_approx"])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", default="wall", choices=["wall", "none"])
    p.add_argument("--allow-long", action="store_true")
    p.set_defaults(fn=_cmd_figure1)

    p = sub.add_parser("entropy", help="entropy vs prediction table")
    common(p)
    p.add_argument("--n", required=True)
    p.add_argument("--family", action="append", default=None)
    p.set_defaults(fn=_cmd_entropy)

    p = sub.add_parser("orders", help="normalization order reports")
    common(p)
    p.add_argument(
        "--report",
        required=True,
        choices=["order-ratio", "divergence", "mu1", "ln-dev"],
    )
    p.add_argument("--family", default="fdh")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--n", default="3..20", help="N range for mu1 / ln-dev")
    p.add_argument("--n-points", default="2^10,2^15,2^20")
    p.set_defaults(fn=_cmd_orders)

    p = sub.add_parser("ratios", help="omega/mu ratio profile samples")
    common(p)
    p.add_argument("--family", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--upto", required=True)
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(fn=_cmd_ratios)

    p = sub.add_parser("protocol", help="randomized protocol property runs")
    common(p)
    p.add_argument(
        "--lemma", default="both", choices=["superposition", "rank-recursion", "both"]
    )
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_protocol)

    p = sub.add_parser("fit", help="inverse-polynomial fits of a sweep CSV")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--n0", type=int, default=10)
    p.add_argument("--n0-range", default=None, help="e.g. 5..20 for sensitivity")
    p.set_defaults(fn=_cmd_fit)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _load_config(argv)
        args = build_parser().parse_args(argv)
        if args.command == "entropy" and not args.family:
            args.family = ["fdh", "g1", "h1"]
        return args.fn(args)
    except UsageError as exc:
        print(f"embezzle: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"embezzle: computation failed: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:  # console script
    sys.exit(main())
