"""Command-line front end.

Subcommands::

    matprod analytic --field real --d 2 --ensemble ginibre
    matprod run {lyapunov,stability,fluctuations,realprob,verify} --config FILE
                [--threads N] [--out PATH] [--format {jsonl,csv}] [--emit-plotdata]

Exit codes: 0 success, 2 config error, 3 numeric failure (including failed
verification and I/O errors). The default thread count can be set with the
MATPROD_THREADS environment variable; --threads overrides everything.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .configtext import ConfigError, config_to_text, parse_config
from .ensembles import EnsembleSpec, parse_ensemble
from .experiments import (
    EqualityResult,
    ExperimentConfig,
    FluctResult,
    FactorizationReport,
    MinorIdentityReport,
    RealProbResult,
    run_equality,
    run_fluctuations,
    run_factorization_checks,
    run_minor_identity,
    run_real_probability,
)
from .exponents import (
    SpreadOverflowError,
    analytic_spectrum,
    lyapunov_qr_stream,
    single_step_estimate,
    supports_analytic_spectrum,
)
from .linalg import NumericError
from .recordio import ResultRecord, RunManifest, Stat, manifest_timestamp, write_records

__all__ = ["main"]

RUN_EXPERIMENTS = ("lyapunov", "stability", "fluctuations", "realprob", "verify")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matprod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"matprod {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analytic", help="print the closed-form exponent spectrum")
    p_an.add_argument("--field", required=True, choices=("real", "complex"))
    p_an.add_argument("--d", required=True, type=int)
    p_an.add_argument("--ensemble", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("experiment", choices=RUN_EXPERIMENTS)
    p_run.add_argument("--config", required=True, help="key=value config file")
    p_run.add_argument("--threads", type=int, default=None)
    p_run.add_argument("--out", default=None, help="override the config's output path")
    p_run.add_argument("--format", default=None, choices=("jsonl", "csv"))
    p_run.add_argument(
        "--emit-plotdata",
        action="store_true",
        help="also write two-column curve files next to the output",
    )
    return parser


def _fmt10(x: float) -> str:
    return format(float(x), ".10g")


def cmd_analytic(field: str, d: int, ensemble: str, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        spec = EnsembleSpec(field, d, parse_ensemble(ensemble))
        spectrum = analytic_spectrum(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"# analytic spectrum for {spec.tag()}", file=out)
    print(f"{'i':>3}  {'lambda':>18}  {'variance':>18}", file=out)
    for i in range(d):
        print(
            f"{i + 1:>3}  {_fmt10(spectrum.lyapunov[i]):>18}  {_fmt10(spectrum.variance[i]):>18}",
            file=out,
        )
    return EXIT_OK


def _stat_vec(prefix: str, values, se=None, count=None) -> dict[str, Stat]:
    out = {}
    for i, v in enumerate(np.atleast_1d(values), start=1):
        out[f"{prefix}_{i}"] = Stat(
            float(v),
            None if se is None else float(np.atleast_1d(se)[i - 1]),
            count,
        )
    return out


def _records_lyapunov(config: ExperimentConfig) -> list[ResultRecord]:
    spec = config.spec
    common = dict(d=spec.d, field=spec.field, ensemble=spec.ensemble_text)
    ref = analytic_spectrum(spec) if supports_analytic_spectrum(spec) else None

    est = single_step_estimate(spec, config.mc_samples, config.stream().derive(6, 0, 0))
    stats = _stat_vec("lambda", est.mean, est.se, est.count)
    if ref is not None:
        stats.update(_stat_vec("ref_lambda", ref.lyapunov))
    rec1 = ResultRecord(
        experiment="lyapunov:single-step",
        n=1,
        replications=config.mc_samples,
        seq=0,
        stats=stats,
        **common,
    )

    stream_res = lyapunov_qr_stream(spec, config.mc_samples, config.stream().derive(6, 1, 0))
    stats = _stat_vec("lambda", stream_res.mean, stream_res.se, config.mc_samples)
    if ref is not None:
        stats.update(_stat_vec("ref_lambda", ref.lyapunov))
    stats["skipped"] = Stat(float(stream_res.skipped))
    rec2 = ResultRecord(
        experiment="lyapunov:qr-stream",
        n=config.mc_samples,
        replications=1,
        seq=0,
        stats=stats,
        **common,
    )
    return [rec1, rec2]


def _records_stability(result: EqualityResult) -> list[ResultRecord]:
    spec = result.spec
    common = dict(d=spec.d, field=spec.field, ensemble=spec.ensemble_text)
    records = []
    for pn in result.per_n:
        stats: dict[str, Stat] = {}
        stats.update(_stat_vec("mean_singular", pn.mean_singular, pn.se_singular, pn.count))
        stats.update(_stat_vec("mean_stability", pn.mean_stability, pn.se_stability, pn.count))
        stats.update(
            _stat_vec("gap_singular_stability", pn.gap_singular_stability.mean, pn.gap_singular_stability.se)
        )
        stats.update(_stat_vec("gap_singular_ref", pn.gap_singular_ref.mean, pn.gap_singular_ref.se))
        stats.update(_stat_vec("gap_stability_ref", pn.gap_stability_ref.mean, pn.gap_stability_ref.se))
        stats["maxgap"] = Stat(pn.maxgap_mean, pn.maxgap_se, pn.count)
        stats["maxgap_worst"] = Stat(pn.maxgap_max)
        stats.update(_stat_vec("ref_lambda", result.reference, result.reference_se))
        stats["skipped"] = Stat(float(result.skipped))
        records.append(
            ResultRecord(
                experiment="stability",
                n=pn.n,
                replications=pn.count,
                seq=0,
                stats=stats,
                **common,
            )
        )
    return records


def _records_fluctuations(result: FluctResult) -> list[ResultRecord]:
    spec = result.spec
    stats: dict[str, Stat] = {}
    d = spec.d
    for i in range(d):
        for j in range(i, d):
            stats[f"cov_singular_{i + 1}_{j + 1}"] = Stat(
                float(result.cov_singular[i, j]), float(result.cov_singular_se[i, j]), result.count
            )
            stats[f"cov_stability_{i + 1}_{j + 1}"] = Stat(
                float(result.cov_stability[i, j]), float(result.cov_stability_se[i, j]), result.count
            )
            stats[f"cov_diff_se_{i + 1}_{j + 1}"] = Stat(float(result.cov_diff_se[i, j]))
            stats[f"ref_cov_{i + 1}_{j + 1}"] = Stat(float(result.reference_cov[i, j]))
    stats["skipped"] = Stat(float(result.skipped))
    return [
        ResultRecord(
            experiment="fluctuations",
            d=spec.d,
            field=spec.field,
            ensemble=spec.ensemble_text,
            n=result.n,
            replications=result.count,
            seq=0,
            stats=stats,
        )
    ]


def _records_realprob(result: RealProbResult) -> list[ResultRecord]:
    spec = result.spec
    records = []
    for pn in result.per_n:
        se = (pn.p_hat * (1 - pn.p_hat) / pn.trials) ** 0.5 if pn.trials else 0.0
        stats = {
            "p_hat": Stat(pn.p_hat, se, pn.trials),
            "all_real": Stat(float(pn.all_real)),
            "trials": Stat(float(pn.trials)),
            "wilson_low": Stat(pn.wilson_low),
            "wilson_high": Stat(pn.wilson_high),
            "excluded": Stat(float(pn.excluded)),
        }
        records.append(
            ResultRecord(
                experiment="realprob",
                d=spec.d,
                field=spec.field,
                ensemble=spec.ensemble_text,
                n=pn.n,
                replications=result.replications,
                seq=0,
                stats=stats,
            )
        )
    return records


def _records_verify(minor: MinorIdentityReport, factor_report: FactorizationReport, config: ExperimentConfig) -> list[ResultRecord]:
    spec = config.spec
    records = [
        ResultRecord(
            experiment="verify:minor-identity",
            d=spec.d,
            field=spec.field,
            ensemble=spec.ensemble_text,
            n=spec.d,
            replications=minor.trials,
            seq=0,
            stats={
                "max_coefficient_residual": Stat(minor.max_coefficient_residual),
                "max_factorization_residual": Stat(minor.max_factorization_residual),
                "max_partial_product_excess": Stat(minor.max_partial_product_excess),
                "tol": Stat(minor.tol),
                "passed": Stat(float(minor.passed)),
            },
        )
    ]
    for row in factor_report.rows:
        records.append(
            ResultRecord(
                experiment=f"verify:{row.check}:field={row.field}:d={row.d}",
                d=row.d,
                field=row.field,
                ensemble=spec.ensemble_text,
                n=row.index,
                replications=row.samples,
                seq=0,
                stats={
                    "estimate": Stat(row.estimate, row.se, row.samples),
                    "reference": Stat(row.reference),
                    "z": Stat(row.z),
                    "passed": Stat(float(row.passed)),
                },
            )
        )
    return records


def _print_records(records: Sequence[ResultRecord], out=None) -> None:
    out = out if out is not None else sys.stdout
    print(f"{'experiment':<40} {'n':>8} {'stat':<28} {'value':>22} {'se':>12}", file=out)
    for rec in records:
        for name, stat in rec.stats.items():
            se = "" if stat.se is None else format(stat.se, ".3g")
            print(
                f"{rec.experiment:<40} {rec.n:>8} {name:<28} {format(stat.value, '.10g'):>22} {se:>12}",
                file=out,
            )


def _emit_plotdata(experiment: str, records: Sequence[ResultRecord], out_path: str) -> list[str]:
    """Two-column (n, value) curve files for the per-n experiments."""
    curves = {
        "stability": ("maxgap", ".gapcurve.txt"),
        "realprob": ("p_hat", ".phat.txt"),
    }
    if experiment not in curves:
        return []
    stat_name, suffix = curves[experiment]
    path = out_path + suffix
    rows = [(rec.n, rec.stats[stat_name].value) for rec in records if stat_name in rec.stats]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for n, value in sorted(rows):
            fh.write(f"{n} {format(value, '.17g')}\n")
    return [path]


def cmd_run(experiment: str, config: ExperimentConfig, emit_plotdata: bool = False) -> int:
    if experiment == "lyapunov":
        records = _records_lyapunov(config)
        failed = False
    elif experiment == "stability":
        records = _records_stability(run_equality(config))
        failed = False
    elif experiment == "fluctuations":
        records = _records_fluctuations(run_fluctuations(config))
        failed = False
    elif experiment == "realprob":
        records = _records_realprob(run_real_probability(config))
        failed = False
    elif experiment == "verify":
        minor = run_minor_identity(config)
        factor_report = run_factorization_checks(config)
        records = _records_verify(minor, factor_report, config)
        failed = not (minor.passed and factor_report.passed)
    else:
        raise ValueError(f"unknown experiment {experiment!r}")

    records = [replace(rec, seq=i) for i, rec in enumerate(records, start=1)]

    if config.out is not None:
        manifest = RunManifest(
            tool=f"matprod {__version__}",
            seed=config.seed,
            config_text=config_to_text(config),
            started_utc=manifest_timestamp(),
        )
        write_records(records, config.format, config.out, manifest)
        print(f"wrote {len(records)} record(s) to {config.out}", file=sys.stderr)
        if emit_plotdata:
            for path in _emit_plotdata(experiment, records, config.out):
                print(f"wrote plot data to {path}", file=sys.stderr)
    elif emit_plotdata:
        raise ConfigError("--emit-plotdata needs an output path (out=... or --out)")

    _print_records(records)
    if failed:
        print("verification FAILED: at least one check outside tolerance", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "analytic":
        return cmd_analytic(args.field, args.d, args.ensemble)

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    env_threads = os.environ.get("MATPROD_THREADS")
    try:
        default_threads = int(env_threads) if env_threads else None
    except ValueError:
        print(f"error: MATPROD_THREADS must be an integer, got {env_threads!r}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        config = parse_config(text, default_threads=default_threads)
        overrides = {}
        if args.threads is not None:
            overrides["threads"] = args.threads
        if args.out is not None:
            overrides["out"] = args.out
        if args.format is not None:
            overrides["format"] = args.format
        if overrides:
            config = replace(config, **overrides)
        return cmd_run(args.experiment, config, emit_plotdata=args.emit_plotdata)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, SpreadOverflowError, OSError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
