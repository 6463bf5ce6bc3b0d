"""Command-line front end: ``combrange {index,bound,sweep,validate}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import fisher, pipeline, validation
from .pipeline import Axis, ConfigError, SweepSpec

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VALIDATION = 3


def _parse_set(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _explicit_values(args) -> dict[str, str]:
    values = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        values.update(pipeline.parse_config_text(text))
    values.update(_parse_set(args.set))
    return values


def load_config(args) -> pipeline.RunConfig:
    return pipeline.make_config(_explicit_values(args))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render(records, output, columns=None) -> str:
    if output == "json":
        return pipeline.to_json(records, columns)
    return pipeline.to_csv(records, columns)


def cmd_index(args) -> int:
    report = pipeline.index_report(load_config(args))
    _emit(_render([report], args.output, tuple(report)), args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    config = load_config(args)
    try:
        record = pipeline.evaluate(config)
    except (fisher.FisherError, ValueError) as exc:
        print(f"numerical rejection: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(_render([record], args.output), args.out)
    return EXIT_OK


def _sweep_spec(args) -> SweepSpec:
    if args.axis:
        axes = tuple(Axis.parse(a) for a in args.axis)
        series = None
        if args.series:
            name, _, values = args.series.partition("=")
            try:
                series = (name, tuple(float(v) for v in values.split(",")))
            except ValueError:
                raise ConfigError(f"--series expects name=v1,v2,..., got {args.series!r}") from None
        fixed = {}
        if args.kind != "custom":
            fixed = dict(pipeline.default_sweep(args.kind).fixed)
        return SweepSpec(args.kind, axes, fixed, series)
    return pipeline.default_sweep(args.kind)


def cmd_sweep(args) -> int:
    explicit = _explicit_values(args)
    base = pipeline.make_config(explicit)
    spec = _sweep_spec(args)
    # values given in the config file or with --set win over the sweep's fixed defaults
    spec = SweepSpec(spec.kind, spec.axes, {k: v for k, v in spec.fixed.items() if k not in explicit}, spec.series)
    records = pipeline.sweep(spec, base, jobs=args.jobs)
    _emit(_render(records, args.output), args.out)
    failed = sum(1 for r in records if r["error"])
    if failed:
        print(f"{failed} of {len(records)} grid points rejected (see error column)", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    results = validation.run_checks()
    _emit(validation.format_report(results) + "\n", args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    common.add_argument("--output", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write to this path instead of stdout")

    parser = argparse.ArgumentParser(
        prog="combrange",
        description="Quantum Cramér–Rao bounds for frequency-comb ranging through air.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("index", parents=[common], help="refractive index and Jacobian constants").set_defaults(func=cmd_index)
    sub.add_parser("bound", parents=[common], help="bounds for one configuration").set_defaults(func=cmd_bound)

    sw = sub.add_parser("sweep", parents=[common], help="evaluate a parameter grid")
    sw.add_argument("--kind", choices=pipeline.SWEEP_KINDS, required=True)
    sw.add_argument("--axis", action="append", default=[], metavar="NAME:START:STOP:COUNT[:log]")
    sw.add_argument("--series", metavar="NAME=V1,V2,...", help="repeat the grid for each value")
    sw.add_argument("--jobs", type=int, default=1, help="worker processes")
    sw.set_defaults(func=cmd_sweep)

    va = sub.add_parser("validate", help="run the oracle self-check suite")
    va.add_argument("--out", help="write the report to this path")
    va.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
