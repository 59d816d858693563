"""Command-line front end.

    rabisqueeze <experiment> [--config FILE] [--set KEY=VALUE ...]
                [--out FILE] [--format csv|json] [--plot [FILE]]

Experiments: spectrum, ground-squeezing, protocol, noisy-protocol,
jitter-ensemble.  Without --out the dataset goes to stdout.  --plot
renders a PNG next to the data file (or to an explicit path).  Exit
codes: 0 success, 2 config problem, 3 numerical failure.

Output files carry a metadata block with every parameter, the seed, and
the code version; reruns of the same command are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from numpy.linalg import LinAlgError

from . import plots
from .experiments import (
    EXPERIMENTS,
    ConfigError,
    Dataset,
    build_config,
    run_experiment,
    with_output,
)
from .hilbert import TruncationRiskError
from .linalg import NonHermitianError, NonSquareError
from .model import HarmonicityError
from .openquantum import IntegrationFailureError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_PLOT_AUTO = "<auto>"

_NUMERICAL_ERRORS = (
    TruncationRiskError,
    IntegrationFailureError,
    HarmonicityError,
    NonHermitianError,
    NonSquareError,
    LinAlgError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabisqueeze",
        description="Field-squeezing experiments for a coupled qubit-oscillator model.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", metavar="FILE",
                       help="flat key = value config file")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       help="override one config key (repeatable; last wins)")
        p.add_argument("--out", metavar="FILE",
                       help="output data file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="output format (default: csv)")
        p.add_argument("--plot", metavar="FILE", nargs="?", const=_PLOT_AUTO,
                       help="also render a PNG (default path: --out with .png)")
    return parser


def _format_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def format_csv(ds: Dataset) -> str:
    lines = [f"# {key} = {value}" for key, value in ds.metadata.items()]
    lines.append(",".join(ds.columns))
    for row in ds.rows:
        lines.append(",".join(_format_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _json_cell(value: object):
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return None
        return float(format(value, ".12g"))
    return value


def format_json(ds: Dataset) -> str:
    payload = {
        "metadata": ds.metadata,
        "columns": ds.columns,
        "rows": [[_json_cell(cell) for cell in row] for row in ds.rows],
    }
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _resolve_plot_path(plot_arg: str | None, out: str | None) -> Path | None:
    if plot_arg is None:
        return None
    if plot_arg != _PLOT_AUTO:
        return Path(plot_arg)
    if out is None:
        raise ConfigError("--plot without a path needs --out to derive one")
    return Path(out).with_suffix(".png")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config_text = None
        source = "<defaults>"
        if args.config:
            try:
                config_text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config!r}: {exc}")
            source = args.config
        cfg = build_config(args.experiment, config_text, args.set, source)
        cfg = with_output(cfg, args.out, args.format)
        plot_path = _resolve_plot_path(args.plot, args.out)

        ds = run_experiment(cfg)
        payload = format_csv(ds) if cfg.out_format == "csv" else format_json(ds)
        if cfg.out_path is None:
            sys.stdout.write(payload)
        else:
            out = Path(cfg.out_path)
            if out.parent != Path(""):
                out.parent.mkdir(parents=True, exist_ok=True)
            out.write_bytes(payload.encode("utf-8"))
            print(f"{cfg.experiment}: {len(ds.rows)} rows -> {out}",
                  file=sys.stderr)
        if plot_path is not None:
            plots.render(ds, str(plot_path))
            print(f"{cfg.experiment}: figure -> {plot_path}", file=sys.stderr)
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
