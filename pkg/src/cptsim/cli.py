"""Command-line entry point: ``cpt <subcommand>``.

Exit status is 0 on success, 2 when some sweep rows failed, and 1 on
configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from . import kernels
from .errors import ConfigError, CPTError
from .materials import default_registry, registry_from_file
from .pipeline import (
    FIGURES,
    SweepConfig,
    emit_csv,
    format_csv,
    load_config,
    parse_distances,
    run,
    write_outputs,
    analytic_row,
)

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


def _registry(args):
    if getattr(args, "materials", None):
        return registry_from_file(args.materials)
    return default_registry()


def _with(config: SweepConfig, args, stages=None) -> SweepConfig:
    changes = {}
    if stages is not None:
        changes["stages"] = frozenset(stages)
    if getattr(args, "workers", None):
        changes["workers"] = args.workers
    if getattr(args, "refinement", None):
        changes["geometry"] = dataclasses.replace(config.geometry, refinement=args.refinement)
    return dataclasses.replace(config, **changes)


def _emit(result, config, out, stdout) -> int:
    if out:
        for path in write_outputs(result, config, out):
            logging.getLogger(__name__).info("wrote %s", path)
    else:
        stdout.write(format_csv(result.rows))
    return EXIT_PARTIAL if result.failed else EXIT_OK


def cmd_materials(args, stdout):
    reg = _registry(args)
    for m in reg:
        stdout.write(f"{m.name}\t{m.eps_r:.10g}\n")
    return EXIT_OK


def cmd_analytic(args, stdout):
    reg = _registry(args)
    mat = reg.lookup(args.medium)
    rows = [analytic_row(mat, args.plate_side, d) for d in parse_distances(args.distances)]
    if args.out:
        emit_csv(rows, args.out)
    else:
        stdout.write(format_csv(rows))
    return EXIT_OK


def cmd_extract(args, stdout):
    config = load_config(args.config, _registry(args))
    config = _with(config, args, stages={"analytic", "field"})
    config = dataclasses.replace(config, figures=tuple(f for f in config.figures if f != "fig9"))
    result = run(config, _registry(args))
    return _emit(result, config, args.out, stdout)


def cmd_circuit(args, stdout):
    config = load_config(args.config, _registry(args))
    config = _with(config, args, stages=set(config.stages) | {"circuit"})
    result = run(config, _registry(args))
    return _emit(result, config, args.out, stdout)


def cmd_pipeline(args, stdout):
    reg = _registry(args)
    config = load_config(args.config, reg)
    config = _with(config, args)
    if args.figures is not None:
        figs = tuple(f for f in args.figures.split(",") if f)
        bad = set(figs) - set(FIGURES)
        if bad:
            raise ConfigError(f"unknown figures: {sorted(bad)}")
        config = dataclasses.replace(config, figures=figs)
    if args.dump_matrices:
        config = dataclasses.replace(config, dump_matrices=True)
    out = args.out or config.output_dir
    if not out:
        raise ConfigError("pipeline needs --out or output.dir in the config")
    result = run(config, reg)
    code = _emit(result, config, out, stdout)
    stdout.write(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("materials", help="material registry")
    p.add_argument("action", choices=["list"])
    p.add_argument("--materials", help="JSON file with extra media")
    p.set_defaults(func=cmd_materials)

    p = sub.add_parser("analytic", help="closed-form capacitance sweep")
    p.add_argument("--medium", required=True)
    p.add_argument("--plate-side", type=float, default=0.30)
    p.add_argument("--distances", default="0.001:0.20:25:log",
                   help="start:stop:points[:log|linear] in metres")
    p.add_argument("--materials")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_analytic)

    for name, func, help_ in (
        ("extract", cmd_extract, "field-solver extraction over the configured sweep"),
        ("circuit", cmd_circuit, "resonant-circuit evaluation over the configured sweep"),
        ("pipeline", cmd_pipeline, "all stages, CSV, summary and figure data"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--out", help="output directory (default: CSV on stdout)")
        p.add_argument("--materials")
        p.add_argument("--workers", type=int)
        p.add_argument("--refinement", type=int)
        if name == "pipeline":
            p.add_argument("--figures", help="comma list of fig5,fig7,fig9")
            p.add_argument("--dump-matrices", action="store_true")
        p.set_defaults(func=func)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).debug("kernel backend: %s", kernels.BACKEND)
    try:
        return args.func(args, stdout)
    except (ConfigError, OSError, CPTError, ValueError) as exc:
        print(f"cpt: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
