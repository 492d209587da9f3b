"""Command-line interface.

Every subcommand takes ``--config`` (the pipeline YAML) plus optional
``--seed`` and ``--out`` overrides, and executes one stage against the
configured output directory; ``run`` executes every enabled stage. Exit
codes: 0 success, 1 validation problem, 2 stage failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import pipeline as pl
from .errors import LittrendError, ValidationError

_STAGE_COMMANDS = {
    "ingest": lambda state: pl.stage_corpus(state),
    "select-k": lambda state: pl.stage_select_k(state),
    "fit-topics": lambda state: pl.stage_fit_topics(state),
    "trends": lambda state: pl.stage_trends(state),
    "unitroot": lambda state: pl.stage_unitroot(state),
    "regress": lambda state: pl.stage_citations(state),
    "cointegration": lambda state: pl.stage_multivar(state, only={"lag_selection", "cointegration"}),
    "var": lambda state: pl.stage_multivar(state, only={"var"}),
    "vecm": lambda state: pl.stage_multivar(state, only={"vecm"}),
    "granger": lambda state: pl.stage_multivar(state, only={"granger"}),
    "irf": lambda state: pl.stage_multivar(state, only={"irf", "vecm"}),
    "fevd": lambda state: pl.stage_multivar(state, only={"fevd"}),
    "embed": lambda state: pl.stage_embeddings(state),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="littrend",
        description="Topic-trend analytics for bibliographic corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = list(_STAGE_COMMANDS) + ["report", "run"]
    for name in commands:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="pipeline config (YAML)")
        cmd.add_argument("--seed", type=int, default=None, help="override the global seed")
        cmd.add_argument("--out", default=None, help="override the output directory")
        if name == "report":
            cmd.add_argument("--format", choices=("tables", "plotdata"), default="tables")
            cmd.add_argument("--sections", nargs="*", default=None)
    return parser


def _load_config(args) -> pl.PipelineConfig:
    config = pl.PipelineConfig.from_yaml(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = Path(args.out)
    if overrides:
        config = dataclasses.replace(config, **overrides)
        config.validate()
    return config


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "run":
            result = pl.run(config)
            print(f"manifest: {result.manifest_path}")
            for stage, seconds in result.timings.items():
                print(f"  {stage}: {seconds:.2f}s")
        elif args.command == "report":
            written = pl.emit_report(config.out_dir, fmt=args.format, sections=args.sections)
            for path in written:
                print(path)
        else:
            state = pl.RunState(config)
            _STAGE_COMMANDS[args.command](state)
            for path in state.artifacts:
                print(path)
            if state.warnings:
                print(json.dumps({"warnings": state.warnings}, indent=2), file=sys.stderr)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except pl.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LittrendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
