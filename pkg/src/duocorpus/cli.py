"""Command-line entry point.

Verbs mirror the pipeline stages (ingest, filter, annotate, sample,
assemble) plus run (all stages), report, analyze, and synth (write the
bundled synthetic corpus). Exit codes: 0 success, 2 configuration or
dependency problem, 3 infeasible corpus, 4 annotation budget exhausted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .ingest import InputError
from .llm import BudgetExhaustedError
from .pipeline import STAGES, Pipeline, PipelineError
from .sampler import InfeasibleCorpusError
from .synth import generate_corpus

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config YAML")
    parser.add_argument("--seed", type=int, help="override curation.seed")
    parser.add_argument("--llm", help="override llm.mode (live, mock, mock:<fixture>)")
    parser.add_argument("--out", help="override out_dir")
    parser.add_argument(
        "--force", action="store_true", help="re-run stages even when inputs are unchanged"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duocorpus",
        description="Curate small bilingual reasoning datasets and analyze reflection patterns.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every stage in order")
    _add_config_options(run)
    run.add_argument("--stages", help="comma-separated subset of stages to run")

    for stage in STAGES:
        stage_parser = sub.add_parser(stage, help=f"run only the {stage} stage")
        _add_config_options(stage_parser)

    report = sub.add_parser("report", help="print manifest and distribution summaries")
    report.add_argument("--config", required=True, help="pipeline config YAML")
    report.add_argument("--out", help="override out_dir")

    analyze = sub.add_parser("analyze", help="score reasoning traces for reflection patterns")
    analyze.add_argument("--config", required=True, help="pipeline config YAML")
    analyze.add_argument("--out", help="override out_dir")
    analyze.add_argument("--predictions", required=True, help="predictions JSONL")
    analyze.add_argument("--keywords", help="comma-separated keyword override")

    synth = sub.add_parser("synth", help="write the bundled synthetic corpus and its config")
    synth.add_argument("--out", required=True, help="directory to create the corpus in")
    synth.add_argument("--seed", type=int, default=0)
    return parser


def _pipeline_from(args: argparse.Namespace) -> Pipeline:
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config.curation.seed = args.seed
    if getattr(args, "llm", None):
        config.llm.mode = args.llm
    if getattr(args, "out", None):
        config.out_dir = str(Path(args.out))
    return Pipeline(config)


def _cmd_stages(args: argparse.Namespace) -> int:
    pipeline = _pipeline_from(args)
    if args.command == "run":
        stages = args.stages.split(",") if getattr(args, "stages", None) else None
        stages = [s.strip() for s in stages] if stages else None
    else:
        stages = [args.command]
    states = pipeline.run(stages, force=args.force)
    for name, state in states.items():
        print(f"{name}: output {state.output_checksum[:12]} ({state.finished_at})")
    print(f"artifacts in {pipeline.out_dir}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    print(_pipeline_from(args).report())
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    pipeline = _pipeline_from(args)
    keywords = None
    if args.keywords:
        keywords = [k.strip() for k in args.keywords.split(",") if k.strip()]
    report = pipeline.analyze(args.predictions, keywords)
    print(
        f"analyzed {report.n_traces} traces, {report.total_reflections} reflection hits; "
        f"reports in {pipeline.out_dir}"
    )
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = generate_corpus(args.out, seed=args.seed)
    print(
        f"wrote {spec.n_lines} lines across {len(spec.source_files)} source files "
        f"to {spec.directory} (config: {spec.config_path})"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "synth":
            return _cmd_synth(args)
        return _cmd_stages(args)
    except BudgetExhaustedError as exc:
        logger.error("annotation budget exhausted: %s", exc)
        return EXIT_BUDGET
    except InfeasibleCorpusError as exc:
        logger.error("infeasible corpus: %s", exc)
        return EXIT_INFEASIBLE
    except (ConfigError, InputError, PipelineError, FileNotFoundError, ImportError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
