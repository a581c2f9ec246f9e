"""Build a bilingual dataset from the bundled synthetic corpus, offline.

Walks the full pipeline: corpus generation, the five stages, the manifest
report, and the skip-on-rerun behavior. Uses the mock LLM client throughout,
so it runs without network access in a few seconds.
"""

from __future__ import annotations

import argparse
import json
import tempfile
import time
from pathlib import Path

from duocorpus import Pipeline, load_config
from duocorpus.synth import generate_corpus


def show(title: str, payload: dict) -> None:
    print(f"\n== {title}")
    for key, value in payload.items():
        print(f"   {key}: {value}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", help="directory for corpus and artifacts")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="duocorpus-"))
    print(f"working in {workdir}")

    spec = generate_corpus(workdir / "corpus", seed=args.seed)
    print(f"\nwrote a synthetic corpus: {spec.n_lines} lines in {len(spec.source_files)} files")
    print(f"planted noise: {spec.n_malformed} malformed, {spec.n_duplicates} duplicates, "
          f"{spec.n_contaminated} benchmark hits, {spec.n_overlength} over-length, "
          f"{spec.n_impure} mixed-language")

    config = load_config(spec.config_path)
    config.out_dir = str(workdir / "artifacts")
    pipeline = Pipeline(config)

    t0 = time.monotonic()
    pipeline.run()
    print(f"\npipeline finished in {time.monotonic() - t0:.1f}s")

    out = Path(config.out_dir)
    show("ingest", json.loads((out / "ingest_counters.json").read_text()))
    show("filter", json.loads((out / "filter_counts.json").read_text()))
    show("selection", json.loads((out / "selection.json").read_text()))

    print("\n== report")
    print(pipeline.report())

    with (out / "dataset_chat.jsonl").open() as fh:
        record = json.loads(next(fh))
    print("\n== first chat record (truncated)")
    print(f"   meta: {record['meta']}")
    assistant = record["messages"][-1]["content"]
    print(f"   assistant: {assistant[:160]!r}...")

    # a second run over unchanged inputs skips every stage
    t0 = time.monotonic()
    pipeline.run()
    print(f"\nre-run over unchanged inputs took {time.monotonic() - t0:.2f}s (all stages skipped)")


if __name__ == "__main__":
    main()
