"""Grade a handful of reasoning traces and tabulate their reflection keywords.

Shows the three answer formats (boxed, multiple choice, free text), the
three correctness classes, and how keyword hits inside think spans are
counted per surface variant.
"""

from __future__ import annotations

from duocorpus import TraceRecord, aggregate, analyze_trace
from duocorpus.reflection import Finish

TRACES = [
    TraceRecord(
        id="boxed-correct",
        raw_output=(
            "<think>\nThe sum is 40 + 2. Wait, let me verify that against the "
            "question. Yes, 42.\n</think>\nThe answer is \\boxed{42}."
        ),
        gold_label="42",
        task_kind="boxed_math",
        model="demo-model",
        benchmark="demo-bench",
    ),
    TraceRecord(
        id="boxed-wrong",
        raw_output=(
            "<think>\nHowever, the carry changes things. Actually, maybe not. "
            "Wait, it does.\n</think>\n\\boxed{41}"
        ),
        gold_label="42",
        task_kind="boxed_math",
        model="demo-model",
        benchmark="demo-bench",
    ),
    TraceRecord(
        id="choice-correct",
        raw_output="<think>\nOption B mentions the tides twice.\n</think>\nAnswer: B",
        gold_label="B",
        task_kind="multiple_choice",
        model="demo-model",
        benchmark="demo-bench",
    ),
    TraceRecord(
        id="ran-out-of-tokens",
        raw_output="<think>\nWait, wait. Let me think about the second clause",
        gold_label="7",
        task_kind="boxed_math",
        finish=Finish.LENGTH_TRUNCATED,
        model="demo-model",
        benchmark="demo-bench",
    ),
]


def main() -> None:
    for record in TRACES:
        analyze_trace(record)
        print(f"{record.id:18s} -> {record.correctness.value:24s} "
              f"answer={record.extracted_answer!r} reflections={record.reflection_counts}")

    report = aggregate(TRACES)
    print(f"\n{report.n_traces} traces, {report.total_reflections} keyword hits total")
    print(f"{'variant':16s} {'correct':>8s} {'incorrect':>10s} {'total':>6s}")
    for row in report.rows:
        print(f"{row.variant:16s} {row.correct:8d} {row.incorrect:10d} {row.total:6d}")

    print("\nmean reflections per trace by class:")
    for label, mean in sorted(report.class_means.items()):
        print(f"   {label}: {mean:.2f}")


if __name__ == "__main__":
    main()
