"""Run repeatable microbenchmarks for the per-method rolemark pipeline stages.

Purpose:
    Time tokenize, parse, resolve, detect, augment and transform over a
    deterministic synthetic corpus of template-generated Java methods.
Why:
    Provides before/after timing summaries that can be archived alongside
    parser or detector changes.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

REPO_ROOT = Path(__file__).resolve().parents[2]
DEFAULT_METHODS = 200
DEFAULT_OUTPUT = Path("build/perf/pipeline-benchmark.json")


def _import_rolemark(repo_root: Path) -> Any:
    """Import the rolemark package from the repository root.

    Purpose:
        Make the benchmark runnable from a plain checkout without installing.
    Inputs:
        repo_root: Repository root containing the `rolemark/` package.
    Outputs:
        The imported `rolemark` package module.
    Exceptions:
        Raises RuntimeError when the package cannot be imported.
    """
    repo_text = str(repo_root)
    if repo_text not in sys.path:
        sys.path.insert(0, repo_text)
    try:
        import rolemark
        import rolemark.synthetic
    except ImportError as exc:
        raise RuntimeError(f"Unable to import rolemark from: {repo_root}") from exc
    return rolemark


# A stage is a per-method callable plus the prepared inputs it runs over.
Stage = Tuple[Callable[[Any], Any], Sequence[Any]]


def _time_stage(stage: Stage, iterations: int, warmup: int) -> Dict[str, float]:
    """Time one stage method by method over full passes of its inputs.

    Warmup passes are discarded. Every call is sampled on its own, so the
    summary carries both the per-method latency spread and the pass total.
    Stage exceptions propagate and fail the run.
    """
    fn, inputs = stage
    for _ in range(max(0, warmup)):
        for item in inputs:
            fn(item)
    passes = max(1, iterations)
    samples_ns = np.empty((passes, len(inputs)), dtype=np.int64)
    for row in range(passes):
        for column, item in enumerate(inputs):
            start = time.perf_counter_ns()
            fn(item)
            samples_ns[row, column] = time.perf_counter_ns() - start
    per_method_us = samples_ns / 1_000.0
    pass_ms = samples_ns.sum(axis=1) / 1_000_000.0
    total_s = float(pass_ms.sum()) / 1_000.0
    return {
        "pass_median_ms": float(np.median(pass_ms)),
        "pass_p95_ms": float(np.percentile(pass_ms, 95)),
        "method_median_us": float(np.median(per_method_us)) if inputs else 0.0,
        "method_p95_us": float(np.percentile(per_method_us, 95)) if inputs else 0.0,
        "method_max_us": float(per_method_us.max()) if inputs else 0.0,
        "methods_per_s": passes * len(inputs) / total_s if total_s > 0 else 0.0,
        "passes": float(passes),
    }


def _build_stages(rolemark: Any, sources: Sequence[str]) -> Mapping[str, Stage]:
    """One stage per pipeline step, each over inputs prepared ahead of time.

    Later stages run on trees and symbol tables built here, so their timings
    exclude the earlier stages.
    """
    trees = [rolemark.parse_method(source).unwrap() for source in sources]
    tables = [rolemark.resolve(tree) for tree in trees]
    reports = [rolemark.detect_roles(tree, table) for tree, table in zip(trees, tables)]
    ids = [f"bench/{index}" for index in range(len(sources))]

    return {
        "tokenize": (rolemark.tokenize, sources),
        "parse_method": (rolemark.parse_method, sources),
        "resolve": (rolemark.resolve, trees),
        "detect_roles": (lambda pair: rolemark.detect_roles(*pair), list(zip(trees, tables))),
        "augment": (
            lambda triple: rolemark.augment(*triple),
            list(zip(sources, reports, tables)),
        ),
        "transform_rename": (
            lambda triple: rolemark.transform_rename(*triple, 7),
            list(zip(sources, tables, ids)),
        ),
    }


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for pipeline microbenchmark execution.

    Purpose:
        Time every stage and persist a JSON summary.
    Inputs:
        argv: Optional CLI argument list override.
    Outputs:
        Process exit code.
    Side Effects:
        Writes the benchmark JSON artifact.
    Exceptions:
        Returns 1 when the package cannot be imported.
    """
    parser = argparse.ArgumentParser(description="Run rolemark pipeline microbenchmarks.")
    parser.add_argument(
        "--iterations", type=int, default=20, help="Measured passes over the corpus per stage."
    )
    parser.add_argument(
        "--warmup", type=int, default=3, help="Discarded warmup passes per stage."
    )
    parser.add_argument(
        "--methods",
        type=int,
        default=DEFAULT_METHODS,
        help="Synthetic methods in the benchmark corpus.",
    )
    parser.add_argument(
        "--output",
        type=Path,
        default=DEFAULT_OUTPUT,
        help="Output JSON path.",
    )
    args = parser.parse_args(argv)

    try:
        rolemark = _import_rolemark(REPO_ROOT)
    except RuntimeError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    count = max(1, args.methods)
    methods = rolemark.synthetic.generate_methods(count, augmented=count // 3, seed=0)
    stages = _build_stages(rolemark, [method.source for method in methods])
    passes = max(1, args.iterations)
    warmup = max(0, args.warmup)

    summary: Dict[str, Any] = {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "python": sys.version,
        "platform": platform.platform(),
        "passes": passes,
        "warmup": warmup,
        "methods": count,
        "stages": {name: _time_stage(stage, passes, warmup) for name, stage in stages.items()},
    }

    output_path = Path(args.output)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(json.dumps(summary, indent=2), encoding="utf-8")

    print(f"Pipeline benchmark complete: {output_path}")
    for name, row in summary["stages"].items():
        print(
            f"  {name}: {row['method_median_us']:.1f} us/method "
            f"(p95 {row['method_p95_us']:.1f}), pass {row['pass_median_ms']:.2f} ms"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
