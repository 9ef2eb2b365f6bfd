"""Command-line pipeline runner.

Subcommands compose: `featurize` builds the feature matrices, `embed` and
`cluster` consume the previous stage's artifacts, `simulate` generates the
synthetic dataset, `compare` runs the cell-level vs neighborhood scorecard,
and `serve` exposes an artifact directory over HTTP.

Configuration comes from a YAML file (--config, or the MICROENV_CONFIG
environment variable), overridable per-run with repeated
`--set section.key=value` flags.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ENV_CONFIG, PipelineConfig, apply_overrides
from .errors import MicroenvError
from .sim import SimulationParams, run_comparison, simulate, with_radius


def _load_config(args) -> PipelineConfig:
    path = args.config or os.environ.get(ENV_CONFIG)
    config = PipelineConfig.load(path) if path else PipelineConfig()
    if args.set:
        config = apply_overrides(config, args.set)
    if getattr(args, "out", None):
        config = replace(config, output_dir=args.out)
    return config


def _add_common(parser):
    parser.add_argument("--config", help="YAML config file (default: $MICROENV_CONFIG)")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config value (repeatable)",
    )
    parser.add_argument("--out", help="artifact directory (overrides output_dir)")


def cmd_featurize(args) -> int:
    from .pipeline import stage_featurize

    config = _load_config(args)
    shapes = stage_featurize(config)
    for name, shape in shapes.items():
        print(f"{name}: {shape}")
    return 0


def cmd_embed(args) -> int:
    from .pipeline import stage_embed

    shapes = stage_embed(_load_config(args))
    print(f"embedding: {shapes['embedding']}")
    return 0


def cmd_cluster(args) -> int:
    from .pipeline import stage_cluster

    config = _load_config(args)
    if args.k is not None:
        config = replace(config, cluster=replace(config.cluster, k=args.k))
    shapes = stage_cluster(config)
    print(f"clusters: k={shapes['k']}")
    return 0


def cmd_run(args) -> int:
    from .pipeline import run_pipeline

    out = run_pipeline(_load_config(args))
    print(f"artifacts written to {out}")
    return 0


def _sim_params(args) -> SimulationParams:
    params = SimulationParams(seed=args.seed)
    if args.radius is not None:
        params = with_radius(params, args.radius)
    return params


def cmd_simulate(args) -> int:
    from .pipeline import stage_simulate

    config = _load_config(args)
    shapes = stage_simulate(config, _sim_params(args))
    for name, shape in shapes.items():
        print(f"{name}: {shape}")
    return 0


def cmd_compare(args) -> int:
    config = _load_config(args)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for seed in args.seeds:
        params = _sim_params(argparse.Namespace(seed=seed, radius=args.radius))
        table = simulate(params)
        report = run_comparison(table, params, k=args.k, knn=args.knn)
        print(report.to_text())
        rows.extend(report.scorecard_rows())
    with (out / "comparison.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    print(f"scorecard written to {out / 'comparison.csv'}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    config = _load_config(args)
    artifacts = args.artifacts or config.output_dir
    serve(artifacts, config, host=args.host, port=args.port, static_dir=args.ui)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="microenv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="cells -> quantile/network blocks -> neighborhood matrix")
    _add_common(p)
    p.set_defaults(fn=cmd_featurize)

    p = sub.add_parser("embed", help="neighborhood matrix -> 2-D embedding")
    _add_common(p)
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("cluster", help="embedding -> k-means clusters + summaries")
    _add_common(p)
    p.add_argument("--k", type=int, help="cluster count (overrides config)")
    p.set_defaults(fn=cmd_cluster)

    p = sub.add_parser("run", help="featurize, embed, and cluster in one go")
    _add_common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("simulate", help="generate the synthetic tissue + quantile matrix")
    _add_common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=None, help="neighborhood radius")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("compare", help="cell-level vs neighborhood pipelines on simulations")
    _add_common(p)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--knn", type=int, default=10)
    p.add_argument("--radius", type=float, default=None)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("serve", help="HTTP API over an artifact directory")
    _add_common(p)
    p.add_argument("--artifacts", help="artifact directory (defaults to output_dir)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--ui", help="static frontend directory to serve at /")
    p.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MicroenvError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
