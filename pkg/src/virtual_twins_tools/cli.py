"""Command-line interface for Virtual Twins Tools."""

import argparse
import logging
import os
import sys
from pathlib import Path
from dotenv import load_dotenv

from .constants import (
    DEFAULT_N_TEST,
    DEFAULT_OUTCOME_COLUMN,
    DEFAULT_SEED,
    DEFAULT_TREATMENT_COLUMN,
    MIN_LEAF,
)

# Load environment variables from .env file if it exists
# Skip loading if SKIP_DOTENV_LOAD is set (for testing)
if not os.environ.get('SKIP_DOTENV_LOAD'):
    load_dotenv()


def configure_logging(verbose: bool = False) -> None:
    """Configure the root logger from --verbose or VT_LOG_LEVEL."""
    if verbose:
        level = logging.DEBUG
    else:
        name = os.environ.get("VT_LOG_LEVEL", "WARNING").upper()
        level = getattr(logging, name, logging.WARNING)
        if not isinstance(level, int):
            level = logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def parse_calibration(value):
    """Parse "M,alpha" into (int, float)."""
    parts = [p.strip() for p in str(value).split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected M,alpha (e.g. 100,0.05), got {value!r}")
    try:
        m, alpha = int(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected M,alpha (e.g. 100,0.05), got {value!r}")
    if m < 1 or not 0 < alpha < 1:
        raise argparse.ArgumentTypeError(f"need M >= 1 and 0 < alpha < 1, got {value!r}")
    return m, alpha


def resolve_seed(seed):
    """Return --seed when given, else VT_SEED or the default seed."""
    if seed is not None:
        return seed
    from virtual_twins_tools.harness.config import env_defaults

    return env_defaults()["seed"]


def simulate_command(args):
    """Execute the simulate command."""
    from virtual_twins_tools.exceptions import ConfigError, SpecError, VirtualTwinsError
    from virtual_twins_tools.simulation import ScenarioConfig, generate, write_simulation

    try:
        seed = resolve_seed(args.seed)
        config = ScenarioConfig(
            linearity=args.linearity,
            structure=args.structure,
            teh=args.teh,
            n_train=args.n_train,
            n_test=args.n_test,
            seed=seed,
        )
        config.validate()
    except ConfigError as e:
        print(f"Error: Invalid configuration: {e}", file=sys.stderr)
        return 2
    except SpecError as e:
        print(f"Error: Invalid scenario: {e}", file=sys.stderr)
        return 2

    try:
        print(f"Simulating {config.label} (seed {config.seed})...")
        sim = generate(config)
        paths = write_simulation(sim, args.out)
        print(f"Train rows: {sim.train.n}, test rows: {sim.test.n}")
        print(f"Predictive covariates: {', '.join(sim.train.feature_names[j] for j in sorted(sim.predictive_set)) or 'none'}")
        for path in paths:
            print(f"File: {path}")
        return 0
    except VirtualTwinsError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except OSError as e:  # pragma: no cover
        print(f"Error: Failed to write simulation files: {e}", file=sys.stderr)
        return 1


def benchmark_command(args):
    """Execute the benchmark command."""
    from virtual_twins_tools.exceptions import ConfigError, VirtualTwinsError
    from virtual_twins_tools.harness.benchmark import run_benchmark
    from virtual_twins_tools.harness.config import config_from_dict, env_defaults, load_benchmark_config
    from virtual_twins_tools.harness.report import render_report
    from virtual_twins_tools.metrics import GroundTruthMode

    try:
        defaults = env_defaults()
        if args.config:
            config = load_benchmark_config(args.config, defaults=defaults)
        else:
            config = config_from_dict({}, defaults=defaults)
        if args.replicates is not None:
            config.replicates = args.replicates
        if args.workers is not None:
            config.workers = args.workers
        if args.seed is not None:
            config.seed = args.seed
        if args.out is not None:
            config.output_dir = args.out
        if args.ground_truth is not None:
            config.ground_truth_mode = GroundTruthMode(args.ground_truth)
        if args.no_trees:
            config.export_trees = False
        config.validate()
    except ConfigError as e:
        print(f"Error: Invalid configuration: {e}", file=sys.stderr)
        return 2

    try:
        n_cells = len(config.scenarios) * len(config.method_grid)
        print(f"Running {n_cells} cell(s) x {config.replicates} replicate(s) on {config.workers} worker(s)...")
        table = run_benchmark(config)
        paths = render_report(table, config.output_dir)
        for path in paths[:3]:
            print(f"File: {path}")
        if len(paths) > 3:
            print(f"Trees: {len(paths) - 3} file(s) in {Path(config.output_dir) / 'trees'}")
        if table.partial:
            print(f"Warning: {table.failure_count} replicate(s) failed; affected cells are marked partial", file=sys.stderr)
            return 1
        print("Benchmark complete")
        return 0
    except VirtualTwinsError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except OSError as e:  # pragma: no cover
        print(f"Error: Failed to write results: {e}", file=sys.stderr)
        return 1


def analyze_command(args):
    """Execute the analyze command."""
    from virtual_twins_tools.exceptions import ConfigError, DataError, SpecError, VirtualTwinsError
    from virtual_twins_tools.harness.analysis import analyze, render_analysis, write_analysis
    from virtual_twins_tools.learners.specs import regressor_spec_from_config
    from virtual_twins_tools.subgroup.models import StepTwoSpec, parse_step_two_kind
    from virtual_twins_tools.vt.engine import VtSpec

    try:
        step1 = regressor_spec_from_config(args.step1)
        step2 = StepTwoSpec(kind=parse_step_two_kind(args.step2), min_leaf=args.min_leaf)
        step2.validate()
        spec = VtSpec(step1=step1, step2=step2, seed=resolve_seed(args.seed))
    except ConfigError as e:
        print(f"Error: Invalid configuration: {e}", file=sys.stderr)
        return 2
    except SpecError as e:
        print(f"Error: Invalid method: {e}", file=sys.stderr)
        return 2

    try:
        print(f"Analysing {args.data} with {spec.label}...")
        report = analyze(
            args.data,
            spec,
            calibration=args.calibrate,
            treatment=args.treatment,
            outcome=args.outcome,
            workers=args.workers,
        )
        print(render_analysis(report))
        if args.out:
            for path in write_analysis(report, args.out):
                print(f"File: {path}")
        return 0
    except DataError as e:
        print(f"Error: Cannot read {args.data}: {e}", file=sys.stderr)
        return 1
    except SpecError as e:
        print(f"Error: Invalid method: {e}", file=sys.stderr)
        return 2
    except VirtualTwinsError as e:
        print(f"Error: Analysis failed: {e}", file=sys.stderr)
        return 1
    except OSError as e:  # pragma: no cover
        print(f"Error: {e}", file=sys.stderr)
        return 1


def export_tree_command(args):
    """Execute the export-tree command."""
    from virtual_twins_tools.exceptions import VirtualTwinsError
    from virtual_twins_tools.harness.export import export_tree, load_tree
    from virtual_twins_tools.utils.file_ops import write_file_safe

    try:
        model = load_tree(args.in_path)
        text = export_tree(model, args.format)
        if args.out:
            path = write_file_safe(args.out, text)
            print(f"File: {path}")
        else:
            sys.stdout.write(text)
        return 0
    except FileNotFoundError:
        print(f"Error: Tree file not found: {args.in_path}", file=sys.stderr)
        return 1
    except VirtualTwinsError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def main(argv=None):
    """Main CLI entry point."""
    parser = argparse.ArgumentParser(
        prog="virtual-twins",
        description="Virtual Twins subgroup identification: simulation, benchmarking and trial analysis",
    )
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Enable debug logging (default level from VT_LOG_LEVEL, else WARNING)",
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # simulate subcommand
    simulate_parser = subparsers.add_parser(
        "simulate",
        help="Generate one simulated trial and write train/test/truth CSVs",
    )
    simulate_parser.add_argument(
        "--linearity",
        choices=["linear", "nonlinear"],
        default="linear",
        help="Outcome model (default: linear)",
    )
    simulate_parser.add_argument(
        "--structure",
        choices=["regular", "correlated", "selection_bias"],
        default="regular",
        help="Covariate structure (default: regular)",
    )
    simulate_parser.add_argument(
        "--teh",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="Heterogeneous treatment effect (default: --teh)",
    )
    simulate_parser.add_argument("--n-train", type=int, default=600, help="Training rows (default: 600)")
    simulate_parser.add_argument(
        "--n-test", type=int, default=DEFAULT_N_TEST, help=f"Test rows (default: {DEFAULT_N_TEST})"
    )
    simulate_parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"Seed (default: VT_SEED or {DEFAULT_SEED})",
    )
    simulate_parser.add_argument(
        "--out",
        "-o",
        default="simulated",
        help="Output directory (default: simulated)",
    )
    simulate_parser.set_defaults(func=simulate_command)

    # benchmark subcommand
    benchmark_parser = subparsers.add_parser(
        "benchmark",
        help="Run a Monte-Carlo benchmark of method combinations over simulated scenarios",
    )
    benchmark_parser.add_argument("--config", "-c", default=None, help="JSON benchmark config file")
    benchmark_parser.add_argument(
        "--replicates", "-r", type=int, default=None, help="Replicates per cell (default: config, VT_REPLICATES or 100)"
    )
    benchmark_parser.add_argument(
        "--workers", "-w", type=int, default=None, help="Parallel workers (default: config, VT_WORKERS or 1)"
    )
    benchmark_parser.add_argument("--seed", type=int, default=None, help=f"Master seed (default: config, VT_SEED or {DEFAULT_SEED})")
    benchmark_parser.add_argument(
        "--out", "-o", default=None, help="Output directory (default: config, VT_OUTPUT_DIR or results)"
    )
    benchmark_parser.add_argument(
        "--ground-truth",
        choices=["realized", "noiseless"],
        default=None,
        help="Definition of the true optimal arm (default: realized)",
    )
    benchmark_parser.add_argument("--no-trees", action="store_true", help="Do not export replicate-0 trees")
    benchmark_parser.set_defaults(func=benchmark_command)

    # analyze subcommand
    analyze_parser = subparsers.add_parser(
        "analyze",
        help="Run Virtual Twins on a trial CSV and report the subgroups",
    )
    analyze_parser.add_argument("--data", "-d", required=True, help="Trial CSV file")
    analyze_parser.add_argument(
        "--step1", default="lasso", help="Step-1 learner: lasso, forest, mars or superlearner (default: lasso)"
    )
    analyze_parser.add_argument(
        "--step2", default="rtree", help="Step-2 model: none, linear, rtree or ctree (default: rtree)"
    )
    analyze_parser.add_argument(
        "--calibrate",
        type=parse_calibration,
        default=None,
        metavar="M,ALPHA",
        help="Calibrate the step-2 penalty with M permutations at level ALPHA (e.g. 100,0.05)",
    )
    analyze_parser.add_argument(
        "--treatment", default=DEFAULT_TREATMENT_COLUMN, help=f"Treatment column (default: {DEFAULT_TREATMENT_COLUMN})"
    )
    analyze_parser.add_argument(
        "--outcome", default=DEFAULT_OUTCOME_COLUMN, help=f"Outcome column (default: {DEFAULT_OUTCOME_COLUMN})"
    )
    analyze_parser.add_argument(
        "--min-leaf", type=int, default=MIN_LEAF, help=f"Minimum rows per tree leaf (default: {MIN_LEAF})"
    )
    analyze_parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"Seed (default: VT_SEED or {DEFAULT_SEED})",
    )
    analyze_parser.add_argument("--workers", "-w", type=int, default=1, help="Workers for calibration (default: 1)")
    analyze_parser.add_argument("--out", "-o", default=None, help="Write report.md and tree files to this directory")
    analyze_parser.set_defaults(func=analyze_command)

    # export-tree subcommand
    export_parser = subparsers.add_parser(
        "export-tree",
        help="Convert a tree JSON file to DOT (or re-emit it as JSON)",
    )
    export_parser.add_argument("--in", dest="in_path", required=True, help="Tree JSON file")
    export_parser.add_argument(
        "--format", "-f", choices=["json", "dot"], default="dot", help="Output format (default: dot)"
    )
    export_parser.add_argument("--out", "-o", default=None, help="Output file (default: stdout)")
    export_parser.set_defaults(func=export_tree_command)

    # Parse arguments
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    # Execute command
    if hasattr(args, "func"):
        return args.func(args)
    else:
        parser.print_help()
        return 0


if __name__ == "__main__":
    sys.exit(main())
