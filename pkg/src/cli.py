"""
Command-Line Interface
train / sweep / plot / selftest subcommands over the training loop, the
metrics processor, the chart writer and the oracle suites.
"""
import argparse
import logging
import subprocess
import sys
from pathlib import Path

from joblib import Parallel, delayed

import config
from src.data_processor import final_summary, write_aggregate
from src.exceptions import ConfigError

logger = logging.getLogger("hotgp")

ENTRY_POINT = config.BASE_DIR / "app.py"


def parse_seeds(text: str) -> list[int]:
    """'a..b' (inclusive) or a comma list."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(part) for part in text.split("..", 1))
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty seed range '{text}'")
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list '{text}'") from exc


def default_run_dir(cfg) -> Path:
    return config.RUN_ROOT / f"{cfg.env}_{cfg.strategy}_seed{cfg.seed}"


# ─── Subcommands ─────────────────────────────────────────────────────────────

def cmd_train(args) -> int:
    from src.run_config import load_run_config
    from src.trainer import run

    try:
        cfg = load_run_config(args.config, args.override, args.seed)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2
    run_dir = Path(args.out) if args.out else default_run_dir(cfg)
    logger.info("training %s/%s seed %d into %s", cfg.env, cfg.strategy, cfg.seed, run_dir)
    try:
        run(cfg, run_dir, resume=args.resume)
    except Exception as exc:
        print(f"error: run failed: {exc} (see {run_dir / config.ERROR_LOG_FILE})", file=sys.stderr)
        return 1
    print(run_dir / config.METRICS_FILE)
    return 0


def _train_command(args, seed: int, run_dir: Path) -> list[str]:
    command = [sys.executable, str(ENTRY_POINT), "train", "--seed", str(seed), "--out", str(run_dir)]
    if args.config:
        command += ["--config", str(args.config)]
    for pair in args.override or ():
        command += ["--override", pair]
    return command


def _launch(command: list[str]) -> int:
    return subprocess.run(command, check=False).returncode


def cmd_sweep(args) -> int:
    if args.config and not Path(args.config).is_file():
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run_dirs = {seed: out / f"seed_{seed}" for seed in args.seeds}
    codes = Parallel(n_jobs=max(1, args.parallel), backend="threading")(
        delayed(_launch)(_train_command(args, seed, run_dir)) for seed, run_dir in run_dirs.items()
    )

    completed, failures = [], []
    for (seed, run_dir), code in zip(run_dirs.items(), codes):
        if code == 0 and (run_dir / config.METRICS_FILE).is_file():
            completed.append(run_dir)
        else:
            failures.append(f"seed {seed}: exit code {code} ({run_dir})")
    if not completed:
        print("error: every seed failed", file=sys.stderr)
        for line in failures:
            print(f"  {line}", file=sys.stderr)
        return 1
    path = write_aggregate(completed, out, failures)
    summary = final_summary(completed)
    logger.info("aggregated %d of %d seeds: final return %.4f ± %.4f (stderr)",
                len(completed), len(run_dirs), summary["mean"], summary["stderr"])
    for line in failures:
        logger.warning("sweep failure: %s", line)
    print(path)
    return 0


def cmd_plot(args) -> int:
    from src.visualization.charts import learning_curves

    try:
        path = learning_curves(args.runs, args.out, labels=args.labels, title=args.title or "")
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


def cmd_selftest(args) -> int:
    from src.selftest import run_suites

    try:
        results = run_suites(args.suite)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status}  {result.name}  ({result.seconds:.1f}s)")
        for failure in result.failures:
            print(f"      {failure}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failing suites: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


# ─── Parser ──────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hotgp", description="HOT-GP model-based RL laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run one seed")
    train.add_argument("--config", type=Path, default=None)
    train.add_argument("--seed", type=int, default=None)
    train.add_argument("--out", type=Path, default=None)
    train.add_argument("--override", action="append", default=[], metavar="KEY=VAL")
    train.add_argument("--resume", action="store_true", help="continue from the latest checkpoint")
    train.set_defaults(func=cmd_train)

    sweep = sub.add_parser("sweep", help="run a range of seeds and aggregate")
    sweep.add_argument("--config", type=Path, default=None)
    sweep.add_argument("--seeds", type=parse_seeds, required=True, metavar="A..B")
    sweep.add_argument("--parallel", type=int, default=1)
    sweep.add_argument("--out", type=Path, required=True)
    sweep.add_argument("--override", action="append", default=[], metavar="KEY=VAL")
    sweep.set_defaults(func=cmd_sweep)

    plot = sub.add_parser("plot", help="write learning curves as SVG")
    plot.add_argument("--runs", type=Path, nargs="+", required=True)
    plot.add_argument("--out", type=Path, required=True)
    plot.add_argument("--labels", nargs="+", default=None)
    plot.add_argument("--title", default=None)
    plot.set_defaults(func=cmd_plot)

    selftest = sub.add_parser("selftest", help="run the numerical oracle suites")
    selftest.add_argument("--suite", action="append", default=None)
    selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT)
    args = build_parser().parse_args(argv)
    return args.func(args)
