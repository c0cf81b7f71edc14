"""
Metrics Processor
Loading of per-run metrics.csv files, cross-seed aggregation aligned on
env_steps, and summary numbers for the final checkpoint.
"""
from pathlib import Path

import numpy as np
import pandas as pd

import config

VALUE_COLUMNS = ["mean_eval_return", "eval_return_std", "model_nll", "r_min", "wall_seconds"]


def load_metrics(run_dir) -> pd.DataFrame:
    """Read a run directory's metrics.csv; raises FileNotFoundError naming the path."""
    path = Path(run_dir) / config.METRICS_FILE
    if not path.is_file():
        raise FileNotFoundError(f"missing metrics file: {path}")
    df = pd.read_csv(path)
    missing = [c for c in config.METRICS_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path} lacks columns {missing}")
    df["env_steps"] = df["env_steps"].astype(int)
    return df


def load_curve(run_dir) -> pd.DataFrame:
    """
    Learning curve for plotting as (env_steps, mean, std). Prefers a sweep's
    aggregate.csv over a single run's metrics.csv.
    """
    aggregate = Path(run_dir) / config.AGGREGATE_FILE
    if aggregate.is_file():
        df = pd.read_csv(aggregate)
        return pd.DataFrame({
            "env_steps": df["env_steps"].astype(int),
            "mean": df["mean_eval_return_mean"],
            "std": df["mean_eval_return_std"],
        })
    df = load_metrics(run_dir)
    return pd.DataFrame({
        "env_steps": df["env_steps"],
        "mean": df["mean_eval_return"],
        "std": df["eval_return_std"],
    })


def aggregate_runs(run_dirs) -> pd.DataFrame:
    """
    Per-env_steps mean and population std of every metric across runs.
    Steps reported by only some runs are averaged over those runs.
    """
    frames = []
    for seed_index, run_dir in enumerate(run_dirs):
        df = load_metrics(run_dir)
        df["run"] = seed_index
        frames.append(df)
    if not frames:
        return pd.DataFrame(columns=["env_steps", "n_runs"])
    stacked = pd.concat(frames, ignore_index=True)
    grouped = stacked.groupby("env_steps", sort=True)
    out = pd.DataFrame({"env_steps": sorted(stacked["env_steps"].unique())})
    out["n_runs"] = grouped["run"].nunique().values
    for column in VALUE_COLUMNS:
        out[f"{column}_mean"] = grouped[column].mean().values
        out[f"{column}_std"] = grouped[column].std(ddof=0).values
    return out


def write_aggregate(run_dirs, out_dir, failures=()) -> Path:
    """aggregate.csv over completed runs plus failures.txt listing the rest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / config.AGGREGATE_FILE
    aggregate_runs(run_dirs).to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    failures_path = out_dir / "failures.txt"
    if failures:
        failures_path.write_text("".join(f"{line}\n" for line in failures), encoding="utf-8")
    elif failures_path.exists():
        failures_path.unlink()
    return path


def final_summary(run_dirs) -> dict:
    """Final-checkpoint return per run, with mean and standard error."""
    finals = np.array([load_metrics(d)["mean_eval_return"].iloc[-1] for d in run_dirs], dtype=float)
    if finals.size == 0:
        return {"n_runs": 0, "mean": float("nan"), "stderr": float("nan")}
    stderr = finals.std(ddof=1) / np.sqrt(finals.size) if finals.size > 1 else 0.0
    return {"n_runs": int(finals.size), "mean": float(finals.mean()), "stderr": float(stderr),
            "finals": finals.tolist()}
