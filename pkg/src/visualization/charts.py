"""
Learning-Curve Charts
Deterministic SVG output: one mean curve per run directory with a shaded
±1 std band, env_steps on the x-axis and mean evaluation return on the y-axis.
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from src.data_processor import load_curve  # noqa: E402

# ─── Color Palette ──────────────────────────────────────────────────────────
PALETTE = [
    "#6366F1", "#8B5CF6", "#EC4899", "#06B6D4",
    "#10B981", "#F59E0B", "#EF4444", "#F97316",
    "#14B8A6", "#A855F7",
]

RC_DEFAULTS = {
    "svg.hashsalt": "hotgp-learning-curves",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def learning_curves(run_dirs, out_path, labels=None, title: str = "") -> Path:
    """Write the SVG; curves keep their own x-samples (no interpolation)."""
    run_dirs = [Path(d) for d in run_dirs]
    labels = list(labels) if labels else [d.name for d in run_dirs]
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    with plt.rc_context(RC_DEFAULTS):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for i, (run_dir, label) in enumerate(zip(run_dirs, labels)):
            curve = load_curve(run_dir)
            color = PALETTE[i % len(PALETTE)]
            x = curve["env_steps"].to_numpy()
            mean = curve["mean"].to_numpy()
            std = curve["std"].fillna(0.0).to_numpy()
            ax.plot(x, mean, color=color, linewidth=1.8, label=label)
            ax.fill_between(x, mean - std, mean + std, color=color, alpha=0.2, linewidth=0)
        ax.set_xlabel("env_steps")
        ax.set_ylabel("mean_eval_return")
        if title:
            ax.set_title(title)
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out_path
