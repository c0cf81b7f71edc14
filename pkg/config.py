"""
Configuration settings for the HOT-GP model-based RL laboratory.
Task presets carry the per-task hyperparameters; everything else
is a desk-scale default that a config file or --override can replace.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# ─── Paths ───────────────────────────────────────────────────────────────────
BASE_DIR = Path(__file__).parent
RUN_ROOT = Path(os.getenv("HOTGP_RUN_ROOT", str(BASE_DIR / "runs")))
METRICS_FILE = "metrics.csv"
AGGREGATE_FILE = "aggregate.csv"
CONFIG_SNAPSHOT_FILE = "config.json"
ERROR_LOG_FILE = "error.log"
CHECKPOINT_DIR = "checkpoints"

METRICS_COLUMNS = [
    "env_steps", "mean_eval_return", "eval_return_std",
    "model_nll", "r_min", "wall_seconds",
]

# ─── Logging ─────────────────────────────────────────────────────────────────
LOG_LEVEL = os.getenv("HOTGP_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"

# ─── Linear Algebra ──────────────────────────────────────────────────────────
JITTER_RELATIVE_START = 1e-9      # times trace(m)/d
JITTER_ABSOLUTE_MAX = 1e-4
JITTER_GROWTH = 10.0
JITTER_WARN_ABOVE = 1e-6
SYMMETRY_RTOL = 1e-9

# ─── Neural Networks ─────────────────────────────────────────────────────────
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
LOGVAR_MIN = -10.0
LOGVAR_MAX = 0.5
ACTIVATIONS = ["silu", "mish", "relu", "tanh", "identity"]

# ─── Policy Search ───────────────────────────────────────────────────────────
POLICY_ALGORITHMS = ["sac", "ddpg"]
POLICY_HIDDEN = [256, 256]
POLICY_ACTIVATION = "silu"
LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
SAC_INIT_ALPHA = 1.0
DDPG_EXPLORE_START = 1.0
DDPG_EXPLORE_END = 0.1

# ─── Joint Model Defaults ───────────────────────────────────────────────────
GP_SUBSAMPLE_CAP = 500            # 1,000 at full scale
GP_NOISE_FLOOR = 1e-6             # standardized units
GP_KERNEL_STEPS = 50
GP_KERNEL_LR = 0.01
GP_MEAN_EPOCHS = 20
GP_MEAN_HIDDEN = [200, 200]
GP_MEAN_ACTIVATION = "mish"
GP_MEAN_LR = 1e-3
GP_MEAN_BATCH_SIZE = 256
GP_INIT_NOISE = 0.1
GP_INIT_COREG_DIAG = 0.5
ENSEMBLE_SIZE = 7
ENSEMBLE_EPOCHS = 20
ENSEMBLE_HIDDEN = [200, 200, 200, 200]
ENSEMBLE_ACTIVATION = "silu"
ENSEMBLE_LR = 1e-3
ENSEMBLE_BATCH_SIZE = 256
BOOTSTRAP_MODES = ["mean", "member"]

# ─── Strategy Defaults ───────────────────────────────────────────────────────
STRATEGIES = [
    "greedy", "greedy_known_reward", "thompson", "hot_gp",
    "optimistic_diagonal", "hucrl_approx", "hucrl_known_reward", "mbpo",
]
HUCRL_BETA = 0.01
HUCRL_CANDIDATES = 5
R_MIN_START = 0.1

# ─── Environments ────────────────────────────────────────────────────────────
ENVIRONMENTS = ["u_maze", "medium_maze", "coverage", "sparse_arm"]

# '#' wall, '.' free, 'S' start cell. Goals are drawn from free cells.
MAZE_LAYOUTS = {
    "u_maze": [
        "#####",
        "#...#",
        "###.#",
        "#S..#",
        "#####",
    ],
    "medium_maze": [
        "########",
        "#..##..#",
        "#..#...#",
        "##...###",
        "#..#...#",
        "#.#..#.#",
        "#S..#..#",
        "########",
    ],
}
MAZE_GOAL_THRESHOLD = 0.5
MAZE_MAX_SPEED = 0.25

COVERAGE_GRID = 20
COVERAGE_VARIANCE = 0.05
COVERAGE_NUM_CENTERS = 3
COVERAGE_CENTER_RANGE = 0.8
COVERAGE_DT = 0.1
COVERAGE_MAX_SPEED = 1.0

ARM_LINK_LENGTHS = (0.5, 0.5)
ARM_GOAL_THRESHOLD = 0.2
ARM_DT = 0.1
ARM_MAX_JOINT_SPEED = 1.0
ARM_GOAL_RADIUS = (0.3, 0.9)
ARM_ACTION_PENALTIES = [0.0, 0.1, 0.3, 0.5]

# ─── Task Presets (per-task hyperparameters, desk-scale N) ──────────────────
_MAZE_PRESET = {
    "horizon": 150,
    "rollout_steps": 1,
    "batch_size": 256,
    "gamma": 0.99,
    "learning_rate": 1e-3,
    "tau": 0.005,
    "buffer_capacity": 0,            # 0 = unlimited
    "policy_algorithm": "sac",
    "gp_mean_hidden": [200, 200, 200, 200],
    "gp_mean_activation": "silu",
    "ensemble_hidden": [200, 200, 200, 200],
    "ensemble_activation": "silu",
}

TASK_PRESETS = {
    "u_maze": {**_MAZE_PRESET, "env": "u_maze", "total_env_steps": 150_000,
               "r_min_end": 0.5},
    "medium_maze": {**_MAZE_PRESET, "env": "medium_maze",
                    "total_env_steps": 300_000, "r_min_end": 0.7},
    "coverage": {
        "env": "coverage",
        "total_env_steps": 200_000,
        "horizon": 150,
        "model_rollouts": 150,
        "rollout_steps": 1,
        "batch_size": 150,
        "gamma": 0.9,
        "learning_rate": 5e-5,
        "tau": 0.005,
        "buffer_capacity": 20_000,
        "policy_algorithm": "ddpg",
        "gp_mean_hidden": [200, 200],
        "gp_mean_activation": "mish",
        "ensemble_hidden": [200, 200],
        "ensemble_activation": "mish",
        "r_min_end": 0.5,
    },
    "sparse_arm": {**_MAZE_PRESET, "env": "sparse_arm",
                   "total_env_steps": 40_000, "r_min_end": 0.3},
}
