"""
Training Loop
Model-based policy optimization: interleaves hallucinated k-branched
rollouts from the joint model, policy updates on the model dataset, one
real episode per iteration, and a model refit on the real dataset.
Every random draw comes from a substream keyed by (seed, purpose,
episode, index), which makes runs reproducible and resumable.
"""
import logging
import re
import time
import traceback
from pathlib import Path

import joblib
import numpy as np
import pandas as pd

import config
from src.agent import TransitionBuffer, Transitions, make_agent
from src.core import derive_rng
from src.envs import make_env
from src.ml import EnsembleJointModel, GpJointModel
from src.run_config import RunConfig
from src.strategies import OptimismSchedule, Strategy, compose_next_state

logger = logging.getLogger(__name__)

_CHECKPOINT_PATTERN = re.compile(r"step_(\d+)\.joblib$")


# ─── Building blocks ─────────────────────────────────────────────────────────

def build_env(cfg: RunConfig):
    return make_env(cfg.env, horizon=cfg.horizon, action_penalty=cfg.action_penalty,
                    literal_penalty_sign=cfg.literal_penalty_sign, maze_layout=cfg.maze_layout)


def build_model(cfg: RunConfig, spec):
    if cfg.model_backend == "none":
        return None
    if cfg.model_backend == "gp":
        return GpJointModel(
            spec.obs_dim, spec.action_dim, spec.dynamic_idx,
            subsample_cap=cfg.gp_subsample_cap, mean_hidden=cfg.gp_mean_hidden,
            mean_activation=cfg.gp_mean_activation, mean_epochs=cfg.gp_mean_epochs,
            kernel_steps=cfg.gp_kernel_steps, kernel_lr=cfg.gp_kernel_lr,
            coregionalization=cfg.coregionalization, seed=cfg.seed,
        )
    return EnsembleJointModel(
        spec.obs_dim, spec.action_dim, spec.dynamic_idx,
        ensemble_size=cfg.ensemble_size, hidden=cfg.ensemble_hidden,
        activation=cfg.ensemble_activation, epochs=cfg.ensemble_epochs,
        clamp_logvar=cfg.ensemble_clamp_logvar, bootstrap_mode=cfg.bootstrap_mode, seed=cfg.seed,
    )


def hallucinate_rollout(model, policy, strategy, s0, steps: int, rng, r_min: float = 0.0, spec=None) -> Transitions:
    """
    K-step model rollout from `s0`: act, predict, let the strategy pick
    (delta, reward), compose and clip the next state, chain.
    """
    model._require_fitted()
    dynamic_idx = strategy.dynamic_idx if spec is None else spec.dynamic_idx
    obs_dim = np.size(s0)
    states, actions, next_states, rewards = [], [], [], []
    state = np.asarray(s0, dtype=float)
    for _ in range(steps):
        action = policy.act(state, "explore", rng)
        pred = model.predict(state, action, **model.rollout_kwargs(rng))
        delta, reward = strategy(pred, r_min, rng, state=state, action=action,
                                 action_fn=lambda s: policy.act(s, "evaluate"))
        next_state = compose_next_state(state, delta, dynamic_idx)
        if spec is not None:
            next_state = spec.clip_obs(next_state)
        states.append(state)
        actions.append(action)
        next_states.append(next_state)
        rewards.append(reward)
        state = next_state
    return Transitions(
        np.reshape(states, (steps, obs_dim)), np.asarray(actions), np.reshape(next_states, (steps, obs_dim)),
        np.asarray(rewards, dtype=float), np.zeros(steps, dtype=bool),
    )


def evaluate(policy, env, episodes: int, rng) -> tuple[float, float]:
    """Deterministic-mode returns over fresh episodes: (mean, population std)."""
    if episodes < 1:
        raise ValueError("episodes must be at least 1")
    returns = []
    for _ in range(episodes):
        obs = env.reset(rng)
        total, done = 0.0, False
        while not done:
            obs, reward, done = env.step(policy.act(obs, "evaluate"))
            total += reward
        returns.append(total)
    return float(np.mean(returns)), float(np.std(returns))


class RandomPolicy:
    """Uniform actions within the bounds; used for the seeding episode."""

    def __init__(self, spec):
        self.spec = spec

    def act(self, state, mode: str = "explore", rng=None):
        return rng.uniform(self.spec.action_low, self.spec.action_high)


# ─── Trainer ─────────────────────────────────────────────────────────────────

class Trainer:
    """Owns one run directory and the full state of one training run."""

    def __init__(self, cfg: RunConfig, run_dir):
        self.cfg = cfg
        self.run_dir = Path(run_dir)
        self.env = build_env(cfg)
        self.eval_env = build_env(cfg)
        self.start_env = build_env(cfg)
        self.spec = self.env.spec
        self.model = build_model(cfg, self.spec)
        self.agent = make_agent(cfg.policy_algorithm, self.spec, cfg.gamma, cfg.tau, cfg.learning_rate,
                                explore_noise=cfg.ddpg_explore_noise, seed=cfg.seed)
        self.strategy = Strategy(cfg.strategy, beta=cfg.hucrl_beta, candidates=cfg.hucrl_candidates,
                                 reward_oracle=self.env.reward_oracle, dynamic_idx=tuple(self.spec.dynamic_idx))
        self.schedule = OptimismSchedule(cfg.r_min_start, cfg.r_min_end, cfg.total_env_steps)
        self.d_env = TransitionBuffer(self.spec.obs_dim, self.spec.action_dim)
        self.d_model = TransitionBuffer(self.spec.obs_dim, self.spec.action_dim, capacity=cfg.buffer_capacity or None)
        self.episode = 0
        self.rows = []
        self.last_nll = float("nan")
        self.model_updates = 0
        self.elapsed = 0.0

    @property
    def model_rollouts(self) -> int:
        return 0 if self.model is None else self.cfg.model_rollouts

    @property
    def env_steps(self) -> int:
        return len(self.d_env)

    def rng(self, tag: str, index: int = 0):
        return derive_rng(self.cfg.seed, tag, self.episode, index)

    # ─── Phases ──────────────────────────────────────────────────────────────

    def branch_states(self) -> np.ndarray:
        count = self.model_rollouts
        if self.cfg.branch_from == "initial":
            return np.array([self.start_env.reset(self.rng("initial", m)) for m in range(count)])
        return self.d_env.sample_states(count, self.rng("branch"))

    def hallucinate(self, r_min: float) -> int:
        """Phase (a): M rollouts of K steps into D_model."""
        if self.model_rollouts == 0 or not self.model.is_fitted:
            return 0
        added = 0
        for m, s0 in enumerate(self.branch_states()):
            rollout = hallucinate_rollout(self.model, self.agent, self.strategy, s0, self.cfg.rollout_steps,
                                          self.rng("rollout", m), r_min, self.spec)
            self.d_model.extend(rollout)
            added += len(rollout)
        return added

    def update_policy(self) -> int:
        """Phase (b): G·T gradient updates from D_model (D_env when model-free)."""
        source = self.d_env if self.model is None else self.d_model
        if len(source) == 0:
            return 0
        rng = self.rng("update")
        count = self.cfg.updates_per_step * self.cfg.horizon
        for _ in range(count):
            self.agent.update(source.sample(self.cfg.batch_size, rng), rng)
        self.model_updates += count
        return count

    def real_episode(self, policy) -> tuple[Transitions, float]:
        """Phase (c): one T-step episode in the real environment appended to D_env."""
        act_rng = self.rng("act")
        obs = self.env.reset(self.rng("env"))
        start = len(self.d_env)
        total, done = 0.0, False
        while not done:
            action = policy.act(obs, "explore", act_rng)
            next_obs, reward, done = self.env.step(action)
            self.d_env.add(obs, self.spec.clip_action(action), next_obs, reward, False)
            total += reward
            obs = next_obs
        batch = self.d_env.all()
        episode = Transitions(*(arr[start:] for arr in (batch.states, batch.actions, batch.next_states,
                                                         batch.rewards, batch.dones)))
        return episode, total

    def refit(self) -> None:
        """Phase (d): warm-started refit on D_env."""
        if self.model is not None:
            self.model.fit(self.d_env, self.rng("fit"))

    # ─── Loop ────────────────────────────────────────────────────────────────

    def iteration(self) -> None:
        r_min = self.schedule.r_min_at(self.env_steps)
        if self.episode == 0:
            episode, real_return = self.real_episode(RandomPolicy(self.spec))
        else:
            self.hallucinate(r_min)
            self.update_policy()
            episode, real_return = self.real_episode(self.agent)
        if self.model is not None and self.model.is_fitted:
            self.last_nll = self.model.predictive_nll(episode.states, episode.actions,
                                                      episode.next_states, episode.rewards)
        self.refit()
        if hasattr(self.agent, "set_progress"):
            self.agent.set_progress(self.env_steps / self.cfg.total_env_steps)
        self.episode += 1
        logger.info("episode %d: env_steps=%d r_min=%.3f return=%.3f model_nll=%.4f",
                    self.episode, self.env_steps, r_min, real_return, self.last_nll)

    def record(self) -> dict:
        mean, std = evaluate(self.agent, self.eval_env, self.cfg.eval_episodes, self.rng("eval"))
        row = {
            "env_steps": self.env_steps,
            "mean_eval_return": mean,
            "eval_return_std": std,
            "model_nll": self.last_nll,
            "r_min": self.schedule.r_min_at(self.env_steps),
            "wall_seconds": round(self.elapsed, 3) if self.cfg.log_wall_time else 0.0,
        }
        self.rows.append(row)
        self.write_metrics()
        logger.info("eval at %d steps: %.3f ± %.3f", self.env_steps, mean, std)
        return row

    def write_metrics(self) -> Path:
        path = self.run_dir / config.METRICS_FILE
        frame = pd.DataFrame(self.rows, columns=config.METRICS_COLUMNS)
        frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
        return path

    def run(self) -> Path:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.cfg.save(self.run_dir / config.CONFIG_SNAPSHOT_FILE)
        try:
            while self.env_steps < self.cfg.total_env_steps:
                started = time.perf_counter()
                self.iteration()
                if self.episode % self.cfg.eval_every == 0 or self.env_steps >= self.cfg.total_env_steps:
                    self.elapsed += time.perf_counter() - started
                    self.record()
                    self.save_checkpoint()
                else:
                    self.elapsed += time.perf_counter() - started
        except Exception:
            (self.run_dir / config.ERROR_LOG_FILE).write_text(traceback.format_exc(), encoding="utf-8")
            logger.exception("run failed at episode %d", self.episode)
            raise
        logger.info("run finished: %d env steps in %.1fs", self.env_steps, self.elapsed)
        return self.run_dir

    # ─── Checkpoints ─────────────────────────────────────────────────────────

    def state_dict(self) -> dict:
        return {
            "episode": self.episode,
            "d_env": self.d_env,
            "d_model": self.d_model,
            "model": self.model,
            "agent": self.agent,
            "rows": self.rows,
            "last_nll": self.last_nll,
            "model_updates": self.model_updates,
            "elapsed": self.elapsed,
        }

    def save_checkpoint(self) -> Path:
        folder = self.run_dir / config.CHECKPOINT_DIR
        folder.mkdir(parents=True, exist_ok=True)
        path = folder / f"step_{self.env_steps}.joblib"
        joblib.dump(self.state_dict(), path)
        logger.info("checkpoint written: %s", path)
        return path

    def load_state(self, state: dict) -> None:
        for key, value in state.items():
            setattr(self, key, value)

    @staticmethod
    def latest_checkpoint(run_dir) -> Path | None:
        folder = Path(run_dir) / config.CHECKPOINT_DIR
        found = [(int(m.group(1)), p) for p in folder.glob("step_*.joblib")
                 if (m := _CHECKPOINT_PATTERN.search(p.name))]
        return max(found)[1] if found else None

    @classmethod
    def resume(cls, cfg: RunConfig, run_dir) -> "Trainer":
        trainer = cls(cfg, run_dir)
        path = cls.latest_checkpoint(run_dir)
        if path is not None:
            trainer.load_state(joblib.load(path))
            logger.info("resumed from %s at episode %d", path, trainer.episode)
        return trainer


def run(cfg: RunConfig, run_dir, resume: bool = False) -> Path:
    trainer = Trainer.resume(cfg, run_dir) if resume else Trainer(cfg, run_dir)
    return trainer.run()
