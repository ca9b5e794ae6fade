"""Hierarchical decision policy: meta anchor sampling, masked control
sampling, behavioral-cloning pretraining and online finetuning."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ranorch.agent.model import (
    NULL_ANCHOR,
    DecisionTransformer,
    ModelConfig,
    encode_goal,
)
from ranorch.agent.replay import EpisodeTrajectory, ReplayBuffer, relabel_goals
from ranorch.agent.rewards import GoalToken
from ranorch.agent.toyenv import NUM_ACTIONS, ToyOrchestrationEnv


class PolicyError(RuntimeError):
    pass


@dataclass(frozen=True)
class PolicyConfig:
    context_window: int = 8        # control context length (steps)
    meta_window: int = 8           # episodes the meta stage looks back over
    anchor_lag: int = 1
    q_min: float = 0.25            # fulfillment floor for anchor candidates
    finetune_every: int = 5        # episodes between finetuning rounds
    batch_size: int = 64
    lr: float = 1e-4
    epochs: int = 30
    holdout_frac: float = 0.2
    temperature: float = 1.0
    seed: int = 0


class HodtPolicy:
    """Meta transformer proposes an anchor action; the control transformer
    samples the next module action conditioned on state, goal, and anchor."""

    def __init__(self, model_cfg: ModelConfig | None = None,
                 cfg: PolicyConfig | None = None):
        self.cfg = cfg or PolicyConfig()
        torch.manual_seed(self.cfg.seed)
        self.model_cfg = model_cfg or ModelConfig()
        self.control = DecisionTransformer(self.model_cfg)
        self.meta = DecisionTransformer(self.model_cfg)
        self._episodes_seen = 0
        self._gen = torch.Generator().manual_seed(self.cfg.seed)

    # ------------------------------------------------------------------ sampling

    def anchor_candidates(self, buffer: ReplayBuffer) -> list[int]:
        """Actions from recent episodes whose fulfillment cleared q_min."""
        out: list[int] = []
        for ep in buffer.episodes[-self.cfg.meta_window:]:
            if ep.fulfillment > self.cfg.q_min:
                out.extend(step.action for step in ep.steps)
        return sorted(set(out))

    def sample_meta(self, state: np.ndarray, goal: GoalToken,
                    candidates: list[int], temperature: float | None = None) -> int:
        """Anchor id from the candidate set plus the null anchor."""
        choices = sorted(set(candidates)) + [NULL_ANCHOR]
        logits = self._logits(self.meta, [state], goal, NULL_ANCHOR, 0)
        mask = torch.full((NUM_ACTIONS + 1,), float("-inf"))
        full = torch.cat([logits, torch.zeros(1)])   # null anchor scores 0
        for c in choices:
            mask[c] = 0.0
        return self._pick(full + mask, temperature)

    def sample_control(self, states: list[np.ndarray], goal: GoalToken,
                       anchor: int, anchor_pos: int, safe_mask: np.ndarray,
                       temperature: float | None = None) -> int:
        """Next action; raises when the safe set is empty, and never returns
        a masked action."""
        if not np.any(safe_mask):
            raise PolicyError("empty safe action set")
        logits = self._logits(self.control, states[-self.cfg.context_window:],
                              goal, anchor, anchor_pos)
        masked = logits.clone()
        masked[~torch.as_tensor(safe_mask)] = float("-inf")
        return self._pick(masked, temperature)

    def _logits(self, model: DecisionTransformer, states, goal: GoalToken,
                anchor: int, anchor_pos: int) -> torch.Tensor:
        T = len(states)
        s = torch.as_tensor(np.asarray(states), dtype=torch.float32).unsqueeze(0)
        g = encode_goal(goal).expand(1, T, -1)
        a = torch.full((1, T), anchor, dtype=torch.long)
        pos = torch.arange(T).unsqueeze(0)
        apos = torch.full((1, T), max(anchor_pos, 0), dtype=torch.long)
        with torch.no_grad():
            tokens = model.tokenize(s, g, a, pos, apos)
            return model(tokens)[0, -1]

    def _pick(self, logits: torch.Tensor, temperature: float | None) -> int:
        temp = self.cfg.temperature if temperature is None else temperature
        if temp <= 0:
            return int(torch.argmax(logits))
        probs = torch.softmax(logits / temp, dim=-1)
        return int(torch.multinomial(probs, 1, generator=self._gen))

    # ------------------------------------------------------------------ training

    def _batches(self, episodes: list[EpisodeTrajectory]):
        """Padded (states, goals, anchors, positions, anchor_positions, targets)."""
        T = max(ep.length for ep in episodes)
        B = len(episodes)
        c = self.model_cfg
        states = torch.zeros(B, T, c.state_dim)
        goals = torch.zeros(B, T, c.goal_dim)
        anchors = torch.full((B, T), NULL_ANCHOR, dtype=torch.long)
        positions = torch.arange(T).expand(B, T).clone()
        apos = torch.zeros(B, T, dtype=torch.long)
        targets = torch.full((B, T), -100, dtype=torch.long)
        for b, ep in enumerate(episodes):
            g = encode_goal(ep.goal)
            for t, step in enumerate(ep.steps):
                states[b, t] = torch.as_tensor(step.state, dtype=torch.float32)
                goals[b, t] = g
                anchors[b, t] = step.anchor if step.anchor >= 0 else NULL_ANCHOR
                apos[b, t] = max(t - self.cfg.anchor_lag, 0)
                targets[b, t] = step.action
        return states, goals, anchors, positions, apos, targets

    def _run_epoch(self, model, episodes, optimizer=None) -> float:
        loss_fn = nn.CrossEntropyLoss(ignore_index=-100)
        total, count = 0.0, 0
        bs = max(self.cfg.batch_size // 8, 1)
        for i in range(0, len(episodes), bs):
            chunk = episodes[i:i + bs]
            s, g, a, pos, apos, y = self._batches(chunk)
            tokens = model.tokenize(s, g, a, pos, apos)
            logits = model(tokens)
            loss = loss_fn(logits.reshape(-1, logits.shape[-1]), y.reshape(-1))
            if optimizer is not None:
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
            total += float(loss.detach()) * len(chunk)
            count += len(chunk)
        return total / max(count, 1)

    def fit(self, episodes: list[EpisodeTrajectory], epochs: int | None = None,
            model: DecisionTransformer | None = None) -> dict:
        """Behavioral cloning with a held-out slice; reverts on NaN loss."""
        if not episodes:
            raise PolicyError("no episodes to fit")
        model = model or self.control
        epochs = epochs or self.cfg.epochs
        split = max(int(len(episodes) * (1 - self.cfg.holdout_frac)), 1)
        train, held = list(episodes[:split]), list(episodes[split:]) or list(episodes[:1])
        saved = {k: v.clone() for k, v in model.state_dict().items()}
        optimizer = torch.optim.Adam(model.parameters(), lr=self.cfg.lr)
        first_held = self._run_epoch(model, held)
        train_loss = held_loss = first_held
        for _ in range(epochs):
            train_loss = self._run_epoch(model, train, optimizer)
            held_loss = self._run_epoch(model, held)
            if not np.isfinite(train_loss) or not np.isfinite(held_loss):
                model.load_state_dict(saved)
                return {"reverted": True, "train_loss": train_loss,
                        "held_loss_before": first_held, "held_loss": float("nan")}
        return {"reverted": False, "train_loss": train_loss,
                "held_loss_before": first_held, "held_loss": held_loss}

    def pretrain(self, demos: list[EpisodeTrajectory], epochs: int | None = None) -> dict:
        stats = self.fit(demos, epochs, self.control)
        self.fit(demos, max((epochs or self.cfg.epochs) // 2, 1), self.meta)
        return stats

    def observe_episode(self, buffer: ReplayBuffer, episode: EpisodeTrajectory,
                        finetune: bool = True) -> dict | None:
        """Insert (relabeled) episode; finetune every `finetune_every` inserts."""
        buffer.insert(relabel_goals(episode))
        self._episodes_seen += 1
        if finetune and self._episodes_seen % self.cfg.finetune_every == 0:
            # Clone only episodes that actually moved their goal metric.
            recent = [ep for ep in buffer.episodes[-8 * self.cfg.finetune_every:]
                      if ep.achieved_delta > 0]
            if len(recent) >= 2:
                return self.fit(recent, self.cfg.epochs)
        return None

    # ------------------------------------------------------------------ checkpoints

    def save(self, path, config_hash: str) -> None:
        payload = {
            "control": self.control.state_dict(),
            "meta": self.meta.state_dict(),
            "model_cfg": self.model_cfg.__dict__,
            "policy_cfg": self.cfg.__dict__,
        }
        torch.save({"format": "ranorch-hodt-v1", "config_hash": config_hash,
                    "payload": payload}, path)

    @classmethod
    def load(cls, path, config_hash: str) -> "HodtPolicy":
        blob = torch.load(path, weights_only=False)
        if blob.get("format") != "ranorch-hodt-v1":
            raise PolicyError("not a policy checkpoint")
        if blob["config_hash"] != config_hash:
            raise PolicyError(
                f"config hash mismatch: checkpoint {blob['config_hash']}, "
                f"scenario {config_hash}"
            )
        payload = blob["payload"]
        policy = cls(ModelConfig(**payload["model_cfg"]), PolicyConfig(**payload["policy_cfg"]))
        policy.control.load_state_dict(payload["control"])
        policy.meta.load_state_dict(payload["meta"])
        return policy


def checkpoint_digest(path) -> str:
    return hashlib.sha256(open(path, "rb").read()).hexdigest()[:16]


# ------------------------------------------------------------------ rollouts


def run_episode(env: ToyOrchestrationEnv, policy: HodtPolicy,
                buffer: ReplayBuffer | None = None,
                temperature: float | None = None) -> tuple[EpisodeTrajectory, bool]:
    """One policy rollout; returns (trajectory, goal satisfied)."""
    from ranorch.agent.replay import TrajStep

    state = env.reset()
    goal = env.goal
    assert goal is not None
    candidates = policy.anchor_candidates(buffer) if buffer is not None and len(buffer) else []
    anchor = policy.sample_meta(state, goal, candidates, temperature)
    states = [state]
    steps: list[TrajStep] = []
    while True:
        action = policy.sample_control(states, goal, anchor, 0, env.safe_mask(),
                                       temperature)
        next_state, reward, done = env.step(action)
        steps.append(TrajStep(state, action,
                              anchor if anchor != NULL_ANCHOR else -1, reward, next_state))
        state = next_state
        states.append(state)
        if done:
            break
    traj = EpisodeTrajectory(goal=goal, steps=tuple(steps),
                             achieved_delta=env.achieved_delta(),
                             fulfillment=env.goal_fulfillment())
    return traj, env.satisfied()


def evaluate(env_seed_base: int, policy: HodtPolicy, episodes: int,
             regime: str = "B", online: bool = False,
             buffer: ReplayBuffer | None = None,
             temperature: float = 0.5) -> float:
    """Satisfaction rate over fresh episodes; online mode finetunes as it goes."""
    if online and buffer is None:
        buffer = ReplayBuffer(256)
    wins = 0
    for i in range(episodes):
        env = ToyOrchestrationEnv(regime=regime, seed=env_seed_base + i)
        temp = temperature
        if online:
            # Explore hard early, then anneal toward exploitation.
            frac = i / max(episodes - 1, 1)
            temp = 2.0 if frac < 0.3 else (0.7 if frac < 0.6 else 0.2)
        traj, ok = run_episode(env, policy, buffer if online else None, temp)
        wins += int(ok)
        if online:
            policy.observe_episode(buffer, traj)
    return wins / episodes
