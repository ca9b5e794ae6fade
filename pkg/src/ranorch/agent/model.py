"""Causal decision transformer with anchored token rows.

Each timestep contributes one token row built from three embedded segments:
state and goal carry the current position code, the anchor action carries the
position it was taken at (lag beta). Rows are projected to the model width
and run through a causal encoder; the head scores the action vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ranorch.agent.rewards import GoalToken
from ranorch.agent.toyenv import METRICS, NUM_ACTIONS, STATE_DIM

GOAL_DIM = len(METRICS) + 2          # metric one-hot, delta, direction
NULL_ANCHOR = NUM_ACTIONS            # learned embedding id for "no anchor"


@dataclass(frozen=True)
class ModelConfig:
    state_dim: int = STATE_DIM
    goal_dim: int = GOAL_DIM
    num_actions: int = NUM_ACTIONS
    embed_dim: int = 32
    num_layers: int = 3
    num_heads: int = 1
    feedforward_dim: int = 64
    max_position: int = 64
    dropout: float = 0.0


def encode_goal(goal: GoalToken) -> torch.Tensor:
    onehot = [1.0 if goal.metric == m else 0.0 for m in METRICS]
    return torch.tensor(onehot + [goal.delta, float(goal.direction)], dtype=torch.float32)


class DecisionTransformer(nn.Module):
    def __init__(self, cfg: ModelConfig | None = None):
        super().__init__()
        self.cfg = cfg or ModelConfig()
        c = self.cfg
        self.state_proj = nn.Linear(c.state_dim, c.embed_dim)
        self.goal_proj = nn.Linear(c.goal_dim, c.embed_dim)
        self.action_emb = nn.Embedding(c.num_actions + 1, c.embed_dim)
        self.pos_emb = nn.Embedding(c.max_position, c.embed_dim)
        self.input_proj = nn.Linear(3 * c.embed_dim, c.embed_dim)
        layer = nn.TransformerEncoderLayer(
            d_model=c.embed_dim, nhead=c.num_heads,
            dim_feedforward=c.feedforward_dim, dropout=c.dropout,
            batch_first=True, norm_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=c.num_layers,
                                             enable_nested_tensor=False)
        self.head = nn.Linear(c.embed_dim, c.num_actions)

    def tokenize(self, states: torch.Tensor, goals: torch.Tensor,
                 anchors: torch.Tensor, positions: torch.Tensor,
                 anchor_positions: torch.Tensor) -> torch.Tensor:
        """(B, T, 3*embed) token rows.

        states (B,T,state_dim); goals (B,T,goal_dim); anchors (B,T) action ids
        with NULL_ANCHOR allowed; positions / anchor_positions (B,T) ints.
        """
        p = self.pos_emb(positions.clamp(0, self.cfg.max_position - 1))
        pa = self.pos_emb(anchor_positions.clamp(0, self.cfg.max_position - 1))
        seg_s = self.state_proj(states) + p
        seg_g = self.goal_proj(goals) + p
        seg_a = self.action_emb(anchors) + pa
        return torch.cat([seg_s, seg_g, seg_a], dim=-1)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        """Action logits (B, T, num_actions) under a causal mask."""
        x = self.input_proj(tokens)
        T = x.shape[1]
        mask = nn.Transformer.generate_square_subsequent_mask(T, device=x.device)
        h = self.encoder(x, mask=mask, is_causal=True)
        return self.head(h)
