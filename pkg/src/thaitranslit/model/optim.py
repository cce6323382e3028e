"""AdamW with decoupled weight decay, the linear warmup/decay schedule and
global-norm gradient clipping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch

from .config import TrainConfig


class NonFiniteGradientError(FloatingPointError):
    pass


@dataclass
class AdamWState:
    step: int = 0
    exp_avg: list = field(default_factory=list)
    exp_avg_sq: list = field(default_factory=list)


class AdamW:
    """AdamW over a fixed list of tensors.

    ``decay_mask`` selects which tensors receive weight decay. The decay is
    applied to the parameter itself before the moment update, never folded
    into the gradient.
    """

    def __init__(self, params, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01, decay_mask=None):
        self.params = list(params)
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.decay_mask = list(decay_mask) if decay_mask is not None else [True] * len(self.params)
        self.state = AdamWState(
            exp_avg=[torch.zeros_like(p) for p in self.params],
            exp_avg_sq=[torch.zeros_like(p) for p in self.params],
        )

    @torch.no_grad()
    def step(self, grads, lr: float):
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ValueError(f"{len(grads)} gradients for {len(self.params)} parameters")
        for g in grads:
            if g is not None and not torch.isfinite(g).all():
                raise NonFiniteGradientError("non-finite gradient")
        st = self.state
        st.step += 1
        b1, b2 = self.betas
        bc1 = 1.0 - b1 ** st.step
        bc2 = 1.0 - b2 ** st.step
        for p, g, m, v, decay in zip(self.params, grads, st.exp_avg, st.exp_avg_sq, self.decay_mask):
            if decay and self.weight_decay:
                p.mul_(1.0 - lr * self.weight_decay)
            if g is None:
                continue
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {tuple(g.shape)} != parameter shape {tuple(p.shape)}")
            m.mul_(b1).add_(g, alpha=1.0 - b1)
            v.mul_(b2).addcmul_(g, g, value=1.0 - b2)
            denom = (v / bc2).sqrt_().add_(self.eps)
            p.addcdiv_(m, denom, value=-lr / bc1)


def optimizer_step(params, grads, opt: AdamW, lr: float):
    opt.step(grads, lr)
    return params, opt.state


def lr_at(step: int, config: TrainConfig, total_steps: int) -> float:
    """Linear warmup from 0 to the peak over ``warmup_steps``, then linear decay to 0."""
    if step < 0:
        raise ValueError("step must be non-negative")
    warm = config.warmup_steps
    if total_steps <= warm:
        raise ValueError(f"total_steps ({total_steps}) must exceed warmup_steps ({warm})")
    peak = config.learning_rate
    if step < warm:
        return peak * step / warm
    if step >= total_steps:
        return 0.0
    return peak * (total_steps - step) / (total_steps - warm)


@torch.no_grad()
def global_norm(grads) -> float:
    return math.sqrt(sum(float(g.double().pow(2).sum()) for g in grads if g is not None))


@torch.no_grad()
def clip_gradients(grads, max_norm: float = 1.0):
    """Scale all gradients jointly so their global L2 norm is at most ``max_norm``.

    Returns ``(grads, norm_before)``; tensors are modified in place.
    """
    grads = list(grads)
    norm = global_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads:
            if g is not None:
                g.mul_(scale)
    return grads, norm
