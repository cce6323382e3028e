"""Byte-level encoder-decoder transformer in the T5 style.

Pre-norm residual blocks with scale-only RMS normalization, no absolute
positions (a bucketed relative-position bias is computed once per stack and
reused by every layer), gated-GELU feed-forward, a shared input embedding
and a separate output projection. The decoder input is the target shifted
right with pad (0) as the start token.
"""

from __future__ import annotations

import math

import torch
from torch import nn
from torch.nn import functional as F

from .config import TransformerConfig
from .tokenizer import PAD_ID

# large but finite so a fully masked row gives a uniform softmax, never NaN
MASK_VALUE = -1e9


class RMSNorm(nn.Module):
    def __init__(self, dim: int, eps: float = 1e-6):
        super().__init__()
        self.weight = nn.Parameter(torch.ones(dim))
        self.eps = eps

    def forward(self, x):
        var = x.pow(2).mean(-1, keepdim=True)
        return self.weight * (x * torch.rsqrt(var + self.eps))


def relative_bucket(relative: torch.Tensor, bidirectional: bool, num_buckets: int, max_distance: int):
    """Map key-minus-query offsets to buckets: exact near zero, log-spaced further out."""
    bucket = torch.zeros_like(relative)
    if bidirectional:
        num_buckets //= 2
        bucket = bucket + (relative > 0).long() * num_buckets
        n = relative.abs()
    else:
        n = (-relative).clamp(min=0)
    max_exact = num_buckets // 2
    is_small = n < max_exact
    large = max_exact + (
        torch.log(n.float().clamp(min=1) / max_exact)
        / math.log(max_distance / max_exact)
        * (num_buckets - max_exact)
    ).long()
    large = large.clamp(max=num_buckets - 1)
    return bucket + torch.where(is_small, n, large)


class RelativeBias(nn.Module):
    def __init__(self, cfg: TransformerConfig, bidirectional: bool):
        super().__init__()
        self.table = nn.Embedding(cfg.num_buckets, cfg.num_heads)
        self.bidirectional = bidirectional
        self.num_buckets = cfg.num_buckets
        self.max_distance = cfg.max_distance

    def forward(self, q_len: int, k_len: int):
        device = self.table.weight.device
        ctx = torch.arange(q_len, device=device)[:, None]
        mem = torch.arange(k_len, device=device)[None, :]
        buckets = relative_bucket(mem - ctx, self.bidirectional, self.num_buckets, self.max_distance)
        return self.table(buckets).permute(2, 0, 1).unsqueeze(0)  # (1, heads, q, k)


class Attention(nn.Module):
    def __init__(self, cfg: TransformerConfig):
        super().__init__()
        self.h, self.dk = cfg.num_heads, cfg.head_dim
        inner = cfg.inner_dim
        self.q = nn.Linear(cfg.d_model, inner, bias=False)
        self.k = nn.Linear(cfg.d_model, inner, bias=False)
        self.v = nn.Linear(cfg.d_model, inner, bias=False)
        self.o = nn.Linear(inner, cfg.d_model, bias=False)
        self.dropout = nn.Dropout(cfg.dropout)

    def _split(self, x):
        b, n, _ = x.shape
        return x.view(b, n, self.h, self.dk).transpose(1, 2)

    def forward(self, x, kv, bias):
        q, k, v = self._split(self.q(x)), self._split(self.k(kv)), self._split(self.v(kv))
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.dk) + bias
        weights = self.dropout(torch.softmax(scores, dim=-1))
        out = (weights @ v).transpose(1, 2).reshape(x.shape[0], x.shape[1], -1)
        return self.o(out)


class GatedFF(nn.Module):
    def __init__(self, cfg: TransformerConfig):
        super().__init__()
        self.wi_0 = nn.Linear(cfg.d_model, cfg.d_ff, bias=False)
        self.wi_1 = nn.Linear(cfg.d_model, cfg.d_ff, bias=False)
        self.wo = nn.Linear(cfg.d_ff, cfg.d_model, bias=False)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x):
        return self.wo(self.dropout(F.gelu(self.wi_0(x), approximate="tanh") * self.wi_1(x)))


class EncoderLayer(nn.Module):
    def __init__(self, cfg):
        super().__init__()
        self.norm1, self.attn = RMSNorm(cfg.d_model), Attention(cfg)
        self.norm2, self.ff = RMSNorm(cfg.d_model), GatedFF(cfg)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x, bias):
        h = self.norm1(x)
        x = x + self.dropout(self.attn(h, h, bias))
        return x + self.dropout(self.ff(self.norm2(x)))


class DecoderLayer(nn.Module):
    def __init__(self, cfg):
        super().__init__()
        self.norm1, self.self_attn = RMSNorm(cfg.d_model), Attention(cfg)
        self.norm2, self.cross_attn = RMSNorm(cfg.d_model), Attention(cfg)
        self.norm3, self.ff = RMSNorm(cfg.d_model), GatedFF(cfg)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(self, x, memory, self_bias, cross_bias):
        h = self.norm1(x)
        x = x + self.dropout(self.self_attn(h, h, self_bias))
        x = x + self.dropout(self.cross_attn(self.norm2(x), memory, cross_bias))
        return x + self.dropout(self.ff(self.norm3(x)))


class Seq2SeqTransformer(nn.Module):
    def __init__(self, cfg: TransformerConfig):
        super().__init__()
        self.config = cfg
        self.embed = nn.Embedding(cfg.vocab_size, cfg.d_model)
        self.enc_bias = RelativeBias(cfg, bidirectional=True)
        self.dec_bias = RelativeBias(cfg, bidirectional=False)
        self.encoder = nn.ModuleList(EncoderLayer(cfg) for _ in range(cfg.num_layers))
        self.decoder = nn.ModuleList(DecoderLayer(cfg) for _ in range(cfg.num_layers))
        self.enc_norm = RMSNorm(cfg.d_model)
        self.dec_norm = RMSNorm(cfg.d_model)
        self.lm_head = nn.Linear(cfg.d_model, cfg.vocab_size, bias=False)
        self.dropout = nn.Dropout(cfg.dropout)
        self.reset_parameters()

    def reset_parameters(self):
        for module in self.modules():
            if isinstance(module, RMSNorm):
                nn.init.ones_(module.weight)
            elif isinstance(module, nn.Linear):
                nn.init.normal_(module.weight, std=module.in_features ** -0.5)
        nn.init.normal_(self.embed.weight, std=1.0)
        for rel in (self.enc_bias, self.dec_bias):
            nn.init.normal_(rel.table.weight, std=0.1)

    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def _check_ids(self, ids):
        if ids.numel() and (ids.min() < 0 or ids.max() >= self.config.vocab_size):
            raise ValueError(f"token ids must be in [0, {self.config.vocab_size})")

    def encode(self, src: torch.Tensor):
        """Encoder states and the additive key mask for cross-attention."""
        self._check_ids(src)
        key_mask = (src == PAD_ID)[:, None, None, :].to(self.embed.weight.dtype) * MASK_VALUE
        bias = self.enc_bias(src.shape[1], src.shape[1]) + key_mask
        x = self.dropout(self.embed(src))
        for layer in self.encoder:
            x = layer(x, bias)
        return self.dropout(self.enc_norm(x)), key_mask

    def decode(self, memory, memory_mask, dec_in: torch.Tensor):
        """Next-token logits for every position of ``dec_in``."""
        self._check_ids(dec_in)
        n = dec_in.shape[1]
        causal = torch.triu(torch.ones(n, n, dtype=torch.bool, device=dec_in.device), diagonal=1)
        self_bias = self.dec_bias(n, n) + causal.to(memory.dtype) * MASK_VALUE
        x = self.dropout(self.embed(dec_in))
        for layer in self.decoder:
            x = layer(x, memory, self_bias, memory_mask)
        return self.lm_head(self.dropout(self.dec_norm(x)))

    def forward(self, src: torch.Tensor, tgt: torch.Tensor):
        memory, mask = self.encode(src)
        return self.decode(memory, mask, shift_right(tgt))


def shift_right(tgt: torch.Tensor) -> torch.Tensor:
    start = torch.full_like(tgt[:, :1], PAD_ID)
    return torch.cat([start, tgt[:, :-1]], dim=1)


def sequence_loss(logits, target, pad_mask=None, weights=None):
    """Mean token cross-entropy over non-pad positions.

    ``weights`` (one per example) scale each example's token losses; the
    divisor stays the plain non-pad token count, so the loss is linear in
    every weight.
    """
    if logits.shape[:2] != target.shape:
        raise ValueError(f"logits {tuple(logits.shape)} do not match target {tuple(target.shape)}")
    if pad_mask is None:
        pad_mask = target != PAD_ID
    mask = pad_mask.to(logits.dtype)
    token_loss = F.cross_entropy(logits.transpose(1, 2), target, reduction="none") * mask
    if weights is not None:
        weights = torch.as_tensor(weights, dtype=logits.dtype, device=logits.device)
        if weights.shape != (target.shape[0],):
            raise ValueError("need one weight per example")
        token_loss = token_loss * weights[:, None]
    return token_loss.sum() / mask.sum().clamp(min=1)
