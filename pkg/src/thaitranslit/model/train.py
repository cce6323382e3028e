"""Training loop: seeded shuffling, gradient accumulation, clipping, AdamW,
periodic greedy-decode validation and checkpointing."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch

from ..metrics import corpus_cer
from .checkpoint import Checkpoint, save_checkpoint
from .config import TrainConfig, TransformerConfig
from .optim import AdamW, clip_gradients, lr_at
from .tokenizer import PAD_ID, ByteTokenizer
from .transformer import RMSNorm, Seq2SeqTransformer, sequence_loss


class TrainingDiverged(FloatingPointError):
    def __init__(self, message, last_good: Checkpoint | None):
        super().__init__(message)
        self.last_good = last_good


@dataclass
class TrainResult:
    best: Checkpoint
    log: list = field(default_factory=list)  # one dict per evaluation
    losses: list = field(default_factory=list)  # one float per optimizer step
    total_steps: int = 0


def set_determinism(enabled: bool = True, threads: int | None = None) -> None:
    if threads:
        torch.set_num_threads(threads)
    if enabled:
        torch.set_num_threads(1)
        torch.use_deterministic_algorithms(True)


def build_model(config: TransformerConfig, seed: int = 42) -> Seq2SeqTransformer:
    torch.manual_seed(seed)
    return Seq2SeqTransformer(config)


def _pad(rows: Sequence[Sequence[int]]) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([list(r) + [PAD_ID] * (width - len(r)) for r in rows], dtype=torch.long)


def encode_pairs(pairs, tokenizer: ByteTokenizer | None = None):
    """``(thai, latin[, weight])`` tuples or objects with thai/latin -> id triples."""
    tokenizer = tokenizer or ByteTokenizer()
    out = []
    for item in pairs:
        if hasattr(item, "thai"):
            thai, latin, weight = item.thai, item.latin, 1
        else:
            thai, latin, weight = (tuple(item) + (1,))[:3]
        out.append((tokenizer.encode(thai), tokenizer.encode(latin), float(weight)))
    return out


def steps_per_epoch(n_examples: int, config: TrainConfig) -> int:
    batches = math.ceil(n_examples / config.batch_size)
    return math.ceil(batches / config.grad_accum_steps)


def total_steps_for(n_examples: int, config: TrainConfig) -> int:
    if config.max_steps:
        return config.max_steps
    return steps_per_epoch(n_examples, config) * config.epochs


def _groups(n: int, config: TrainConfig, epoch: int):
    """Micro-batch index groups for one epoch, one group per optimizer step."""
    perm = np.random.default_rng([config.seed, epoch]).permutation(n)
    micro = [perm[i:i + config.batch_size] for i in range(0, n, config.batch_size)]
    for i in range(0, len(micro), config.grad_accum_steps):
        yield micro[i:i + config.grad_accum_steps]


def validation_cer(model, valid, max_length: int, batch_size: int = 64) -> float:
    from ..decoding import greedy_decode_batch

    tok = ByteTokenizer()
    was_training = model.training
    model.eval()
    preds = []
    for i in range(0, len(valid), batch_size):
        chunk = valid[i:i + batch_size]
        for ids in greedy_decode_batch(model, [s for s, _, _ in chunk], max_length):
            preds.append(tok.decode(ids, errors="replace"))
    refs = [tok.decode(t) for _, t, _ in valid]
    if was_training:
        model.train()
    return corpus_cer(preds, refs)


def train(model: Seq2SeqTransformer, train_data, valid_data, config: TrainConfig,
          out_dir=None, log_path=None) -> TrainResult:
    """Train ``model`` in place and return the checkpoint with the lowest validation CER."""
    train_ids = encode_pairs(train_data)
    valid_ids = encode_pairs(valid_data)
    if not train_ids or not valid_ids:
        raise ValueError("training and validation data must be non-empty")
    if config.deterministic:
        set_determinism(True)
    torch.manual_seed(config.seed)  # dropout stream

    total = total_steps_for(len(train_ids), config)
    lr_at(0, config, total)  # validates total > warmup
    params = list(model.parameters())
    no_decay = {id(m.weight) for m in model.modules() if isinstance(m, RMSNorm)}
    opt = AdamW(params, betas=(config.beta1, config.beta2), eps=config.eps,
                weight_decay=config.weight_decay, decay_mask=[id(p) not in no_decay for p in params])

    result = TrainResult(best=None, total_steps=total)
    last_good = Checkpoint.from_model(model, 0)
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None
    step, epoch, since_eval = 0, 0, []
    model.train()
    try:
        while step < total:
            for group in _groups(len(train_ids), config, epoch):
                model.zero_grad(set_to_none=True)
                step_loss = 0.0
                for idx in group:
                    batch = [train_ids[i] for i in idx]
                    src, tgt = _pad([b[0] for b in batch]), _pad([b[1] for b in batch])
                    weights = torch.tensor([b[2] for b in batch])
                    loss = sequence_loss(model(src, tgt), tgt, weights=weights) / len(group)
                    if not torch.isfinite(loss):
                        raise TrainingDiverged(f"non-finite loss at step {step + 1}", last_good)
                    loss.backward()
                    step_loss += loss.item()
                grads = [p.grad if p.grad is not None else torch.zeros_like(p) for p in params]
                clip_gradients(grads, config.max_grad_norm)
                lr = lr_at(step + 1, config, total)
                opt.step(grads, lr)
                step += 1
                result.losses.append(step_loss)
                since_eval.append(step_loss)

                if step % config.eval_steps == 0 or step == total:
                    cer = validation_cer(model, valid_ids, config.max_length)
                    entry = {"step": step, "epoch": epoch, "lr": lr,
                             "loss": float(np.mean(since_eval)), "valid_cer": cer}
                    since_eval = []
                    result.log.append(entry)
                    if log_fh:
                        log_fh.write(json.dumps(entry, sort_keys=True) + "\n")
                        log_fh.flush()
                    ckpt = Checkpoint.from_model(model, step, cer)
                    last_good = ckpt
                    if result.best is None or cer < result.best.best_metric:
                        result.best = ckpt
                        if out_dir:
                            save_checkpoint(os.path.join(out_dir, "best"), ckpt)
                if out_dir and step % config.save_steps == 0:
                    save_checkpoint(os.path.join(out_dir, f"step-{step}"), Checkpoint.from_model(model, step))
                if step >= total:
                    break
            epoch += 1
    finally:
        if log_fh:
            log_fh.close()
    model.eval()
    return result
