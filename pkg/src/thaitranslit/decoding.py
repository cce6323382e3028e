"""Greedy and beam-search decoding.

Decoders talk to a *step scorer*: given a batch of generated prefixes (all of
equal length) it returns next-token log-probabilities. :class:`ModelScorer`
adapts a transformer; anything else exposing ``scorer(source_ids)`` (a toy
table model in tests, say) plugs in the same way.

Beam search keeps ``beam_width`` live hypotheses ranked by summed
log-probability. Each live hypothesis proposes its ``beam_width`` best next
tokens; eos proposals move to the finished pool, the rest compete for the
next live set. Finished hypotheses are ranked by
``logprob / len ** length_penalty`` with eos counted in ``len``; ties go to
the lexicographically smaller id sequence. The search stops when nothing is
alive, after ``max_length`` tokens, or once the k-th best finished score is
at least ``logprob / max_length ** length_penalty`` for every live
hypothesis. Log-probabilities are never positive, so that quantity bounds
every completion of a live hypothesis and the early stop loses nothing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
import torch

from .model.tokenizer import EOS_ID, PAD_ID, ByteTokenizer
from .model.transformer import Seq2SeqTransformer


class DecodingError(ValueError):
    pass


class StepScorer(Protocol):
    vocab_size: int

    def log_probs(self, prefixes: Sequence[Sequence[int]]) -> np.ndarray:
        """(len(prefixes), vocab_size) next-token log-probabilities."""


@dataclass(frozen=True)
class BeamConfig:
    beam_width: int = 5
    k: int = 3
    max_length: int = 64
    length_penalty: float = 1.0

    def __post_init__(self):
        if self.beam_width < 1 or self.k < 1:
            raise DecodingError("beam_width and k must be >= 1")
        if self.k > self.beam_width:
            raise DecodingError(f"k ({self.k}) cannot exceed beam_width ({self.beam_width})")
        if self.max_length < 2:
            raise DecodingError("max_length must be >= 2")


@dataclass(frozen=True)
class Hypothesis:
    ids: tuple
    logprob: float
    score: float
    finished: bool


class ModelScorer:
    """Runs the encoder once and re-decodes the whole prefix at each step."""

    def __init__(self, model: Seq2SeqTransformer, source_ids: Sequence[int]):
        self.model = model
        self.vocab_size = model.config.vocab_size
        src = torch.tensor([list(source_ids)], dtype=torch.long)
        with torch.no_grad():
            self.memory, self.mask = model.encode(src)

    @torch.no_grad()
    def log_probs(self, prefixes):
        n = len(prefixes)
        dec_in = torch.tensor([[PAD_ID] + list(p) for p in prefixes], dtype=torch.long)
        memory = self.memory.expand(n, -1, -1)
        mask = self.mask.expand(n, -1, -1, -1)
        logits = self.model.decode(memory, mask, dec_in)[:, -1, :]
        return torch.log_softmax(logits.double(), dim=-1).numpy()


def as_scorer(model, source_ids) -> StepScorer:
    if isinstance(model, Seq2SeqTransformer):
        if model.training:
            raise DecodingError("put the model in eval mode before decoding")
        return ModelScorer(model, source_ids)
    if hasattr(model, "scorer"):
        return model.scorer(source_ids)
    raise DecodingError(f"cannot decode with {type(model).__name__}")


def greedy_decode(model, source_ids, max_length: int = 64) -> list[int]:
    """Argmax decoding (lowest id on ties); the result ends in eos unless cut at max_length."""
    scorer = as_scorer(model, source_ids)
    out: list[int] = []
    while len(out) < max_length:
        tok = int(np.argmax(scorer.log_probs([out])[0]))
        out.append(tok)
        if tok == EOS_ID:
            break
    return out


@torch.no_grad()
def greedy_decode_batch(model: Seq2SeqTransformer, sources: Sequence[Sequence[int]],
                        max_length: int = 64) -> list[list[int]]:
    """Batched greedy decoding for validation; pads sources with pad ids."""
    if not sources:
        return []
    width = max(len(s) for s in sources)
    src = torch.tensor([list(s) + [PAD_ID] * (width - len(s)) for s in sources], dtype=torch.long)
    memory, mask = model.encode(src)
    dec = torch.full((len(sources), 1), PAD_ID, dtype=torch.long)
    done = torch.zeros(len(sources), dtype=torch.bool)
    for _ in range(max_length):
        nxt = model.decode(memory, mask, dec)[:, -1, :].argmax(-1)
        nxt = torch.where(done, torch.full_like(nxt, PAD_ID), nxt)
        dec = torch.cat([dec, nxt[:, None]], dim=1)
        done |= nxt == EOS_ID
        if done.all():
            break
    out = []
    for row in dec[:, 1:].tolist():
        if EOS_ID in row:
            row = row[:row.index(EOS_ID) + 1]
        out.append(row)
    return out


def _normalized(logprob: float, length: int, penalty: float) -> float:
    return logprob / (length ** penalty)


def beam_decode(model, source_ids, config: BeamConfig | None = None) -> list[Hypothesis]:
    """Top ``config.k`` hypotheses, best first."""
    config = config or BeamConfig()
    scorer = as_scorer(model, source_ids)
    W = config.beam_width
    alive: list[tuple[tuple, float]] = [((), 0.0)]
    finished: list[tuple[tuple, float]] = []
    for _ in range(config.max_length):
        lp = scorer.log_probs([ids for ids, _ in alive])
        proposals = []
        for (ids, score), row in zip(alive, lp):
            # stable sort on -logprob puts the lowest id first among ties
            for tok in np.argsort(-row, kind="stable")[:W]:
                tok = int(tok)
                proposals.append((ids + (tok,), score + float(row[tok])))
        finished += [p for p in proposals if p[0][-1] == EOS_ID]
        rest = sorted((p for p in proposals if p[0][-1] != EOS_ID), key=lambda p: (-p[1], p[0]))
        alive = rest[:W]
        if not alive:
            break
        if len(finished) >= config.k:
            kth = sorted(_normalized(sc, len(ids), config.length_penalty) for ids, sc in finished)[-config.k]
            best_alive = max(sc for _, sc in alive) / config.max_length ** config.length_penalty
            if kth >= best_alive:
                break

    def rank(pool, done):
        hyps = [Hypothesis(ids, s, _normalized(s, len(ids), config.length_penalty), done) for ids, s in pool]
        return sorted(hyps, key=lambda h: (-h.score, h.ids))

    result = rank(finished, True)[:config.k]
    if len(result) < config.k:
        result += rank(alive, False)[:config.k - len(result)]
        result.sort(key=lambda h: (-h.score, h.ids))
    return result


def transliterate(model, thai: str, config: BeamConfig | None = None,
                  tokenizer: ByteTokenizer | None = None) -> list[tuple[str, float]]:
    """Ranked, de-duplicated Latin candidates for ``thai``."""
    config = config or BeamConfig()
    tokenizer = tokenizer or ByteTokenizer()
    out: dict[str, float] = {}
    for hyp in beam_decode(model, tokenizer.encode(thai), config):
        try:
            text = tokenizer.decode(hyp.ids)
        except UnicodeDecodeError:
            warnings.warn(f"dropping a candidate for {thai!r}: invalid UTF-8", RuntimeWarning, stacklevel=2)
            continue
        out.setdefault(text, hyp.score)
    return list(out.items())[:config.k]
