"""String distances and evaluation metrics.

All sequence metrics work on Unicode code points. Evaluation-level helpers
(accuracies, corpus CER/BLEU, :func:`evaluate_predictions`) compare
case-insensitively.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .kernels import levenshtein

__all__ = [
    "EvalReport",
    "ThresholdMetrics",
    "any_token_accuracy",
    "binary_metrics",
    "cer",
    "char_bleu",
    "corpus_bleu",
    "corpus_cer",
    "evaluate_predictions",
    "first_token_accuracy",
    "levenshtein",
    "roc_auc",
]

MAX_ORDER = 4


class MetricError(ValueError):
    pass


def _check_lengths(a, b, what="predictions/references"):
    if len(a) != len(b):
        raise MetricError(f"length mismatch for {what}: {len(a)} != {len(b)}")


def _as_refs(ref) -> list[str]:
    return [ref] if isinstance(ref, str) else list(ref)


def cer(prediction: str, reference: str) -> float:
    if not reference:
        raise MetricError("CER is undefined for an empty reference")
    return levenshtein(prediction, reference) / len(reference)


def _closest(prediction: str, refs: Sequence[str]) -> tuple[int, str]:
    best = None
    for r in refs:
        d = levenshtein(prediction, r)
        if best is None or d < best[0] or (d == best[0] and len(r) < len(best[1])):
            best = (d, r)
    return best


def corpus_cer(predictions: Sequence[str], references: Sequence) -> float:
    """Total edits over total reference length; each item uses its closest reference."""
    _check_lengths(predictions, references)
    if not predictions:
        raise MetricError("corpus CER needs at least one item")
    edits = chars = 0
    for pred, ref in zip(predictions, references):
        refs = [r.lower() for r in _as_refs(ref)]
        d, r = _closest(pred.lower(), refs)
        edits += d
        chars += len(r)
    if chars == 0:
        raise MetricError("CER is undefined for empty references")
    return edits / chars


# ---------------------------------------------------------------------------
# BLEU over characters


def _ngrams(text: str, n: int) -> Counter:
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def _bleu_stats(prediction: str, references: Sequence[str]):
    """(matches[n], totals[n], candidate length, closest reference length)."""
    matches, totals = [], []
    for n in range(1, MAX_ORDER + 1):
        cand = _ngrams(prediction, n)
        max_ref = Counter()
        for ref in references:
            for gram, count in _ngrams(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        matches.append(sum(min(c, max_ref[g]) for g, c in cand.items()))
        totals.append(max(len(prediction) - n + 1, 0))
    c = len(prediction)
    r = min((len(ref) for ref in references), key=lambda L: (abs(L - c), L))
    return matches, totals, c, r


def _bleu_from_stats(matches, totals, c, r) -> float:
    if c == 0:
        return 0.0
    log_p = 0.0
    orders = 0
    for m, t in zip(matches, totals):
        if t == 0:
            continue
        # zero matches -> 1 / (2 * candidate n-gram count)
        p = m / t if m > 0 else 1.0 / (2.0 * t)
        log_p += math.log(p)
        orders += 1
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return 100.0 * bp * math.exp(log_p / orders)


def char_bleu(prediction: str, references: Sequence[str]) -> float:
    """Sentence BLEU over character 1-4 grams, on a 0-100 scale.

    N-gram orders longer than the prediction are left out of the geometric
    mean, so a one-character exact match still scores 100.
    """
    refs = [r for r in _as_refs(references) if r]
    if not refs:
        raise MetricError("BLEU needs at least one non-empty reference")
    return _bleu_from_stats(*_bleu_stats(prediction, refs))


def corpus_bleu(predictions: Sequence[str], references: Sequence) -> float:
    """Corpus BLEU: clipped counts and lengths summed over items before combining."""
    _check_lengths(predictions, references)
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    c_sum = r_sum = 0
    for pred, ref in zip(predictions, references):
        refs = [r.lower() for r in _as_refs(ref) if r]
        if not refs:
            raise MetricError("BLEU needs at least one non-empty reference")
        m, t, c, r = _bleu_stats(pred.lower(), refs)
        matches = [a + b for a, b in zip(matches, m)]
        totals = [a + b for a, b in zip(totals, t)]
        c_sum += c
        r_sum += r
    return _bleu_from_stats(matches, totals, c_sum, r_sum)


# ---------------------------------------------------------------------------
# Token accuracies


def _refs_of(item) -> set[str]:
    refs = item.references if hasattr(item, "references") else _as_refs(item)
    return {r.lower() for r in refs}


def first_token_accuracy(top1: Sequence[str], items: Sequence) -> float:
    _check_lengths(top1, items, "top1/items")
    if not items:
        raise MetricError("accuracy needs at least one item")
    hits = sum(1 for pred, item in zip(top1, items) if pred.lower() in _refs_of(item))
    return hits / len(items)


def any_token_accuracy(top3: Sequence[Sequence[str]], items: Sequence) -> float:
    _check_lengths(top3, items, "top3/items")
    if not items:
        raise MetricError("accuracy needs at least one item")
    hits = 0
    for preds, item in zip(top3, items):
        if len(preds) > 3:
            raise MetricError(f"at most 3 predictions per item, got {len(preds)}")
        if {p.lower() for p in preds} & _refs_of(item):
            hits += 1
    return hits / len(items)


@dataclass(frozen=True)
class EvalReport:
    first_token_accuracy: float
    any_token_accuracy: float
    cer: float
    bleu: float
    n_items: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        return "\n".join(f"{k}: {format_float(v)}" for k, v in self.to_dict().items()) + "\n"

    def to_json(self, extra: dict | None = None) -> str:
        doc = self.to_dict()
        if extra:
            doc = {**extra, "report": doc}
        return dumps_stable(doc)


def evaluate_predictions(ranked: Sequence[Sequence[str]], items: Sequence) -> EvalReport:
    """Score ranked candidate lists (best first) against evaluation items."""
    _check_lengths(ranked, items, "predictions/items")
    top1 = [preds[0] if preds else "" for preds in ranked]
    top3 = [list(preds[:3]) for preds in ranked]
    refs = [list(item.references) for item in items]
    return EvalReport(
        first_token_accuracy=first_token_accuracy(top1, items),
        any_token_accuracy=any_token_accuracy(top3, items),
        cer=corpus_cer(top1, refs),
        bleu=corpus_bleu(top1, refs),
        n_items=len(items),
    )


# ---------------------------------------------------------------------------
# Binary classification


@dataclass(frozen=True)
class ThresholdMetrics:
    threshold: float
    precision: float
    recall: float
    f1: float
    accuracy: float
    auc: float

    def to_dict(self) -> dict:
        return asdict(self)


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC with mid-rank tie correction."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC is undefined unless both classes are present")
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(len(scores))
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def binary_metrics(scores, labels, threshold: float, auc: float | None = None) -> ThresholdMetrics:
    """Confusion-table metrics at ``threshold`` (positive iff score >= threshold).

    Precision is 1.0 when nothing is predicted positive. Pass ``auc`` to reuse
    a precomputed value.
    """
    _check_lengths(scores, labels, "scores/labels")
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if auc is None:
        auc = roc_auc(scores, labels)
    pred = scores >= threshold
    tp = int(np.sum(pred & (labels == 1)))
    fp = int(np.sum(pred & (labels == 0)))
    fn = int(np.sum(~pred & (labels == 1)))
    tn = int(np.sum(~pred & (labels == 0)))
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ThresholdMetrics(
        threshold=float(threshold),
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=(tp + tn) / len(labels),
        auc=auc,
    )


# ---------------------------------------------------------------------------
# Stable output formatting


def format_float(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _round_floats(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(format(obj, ".6g"))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def dumps_stable(doc) -> str:
    """JSON with sorted keys and floats cut to 6 significant digits."""
    return json.dumps(_round_floats(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
