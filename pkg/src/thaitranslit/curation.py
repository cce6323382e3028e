"""Training-set assembly from scored candidates.

Order of operations: drop evaluation leaks, keep ``p >= cutoff``, split, then
give each training pair an integer weight from its probability bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core_data import (
    EmptyDatasetError,
    NamePair,
    SplitSpec,
    WeightedPair,
    normalize_thai,
    remove_leaks,
    split_dataset,
)


class CurationError(ValueError):
    pass


@dataclass(frozen=True)
class CurationConfig:
    cutoff: float = 0.95
    split: SplitSpec = field(default_factory=SplitSpec)
    weight_min: int = 1
    weight_max: int = 20
    bin_lo: float = 0.95
    bin_hi: float = 1.0

    def __post_init__(self):
        if not self.bin_lo < self.bin_hi:
            raise CurationError("bin_lo must be below bin_hi")
        if not 1 <= self.weight_min <= self.weight_max:
            raise CurationError("need 1 <= weight_min <= weight_max")
        if self.cutoff != self.bin_lo:
            raise CurationError("the cutoff must equal bin_lo")


def upsample_weight(p: float, config: CurationConfig | None = None) -> int:
    """Integer weight for probability ``p``: equal-width bins over [bin_lo, bin_hi]."""
    c = config or CurationConfig()
    if not p >= c.cutoff:
        raise CurationError(f"probability {p} is below the cutoff {c.cutoff}")
    n_bins = c.weight_max - c.weight_min + 1
    # the small epsilon keeps grid points such as 0.975 from flooring one bin low
    pos = (p - c.bin_lo) / (c.bin_hi - c.bin_lo) * n_bins
    return min(c.weight_max, c.weight_min + math.floor(pos + 1e-9))


@dataclass
class CurationResult:
    train: list
    valid: list
    test: list
    summary: dict


def curate(scored: Iterable, eval_thai_names: Iterable[str],
           config: CurationConfig | None = None) -> CurationResult:
    """Curate ``(record_or_pair, probability)`` items into weighted train and plain valid/test."""
    config = config or CurationConfig()
    items = [(getattr(rec, "pair", rec), float(p)) for rec, p in scored]
    summary = {"input": len(items)}
    kept = remove_leaks(items, eval_thai_names)
    summary["after_leak_removal"] = len(kept)
    kept = [(pair, p) for pair, p in kept if p >= config.cutoff]
    summary["after_cutoff"] = len(kept)
    if not kept:
        raise EmptyDatasetError(f"nothing left after the cutoff (stage counts: {summary})")
    train, valid, test = split_dataset(kept, config.split)
    weighted = [WeightedPair(pair, p, upsample_weight(p, config)) for pair, p in train]
    summary.update(
        train=len(weighted),
        valid=len(valid),
        test=len(test),
        train_weight_total=sum(w.weight for w in weighted),
    )
    return CurationResult(weighted, [pair for pair, _ in valid], [pair for pair, _ in test], summary)


def training_rows(train: Sequence[WeightedPair], mode: str = "replicate") -> list[tuple]:
    if mode == "replicate":
        return [(w.pair.thai, w.pair.latin) for w in train for _ in range(w.weight)]
    if mode == "weight-column":
        return [(w.pair.thai, w.pair.latin, w.weight) for w in train]
    raise CurationError(f"unknown mode {mode!r} (expected replicate or weight-column)")


def materialize_training_file(path, train: Sequence[WeightedPair], mode: str = "replicate") -> int:
    """Write the training TSV; returns the number of data rows."""
    rows = training_rows(train, mode)
    header = ("thai", "latin") if mode == "replicate" else ("thai", "latin", "weight")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(str(c) for c in row) + "\n")
    return len(rows)


def leaked(pairs: Iterable[NamePair], eval_thai_names: Iterable[str]) -> list[NamePair]:
    banned = {normalize_thai(n) for n in eval_thai_names}
    return [p for p in pairs if p.thai in banned]
