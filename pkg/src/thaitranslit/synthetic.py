"""Deterministic synthetic fixtures: toy Thai names and a separable labeled set."""

from __future__ import annotations

import random

from .core_data import CandidateRecord, LabeledRecord, NamePair
from .rtgs import romanize_rtgs

_ONSETS = "กขคงจชดตทนบปพมยรลวสห"
_VOWELS = ("-า", "-ิ", "-ี", "-ุ", "-ู", "เ-", "แ-", "โ-", "-ัน", "-ม")
_FINALS = ("", "", "", "น", "ม", "ง", "ก", "ด")

TOY_SEED = 20240


def _syllable(rng: random.Random) -> str:
    onset = rng.choice(_ONSETS)
    vowel = rng.choice(_VOWELS)
    if vowel in ("-ัน", "-ม"):
        return vowel.replace("-", onset)
    fin = rng.choice(_FINALS) if vowel in ("-า", "-ิ", "-ุ") else ""
    return vowel.replace("-", onset) + fin


def toy_names(n: int = 100, seed: int = TOY_SEED) -> list[NamePair]:
    """``n`` distinct two-syllable names romanized with the built-in tables.

    Names whose romanization collides with an earlier one are skipped so the
    mapping stays a function.
    """
    rng = random.Random(seed)
    out = [NamePair("อนันต์", "anan")][:n]
    seen_thai, seen_latin = {p.thai for p in out}, {p.latin for p in out}
    while len(out) < n:
        thai = _syllable(rng) + _syllable(rng)
        if thai in seen_thai:
            continue
        latin = romanize_rtgs(thai)
        if latin in seen_latin or "-" in latin:
            continue
        seen_thai.add(thai)
        seen_latin.add(latin)
        out.append(NamePair(thai, latin))
    return out


def separable_labeled(n: int = 200, seed: int = 7) -> list[LabeledRecord]:
    """Half positives, half negatives; phonetic distance and RTGS similarity
    separate them with a margin, the other features are noise."""
    rng = random.Random(seed)
    names = toy_names(n + 1, seed=seed)[1:]
    out = []
    for i, pair in enumerate(names):
        label = i % 2
        if label:
            dist, sim = rng.uniform(0.0, 0.3), rng.randint(0, 2)
        else:
            dist, sim = rng.uniform(0.45, 1.0), rng.randint(4, 10)
        rec = CandidateRecord(
            pair=pair,
            cnt_th=rng.randint(1, 50),
            cnt_latin=rng.randint(1, 50),
            phonetic_distance=round(dist, 6),
            rtgs_similarity=sim,
            collocations=rng.randint(0, 5),
            collocations2=rng.randint(0, 5),
            collocations3=rng.randint(0, 5),
            google=rng.randint(0, 1),
            azure=rng.randint(0, 1),
        )
        out.append(LabeledRecord(rec, label))
    return out


def write_fixtures(data_dir) -> None:
    import os

    from .core_data import write_labeled, write_pairs

    write_pairs(os.path.join(data_dir, "toy_pairs.tsv"), toy_names())
    write_labeled(os.path.join(data_dir, "toy_labeled.tsv"), separable_labeled())


if __name__ == "__main__":
    import sys

    write_fixtures(sys.argv[1] if len(sys.argv) > 1 else ".")
