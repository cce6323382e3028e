"""Articulatory feature vectors and weighted feature edit distance.

Substitution between two segments costs the weighted share of features on
which they disagree (a +/- clash counts fully, +/0 half), so it lies in
[0, 1]; insertion and deletion cost 1. The distance therefore never exceeds
plain Levenshtein distance over the same segment sequences.

The built-in grapheme-to-phoneme provider is a deterministic toy: it exists
so the phonetic feature can be computed offline, not for linguistic accuracy.
Anything implementing :class:`G2PProvider` can replace it.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Protocol, Sequence

import numpy as np

from . import rtgs
from .kernels import weighted_edit_distance as _wed_kernel

_VALUES = {"+": 1.0, "-": -1.0, "0": 0.0}


class UnknownSegmentError(ValueError):
    """A segment or character has no entry in the relevant table."""


def _data_text(name: str) -> str:
    return resources.files("thaitranslit.data").joinpath(name).read_text("utf-8")


def _read_text(path, default_name) -> str:
    if path is None:
        return _data_text(default_name)
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _data_lines(text: str):
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            yield line.split("\t")


@dataclass(frozen=True, eq=False)
class FeatureTable:
    features: tuple[str, ...]
    segments: dict  # segment -> vector of +1/-1/0
    weights: np.ndarray
    index: dict = field(init=False, repr=False)
    subcost: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.features)
        for seg, vec in self.segments.items():
            if len(vec) != n:
                raise ValueError(f"segment {seg!r}: {len(vec)} values for {n} features")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (n,) or (w < 0).any() or not (w > 0).any():
            raise ValueError("feature weights must be non-negative with at least one positive")
        names = list(self.segments)
        mat = np.array([self.segments[s] for s in names], dtype=np.float64)
        diff = np.abs(mat[:, None, :] - mat[None, :, :]) / 2.0
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "index", {s: i for i, s in enumerate(names)})
        object.__setattr__(self, "subcost", diff @ w / w.sum())

    def __contains__(self, segment: str) -> bool:
        return segment in self.index

    def indices(self, segments: Sequence[str]) -> np.ndarray:
        try:
            return np.array([self.index[s] for s in segments], dtype=np.int64)
        except KeyError as exc:
            raise UnknownSegmentError(f"segment {exc.args[0]!r} not in feature table") from None

    def substitution_cost(self, a: str, b: str) -> float:
        ia, ib = self.indices([a, b])
        return float(self.subcost[ia, ib])


def load_feature_table(path=None, weights_path=None) -> FeatureTable:
    """Read the segment/feature TSV and an optional feature->weight TSV."""
    rows = list(_data_lines(_read_text(path, "ipa_features.tsv")))
    header, body = rows[0], rows[1:]
    features = tuple(h.strip() for h in header[1:])
    segments = {}
    for cells in body:
        seg = cells[0].strip()
        try:
            segments[seg] = tuple(_VALUES[v.strip()] for v in cells[1:])
        except KeyError as exc:
            raise ValueError(f"segment {seg!r}: bad feature value {exc.args[0]!r}") from None
    weights = {f: 1.0 for f in features}
    if weights_path is not None or path is None:
        for cells in list(_data_lines(_read_text(weights_path, "feature_weights.tsv")))[1:]:
            name = cells[0].strip()
            if name not in weights:
                raise ValueError(f"weight for unknown feature {name!r}")
            weights[name] = float(cells[1])
    return FeatureTable(features, segments, np.array([weights[f] for f in features]))


@lru_cache(maxsize=1)
def default_feature_table() -> FeatureTable:
    return load_feature_table()


def segment_ipa(ipa: str, table: FeatureTable) -> list[str]:
    """Greedy longest-match split of an IPA string into table segments.

    A match may not stop in front of a combining mark, which would strand the
    diacritic away from its base.
    """
    if not table.index:
        raise ValueError("empty feature table")
    ipa = unicodedata.normalize("NFC", ipa)
    longest = max(len(s) for s in table.index)
    out, i = [], 0
    while i < len(ipa):
        if ipa[i].isspace():
            i += 1
            continue
        for size in range(min(longest, len(ipa) - i), 0, -1):
            piece = ipa[i:i + size]
            nxt = ipa[i + size] if i + size < len(ipa) else ""
            if piece in table.index and not (nxt and unicodedata.combining(nxt)):
                out.append(piece)
                i += size
                break
        else:
            raise UnknownSegmentError(f"no segment matches {ipa[i]!r} at offset {i}")
    return out


def weighted_feature_edit_distance(a: Sequence[str], b: Sequence[str], table: FeatureTable) -> float:
    """Minimum-cost alignment of two segment sequences (unit indels)."""
    return _wed_kernel(table.indices(a), table.indices(b), table.subcost, 1.0)


# ---------------------------------------------------------------------------
# Grapheme-to-phoneme


class G2PProvider(Protocol):
    def transliterate(self, text: str, lang: str) -> list[str]:
        """IPA segments for ``text`` in language ``lang`` ("th" or "en")."""


class G2PError(UnknownSegmentError):
    pass


def _read_g2p(text: str) -> dict:
    sections: dict = {}
    rows = list(_data_lines(text))
    for cells in rows[1:]:
        section, grapheme, ipa = cells[0], cells[1], cells[2].strip()
        segs = [] if ipa == "-" else ipa.split()
        sections.setdefault(section, {})[grapheme] = segs
    return sections


class TableG2P:
    """Table-driven G2P.

    Thai goes through the romanizer's syllable parser and maps onset, vowel
    pattern and final separately; English is greedy longest match over
    letters and digraphs.
    """

    def __init__(self, thai_tables: dict, english_table: dict, rtgs_tables=None):
        self.thai = thai_tables
        self.english = english_table
        self.rtgs_tables = rtgs_tables or rtgs.default_tables()
        self._longest_en = max(len(g) for g in english_table)

    def transliterate(self, text: str, lang: str) -> list[str]:
        if lang == "th":
            return self._thai(text)
        if lang == "en":
            return self._english(text)
        raise G2PError(f"unsupported language tag {lang!r}")

    def _lookup(self, section: str, key: str, text: str) -> list[str]:
        try:
            return self.thai[section][key]
        except KeyError:
            raise G2PError(f"{text!r}: no {section} pronunciation for {key!r}") from None

    def _thai(self, text: str) -> list[str]:
        try:
            syllables = rtgs.syllabify(text, self.rtgs_tables)
        except rtgs.UnsupportedCharacterError as exc:
            raise G2PError(f"{text!r}: {exc}") from None
        out: list[str] = []
        for syl in syllables:
            if syl.space:
                continue
            if len(syl.onset) == 2:
                out += self._lookup("cluster", syl.onset, text)
            elif syl.onset:
                out += self._lookup("initial", syl.onset, text)
            if syl.vowel is None:
                out += self._lookup("inherent", "closed" if syl.closed else "open", text)
            else:
                out += self._lookup("vowel", syl.vowel.pattern, text)
            if syl.final:
                out += self._lookup("final", syl.final, text)
        return out

    def _english(self, text: str) -> list[str]:
        text = text.lower()
        out, i = [], 0
        while i < len(text):
            for size in range(min(self._longest_en, len(text) - i), 0, -1):
                segs = self.english.get(text[i:i + size])
                if segs is not None:
                    out += segs
                    i += size
                    break
            else:
                raise G2PError(f"{text!r}: no pronunciation for {text[i]!r} at offset {i}")
        return out


def builtin_toy_g2p() -> TableG2P:
    thai = _read_g2p(_data_text("g2p_th.tsv"))
    english = _read_g2p(_data_text("g2p_en.tsv"))["letter"]
    return TableG2P(thai, english)


def phonetic_distance(thai: str, latin: str, g2p: G2PProvider | None = None,
                      table: FeatureTable | None = None) -> float:
    """Feature edit distance between Thai and English-rule pronunciations,
    divided by the longer segment sequence."""
    g2p = g2p or builtin_toy_g2p()
    table = table or default_feature_table()
    a = g2p.transliterate(thai, "th")
    b = g2p.transliterate(latin, "en")
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return weighted_feature_edit_distance(a, b, table) / longest
