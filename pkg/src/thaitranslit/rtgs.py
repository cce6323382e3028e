"""Simplified table-driven RTGS romanizer.

This is a rule-faithful approximation of the Royal Thai General System: no
pronunciation model and no word segmentation, so a name is handled as a
single word. Syllables are found by greedy longest-first matching of vowel
patterns around their onset consonant; consonants left without a written
vowel receive the inherent vowel ("a" when open, "o" when closed).
"""

from __future__ import annotations

import unicodedata
import warnings
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .kernels import levenshtein

THAI_BLOCK = (0x0E00, 0x0E7F)
SPACE = " "


class UnsupportedCharacterError(ValueError):
    """Input contains a character the romanizer cannot handle."""


class RtgsWarning(UserWarning):
    pass


@dataclass(frozen=True)
class VowelPattern:
    pattern: str
    latin: str
    final: str  # "none", "optional" or "required"

    @property
    def lead(self) -> str:
        return self.pattern.split("-")[0] if "-" in self.pattern else self.pattern

    @property
    def trail(self) -> str:
        return self.pattern.split("-", 1)[1] if "-" in self.pattern else ""

    @property
    def has_onset(self) -> bool:
        return "-" in self.pattern


@dataclass(frozen=True)
class RtgsTables:
    initial_consonants: dict
    final_consonants: dict
    clusters: dict
    vowel_patterns: tuple
    inherent_open: str
    inherent_closed: str
    tone_marks: frozenset
    ignored: frozenset
    silencer: str = "์"

    def __post_init__(self):
        for cp in range(0x0E01, 0x0E2F):
            ch = chr(cp)
            if ch not in self.initial_consonants or ch not in self.final_consonants:
                raise ValueError(f"consonant {ch!r} (U+{cp:04X}) missing from a consonant map")
        patterns = [v.pattern for v in self.vowel_patterns]
        if len(set(patterns)) != len(patterns):
            raise ValueError("duplicate vowel pattern")
        lengths = [len(p) for p in patterns]
        if lengths != sorted(lengths, reverse=True):
            raise ValueError("vowel patterns must be ordered longest first")

    @property
    def consonants(self) -> frozenset:
        return frozenset(self.initial_consonants)


def load_tables(path=None) -> RtgsTables:
    """Load a section-tagged table bundle (the shipped one by default)."""
    if path is None:
        text = resources.files("thaitranslit.data").joinpath("rtgs_tables.tsv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    initial, final, clusters, inherent = {}, {}, {}, {}
    vowels, tones, ignored = [], set(), set()
    silencer = "์"
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cells = line.split("\t") + ["", "", ""]
        section, thai, latin, extra = cells[0], cells[1], cells[2], cells[3]
        if not header_seen:
            header_seen = True
            if section == "section":
                continue
        value = "" if latin == "-" else latin
        if section == "initial":
            initial[thai] = value
        elif section == "final":
            final[thai] = value
        elif section == "cluster":
            clusters[thai] = value
        elif section == "vowel":
            if extra not in ("none", "optional", "required"):
                raise ValueError(f"line {lineno}: bad final mode {extra!r}")
            vowels.append(VowelPattern(thai, latin, extra))
        elif section == "inherent":
            inherent[thai] = latin
        elif section == "tone":
            tones.add(thai)
        elif section == "ignore":
            ignored.add(thai)
        elif section == "silencer":
            silencer = thai
        else:
            raise ValueError(f"line {lineno}: unknown section {section!r}")
    vowels.sort(key=lambda v: -len(v.pattern))
    return RtgsTables(
        initial_consonants=initial,
        final_consonants=final,
        clusters=clusters,
        vowel_patterns=tuple(vowels),
        inherent_open=inherent.get("open", "a"),
        inherent_closed=inherent.get("closed", "o"),
        tone_marks=frozenset(tones),
        ignored=frozenset(ignored),
        silencer=silencer,
    )


@lru_cache(maxsize=1)
def default_tables() -> RtgsTables:
    return load_tables()


@dataclass(frozen=True)
class Syllable:
    """One syllable span ``[start, end)`` of the original string."""

    start: int
    end: int
    onset: str = ""
    vowel: VowelPattern | None = None
    final: str = ""
    space: bool = False

    @property
    def closed(self) -> bool:
        return bool(self.final)


def _is_thai(ch: str) -> bool:
    return THAI_BLOCK[0] <= ord(ch) <= THAI_BLOCK[1]


def _effective(text: str, tables: RtgsTables) -> list[tuple[str, int]]:
    """Characters that take part in syllable matching, with original offsets.

    Tone marks and ignored signs vanish; the silencer removes its carrier
    consonant (plus an intervening i/u mark and, after an already closed
    syllable, one more consonant, as in -นทร์).
    """
    consonants = tables.consonants
    known = set(consonants) | set(tables.tone_marks) | set(tables.ignored) | {tables.silencer}
    for v in tables.vowel_patterns:
        known.update(v.pattern.replace("-", ""))
    out: list[tuple[str, int]] = []
    for i, ch in enumerate(text):
        if ch == SPACE:
            out.append((ch, i))
            continue
        if not _is_thai(ch):
            raise UnsupportedCharacterError(f"unsupported character {ch!r} at offset {i}")
        if ch in tables.tone_marks or ch in tables.ignored:
            continue
        if ch == tables.silencer:
            j = len(out) - 1
            if j >= 0 and out[j][0] in "ิุ":
                j -= 1
            if j >= 0 and out[j][0] in consonants:
                del out[j:]
                if (j >= 2 and out[j - 1][0] in consonants and out[j - 2][0] in consonants
                        and j >= 3 and out[j - 3][0] not in consonants and out[j - 3][0] != SPACE):
                    del out[j - 1:]
            continue
        if ch not in known:
            warnings.warn(f"deleting unsupported Thai sign {ch!r} (U+{ord(ch):04X})", RtgsWarning,
                          stacklevel=3)
            continue
        out.append((ch, i))
    return out


class _Matcher:
    def __init__(self, chars: list[str], tables: RtgsTables):
        self.c = chars
        self.t = tables
        self.n = len(chars)

    def at(self, i: int, s: str) -> bool:
        return "".join(self.c[i:i + len(s)]) == s

    def is_consonant(self, i: int) -> bool:
        return 0 <= i < self.n and self.c[i] in self.t.initial_consonants

    def onsets(self, j: int, allow_empty: bool):
        if j + 1 < self.n and self.c[j] + self.c[j + 1] in self.t.clusters:
            yield self.c[j] + self.c[j + 1]
        if self.is_consonant(j):
            yield self.c[j]
        elif allow_empty:
            yield ""

    def match_pattern(self, i: int, v: VowelPattern, lead_free_only=False):
        """Return (onset, end_index) for pattern ``v`` starting at ``i`` or None."""
        if not v.has_onset:
            return ("", i + len(v.pattern)) if self.at(i, v.pattern) else None
        lead, trail = v.lead, v.trail
        if lead_free_only and lead:
            return None
        if not self.at(i, lead):
            return None
        j = i + len(lead)
        for onset in self.onsets(j, allow_empty=not lead_free_only):
            k = j + len(onset)
            # แกว reads kaeo: with nothing written after the onset, -ว closes
            # the syllable unless another final follows it (แขวง)
            if not trail and len(onset) == 2 and onset[1] == "ว" and not self.final_ok(k):
                continue
            if self.at(k, trail):
                return onset, k + len(trail)
        return None

    def starts_vowel_syllable(self, k: int) -> bool:
        for v in self.t.vowel_patterns:
            m = self.match_pattern(k, v, lead_free_only=True)
            if m is None:
                continue
            if v.final == "required" and not self.final_ok(m[1]):
                continue
            return True
        return False

    def final_ok(self, k: int) -> bool:
        return self.is_consonant(k) and bool(self.t.final_consonants.get(self.c[k]))

    def take_final(self, k: int) -> bool:
        if not self.final_ok(k):
            return False
        if self.starts_vowel_syllable(k):
            return False
        # C1 C2 at the end of a word: keep them together as one closed syllable
        if self.is_consonant(k + 1) and (k + 2 == self.n or self.c[k + 2] == SPACE):
            return False
        return True

    def syllable(self, i: int):
        """Match one syllable at ``i``: (onset, vowel, final, next index) or None."""
        for v in self.t.vowel_patterns:
            m = self.match_pattern(i, v)
            if m is None:
                continue
            onset, k = m
            if v.final == "required":
                if not self.final_ok(k):
                    continue
                return onset, v, self.c[k], k + 1
            if v.final == "optional" and self.take_final(k):
                return onset, v, self.c[k], k + 1
            return onset, v, "", k
        if self.is_consonant(i):
            onset = self.c[i]
            pair = "".join(self.c[i:i + 2])
            # only silent-lead onsets (ho-hip, o-ang) bind without a written vowel
            if pair in self.t.clusters and pair[0] in "หอ":
                onset = pair
            k = i + len(onset)
            if self.take_final(k):
                return onset, None, self.c[k], k + 1
            return onset, None, "", k
        return None


def syllabify(thai: str, tables: RtgsTables | None = None) -> list[Syllable]:
    """Split ``thai`` into syllable spans covering every code point."""
    tables = tables or default_tables()
    thai = unicodedata.normalize("NFC", thai)
    eff = _effective(thai, tables)
    chars = [c for c, _ in eff]
    offsets = [o for _, o in eff]
    m = _Matcher(chars, tables)
    raw = []
    i = 0
    while i < len(chars):
        if chars[i] == SPACE:
            raw.append((offsets[i], "", None, "", True))
            i += 1
            continue
        found = m.syllable(i)
        if found is None:
            warnings.warn(f"deleting stray sign {chars[i]!r} at offset {offsets[i]}", RtgsWarning,
                          stacklevel=2)
            i += 1
            continue
        onset, vowel, final, nxt = found
        raw.append((offsets[i], onset, vowel, final, False))
        i = nxt
    spans = []
    for idx, (start, onset, vowel, final, space) in enumerate(raw):
        begin = 0 if idx == 0 else start
        end = raw[idx + 1][0] if idx + 1 < len(raw) else len(thai)
        spans.append(Syllable(begin, end, onset, vowel, final, space))
    return spans


def _onset_latin(onset: str, tables: RtgsTables) -> str:
    if len(onset) == 2:
        return tables.clusters[onset]
    return tables.initial_consonants.get(onset, "")


def syllable_latin(syl: Syllable, tables: RtgsTables) -> str:
    if syl.space:
        return SPACE
    if syl.vowel is None:
        vowel = tables.inherent_closed if syl.closed else tables.inherent_open
    else:
        vowel = syl.vowel.latin
    fin = tables.final_consonants.get(syl.final, "") if syl.final else ""
    return _onset_latin(syl.onset, tables) + vowel + fin


def _needs_hyphen(left: str, right: str) -> bool:
    if not left or not right or left == SPACE or right == SPACE:
        return False
    if right[0] in "aeiou":
        return left[-1] in "aeiou" or left.endswith("ng")
    return False


def romanize_rtgs(thai: str, tables: RtgsTables | None = None) -> str:
    """Romanize a Thai name, e.g. ``romanize_rtgs("มา") == "ma"``."""
    tables = tables or default_tables()
    parts = [syllable_latin(s, tables) for s in syllabify(thai, tables)]
    out = []
    for i, part in enumerate(parts):
        if i and _needs_hyphen(parts[i - 1], part):
            out.append("-")
        out.append(part)
    return "".join(out).lower()


def rtgs_similarity(latin_variant: str, thai: str, tables: RtgsTables | None = None) -> int:
    """Edit distance between a Latin variant and the RTGS romanization of ``thai``."""
    return levenshtein(latin_variant.lower(), romanize_rtgs(thai, tables))
