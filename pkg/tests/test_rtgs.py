import re
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thaitranslit.rtgs import (
    RtgsWarning,
    UnsupportedCharacterError,
    default_tables,
    romanize_rtgs,
    rtgs_similarity,
    syllabify,
    syllable_latin,
)

KNOWN = {
    "มา": "ma",
    "มานี": "mani",
    "สมชาย": "somchai",
    "แก้ว": "kaeo",
    "แขวง": "khwaeng",
    "แสงเดือน": "saengduean",
    "จันทร์": "chan",
    "อนันต์": "anan",
    "กานดา": "kanda",
    "สุดา": "suda",
    "วิชัย": "wichai",
    "บุญมี": "bunmi",
    "ประเสริฐ": "prasoet",
    "สมศักดิ์": "somsak",
    "กมล": "kamon",
    "ชัยวัฒน์": "chaiwat",
    "ทองดี": "thongdi",
    "ศรีสุข": "sisuk",
    "อรุณ": "arun",
    "แม": "mae",
}


@pytest.mark.parametrize("thai,latin", sorted(KNOWN.items()))
def test_known_romanizations(thai, latin):
    assert romanize_rtgs(thai) == latin


def test_syllable_spans():
    assert len(syllabify("มา")) == 1
    assert (syllabify("มา")[0].start, syllabify("มา")[0].end) == (0, 2)
    assert len(syllabify("มานี")) == 2
    assert syllabify("") == []


@pytest.mark.parametrize("text", ["สมชาย", "แสงเดือน", "ประเสริฐ", "มา นี"])
def test_spans_cover_input(text):
    spans = syllabify(text)
    assert spans[0].start == 0 and spans[-1].end == len(text)
    assert all(a.end == b.start for a, b in zip(spans, spans[1:]))


def test_ae_vowel():
    assert romanize_rtgs("แม").endswith("ae")


def test_non_thai_rejected():
    with pytest.raises(UnsupportedCharacterError):
        romanize_rtgs("ké")


def test_unknown_sign_warns_and_is_deleted():
    with pytest.warns(RtgsWarning):
        assert romanize_rtgs("มาฯ") == "ma"


def test_hyphen_between_vowels():
    # two open syllables where the second starts with a vowel letter
    assert romanize_rtgs("ปิยะอร") == "piya-on"


def test_similarity_examples():
    assert rtgs_similarity("ma", "มา") == 0
    assert rtgs_similarity("mo", "มา") == 1
    assert rtgs_similarity("mar", "มา") == 1
    assert rtgs_similarity("MA", "มา") == 0


_syllables = ["มา", "นี", "ก", "สม", "ชาย", "แก", "เดือน", "ดา", "วิ", "ชัย", "ทอง", "สุ", "ข", "บุญ", "ประ"]
names = st.lists(st.sampled_from(_syllables), min_size=1, max_size=4).map("".join)


@given(names)
def test_output_alphabet(name):
    assert re.fullmatch(r"[a-z-]+", romanize_rtgs(name))


@given(names, st.lists(st.sampled_from("่้๊๋"), min_size=1, max_size=3), st.integers(0, 10))
def test_tone_marks_ignored(name, tones, at):
    at = min(at, len(name))
    marked = name[:at] + "".join(tones) + name[at:]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RtgsWarning)
        assert romanize_rtgs(marked) == romanize_rtgs(name)


@given(names)
def test_every_syllable_non_empty(name):
    tables = default_tables()
    assert all(syllable_latin(s, tables) for s in syllabify(name))


@given(names)
def test_deterministic(name):
    assert romanize_rtgs(name) == romanize_rtgs(name)


def test_tables_cover_consonants():
    t = default_tables()
    for cp in range(0x0E01, 0x0E2F):
        assert chr(cp) in t.initial_consonants and chr(cp) in t.final_consonants
    lengths = [len(v.pattern) for v in t.vowel_patterns]
    assert lengths == sorted(lengths, reverse=True)
