import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import levenshtein_recursive, weighted_recursive
from thaitranslit.phonetics import (
    FeatureTable,
    G2PError,
    UnknownSegmentError,
    builtin_toy_g2p,
    default_feature_table,
    load_feature_table,
    phonetic_distance,
    segment_ipa,
    weighted_feature_edit_distance,
)

TABLE = default_feature_table()
SEGMENTS = sorted(TABLE.index)
seqs = st.lists(st.sampled_from(SEGMENTS), max_size=6)


def test_table_shape():
    assert len(TABLE.features) >= 20
    vecs = {tuple(TABLE.segments[s]) for s in SEGMENTS}
    assert len(vecs) == len(SEGMENTS)


def test_substitution_costs():
    sub = TABLE.subcost
    assert np.all(np.diag(sub) == 0)
    off = sub[~np.eye(len(sub), dtype=bool)]
    assert off.min() > 0 and off.max() <= 1
    assert np.allclose(sub, sub.T)


def test_distance_examples():
    d = weighted_feature_edit_distance
    assert d(["p", "a"], ["p", "a"], TABLE) == 0.0
    assert d(["p"], ["b"], TABLE) < d(["p"], ["a"], TABLE)
    assert d(["p", "a"], ["a"], TABLE) == 1.0
    assert d([], ["p", "a"], TABLE) == 2.0


def test_p_b_differ_in_voicing_only():
    diff = [f for f, x, y in zip(TABLE.features, TABLE.segments["p"], TABLE.segments["b"]) if x != y]
    assert diff == ["voi"]
    assert TABLE.substitution_cost("p", "b") == pytest.approx(1 / len(TABLE.features))


@given(seqs, seqs)
def test_matches_recursive_oracle(a, b):
    expect = weighted_recursive(tuple(a), tuple(b), TABLE.substitution_cost)
    assert weighted_feature_edit_distance(a, b, TABLE) == pytest.approx(expect, abs=1e-12)


@given(seqs, seqs, seqs)
def test_metric_properties(a, b, c):
    d = lambda x, y: weighted_feature_edit_distance(x, y, TABLE)  # noqa: E731
    assert d(a, b) == pytest.approx(d(b, a), abs=1e-12)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-9
    assert (d(a, b) == 0) == (a == b)
    assert d(a, b) <= levenshtein_recursive(tuple(a), tuple(b))


@given(st.lists(st.sampled_from(SEGMENTS), min_size=1, max_size=6), st.data())
def test_fixing_a_segment_reduces_distance(a, data):
    i = data.draw(st.integers(0, len(a) - 1))
    other = data.draw(st.sampled_from([s for s in SEGMENTS if s != a[i]]))
    b = list(a)
    b[i] = other
    assert weighted_feature_edit_distance(a, a, TABLE) < weighted_feature_edit_distance(a, b, TABLE)


def test_segment_ipa():
    assert segment_ipa("pa", TABLE) == ["p", "a"]
    assert segment_ipa("tʰa", TABLE) == ["tʰ", "a"]
    with pytest.raises(UnknownSegmentError, match="offset 1"):
        segment_ipa("pq", TABLE)


def test_weights_file_override(tmp_path):
    feats = tmp_path / "f.tsv"
    feats.write_text("seg\tvoi\tnas\np\t-\t-\nb\t+\t-\nm\t+\t+\n", encoding="utf-8")
    weights = tmp_path / "w.tsv"
    weights.write_text("feature\tweight\nvoi\t3\nnas\t1\n", encoding="utf-8")
    t = load_feature_table(feats, weights)
    assert t.substitution_cost("p", "b") == pytest.approx(0.75)
    assert t.substitution_cost("b", "m") == pytest.approx(0.25)
    assert load_feature_table(feats).substitution_cost("p", "b") == pytest.approx(0.5)


def test_bad_weights_rejected():
    with pytest.raises(ValueError):
        FeatureTable(("a",), {"x": (1.0,)}, np.array([0.0]))


def test_toy_g2p():
    g2p = builtin_toy_g2p()
    assert g2p.transliterate("ma", "en") == ["m", "ɑː"]
    assert g2p.transliterate("", "en") == []
    assert g2p.transliterate("นา", "th") == ["n", "aː"]
    assert len(g2p.thai["initial"]) + len(g2p.thai["vowel"]) >= 40
    assert len(g2p.english) >= 30
    with pytest.raises(G2PError):
        g2p.transliterate("m4", "en")
    with pytest.raises(G2PError):
        g2p.transliterate("ma", "fr")


def test_phonetic_distance_ma():
    # one substitution (aː vs ɑː differ only in backness) over two segments
    cost = TABLE.substitution_cost("aː", "ɑː")
    assert phonetic_distance("มา", "ma") == pytest.approx(cost / 2)
    assert 0 < phonetic_distance("มา", "ma") < 0.1


def test_phonetic_distance_zero_and_symmetric():
    class Fixed:
        def transliterate(self, text, lang):
            return {"x": ["p", "a"], "y": ["b", "a", "n"]}[text]

    assert phonetic_distance("x", "x", Fixed()) == 0.0
    a = weighted_feature_edit_distance(["p", "a"], ["b", "a", "n"], TABLE)
    assert phonetic_distance("x", "y", Fixed()) == pytest.approx(a / 3)
    assert phonetic_distance("y", "x", Fixed()) == pytest.approx(a / 3)
