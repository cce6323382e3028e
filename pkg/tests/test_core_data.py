import pytest
from hypothesis import given
from hypothesis import strategies as st

from thaitranslit.core_data import (
    CANDIDATE_COLUMNS,
    FEATURE_ORDER,
    CandidateRecord,
    DataError,
    EmptyDatasetError,
    EvalItem,
    NamePair,
    ParseError,
    SchemaError,
    SplitSpec,
    read_candidates,
    read_eval,
    read_pairs,
    remove_leaks,
    split_dataset,
    write_candidates,
    write_eval,
)

ROW = ["มา", "Ma", 3, 4, 0.25, 1, 0, 0, 0, 1, 0]


def test_namepair_normalizes():
    p = NamePair("มา", "MA")
    assert p.latin == "ma"
    with pytest.raises(DataError):
        NamePair("ma", "ma")
    with pytest.raises(DataError):
        NamePair("", "ma")


def test_namepair_nfc():
    import unicodedata

    s = unicodedata.normalize("NFD", "น้ำ")
    assert NamePair(s, "nam").thai == unicodedata.normalize("NFC", s)


def test_feature_vector_order():
    rec = CandidateRecord(NamePair("มา", "ma"), cnt_th=1, cnt_latin=2, phonetic_distance=0.5,
                          rtgs_similarity=3, collocations=4, collocations2=5, collocations3=6, google=1, azure=0)
    assert FEATURE_ORDER[0] == "cnt_th"
    assert rec.feature_vector() == [1, 0.5, 2, 3, 6, 5, 4, 1, 0]


def test_record_rejects_bad_flags():
    with pytest.raises(DataError):
        CandidateRecord(NamePair("มา", "ma"), google=2)
    with pytest.raises(DataError):
        CandidateRecord(NamePair("มา", "ma"), cnt_th=-1)


def test_read_candidates_one_row(tsv):
    recs = read_candidates(tsv(CANDIDATE_COLUMNS, [ROW]))
    assert len(recs) == 1
    assert recs[0].pair.latin == "ma"
    assert recs[0].google == 1


def test_missing_column_named(tsv):
    header = [c for c in CANDIDATE_COLUMNS if c != "cnt_th"]
    row = [v for c, v in zip(CANDIDATE_COLUMNS, ROW) if c != "cnt_th"]
    with pytest.raises(SchemaError, match="cnt_th"):
        read_candidates(tsv(header, [row]))


def test_bad_number_cites_row(tsv):
    row = list(ROW)
    row[4] = "abc"
    with pytest.raises(ParseError, match="row 2"):
        read_candidates(tsv(CANDIDATE_COLUMNS, [row]))


def test_non_integer_count_rejected(tsv):
    row = list(ROW)
    row[2] = "1.5"
    with pytest.raises(ParseError):
        read_candidates(tsv(CANDIDATE_COLUMNS, [row]))


records = st.builds(
    CandidateRecord,
    pair=st.sampled_from([NamePair("มา", "ma"), NamePair("สมชาย", "somchai"), NamePair("นา", "Na")]),
    cnt_th=st.integers(0, 10**6),
    cnt_latin=st.integers(0, 10**6),
    phonetic_distance=st.floats(0, 10, allow_nan=False),
    rtgs_similarity=st.integers(0, 30),
    collocations=st.integers(0, 50),
    collocations2=st.integers(0, 50),
    collocations3=st.integers(0, 50),
    google=st.integers(0, 1),
    azure=st.integers(0, 1),
)


@given(st.lists(records, max_size=8))
def test_candidate_roundtrip(tmp_path_factory, recs):
    path = tmp_path_factory.mktemp("rt") / "c.tsv"
    write_candidates(path, recs)
    assert read_candidates(path) == recs


def test_eval_roundtrip_and_limits(tmp_path):
    items = [EvalItem("มา", ("Ma", "maa")), EvalItem("นา", ("na",))]
    write_eval(tmp_path / "e.tsv", items)
    assert read_eval(tmp_path / "e.tsv") == items
    assert items[0].references == ("ma", "maa")
    with pytest.raises(DataError):
        EvalItem("มา", ("a", "b", "c", "d"))
    with pytest.raises(DataError):
        EvalItem("มา", ())
    assert EvalItem("มา", ("ma", "MA")).references == ("ma",)


def test_read_pairs_weights(tsv):
    path = tsv(["thai", "latin", "weight"], [["มา", "ma", 3], ["นา", "na", 1]])
    assert [w for _, w in read_pairs(path)] == [3, 1]
    with pytest.raises(ParseError):
        read_pairs(tsv(["thai", "latin", "weight"], [["มา", "ma", 0]], name="bad.tsv"))


def _pairs(n):
    return [NamePair("ก" * (1 + i % 5) + "า", f"n{i}") for i in range(n)]


def test_split_sizes_default_ratio():
    train, valid, test = split_dataset(_pairs(1000), SplitSpec(0.990, 0.005, 0.005, seed=7))
    assert (len(train), len(valid), len(test)) == (990, 5, 5)


def test_split_sizes_even():
    sizes = tuple(map(len, split_dataset(_pairs(200), SplitSpec(0.5, 0.25, 0.25))))
    assert sizes == (100, 50, 50)


def test_split_deterministic():
    a = split_dataset(_pairs(300), SplitSpec(seed=3))
    b = split_dataset(_pairs(300), SplitSpec(seed=3))
    assert a == b
    assert split_dataset(_pairs(300), SplitSpec(0.8, 0.1, 0.1, seed=4)) != \
        split_dataset(_pairs(300), SplitSpec(0.8, 0.1, 0.1, seed=5))


@given(st.integers(1, 300), st.integers(0, 2**32 - 1), st.sampled_from([(0.8, 0.1, 0.1), (0.99, 0.005, 0.005),
                                                                        (0.0, 0.5, 0.5), (1.0, 0.0, 0.0)]))
def test_split_is_partition(n, seed, fracs):
    items = list(range(n))
    train, valid, test = split_dataset(items, SplitSpec(*fracs, seed=seed))
    assert sorted(train + valid + test) == items


def test_split_errors():
    with pytest.raises(EmptyDatasetError):
        split_dataset([], SplitSpec())
    with pytest.raises(DataError):
        SplitSpec(0.5, 0.5, 0.5)


def test_remove_leaks_examples():
    a, b = NamePair("มา", "ma"), NamePair("นา", "na")
    assert remove_leaks([a, b], {"นา"}) == [a]
    assert remove_leaks([a, b], set()) == [a, b]
    assert remove_leaks([a, b], {"มา", "นา"}) == []


@given(st.lists(st.sampled_from(["มา", "นา", "ตา", "กา", "ปา"]), max_size=20),
       st.sets(st.sampled_from(["มา", "นา", "ตา", "กา", "ปา"])))
def test_remove_leaks_property(names, banned):
    pairs = [NamePair(n, "x") for n in names]
    kept = remove_leaks(pairs, banned)
    assert all(p.thai not in banned for p in kept)
    assert kept == [p for p in pairs if p.thai not in banned]
