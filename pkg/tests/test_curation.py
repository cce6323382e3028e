import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thaitranslit.core_data import EmptyDatasetError, NamePair, SplitSpec, WeightedPair, read_pairs
from thaitranslit.curation import (
    CurationConfig,
    CurationError,
    curate,
    materialize_training_file,
    training_rows,
    upsample_weight,
)


def test_weight_examples():
    assert upsample_weight(0.95) == 1
    assert upsample_weight(1.0) == 20
    assert upsample_weight(0.975) == 11
    with pytest.raises(CurationError):
        upsample_weight(0.9)


def test_weight_grid_range_and_monotone():
    ws = [upsample_weight(0.95 + i * 1e-4) for i in range(501)]
    assert set(ws) == set(range(1, 21))
    assert ws == sorted(ws)


@given(st.floats(0.95, 1.0), st.floats(0.95, 1.0))
def test_weight_monotone(a, b):
    lo, hi = sorted((a, b))
    assert 1 <= upsample_weight(lo) <= upsample_weight(hi) <= 20


def test_config_invariants():
    with pytest.raises(CurationError):
        CurationConfig(cutoff=0.9)
    with pytest.raises(CurationError):
        CurationConfig(weight_min=5, weight_max=4)


def _names(n):
    cons = "กขคงจฉชซดตถทนบปผพฟมยรลวสหอ"
    return [cons[i % len(cons)] + cons[(i // len(cons)) % len(cons)] + "า" * (1 + i // 729) for i in range(n)]


def _scored(n, above, seed=0):
    rng = random.Random(seed)
    out = []
    for i, name in enumerate(_names(n)):
        p = rng.uniform(0.95, 1.0) if i < above else rng.uniform(0.0, 0.9)
        out.append((NamePair(name, f"n{i}"), p))
    return out


def test_curate_sizes():
    cfg = CurationConfig(split=SplitSpec(0.9, 0.05, 0.05, seed=1))
    res = curate(_scored(100, 40), [], cfg)
    assert (len(res.train), len(res.valid), len(res.test)) == (36, 2, 2)
    assert res.summary["after_cutoff"] == 40
    assert all(w.weight == upsample_weight(w.probability) for w in res.train)
    total = res.summary["train_weight_total"]
    assert len(res.train) <= total <= 20 * len(res.train)


def test_curate_removes_leaks_first():
    items = _scored(50, 50)
    banned = {items[0][0].thai, items[7][0].thai}
    res = curate(items, banned, CurationConfig(split=SplitSpec(0.8, 0.1, 0.1)))
    assert res.summary["after_leak_removal"] == 48
    out = [w.pair for w in res.train] + res.valid + res.test
    assert not {p.thai for p in out} & banned
    s = res.summary
    assert s["input"] >= s["after_leak_removal"] >= s["after_cutoff"]


def test_curate_empty_after_cutoff():
    items = [(NamePair("มา", "ma"), 0.5)] * 5
    with pytest.raises(EmptyDatasetError, match="after_cutoff"):
        curate(items, [])


def test_curate_deterministic():
    a = curate(_scored(200, 150), [], CurationConfig())
    b = curate(_scored(200, 150), [], CurationConfig())
    assert a.train == b.train and a.valid == b.valid and a.summary == b.summary


def test_materialize_modes(tmp_path):
    wp = [WeightedPair(NamePair("มา", "ma"), 0.96, 3), WeightedPair(NamePair("นา", "na"), 1.0, 20)]
    assert training_rows(wp[:1]) == [("มา", "ma")] * 3
    assert training_rows(wp[:1], "weight-column") == [("มา", "ma", 3)]
    n = materialize_training_file(tmp_path / "r.tsv", wp)
    assert n == 23 and len(read_pairs(tmp_path / "r.tsv")) == 23
    materialize_training_file(tmp_path / "w.tsv", wp, "weight-column")
    assert [w for _, w in read_pairs(tmp_path / "w.tsv")] == [3, 20]
    with pytest.raises(CurationError):
        training_rows(wp, "other")


def test_replicated_rows_equal_weight_sum(tmp_path):
    rng = random.Random(11)
    wp = []
    for name in _names(1000):
        p = rng.uniform(0.95, 1.0)
        wp.append(WeightedPair(NamePair(name, "x"), p, upsample_weight(p)))
    rows = materialize_training_file(tmp_path / "t.tsv", wp)
    assert rows == sum(w.weight for w in wp) == len(read_pairs(tmp_path / "t.tsv"))
