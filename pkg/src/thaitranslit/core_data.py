"""Name pairs, candidate records, TSV I/O, leak removal and dataset splits."""

from __future__ import annotations

import csv
import math
import random
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence, TypeVar

T = TypeVar("T")

#: Feature order used everywhere a record becomes a vector (importance-table order).
FEATURE_ORDER = (
    "cnt_th",
    "phonetic_distance",
    "cnt_latin",
    "rtgs_similarity",
    "collocations3",
    "collocations2",
    "collocations",
    "google",
    "azure",
)

#: Column order of the candidate TSV.
CANDIDATE_COLUMNS = (
    "thai",
    "latin",
    "cnt_th",
    "cnt_latin",
    "phonetic_distance",
    "rtgs_similarity",
    "collocations",
    "collocations2",
    "collocations3",
    "google",
    "azure",
)

_INT_FEATURES = {
    "cnt_th", "cnt_latin", "rtgs_similarity",
    "collocations", "collocations2", "collocations3", "weight",
}
_FLAG_FEATURES = {"google", "azure"}


class DataError(ValueError):
    """Malformed or unusable input data."""


class SchemaError(DataError):
    pass


class ParseError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


def normalize_thai(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def has_thai(text: str) -> bool:
    return any("฀" <= ch <= "๿" for ch in text)


@dataclass(frozen=True)
class NamePair:
    thai: str
    latin: str

    def __post_init__(self):
        if not self.thai or not self.latin:
            raise DataError(f"empty name in pair {self.thai!r} / {self.latin!r}")
        if not has_thai(self.thai):
            raise DataError(f"no Thai characters in {self.thai!r}")
        object.__setattr__(self, "thai", normalize_thai(self.thai))
        object.__setattr__(self, "latin", self.latin.lower())


@dataclass(frozen=True)
class CandidateRecord:
    pair: NamePair
    cnt_th: int = 0
    cnt_latin: int = 0
    phonetic_distance: float = 0.0
    rtgs_similarity: int = 0
    collocations: int = 0
    collocations2: int = 0
    collocations3: int = 0
    google: int = 0
    azure: int = 0

    def __post_init__(self):
        for name in FEATURE_ORDER:
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be non-negative")
        for name in _FLAG_FEATURES:
            if getattr(self, name) not in (0, 1):
                raise DataError(f"{name} must be 0 or 1")

    def feature_vector(self) -> list[float]:
        return [float(getattr(self, name)) for name in FEATURE_ORDER]


@dataclass(frozen=True)
class LabeledRecord:
    record: CandidateRecord
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class WeightedPair:
    pair: NamePair
    probability: float
    weight: int


@dataclass(frozen=True)
class EvalItem:
    thai: str
    references: tuple[str, ...]

    def __post_init__(self):
        refs = tuple(dict.fromkeys(r.lower() for r in self.references if r))
        if not 1 <= len(refs) <= 3:
            raise DataError(f"{self.thai!r}: need 1-3 distinct references, got {len(refs)}")
        object.__setattr__(self, "thai", normalize_thai(self.thai))
        object.__setattr__(self, "references", refs)


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.990
    valid_frac: float = 0.005
    test_frac: float = 0.005
    seed: int = 42

    def __post_init__(self):
        fracs = (self.train_frac, self.valid_frac, self.test_frac)
        if any(f < 0 for f in fracs) or abs(sum(fracs) - 1.0) > 1e-9:
            raise DataError(f"split fractions must be non-negative and sum to 1, got {fracs}")
        if self.seed < 0:
            raise DataError("seed must be unsigned")


# ---------------------------------------------------------------------------
# TSV I/O


def _read_tsv(path, required: Sequence[str]) -> tuple[list[str], list[tuple[int, dict]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells or all(not c.strip() for c in cells):
                continue
            cells = cells + [""] * (len(header) - len(cells))
            rows.append((lineno, dict(zip(header, cells))))
    return header, rows


def _parse_number(value: str, column: str, lineno: int, path):
    text = value.strip()
    try:
        if column in _INT_FEATURES or column in _FLAG_FEATURES:
            number = float(text)
            if not number.is_integer():
                raise ValueError(text)
            return int(number)
        number = float(text)
        if not math.isfinite(number):
            raise ValueError(text)
        return number
    except ValueError:
        raise ParseError(f"{path}: row {lineno}: column {column!r}: cannot parse {value!r}") from None


def _record_from_row(row: dict, lineno: int, path) -> CandidateRecord:
    try:
        pair = NamePair(row["thai"].strip(), row["latin"].strip())
        feats = {c: _parse_number(row[c], c, lineno, path) for c in CANDIDATE_COLUMNS[2:]}
        return CandidateRecord(pair=pair, **feats)
    except ParseError:
        raise
    except DataError as exc:
        raise ParseError(f"{path}: row {lineno}: {exc}") from None


def read_candidates(path) -> list[CandidateRecord]:
    """Read a candidate TSV; latin is lowercased, thai NFC-normalised."""
    _, rows = _read_tsv(path, CANDIDATE_COLUMNS)
    return [_record_from_row(row, lineno, path) for lineno, row in rows]


def _format_number(value) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def candidate_row(record: CandidateRecord) -> list[str]:
    return [record.pair.thai, record.pair.latin] + [
        _format_number(getattr(record, c)) for c in CANDIDATE_COLUMNS[2:]
    ]


def write_candidates(path, records: Iterable[CandidateRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(CANDIDATE_COLUMNS) + "\n")
        for rec in records:
            fh.write("\t".join(candidate_row(rec)) + "\n")


def read_labeled(path) -> list[LabeledRecord]:
    _, rows = _read_tsv(path, CANDIDATE_COLUMNS + ("label",))
    out = []
    for lineno, row in rows:
        label = row["label"].strip()
        if label not in ("0", "1"):
            raise ParseError(f"{path}: row {lineno}: label must be 0 or 1, got {label!r}")
        out.append(LabeledRecord(_record_from_row(row, lineno, path), int(label)))
    return out


def write_labeled(path, records: Iterable[LabeledRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(CANDIDATE_COLUMNS + ("label",)) + "\n")
        for lr in records:
            fh.write("\t".join(candidate_row(lr.record) + [str(lr.label)]) + "\n")


def read_scored(path) -> list[tuple[CandidateRecord, float]]:
    """Candidate TSV with an extra ``probability`` column."""
    _, rows = _read_tsv(path, CANDIDATE_COLUMNS + ("probability",))
    out = []
    for lineno, row in rows:
        prob = _parse_number(row["probability"], "probability", lineno, path)
        if not 0.0 <= prob <= 1.0:
            raise ParseError(f"{path}: row {lineno}: probability {prob} outside [0, 1]")
        out.append((_record_from_row(row, lineno, path), prob))
    return out


def read_eval(path) -> list[EvalItem]:
    _, rows = _read_tsv(path, ("thai", "ref1"))
    items = []
    for lineno, row in rows:
        refs = [row.get(c, "").strip() for c in ("ref1", "ref2", "ref3")]
        try:
            items.append(EvalItem(row["thai"].strip(), tuple(r for r in refs if r)))
        except DataError as exc:
            raise ParseError(f"{path}: row {lineno}: {exc}") from None
    return items


def write_eval(path, items: Iterable[EvalItem]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("thai\tref1\tref2\tref3\n")
        for item in items:
            refs = list(item.references) + [""] * (3 - len(item.references))
            fh.write("\t".join([item.thai] + refs) + "\n")


def read_pairs(path) -> list[tuple[NamePair, int]]:
    """Read a ``thai, latin[, weight]`` training file."""
    header, rows = _read_tsv(path, ("thai", "latin"))
    has_weight = "weight" in header
    out = []
    for lineno, row in rows:
        try:
            pair = NamePair(row["thai"].strip(), row["latin"].strip())
        except DataError as exc:
            raise ParseError(f"{path}: row {lineno}: {exc}") from None
        weight = _parse_number(row["weight"], "weight", lineno, path) if has_weight else 1
        if weight < 1:
            raise ParseError(f"{path}: row {lineno}: weight must be >= 1")
        out.append((pair, weight))
    return out


def write_pairs(path, pairs: Iterable[NamePair]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("thai\tlatin\n")
        for p in pairs:
            fh.write(f"{p.thai}\t{p.latin}\n")


# ---------------------------------------------------------------------------
# Dataset operations


def _thai_of(item) -> str:
    for attr in ("thai", "pair", "record"):
        if hasattr(item, attr):
            value = getattr(item, attr)
            return value if isinstance(value, str) else _thai_of(value)
    if isinstance(item, tuple):
        return _thai_of(item[0])
    raise TypeError(f"cannot find a Thai name on {type(item).__name__}")


def remove_leaks(pairs: Iterable[T], test_thai_names: Iterable[str]) -> list[T]:
    """Drop items whose Thai name (NFC) occurs in ``test_thai_names``; keeps order."""
    banned = {normalize_thai(name) for name in test_thai_names}
    if not banned:
        return list(pairs)
    return [p for p in pairs if normalize_thai(_thai_of(p)) not in banned]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_dataset(pairs: Sequence[T], spec: SplitSpec) -> tuple[list[T], list[T], list[T]]:
    """Seeded uniform shuffle, then carve off validation and test slices."""
    n = len(pairs)
    if n == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    n_valid = _round_half_up(spec.valid_frac * n)
    n_test = _round_half_up(spec.test_frac * n)
    if n_valid + n_test > n:
        n_test = n - n_valid
    order = list(range(n))
    random.Random(spec.seed).shuffle(order)
    valid = [pairs[i] for i in order[:n_valid]]
    test = [pairs[i] for i in order[n_valid:n_valid + n_test]]
    train = [pairs[i] for i in order[n_valid + n_test:]]
    return train, valid, test
