"""Thai to Latin name transliteration: RTGS baseline, phonetic features,
random-forest example selection, curation and a byte-level seq2seq model."""

__version__ = "0.1.0"
