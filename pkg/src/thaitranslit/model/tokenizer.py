"""UTF-8 byte tokenizer: ids 0-2 are specials, byte ``b`` is id ``b + 3``."""

from __future__ import annotations

from typing import Iterable

PAD_ID = 0
EOS_ID = 1
UNK_ID = 2
BYTE_OFFSET = 3
VOCAB_SIZE = 256 + BYTE_OFFSET


class ByteTokenizer:
    pad_id = PAD_ID
    eos_id = EOS_ID
    unk_id = UNK_ID
    offset = BYTE_OFFSET
    vocab_size = VOCAB_SIZE

    def encode(self, text: str, add_eos: bool = True) -> list[int]:
        ids = [b + BYTE_OFFSET for b in text.encode("utf-8")]
        return ids + [EOS_ID] if add_eos else ids

    def decode_bytes(self, ids: Iterable[int]) -> bytes:
        """Bytes up to the first eos; pad and unk are skipped."""
        out = bytearray()
        for i in ids:
            if i == EOS_ID:
                break
            if i >= BYTE_OFFSET:
                out.append(i - BYTE_OFFSET)
        return bytes(out)

    def decode(self, ids: Iterable[int], errors: str = "strict") -> str:
        return self.decode_bytes(ids).decode("utf-8", errors=errors)
