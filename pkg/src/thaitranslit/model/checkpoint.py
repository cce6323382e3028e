"""Checkpoint directories: ``manifest.json`` plus a little-endian float32 blob."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .config import TransformerConfig
from .transformer import Seq2SeqTransformer

CHECKPOINT_VERSION = 1
MANIFEST = "manifest.json"
BLOB = "tensors.bin"
_DTYPE = np.dtype("<f4")


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    config: TransformerConfig
    step: int
    tensors: dict  # name -> float32 numpy array
    best_metric: float | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_model(cls, model: Seq2SeqTransformer, step: int, best_metric=None, extra=None):
        tensors = {k: v.detach().cpu().to(torch.float32).numpy().copy() for k, v in model.state_dict().items()}
        return cls(model.config, step, tensors, best_metric, dict(extra or {}))

    def build_model(self) -> Seq2SeqTransformer:
        model = Seq2SeqTransformer(self.config)
        expected = model.state_dict()
        for name, ref in expected.items():
            if name not in self.tensors:
                raise CheckpointError(f"checkpoint lacks tensor {name!r}")
            if tuple(self.tensors[name].shape) != tuple(ref.shape):
                raise CheckpointError(
                    f"tensor {name!r}: shape {tuple(self.tensors[name].shape)} does not fit the config "
                    f"(expected {tuple(ref.shape)})")
        unknown = set(self.tensors) - set(expected)
        if unknown:
            raise CheckpointError(f"unexpected tensors: {sorted(unknown)}")
        model.load_state_dict({k: torch.from_numpy(np.array(v, dtype=np.float32)) for k, v in self.tensors.items()})
        model.eval()
        return model


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    for name, arr in ckpt.tensors.items():
        if not np.isfinite(arr).all():
            raise CheckpointError(f"tensor {name!r} has non-finite values")
    os.makedirs(path, exist_ok=True)
    entries, offset = [], 0
    with open(os.path.join(path, BLOB), "wb") as fh:
        for name in sorted(ckpt.tensors):
            data = np.ascontiguousarray(ckpt.tensors[name], dtype=_DTYPE)
            fh.write(data.tobytes())
            entries.append({"name": name, "shape": list(data.shape), "dtype": "float32",
                            "offset": offset, "nbytes": data.nbytes})
            offset += data.nbytes
    manifest = {
        "format": "thaitranslit-checkpoint",
        "version": CHECKPOINT_VERSION,
        "config": asdict(ckpt.config),
        "step": ckpt.step,
        "best_metric": ckpt.best_metric,
        "extra": ckpt.extra,
        "tensors": entries,
    }
    with open(os.path.join(path, MANIFEST), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_checkpoint(path) -> Checkpoint:
    try:
        with open(os.path.join(path, MANIFEST), encoding="utf-8") as fh:
            manifest = json.load(fh)
        with open(os.path.join(path, BLOB), "rb") as fh:
            blob = fh.read()
    except FileNotFoundError as exc:
        raise CheckpointError(f"{path}: missing {os.path.basename(exc.filename)}") from None
    if manifest.get("format") != "thaitranslit-checkpoint" or manifest.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {manifest.get('version')!r}")
    expected = sum(e["nbytes"] for e in manifest["tensors"])
    if len(blob) != expected:
        raise CheckpointError(f"{path}: blob length {len(blob)} != {expected} bytes listed in the manifest")
    tensors = {}
    for e in manifest["tensors"]:
        count = int(np.prod(e["shape"], dtype=np.int64))
        if count * _DTYPE.itemsize != e["nbytes"]:
            raise CheckpointError(f"tensor {e['name']!r}: shape {e['shape']} does not match {e['nbytes']} bytes")
        arr = np.frombuffer(blob, dtype=_DTYPE, count=count, offset=e["offset"])
        tensors[e["name"]] = arr.reshape(e["shape"]).astype(np.float32)
    config = TransformerConfig(**manifest["config"])
    ckpt = Checkpoint(config, manifest["step"], tensors, manifest.get("best_metric"), manifest.get("extra", {}))
    ckpt.build_model()  # shape validation against the config
    return ckpt
