"""Byte-level seq2seq model, optimizer, training and checkpoints."""

from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, TrainConfig, TransformerConfig, load_config_file, parse_config_text
from .optim import AdamW, NonFiniteGradientError, clip_gradients, lr_at, optimizer_step
from .tokenizer import ByteTokenizer
from .train import TrainingDiverged, TrainResult, build_model, train
from .transformer import Seq2SeqTransformer, sequence_loss

__all__ = [
    "AdamW", "ByteTokenizer", "Checkpoint", "CheckpointError", "ConfigError", "NonFiniteGradientError",
    "Seq2SeqTransformer", "TrainConfig", "TrainResult", "TrainingDiverged", "TransformerConfig",
    "build_model", "clip_gradients", "load_checkpoint", "load_config_file", "lr_at", "optimizer_step",
    "parse_config_text", "save_checkpoint", "sequence_loss", "train",
]
