import importlib
import json
import math
import os

import numpy as np
import pytest
import torch
from hypothesis import given
from hypothesis import strategies as st

from thaitranslit.model import (
    AdamW,
    ByteTokenizer,
    Checkpoint,
    CheckpointError,
    ConfigError,
    NonFiniteGradientError,
    Seq2SeqTransformer,
    TrainConfig,
    TrainingDiverged,
    TransformerConfig,
    build_model,
    clip_gradients,
    load_checkpoint,
    lr_at,
    parse_config_text,
    save_checkpoint,
    sequence_loss,
    train,
)
from thaitranslit.model.config import config_text

TOK = ByteTokenizer()
TINY = TransformerConfig(d_model=8, d_ff=16, num_layers=1, num_heads=2, dropout=0.0)


# --- tokenizer -------------------------------------------------------------


def test_tokenizer_examples():
    assert TOK.encode("A") == [68, 1]
    assert TOK.encode("") == [1]
    assert TOK.encode("ก") == [227, 187, 132, 1]
    assert TOK.vocab_size == 259


@given(st.text())
def test_tokenizer_roundtrip(s):
    ids = TOK.encode(s)
    assert ids[-1] == TOK.eos_id and all(3 <= i < 259 for i in ids[:-1])
    assert TOK.decode(ids) == s


def test_tokenizer_special_cases():
    assert TOK.decode(TOK.encode("a\x00b😀มา")) == "a\x00b😀มา"
    assert TOK.decode([100, 1, 101]) == "a"
    with pytest.raises(UnicodeDecodeError):
        TOK.decode([0xE0 + 3, 1])


# --- config ---------------------------------------------------------------


def test_presets_and_sizes():
    small, very = TransformerConfig.small(), TransformerConfig.verysmall()
    assert (small.d_model, small.d_ff, small.num_layers, small.num_heads) == (512, 1024, 6, 6)
    assert (very.d_model, very.d_ff, very.num_layers, very.num_heads) == (256, 512, 4, 4)
    n_small = Seq2SeqTransformer(small).num_parameters()
    n_very = Seq2SeqTransformer(very).num_parameters()
    print(f"parameters: small={n_small} verysmall={n_very}")
    assert n_very < n_small


def test_head_divisibility():
    with pytest.raises(ConfigError):
        TransformerConfig(d_model=512, num_heads=6)
    assert TransformerConfig(d_model=512, num_heads=6, d_kv=64).inner_dim == 384


def test_train_defaults():
    c = TrainConfig()
    assert (c.epochs, c.learning_rate, c.weight_decay, c.warmup_steps) == (20, 0.001, 0.01, 5000)
    assert (c.grad_accum_steps, c.max_grad_norm, c.batch_size, c.eval_steps, c.save_steps) == (4, 1.0, 32, 5000, 5000)


def test_config_file_roundtrip():
    m, t = TransformerConfig.small(dropout=0.2), TrainConfig(max_steps=7, deterministic=False)
    assert parse_config_text(config_text(m, t)) == (m, t)
    m2, t2 = parse_config_text("# comment\npreset = toy\nlearning_rate=0.01\n")
    assert m2 == TransformerConfig.toy() and t2.learning_rate == 0.01
    with pytest.raises(ConfigError, match="bogus"):
        parse_config_text("bogus=1")
    with pytest.raises(ConfigError):
        parse_config_text("d_model=abc")


# --- forward / loss --------------------------------------------------------


def _model(cfg=TINY, seed=0, dtype=torch.float32):
    torch.manual_seed(seed)
    return Seq2SeqTransformer(cfg).to(dtype).eval()


def test_forward_shape():
    m = _model(TransformerConfig.toy(dropout=0.0))
    out = m(torch.randint(3, 259, (2, 5)), torch.randint(3, 259, (2, 7)))
    assert out.shape == (2, 7, 259)


def test_causality_random_batches():
    m = _model(TransformerConfig.toy(dropout=0.0))
    g = torch.Generator().manual_seed(1)
    for _ in range(10):
        src = torch.randint(0, 259, (3, 6), generator=g)
        tgt = torch.randint(0, 259, (3, 8), generator=g)
        t = int(torch.randint(0, 8, (1,), generator=g))
        pert = tgt.clone()
        pert[:, t:] = torch.randint(0, 259, pert[:, t:].shape, generator=g)
        a, b = m(src, tgt), m(src, pert)
        # target t is first seen as decoder input at t + 1
        assert torch.equal(a[:, :t + 1], b[:, :t + 1])


def test_all_pad_source_finite():
    m = _model()
    out = m(torch.zeros(2, 4, dtype=torch.long), torch.randint(3, 259, (2, 3)))
    assert torch.isfinite(out).all()


def test_id_range_checked():
    with pytest.raises(ValueError):
        _model()(torch.tensor([[300]]), torch.tensor([[5]]))


def test_loss_cases():
    tgt = torch.tensor([[5, 6, 1], [7, 1, 0]])
    uniform = torch.zeros(2, 3, 259)
    assert sequence_loss(uniform, tgt).item() == pytest.approx(math.log(259), abs=1e-4)
    sharp = torch.full((2, 3, 259), -50.0)
    sharp.scatter_(2, tgt[..., None], 50.0)
    assert sequence_loss(sharp, tgt).item() < 1e-3
    with pytest.raises(ValueError):
        sequence_loss(uniform[:, :2], tgt)


def test_loss_weight_linearity():
    torch.manual_seed(0)
    logits = torch.randn(2, 3, 259, dtype=torch.float64)
    tgt = torch.tensor([[5, 6, 1], [7, 1, 0]])
    base = sequence_loss(logits, tgt, weights=[1.0, 1.0])
    doubled = sequence_loss(logits, tgt, weights=[2.0, 1.0])
    only_first = sequence_loss(logits, tgt, weights=[1.0, 0.0])
    assert (doubled - base).item() == pytest.approx(only_first.item(), rel=1e-12)


# --- gradient check --------------------------------------------------------


def test_gradients_match_finite_differences():
    m = _model(TINY, seed=3, dtype=torch.float64)
    src = torch.tensor([[10, 20, 30, 1], [40, 50, 1, 0]])
    tgt = torch.tensor([[60, 70, 1], [80, 1, 0]])

    def loss():
        return sequence_loss(m(src, tgt), tgt)

    m.zero_grad()
    loss().backward()
    rng = np.random.default_rng(0)
    h = 1e-6
    for name, p in m.named_parameters():
        grad = p.grad.detach().clone().reshape(-1)
        flat = p.data.view(-1)
        picks = set(np.argsort(-grad.abs().numpy())[:4].tolist()) | set(rng.integers(0, flat.numel(), 4).tolist())
        for i in picks:
            orig = flat[i].item()
            with torch.no_grad():
                flat[i] = orig + h
                up = loss().item()
                flat[i] = orig - h
                down = loss().item()
                flat[i] = orig
            num = (up - down) / (2 * h)
            ana = grad[i].item()
            scale = max(abs(num), abs(ana))
            if scale > 1e-7:
                assert abs(num - ana) / scale <= 1e-3, (name, i, ana, num)


# --- optimizer / schedule / clipping ---------------------------------------


def _scalar(v):
    return torch.tensor([v], dtype=torch.float64)


def test_decoupled_decay_exact():
    p = _scalar(3.0)
    AdamW([p], weight_decay=0.1).step([_scalar(0.0)], lr=0.01)
    assert abs(p.item() - 3.0 * (1 - 0.01 * 0.1)) <= 1e-12


def test_two_step_adamw_by_hand():
    p = _scalar(1.0)
    opt = AdamW([p], betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01)
    lr, g = 0.01, 0.5
    for _ in range(2):
        opt.step([_scalar(g)], lr)
    # step 1: m=0.05, v=0.00025, mhat=0.5, vhat=0.25
    x1 = 1.0 * (1 - lr * 0.01) - lr * 0.5 / (0.5 + 1e-8)
    # step 2: m=0.095, v=0.00049975, mhat=0.5, vhat=0.25
    x2 = x1 * (1 - lr * 0.01) - lr * (0.095 / 0.19) / (math.sqrt(0.00049975 / 0.001999) + 1e-8)
    assert abs(p.item() - x2) <= 1e-10


def test_zero_decay_is_adam():
    torch.manual_seed(0)
    w = torch.randn(5, dtype=torch.float64)
    a, b = w.clone(), w.clone().requires_grad_(True)
    ours = AdamW([a], weight_decay=0.0)
    ref = torch.optim.Adam([b], lr=0.01)
    for k in range(3):
        g = torch.randn(5, dtype=torch.float64, generator=torch.Generator().manual_seed(k))
        ours.step([g.clone()], 0.01)
        b.grad = g.clone()
        ref.step()
    assert torch.allclose(a, b.detach(), atol=1e-12)


def test_nonfinite_gradient_raises():
    with pytest.raises(NonFiniteGradientError):
        AdamW([_scalar(1.0)]).step([_scalar(float("nan"))], 0.1)


def test_lr_schedule():
    c = TrainConfig()
    assert lr_at(0, c, 100_000) == 0.0
    assert lr_at(5000, c, 100_000) == 0.001
    assert lr_at(100_000, c, 100_000) == 0.0
    steps = range(0, 100_001, 250)
    vals = [lr_at(s, c, 100_000) for s in steps]
    assert max(vals) == 0.001 == vals[20]
    diffs = np.diff(vals)
    assert np.allclose(diffs[:20], diffs[0]) and np.allclose(diffs[20:], diffs[-1])
    with pytest.raises(ValueError):
        lr_at(0, c, 5000)


def test_clip_cases():
    g = [torch.tensor([3.0, 4.0])]
    out, norm = clip_gradients(g, 1.0)
    assert norm == 5.0 and torch.allclose(out[0], torch.tensor([0.6, 0.8]))
    g = [torch.tensor([1.2, 1.6]), torch.tensor([0.0])]
    clip_gradients(g, 1.0)
    assert torch.allclose(g[0], torch.tensor([0.6, 0.8]))
    g = [torch.tensor([0.3, 0.4])]
    clip_gradients(g, 1.0)
    assert torch.equal(g[0], torch.tensor([0.3, 0.4]))


# --- checkpoints -----------------------------------------------------------


def test_checkpoint_roundtrip(tmp_path):
    m = _model(TransformerConfig.toy())
    ck = Checkpoint.from_model(m, 12, 0.25)
    save_checkpoint(tmp_path / "c", ck)
    back = load_checkpoint(tmp_path / "c")
    assert back.step == 12 and back.best_metric == 0.25 and back.config == ck.config
    for k, v in ck.tensors.items():
        assert back.tensors[k].tobytes() == v.tobytes()
    m2 = back.build_model()
    src, tgt = torch.randint(3, 259, (1, 4)), torch.randint(3, 259, (1, 3))
    assert torch.equal(m(src, tgt), m2(src, tgt))


def test_checkpoint_errors(tmp_path):
    ck = Checkpoint.from_model(_model(), 1)
    path = tmp_path / "c"
    save_checkpoint(path, ck)
    blob = (path / "tensors.bin").read_bytes()
    (path / "tensors.bin").write_bytes(blob[:-4])
    with pytest.raises(CheckpointError, match="length"):
        load_checkpoint(path)
    (path / "tensors.bin").write_bytes(blob)
    manifest = json.loads((path / "manifest.json").read_text())
    entry = next(e for e in manifest["tensors"] if e["name"] == "lm_head.weight")
    entry["shape"] = [entry["shape"][1], entry["shape"][0]]
    (path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(CheckpointError, match="lm_head.weight"):
        load_checkpoint(path)
    manifest["version"] = 99
    (path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(path)
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing")


# --- training --------------------------------------------------------------

QUICK = TrainConfig(learning_rate=3e-3, warmup_steps=10, grad_accum_steps=2, batch_size=8,
                    max_steps=30, eval_steps=10, save_steps=15, max_length=24)


def test_training_deterministic(toy_pairs, tmp_path):
    runs = []
    for i in range(2):
        m = build_model(TransformerConfig.toy(), 1)
        res = train(m, toy_pairs[:40], toy_pairs[:10], QUICK, out_dir=tmp_path / f"r{i}",
                    log_path=tmp_path / f"r{i}.jsonl")
        runs.append(res)
    assert runs[0].losses == runs[1].losses and len(runs[0].losses) == 30
    assert (tmp_path / "r0.jsonl").read_bytes() == (tmp_path / "r1.jsonl").read_bytes()
    assert len(runs[0].log) == 3
    assert os.path.isdir(tmp_path / "r0" / "best") and os.path.isdir(tmp_path / "r0" / "step-15")
    best = min(runs[0].log, key=lambda e: e["valid_cer"])
    assert runs[0].best.best_metric == best["valid_cer"]


def test_single_final_evaluation(toy_pairs):
    cfg = TrainConfig(warmup_steps=2, max_steps=5, eval_steps=100, batch_size=8, grad_accum_steps=1,
                      max_length=8)
    res = train(build_model(TINY), toy_pairs[:8], toy_pairs[:4], cfg)
    assert [e["step"] for e in res.log] == [5]


def test_divergence_aborts(toy_pairs, monkeypatch):
    train_mod = importlib.import_module("thaitranslit.model.train")

    calls = {"n": 0}
    real = train_mod.sequence_loss

    def flaky(*a, **kw):
        calls["n"] += 1
        out = real(*a, **kw)
        return out * float("nan") if calls["n"] > 6 else out

    monkeypatch.setattr(train_mod, "sequence_loss", flaky)
    cfg = TrainConfig(warmup_steps=2, max_steps=10, eval_steps=2, batch_size=8, grad_accum_steps=1, max_length=8)
    with pytest.raises(TrainingDiverged) as err:
        train(build_model(TINY), toy_pairs[:8], toy_pairs[:4], cfg)
    assert err.value.last_good.step == 6


def test_loss_decreases_over_evaluations(toy_pairs):
    cfg = TrainConfig(learning_rate=3e-3, warmup_steps=20, grad_accum_steps=1, batch_size=32,
                      max_steps=250, eval_steps=50, max_length=24)
    res = train(build_model(TransformerConfig.toy(dropout=0.0), 42), toy_pairs, toy_pairs[:10], cfg)
    losses = [e["loss"] for e in res.log[:5]]
    assert all(a > b for a, b in zip(losses, losses[1:])), losses


@pytest.mark.slow
def test_overfit_32_pairs(toy_pairs):
    cfg = TrainConfig(learning_rate=3e-3, warmup_steps=50, grad_accum_steps=1, batch_size=32,
                      max_steps=2000, eval_steps=2000, max_length=24)
    res = train(build_model(TransformerConfig.toy(dropout=0.0), 42), toy_pairs[:32], toy_pairs[:4], cfg)
    assert min(res.losses) < 0.05
    assert next(i for i, v in enumerate(res.losses) if v < 0.05) < 2000
