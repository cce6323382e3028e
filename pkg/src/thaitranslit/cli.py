"""Command-line entry point: ``thaitranslit <subcommand> ...``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict

from . import __version__

log = logging.getLogger("thaitranslit")

DEFAULT_SEED = 42


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _seed(args, fallback: int = DEFAULT_SEED) -> int:
    return args.seed if args.seed is not None else fallback


def _write_text(path, text: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_rtgs(args) -> int:
    from .rtgs import romanize_rtgs

    for text in args.thai:
        print(romanize_rtgs(text))
    return 0


def cmd_features(args) -> int:
    from .core_data import CANDIDATE_COLUMNS, CandidateRecord, ParseError, _read_tsv, _parse_number, NamePair
    from .core_data import write_candidates
    from .phonetics import G2PError, builtin_toy_g2p, phonetic_distance
    from .rtgs import rtgs_similarity

    header, rows = _read_tsv(args.pairs, ("thai", "latin"))
    g2p = builtin_toy_g2p()
    records = []
    for lineno, row in rows:
        try:
            pair = NamePair(row["thai"].strip(), row["latin"].strip())
            dist = phonetic_distance(pair.thai, pair.latin, g2p)
            sim = rtgs_similarity(pair.latin, pair.thai)
        except (ValueError, G2PError) as exc:
            raise ParseError(f"{args.pairs}: row {lineno}: {exc}") from None
        extra = {c: _parse_number(row[c], c, lineno, args.pairs)
                 for c in CANDIDATE_COLUMNS[2:] if c in header and c not in ("phonetic_distance", "rtgs_similarity")}
        records.append(CandidateRecord(pair=pair, phonetic_distance=dist, rtgs_similarity=sim, **extra))
    write_candidates(args.out, records)
    log.info("wrote %d candidate rows to %s", len(records), args.out)
    return 0


def _forest_config(args):
    from .selector import ForestConfig

    return ForestConfig(
        n_estimators=args.trees,
        min_samples_split=args.min_samples_split,
        min_samples_leaf=args.min_samples_leaf,
        max_depth=args.max_depth,
        seed=_seed(args),
    )


def _xy(records):
    import numpy as np

    X = np.array([r.record.feature_vector() for r in records])
    y = np.array([r.label for r in records])
    return X, y


def cmd_select_train(args) -> int:
    from .core_data import EmptyDatasetError, read_labeled
    from .selector import fit_forest

    records = read_labeled(args.data)
    if not records:
        raise EmptyDatasetError(f"{args.data}: no labeled rows")
    X, y = _xy(records)
    forest = fit_forest(X, y, config=_forest_config(args), threads=args.threads)
    _write_text(args.out, forest.to_json())
    log.info("trained %d trees on %d rows", len(forest.trees), len(records))
    return 0


def cmd_select_eval(args) -> int:
    from .core_data import read_labeled
    from .metrics import dumps_stable
    from .selector import Forest, kfold_cv, threshold_sweep

    with open(args.forest, encoding="utf-8") as fh:
        forest = Forest.from_json(fh.read())
    X, y = _xy(read_labeled(args.data))
    rows = threshold_sweep(forest, X, y, args.thresholds)
    doc = {
        "config": {"forest": os.path.basename(args.forest), "data": os.path.basename(args.data),
                   "thresholds": args.thresholds, "forest_config": asdict(forest.config)},
        "thresholds": [m.to_dict() for m in rows],
        "feature_importances": dict(zip(forest.feature_names, forest.feature_importances.tolist())),
    }
    if args.cv:
        doc["cross_validation"] = kfold_cv(X, y, args.cv, forest.config, args.thresholds).to_dict()
    text = dumps_stable(doc)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_select_score(args) -> int:
    import numpy as np

    from .core_data import CANDIDATE_COLUMNS, candidate_row, read_candidates
    from .selector import Forest

    with open(args.forest, encoding="utf-8") as fh:
        forest = Forest.from_json(fh.read())
    records = read_candidates(args.data)
    probs = forest.predict_proba(np.array([r.feature_vector() for r in records])) if records else []
    lines = ["\t".join(CANDIDATE_COLUMNS + ("probability",))]
    lines += ["\t".join(candidate_row(r) + [repr(float(p))]) for r, p in zip(records, probs)]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_curate(args) -> int:
    from .core_data import SplitSpec, read_eval, read_scored, write_pairs
    from .curation import CurationConfig, curate, materialize_training_file
    from .metrics import dumps_stable

    split = SplitSpec(args.train_frac, args.valid_frac, args.test_frac, _seed(args))
    config = CurationConfig(cutoff=args.cutoff, split=split, bin_lo=args.cutoff)
    eval_names = [item.thai for item in read_eval(args.eval)] if args.eval else []
    result = curate(read_scored(args.candidates), eval_names, config)
    os.makedirs(args.out_dir, exist_ok=True)
    rows = materialize_training_file(os.path.join(args.out_dir, "train.tsv"), result.train, args.mode)
    write_pairs(os.path.join(args.out_dir, "valid.tsv"), result.valid)
    write_pairs(os.path.join(args.out_dir, "test.tsv"), result.test)
    summary = {"config": {**asdict(config), "mode": args.mode}, "counts": {**result.summary, "train_rows": rows}}
    _write_text(os.path.join(args.out_dir, "summary.json"), dumps_stable(summary))
    return 0


def cmd_train(args) -> int:
    from dataclasses import replace

    from .core_data import read_pairs
    from .model import build_model, load_config_file, train
    from .model.config import TrainConfig, TransformerConfig, config_text

    if args.config:
        model_cfg, train_cfg = load_config_file(args.config)
    else:
        model_cfg, train_cfg = TransformerConfig.verysmall(), TrainConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    train_cfg = replace(train_cfg, **overrides)

    def rows(path):
        return [(p.thai, p.latin, w) for p, w in read_pairs(path)]

    os.makedirs(args.out, exist_ok=True)
    _write_text(os.path.join(args.out, "config.txt"), config_text(model_cfg, train_cfg))
    model = build_model(model_cfg, train_cfg.seed)
    log.info("model has %d parameters", model.num_parameters())
    result = train(model, rows(args.train), rows(args.valid), train_cfg, out_dir=args.out,
                   log_path=os.path.join(args.out, "log.jsonl"))
    log.info("best validation CER %.6g at step %d", result.best.best_metric, result.best.step)
    return 0


def _beam(args):
    from .decoding import BeamConfig

    return BeamConfig(beam_width=args.beam, k=args.k, max_length=args.max_length,
                      length_penalty=args.length_penalty)


def cmd_translit(args) -> int:
    from .decoding import transliterate
    from .metrics import format_float
    from .model import load_checkpoint

    model = load_checkpoint(args.ckpt).build_model()
    for text, score in transliterate(model, args.text, _beam(args)):
        print(f"{text}\t{format_float(score)}")
    return 0


def cmd_evaluate(args) -> int:
    from .core_data import read_eval
    from .decoding import transliterate
    from .metrics import evaluate_predictions
    from .model import load_checkpoint

    ckpt = load_checkpoint(args.ckpt)
    model = ckpt.build_model()
    items = read_eval(args.eval)
    beam = _beam(args)
    ranked = [[t for t, _ in transliterate(model, item.thai, beam)] for item in items]
    report = evaluate_predictions(ranked, items)
    extra = {"config": {"ckpt_step": ckpt.step, "eval": os.path.basename(args.eval), **asdict(beam)}}
    if args.out:
        _write_text(args.out, report.to_json(extra))
    else:
        sys.stdout.write(report.to_text())
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_beam_args(p):
    p.add_argument("--k", type=int, default=3, help="candidates to return (default 3)")
    p.add_argument("--beam", type=int, default=5, help="beam width (default 5)")
    p.add_argument("--max-length", type=int, default=64, help="maximum output bytes (default 64)")
    p.add_argument("--length-penalty", type=float, default=1.0, help="length normalisation exponent")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thaitranslit", description="Thai to Latin name transliteration toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=None, help=f"random seed (default {DEFAULT_SEED})")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("rtgs", help="romanize Thai text with the simplified RTGS tables")
    p.add_argument("thai", nargs="+")
    p.set_defaults(func=cmd_rtgs)

    p = sub.add_parser("features", help="compute phonetic_distance and rtgs_similarity for a pair file")
    p.add_argument("--pairs", required=True, help="TSV with thai and latin columns")
    p.add_argument("--out", required=True, help="candidate TSV to write")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("select-train", help="fit the selection forest on a labeled TSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="forest JSON to write")
    p.add_argument("--trees", type=int, default=500)
    p.add_argument("--max-depth", type=int, default=10)
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("--min-samples-leaf", type=int, default=4)
    p.set_defaults(func=cmd_select_train)

    p = sub.add_parser("select-eval", help="threshold sweep of a forest on a labeled TSV")
    p.add_argument("--forest", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--thresholds", type=_floats, default=[0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99])
    p.add_argument("--cv", type=int, default=0, help="also run k-fold cross-validation with this k")
    p.add_argument("--out", help="report JSON (default: stdout)")
    p.set_defaults(func=cmd_select_eval)

    p = sub.add_parser("select-score", help="append forest probabilities to a candidate TSV")
    p.add_argument("--forest", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select_score)

    p = sub.add_parser("curate", help="build train/valid/test files from scored candidates")
    p.add_argument("--candidates", required=True, help="scored TSV with a probability column")
    p.add_argument("--eval", help="evaluation TSV whose Thai names must not leak into training")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--cutoff", type=float, default=0.95)
    p.add_argument("--mode", choices=("replicate", "weight-column"), default="replicate")
    p.add_argument("--train-frac", type=float, default=0.990)
    p.add_argument("--valid-frac", type=float, default=0.005)
    p.add_argument("--test-frac", type=float, default=0.005)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("train", help="train the transliteration model")
    p.add_argument("--config", help="key=value config file (default: VerySmall preset, published schedule)")
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.add_argument("--max-steps", type=int, help="stop after this many optimizer steps")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translit", help="transliterate one Thai string")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--text", required=True)
    _add_beam_args(p)
    p.set_defaults(func=cmd_translit)

    p = sub.add_parser("evaluate", help="score a checkpoint on an evaluation TSV")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--eval", required=True)
    p.add_argument("--out", help="report JSON (default: text on stdout)")
    _add_beam_args(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def _data_errors() -> tuple:
    from .core_data import DataError
    from .curation import CurationError
    from .decoding import DecodingError
    from .metrics import MetricError
    from .model import CheckpointError, ConfigError, TrainingDiverged
    from .phonetics import UnknownSegmentError
    from .rtgs import UnsupportedCharacterError
    from .selector import SelectorError

    return (DataError, CurationError, DecodingError, MetricError, CheckpointError, ConfigError,
            TrainingDiverged, UnknownSegmentError, UnsupportedCharacterError, SelectorError, OSError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.threads < 1:
        print("thaitranslit: error: --threads must be >= 1", file=sys.stderr)
        return 1
    import torch

    torch.set_num_threads(args.threads)
    try:
        return args.func(args)
    except _data_errors() as exc:
        print(f"thaitranslit {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"thaitranslit {args.command}: invalid setting: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
