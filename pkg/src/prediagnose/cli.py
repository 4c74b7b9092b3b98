"""Command-line front end: synth, train, predict, eval, report."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .audioproc import read_wav_file
from .core import FormatError, Rng, TrainingError
from .evaluation import evaluate, report_table, report_to_dict, roc_to_csv, stratified_kfold
from .forest import ForestModel, forest_predict
from .imageproc import read_image_file
from .persist import PersistError, _canon, load_model_file, save_model_file
from .pipeline import (
    cardio_features,
    cardio_predict,
    cardio_train,
    clot_features,
    clot_predict_frame,
    clot_train,
    skin_features,
    skin_standin_classify,
    skin_standin_train,
    SKIN_STANDIN_NAME,
)
from .svm import SvmModel, svm_predict, train_svm_smo
from .synthcardio import write_cardio_dataset
from .synththermal import load_manifest, load_thermal_dataset, write_thermal_dataset
from .voting import sequence_vote
from .core import LabeledDataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRAINING = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(doc: dict) -> None:
    """Single-line canonical JSON on stdout (deterministic float formatting)."""
    sys.stdout.write(_canon(doc) + "\n")


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("PREDIAGNOSE_THREADS")
    return int(env) if env else 1


def _load_audio_dataset(data_dir):
    base = Path(data_dir)
    return [(read_wav_file(base / name), label) for name, label in load_manifest(base)]


def _load_image_dataset(data_dir):
    base = Path(data_dir)
    return [(read_image_file(base / name), label) for name, label in load_manifest(base)]


def build_parser() -> _Parser:
    parser = _Parser(prog="prediagnose", description="Multimodal pre-diagnostic toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate synthetic datasets")
    synth_sub = p_synth.add_subparsers(dest="modality", required=True)

    p_st = synth_sub.add_parser("thermal")
    p_st.add_argument("--out", required=True)
    p_st.add_argument("--n", type=int, required=True)
    p_st.add_argument("--positive-frac", type=float, default=0.5)
    p_st.add_argument("--seed", type=int, required=True)
    p_st.add_argument("--frames", type=int, default=0)
    p_st.add_argument("--config", default=None)
    p_st.add_argument("--threads", type=int, default=None)

    p_sc = synth_sub.add_parser("cardio")
    p_sc.add_argument("--task", choices=["lung", "heart"], required=True)
    p_sc.add_argument("--out", required=True)
    p_sc.add_argument("--n", type=int, required=True)
    p_sc.add_argument("--positive-frac", type=float, default=0.5)
    p_sc.add_argument("--seed", type=int, required=True)
    p_sc.add_argument("--rate", type=int, default=8000)
    p_sc.add_argument("--duration", type=float, default=3.0)
    p_sc.add_argument("--threads", type=int, default=None)

    p_train = sub.add_parser("train", help="train a pipeline model")
    p_train.add_argument("pipeline", choices=["clot", "cardio", "skin"])
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--config", default=None)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--threads", type=int, default=None)

    p_pred = sub.add_parser("predict", help="single-sample prediction")
    p_pred.add_argument("pipeline", choices=["clot", "cardio", "skin"])
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--input", default=None)
    p_pred.add_argument("--sequence", default=None)
    p_pred.add_argument("--window", type=int, default=None)
    p_pred.add_argument("--threads", type=int, default=None)

    p_eval = sub.add_parser("eval", help="evaluate a model on a dataset directory")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--kfold", type=int, default=None)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--roc-csv", default=None)
    p_eval.add_argument("--threads", type=int, default=None)

    p_rep = sub.add_parser("report", help="concatenate per-modality reports")
    p_rep.add_argument("--inputs", nargs="+", required=True)
    p_rep.add_argument("--out", required=True)
    p_rep.add_argument("--threads", type=int, default=None)

    return parser


def _cmd_synth(args) -> int:
    if args.modality == "thermal":
        thermal = cfgmod.load_thermal_config(args.config)
        write_thermal_dataset(args.out, thermal, args.n, args.positive_frac, args.seed,
                              frames=args.frames)
    else:
        write_cardio_dataset(args.out, args.task, args.n, args.positive_frac,
                             args.duration, args.rate, args.seed)
    print(f"wrote {args.n} samples to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_train(args) -> int:
    threads = _threads(args)
    if args.pipeline == "clot":
        cfg = cfgmod.load_clot_config(args.config)
        samples = _load_image_dataset(args.data)
        model = clot_train(samples, cfg, threads=threads)
        snapshot = cfgmod.clot_config_snapshot(cfg)
        preds = [clot_predict_frame(model, im, cfg)[1] for im, _ in samples]
    elif args.pipeline == "cardio":
        cfg = cfgmod.load_cardio_config(args.config)
        recordings = _load_audio_dataset(args.data)
        model = cardio_train(recordings, cfg, threads=threads)
        snapshot = cfgmod.cardio_config_snapshot(cfg)
        preds = [cardio_predict(model, sig, cfg)[1] for sig, _ in recordings]
    else:
        samples = _load_image_dataset(args.data)
        if len({lab for _, lab in samples}) < 2:
            raise TrainingError("training data must contain both classes")
        model = skin_standin_train(samples)
        snapshot = {"pipeline": "skin", "standin": SKIN_STANDIN_NAME}
        preds = [skin_standin_classify(model, im)[1] for im, _ in samples]
    labels = [lab for _, lab in (samples if args.pipeline != "cardio" else recordings)]
    accuracy = float(np.mean(np.array(preds) == np.array(labels)))
    save_model_file(args.out, model, snapshot)
    _emit({"pipeline": args.pipeline, "n_train": len(labels), "train_accuracy": accuracy,
           "model": str(args.out)})
    return EXIT_OK


def _pipeline_kind(created_with: dict) -> str:
    kind = created_with.get("pipeline")
    if kind not in ("clot", "cardio", "skin"):
        raise PersistError("model is missing its pipeline tag")
    return kind


def _cmd_predict(args) -> int:
    model, created_with = load_model_file(args.model)
    kind = _pipeline_kind(created_with)
    if kind != args.pipeline:
        raise FormatError(f"model was trained for the {kind} pipeline, not {args.pipeline}")
    start = time.perf_counter()
    doc: dict
    if args.pipeline == "clot":
        cfg = cfgmod.clot_config_from_snapshot(created_with)
        if args.sequence:
            frames = sorted(Path(args.sequence).glob("*.pgm"))
            if not frames:
                raise FormatError(f"no PGM frames in {args.sequence}")
            window = args.window if args.window is not None else cfg.window
            labels = [clot_predict_frame(model, read_image_file(f), cfg)[1] for f in frames]
            label = sequence_vote(labels, window)
            doc = {"label": label, "n_frames": len(frames)}
        else:
            if not args.input:
                raise _UsageError("predict requires --input or --sequence")
            score, label = clot_predict_frame(model, read_image_file(args.input), cfg)
            doc = {"score": score, "label": label}
    elif args.pipeline == "cardio":
        if not args.input:
            raise _UsageError("predict cardio requires --input")
        cfg = cfgmod.cardio_config_from_snapshot(created_with)
        prob, label = cardio_predict(model, read_wav_file(args.input), cfg)
        doc = {"prob": prob, "label": label}
    else:
        if not args.input:
            raise _UsageError("predict skin requires --input")
        score, label = skin_standin_classify(model, read_image_file(args.input))
        doc = {"score": score, "label": label, "classifier": SKIN_STANDIN_NAME}
    doc["latency_ms"] = (time.perf_counter() - start) * 1000.0
    _emit(doc)
    return EXIT_OK


def _eval_features(kind, model, created_with, data_dir, threads):
    """Feature matrix, labels, and a per-sample scorer for the given pipeline."""
    if kind == "clot":
        cfg = cfgmod.clot_config_from_snapshot(created_with)
        samples = _load_image_dataset(data_dir)
        feats = np.array([clot_features(im, cfg) for im, _ in samples])
        labels = np.array([lab for _, lab in samples])
        return feats, labels, cfg
    if kind == "cardio":
        cfg = cfgmod.cardio_config_from_snapshot(created_with)
        recs = _load_audio_dataset(data_dir)
        feats = np.array([cardio_features(sig, cfg) for sig, _ in recs])
        labels = np.array([lab for _, lab in recs])
        return feats, labels, cfg
    samples = _load_image_dataset(data_dir)
    feats = np.array([skin_features(im) for im, _ in samples])
    labels = np.array([lab for _, lab in samples])
    return feats, labels, None


def _score_with(model, feats) -> np.ndarray:
    if isinstance(model, SvmModel):
        from .svm import svm_decision_batch

        return svm_decision_batch(model, feats)
    return np.array([forest_predict(model, x)[0] for x in feats])


def _labels_from_scores(model, scores) -> np.ndarray:
    threshold = 0.0 if isinstance(model, SvmModel) else 0.5
    return (scores >= threshold).astype(int)


def _cmd_eval(args) -> int:
    model, created_with = load_model_file(args.model)
    kind = _pipeline_kind(created_with)
    feats, labels, cfg = _eval_features(kind, model, created_with, args.data, _threads(args))
    if args.kfold:
        # Retrain per fold with the model's recorded hyperparameters and pool
        # held-out predictions into one report.
        folds = stratified_kfold(labels, args.kfold, Rng(args.seed))
        scores = np.zeros(len(labels))
        for train_idx, test_idx in folds:
            sub = LabeledDataset(feats[train_idx], labels[train_idx])
            if isinstance(model, SvmModel):
                fold_model = train_svm_smo(sub, c=model.c, gamma=model.gamma)
            else:
                hp = model.hyperparams
                from .forest import train_random_forest

                fold_model = train_random_forest(
                    sub, n_trees=hp.n_trees, max_depth=hp.max_depth,
                    min_samples_leaf=hp.min_samples_leaf, mtry=hp.mtry,
                    seed=hp.seed, threads=_threads(args),
                )
            scores[test_idx] = _score_with(fold_model, feats[test_idx])
    else:
        scores = _score_with(model, feats)
    preds = _labels_from_scores(model, scores)
    report = evaluate(labels, preds, scores)
    title = {"clot": "Blood Clot Detection (thermal)", "cardio": "Cardiopulmonary Analysis",
             "skin": f"Skin STAND-IN ({SKIN_STANDIN_NAME})"}[kind]
    if args.roc_csv:
        Path(args.roc_csv).write_text(roc_to_csv(report.roc_points))
    doc = report_to_dict(report)
    doc["pipeline"] = kind
    if kind == "skin":
        doc["standin"] = SKIN_STANDIN_NAME
    _emit(doc)
    print(report_table(report, title), file=sys.stderr)
    return EXIT_OK


def _cmd_report(args) -> int:
    modules = []
    for path in args.inputs:
        try:
            with open(path) as fh:
                modules.append(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read report input {path}: {exc}") from exc
    doc = {"report_version": 1, "modules": modules}
    Path(args.out).write_text(_canon(doc) + "\n")
    _emit(doc)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "eval":
            return _cmd_eval(args)
        return _cmd_report(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except (FormatError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
