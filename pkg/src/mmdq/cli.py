"""Subcommand front end: assess, stats, train, eval, synth.

Exit codes: 0 success, 1 validation failure, 2 I/O failure. All emitted
report files are byte-reproducible for identical inputs and seeds; run
metadata goes to a separate ``run.json`` sidecar so data files stay
timestamp-free and diffable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import Corpus, EmbeddingTable, attach_ocr, load_embeddings, load_manifest
from .errors import IoFailure, MalformedSidecar, MmdqError
from .imgqual import ImageQualityConfig, image_quality
from .relevance import RelevanceConfig, coarse_relevance, fine_relevance, rng_for_sample, sample_negatives
from .synth import DEFAULT_DEGRADATIONS, DEGRADATION_KINDS, SynthSpec, gen_corpus
from .trainer import TrainConfig, evaluate, load_features, load_model, run_experiment, save_model
from .weighting import COMPONENTS, WeightingConfig, format_float, sample_weight, save_weights

_CONFIG_SECTIONS = {
    "imgqual": ImageQualityConfig,
    "relevance": RelevanceConfig,
    "weighting": WeightingConfig,
    "trainer": TrainConfig,
}


@dataclass(frozen=True)
class PipelineConfig:
    """All module configs in one document; every key optional."""

    imgqual: ImageQualityConfig
    relevance: RelevanceConfig
    weighting: WeightingConfig
    trainer: TrainConfig


@dataclass(frozen=True)
class ScoreRecord:
    """One assessed sample: factor scores, component scores, final weight."""

    id: str
    factors: dict[str, float]
    w_image: float
    w_it: float
    w_ai: float
    raw_mean: float
    weight: float


def default_pipeline_config() -> PipelineConfig:
    return PipelineConfig(
        imgqual=ImageQualityConfig(),
        relevance=RelevanceConfig(),
        weighting=WeightingConfig(),
        trainer=TrainConfig(),
    )


def _build_section(cls, payload: dict, section: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = payload.keys() - known
    if unknown:
        raise MalformedSidecar(f"config section {section!r}: unknown keys {sorted(unknown)}")
    if "enabled_factors" in payload:
        payload = dict(payload, enabled_factors=frozenset(payload["enabled_factors"]))
    try:
        return cls(**payload)
    except (TypeError, ValueError) as exc:
        raise MalformedSidecar(f"config section {section!r}: {exc}") from None


def load_pipeline_config(path: str | Path | None) -> PipelineConfig:
    """Read the nested JSON config; absent file keys fall back to defaults."""
    if path is None:
        return default_pipeline_config()
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedSidecar(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedSidecar("config must be a JSON object")
    unknown = doc.keys() - _CONFIG_SECTIONS.keys()
    if unknown:
        raise MalformedSidecar(f"unknown config sections {sorted(unknown)}")
    sections = {
        name: _build_section(cls, doc.get(name, {}), name)
        for name, cls in _CONFIG_SECTIONS.items()
    }
    return PipelineConfig(**sections)


def _round9(x: float) -> float:
    return float(format_float(x))


def assess_corpus(
    corpus: Corpus,
    images_dir: str | Path,
    tables: dict[str, EmbeddingTable],
    config: PipelineConfig | None = None,
    drop: tuple[str, ...] = (),
) -> list[ScoreRecord]:
    """Score every sample; the core of ``mmdq assess``.

    ``drop`` removes component scores ("image", "it", "ai") from the final
    weight for ablation runs; the dropped scores are still reported.
    """
    cfg = config or default_pipeline_config()
    enabled = tuple(c for c in COMPONENTS if c not in drop)
    problems: list[str] = []
    for sample in corpus.samples:
        if sample.image_file not in tables["image"]:
            problems.append(f"sample {sample.id}: missing image embedding for {sample.image_file}")
        if sample.id not in tables["text"]:
            problems.append(f"sample {sample.id}: missing text embedding")
        if sample.id not in tables["aspect"]:
            problems.append(f"sample {sample.id}: missing aspect embedding")
    if problems:
        raise MalformedSidecar("\n".join(problems))

    images_dir = Path(images_dir)
    contrastive = cfg.relevance.mode == "contrastive"
    ids = [s.id for s in corpus.samples]
    image_keys = [s.image_file for s in corpus.samples]

    records: list[ScoreRecord] = []
    for ordinal, sample in enumerate(corpus.samples):
        try:
            data = (images_dir / sample.image_file).read_bytes()
        except OSError as exc:
            raise IoFailure(f"sample {sample.id}: cannot read image: {exc}") from None
        quality = image_quality(
            data, corpus.ocr_lengths[sample.image_file], corpus.l_max, cfg.imgqual
        )
        img_emb = tables["image"][sample.image_file]
        text_emb = tables["text"][sample.id]
        aspect_emb = tables["aspect"][sample.id]
        neg_texts: list = []
        neg_images: list = []
        if contrastive:
            rng = rng_for_sample(cfg.relevance.rng_seed, ordinal)
            k = cfg.relevance.negatives_per_sample
            neg_texts = [tables["text"][key] for key in sample_negatives(ids, ordinal, k, rng)]
            neg_images = [
                tables["image"][key] for key in sample_negatives(image_keys, ordinal, k, rng)
            ]
        w_it = coarse_relevance(img_emb, text_emb, neg_texts, cfg.relevance)
        w_ai = fine_relevance(aspect_emb, img_emb, neg_images, cfg.relevance)
        sw = sample_weight(quality.w_image, w_it, w_ai, cfg.weighting, enabled=enabled)
        records.append(
            ScoreRecord(
                id=sample.id,
                factors={k: _round9(v) for k, v in quality.per_factor.items()},
                w_image=_round9(quality.w_image),
                w_it=_round9(w_it),
                w_ai=_round9(w_ai),
                raw_mean=_round9(sw.raw_mean),
                weight=_round9(sw.weight),
            )
        )
    return records


def write_score_records(path: str | Path, records: list[ScoreRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(dataclasses.asdict(r)) + "\n")


def read_score_records(path: str | Path) -> list[ScoreRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(ScoreRecord(**json.loads(line)))
    return records


def _detect_kind(path: str | Path) -> str:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                record = json.loads(line)
                return record.get("kind", "")
    raise MalformedSidecar(f"{path}: empty embedding sidecar")


def _load_embedding_tables(paths: list[str]) -> dict[str, EmbeddingTable]:
    tables: dict[str, EmbeddingTable] = {}
    for path in paths:
        kind = _detect_kind(path)
        if kind in tables:
            raise MalformedSidecar(f"duplicate embedding sidecar of kind {kind!r}: {path}")
        tables[kind] = load_embeddings(path, kind)
    missing = {"image", "text", "aspect"} - tables.keys()
    if missing:
        raise MalformedSidecar(f"missing embedding sidecars for kinds {sorted(missing)}")
    return tables


def _config_as_dict(cfg: PipelineConfig) -> dict:
    doc = dataclasses.asdict(cfg)
    doc["imgqual"]["enabled_factors"] = sorted(cfg.imgqual.enabled_factors)
    return doc


def _write_run_sidecar(out_dir: Path, command: str, details: dict) -> None:
    payload = {"tool": f"mmdq {__version__}", "command": command, **details}
    (out_dir / "run.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def cmd_assess(args) -> int:
    cfg = load_pipeline_config(args.config)
    samples = load_manifest(args.manifest)
    corpus = attach_ocr(samples, args.ocr)
    tables = _load_embedding_tables(args.embeddings)
    records = assess_corpus(corpus, args.images, tables, cfg, drop=tuple(args.drop))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_score_records(out / "scores.jsonl", records)
    save_weights(out / "weights.csv", [(r.id, r.weight) for r in records])
    _write_run_sidecar(
        out,
        "assess",
        {
            "config": _config_as_dict(cfg),
            "drop": sorted(args.drop),
            "inputs": {
                "manifest": str(args.manifest),
                "images": str(args.images),
                "ocr": str(args.ocr),
                "embeddings": [str(p) for p in args.embeddings],
            },
        },
    )
    print(f"assessed {len(records)} samples -> {out / 'scores.jsonl'}, {out / 'weights.csv'}")
    return 0


def cmd_stats(args) -> int:
    records = read_score_records(args.report)
    if not records:
        print("no samples")
        return 0
    weights = np.asarray([r.weight for r in records], dtype=np.float64)
    counts, edges = np.histogram(weights, bins=args.bins)
    peak = max(int(c) for c in counts)
    print(f"weights: n={len(weights)}")
    for i, count in enumerate(counts):
        bar = "#" * (0 if peak == 0 else round(40 * int(count) / peak))
        print(f"  [{format_float(edges[i]):>12} .. {format_float(edges[i + 1]):>12}) {count:>7} {bar}")
    print(f"mean={format_float(weights.mean())} median={format_float(float(np.median(weights)))} "
          f"min={format_float(weights.min())} max={format_float(weights.max())}")
    return 0


def _report_dict(report) -> dict:
    return {
        "accuracy": _round9(report.accuracy),
        "macro_f1": _round9(report.macro_f1),
        "per_class_f1": {str(k): _round9(v) for k, v in sorted(report.per_class_f1.items())},
    }


def cmd_train(args) -> int:
    cfg = load_pipeline_config(args.config).trainer
    overrides = {
        "learning_rate": args.learning_rate,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "l2_reg": args.l2_reg,
        "rng_seed": args.seed,
    }
    cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    keys, x, labels = load_features(args.features)
    if not keys:
        raise MalformedSidecar("features file has no records")
    holdout = args.holdout
    if holdout < 0 or holdout >= len(keys):
        raise MalformedSidecar(f"--holdout must lie in [0, {len(keys) - 1}]")
    # holdout=0 means evaluate on the training split itself
    split = len(keys) - holdout
    train_x, train_labels, train_keys = x[:split], labels[:split], keys[:split]
    test_x = x[split:] if holdout else x
    test_labels = labels[split:] if holdout else labels

    if args.weights:
        from .weighting import load_weights

        table = load_weights(args.weights)
        missing = [k for k in train_keys if k not in table]
        if missing:
            raise MalformedSidecar(
                "\n".join(f"sample {k}: missing weight" for k in missing)
            )
        train_w = np.asarray([table[k] for k in train_keys], dtype=np.float64)
    else:
        train_w = np.ones(len(train_keys), dtype=np.float64)

    result = run_experiment(train_x, train_labels, train_w, test_x, test_labels, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "weighted": _report_dict(result.weighted),
        "unweighted": _report_dict(result.unweighted),
        "delta_accuracy": _round9(result.delta_accuracy),
        "delta_macro_f1": _round9(result.delta_macro_f1),
        "n_train": split,
        "n_test": int(holdout) if holdout else split,
    }
    (out / "train_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    save_model(out / "model_weighted.json", result.weighted_model)
    save_model(out / "model_unweighted.json", result.unweighted_model)
    _write_run_sidecar(
        out,
        "train",
        {
            "trainer": dataclasses.asdict(cfg),
            "inputs": {"features": str(args.features), "weights": str(args.weights or "")},
            "holdout": holdout,
        },
    )
    print(
        f"weighted acc={format_float(result.weighted.accuracy)} "
        f"macro_f1={format_float(result.weighted.macro_f1)} | "
        f"unweighted acc={format_float(result.unweighted.accuracy)} "
        f"macro_f1={format_float(result.unweighted.macro_f1)} | "
        f"delta acc={format_float(result.delta_accuracy)}"
    )
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    keys, x, labels = load_features(args.features)
    if not keys:
        raise MalformedSidecar("features file has no records")
    report = evaluate(model, x, labels)
    print(f"accuracy={format_float(report.accuracy)} macro_f1={format_float(report.macro_f1)}")
    for cls in model.classes:
        print(f"  f1[{cls}]={format_float(report.per_class_f1[cls])}")
    if args.out:
        Path(args.out).write_text(
            json.dumps(_report_dict(report), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def _parse_degradation(raw: str) -> tuple[str, float]:
    kind, sep, magnitude = raw.partition("=")
    if not sep or kind not in DEGRADATION_KINDS:
        raise MalformedSidecar(
            f"--degrade expects kind=magnitude with kind in {DEGRADATION_KINDS}, got {raw!r}"
        )
    return kind, float(magnitude)


def cmd_synth(args) -> int:
    degradations = (
        tuple(_parse_degradation(d) for d in args.degrade) if args.degrade else DEFAULT_DEGRADATIONS
    )
    spec = SynthSpec(
        n_samples=args.n,
        feature_dim=args.dim,
        n_classes=args.classes,
        lowq_fraction=args.lowq_fraction,
        label_noise_p=args.label_noise,
        degradations=degradations,
        rng_seed=args.seed,
        image_size=args.image_size,
    )
    result = gen_corpus(spec, args.out)
    print(
        f"generated {len(result.ids)} samples ({len(result.lowq_ids)} low-quality) in {result.out_dir}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmdq", description="Data-uncertainty scoring and loss reweighting for multimodal corpora"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assess", help="score a corpus and emit per-sample weights")
    p.add_argument("--manifest", required=True)
    p.add_argument("--images", required=True, help="directory containing the manifest's image files")
    p.add_argument("--ocr", required=True, help="OCR sidecar (JSON object)")
    p.add_argument("--embeddings", action="append", required=True,
                   help="embedding sidecar; pass three times (image, text, aspect kinds)")
    p.add_argument("--config", default=None)
    p.add_argument("--drop", action="append", default=[], choices=list(COMPONENTS),
                   help="ablate a component score from the final weight")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("stats", help="weight-distribution histogram for a score report")
    p.add_argument("--report", required=True, help="scores.jsonl from assess")
    p.add_argument("--bins", type=int, default=10)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train weighted and unweighted reference classifiers")
    p.add_argument("--features", required=True)
    p.add_argument("--weights", default=None, help="weights.csv from assess; omit for all-ones")
    p.add_argument("--holdout", type=int, default=0, help="hold out the last N samples as the test split")
    p.add_argument("--config", default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--l2-reg", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on a features file")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", default=None, help="optional report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted defects")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--lowq-fraction", type=float, default=0.0)
    p.add_argument("--label-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--image-size", type=int, default=64)
    p.add_argument("--degrade", action="append", default=[],
                   help="kind=magnitude; repeatable; defaults to blur/downscale/ocr_inject")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MmdqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
