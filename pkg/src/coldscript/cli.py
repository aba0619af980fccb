"""Command-line surface binding the pipeline end to end.

Subcommands: preprocess (page -> line crops), extract (line images ->
feature CSV), plot (cold distributions as PNG), train (feature CSV ->
model JSON + CV report), predict (model + line images -> labels).

Exit codes: 0 success, 1 partial failure (some manifest rows failed), 2
invalid config or usage. Every PipelineConfig field is exposed as a flag
of the same name (dashes for underscores); --config takes a JSON file
with the same keys and explicit flags win over it. The COLDSCRIPT_LOG
environment variable (DEBUG/INFO/WARNING/ERROR) selects log verbosity.
"""

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, classify, cold, image_io, pipeline
from .config import PipelineConfig
from .errors import ColdScriptError, ConfigError

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2

log = logging.getLogger("coldscript")


# ---------------------------------------------------------------- config


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline config")
    group.add_argument(
        "--config", metavar="FILE",
        help="JSON file of PipelineConfig fields (flags override it)",
    )
    for f in dataclasses.fields(PipelineConfig):
        group.add_argument(
            f"--{f.name.replace('_', '-')}",
            dest=f.name, type=f.type, default=None, metavar=f.type.__name__.upper(),
            help=f"PipelineConfig.{f.name} (default {f.default})",
        )


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(PipelineConfig)
        if getattr(args, f.name, None) is not None
    }
    return config.replace(**overrides).validate()


# ---------------------------------------------------------------- manifests


def _read_manifest(path: str | Path) -> list[dict]:
    """Rows of path,label[,writer]; paths resolve relative to the manifest."""
    path = Path(path)
    base = path.parent
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        if names[:2] != ["path", "label"]:
            raise ConfigError(
                f"{path}: manifest header must start with 'path,label', got {names}"
            )
        rows = []
        for n, row in enumerate(reader, start=2):
            given, label = row.get("path") or "", row.get("label") or ""
            if not given or not label:
                raise ConfigError(f"{path}:{n}: empty path or label")
            rows.append({
                "given": given,
                "path": base / given,
                "label": label,
                "writer": row.get("writer") or "",
            })
    if not rows:
        raise ConfigError(f"{path}: manifest has no rows")
    return rows


def _safe_name(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in label)


# ---------------------------------------------------------------- commands


def cmd_preprocess(args: argparse.Namespace) -> int:
    config = _build_config(args)
    rows = _read_manifest(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    pages, failures, total_lines = [], 0, 0
    for row in rows:
        entry = {"path": row["given"], "label": row["label"]}
        try:
            img = image_io.read_image(row["path"])
            result = pipeline.preprocess_page(img, config)
        except (OSError, ColdScriptError) as exc:
            log.error("%s: %s", row["given"], exc)
            entry["error"] = str(exc)
            failures += 1
        else:
            stem = Path(row["given"]).stem
            crops = []
            for i, line in enumerate(result.lines):
                name = f"{stem}_line{i}.png"
                image_io.write_png(line.crop, out_dir / name)
                crops.append(name)
            if not result.lines:
                log.warning("%s: no text lines found", row["given"])
            total_lines += len(result.lines)
            entry.update(
                spans=[[line.y_start, line.y_end] for line in result.lines],
                stats=result.stats,
                crops=crops,
            )
        pages.append(entry)

    report = {"config": config.to_dict(), "pages": pages}
    image_io.atomic_write_text(
        json.dumps(report, indent=1) + "\n", out_dir / "preprocess_report.json"
    )
    print(f"pages {len(rows)}  lines {total_lines}  failures {failures}")
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    config = _build_config(args)
    rows = _read_manifest(args.manifest)
    debug_dir = Path(args.debug_dir) if args.debug_dir else None
    if debug_dir:
        debug_dir.mkdir(parents=True, exist_ok=True)

    csv_rows, failures = [], 0
    for row in rows:
        try:
            img = image_io.read_image(row["path"])
        except (OSError, ColdScriptError) as exc:
            log.error("%s: %s", row["given"], exc)
            failures += 1
            continue
        vec, dist = pipeline.line_features(img, config)
        if dist is None or not vec.any():
            log.warning("%s: empty distribution, writing zero vector", row["given"])
        csv_rows.append(",".join([row["label"]] + [repr(float(v)) for v in vec]))
        if debug_dir:
            edges, point_sets = pipeline.line_stages(img, config)
            stem = _safe_name(Path(row["given"]).stem)
            image_io.write_pgm(edges.astype(np.uint8) * 255, debug_dir / f"{stem}_edges.pgm")
            points = "".join(
                f"{x},{y}\n" for dps in point_sets for x, y in dps.points
            )
            image_io.atomic_write_text(points, debug_dir / f"{stem}_points.txt")

    header = "label," + ",".join(f"v{i + 1}" for i in range(config.bins))
    image_io.atomic_write_text("\n".join([header] + csv_rows) + "\n", args.out)
    print(f"rows {len(csv_rows)}  failures {failures}  -> {args.out}")
    return EXIT_PARTIAL if failures else EXIT_OK


def _empty_distribution(config: PipelineConfig) -> cold.ColdDistribution:
    return cold.ColdDistribution(
        theta=np.empty(0), r=np.empty(0), plane_radius=float(config.plane_radius)
    )


def cmd_plot(args: argparse.Namespace) -> int:
    config = _build_config(args)
    src = Path(args.input)

    if src.suffix.lower() != ".csv":  # single line image -> one PNG at --out
        img = image_io.read_image(src)
        dist = pipeline.line_distribution(img, config)
        if dist is None:
            log.warning("%s: empty distribution, plotting axes only", src)
            dist = _empty_distribution(config)
        cold.render_plot(dist, args.out)
        print(f"{src} -> {args.out}")
        return EXIT_OK

    rows = _read_manifest(src)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(row["label"], []).append(row)

    failures = 0
    for label in sorted(groups):
        merged = _empty_distribution(config)
        for row in groups[label]:
            try:
                img = image_io.read_image(row["path"])
            except (OSError, ColdScriptError) as exc:
                log.error("%s: %s", row["given"], exc)
                failures += 1
                continue
            dist = pipeline.line_distribution(img, config)
            if dist is not None:
                merged = cold.merge(merged, dist)
        if merged.count == 0:
            log.warning("class %s: empty distribution, plotting axes only", label)
        cold.render_plot(merged, out_dir / f"{_safe_name(label)}.png")
    print(f"classes {len(groups)}  failures {failures}  -> {out_dir}")
    return EXIT_PARTIAL if failures else EXIT_OK


def _read_feature_csv(path: str | Path) -> tuple[np.ndarray, list[str]]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise ConfigError(f"{path}: expected a 'label,v1,...' header")
        width = len(header) - 1
        labels, vecs = [], []
        for n, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width + 1:
                raise ConfigError(f"{path}:{n}: expected {width + 1} columns, got {len(row)}")
            try:
                vecs.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ConfigError(f"{path}:{n}: {exc}") from exc
            labels.append(row[0])
    if not labels:
        raise ConfigError(f"{path}: no feature rows")
    return np.asarray(vecs), labels


def _format_confusion(cm: classify.ConfusionMatrix) -> str:
    pct = cm.percentages()
    width = max(max(len(n) for n in cm.classes), 6) + 2
    lines = [" " * width + "".join(f"{n:>{width}}" for n in cm.classes)]
    for i, name in enumerate(cm.classes):
        lines.append(
            f"{name:<{width}}"
            + "".join(f"{pct[i, j]:>{width}.1f}" for j in range(len(cm.classes)))
        )
    return "\n".join(lines)


def cmd_train(args: argparse.Namespace) -> int:
    config = _build_config(args)
    x, labels = _read_feature_csv(args.features)
    if x.shape[1] != config.bins:
        raise ConfigError(
            f"{args.features} has {x.shape[1]} feature bins but config.bins "
            f"is {config.bins}"
        )
    data = classify.LabeledDataset.build(x, labels)

    cm = classify.cross_validate(
        data, folds=config.folds, c=config.c, gamma=config.gamma, seed=config.seed
    )
    print(f"{config.folds}-fold cross-validation, row percents:")
    print(_format_confusion(cm))
    print(f"CR (%) {cm.classification_rate:.1f}")

    model = classify.train_multiclass(
        data, c=config.c, gamma=config.gamma, feature_config=config.feature_config()
    )
    classify.save_model(model, args.out)
    print(f"model -> {args.out}")
    return EXIT_OK


def _feature_config_diff(model_cfg: dict, flag_cfg: dict) -> str:
    lines = []
    for key in sorted(set(model_cfg) | set(flag_cfg)):
        mv, fv = model_cfg.get(key), flag_cfg.get(key)
        if mv != fv:
            lines.append(f"  {key}: model={mv!r} flags={fv!r}")
    return "\n".join(lines)


def cmd_predict(args: argparse.Namespace) -> int:
    model = classify.load_model(args.model)
    config = _build_config(args)
    if model.feature_config:
        diff = _feature_config_diff(model.feature_config, config.feature_config())
        if diff:
            log.error(
                "refusing to predict: model and flags disagree on the feature "
                "configuration\n%s", diff,
            )
            return EXIT_USAGE

    failures = 0
    for img_path in args.images:
        try:
            img = image_io.read_image(img_path)
        except (OSError, ColdScriptError) as exc:
            log.error("%s: %s", img_path, exc)
            failures += 1
            continue
        vec, _ = pipeline.line_features(img, config)
        label, scores = classify.predict(model, vec)
        print(",".join([str(img_path), label] + [f"{s:.6f}" for s in scores]))
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldscript",
        description="Handwriting style identification from line-distribution clouds.",
    )
    parser.add_argument("--version", action="version", version=f"coldscript {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="split scanned pages into line crops")
    p.add_argument("manifest", help="CSV of path,label[,writer] page images")
    p.add_argument("-o", "--out-dir", required=True, help="directory for crops + report")
    _add_config_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("extract", help="feature CSV from line images")
    p.add_argument("manifest", help="CSV of path,label[,writer] line images")
    p.add_argument("-o", "--out", required=True, help="output feature CSV")
    p.add_argument("--debug-dir", help="also dump edge maps (PGM) and dominant points")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("plot", help="plot cold distributions")
    p.add_argument("input", help="a line image, or a manifest CSV for per-class plots")
    p.add_argument("-o", "--out", required=True,
                   help="output PNG (image input) or directory (manifest input)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("train", help="train an SVM on a feature CSV")
    p.add_argument("features", help="feature CSV from the extract command")
    p.add_argument("-o", "--out", required=True, help="output model JSON")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label line images with a trained model")
    p.add_argument("model", help="model JSON from the train command")
    p.add_argument("images", nargs="+", help="line images to classify")
    _add_config_flags(p)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = getattr(logging, os.environ.get("COLDSCRIPT_LOG", "WARNING").upper(), None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ColdScriptError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
