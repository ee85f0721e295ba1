"""Command-line front end.

Three modes share one entry point::

    embryoseg --input egg.ppm [--dump-stages] [--order clahe-he]
    embryoseg --eval manifest.json [--jobs N]
    embryoseg --gen-corpus N SEED [--noise SIGMA]

Exit codes: 0 success, 2 input error, 3 config error, 4 internal invariant
failure.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from . import pnm
from .enhancement import Order, enhance_pipeline
from .pipeline import ConfigError, PipelineConfig, evaluate_corpus, run
from .raster import histogram
from .synthetic import SyntheticEggSpec, generate_synthetic_egg, synthetic_corpus
from .watershed import (InvariantError, check_label_map, colorize_labels, label_summary,
                        labels_to_pgm16)

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_INTERNAL = 4

log = logging.getLogger("embryoseg")


class InputError(Exception):
    pass


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_histogram_csv(path, img):
    h = histogram(img)
    _write_csv(path, ["level", "count"], [(i, int(c)) for i, c in enumerate(h)])


def load_config(path=None, overrides=None) -> PipelineConfig:
    """Defaults, then the JSON file, then command-line overrides."""
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(values, dict):
            raise ConfigError("config must be a JSON object")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return PipelineConfig.from_dict(values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _config_record(config):
    """Config as stored in reports; the output location is left out so
    reruns into different directories stay byte-identical."""
    d = config.to_dict()
    d.pop("out_dir")
    return d


def _scaled_distance(dist):
    d = dist.values
    top = d.max()
    if top == 0:
        return np.zeros(d.shape, dtype=np.uint8)
    return np.floor(d / top * 255 + 0.5).astype(np.uint8)


def dump_stages(result, stage_dir):
    os.makedirs(stage_dir, exist_ok=True)
    s = result.stages
    images = [
        ("01_gray.pgm", s["gray"]),
        ("02_enhanced.pgm", s["enhanced"]),
        ("03_denoised.pgm", s["denoised"]),
        ("04_bw.pgm", s["bw"]),
        ("05_filtered.pgm", s["filtered"]),
        ("06_negated.pgm", s["negated"]),
        ("07_distance.pgm", _scaled_distance(s["distance"])),
        ("08_labels.ppm", colorize_labels(s["labels"])),
        ("egg_mask.pgm", result.egg_mask),
    ]
    for name, arr in images:
        pnm.write_image(os.path.join(stage_dir, name), arr)
    write_histogram_csv(os.path.join(stage_dir, "hist_gray.csv"), s["gray"])
    return [name for name, _ in images]


def run_pipeline(input_path, config: PipelineConfig) -> int:
    try:
        img = pnm.read_image(input_path)
    except pnm.ImageFormatError as exc:
        raise InputError(str(exc)) from None
    if img.dtype != np.uint8:
        raise InputError("only 8-bit images are supported")
    try:
        result = run(img, config)
    except ValueError as exc:
        raise InputError(f"cannot process {input_path}: {exc}") from None
    labels = result.stages["labels"]
    check_label_map(labels, result.stages["filtered"])

    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    pnm.write_image(os.path.join(out, "labels.pgm"), labels_to_pgm16(labels))
    _write_json(os.path.join(out, "labels.json"),
                {"schema_version": SCHEMA_VERSION, **label_summary(labels)})
    if config.dump_stages:
        stage_dir = os.path.join(out, "stages")
        dump_stages(result, stage_dir)
        gray = result.stages["gray"]
        for order in Order:
            enhanced = enhance_pipeline(gray, order, config.clahe)
            write_histogram_csv(os.path.join(stage_dir, f"hist_{order.value}.csv"), enhanced)
    verdict = {
        "schema_version": SCHEMA_VERSION,
        "input": os.path.basename(os.fspath(input_path)),
        "threshold": result.threshold,
        "config": _config_record(config),
        **result.detection.as_dict(),
    }
    _write_json(os.path.join(out, "detection.json"), verdict)
    print(json.dumps(result.detection.as_dict(), sort_keys=True))
    return EXIT_OK


def load_manifest(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest {path} is not valid JSON: {exc}") from None
    if isinstance(data, dict):
        data = data.get("specs")
    if not isinstance(data, list) or not data:
        raise ConfigError("manifest must hold a non-empty list of specs")
    try:
        return [SyntheticEggSpec.from_dict(d) for d in data]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad manifest entry: {exc}") from None


REPORT_COLUMNS = ["index", "seed", "truth", "predicted", "threshold", "num_regions",
                  "embryo_area_fraction", "error"]


def run_eval(manifest_path, config: PipelineConfig, jobs=1) -> int:
    specs = load_manifest(manifest_path)
    cm, acc, records = evaluate_corpus(specs, config, jobs=jobs)
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    _write_json(os.path.join(out, "report.json"), {
        "schema_version": SCHEMA_VERSION,
        "matrix": cm.as_dict(),
        "accuracy": float(acc),
        "accuracy_exact": f"{acc.numerator}/{acc.denominator}",
        "config": _config_record(config),
        "records": records,
    })
    _write_csv(os.path.join(out, "report.csv"), REPORT_COLUMNS,
               [["" if r[c] is None else r[c] for c in REPORT_COLUMNS] for r in records])
    print(f"{float(acc):.4f}")
    return EXIT_OK


def gen_corpus(n, seed, out_dir, noise=0.0) -> int:
    try:
        specs = synthetic_corpus(n, seed, noise=noise)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    img_dir = os.path.join(out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)
    for i, spec in enumerate(specs):
        rgb, truth, egg = generate_synthetic_egg(spec)
        pnm.write_image(os.path.join(img_dir, f"egg_{i:04d}.ppm"), rgb)
        pnm.write_image(os.path.join(img_dir, f"egg_{i:04d}_truth.pgm"), truth)
        pnm.write_image(os.path.join(img_dir, f"egg_{i:04d}_egg.pgm"), egg)
    _write_json(os.path.join(out_dir, "manifest.json"), {
        "schema_version": SCHEMA_VERSION,
        "specs": [s.as_dict() for s in specs],
    })
    print(os.path.join(out_dir, "manifest.json"))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="embryoseg", description=__doc__.split("\n\n")[0])
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--input", help="PPM/PGM (or PNG) image to segment")
    mode.add_argument("--eval", metavar="MANIFEST", help="evaluate a synthetic corpus manifest")
    mode.add_argument("--gen-corpus", nargs=2, type=int, metavar=("N", "SEED"),
                      help="write N synthetic eggs and a manifest")
    p.add_argument("--config", help="flat JSON pipeline config")
    p.add_argument("--out-dir", help="output directory (default: out)")
    p.add_argument("--dump-stages", action="store_true", default=None,
                   help="write every intermediate stage image")
    p.add_argument("--order", choices=[o.value for o in Order], help="enhancement order")
    p.add_argument("--noise", type=float, default=0.0, help="noise sigma for --gen-corpus")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for --eval")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {"out_dir": args.out_dir, "dump_stages": args.dump_stages, "order": args.order}
    try:
        config = load_config(args.config, overrides)
        if args.gen_corpus:
            n, seed = args.gen_corpus
            return gen_corpus(n, seed, config.out_dir, args.noise)
        if args.eval:
            return run_eval(args.eval, config, jobs=max(1, args.jobs))
        return run_pipeline(args.input, config)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
