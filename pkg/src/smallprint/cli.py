"""Command-line front end for the evaluation protocol.

Three subcommands mirror the protocol stages so partial reruns stay cheap:

* ``extract``: segment raw acquisitions and crop sensor-sized patches;
* ``score``:   split enrollment/candidates and write the score table;
* ``roc``:     turn score tables into ROC CSVs and one overlay SVG.

Exit codes: 0 success, 1 data failure, 2 usage error. A config file overrides
the built-in defaults and command-line flags override the config file.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .config import (RunConfig, SyntheticSpec, canonical_json, config_to_dict,
                     load_config)
from .dataset import (extract_center_patch, index_dataset, load_patchset,
                      segment_foreground)
from .errors import DatasetError, ParameterError, SmallprintError
from .evaluation import (canonical_method, compute_roc, make_scorer,
                         read_score_table, score_table, split_enrollment,
                         write_roc_csv, write_score_table)
from .image import load_image, save_image
from .svgplot import write_roc_svg
from .synthetic import build_synthetic_patchset


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smallprint",
        description="Fingerprint matching benchmarks for small imaging "
                    "sensors: patch extraction, score tables and ROC curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON run config (flags override it)")
    common.add_argument("--out", metavar="DIR", help="output directory")

    p_extract = sub.add_parser(
        "extract", parents=[common],
        help="crop centered sensor-sized patches from a dataset tree")
    p_extract.add_argument("--root", metavar="DIR", help="dataset root "
                           "(root/<person>/<finger>/<acq>.png|pgm)")
    p_extract.add_argument("--patch-size", type=int, metavar="N")
    p_extract.add_argument("--skip-bad", action="store_true", default=None,
                           help="keep going when files fail to load or crop")

    p_score = sub.add_parser(
        "score", parents=[common],
        help="build the candidates-by-fingers score table")
    p_score.add_argument("--method", metavar="NAME",
                         help="zncc, harris-ssd or dog-hist (alias: sift)")
    p_score.add_argument("--root", metavar="DIR",
                         help="patch dataset root (omit to use the config's "
                              "dataset or synthetic spec)")
    p_score.add_argument("--synthetic", action="store_true", default=None,
                         help="score the built-in synthetic dataset")
    p_score.add_argument("--n-enroll", type=int, metavar="N")
    p_score.add_argument("--seed", type=int, metavar="SEED")
    p_score.add_argument("--workers", type=int, metavar="N")

    p_roc = sub.add_parser(
        "roc", parents=[common],
        help="compute ROC curves from one or more score tables")
    p_roc.add_argument("tables", nargs="+", metavar="SCORES.csv")
    return parser


def _assemble_config(args: argparse.Namespace,
                     parser: argparse.ArgumentParser) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "method", None) is not None:
        try:
            overrides["method"] = canonical_method(args.method)
        except ParameterError as exc:
            parser.error(str(exc))  # exits 2
    if getattr(args, "root", None) is not None:
        overrides["dataset_root"] = args.root
    if getattr(args, "synthetic", None):
        overrides["synthetic"] = cfg.synthetic or SyntheticSpec()
    if getattr(args, "n_enroll", None) is not None:
        overrides["n_enroll"] = args.n_enroll
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "patch_size", None) is not None:
        overrides["patch_size"] = args.patch_size
    if getattr(args, "skip_bad", None) is not None:
        overrides["skip_bad"] = args.skip_bad
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    try:
        return dataclasses.replace(cfg, **overrides) if overrides else cfg
    except ParameterError as exc:
        parser.error(str(exc))


def cmd_extract(cfg: RunConfig) -> int:
    """Write centered patches mirroring the dataset tree, plus a manifest.

    The manifest is deterministic for a fixed config, so reruns are
    byte-identical.
    """
    if not cfg.dataset_root:
        raise DatasetError("extract needs a dataset root "
                           "(--root or dataset_root in the config)")
    out = Path(cfg.out_dir)
    patches_dir = out / "patches"
    index = index_dataset(cfg.dataset_root, skip_bad=cfg.skip_bad)
    rows = ["person_id,finger_id,acquisition_id,source,patch,status"]
    failures = len(index.errors)
    extracted = 0
    for path, message in index.errors:
        rows.append(f",,,{path},,error: {message.replace(',', ';')}")
    for entry in index.entries:
        rel = Path("patches") / entry.person_id / entry.finger_id \
            / f"{entry.acquisition_id}.png"
        try:
            img = load_image(entry.path)
            mask = segment_foreground(img, cfg.segmentation.foreground)
            patch = extract_center_patch(img, mask, cfg.patch_size)
        except SmallprintError as exc:
            failures += 1
            rows.append(f"{entry.person_id},{entry.finger_id},"
                        f"{entry.acquisition_id},{entry.path},,"
                        f"error: {str(exc).replace(',', ';')}")
            continue
        dest = out / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        save_image(patch, dest)
        extracted += 1
        rows.append(f"{entry.person_id},{entry.finger_id},"
                    f"{entry.acquisition_id},{entry.path},{rel},ok")
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.csv").write_text("\n".join(rows) + "\n")
    (out / "extract_config.json").write_text(canonical_json(cfg))
    print(f"extracted {extracted} patches -> {patches_dir} "
          f"({failures} failure(s))")
    if failures and not cfg.skip_bad:
        return 1
    return 0


def _load_patches(cfg: RunConfig):
    if cfg.synthetic is not None:
        s = cfg.synthetic
        return build_synthetic_patchset(
            s.n_fingers, s.n_acquisitions, s.size, s.ridge_period,
            s.n_minutiae, s.seed)
    if cfg.dataset_root:
        index = index_dataset(cfg.dataset_root, skip_bad=cfg.skip_bad)
        return load_patchset(index)
    raise DatasetError("score needs --root, --synthetic, or a config with "
                       "a dataset_root or synthetic spec")


def cmd_score(cfg: RunConfig) -> int:
    """Split enrollment, run the exhaustive comparison, write the table."""
    patches = _load_patches(cfg)
    split = split_enrollment(patches, cfg.n_enroll, cfg.seed)
    scorer = make_scorer(cfg.method, cfg.zncc, cfg.ransac, cfg.harris,
                         cfg.dog, cfg.patch_halfwidth)
    workers = cfg.workers or os.cpu_count() or 1
    table = score_table(split, scorer, workers=workers,
                        aggregate=cfg.aggregate,
                        config=config_to_dict(cfg))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"scores_{cfg.method}.csv"
    write_score_table(table, csv_path, csv_path.with_suffix(".json"))
    print(f"wrote {csv_path} ({len(table.candidate_ids)} candidates x "
          f"{len(table.fingers)} fingers)")
    return 0


def cmd_roc(cfg: RunConfig, tables: list[str]) -> int:
    """ROC CSV per table plus a combined SVG with one curve per method."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves = []
    for path in tables:
        table = read_score_table(Path(path))
        points = compute_roc(table)
        roc_path = out / f"{Path(path).stem}_roc.csv"
        write_roc_csv(points, roc_path)
        curves.append((table.method, points))
        print(f"wrote {roc_path}")
    svg_path = out / "roc.svg"
    write_roc_svg(curves, svg_path)
    print(f"wrote {svg_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _assemble_config(args, parser)
    try:
        if args.command == "extract":
            return cmd_extract(cfg)
        if args.command == "score":
            return cmd_score(cfg)
        return cmd_roc(cfg, args.tables)
    except SmallprintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
