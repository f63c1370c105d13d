"""Command-line pipeline: cluster, induce, classify, or all three.

Every command is a pure function of its configuration and input files;
reports carry no timestamps or timings (those go to the log on stderr), so
repeated runs produce byte-identical outputs.

Exit codes: 0 success, 2 parameter errors, 3 I/O errors, 4 data errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from roughseg import _kernels
from roughseg.boundary import find_border_cells, refine_boundaries
from roughseg.classify import (
    Discretizer,
    LabelsFile,
    accuracy,
    build_decision_table,
    classify_image,
    cluster_majority,
    load_rules_json,
    save_rules_json,
    save_rules_text,
)
from roughseg.colorspace import ClusteringParams, HsiImage, HsiPixel
from roughseg.exceptions import DataError, ParameterError, RoughsegError
from roughseg.grid import ClusterInfo, ClusterMap, PassRecord, PerfStats, rough_cluster_with_grid
from roughseg.raster import (
    LabelRaster,
    load_label_map,
    load_ppm,
    palette_color,
    save_label_map,
)
from roughseg.roughset import concepts, indiscernibility_classes, induce_rules, lower_approx

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_IO = 3
EXIT_DATA = 4


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run depends on; all defaults deterministic."""

    image: Path
    out_dir: Path
    theta_band: float = 0.1
    gamma: float | None = None
    theta_fraction: float = 0.9
    grid_n: int = 32
    bins_per_channel: int = 8
    refine: bool = True

    def clustering_params(self) -> ClusteringParams:
        return ClusteringParams(
            theta_band=self.theta_band,
            gamma=self.gamma,
            grid_n=self.grid_n,
            theta_fraction=self.theta_fraction,
        )

    def discretizer(self) -> Discretizer:
        return Discretizer(self.bins_per_channel)


def _write_text(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def save_cluster_map_json(cmap: ClusterMap, grid_n: int, path: Path) -> None:
    payload = {
        "width": cmap.width,
        "height": cmap.height,
        "grid_n": grid_n,
        "clusters": [
            {
                "id": info.cluster_id,
                "seed_pixel_index": info.seed_pixel_index,
                "seed_h": info.seed_pixel.h,
                "seed_s": info.seed_pixel.s,
                "seed_i": info.seed_pixel.i,
                "seed_cell": list(info.seed_cell),
                "member_cells": [list(rc) for rc in info.member_cells],
                "pixel_count": info.member_pixel_count,
                "color": list(palette_color(info.cluster_id)),
            }
            for info in cmap.clusters
        ],
        "passes": [
            {
                "number": rec.number,
                "seed_pixel_index": rec.seed_pixel_index,
                "seed_h": rec.seed_pixel.h,
                "seed_s": rec.seed_pixel.s,
                "seed_i": rec.seed_pixel.i,
                "threshold": rec.threshold,
                "cells_claimed": [list(rc) for rc in rec.cells_claimed],
            }
            for rec in cmap.pass_log
        ],
    }
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def load_cluster_map(json_path: Path, ppm_path: Path) -> ClusterMap:
    """Rebuild a ClusterMap from its JSON record and colored PPM."""
    try:
        payload = json.loads(json_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"unparseable cluster map {json_path}: {exc}") from None
    raster = load_ppm(ppm_path)
    if (raster.width, raster.height) != (payload["width"], payload["height"]):
        raise DataError("cluster map PPM dimensions do not match its JSON record")
    infos = []
    by_color: dict[tuple[int, int, int], int] = {}
    for entry in payload["clusters"]:
        info = ClusterInfo(
            entry["id"],
            HsiPixel(entry["seed_h"], entry["seed_s"], entry["seed_i"]),
            entry["seed_pixel_index"],
            tuple(entry["seed_cell"]),
            [tuple(rc) for rc in entry["member_cells"]],
            entry["pixel_count"],
        )
        infos.append(info)
        by_color[tuple(entry["color"])] = entry["id"]
    assignment = np.empty(raster.n_pixels, dtype=np.int32)
    cache: dict[tuple[int, int, int], int] = {}
    for idx, px in enumerate(map(tuple, raster.pixels.tolist())):
        cid = cache.get(px)
        if cid is None:
            if px not in by_color:
                raise DataError(f"cluster map pixel colour {px} unknown to {json_path}")
            cid = by_color[px]
            cache[px] = cid
        assignment[idx] = cid
    passes = [
        PassRecord(
            rec["number"],
            rec["seed_pixel_index"],
            HsiPixel(rec["seed_h"], rec["seed_s"], rec["seed_i"]),
            rec["threshold"],
            [tuple(rc) for rc in rec["cells_claimed"]],
        )
        for rec in payload.get("passes", [])
    ]
    return ClusterMap(raster.width, raster.height, assignment, infos, passes)


def _cluster_map_raster(cmap: ClusterMap) -> LabelRaster:
    palette = {
        info.cluster_id: (f"cluster{info.cluster_id}", palette_color(info.cluster_id))
        for info in cmap.clusters
    }
    return LabelRaster(
        cmap.width, cmap.height, cmap.assignment.copy(), palette, len(cmap.clusters)
    )


def _cluster_report(cmap: ClusterMap, config: RunConfig) -> str:
    lines = [
        f"image: {config.image}",
        f"size: {cmap.width}x{cmap.height}",
        f"grid_n: {config.grid_n}",
        f"theta_band: {_fmt(config.theta_band)}",
        f"gamma: {'auto' if config.gamma is None else _fmt(config.gamma)}",
        f"theta_fraction: {_fmt(config.theta_fraction)}",
        f"refine: {'on' if config.refine else 'off'}",
        f"clusters: {len(cmap.clusters)}",
        "",
        "id pass seed_hue seed_sat seed_int seed_cell gamma_eff cells pixels",
    ]
    thresholds = {rec.number: rec.threshold for rec in cmap.pass_log}
    for info in cmap.clusters:
        # pass numbers are 1-based and survive recompaction via the log
        pass_no = next(
            (
                rec.number
                for rec in cmap.pass_log
                if rec.seed_pixel_index == info.seed_pixel_index
                and rec.cells_claimed[0] == info.seed_cell
            ),
            info.cluster_id + 1,
        )
        lines.append(
            f"{info.cluster_id} {pass_no} {_fmt(info.seed_pixel.h)} "
            f"{_fmt(info.seed_pixel.s)} {_fmt(info.seed_pixel.i)} "
            f"{info.seed_cell[0]},{info.seed_cell[1]} {_fmt(thresholds.get(pass_no, 0.0))} "
            f"{len(info.member_cells)} {info.member_pixel_count}"
        )
    return "\n".join(lines) + "\n"


def _perf_report(stats: PerfStats) -> str:
    lines = [
        f"n_cells: {stats.n_cells}",
        f"k_seeds: {stats.k_seeds}",
        f"q_border_cells: {stats.q_border_cells}",
        f"r_border_pixels: {stats.r_border_pixels}",
    ]
    return "\n".join(lines) + "\n"


def cmd_cluster(config: RunConfig) -> dict[str, Path]:
    """Rough clustering plus optional refinement; writes all cluster artifacts."""
    image = load_ppm(config.image)
    cmap, stats, grid = rough_cluster_with_grid(image, config.clustering_params())
    border = find_border_cells(cmap, grid)
    stats.q_border_cells = len(border.border_cells)
    stats.r_border_pixels = int(border.border_pixels.size)
    if config.refine:
        t0 = time.perf_counter()
        cmap = refine_boundaries(grid.hsi, cmap, grid)
        stats.wall_times["refine"] = time.perf_counter() - t0
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "map_ppm": out / "clusters.ppm",
        "map_json": out / "clusters.json",
        "report": out / "cluster_report.txt",
        "perf": out / "perf_report.txt",
    }
    save_label_map(_cluster_map_raster(cmap), paths["map_ppm"])
    save_cluster_map_json(cmap, config.grid_n, paths["map_json"])
    _write_text(paths["report"], _cluster_report(cmap, config))
    _write_text(paths["perf"], _perf_report(stats))
    timing = " ".join(f"{k}={v * 1000:.1f}ms" for k, v in stats.wall_times.items())
    logger.info(
        "clustered %s into %d clusters (backend=%s, %s)",
        config.image,
        len(cmap.clusters),
        _kernels.backend_name(),
        timing,
    )
    return paths


def _induce_report(table, rules) -> str:
    partition = indiscernibility_classes(table, table.attributes)
    concept_lines = []
    consistent = True
    for concept in concepts(table):
        lower = lower_approx(concept.members, partition)
        ok = lower == concept.members
        consistent = consistent and ok
        concept_lines.append(
            f"concept {table.decision_label(concept.decision_value)}: "
            f"{len(concept.members)} rows, lower {len(lower)}, "
            f"{'consistent' if ok else 'inconsistent'}"
        )
    certain = sum(1 for r in rules if r.certain)
    lines = [
        f"training_rows: {table.n_rows}",
        f"consistency: {'consistent' if consistent else 'inconsistent'}",
        *concept_lines,
        f"certain_rules: {certain}",
        f"possible_rules: {len(rules) - certain}",
    ]
    return "\n".join(lines) + "\n"


def cmd_induce(config: RunConfig, labels_path: Path) -> dict[str, Path]:
    """Build the training table from labeled clusters and induce rules."""
    out = config.out_dir
    map_json = out / "clusters.json"
    map_ppm = out / "clusters.ppm"
    for needed in (map_json, map_ppm):
        if not needed.exists():
            raise DataError(
                f"missing cluster output {needed}; run the cluster command first"
            )
    image = load_ppm(config.image)
    cmap = load_cluster_map(map_json, map_ppm)
    if (cmap.width, cmap.height) != (image.width, image.height):
        raise DataError("cluster map dimensions do not match the input image")
    labels = LabelsFile.load(labels_path)
    disc = config.discretizer()
    hsi = HsiImage.from_raster(image)
    table = build_decision_table(hsi, cmap, labels, disc)
    rules = induce_rules(table)
    paths = {
        "rules_text": out / "rules.txt",
        "rules_json": out / "rules.json",
        "report": out / "induce_report.txt",
    }
    save_rules_text(rules, paths["rules_text"])
    save_rules_json(rules, disc, paths["rules_json"])
    _write_text(paths["report"], _induce_report(table, rules))
    logger.info(
        "induced %d rules (%d certain) from %d training rows",
        len(rules),
        sum(1 for r in rules if r.certain),
        table.n_rows,
    )
    return paths


def cmd_classify(
    config: RunConfig,
    rules_path: Path,
    target_path: Path | None = None,
    truth_path: Path | None = None,
    clusters_json: Path | None = None,
) -> dict[str, Path]:
    """Classify a raster pixel-wise against a rule base."""
    target = Path(target_path) if target_path is not None else config.image
    rules, disc = load_rules_json(rules_path)
    image = load_ppm(target)
    labels = classify_image(image, rules, disc)
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "classified_ppm": out / "classified.ppm",
        "report": out / "classify_report.txt",
    }
    save_label_map(labels, paths["classified_ppm"])
    n = labels.labels.size
    unclassified = int(np.count_nonzero(labels.labels == labels.unclassified_id))
    lines = [
        f"target: {target}",
        f"size: {labels.width}x{labels.height}",
        f"rules: {len(rules)}",
        f"classified_fraction: {_fmt((n - unclassified) / n)}",
        f"unclassified_fraction: {_fmt(unclassified / n)}",
        "class_counts:",
    ]
    counts = np.bincount(labels.labels, minlength=labels.unclassified_id + 1)
    for label_id in sorted(labels.palette):
        name, _ = labels.palette[label_id]
        lines.append(f"  {name}: {int(counts[label_id])}")
    lines.append(f"  unclassified: {unclassified}")

    map_json = clusters_json if clusters_json is not None else out / "clusters.json"
    map_ppm = map_json.with_suffix(".ppm")
    if map_json.exists() and map_ppm.exists():
        cmap = load_cluster_map(map_json, map_ppm)
        if (cmap.width, cmap.height) == (labels.width, labels.height):
            lines.append("cluster_majority:")
            for cid, name, count, size in cluster_majority(cmap, labels):
                shown = name if name is not None else "unclassified"
                lines.append(f"  cluster{cid}: {shown} ({count}/{size})")
    if truth_path is not None:
        truth = load_label_map(truth_path)
        score = accuracy(labels, truth)
        lines.append(f"accuracy: {_fmt(score)}")
        logger.info("accuracy vs %s: %.6f", truth_path, score)
    _write_text(paths["report"], "\n".join(lines) + "\n")
    logger.info(
        "classified %s: %.2f%% of pixels covered",
        target,
        100.0 * (n - unclassified) / n,
    )
    return paths


def cmd_pipeline(
    config: RunConfig, labels_path: Path | None, truth_path: Path | None = None
) -> dict[str, Path]:
    """cluster -> induce -> classify, stopping early when labels are absent."""
    paths = cmd_cluster(config)
    if labels_path is None:
        print(
            "clustering done; write a labels file (one '<cluster_id> <class_name>' "
            f"per line, see {paths['report']}) and rerun with --labels to induce rules",
            file=sys.stderr,
        )
        return paths
    paths.update(cmd_induce(config, labels_path))
    paths.update(
        cmd_classify(
            config,
            config.out_dir / "rules.json",
            target_path=config.image,
            truth_path=truth_path,
        )
    )
    return paths


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("image", type=Path, help="input PPM image (P3 or P6, maxval 255)")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--theta", type=float, default=0.1, help="band distance threshold")
    parser.add_argument(
        "--gamma", default="auto", help="cell claiming ratio in [0,1], or 'auto'"
    )
    parser.add_argument(
        "--theta-fraction",
        type=float,
        default=0.9,
        help="auto-gamma multiplier applied to the seed cell ratio",
    )
    parser.add_argument("--grid-n", type=int, default=32, help="cells per image side")
    parser.add_argument("--bins", type=int, default=8, help="discretizer bins per channel")
    parser.add_argument(
        "--no-refine", action="store_true", help="skip the boundary refinement phase"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughseg",
        description="grid-density rough clustering and rough-set rule classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cluster = sub.add_parser("cluster", help="segment an image into clusters")
    _add_common(p_cluster)

    p_induce = sub.add_parser("induce", help="induce rules from labeled clusters")
    _add_common(p_induce)
    p_induce.add_argument("--labels", type=Path, required=True, help="cluster labels file")

    p_classify = sub.add_parser("classify", help="classify an image against a rule base")
    _add_common(p_classify)
    p_classify.add_argument("--rules", type=Path, default=None, help="rules.json path")
    p_classify.add_argument("--truth", type=Path, default=None, help="ground-truth label map")
    p_classify.add_argument(
        "--clusters", type=Path, default=None, help="clusters.json for per-cluster labels"
    )

    p_pipe = sub.add_parser("pipeline", help="cluster, induce and classify in sequence")
    _add_common(p_pipe)
    p_pipe.add_argument("--labels", type=Path, default=None, help="cluster labels file")
    p_pipe.add_argument("--truth", type=Path, default=None, help="ground-truth label map")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.gamma == "auto":
        gamma = None
    else:
        try:
            gamma = float(args.gamma)
        except ValueError:
            raise ParameterError(f"--gamma expects a number or 'auto', got {args.gamma!r}") from None
    return RunConfig(
        image=args.image,
        out_dir=args.out,
        theta_band=args.theta,
        gamma=gamma,
        theta_fraction=args.theta_fraction,
        grid_n=args.grid_n,
        bins_per_channel=args.bins,
        refine=not args.no_refine,
    )


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "cluster":
            cmd_cluster(config)
        elif args.command == "induce":
            cmd_induce(config, args.labels)
        elif args.command == "classify":
            rules_path = args.rules if args.rules is not None else config.out_dir / "rules.json"
            cmd_classify(
                config,
                rules_path,
                target_path=args.image,
                truth_path=args.truth,
                clusters_json=args.clusters,
            )
        elif args.command == "pipeline":
            cmd_pipeline(config, args.labels, truth_path=args.truth)
    except ParameterError as exc:
        print(f"roughseg: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except DataError as exc:
        print(f"roughseg: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RoughsegError as exc:
        print(f"roughseg: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"roughseg: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def entrypoint() -> None:
    raise SystemExit(main())
