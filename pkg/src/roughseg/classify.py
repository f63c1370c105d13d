"""Training-table construction, discretization and pixel-wise classification.

Training examples are per-pixel: every pixel of every labeled cluster
contributes one row of (h_bin, s_bin, i_bin) attribute codes plus the
cluster's class name. Binning is equal-width per channel over the fixed
ranges H in [0, 360), S and I in [0, 1]; the last bin absorbs the closed
upper end.

Classification applies the rule base per pixel. Among fully matching
rules, certain rules beat possible ones, then the class with the highest
summed strength wins, then the class of the earliest matching rule. When
nothing matches fully, every rule votes for its class with weight
strength * (matched conditions / total conditions); zero total weight
leaves the pixel unclassified rather than guessing.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from roughseg import _kernels as K
from roughseg.colorspace import HsiImage, HsiPixel
from roughseg.exceptions import DataError, ParameterError
from roughseg.grid import ClusterMap
from roughseg.raster import ImageRaster, LabelRaster, palette_color
from roughseg.roughset import AVPair, DecisionTable, Rule

logger = logging.getLogger(__name__)

ATTRIBUTES = ("h_bin", "s_bin", "i_bin")
_CHANNEL_SCALE = {"h_bin": 360.0, "s_bin": 1.0, "i_bin": 1.0}


@dataclass(frozen=True)
class Discretizer:
    """Equal-width binning of HSI components into integer attribute codes."""

    bins_per_channel: int = 8

    def __post_init__(self):
        if self.bins_per_channel < 1:
            raise ParameterError(f"bins_per_channel must be positive, got {self.bins_per_channel}")

    def bin_pixel(self, p: HsiPixel) -> tuple[int, int, int]:
        bins = self.bins_per_channel
        hb = int(bins * (p.h / 360.0))
        sb = int(bins * p.s)
        ib = int(bins * p.i)
        cap = bins - 1
        return min(hb, cap), min(sb, cap), min(ib, cap)

    def bin_planes(self, hsi: HsiImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        bins = self.bins_per_channel
        cap = bins - 1
        hb = np.minimum((bins * (hsi.h / 360.0)).astype(np.int32), cap)
        sb = np.minimum((bins * hsi.s).astype(np.int32), cap)
        ib = np.minimum((bins * hsi.i).astype(np.int32), cap)
        return hb, sb, ib


@dataclass(frozen=True)
class LabelsFile:
    """Human-written mapping from cluster id to class name."""

    entries: dict[int, str]

    def __post_init__(self):
        for cid, name in self.entries.items():
            if cid < 0:
                raise DataError(f"cluster id must be non-negative, got {cid}")
            if not name or any(ch.isspace() for ch in name):
                raise DataError(f"class name must be non-empty without whitespace: {name!r}")
            if name == "unclassified":
                raise DataError("class name 'unclassified' is reserved")

    @classmethod
    def parse(cls, text: str) -> "LabelsFile":
        entries: dict[int, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"labels file line {lineno}: expected '<cluster_id> <class_name>'")
            try:
                cid = int(parts[0])
            except ValueError:
                raise DataError(f"labels file line {lineno}: bad cluster id {parts[0]!r}") from None
            if cid in entries:
                raise DataError(f"labels file line {lineno}: duplicate cluster id {cid}")
            entries[cid] = parts[1]
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "LabelsFile":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        lines = [f"{cid} {name}" for cid, name in sorted(self.entries.items())]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_decision_table(
    hsi: HsiImage, cmap: ClusterMap, labels: LabelsFile, disc: Discretizer
) -> DecisionTable:
    """One example per pixel of every labeled cluster."""
    known = {info.cluster_id for info in cmap.clusters}
    unknown = sorted(set(labels.entries) - known)
    if unknown:
        raise DataError(f"labels file references unknown cluster id {unknown[0]}")
    labeled = [info for info in cmap.clusters if info.cluster_id in labels.entries]
    skipped = [info.cluster_id for info in cmap.clusters if info.cluster_id not in labels.entries]
    if skipped:
        logger.info("clusters without labels excluded from training: %s", skipped)
    if not labeled:
        raise DataError("no labeled clusters; nothing to train on")
    class_names: list[str] = []
    for info in labeled:
        name = labels.entries[info.cluster_id]
        if name not in class_names:
            class_names.append(name)
    if len(class_names) < 2:
        raise DataError("training requires at least two distinct class names")
    hb, sb, ib = disc.bin_planes(hsi)
    rows: list[tuple[int, int, int]] = []
    decisions: list[int] = []
    for info in labeled:
        code = class_names.index(labels.entries[info.cluster_id])
        for idx in cmap.pixels_of(info.cluster_id).tolist():
            rows.append((int(hb[idx]), int(sb[idx]), int(ib[idx])))
            decisions.append(code)
    return DecisionTable(
        ATTRIBUTES, rows, decisions, value_names={"class": tuple(class_names)}
    )


@dataclass(frozen=True)
class CompiledRules:
    """Rule base flattened into arrays for the classification kernel."""

    class_names: tuple[str, ...]
    cond_attr: np.ndarray
    cond_val: np.ndarray
    rule_start: np.ndarray
    rule_class: np.ndarray
    rule_certain: np.ndarray
    rule_strength: np.ndarray


def compile_rules(rules: Sequence[Rule]) -> CompiledRules:
    if not rules:
        raise DataError("empty rule list")
    class_names: list[str] = []
    attr_index = {a: k for k, a in enumerate(ATTRIBUTES)}
    cond_attr: list[int] = []
    cond_val: list[int] = []
    rule_start = [0]
    rule_class: list[int] = []
    rule_certain: list[int] = []
    rule_strength: list[float] = []
    for rule in rules:
        if not rule.conditions:
            raise DataError("rule with no conditions")
        name = rule.label()
        if name not in class_names:
            class_names.append(name)
        for pair in rule.conditions:
            if pair.attribute not in attr_index:
                raise DataError(f"rule condition on unknown attribute {pair.attribute!r}")
            cond_attr.append(attr_index[pair.attribute])
            cond_val.append(pair.value)
        rule_start.append(len(cond_attr))
        rule_class.append(class_names.index(name))
        rule_certain.append(1 if rule.certain else 0)
        rule_strength.append(float(rule.strength))
    return CompiledRules(
        tuple(class_names),
        np.asarray(cond_attr, dtype=np.int32),
        np.asarray(cond_val, dtype=np.int32),
        np.asarray(rule_start, dtype=np.int32),
        np.asarray(rule_class, dtype=np.int32),
        np.asarray(rule_certain, dtype=np.uint8),
        np.asarray(rule_strength, dtype=np.float64),
    )


def classify_pixel(p: HsiPixel, rules: Sequence[Rule], disc: Discretizer) -> str | None:
    """Class name for one pixel, or None when no rule casts a vote."""
    compiled = compile_rules(rules)
    hb, sb, ib = disc.bin_pixel(p)
    out = K.classify_pixels(
        np.asarray([hb], dtype=np.int32),
        np.asarray([sb], dtype=np.int32),
        np.asarray([ib], dtype=np.int32),
        compiled.cond_attr,
        compiled.cond_val,
        compiled.rule_start,
        compiled.rule_class,
        compiled.rule_certain,
        compiled.rule_strength,
        len(compiled.class_names),
    )
    label = int(out[0])
    return None if label < 0 else compiled.class_names[label]


def classify_image(
    image: "ImageRaster | HsiImage", rules: Sequence[Rule], disc: Discretizer
) -> LabelRaster:
    """Per-pixel classification; unclassified pixels take the reserved id."""
    compiled = compile_rules(rules)
    hsi = image if isinstance(image, HsiImage) else HsiImage.from_raster(image)
    hb, sb, ib = disc.bin_planes(hsi)
    out = K.classify_pixels(
        hb,
        sb,
        ib,
        compiled.cond_attr,
        compiled.cond_val,
        compiled.rule_start,
        compiled.rule_class,
        compiled.rule_certain,
        compiled.rule_strength,
        len(compiled.class_names),
    )
    unclassified_id = len(compiled.class_names)
    labels = np.where(out < 0, unclassified_id, out).astype(np.int32)
    palette = {
        k: (name, palette_color(k)) for k, name in enumerate(compiled.class_names)
    }
    return LabelRaster(hsi.width, hsi.height, labels, palette, unclassified_id)


def accuracy(predicted: LabelRaster, truth: LabelRaster) -> float:
    """Fraction of pixels whose class names agree.

    Unclassified counts as a mismatch unless both sides are unclassified.
    """
    if (predicted.width, predicted.height) != (truth.width, truth.height):
        raise DataError(
            f"dimension mismatch: predicted {predicted.width}x{predicted.height}, "
            f"truth {truth.width}x{truth.height}"
        )
    common: dict[str | None, int] = {None: 0}

    def tokens(raster: LabelRaster) -> np.ndarray:
        max_id = max(
            int(raster.labels.max(initial=0)),
            raster.unclassified_id,
            max(raster.palette, default=0),
        )
        lut = np.zeros(max_id + 1, dtype=np.int64)
        for label_id in set(np.unique(raster.labels).tolist()) | set(raster.palette):
            name = raster.name_of(label_id)
            if name not in common:
                common[name] = len(common)
            lut[label_id] = common[name]
        return lut[raster.labels]

    pred_tokens = tokens(predicted)
    truth_tokens = tokens(truth)
    return float(np.count_nonzero(pred_tokens == truth_tokens)) / truth.labels.size


def cluster_majority(cmap: ClusterMap, labels: LabelRaster) -> list[tuple[int, str | None, int, int]]:
    """Per-cluster majority class over a classified raster.

    Returns (cluster_id, majority name or None, majority count, cluster
    size) per cluster; ties break on the smaller label id.
    """
    out = []
    for info in cmap.clusters:
        members = cmap.pixels_of(info.cluster_id)
        values = labels.labels[members]
        counts = np.bincount(values, minlength=max(labels.unclassified_id + 1, values.max(initial=0) + 1))
        best_id = int(np.argmax(counts))
        out.append((info.cluster_id, labels.name_of(best_id), int(counts[best_id]), int(members.size)))
    return out


def format_rule(rule: Rule) -> str:
    conds = " AND ".join(f"{p.attribute}={p.value}" for p in rule.conditions)
    return (
        f"IF {conds} THEN {rule.decision[0]}={rule.label()} "
        f"[{rule.certainty}, support={rule.support}]"
    )


def save_rules_text(rules: Sequence[Rule], path: str | Path) -> None:
    Path(path).write_text(
        "\n".join(format_rule(rule) for rule in rules) + "\n", encoding="utf-8"
    )


def save_rules_json(rules: Sequence[Rule], disc: Discretizer, path: str | Path) -> None:
    """Machine-readable dump: same content as the text lines plus binning."""
    class_names: list[str] = []
    for rule in rules:
        if rule.label() not in class_names:
            class_names.append(rule.label())
    payload = {
        "attributes": list(ATTRIBUTES),
        "bins_per_channel": disc.bins_per_channel,
        "classes": class_names,
        "rules": [
            {
                "conditions": [
                    {"attribute": p.attribute, "value": p.value} for p in rule.conditions
                ],
                "class": rule.label(),
                "certainty": rule.certainty,
                "support": rule.support,
                "strength": rule.strength,
            }
            for rule in rules
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_rules_json(path: str | Path) -> tuple[list[Rule], Discretizer]:
    """Parse a rules dump back into Rule objects plus its discretizer."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"unparseable rules file {path}: {exc}") from None
    try:
        classes = list(payload["classes"])
        disc = Discretizer(int(payload["bins_per_channel"]))
        rules = []
        for entry in payload["rules"]:
            conditions = tuple(
                AVPair(cond["attribute"], int(cond["value"])) for cond in entry["conditions"]
            )
            name = entry["class"]
            rules.append(
                Rule(
                    conditions,
                    ("class", classes.index(name)),
                    entry["certainty"] == "certain",
                    int(entry["support"]),
                    int(entry["strength"]),
                    decision_label=name,
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"unparseable rules file {path}: {exc}") from None
    if not rules:
        raise DataError(f"rules file {path} holds zero rules")
    return rules, disc
