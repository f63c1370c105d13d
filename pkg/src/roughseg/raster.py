"""Bit-exact raster and label-map I/O in portable pixmap formats.

Supported grammar: PPM P3 (ASCII) and P6 (binary), maxval 255 only, with
``#`` comments permitted in the header. Label maps are stored as a
palette-colored P6 file plus a UTF-8 sidecar mapping label ids to names
and colors (one ``<id> <name> <r> <g> <b>`` line each). The reserved
"unclassified" label renders as black.

Parsing is total: any byte stream yields either a raster or a
:class:`~roughseg.exceptions.PpmFormatError` carrying the byte offset of
the failure, never a partial result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from roughseg.exceptions import DataError, ParameterError, PpmFormatError

UNCLASSIFIED_NAME = "unclassified"
UNCLASSIFIED_COLOR = (0, 0, 0)

_MAX_PIXELS = 1 << 28  # dimension overflow guard, ~268M pixels
_WHITESPACE = b" \t\r\n\v\f"


class ImageRaster:
    """Row-major RGB raster with 8-bit channels."""

    def __init__(self, width: int, height: int, pixels: np.ndarray):
        if width <= 0 or height <= 0:
            raise DataError(f"raster dimensions must be positive, got {width}x{height}")
        pixels = np.asarray(pixels, dtype=np.uint8)
        if pixels.shape != (width * height, 3):
            raise DataError(
                f"pixel buffer shape {pixels.shape} does not match {width}x{height} raster"
            )
        self.width = width
        self.height = height
        self.pixels = pixels

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def rgb(self, index: int) -> tuple[int, int, int]:
        r, g, b = self.pixels[index]
        return int(r), int(g), int(b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageRaster):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self) -> str:
        return f"ImageRaster({self.width}x{self.height})"


@dataclass
class LabelRaster:
    """Per-pixel class-label ids plus a palette giving each id a name and color."""

    width: int
    height: int
    labels: np.ndarray
    palette: dict[int, tuple[str, tuple[int, int, int]]]
    unclassified_id: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int32)
        if self.labels.shape != (self.width * self.height,):
            raise DataError("label buffer length does not match raster dimensions")
        if self.unclassified_id in self.palette:
            raise DataError("unclassified id must not appear in the palette")
        used = set(np.unique(self.labels).tolist())
        missing = used - set(self.palette) - {self.unclassified_id}
        if missing:
            raise DataError(f"label id missing from palette: {sorted(missing)}")

    def name_of(self, label_id: int) -> str | None:
        """Class name for an id; None for the reserved unclassified id."""
        if label_id == self.unclassified_id:
            return None
        return self.palette[label_id][0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelRaster):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.labels, other.labels)
            and self.palette == other.palette
            and self.unclassified_id == other.unclassified_id
        )


class _PpmParser:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def fail(self, message: str, offset: int | None = None):
        raise PpmFormatError(message, self.pos if offset is None else offset)

    def skip_separators(self, comments: bool = True) -> None:
        data = self.data
        n = len(data)
        while self.pos < n:
            c = data[self.pos : self.pos + 1]
            if c in _WHITESPACE:
                self.pos += 1
            elif comments and c == b"#":
                nl = data.find(b"\n", self.pos)
                self.pos = n if nl < 0 else nl + 1
            else:
                return

    def read_int(self, what: str, comments: bool = True) -> tuple[int, int]:
        """Read one decimal token; returns (value, token offset)."""
        self.skip_separators(comments)
        start = self.pos
        data = self.data
        n = len(data)
        while self.pos < n and data[self.pos] in b"0123456789":
            self.pos += 1
        if self.pos == start:
            self.fail(f"expected integer for {what}", start)
        return int(data[start : self.pos]), start


def _parse_ppm(data: bytes) -> ImageRaster:
    p = _PpmParser(data)
    magic = data[:2]
    if magic not in (b"P3", b"P6"):
        p.fail("malformed magic number (expected P3 or P6)", 0)
    p.pos = 2
    width, w_off = p.read_int("width")
    height, h_off = p.read_int("height")
    if width <= 0 or height <= 0 or width * height > _MAX_PIXELS:
        p.fail(f"dimension overflow: {width}x{height}", w_off)
    maxval, m_off = p.read_int("maxval")
    if maxval != 255:
        p.fail(f"unsupported maxval {maxval} (only 255 is supported)", m_off)
    n_samples = width * height * 3
    if magic == b"P6":
        if p.pos >= len(data) or data[p.pos] not in _WHITESPACE:
            p.fail("expected single whitespace byte before binary pixel data")
        p.pos += 1
        end = p.pos + n_samples
        if end > len(data):
            p.fail("truncated pixel data", len(data))
        pixels = np.frombuffer(data, dtype=np.uint8, count=n_samples, offset=p.pos)
        return ImageRaster(width, height, pixels.reshape(-1, 3).copy())
    samples = np.empty(n_samples, dtype=np.uint8)
    for k in range(n_samples):
        value, off = p.read_int("sample", comments=False)
        if value > 255:
            p.fail(f"sample out of range: {value}", off)
        samples[k] = value
    return ImageRaster(width, height, samples.reshape(-1, 3))


def load_ppm(path: str | Path) -> ImageRaster:
    """Load a P3 or P6 PPM file (maxval 255) into an :class:`ImageRaster`."""
    return _parse_ppm(Path(path).read_bytes())


def parse_ppm_bytes(data: bytes) -> ImageRaster:
    """Parse an in-memory PPM byte stream."""
    return _parse_ppm(data)


def save_ppm(raster: ImageRaster, path: str | Path, binary: bool = True) -> None:
    """Write a raster as P6 (default) or P3 with the canonical header layout."""
    header = f"{'P6' if binary else 'P3'}\n{raster.width} {raster.height}\n255\n"
    path = Path(path)
    if binary:
        path.write_bytes(header.encode("ascii") + raster.pixels.tobytes())
    else:
        lines = [" ".join(str(v) for v in px) for px in raster.pixels.tolist()]
        path.write_text(header + "\n".join(lines) + "\n", encoding="ascii")


def palette_sidecar_path(ppm_path: str | Path) -> Path:
    """Sidecar file path for a label-map PPM (extension swapped to .txt)."""
    ppm_path = Path(ppm_path)
    if ppm_path.suffix == ".ppm":
        return ppm_path.with_suffix(".txt")
    return ppm_path.with_name(ppm_path.name + ".txt")


def save_label_map(labels: LabelRaster, path: str | Path) -> None:
    """Write a label map as palette-colored P6 plus its palette sidecar.

    Every pixel takes its label's palette color; the reserved unclassified
    id renders as black. The sidecar also records the unclassified id so a
    round trip through :func:`load_label_map` is exact.
    """
    path = Path(path)
    max_id = max(labels.palette, default=0)
    lut = np.zeros((max(max_id, labels.unclassified_id) + 1, 3), dtype=np.uint8)
    colors_seen: dict[tuple[int, int, int], int] = {}
    has_unclassified = bool(np.any(labels.labels == labels.unclassified_id))
    for label_id, (name, color) in sorted(labels.palette.items()):
        if color in colors_seen:
            raise DataError(f"palette colour {color} used by ids {colors_seen[color]} and {label_id}")
        if has_unclassified and tuple(color) == UNCLASSIFIED_COLOR:
            raise DataError(f"palette colour for id {label_id} collides with the unclassified black")
        colors_seen[tuple(color)] = label_id
        lut[label_id] = color
    rgb = lut[labels.labels]
    save_ppm(ImageRaster(labels.width, labels.height, rgb), path, binary=True)
    lines = []
    for label_id, (name, (r, g, b)) in sorted(labels.palette.items()):
        lines.append(f"{label_id} {name} {r} {g} {b}")
    lines.append(
        f"{labels.unclassified_id} {UNCLASSIFIED_NAME} "
        f"{UNCLASSIFIED_COLOR[0]} {UNCLASSIFIED_COLOR[1]} {UNCLASSIFIED_COLOR[2]}"
    )
    palette_sidecar_path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_palette_sidecar(text: str) -> tuple[dict[int, tuple[str, tuple[int, int, int]]], int | None]:
    """Parse sidecar text into (palette, unclassified id or None)."""
    palette: dict[int, tuple[str, tuple[int, int, int]]] = {}
    unclassified_id = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise DataError(f"palette sidecar line {lineno}: expected '<id> <name> <r> <g> <b>'")
        try:
            label_id = int(parts[0])
            color = (int(parts[2]), int(parts[3]), int(parts[4]))
        except ValueError as exc:
            raise DataError(f"palette sidecar line {lineno}: {exc}") from None
        if label_id in palette or label_id == unclassified_id:
            raise DataError(f"palette sidecar line {lineno}: duplicate id {label_id}")
        if not all(0 <= c <= 255 for c in color):
            raise DataError(f"palette sidecar line {lineno}: colour out of range")
        if parts[1] == UNCLASSIFIED_NAME:
            unclassified_id = label_id
        else:
            palette[label_id] = (parts[1], color)
    return palette, unclassified_id


def load_label_map(path: str | Path, sidecar: str | Path | None = None) -> LabelRaster:
    """Load a palette-colored PPM and its sidecar back into a LabelRaster."""
    path = Path(path)
    sidecar = palette_sidecar_path(path) if sidecar is None else Path(sidecar)
    raster = load_ppm(path)
    palette, unclassified_id = parse_palette_sidecar(sidecar.read_text(encoding="utf-8"))
    if unclassified_id is None:
        unclassified_id = (max(palette) + 1) if palette else 0
    by_color = {tuple(color): label_id for label_id, (_, color) in palette.items()}
    labels = np.empty(raster.n_pixels, dtype=np.int32)
    cache: dict[tuple[int, int, int], int] = {}
    for idx, px in enumerate(map(tuple, raster.pixels.tolist())):
        label = cache.get(px)
        if label is None:
            if px in by_color:
                label = by_color[px]
            elif px == UNCLASSIFIED_COLOR:
                label = unclassified_id
            else:
                raise DataError(f"pixel colour {px} not present in palette sidecar {sidecar}")
            cache[px] = label
        labels[idx] = label
    return LabelRaster(raster.width, raster.height, labels, palette, unclassified_id)


def palette_color(k: int) -> tuple[int, int, int]:
    """Deterministic, pairwise-distinct display color for index k (never black).

    Spreads the bits of k+1 across the three channels from the high bit
    down, which is a bijection on 24-bit values, so any two indices get
    different colors and small indices get visually distant ones.
    """
    v = k + 1
    if not 0 < v < (1 << 24):
        raise ParameterError(f"palette index out of range: {k}")
    ch = [0, 0, 0]
    for j in range(24):
        if v >> j & 1:
            ch[j % 3] |= 128 >> (j // 3)
    return ch[0], ch[1], ch[2]
