"""Sequence, annotation, results and config files.

Files use 1-indexed OTB coordinates; everything in memory is 0-indexed.
"""

import os
import re
import tempfile
from dataclasses import fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, ImageReadError, InvalidInputError
from .geometry import BoundingBox, Frame
from .tracker import TrackerConfig

IMAGE_SUFFIXES = {".pgm", ".ppm", ".pnm", ".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
CONFIG_ALIASES = {"lambda": "lam", "seed": "rng_seed"}
_HEADER_TOKEN = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)")


def atomic_write(path, data):
    """Write ``data`` (str or bytes) next to ``path``, then rename over it."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- images -----------------------------------------------------------------

def _netpbm_header(buf, path):
    # magic, width, height, maxval separated by whitespace; '#' starts a comment
    tokens, pos = [], 2
    while len(tokens) < 3:
        m = _HEADER_TOKEN.match(buf, pos)
        if m is None:
            raise ImageReadError(path, "truncated header")
        tokens.append(m.group(2))
        pos = m.end()
    # exactly one whitespace byte separates the header from the raster
    return [int(t) for t in tokens], pos + 1


def read_netpbm(path):
    """Decode binary PGM (P5) or PPM (P6) into an 8-bit grayscale array."""
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise ImageReadError(path, exc.strerror or str(exc)) from exc
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageReadError(path, "not a binary PGM/PPM file")
    try:
        (width, height, maxval), start = _netpbm_header(buf, path)
    except ValueError as exc:
        raise ImageReadError(path, "malformed header") from exc
    if maxval < 1 or maxval > 255:
        raise ImageReadError(path, f"unsupported maxval {maxval}")
    channels = 1 if magic == b"P5" else 3
    n = width * height * channels
    if len(buf) < start + n:
        raise ImageReadError(path, "truncated raster")
    raster = np.frombuffer(buf, dtype=np.uint8, count=n, offset=start)
    img = raster.reshape(height, width, channels).astype(np.float64)
    if maxval != 255:
        img = img * (255.0 / maxval)
    gray = img[..., 0] if channels == 1 else img @ LUMA_WEIGHTS
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8)


def write_pgm(path, pixels):
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    atomic_write(path, f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes())


def load_image(path):
    path = Path(path)
    if path.suffix.lower() in {".pgm", ".ppm", ".pnm"}:
        return read_netpbm(path)
    try:
        from PIL import Image
    except ImportError as exc:
        raise ImageReadError(path, "format needs Pillow, which is not installed") from exc
    try:
        with Image.open(path) as im:
            # Pillow's "L" conversion uses the ITU-R 601 luma weights
            return np.asarray(im.convert("L"), dtype=np.uint8)
    except OSError as exc:
        raise ImageReadError(path, str(exc)) from exc


def list_sequence(seq_dir):
    seq_dir = Path(seq_dir)
    if not seq_dir.is_dir():
        raise ImageReadError(seq_dir, "not a directory")
    files = sorted(p for p in seq_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise ImageReadError(seq_dir, "no image files found")
    return files


def load_sequence(seq_dir):
    """All frames of a directory of numbered images, in lexicographic order."""
    frames = []
    for i, path in enumerate(list_sequence(seq_dir)):
        pixels = load_image(path)
        if frames and pixels.shape != frames[0].pixels.shape:
            raise ImageReadError(path, f"size {pixels.shape[::-1]} differs from first frame")
        frames.append(Frame(pixels, index=i))
    return frames


# --- boxes ------------------------------------------------------------------

def parse_box(text, one_indexed=True):
    parts = [p for p in re.split(r"[,\t ]+", text.strip()) if p]
    if len(parts) != 4:
        raise InvalidInputError(f"expected four numbers x,y,w,h, got '{text.strip()}'")
    try:
        x, y, w, h = (float(p) for p in parts)
    except ValueError as exc:
        raise InvalidInputError(f"non-numeric box '{text.strip()}'") from exc
    off = 1 if one_indexed else 0
    return BoundingBox(int(round(x)) - off, int(round(y)) - off, int(round(w)), int(round(h)))


def format_box(box):
    return f"{box.x + 1},{box.y + 1},{box.w},{box.h}"


def read_ground_truth(path):
    """One box per line, comma- or tab-separated, 1-indexed on disk."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    boxes = []
    for n, line in enumerate(lines, 1):
        try:
            boxes.append(parse_box(line))
        except InvalidInputError as exc:
            raise InvalidInputError(f"{path}:{n}: {exc}") from exc
    return boxes


def write_ground_truth(path, boxes):
    atomic_write(path, "".join(format_box(b) + "\n" for b in boxes))


def results_text(boxes, first_frame=1):
    rows = ["frame,x,y,w,h"]
    rows += [f"{first_frame + i},{format_box(b)}" for i, b in enumerate(boxes)]
    return "\n".join(rows) + "\n"


def read_results(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines or not lines[0].lower().startswith("frame"):
        raise InvalidInputError(f"{path}: missing 'frame,x,y,w,h' header")
    boxes = []
    for n, line in enumerate(lines[1:], 2):
        cells = line.split(",")
        if len(cells) < 5:
            raise InvalidInputError(f"{path}:{n}: expected frame,x,y,w,h")
        boxes.append(parse_box(",".join(cells[1:5])))
    return boxes


# --- config -----------------------------------------------------------------

def _parse_value(name, kind, raw):
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"config key '{name}': cannot parse '{raw}'", field=name) from exc


def parse_config(text):
    types = {f.name: f.type for f in fields(TrackerConfig)}
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = CONFIG_ALIASES.get(key, key)
        if key not in types:
            raise ConfigError(f"config line {n}: unknown key '{key}'", field=key)
        values[key] = _parse_value(key, types[key], raw)
    return TrackerConfig(**values)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(config):
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        lines.append(f"{f.name} = {str(v).lower() if isinstance(v, bool) else repr(v)}")
    return "\n".join(lines) + "\n"


def save_config(config, path):
    atomic_write(path, dump_config(config))
