"""Image and disparity-map file I/O.

Two disparity encodings are supported:

``fixed256``
    16-bit binary PGM (P5, maxval 65535, big-endian samples) storing
    ``round(256 * d)``; 0 marks an invalid pixel.
``float``
    Grayscale PFM (``Pf``) with a negative scale (little-endian), rows
    stored bottom-to-top; +inf marks an invalid pixel.

PNG files are decoded through Pillow when it is installed (KITTI ships PNG).
"""
from __future__ import annotations

import errno
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import DisparityMap, GrayImage

FIXED256 = "fixed256"
FLOAT = "float"
FIXED256_MAX = 65535 / 256


class ImageFormatError(ValueError):
    pass


def _pgm_header(blob: bytes):
    """Parse magic, width, height, maxval; return them and the payload offset."""
    fields = []
    pos = 0
    for _ in range(4):
        # whitespace and comments may appear between any two header tokens
        while True:
            while pos < len(blob) and blob[pos:pos + 1].isspace():
                pos += 1
            if blob[pos:pos + 1] == b"#":
                end = blob.find(b"\n", pos)
                if end < 0:
                    raise ImageFormatError("unterminated comment in PGM header")
                pos = end + 1
                continue
            break
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace() and blob[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PGM header")
        fields.append(blob[start:pos])
    if pos >= len(blob) or not blob[pos:pos + 1].isspace():
        raise ImageFormatError("PGM header must end with a single whitespace byte")
    magic = fields[0]
    if magic != b"P5":
        raise ImageFormatError(f"unsupported image format {magic[:8]!r}; only binary PGM (P5)")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise ImageFormatError("non-numeric PGM header field") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ImageFormatError(f"invalid PGM header {width}x{height} maxval {maxval}")
    return width, height, maxval, pos + 1


def read_pgm(path) -> np.ndarray:
    """Raw samples of a binary PGM: uint8 for maxval < 256, big-endian uint16 otherwise."""
    blob = Path(path).read_bytes()
    width, height, maxval, offset = _pgm_header(blob)
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    need = width * height * dtype.itemsize
    payload = blob[offset:offset + need]
    if len(payload) != need:
        raise ImageFormatError(f"PGM payload truncated: {len(payload)} of {need} bytes")
    return np.frombuffer(payload, dtype=dtype).reshape(height, width)


def write_pgm(path, samples: np.ndarray):
    samples = np.asarray(samples)
    height, width = samples.shape
    if samples.dtype == np.uint8:
        maxval, payload = 255, samples.tobytes()
    else:
        maxval, payload = 65535, samples.astype(">u2").tobytes()
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        f.write(payload)


def _is_png(path) -> bool:
    return Path(path).suffix.lower() == ".png"


def _read_png(path, mode):
    try:
        from PIL import Image
    except ImportError:
        raise ImageFormatError("reading PNG needs Pillow (pip install Pillow)") from None
    with Image.open(path) as im:
        if mode == "L":
            return np.asarray(im.convert("L"), dtype=np.uint8)
        return np.asarray(im, dtype=np.int64).astype(np.uint16)


def read_gray(path) -> GrayImage:
    if not Path(path).exists():
        raise FileNotFoundError(errno.ENOENT, "no such file", str(path))
    if _is_png(path):
        return GrayImage(_read_png(path, "L"))
    blob_head = Path(path).read_bytes()[:2]
    if blob_head != b"P5":
        raise ImageFormatError(f"unsupported image format {blob_head!r} in {path}")
    samples = read_pgm(path)
    if samples.dtype != np.uint8:
        raise ImageFormatError(f"{path}: 16-bit PGM is not an 8-bit grayscale image")
    return GrayImage(samples)


def write_gray(path, img: GrayImage):
    write_pgm(path, img.data)


def read_pfm(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    lines = []
    pos = 0
    for _ in range(3):
        end = blob.find(b"\n", pos)
        if end < 0:
            raise ImageFormatError("truncated PFM header")
        lines.append(blob[pos:end].strip())
        pos = end + 1
    if lines[0] != b"Pf":
        raise ImageFormatError(f"unsupported PFM type {lines[0][:8]!r}; only grayscale Pf")
    try:
        width, height = (int(v) for v in lines[1].split())
        scale = float(lines[2])
    except ValueError:
        raise ImageFormatError("malformed PFM header") from None
    if width < 1 or height < 1 or scale == 0 or scale != scale:
        raise ImageFormatError(f"invalid PFM header {width}x{height} scale {scale}")
    dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
    need = width * height * 4
    payload = blob[pos:pos + need]
    if len(payload) != need:
        raise ImageFormatError(f"PFM payload truncated: {len(payload)} of {need} bytes")
    return np.frombuffer(payload, dtype=dtype).reshape(height, width)[::-1].astype(np.float32)


def write_pfm(path, values: np.ndarray):
    values = np.asarray(values, dtype="<f4")
    height, width = values.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
        f.write(values[::-1].tobytes())


def write_disparity(disp: DisparityMap, path, encoding: str = FIXED256):
    if encoding == FIXED256:
        # a valid value that rounds to 0 becomes indistinguishable from invalid
        scaled = np.where(disp.valid, np.floor(disp.values * 256 + 0.5), 0)
        if scaled.min() < 0 or scaled.max() > 65535:
            raise ValueError(
                f"disparities must lie in [0, {FIXED256_MAX:.3f}] for the fixed256 encoding"
            )
        stored = scaled.astype(np.uint16)
        write_pgm(path, stored)
    elif encoding == FLOAT:
        write_pfm(path, np.where(disp.valid, disp.values, np.inf))
    else:
        raise ValueError(f"unknown disparity encoding {encoding!r}")


def read_disparity(path, encoding: Optional[str] = None) -> DisparityMap:
    """Read a disparity map; the encoding defaults from the file extension."""
    encoding = encoding or encoding_for(path)
    if encoding == FIXED256:
        if _is_png(path):
            stored = _read_png(path, "I")
        else:
            stored = read_pgm(path).astype(np.uint16)
        return DisparityMap(stored / 256.0, stored != 0)
    if encoding == FLOAT:
        values = read_pfm(path).astype(np.float64)
        valid = np.isfinite(values)
        return DisparityMap(np.where(valid, values, 0.0), valid)
    raise ValueError(f"unknown disparity encoding {encoding!r}")


def encoding_for(path) -> str:
    return FLOAT if Path(path).suffix.lower() == ".pfm" else FIXED256


@dataclass(frozen=True)
class PairEntry:
    name: str
    left: Path
    right: Path
    gt: Optional[Path] = None


_IMAGE_SUFFIXES = {".pgm", ".png", ".pfm"}


def scan_dataset(root, layout: str = "pairs") -> list[PairEntry]:
    """List stereo pairs under ``root``, sorted by name.

    ``pairs``: ``<name>_L.pgm`` + ``<name>_R.pgm`` (+ ``<name>_gt.*``) in one folder.
    ``kitti_like``: ``image_2/<id>.*``, ``image_3/<id>.*``, ``disp_occ_0/<id>.*``.
    Files without a partner are reported with :func:`warnings.warn`.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(root)
    if layout == "pairs":
        lefts, rights, gts = {}, {}, {}
        for entry in os.scandir(root):
            p = Path(entry.path)
            if not entry.is_file() or p.suffix.lower() not in _IMAGE_SUFFIXES:
                continue
            for tag, table in (("_L", lefts), ("_R", rights), ("_gt", gts)):
                if p.stem.endswith(tag):
                    table[p.stem[: -len(tag)]] = p
                    break
    elif layout == "kitti_like":
        def stems(sub):
            folder = root / sub
            if not folder.is_dir():
                return {}
            return {
                Path(e.name).stem: Path(e.path)
                for e in os.scandir(folder)
                if e.is_file() and Path(e.name).suffix.lower() in _IMAGE_SUFFIXES
            }

        lefts, rights, gts = stems("image_2"), stems("image_3"), stems("disp_occ_0")
    else:
        raise ValueError(f"unknown dataset layout {layout!r}")

    entries = []
    for name in sorted(set(lefts) | set(rights) | set(gts)):
        if name in lefts and name in rights:
            entries.append(PairEntry(name, lefts[name], rights[name], gts.get(name)))
        else:
            missing = "right" if name in lefts else "left"
            warnings.warn(f"{root}: {name!r} has no {missing} image; skipped", stacklevel=2)
    return entries

