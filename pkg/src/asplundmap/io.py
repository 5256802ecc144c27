"""File formats: PGM (P2/P5), PFM, probe text files, detection lists.

Float maps go to little-endian single-channel PFM with invalid pixels stored
as +inf and a sidecar validity mask (PGM, 255 = valid).  An 8-bit PGM
rendering of a map is a visualization only and is never read back.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

import numpy as np

from .asplund import DistanceMap
from .errors import ParseError
from .lip import GreyScale, Image, invert_convention
from .morpho import StructuringFunction

log = logging.getLogger(__name__)

__all__ = [
    "read_pgm",
    "write_pgm",
    "read_pfm",
    "write_pfm",
    "mask_path",
    "write_map",
    "read_map",
    "write_visualization",
    "read_probe",
    "write_probe",
    "read_detections",
    "write_detections",
]

_TOKEN = re.compile(rb"\S+")


def _header_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset of the single whitespace byte that
    ends the header.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise ParseError("truncated header", pos)
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = n if end < 0 else end + 1
            continue
        m = _TOKEN.match(data, pos)
        tok = m.group()
        if b"#" in tok:
            tok = tok[: tok.index(b"#")]
        tokens.append((tok, pos))
        pos += len(tok)
    return tokens, pos


def _header_int(tok, pos, what):
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"bad {what} {tok!r}", pos) from None
    if v <= 0:
        raise ParseError(f"{what} must be positive, got {v}", pos)
    return v


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode P2/P5 bytes into an integer array; maxval above 255 is refused."""
    if data[:2] not in (b"P2", b"P5"):
        raise ParseError(f"not a P2/P5 graymap (magic {data[:2]!r})", 0)
    tokens, pos = _header_tokens(data, 4)
    width = _header_int(*tokens[1], "width")
    height = _header_int(*tokens[2], "height")
    maxval = _header_int(*tokens[3], "maxval")
    if maxval > 255:
        raise ParseError(
            f"maxval {maxval} is not supported (16-bit graymaps are out of range; max 255)",
            tokens[3][1],
        )
    count = width * height
    if data[:2] == b"P5":
        start = pos + 1
        payload = data[start : start + count]
        if len(payload) < count:
            raise ParseError(
                f"truncated payload: expected {count} bytes, found {len(payload)}",
                start + len(payload),
            )
        arr = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    else:
        body = data[pos:]
        items = body.split()
        if len(items) < count:
            raise ParseError(f"truncated payload: expected {count} samples, found {len(items)}", len(data))
        try:
            arr = np.array([int(t) for t in items[:count]], dtype=np.int64)
        except ValueError:
            raise ParseError("non-integer sample in P2 payload", pos) from None
    if arr.max(initial=0) > maxval:
        raise ParseError(f"sample exceeds maxval {maxval}", pos)
    return arr.reshape(height, width)


def read_pgm(path, *, M: float = 256.0, invert: bool = False) -> Image:
    """Load a graymap as a float image on the grey scale ``[0, M]``.

    ``invert`` converts from the file's 0 = black convention to LIP's
    0 = white.
    """
    data = Path(path).read_bytes()
    img = Image(parse_pgm(data).astype(np.float64), GreyScale(M))
    return invert_convention(img) if invert else img


def write_pgm(f: Image | np.ndarray, path, *, invert: bool = False, plain: bool = False):
    """Write an 8-bit graymap; tones are rounded and clipped to ``[0, 255]``."""
    if isinstance(f, Image):
        if invert:
            f = invert_convention(f)
        values = f.values
    else:
        values = np.asarray(f)
    q = np.clip(np.rint(values), 0, 255).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as fh:
        if plain:
            fh.write(f"P2\n{w} {h}\n255\n".encode())
            for row in q:
                fh.write((" ".join(map(str, row.tolist())) + "\n").encode())
        else:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(q.tobytes())


def write_pfm(values: np.ndarray, path):
    """Single-channel little-endian PFM (rows stored bottom to top)."""
    a = np.asarray(values, dtype="<f4")
    h, w = a.shape
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{w} {h}\n-1.0\n".encode())
        fh.write(np.flipud(a).tobytes())


def read_pfm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] != b"Pf":
        raise ParseError(f"not a single-channel PFM (magic {data[:2]!r})", 0)
    tokens, pos = _header_tokens(data, 4)
    width = _header_int(*tokens[1], "width")
    height = _header_int(*tokens[2], "height")
    try:
        scale = float(tokens[3][0])
    except ValueError:
        raise ParseError(f"bad scale {tokens[3][0]!r}", tokens[3][1]) from None
    if scale == 0:
        raise ParseError("PFM scale must be non-zero", tokens[3][1])
    dtype = "<f4" if scale < 0 else ">f4"
    start = pos + 1
    need = 4 * width * height
    payload = data[start : start + need]
    if len(payload) < need:
        raise ParseError(
            f"truncated payload: expected {need} bytes, found {len(payload)}",
            start + len(payload),
        )
    a = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return np.flipud(a).astype(np.float32)


def mask_path(path) -> Path:
    """Sidecar validity mask for a PFM map: ``name.pfm -> name.mask.pgm``."""
    p = Path(path)
    return p.with_name(p.stem + ".mask.pgm")


def write_map(dmap: DistanceMap, path, vis_path=None):
    """Write the float map, its validity mask and optionally a visualization."""
    values = np.where(dmap.valid, dmap.values, np.inf)
    write_pfm(values, path)
    write_pgm(dmap.valid.astype(np.uint8) * 255, mask_path(path))
    if vis_path is not None:
        write_visualization(dmap, vis_path)


def read_map(path, tolerance: float = 0.0) -> DistanceMap:
    """Load a map written by :func:`write_map` (values as float32 -> float64)."""
    values = read_pfm(path).astype(np.float64)
    mp = mask_path(path)
    if mp.exists():
        valid = parse_pgm(mp.read_bytes()) > 0
        if valid.shape != values.shape:
            raise ParseError(f"mask {mp} does not match map size")
    else:
        log.warning("no validity mask next to %s; treating finite values as valid", path)
        valid = np.isfinite(values)
    values = np.where(valid, values, np.nan)
    return DistanceMap(values, valid, tolerance)


def write_visualization(dmap: DistanceMap, path):
    """Min-max normalize finite valid distances to 0..255; the rest is 0."""
    show = dmap.valid & np.isfinite(dmap.values)
    out = np.zeros(dmap.shape)
    if not show.any():
        log.warning("map has no valid finite pixel; visualization is blank")
    else:
        v = dmap.values[show]
        lo, hi = v.min(), v.max()
        out[show] = 0.0 if hi == lo else (v - lo) / (hi - lo) * 255
        # infinite distances render as the far end
        out[dmap.valid & np.isinf(dmap.values)] = 255
    write_pgm(out, path)
    return out


def write_probe(B: StructuringFunction, path, anchor=None):
    """Text probe file: ``M``, optional anchor, then ``dx dy value`` lines."""
    lines = ["# asplundmap probe", f"M {B.M!r}"]
    if anchor is not None:
        lines.append(f"anchor {int(anchor[0])} {int(anchor[1])}")
    lines.append(f"count {len(B)}")
    for (dx, dy), v in zip(B.offsets, B.values):
        lines.append(f"{dx} {dy} {float(v)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_probe(path):
    """Parse a probe file; returns ``(probe, anchor_or_None)``."""
    M = None
    anchor = None
    count = None
    offsets, values = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "M":
                M = float(parts[1])
            elif parts[0] == "anchor":
                anchor = (int(parts[1]), int(parts[2]))
            elif parts[0] == "count":
                count = int(parts[1])
            else:
                if len(parts) != 3:
                    raise ValueError
                offsets.append((int(parts[0]), int(parts[1])))
                values.append(float(parts[2]))
        except (ValueError, IndexError):
            raise ParseError(f"bad probe line {raw!r}", lineno, "line") from None
    if M is None:
        raise ParseError("probe file lacks an 'M' line")
    if not offsets:
        raise ParseError("probe file has no offsets")
    if count is not None and count != len(offsets):
        raise ParseError(f"probe file declares {count} offsets but lists {len(offsets)}")
    return StructuringFunction(tuple(offsets), values, GreyScale(M)), anchor


def format_detections(items) -> str:
    """``x y score`` lines from detections or ``((x, y), score)`` pairs."""
    out = []
    for item in items:
        if hasattr(item, "position"):
            (x, y), score = item.position, item.score
        else:
            (x, y), score = item
        out.append(f"{x} {y} {float(score)!r}")
    return "".join(line + "\n" for line in out)


def write_detections(items, path):
    Path(path).write_text(format_detections(items))


def read_detections(path):
    """Parse ``x y score`` lines into ``((x, y), score)`` tuples."""
    out = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            x, y, s = line.split()
            out.append(((int(x), int(y)), float(s)))
        except ValueError:
            raise ParseError(f"bad detection line {raw!r}", lineno, "line") from None
    return out
