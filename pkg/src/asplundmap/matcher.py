"""Illumination-invariant pattern matching with Asplund distance maps.

The workflow: cut a probe out of a reference image, compute a (tolerant)
distance map against a possibly darkened scene, and keep the minimum of
each connected region lying under a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .asplund import DistanceMap, distance_map_general, distance_map_tolerance
from .errors import ExtractionError, ParameterError, SceneError
from .lip import GreyScale, Image, lip_scalar_mul
from .morpho import FlatDomain, StructuringFunction

__all__ = [
    "Detection",
    "DEFAULT_DARKENING",
    "DEFAULT_TOLERANCE",
    "DEFAULT_THRESHOLD",
    "extract_probe",
    "darken",
    "asplund_map",
    "detect",
    "match",
    "Placement",
    "synthesize_scene",
    "add_uniform_noise",
    "TileScene",
    "tile_pattern",
    "tiles_scene",
]

DEFAULT_DARKENING = 0.3
DEFAULT_TOLERANCE = 0.3
DEFAULT_THRESHOLD = 0.7

_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True)
class Detection:
    """Minimum of one sub-threshold component; ``position`` is ``(x, y)``."""

    position: tuple[int, int]
    score: float
    extent: int


def extract_probe(
    f: Image,
    domain: FlatDomain,
    anchor,
    *,
    strict: bool = False,
    floor: float = 1.0,
) -> StructuringFunction:
    """Cut the probe ``B(h) = f(anchor + h)`` out of ``f``.

    Offsets are kept verbatim, so matching the result against ``f`` gives a
    zero distance at ``anchor``.  Outside strict mode, white (0) pixels are
    raised to ``floor``; a black (``M``) pixel always fails.
    """
    ax, ay = anchor
    offs = domain.as_array()
    xs, ys = ax + offs[:, 0], ay + offs[:, 1]
    if xs.min() < 0 or ys.min() < 0 or xs.max() >= f.width or ys.max() >= f.height:
        raise ExtractionError(f"probe domain anchored at {tuple(anchor)} leaves the image")
    vals = f.values[ys, xs].copy()
    if vals.max() >= f.M:
        raise ExtractionError("probe would contain the black value M")
    if vals.min() <= 0:
        if strict:
            raise ExtractionError("probe would contain the white value 0 (strict mode)")
        vals = np.maximum(vals, floor)
    return StructuringFunction(domain.offsets, vals, f.scale)


def darken(f: Image, k: float = DEFAULT_DARKENING) -> Image:
    """Thicken the imaged object by a factor ``k`` (LIP scalar multiplication)."""
    return lip_scalar_mul(k, f)


def asplund_map(
    f: Image, B: StructuringFunction, p: float = 0.0, *, strict: bool = False, threads: int = 1
) -> DistanceMap:
    """Exact map for ``p == 0``, tolerance map otherwise."""
    if p == 0:
        return distance_map_general(f, B, strict=strict, threads=threads)
    return distance_map_tolerance(f, B, p, strict=strict, threads=threads)


def detect(dmap: DistanceMap, threshold: float = DEFAULT_THRESHOLD, connectivity: int = 8):
    """Threshold the map and return the argmin of each connected component.

    Components are taken over valid pixels strictly below ``threshold``.
    Ties inside a component go to the first pixel in row-major order; the
    list is sorted by ascending score.
    """
    if not threshold > 0:
        raise ParameterError(f"threshold must be positive, got {threshold!r}")
    if connectivity not in _STRUCTURES:
        raise ParameterError("connectivity must be 4 or 8")
    values = dmap.values
    below = dmap.valid & (values < threshold)
    labels, count = ndimage.label(below, structure=_STRUCTURES[connectivity])
    if count == 0:
        return []
    # argmin per label with row-major tie break: sort by (label, value, flat index)
    flat = np.flatnonzero(below)
    lab = labels.ravel()[flat]
    val = values.ravel()[flat]
    order = np.lexsort((flat, val, lab))
    first = order[np.r_[True, lab[order][1:] != lab[order][:-1]]]
    extents = np.bincount(lab, minlength=count + 1)
    dets = []
    for i in first:
        y, x = divmod(int(flat[i]), values.shape[1])
        dets.append(Detection((x, y), float(val[i]), int(extents[lab[i]])))
    dets.sort(key=lambda d: (d.score, d.position[1], d.position[0]))
    return dets


def match(
    f: Image,
    B: StructuringFunction,
    *,
    p: float = DEFAULT_TOLERANCE,
    threshold: float = DEFAULT_THRESHOLD,
    connectivity: int = 8,
    strict: bool = False,
    threads: int = 1,
):
    """Distance map of ``B`` over ``f`` and its detections."""
    dmap = asplund_map(f, B, p, strict=strict, threads=threads)
    return dmap, detect(dmap, threshold, connectivity)


@dataclass(frozen=True, eq=False)
class Placement:
    """Plant ``k (x) pattern`` with its origin at ``position = (x, y)``."""

    position: tuple[int, int]
    k: float
    pattern: StructuringFunction


def synthesize_scene(
    placements,
    size,
    background=0.0,
    *,
    noise: float = 0.0,
    rng=None,
    scale: GreyScale | None = None,
):
    """Build a test scene with known pattern locations.

    ``size`` is ``(width, height)``; ``background`` is a constant tone or an
    array of that shape.  Pixels of distinct placements must not coincide.
    With ``noise > 0`` uniform noise in ``[-noise, noise]`` is added to the
    whole canvas afterwards.  Returns the image and the list of anchors.
    """
    scale = scale or GreyScale()
    width, height = size
    canvas = np.empty((height, width))
    canvas[...] = background
    owner = np.full((height, width), -1)
    anchors = []
    for i, pl in enumerate(placements):
        if pl.pattern.scale != scale:
            raise SceneError(f"placement {i} uses a different grey scale")
        offs = pl.pattern.domain.as_array()
        xs, ys = pl.position[0] + offs[:, 0], pl.position[1] + offs[:, 1]
        if xs.min() < 0 or ys.min() < 0 or xs.max() >= width or ys.max() >= height:
            raise SceneError(f"placement {i} at {pl.position} leaves the canvas")
        if np.any(owner[ys, xs] >= 0):
            raise SceneError(f"placement {i} overlaps placement {owner[ys, xs].max()}")
        owner[ys, xs] = i
        tones = lip_scalar_mul(pl.k, Image(pl.pattern.values, scale)).values.ravel()
        canvas[ys, xs] = tones
        anchors.append((int(pl.position[0]), int(pl.position[1])))
    image = Image(canvas, scale)
    if noise > 0:
        image = add_uniform_noise(image, noise, rng)
    return image, anchors


def add_uniform_noise(f: Image, amplitude: float, rng=None, floor: float = 0.0) -> Image:
    """Add i.i.d. uniform noise in ``[-amplitude, amplitude]``, clipped to
    ``[floor, M - 1]``."""
    rng = np.random.default_rng(rng)
    noisy = f.values + rng.uniform(-amplitude, amplitude, size=f.shape)
    return f.with_values(np.clip(noisy, floor, f.M - 1))


# Dark (#) / light (o) layout of the demo tile; '.' is outside its domain.
# Chosen so that every shift of two pixels or more stays far above the
# default threshold under the default tolerance.
TILE_LAYOUT = """\
.....###.....
...#####o#...
..o##oo#o##..
.#o#o...oo#o.
.ooo.o#o.###.
o#o.#o#oo....
#oo.o#ooo....
#oo.##ooo....
.##o.###.o#o.
.o##o...#o##.
..##oo#ooo#..
...#o#####...
.....o##.....
"""


@dataclass(frozen=True, eq=False)
class TileScene:
    """Synthetic tiled scene with ground truth.

    ``probe`` is cut out of ``image`` at ``anchors[0]`` on a domain slightly
    smaller than the tile.
    """

    image: Image
    tile: StructuringFunction
    probe: StructuringFunction
    anchors: list
    scales: list


def tile_pattern(rng=None, dark=(190.0, 230.0), light=(60.0, 90.0), scale=None):
    """The demo tile: non-flat, non-convex, 13 x 13 box centred on its origin."""
    rng = np.random.default_rng(rng)
    grid = np.array([list(row) for row in TILE_LAYOUT.split()])
    inside = grid != "."
    c = grid.shape[0] // 2
    tones = np.where(grid == "#", rng.uniform(*dark, grid.shape), rng.uniform(*light, grid.shape))
    domain = FlatDomain.from_mask(inside, (c, c))
    return StructuringFunction(domain.offsets, tones[inside], scale or GreyScale())


def tiles_scene(
    seed=0,
    size=256,
    anchors=((48, 52), (190, 60), (64, 196), (200, 186)),
    scales=(1.0, 0.6, 1.5, 0.8),
    probe_radius=5.3,
) -> TileScene:
    """Tiles planted as LIP homothetics over a smooth random background.

    Background tones span ``[70, 190]`` with a correlation length of about
    8 pixels.  Anchors assume the default 256 x 256 canvas.
    """
    rng = np.random.default_rng(seed)
    tile = tile_pattern(rng)
    bg = ndimage.gaussian_filter(rng.standard_normal((size, size)), 8)
    bg = 70 + 120 * (bg - bg.min()) / (bg.max() - bg.min())
    placements = [Placement(a, k, tile) for a, k in zip(anchors, scales)]
    image, planted = synthesize_scene(placements, (size, size), bg)
    offs = tile.domain.as_array()
    keep = np.hypot(offs[:, 0], offs[:, 1]) <= probe_radius
    domain = FlatDomain(tuple(map(tuple, offs[keep].tolist())))
    probe = extract_probe(image, domain, planted[0])
    return TileScene(image, tile, probe, planted, list(scales))
