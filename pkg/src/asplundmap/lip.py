"""Logarithmic Image Processing (LIP) grey-tone model.

Grey tones live in ``[0, M]`` with 0 meaning white (full transmission) and
``M`` black.  Values are always stored as float64, even when they come from
8-bit files, because scalar multiplication produces non-integer tones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError

__all__ = [
    "GreyScale",
    "Image",
    "lip_add",
    "lip_scalar_mul",
    "tilde",
    "tilde_inverse",
    "invert_convention",
    "clamp_floor",
]


@dataclass(frozen=True)
class GreyScale:
    """Upper bound ``M`` of the grey-tone range."""

    M: float = 256.0

    def __post_init__(self):
        M = float(self.M)
        if not np.isfinite(M) or M <= 0:
            raise DomainError(f"grey-scale bound must be finite and positive, got {self.M!r}")
        object.__setattr__(self, "M", M)


@dataclass(frozen=True, eq=False)
class Image:
    """A 2-D grey-tone image under the LIP convention.

    1-D input is promoted to a single row.  The stored array is a read-only
    float64 copy.
    """

    values: np.ndarray
    scale: GreyScale = field(default_factory=GreyScale)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[np.newaxis, :]
        if v.ndim != 2 or v.size == 0:
            raise ShapeError(f"image must be a non-empty 2-D grid, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("image values must be finite")
        if v.min() < 0 or v.max() > self.scale.M:
            raise DomainError(
                f"image values must lie in [0, {self.scale.M:g}], "
                f"got [{v.min():g}, {v.max():g}]"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def M(self) -> float:
        return self.scale.M

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @classmethod
    def constant(cls, value, width, height, scale=None) -> Image:
        scale = scale or GreyScale()
        return cls(np.full((height, width), float(value)), scale)

    def with_values(self, values) -> Image:
        return Image(values, self.scale)

    def __repr__(self):
        return f"Image({self.width}x{self.height}, M={self.M:g})"


def _check_pair(f: Image, g: Image):
    if f.shape != g.shape:
        raise ShapeError(f"image shapes differ: {f.shape} vs {g.shape}")
    if f.scale != g.scale:
        raise ShapeError(f"grey scales differ: M={f.M:g} vs M={g.M:g}")


def lip_add(f: Image, g: Image) -> Image:
    """LIP addition: superposition of the two obstacles ``f`` and ``g``."""
    _check_pair(f, g)
    M = f.M
    if f.values.max() >= M or g.values.max() >= M:
        raise DomainError("lip_add requires values in [0, M[")
    a, b = f.values, g.values
    return f.with_values(a + b - a * b / M)


def lip_scalar_mul(k: float, f: Image) -> Image:
    """LIP scalar multiplication ``k (x) f = M - M (1 - f/M)**k``.

    Only the positive cone is supported.  ``k = 0`` maps every tone,
    including ``M``, to 0.
    """
    k = float(k)
    if not np.isfinite(k) or k < 0:
        raise DomainError(f"LIP scalar must be a finite non-negative real, got {k!r}")
    if k == 0:
        return f.with_values(np.zeros(f.shape))
    M = f.M
    with np.errstate(divide="ignore"):
        t = np.log1p(-f.values / M)
    out = -M * np.expm1(k * t)
    # (1 - f/M)**k may round so that the result slightly overshoots M
    return f.with_values(np.minimum(out, M))


def tilde(f: Image | np.ndarray, M: float | None = None) -> np.ndarray:
    """Pointwise ``ln(1 - f/M)``: 0 at white, ``-inf`` at ``M``.

    Accepts an :class:`Image` or a raw array (then ``M`` defaults to 256).
    """
    if isinstance(f, Image):
        v, M = f.values, f.M
    else:
        v = np.asarray(f, dtype=np.float64)
        M = 256.0 if M is None else float(M)
    if np.any(v < 0) or np.any(v > M):
        raise DomainError(f"tilde is defined on [0, {M:g}] only")
    with np.errstate(divide="ignore"):
        # +0.0 turns the -0.0 produced by log1p(-0.0) into +0.0
        return np.log1p(-v / M) + 0.0


def tilde_inverse(u, scale: GreyScale | None = None) -> Image:
    """Inverse of :func:`tilde`: ``M (1 - exp(u))`` for ``u <= 0``."""
    scale = scale or GreyScale()
    u = np.asarray(u, dtype=np.float64)
    if np.any(np.isnan(u)) or np.any(u > 0):
        raise DomainError("tilde_inverse requires non-positive input")
    return Image(-scale.M * np.expm1(u) + 0.0, scale)


def invert_convention(f: Image) -> Image:
    """Swap classic (0 = black) and LIP (0 = white) grey conventions.

    The map is ``v -> (M - 1) - v`` and is its own inverse.
    """
    top = f.M - 1
    if f.values.max() > top:
        raise DomainError(f"inversion requires values in [0, {top:g}]")
    return f.with_values(top - f.values)


def clamp_floor(f: Image, floor: float = 1.0) -> Image:
    """Raise every tone below ``floor`` up to ``floor``.

    Real 8-bit images contain zeros, where Asplund ratios degenerate; this is
    the ingest-time remedy.
    """
    floor = float(floor)
    if not 0 <= floor < f.M:
        raise DomainError(f"clamp floor must lie in [0, M[, got {floor:g}")
    return f.with_values(np.maximum(f.values, floor))
