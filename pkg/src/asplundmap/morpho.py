"""Translation-invariant grey-level morphology on 2-D fields.

Every kernel uses *valid* border semantics: an output pixel exists only when
its whole window lies inside the field, and a boolean mask travels with the
result.  Invalid pixels hold NaN.

Offsets are ``(dx, dy)`` pairs; arrays are indexed ``[y, x]``.
Erosions and rank filters sample ``f(x + h)``; dilations sample ``f(x - h)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, ParameterError
from .lip import GreyScale, Image

__all__ = [
    "FlatDomain",
    "StructuringFunction",
    "BoundField",
    "reflect",
    "dilate_flat",
    "erode_flat",
    "dilate_fn",
    "erode_fn",
    "rank_filter",
]

# rows of windows held in memory at once by order-statistic kernels
_STACK_BUDGET = 4_000_000


def _normalize_offsets(offsets) -> tuple[tuple[int, int], ...]:
    out = []
    for h in offsets:
        dx, dy = h
        if int(dx) != dx or int(dy) != dy:
            raise ContractError(f"offsets must be integers, got {h!r}")
        out.append((int(dx), int(dy)))
    if not out:
        raise ContractError("a domain needs at least one offset")
    if len(set(out)) != len(out):
        raise ContractError("duplicate offsets in domain")
    return tuple(out)


@dataclass(frozen=True)
class FlatDomain:
    """Finite set of integer ``(dx, dy)`` displacements."""

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "offsets", _normalize_offsets(self.offsets))

    def __len__(self):
        return len(self.offsets)

    def __iter__(self):
        return iter(self.offsets)

    def as_array(self) -> np.ndarray:
        return np.array(self.offsets, dtype=np.intp).reshape(-1, 2)

    @classmethod
    def rect(cls, width: int, height: int, anchor=(0, 0)) -> FlatDomain:
        """``width x height`` box whose pixel ``anchor`` (relative to the
        top-left corner) is the origin."""
        if width < 1 or height < 1:
            raise ContractError("rectangle must be at least 1x1")
        ax, ay = anchor
        return cls(tuple((x - ax, y - ay) for y in range(height) for x in range(width)))

    @classmethod
    def from_mask(cls, mask, anchor=(0, 0)) -> FlatDomain:
        """Offsets of the true pixels of ``mask`` relative to ``anchor = (x, y)``."""
        ys, xs = np.nonzero(np.asarray(mask, dtype=bool))
        ax, ay = anchor
        return cls(tuple(zip((xs - ax).tolist(), (ys - ay).tolist())))

    @classmethod
    def line(cls, offsets) -> FlatDomain:
        """Horizontal domain from 1-D ``dx`` offsets."""
        return cls(tuple((int(dx), 0) for dx in offsets))

    def reflect(self) -> FlatDomain:
        return FlatDomain(tuple((-dx, -dy) for dx, dy in self.offsets))

    def bbox(self) -> tuple[int, int, int, int]:
        """``(min_dx, min_dy, max_dx, max_dy)``."""
        a = self.as_array()
        return int(a[:, 0].min()), int(a[:, 1].min()), int(a[:, 0].max()), int(a[:, 1].max())


@dataclass(frozen=True, eq=False)
class StructuringFunction:
    """A probe: grey tones ``B(h)`` on a finite domain, strictly inside ``]0, M[``."""

    offsets: tuple[tuple[int, int], ...]
    values: np.ndarray
    scale: GreyScale = GreyScale()

    def __post_init__(self):
        offsets = _normalize_offsets(self.offsets)
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.shape != (len(offsets),):
            raise ContractError(f"{len(offsets)} offsets but {v.size} values")
        if not np.all(np.isfinite(v)) or v.min() <= 0 or v.max() >= self.scale.M:
            raise DomainError(f"probe values must lie strictly inside ]0, {self.scale.M:g}[")
        v.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "values", v)

    @classmethod
    def flat(cls, domain: FlatDomain, value: float, scale=None) -> StructuringFunction:
        return cls(domain.offsets, np.full(len(domain), float(value)), scale or GreyScale())

    @property
    def M(self) -> float:
        return self.scale.M

    @property
    def domain(self) -> FlatDomain:
        return FlatDomain(self.offsets)

    @property
    def is_flat(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def __len__(self):
        return len(self.offsets)

    def __eq__(self, other):
        if not isinstance(other, StructuringFunction):
            return NotImplemented
        return (
            self.offsets == other.offsets
            and self.scale == other.scale
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BoundField:
    """Field of reals plus its validity mask."""

    values: np.ndarray
    valid: np.ndarray


def reflect(d: FlatDomain) -> FlatDomain:
    """Transposed domain ``{-h : h in d}``."""
    return d.reflect()


def _as_field(f) -> np.ndarray:
    if isinstance(f, Image):
        return f.values
    a = np.asarray(f, dtype=np.float64)
    if a.ndim == 1:
        a = a[np.newaxis, :]
    if a.ndim != 2:
        raise ContractError(f"expected a 2-D field, got shape {a.shape}")
    return a


def valid_box(shape, offsets: np.ndarray) -> tuple[int, int, int, int]:
    """Output pixels ``x`` with every ``x + h`` inside ``shape``.

    Returns ``(y0, y1, x0, x1)`` half-open; the box may be empty.
    """
    H, W = shape
    dx, dy = offsets[:, 0], offsets[:, 1]
    x0, x1 = max(0, -int(dx.min())), min(W, W - int(dx.max()))
    y0, y1 = max(0, -int(dy.min())), min(H, H - int(dy.max()))
    return y0, max(y0, y1), x0, max(x0, x1)


def window_view(f: np.ndarray, box, h, rows=None) -> np.ndarray:
    """Slice of ``f`` holding ``f(x + h)`` for every ``x`` in ``box``.

    ``rows`` optionally restricts to a half-open row band inside the box.
    """
    y0, y1, x0, x1 = box
    if rows is not None:
        y0, y1 = rows
    dx, dy = h
    return f[y0 + dy : y1 + dy, x0 + dx : x1 + dx]


def embed(shape, box, inner: np.ndarray, fill=np.nan):
    """Place a valid-box result into a full-size field and build the mask."""
    y0, y1, x0, x1 = box
    out = np.full(shape, fill, dtype=inner.dtype)
    valid = np.zeros(shape, dtype=bool)
    out[y0:y1, x0:x1] = inner
    valid[y0:y1, x0:x1] = True
    return out, valid


def is_empty(box) -> bool:
    return box[1] <= box[0] or box[3] <= box[2]


def _invalid(shape) -> BoundField:
    return BoundField(np.full(shape, np.nan), np.zeros(shape, dtype=bool))


def _sliding(f: np.ndarray, offsets: np.ndarray, reduce, weights=None) -> BoundField:
    box = valid_box(f.shape, offsets)
    if is_empty(box):
        return _invalid(f.shape)
    acc = None
    for i, h in enumerate(offsets):
        w = window_view(f, box, h)
        if weights is not None:
            w = w + weights[i]
        acc = w.copy() if acc is None else reduce(acc, w, out=acc)
    values, valid = embed(f.shape, box, acc)
    return BoundField(values, valid)


def dilate_flat(f, d: FlatDomain) -> BoundField:
    """Flat dilation: ``max { f(x - h) : h in d }``."""
    return _sliding(_as_field(f), -d.as_array(), np.maximum)


def erode_flat(f, d: FlatDomain) -> BoundField:
    """Flat erosion: ``min { f(x + h) : h in d }``."""
    return _sliding(_as_field(f), d.as_array(), np.minimum)


def dilate_fn(f, B: StructuringFunction) -> BoundField:
    """Functional dilation ``max { f(x - h) + B(h) }``; may exceed ``M``."""
    return _sliding(_as_field(f), -B.domain.as_array(), np.maximum, B.values)


def erode_fn(f, B: StructuringFunction) -> BoundField:
    """Functional erosion ``min { f(x + h) - B(h) }``."""
    return _sliding(_as_field(f), B.domain.as_array(), np.minimum, -B.values)


def row_bands(box, n_per_pixel: int, budget: int = _STACK_BUDGET):
    """Split the rows of ``box`` into bands whose window stack fits ``budget``."""
    y0, y1, x0, x1 = box
    per_row = max(1, (x1 - x0) * n_per_pixel)
    step = max(1, budget // per_row)
    for start in range(y0, y1, step):
        yield start, min(y1, start + step)


def window_stack(f: np.ndarray, box, offsets, rows, weights=None, scale=None) -> np.ndarray:
    """Stack ``f(x + h)`` (optionally ``/ scale[i]``) along a leading axis."""
    y0, y1 = rows
    x0, x1 = box[2], box[3]
    stack = np.empty((len(offsets), y1 - y0, x1 - x0))
    for i, h in enumerate(offsets):
        w = window_view(f, box, h, rows)
        if scale is not None:
            np.divide(w, scale[i], out=stack[i])
        else:
            stack[i] = w
    return stack


def rank_filter(f, d: FlatDomain, rank: int) -> BoundField:
    """Ascending order statistic of ``{ f(x + h) : h in d }``.

    ``rank = 1`` is the flat erosion; ``rank = len(d)`` the window maximum,
    i.e. the flat dilation by ``reflect(d)``.
    """
    n = len(d)
    if int(rank) != rank or not 1 <= rank <= n:
        raise ParameterError(f"rank must be an integer in [1, {n}], got {rank!r}")
    rank = int(rank)
    a = _as_field(f)
    offsets = d.as_array()
    box = valid_box(a.shape, offsets)
    if is_empty(box):
        return _invalid(a.shape)
    y0, y1, x0, x1 = box
    inner = np.empty((y1 - y0, x1 - x0))
    for rows in row_bands(box, n):
        stack = window_stack(a, box, offsets, rows)
        stack.partition(rank - 1, axis=0)
        inner[rows[0] - y0 : rows[1] - y0] = stack[rank - 1]
    values, valid = embed(a.shape, box, inner)
    return BoundField(values, valid)
