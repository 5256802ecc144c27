"""Asplund's distances under the LIP multiplicative law.

For a probe ``B`` the two bound maps are

    lambda_B f (x) = max_h  ftilde(x + h) / Btilde(h)     (least upper bounds)
    mu_B f (x)     = min_h  ftilde(x + h) / Btilde(h)     (greatest lower bounds)

with ``tilde(v) = ln(1 - v/M)``, and the distance map is ``ln(lambda / mu)``.
``lambda_B`` is a dilation and ``mu_B`` an erosion from the image lattice to
the non-negative extended reals.  With a flat probe both reduce to ordinary
flat morphology on ``f`` followed by logarithms.

All maps use valid-border semantics (see :mod:`asplundmap.morpho`); invalid
pixels hold NaN.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError, OracleError, ParameterError, ShapeError
from .lip import Image, tilde
from .morpho import (
    FlatDomain,
    StructuringFunction,
    dilate_flat,
    embed,
    erode_flat,
    is_empty,
    rank_filter,
    row_bands,
    valid_box,
    window_stack,
    window_view,
)

__all__ = [
    "BoundMap",
    "DistanceMap",
    "asplund_distance",
    "lambda_map",
    "mu_map",
    "distance_map_general",
    "distance_map_flat",
    "distance_map_tolerance",
    "tolerance_count",
    "oracle_bounds",
]


@dataclass(frozen=True, eq=False)
class BoundMap:
    values: np.ndarray
    valid: np.ndarray
    kind: Literal["upper", "lower"]


@dataclass(frozen=True, eq=False)
class DistanceMap:
    """Per-pixel Asplund distances; ``tolerance`` is the discarded fraction ``p``."""

    values: np.ndarray
    valid: np.ndarray
    tolerance: float = 0.0

    @property
    def shape(self):
        return self.values.shape

    def valid_values(self) -> np.ndarray:
        return self.values[self.valid]


def log_ratio(lam, mu):
    """``ln(lam / mu)`` on the extended non-negative reals.

    ``0/0`` and ``inf/inf`` (all-white or all-black windows, both degenerate
    homothetics of the probe) are defined as distance 0.
    """
    lam = np.asarray(lam, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(lam / mu)
    return np.where(lam == mu, 0.0, out)


def _check_scale(f: Image, B: StructuringFunction):
    if f.scale != B.scale:
        raise ShapeError(f"image M={f.M:g} but probe M={B.M:g}")


def _density(v, M=None) -> np.ndarray:
    """``-tilde(v)``, a non-negative field; ``0 - t`` keeps white at +0.0."""
    return 0.0 - tilde(v, M)


def _probe_density(B: StructuringFunction) -> np.ndarray:
    return -np.log1p(-B.values / B.M)


def _bands(box, threads: int, n_per_pixel: int | None = None):
    y0, y1 = box[0], box[1]
    if n_per_pixel is not None:
        bands = list(row_bands(box, n_per_pixel))
    else:
        bands = [(y0, y1)]
    if threads > 1:
        # finer bands so every worker gets a share
        out = []
        for a, b in bands:
            step = max(1, -(-(b - a) // threads))
            out.extend((s, min(b, s + step)) for s in range(a, b, step))
        bands = out
    return bands


def _run(fn, bands, threads: int):
    if threads <= 1 or len(bands) == 1:
        for rows in bands:
            fn(rows)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(fn, bands))


def _positive_windows(f: Image, offsets, box) -> np.ndarray:
    """True where every pixel of the window is strictly positive."""
    pos = f.values > 0
    acc = np.ones((box[1] - box[0], box[3] - box[2]), dtype=bool)
    for h in offsets:
        acc &= window_view(pos, box, h)
    return acc


def _ratio_bounds(f: Image, B: StructuringFunction, threads: int = 1):
    """Least upper and greatest lower bound fields over the valid box."""
    _check_scale(f, B)
    offsets = B.domain.as_array()
    box = valid_box(f.shape, offsets)
    if is_empty(box):
        return box, None, None
    tf = _density(f)
    tB = _probe_density(B)
    y0, y1, x0, x1 = box
    lam = np.empty((y1 - y0, x1 - x0))
    mu = np.empty_like(lam)

    def work(rows):
        a, b = rows[0] - y0, rows[1] - y0
        hi, lo = lam[a:b], mu[a:b]
        tmp = np.empty_like(hi)
        for i, h in enumerate(offsets):
            np.divide(window_view(tf, box, h, rows), tB[i], out=tmp)
            if i == 0:
                hi[...] = tmp
                lo[...] = tmp
            else:
                np.maximum(hi, tmp, out=hi)
                np.minimum(lo, tmp, out=lo)

    _run(work, _bands(box, threads), threads)
    return box, lam, mu


def _finish(f: Image, offsets, box, inner, strict: bool, tolerance: float) -> DistanceMap:
    if box is None or is_empty(box):
        return DistanceMap(np.full(f.shape, np.nan), np.zeros(f.shape, dtype=bool), tolerance)
    if strict:
        inner = np.where(_positive_windows(f, offsets, box), inner, np.nan)
    values, valid = embed(f.shape, box, inner)
    valid &= ~np.isnan(values)
    return DistanceMap(values, valid, tolerance)


def asplund_distance(f: Image, g: Image) -> float:
    """Functional Asplund distance between two whole images, ``g`` probing.

    Zero exactly when ``f = k (x) g`` for some ``k > 0``.
    """
    if f.shape != g.shape or f.scale != g.scale:
        raise ShapeError("asplund_distance needs images of equal shape and scale")
    if g.values.min() <= 0 or g.values.max() >= g.M:
        raise DomainError("the probing image must lie strictly inside ]0, M[")
    r = _density(f) / _density(g)
    return float(log_ratio(r.max(), r.min()))


def lambda_map(f: Image, B: StructuringFunction, threads: int = 1) -> BoundMap:
    """Map of least upper bounds: smallest ``a`` with ``f(x+h) <= a (x) B(h)``."""
    box, lam, _ = _ratio_bounds(f, B, threads)
    if lam is None:
        return BoundMap(np.full(f.shape, np.nan), np.zeros(f.shape, dtype=bool), "upper")
    values, valid = embed(f.shape, box, lam)
    return BoundMap(values, valid, "upper")


def mu_map(f: Image, B: StructuringFunction, threads: int = 1) -> BoundMap:
    """Map of greatest lower bounds: largest ``b`` with ``b (x) B(h) <= f(x+h)``."""
    box, _, mu = _ratio_bounds(f, B, threads)
    if mu is None:
        return BoundMap(np.full(f.shape, np.nan), np.zeros(f.shape, dtype=bool), "lower")
    values, valid = embed(f.shape, box, mu)
    return BoundMap(values, valid, "lower")


def distance_map_general(
    f: Image, B: StructuringFunction, *, strict: bool = False, threads: int = 1
) -> DistanceMap:
    """Exact map of Asplund's distances for an arbitrary structuring function.

    With ``strict`` set, pixels whose window touches a zero tone are marked
    invalid instead of yielding an infinite distance.
    """
    box, lam, mu = _ratio_bounds(f, B, threads)
    inner = None if lam is None else log_ratio(lam, mu)
    return _finish(f, B.domain.as_array(), box, inner, strict, 0.0)


def distance_map_flat(
    f: Image, b0: float, d: FlatDomain, *, strict: bool = False
) -> DistanceMap:
    """Exact distance map for the flat probe of height ``b0`` on ``d``.

    Uses one flat dilation (over the reflected domain) and one flat erosion
    of ``f``.  ``b0`` cancels out and is only range-checked.
    """
    if not 0 < b0 < f.M:
        raise DomainError(f"flat probe height must lie in ]0, M[, got {b0!r}")
    hi = dilate_flat(f, d.reflect())
    lo = erode_flat(f, d)
    offsets = d.as_array()
    box = valid_box(f.shape, offsets)
    if is_empty(box):
        return _finish(f, offsets, None, None, strict, 0.0)
    y0, y1, x0, x1 = box
    t_hi = _density(hi.values[y0:y1, x0:x1], f.M)
    t_lo = _density(lo.values[y0:y1, x0:x1], f.M)
    return _finish(f, offsets, box, log_ratio(t_hi, t_lo), strict, 0.0)


def tolerance_count(p: float, n: int) -> int:
    """Points discarded at each extreme: ``floor(p * n)``, checked ``2k < n``."""
    if not 0 <= p < 0.5:
        raise ParameterError(f"tolerance must lie in [0, 0.5), got {p!r}")
    # rounding guards products like 0.3 * 10 = 3.0000000000000004
    k = math.floor(round(p * n, 9))
    if 2 * k >= n:
        raise ParameterError(f"tolerance {p} discards every point of a {n}-point probe")
    return k


def distance_map_tolerance(
    f: Image,
    B: StructuringFunction,
    p: float,
    *,
    method: Literal["auto", "sort", "rank"] = "auto",
    strict: bool = False,
    threads: int = 1,
) -> DistanceMap:
    """Distance map robust to noise: discard ``floor(p n)`` ratios at each end.

    With ``n = |D_B|`` and ``k = floor(p n)`` the upper bound is the
    ``(n - k)``-th and the lower bound the ``(k + 1)``-th ascending ratio.
    ``method="rank"`` (flat probes only, the default for them) runs two rank
    filters on ``f``; ``"sort"`` partitions the stacked ratios.  Both give
    bit-identical results on flat probes.
    """
    _check_scale(f, B)
    n = len(B)
    k = tolerance_count(p, n)
    if method == "auto":
        method = "rank" if B.is_flat else "sort"
    if method == "rank" and not B.is_flat:
        raise ParameterError("the rank-filter path needs a flat probe")
    if method not in ("sort", "rank"):
        raise ParameterError(f"unknown method {method!r}")

    d = B.domain
    offsets = d.as_array()
    box = valid_box(f.shape, offsets)
    if is_empty(box):
        return _finish(f, offsets, None, None, strict, p)
    y0, y1, x0, x1 = box

    if method == "rank":
        tB0 = _probe_density(B)[0]
        hi = rank_filter(f, d, n - k).values[y0:y1, x0:x1]
        lo = rank_filter(f, d, k + 1).values[y0:y1, x0:x1]
        lam = _density(hi, f.M) / tB0
        mu = _density(lo, f.M) / tB0
        return _finish(f, offsets, box, log_ratio(lam, mu), strict, p)

    tf = _density(f)
    tB = _probe_density(B)
    inner = np.empty((y1 - y0, x1 - x0))
    kth = sorted({k, n - 1 - k})

    def work(rows):
        stack = window_stack(tf, box, offsets, rows, scale=tB)
        stack.partition(kth, axis=0)
        inner[rows[0] - y0 : rows[1] - y0] = log_ratio(stack[n - 1 - k], stack[k])

    _run(work, _bands(box, threads, n), threads)
    return _finish(f, offsets, box, inner, strict, p)


def _lip_mul_raw(a: float, B: np.ndarray, M: float) -> np.ndarray:
    return M - M * (1.0 - B / M) ** a


def oracle_bounds(
    f: Image, B: StructuringFunction, x, tol: float = 1e-9
) -> tuple[float, float]:
    """Bounds at pixel ``x = (x, y)`` straight from their inf/sup definitions.

    Bisects on ``f(x+h) <= a (x) B(h)`` (and its dual) using the power form
    of LIP multiplication, never the log ratios.  Independent check for
    :func:`lambda_map` / :func:`mu_map`.
    """
    if tol <= 0:
        raise ParameterError("oracle tolerance must be positive")
    px, py = x
    offs = B.domain.as_array()
    xs, ys = px + offs[:, 0], py + offs[:, 1]
    if xs.min() < 0 or ys.min() < 0 or xs.max() >= f.width or ys.max() >= f.height:
        raise ParameterError(f"window at {x} leaves the image")
    fw = f.values[ys, xs]
    Bv = np.asarray(B.values)
    M = f.M

    # a (x) B(h) < M for every finite a, even where the power underflows
    black = bool(np.any(fw >= M))

    def above(a):
        return not black and bool(np.all(fw <= _lip_mul_raw(a, Bv, M)))

    def below(b):
        return bool(np.all(_lip_mul_raw(b, Bv, M) <= fw))

    floor, ceil = 2.0**-200, 2.0**200

    # least upper bound: `above` switches false -> true as a grows
    lo, hi = 2.0**-20, 2.0**20
    while not above(hi):
        hi *= 2
        if hi > ceil:
            raise OracleError(f"no LIP homothetic of the probe dominates the window at {x}")
    lam = None
    while above(lo):
        if lo < floor:
            lam = 0.0
            break
        hi, lo = lo, lo / 2
    if lam is None:
        lam = _bisect(above, lo, hi, tol, True)

    # greatest lower bound: `below` switches true -> false as b grows
    lo, hi = 2.0**-20, 2.0**20
    mu = None
    while below(hi):
        lo, hi = hi, hi * 2
        if hi > ceil:
            mu = math.inf
            break
    if mu is None:
        while not below(lo):
            lo /= 2
            if lo < floor:
                mu = 0.0
                break
    if mu is None:
        mu = _bisect(below, lo, hi, tol, False)
    return lam, mu


def _bisect(pred, lo, hi, tol, true_high):
    """Locate the switch point of a monotone predicate on ``[lo, hi]``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid) == true_high:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
