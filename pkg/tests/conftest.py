import numpy as np
import pytest

from asplundmap import FlatDomain, GreyScale, Image, StructuringFunction

M = 256.0


def random_image(rng, h=8, w=8, lo=1, hi=255, integer=False):
    if integer:
        return Image(rng.integers(lo, hi + 1, size=(h, w)).astype(float))
    return Image(rng.uniform(lo, hi, size=(h, w)))


def random_domain(rng, size=3, min_count=2, anchor=None):
    """Random subset of a size x size box; origin at ``anchor`` (default centre)."""
    c = size // 2 if anchor is None else anchor
    while True:
        mask = rng.random((size, size)) < 0.6
        if mask.sum() >= min_count:
            return FlatDomain.from_mask(mask, (c, c))


def random_probe(rng, size=3, min_count=2, lo=1.0, hi=255.0):
    d = random_domain(rng, size, min_count)
    return StructuringFunction(d.offsets, rng.uniform(lo, hi, len(d)), GreyScale(M))


def naive_window(f, offsets, x, y, sign=1):
    H, W = f.shape
    out = []
    for dx, dy in offsets:
        xx, yy = x + sign * dx, y + sign * dy
        if not (0 <= xx < W and 0 <= yy < H):
            return None
        out.append(f[yy, xx])
    return out


def naive_map(f, offsets, reduce, sign=1, weights=None):
    """Double-loop reference over ``f(x + sign*h)`` with NaN outside the valid region."""
    f = np.asarray(f, dtype=float)
    H, W = f.shape
    out = np.full((H, W), np.nan)
    for y in range(H):
        for x in range(W):
            win = naive_window(f, offsets, x, y, sign)
            if win is None:
                continue
            if weights is not None:
                win = [v + w for v, w in zip(win, weights)]
            out[y, x] = reduce(win)
    return out


def naive_ratios(f: Image, B: StructuringFunction, x, y):
    """Sorted ratios ln(1 - f/M) / ln(1 - B/M) with plain math.log."""
    import math

    r = []
    for (dx, dy), b in zip(B.offsets, B.values):
        v = f.values[y + dy, x + dx]
        num = math.log(1 - v / f.M) if v < f.M else -math.inf
        r.append(num / math.log(1 - b / f.M))
    return sorted(r)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
