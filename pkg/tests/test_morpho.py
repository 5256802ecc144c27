import numpy as np
import pytest
from conftest import naive_map, random_domain

from asplundmap import (
    ContractError,
    FlatDomain,
    GreyScale,
    Image,
    ParameterError,
    StructuringFunction,
    dilate_flat,
    dilate_fn,
    erode_flat,
    erode_fn,
    rank_filter,
    reflect,
)
from asplundmap.morpho import valid_box

ROW = Image([[10.0, 20.0, 30.0]])
D3 = FlatDomain.line([-1, 0, 1])
B3 = StructuringFunction(D3.offsets, [5.0, 1.0, 5.0])


def same(a, b):
    np.testing.assert_array_equal(a, b)


class TestDomain:
    def test_reflect_examples(self):
        assert reflect(FlatDomain([(0, 0)])) == FlatDomain([(0, 0)])
        assert reflect(FlatDomain([(1, 0), (0, 2)])) == FlatDomain([(-1, 0), (0, -2)])

    def test_reflect_involution(self, rng):
        for _ in range(20):
            d = random_domain(rng, 5)
            assert reflect(reflect(d)) == d

    def test_rect_and_mask(self):
        d = FlatDomain.rect(3, 2, (1, 0))
        assert len(d) == 6 and d.bbox() == (-1, 0, 1, 1)
        mask = np.array([[1, 0], [1, 1]], bool)
        assert set(FlatDomain.from_mask(mask).offsets) == {(0, 0), (0, 1), (1, 1)}

    def test_invalid_domains(self):
        with pytest.raises(ContractError):
            FlatDomain([])
        with pytest.raises(ContractError):
            FlatDomain([(0, 0), (0, 0)])

    def test_probe_values_open_interval(self):
        for v in (0.0, 256.0):
            with pytest.raises(ContractError):
                StructuringFunction([(0, 0)], [v])
        with pytest.raises(ContractError):
            StructuringFunction([(0, 0), (1, 0)], [1.0])


class TestExamples:
    def test_dilate_erode_row(self):
        hi, lo = dilate_flat(ROW, D3), erode_flat(ROW, D3)
        assert hi.values[0, 1] == 30 and lo.values[0, 1] == 10
        same(hi.valid, [[False, True, False]])
        assert np.isnan(hi.values[0, 0])

    def test_functional_row(self):
        assert dilate_fn(ROW, B3).values[0, 1] == 35
        assert erode_fn(ROW, B3).values[0, 1] == 5

    def test_rank_row(self):
        assert rank_filter(ROW, D3, 2).values[0, 1] == 20
        assert rank_filter(ROW, D3, 1).values[0, 1] == 10
        assert rank_filter(ROW, D3, 3).values[0, 1] == 30

    def test_constant(self, rng):
        f = Image.constant(77, 9, 7)
        for op in (dilate_flat, erode_flat):
            r = op(f, random_domain(rng, 5))
            assert np.all(r.values[r.valid] == 77)

    def test_identity_domain(self, rng):
        f = Image(rng.integers(0, 256, (5, 6)).astype(float))
        d0 = FlatDomain([(0, 0)])
        for op in (dilate_flat, erode_flat):
            r = op(f, d0)
            assert r.valid.all()
            same(r.values, f.values)

    def test_single_offset_function(self, rng):
        f = rng.integers(0, 256, (5, 6)).astype(float)
        B = StructuringFunction([(0, 0)], [7.0])
        same(dilate_fn(f, B).values, f + 7)
        same(erode_fn(f, B).values, f - 7)

    def test_rank_range(self):
        for r in (0, 4, 1.5):
            with pytest.raises(ParameterError):
                rank_filter(ROW, D3, r)

    def test_probe_larger_than_image(self):
        r = dilate_flat(ROW, FlatDomain.rect(5, 1))
        assert not r.valid.any()
        assert not rank_filter(ROW, FlatDomain.rect(5, 1), 1).valid.any()

    def test_valid_box(self):
        assert valid_box((10, 8), np.array([[-1, -2], [2, 1]])) == (2, 9, 1, 6)


def _case(rng):
    h, w = rng.integers(3, 12, 2)
    f = rng.integers(0, 256, (h, w)).astype(float)
    d = random_domain(rng, int(rng.choice([1, 3, 5])), 1, anchor=int(rng.integers(0, 2)))
    return f, d


class TestNaiveOracles:
    """Each kernel against a plain double loop, exact equality, 600 cases each."""

    N = 600

    def _check(self, got, expected):
        same(got.valid, ~np.isnan(expected))
        same(got.values[got.valid], expected[got.valid])

    def test_dilate_flat(self, rng):
        for _ in range(self.N):
            f, d = _case(rng)
            self._check(dilate_flat(f, d), naive_map(f, d.offsets, max, sign=-1))

    def test_erode_flat(self, rng):
        for _ in range(self.N):
            f, d = _case(rng)
            self._check(erode_flat(f, d), naive_map(f, d.offsets, min))

    def test_functional(self, rng):
        for _ in range(self.N):
            f, d = _case(rng)
            vals = rng.integers(1, 256, len(d)).astype(float)
            B = StructuringFunction(d.offsets, vals)
            self._check(dilate_fn(f, B), naive_map(f, d.offsets, max, -1, vals))
            self._check(erode_fn(f, B), naive_map(f, d.offsets, min, 1, -vals))

    def test_rank(self, rng):
        for _ in range(self.N):
            f, d = _case(rng)
            r = int(rng.integers(1, len(d) + 1))
            self._check(rank_filter(f, d, r), naive_map(f, d.offsets, lambda w: sorted(w)[r - 1]))


class TestLatticeProperties:
    def test_duality(self, rng):
        for _ in range(200):
            f, d = _case(rng)
            a = erode_flat(f, d)
            b = dilate_flat(-f, reflect(d))
            same(a.valid, b.valid)
            same(a.values[a.valid], -b.values[b.valid])

    def test_distributivity(self, rng):
        for _ in range(200):
            f, d = _case(rng)
            g = rng.integers(0, 256, f.shape).astype(float)
            same(dilate_flat(np.maximum(f, g), d).values,
                 np.maximum(dilate_flat(f, d).values, dilate_flat(g, d).values))
            same(erode_flat(np.minimum(f, g), d).values,
                 np.minimum(erode_flat(f, d).values, erode_flat(g, d).values))

    def test_monotonicity(self, rng):
        for _ in range(200):
            f, d = _case(rng)
            g = f + rng.integers(0, 5, f.shape)
            for op in (dilate_flat, erode_flat):
                a, b = op(f, d), op(g, d)
                assert np.all(a.values[a.valid] <= b.values[b.valid])
            r = int(rng.integers(1, len(d) + 1))
            a, b = rank_filter(f, d, r), rank_filter(g, d, r)
            assert np.all(a.values[a.valid] <= b.values[b.valid])

    def test_extensivity_with_origin(self, rng):
        for _ in range(200):
            f, d = _case(rng)
            if (0, 0) not in d.offsets:
                d = FlatDomain(d.offsets + ((0, 0),))
            hi, lo = dilate_flat(f, d), erode_flat(f, d)
            v = hi.valid & lo.valid
            assert np.all(lo.values[v] <= f[v]) and np.all(f[v] <= hi.values[v])

    def test_flat_zero_function_matches_flat(self, rng):
        # B flat at 0 is outside ]0, M[, so emulate with an offset and subtract it
        for _ in range(50):
            f, d = _case(rng)
            B = StructuringFunction.flat(d, 1.0)
            same(dilate_fn(f, B).values - 1, dilate_flat(f, d).values)
            same(erode_fn(f, B).values + 1, erode_flat(f, d).values)

    def test_rank_extremes(self, rng):
        for _ in range(100):
            f, d = _case(rng)
            same(rank_filter(f, d, 1).values, erode_flat(f, d).values)
            same(rank_filter(f, d, len(d)).values, dilate_flat(f, reflect(d)).values)


def test_scale_mismatch_is_contract_error():
    with pytest.raises(ContractError):
        StructuringFunction([(0, 0)], [300.0], GreyScale(256))
