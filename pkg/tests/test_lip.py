import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from asplundmap import (
    DomainError,
    GreyScale,
    Image,
    ShapeError,
    clamp_floor,
    invert_convention,
    lip_add,
    lip_scalar_mul,
    tilde,
    tilde_inverse,
)

M = 256.0
tones = st.floats(0.0, 255.9, allow_nan=False)
images = arrays(np.float64, (4, 5), elements=tones).map(Image)
# near M, k (x) f rounds to M in float64 and the next product cannot recover
# (0.1 (x) (10 (x) 255) evaluates to 256), so compositions use tones <= 200
moderate = arrays(np.float64, (4, 5), elements=st.floats(0.0, 200.0)).map(Image)
scalars = st.floats(0.1, 10.0)


def img(*v):
    return Image(np.array([v], dtype=float))


class TestExamples:
    def test_add_half_half(self):
        assert lip_add(img(128), img(128)).values[0, 0] == 192.0

    def test_add_identity(self, rng):
        f = Image(rng.uniform(0, 255, (3, 4)))
        np.testing.assert_array_equal(lip_add(f, Image.constant(0, 4, 3)).values, f.values)

    def test_add_hand_value(self):
        assert lip_add(img(100), img(200)).values[0, 0] == pytest.approx(300 - 20000 / 256, abs=1e-12)
        assert 300 - 20000 / 256 == 221.875

    def test_mul_identity(self, rng):
        f = Image(rng.uniform(0, 256, (3, 4)))
        np.testing.assert_allclose(lip_scalar_mul(1, f).values, f.values, rtol=0, atol=1e-12)

    def test_mul_two_is_self_sum(self):
        assert lip_scalar_mul(2, img(128)).values[0, 0] == pytest.approx(192.0, abs=1e-12)

    def test_darkening_round_trip(self, rng):
        f = Image(rng.uniform(0, 250, (6, 6)))
        fd = lip_scalar_mul(0.3, f)
        assert np.all(fd.values <= f.values)
        np.testing.assert_allclose(lip_scalar_mul(1 / 0.3, fd).values, f.values, atol=1e-9)

    def test_composition_saturates_near_black(self):
        # documented float64 limit of the positive cone near M
        f = img(255)
        assert lip_scalar_mul(0.1, lip_scalar_mul(10, f)).values[0, 0] == M

    def test_mul_black_stays_black(self):
        assert lip_scalar_mul(0.3, img(M)).values[0, 0] == M
        assert lip_scalar_mul(0, img(M)).values[0, 0] == 0

    def test_tilde_values(self):
        assert tilde(img(0))[0, 0] == 0.0
        assert math.copysign(1, tilde(img(0))[0, 0]) == 1
        assert tilde(img(128))[0, 0] == pytest.approx(math.log(0.5), abs=1e-15)
        assert tilde(img(M))[0, 0] == -math.inf

    def test_tilde_inverse_values(self):
        assert tilde_inverse([[0.0]]).values[0, 0] == 0
        assert tilde_inverse([[-math.inf]]).values[0, 0] == M
        assert tilde_inverse([[math.log(0.5)]]).values[0, 0] == pytest.approx(128, abs=1e-12)

    def test_invert(self):
        np.testing.assert_array_equal(invert_convention(img(0, 255)).values, [[255, 0]])

    def test_clamp(self):
        np.testing.assert_array_equal(clamp_floor(img(0, 0.5, 3)).values, [[1, 1, 3]])


class TestErrors:
    def test_negative_scalar(self):
        with pytest.raises(DomainError):
            lip_scalar_mul(-1, img(10))

    def test_out_of_range_image(self):
        with pytest.raises(DomainError):
            Image([[257.0]])
        with pytest.raises(DomainError):
            Image([[-1.0]])

    def test_add_shape_and_scale(self):
        with pytest.raises(ShapeError):
            lip_add(img(1, 2), img(1))
        with pytest.raises(ShapeError):
            lip_add(img(1), Image([[1.0]], GreyScale(100)))

    def test_add_black(self):
        with pytest.raises(DomainError):
            lip_add(img(M), img(1))

    def test_tilde_domain(self):
        with pytest.raises(DomainError):
            tilde(np.array([300.0]))

    def test_tilde_inverse_positive(self):
        with pytest.raises(DomainError):
            tilde_inverse([[0.1]])

    def test_invert_range(self):
        with pytest.raises(DomainError):
            invert_convention(img(255.5))

    def test_bad_scale(self):
        with pytest.raises(ValueError):
            GreyScale(0)


class TestProperties:
    @given(images, images)
    def test_closure_and_commutativity(self, f, g):
        s = lip_add(f, g).values
        assert np.all((s >= 0) & (s < M))
        np.testing.assert_allclose(s, lip_add(g, f).values, rtol=1e-12, atol=0)

    @given(images, images, images)
    def test_associativity(self, f, g, h):
        a = lip_add(lip_add(f, g), h).values
        b = lip_add(f, lip_add(g, h)).values
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    @given(moderate, scalars, scalars)
    def test_scalar_composition(self, f, k1, k2):
        a = lip_scalar_mul(k1 * k2, f).values
        b = lip_scalar_mul(k1, lip_scalar_mul(k2, f)).values
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)

    @given(moderate, st.integers(1, 6))
    def test_integer_scalar_is_repeated_sum(self, f, n):
        acc = f
        for _ in range(n - 1):
            acc = lip_add(acc, f)
        np.testing.assert_allclose(lip_scalar_mul(n, f).values, acc.values, rtol=1e-9, atol=1e-9)

    @given(images, scalars)
    def test_mul_stays_in_range(self, f, k):
        v = lip_scalar_mul(k, f).values
        assert np.all((v >= 0) & (v <= M))

    @given(moderate, scalars)
    def test_tilde_linearizes_mul(self, f, k):
        np.testing.assert_allclose(tilde(lip_scalar_mul(k, f)), k * tilde(f), rtol=1e-9, atol=1e-12)

    @given(images, images)
    def test_tilde_is_homomorphism(self, f, g):
        np.testing.assert_allclose(tilde(lip_add(f, g)), tilde(f) + tilde(g), rtol=1e-9, atol=1e-12)

    @given(images)
    def test_tilde_round_trip_and_monotone(self, f):
        t = tilde(f)
        assert np.all(t <= 0)
        np.testing.assert_allclose(tilde_inverse(t).values, f.values, rtol=0, atol=1e-9)
        v, tv = f.values.ravel(), t.ravel()
        order = np.argsort(v)
        assert np.all(np.diff(tv[order]) <= 0)

    @given(arrays(np.float64, (3, 3), elements=st.integers(0, 255).map(float)))
    def test_invert_involution(self, a):
        f = Image(a)
        np.testing.assert_array_equal(invert_convention(invert_convention(f)).values, a)


def test_image_is_readonly_copy():
    a = np.ones((2, 2))
    f = Image(a)
    a[0, 0] = 5
    assert f.values[0, 0] == 1
    with pytest.raises(ValueError):
        f.values[0, 0] = 3


def test_one_dimensional_promoted():
    assert Image([1.0, 2.0, 3.0]).shape == (1, 3)
