import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from pointstream.core.color import lab_to_srgb, srgb_to_lab

from oracles import lab_to_srgb_scalar, srgb_to_lab_scalar


def test_white_maps_to_reference_point():
    lab = srgb_to_lab([255, 255, 255])
    assert abs(lab[0] - 100.0) < 1e-3
    assert abs(lab[1]) < 1e-3
    assert abs(lab[2]) < 1e-3


def test_black_maps_to_zero():
    lab = srgb_to_lab([0, 0, 0])
    assert np.all(np.abs(lab) < 1e-3)


def test_mid_gray_matches_scalar_reference():
    lab = srgb_to_lab([119, 119, 119])
    ref = srgb_to_lab_scalar(119, 119, 119)
    assert np.allclose(lab, ref, atol=1e-6)


def test_vectorized_matches_scalar_reference_on_sample(rng):
    triples = rng.integers(0, 256, size=(500, 3))
    lab = srgb_to_lab(triples)
    for t, l in zip(triples, lab):
        ref = srgb_to_lab_scalar(*[int(v) for v in t])
        assert np.allclose(l, ref, atol=1e-6)


def test_inverse_of_white():
    assert tuple(lab_to_srgb([100.0, 0.0, 0.0])) == (255, 255, 255)


def test_out_of_gamut_clamps():
    assert tuple(lab_to_srgb([200.0, 0.0, 0.0])) == (255, 255, 255)
    # scalar oracle applies the same explicit clamp
    assert lab_to_srgb_scalar(200.0, 0.0, 0.0) == (255, 255, 255)
    assert tuple(lab_to_srgb([-50.0, 0.0, 0.0])) == (0, 0, 0)


def test_round_trip_random_triples(rng):
    triples = rng.integers(0, 256, size=(10_000, 3)).astype(np.uint8)
    back = lab_to_srgb(srgb_to_lab(triples))
    assert np.array_equal(back, triples)


def test_round_trip_exhaustive_all_24bit():
    # all 2^24 byte triples, chunked to bound memory
    codes = np.arange(1 << 24, dtype=np.uint32)
    for chunk in np.array_split(codes, 64):
        rgb = np.stack(
            [(chunk >> 16) & 0xFF, (chunk >> 8) & 0xFF, chunk & 0xFF], axis=1
        ).astype(np.uint8)
        back = lab_to_srgb(srgb_to_lab(rgb))
        assert np.array_equal(back, rgb)


def test_l_range_bounds(rng):
    triples = rng.integers(0, 256, size=(2000, 3))
    lab = srgb_to_lab(triples)
    assert np.all(lab[:, 0] >= -1e-9)
    assert np.all(lab[:, 0] <= 100.0 + 1e-9)


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_round_trip_property(r, g, b):
    triple = np.array([r, g, b], dtype=np.uint8)
    assert np.array_equal(lab_to_srgb(srgb_to_lab(triple)), triple)


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_scalar_and_vector_inverses_agree(r, g, b):
    lab = srgb_to_lab_scalar(r, g, b)
    assert tuple(lab_to_srgb(list(lab))) == lab_to_srgb_scalar(*lab)
