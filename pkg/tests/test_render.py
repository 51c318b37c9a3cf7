import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shadenorm.core import LightPath, NormalMap, RingSpec, gen_ring, synth_sphere
from shadenorm.errors import DomainError, StructuralError
from shadenorm.render import (ShadingSequence, decode_signed, encode_signed, render_shading,
                              shade, snap)

from conftest import random_rotation

H = math.sqrt(2) / 2


def _single(n):
    return NormalMap(np.array(n, dtype=float).reshape(1, 1, 3), np.ones((1, 1), bool))


def test_apex_under_ring(ring9):
    seq = render_shading(_single([0, 0, 1]), ring9)
    np.testing.assert_allclose(seq.frames[:, 0, 0], H, atol=1e-15)


def test_normal_equal_to_light(ring9):
    l = ring9.directions[3]
    seq = render_shading(_single(l), ring9)
    assert seq.frames[3, 0, 0] == pytest.approx(1.0, abs=1e-15)
    assert seq.frames.max() <= 1.0


def test_clamped_value():
    s = shade(np.array([[[1.0, 0, 0]]]), np.ones((1, 1), bool), np.array([[-H, 0, H]]))
    assert s[0, 0, 0] == 0.0


def test_background_zero(sphere64, ring9):
    seq = render_shading(sphere64, ring9)
    assert np.all(seq.frames[:, ~sphere64.mask] == 0)
    assert seq.frames.min() >= 0 and seq.frames.max() <= 1


def test_matches_bruteforce_single_light(sphere64):
    lp = gen_ring(RingSpec(1, 30, 70))
    frame = render_shading(sphere64, lp).frames[0]
    l = lp.directions[0]
    oracle = np.zeros(sphere64.shape)
    for i in range(sphere64.height):
        for j in range(sphere64.width):
            if sphere64.mask[i, j]:
                n = sphere64.normals[i, j]
                oracle[i, j] = max(n[0] * l[0] + n[1] * l[1] + n[2] * l[2], 0.0)
    # render snaps to the 2**-52 grid; the oracle does not
    np.testing.assert_allclose(frame, oracle, rtol=0, atol=2.0 ** -52)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_range_on_random_normal_maps(seed):
    rng = np.random.default_rng(seed)
    n = rng.standard_normal((12, 10, 3))
    n[..., 2] = np.abs(n[..., 2]) + 1e-3
    n /= np.linalg.norm(n, axis=2, keepdims=True)
    mask = rng.random((12, 10)) < 0.7
    seq = render_shading(NormalMap(n, mask), gen_ring(RingSpec(7, 35, 10)))
    assert seq.frames.min() >= 0.0
    assert seq.frames.max() <= 1.0


def test_rotation_invariance():
    nm = synth_sphere(32)
    dirs = gen_ring(RingSpec(9, 45, 0)).directions
    base = shade(nm.normals, nm.mask, dirs)
    rng = np.random.default_rng(0)
    for _ in range(100):
        r = random_rotation(rng)
        rotated = shade(nm.normals @ r.T, nm.mask, dirs @ r.T)
        assert np.max(np.abs(rotated - base)) <= 1e-12


def test_signed_codec_points():
    lp = gen_ring(RingSpec(3, 45, 0))
    fr = np.array([0.0, 1.0, 0.5]).reshape(3, 1, 1)
    enc = encode_signed(ShadingSequence(fr, np.ones((1, 1), bool), lp))
    np.testing.assert_array_equal(enc.frames.ravel(), [-1.0, 1.0, 0.0])
    assert enc.signed


def test_signed_round_trip_exact(seq256):
    dec = decode_signed(encode_signed(seq256))
    assert np.max(np.abs(dec.frames - seq256.frames)) == 0.0
    assert not dec.signed


def test_signed_background(sphere64, ring9):
    seq = render_shading(sphere64, ring9)
    enc = encode_signed(seq)
    assert np.all(enc.frames[:, ~seq.mask] == -1.0)
    np.testing.assert_array_equal(enc.mask, seq.mask)


def test_signed_domain_errors(ring9):
    m = np.ones((1, 1), bool)
    with pytest.raises(DomainError):
        encode_signed(ShadingSequence(np.full((9, 1, 1), 1.5), m, ring9))
    with pytest.raises(DomainError):
        decode_signed(ShadingSequence(np.full((9, 1, 1), -2.0), m, ring9))


def test_snap_idempotent():
    x = np.random.default_rng(1).random(1000)
    s = snap(x)
    assert np.array_equal(snap(s), s)
    assert np.max(np.abs(s - x)) <= 2.0 ** -53


def test_sequence_length_mismatch(ring9):
    with pytest.raises(StructuralError):
        ShadingSequence(np.zeros((3, 2, 2)), np.ones((2, 2), bool), ring9)
