import math

import numpy as np
import pytest

from shadenorm.core import LightPath, NormalMap, RingSpec, gen_ring, synth_sphere
from shadenorm.errors import StructuralError
from shadenorm.metrics import angular_error_map
from shadenorm.render import ShadingSequence, render_shading
from shadenorm.solver import Status, solve_masked, solve_naive


def _normal(az_deg, el_deg):
    a, e = math.radians(az_deg), math.radians(el_deg)
    return np.array([math.cos(e) * math.cos(a), math.cos(e) * math.sin(a), math.sin(e)])


def atan2_angle_deg(a, b):
    """Angle without the acos floor near 1 (acos(1 - 1ulp) is already ~8.5e-7 deg)."""
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    return np.degrees(np.arctan2(cross, np.sum(a * b, axis=-1)))


def _one(n):
    return NormalMap(np.asarray(n, float).reshape(1, 1, 3), np.ones((1, 1), bool))


def test_round_trip_sphere(sphere256, seq256):
    res = solve_masked(seq256)
    ok = res.status == Status.OK
    assert np.all(ok[sphere256.mask])
    err = atan2_angle_deg(res.normals.normals[ok], sphere256.normals[ok])
    assert err.max() < 1e-6


def test_underdetermined_two_positive():
    lp = gen_ring(RingSpec(3, 45, 0))
    n = _normal(60, 2)
    seq = render_shading(_one(n), lp)
    assert np.count_nonzero(seq.frames[:, 0, 0] > 1e-4) == 2
    res = solve_masked(seq)
    assert res.status[0, 0] == Status.UNDERDETERMINED
    assert not res.normals.mask[0, 0]
    np.testing.assert_array_equal(res.normals.normals[0, 0], 0)


def test_all_zero_shading_underdetermined(ring9):
    seq = ShadingSequence(np.zeros((9, 2, 2)), np.ones((2, 2), bool), ring9)
    res = solve_masked(seq)
    assert np.all(res.status == Status.UNDERDETERMINED)
    assert res.stats["underdetermined"] == 4
    # naive includes the zero equations and lands on n = 0
    assert np.all(solve_naive(seq).status == Status.DEGENERATE_NORM)


def test_rank_deficient():
    # four copies of one direction: enough equations, rank 1
    lp = LightPath([[0.6, 0.0, 0.8]] * 4)
    seq = ShadingSequence(np.full((4, 1, 1), 0.5), np.ones((1, 1), bool), lp)
    assert solve_masked(seq).status[0, 0] == Status.RANK_DEFICIENT


def test_background_status(sphere64, ring9):
    res = solve_masked(render_shading(sphere64, ring9))
    assert np.all(res.status[~sphere64.mask] == Status.BACKGROUND)
    assert res.stats["masked_in"] == int(sphere64.mask.sum())


def test_naive_equals_masked_without_clamping(ring9):
    n = _normal(10, 70)
    seq = render_shading(_one(n), ring9)
    assert np.all(seq.frames > 0)
    a = solve_masked(seq).normals.normals[0, 0]
    b = solve_naive(seq).normals.normals[0, 0]
    assert np.max(np.abs(a - b)) < 1e-12


def test_apex_exact_naive(ring9):
    res = solve_naive(render_shading(_one([0, 0, 1]), ring9))
    np.testing.assert_allclose(res.normals.normals[0, 0], [0, 0, 1], atol=1e-12)


def test_naive_bias(sphere256, seq256):
    clamped = np.any(seq256.frames == 0, axis=0) & sphere256.mask
    assert clamped.sum() > 1000
    e_m = angular_error_map(solve_masked(seq256).normals, sphere256)
    e_n = angular_error_map(solve_naive(seq256).normals, sphere256)
    sel = clamped & np.isfinite(e_m) & np.isfinite(e_n)
    assert e_n[sel].mean() - e_m[sel].mean() >= 1.0


def test_permutation_invariance(sphere64, ring9):
    seq = render_shading(sphere64, ring9)
    perm = np.random.default_rng(0).permutation(9)
    lp = LightPath(ring9.directions[perm])
    seq_p = ShadingSequence(seq.frames[perm], seq.mask, lp)
    a = solve_masked(seq).normals.normals
    b = solve_masked(seq_p).normals.normals
    assert np.max(np.abs(a - b)) < 1e-12


def test_raw_norm_is_one(seq256):
    res = solve_masked(seq256)
    ok = res.status == Status.OK
    assert np.max(np.abs(res.raw_norm[ok] - 1.0)) < 1e-9


def test_render_solve_render_idempotent(seq256):
    res = solve_masked(seq256)
    again = render_shading(res.normals, seq256.lights)
    ok = res.status == Status.OK
    assert np.max(np.abs(again.frames[:, ok] - seq256.frames[:, ok])) < 1e-9


def test_noise_residual_rms(sphere256, seq256):
    sigma, f = 0.01, 9
    # keep pixels far from the clamp so noise never changes the valid set
    far = sphere256.mask & np.all(seq256.frames > 0.1, axis=0)
    z = np.random.default_rng(5).standard_normal(seq256.frames.shape)
    noisy = np.where(far, seq256.frames + sigma * z, 0.0)
    res = solve_masked(ShadingSequence(noisy, far, seq256.lights))
    ok = res.status == Status.OK
    assert ok.sum() > 10_000
    rms = math.sqrt(np.mean(res.residual[ok] ** 2))
    expect = sigma * math.sqrt((f - 3) / f)
    assert abs(rms - expect) / expect < 0.10


def test_threshold_excludes_small_values(ring9):
    n = _normal(0, 20)
    seq = render_shading(_one(n), ring9)
    lo = seq.frames.copy()
    lo[seq.frames == 0] = 5e-5  # quantization-like residue on clamped frames
    res = solve_masked(ShadingSequence(lo, seq.mask, ring9))
    np.testing.assert_allclose(res.normals.normals[0, 0], n, atol=1e-9)


def test_threads_do_not_change_result(monkeypatch, seq256):
    monkeypatch.setenv("SHADENORM_THREADS", "1")
    a = solve_masked(seq256)
    monkeypatch.setenv("SHADENORM_THREADS", "8")
    b = solve_masked(seq256)
    assert a.normals.normals.tobytes() == b.normals.normals.tobytes()
    assert a.status.tobytes() == b.status.tobytes()


def test_signed_input_rejected(seq256):
    from shadenorm.errors import DomainError
    from shadenorm.render import encode_signed
    with pytest.raises(DomainError):
        solve_masked(encode_signed(seq256))
