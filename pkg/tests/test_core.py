import math

import numpy as np
import pytest

from shadenorm.core import LightPath, RingSpec, gen_ring, sample_cap, synth_sphere
from shadenorm.errors import ParameterError

H = math.sqrt(2) / 2


def test_ring_first_direction_at_45():
    d = gen_ring(RingSpec(1, 45, 0)).directions
    np.testing.assert_allclose(d[0], [H, 0, H], atol=1e-15)


def test_nine_ring_height_and_spacing():
    lp = gen_ring(RingSpec(9, 45, 0))
    d = lp.directions
    assert d.shape == (9, 3)
    np.testing.assert_allclose(d[:, 2], H, atol=1e-15)
    az = np.degrees(np.arctan2(d[:, 1], d[:, 0])) % 360
    np.testing.assert_allclose(np.diff(az), 40.0, atol=1e-9)
    assert lp.provenance == RingSpec(9, 45.0, 0.0)


def test_four_ring_symmetry():
    d = gen_ring(RingSpec(4, 45, 0)).directions
    az = np.degrees(np.arctan2(d[:, 1], d[:, 0])) % 360
    np.testing.assert_allclose(az, [0, 90, 180, 270], atol=1e-9)
    assert abs(d[:, 0].sum()) < 1e-15
    assert abs(d[:, 1].sum()) < 1e-15


@pytest.mark.parametrize("spec", [(0, 45, 0), (3, 0, 0), (3, 90, 0), (3, 45, 360), (3, -1, 0)])
def test_ring_rejects_bad_params(spec):
    with pytest.raises(ParameterError):
        gen_ring(RingSpec(*spec))


@pytest.mark.parametrize("count", range(3, 17))
@pytest.mark.parametrize("elev", [5.0, 30.0, 45.0, 60.0, 85.0])
def test_ring_full_rank(count, elev):
    lp = gen_ring(RingSpec(count, elev, 17.0))
    assert lp.full_rank()
    sv = np.linalg.svd(lp.directions, compute_uv=False)
    assert sv[-1] > 1e-8 * sv[0]


def test_small_paths_not_full_rank():
    assert not gen_ring(RingSpec(2, 45, 0)).full_rank()
    coplanar = LightPath([[0.6, 0, 0.8], [0, 0.6, 0.8], [-0.6, 0, 0.8], [0, -0.6, 0.8]])
    assert coplanar.full_rank()  # ring at fixed height still spans R^3
    same = LightPath([[0, 0, 1.0]] * 4)
    assert not same.full_rank()


@pytest.mark.parametrize("count", range(2, 17))
def test_ring_directions_distinct(count):
    d = gen_ring(RingSpec(count, 45, 0)).directions
    gaps = np.linalg.norm(d[:, None] - d[None], axis=2) + np.eye(count)
    assert gaps.min() > 1e-6


def test_lightpath_rejects_lower_hemisphere():
    with pytest.raises(ParameterError):
        LightPath([[0, 0, -1.0]])
    with pytest.raises(ParameterError):
        LightPath([[0, 0, 2.0]])


def test_sample_cap_mean_z_hemisphere():
    v = sample_cap(100_000, 0.0, seed=1)
    assert np.max(np.abs(np.linalg.norm(v, axis=1) - 1)) < 1e-12
    assert abs(v[:, 2].mean() - 0.5) < 0.01


def test_sample_cap_respects_min_z():
    v = sample_cap(100_000, 0.9, seed=2)
    assert np.all(v[:, 2] > 0.9)


def test_sample_cap_deterministic():
    a = sample_cap(1000, 0.2, seed=7)
    b = sample_cap(1000, 0.2, seed=7)
    assert a.tobytes() == b.tobytes()


def test_sample_cap_z_histogram_uniform():
    n, bins = 1_000_000, 20
    z = sample_cap(n, 0.0, seed=3)[:, 2]
    # equal-area bands of a hemisphere are equal-width bands in z
    counts, _ = np.histogram(z, bins=bins, range=(0, 1))
    p = 1 / bins
    sd = math.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 3 * sd)


def test_sample_cap_azimuth_uniform():
    v = sample_cap(200_000, 0.0, seed=4)
    az = np.arctan2(v[:, 1], v[:, 0])
    counts, _ = np.histogram(az, bins=12, range=(-np.pi, np.pi))
    n, p = v.shape[0], 1 / 12
    assert np.all(np.abs(counts - n * p) < 4 * math.sqrt(n * p * (1 - p)))


def test_sphere_center_and_background():
    s = synth_sphere(64)
    np.testing.assert_array_equal(s.normals[32, 32], [0, 0, 1])
    assert not s.mask[0, 0]
    np.testing.assert_array_equal(s.normals[0, 0], [0, 0, 0])


def test_sphere_disc_area():
    s = synth_sphere(256)
    expected = math.pi * (0.45 * 256) ** 2
    assert abs(s.mask.sum() - expected) / expected < 0.01


def test_sphere_normals_unit_and_facing():
    s = synth_sphere(96).validate()
    v = s.normals[s.mask]
    assert np.max(np.abs(np.linalg.norm(v, axis=1) - 1)) < 1e-12
    assert np.all(v[:, 2] > 0)


def test_sphere_orientation():
    # image right is +x, image up is +y
    s = synth_sphere(64)
    assert s.normals[32, 50, 0] > 0.5
    assert s.normals[10, 32, 1] > 0.5


def test_sphere_rejects_tiny():
    with pytest.raises(ParameterError):
        synth_sphere(3)
