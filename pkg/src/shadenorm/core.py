"""Geometric primitives, ring light paths, cap sampling and the sphere fixture.

Conventions: right-handed frame, camera on the +z axis looking toward -z,
image x to the right and image y up. Normals and light directions point
from the surface toward the hemisphere holding the camera, so "upper
hemisphere" means z > 0.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError, StructuralError

UNIT_TOL = 1e-6
RANK_RTOL = 1e-8


def unit(v):
    """Normalize a vector (or the last axis of an array) to unit length."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise ParameterError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class RingSpec:
    count: int = 9
    elevation_deg: float = 45.0
    phase_deg: float = 0.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ParameterError(f"ring count must be a positive integer, got {self.count!r}")
        if not 0.0 < self.elevation_deg < 90.0:
            raise ParameterError(
                f"ring elevation must lie strictly between 0 and 90 degrees, got {self.elevation_deg!r}")
        if not 0.0 <= self.phase_deg < 360.0:
            raise ParameterError(f"ring phase must lie in [0, 360), got {self.phase_deg!r}")


@dataclass
class LightPath:
    """Ordered parallel-light directions, shape (f, 3).

    ``provenance`` is the RingSpec that generated the path, or None for a
    custom path.
    """
    directions: np.ndarray
    provenance: Optional[RingSpec] = None

    def __post_init__(self):
        d = np.array(self.directions, dtype=np.float64, copy=True)
        if d.ndim != 2 or d.shape[1] != 3 or d.shape[0] < 1:
            raise StructuralError(f"light directions must have shape (f>=1, 3), got {d.shape}")
        if np.any(np.abs(np.linalg.norm(d, axis=1) - 1.0) > UNIT_TOL):
            raise ParameterError("light directions must be unit vectors")
        if np.any(d[:, 2] <= 0):
            raise ParameterError("light directions must lie in the upper hemisphere (z > 0)")
        d.setflags(write=False)
        self.directions = d

    def __len__(self):
        return self.directions.shape[0]

    def full_rank(self):
        if len(self) < 3:
            return False
        sv = np.linalg.svd(self.directions, compute_uv=False)
        return bool(sv[-1] > RANK_RTOL * sv[0])


@dataclass
class NormalMap:
    """Per-pixel unit normals (H, W, 3) with an object mask (H, W).

    Masked-out pixels hold the zero vector.
    """
    normals: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        n = np.asarray(self.normals, dtype=np.float64)
        if n.ndim != 3 or n.shape[2] != 3:
            raise StructuralError(f"normals must have shape (H, W, 3), got {n.shape}")
        if self.mask is None:
            m = np.linalg.norm(n, axis=2) > 0
        else:
            m = np.asarray(self.mask, dtype=bool)
        if m.shape != n.shape[:2]:
            raise StructuralError(f"mask shape {m.shape} does not match normals {n.shape[:2]}")
        n = np.where(m[..., None], n, 0.0)
        self.normals = n
        self.mask = m

    @property
    def height(self):
        return self.normals.shape[0]

    @property
    def width(self):
        return self.normals.shape[1]

    @property
    def shape(self):
        return self.normals.shape[:2]

    def validate(self):
        """Raise if masked-in normals are not unit length or face away from the camera."""
        v = self.normals[self.mask]
        if v.size and np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0)) > UNIT_TOL:
            raise ParameterError("masked-in normals must be unit vectors")
        if v.size and np.any(v[:, 2] <= 0):
            raise ParameterError("masked-in normals must face the camera (n_z > 0)")
        return self


def gen_ring(spec):
    """Lights uniformly spaced in azimuth on a latitude ring.

    Direction i is (cos e cos t_i, cos e sin t_i, sin e) with
    t_i = phase + 2 pi i / count.
    """
    if not isinstance(spec, RingSpec):
        spec = RingSpec(*spec)
    e = np.deg2rad(spec.elevation_deg)
    t = np.deg2rad(spec.phase_deg) + 2.0 * np.pi * np.arange(spec.count) / spec.count
    d = np.stack([np.cos(e) * np.cos(t), np.cos(e) * np.sin(t), np.full_like(t, np.sin(e))], axis=1)
    return LightPath(d, provenance=spec)


def sample_cap(n, min_z=0.0, seed=0):
    """Draw ``n`` unit vectors uniformly (area measure) from the cap z > min_z.

    Uses Archimedes' hat-box theorem: z is uniform on the cap's z range.
    """
    if int(n) != n or n < 1:
        raise ParameterError(f"sample count must be >= 1, got {n!r}")
    if not 0.0 <= min_z < 1.0:
        raise ParameterError(f"min_z must lie in [0, 1), got {min_z!r}")
    rng = np.random.default_rng(seed)
    u = rng.random(int(n))
    phi = 2.0 * np.pi * rng.random(int(n))
    # 1 - u lies in (0, 1], so z stays strictly above min_z
    z = min_z + (1.0 - min_z) * (1.0 - u)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def synth_sphere(size):
    """Orthographic unit sphere of radius 0.45*size centred on pixel (size//2, size//2)."""
    if int(size) != size or size < 4:
        raise ParameterError(f"sphere size must be an integer >= 4, got {size!r}")
    size = int(size)
    c = size // 2
    r = 0.45 * size
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    u = (cols - c) / r
    v = -(rows - c) / r
    rr = u * u + v * v
    mask = rr < 1.0
    z = np.sqrt(np.clip(1.0 - rr, 0.0, None))
    normals = np.stack([u, v, z], axis=2)
    return NormalMap(normals, mask)


def rotation_matrix(axis, angle_rad):
    """Rodrigues rotation about ``axis``."""
    k = unit(axis)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle_rad) * kx + (1 - np.cos(angle_rad)) * kx @ kx
